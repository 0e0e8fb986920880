"""Thread budget and deterministic seed streams."""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

from .errors import ConfigError

THREADS_ENV = "CDKIT_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def detect_cpus() -> int:
    return os.cpu_count() or 1


def resolve_threads(value: int | str | None = None) -> int:
    """Resolve a thread setting: explicit value, then ``CDKIT_THREADS``, then CPU count.

    ``"auto"`` (any case) means the detected logical CPU count.
    """
    if value is None:
        value = os.environ.get(THREADS_ENV, "auto")
    if isinstance(value, str):
        if value.strip().lower() == "auto":
            return detect_cpus()
        try:
            value = int(value)
        except ValueError:
            raise ConfigError(f"threads must be a positive integer or 'auto', got {value!r}") from None
    if value < 1:
        raise ConfigError(f"threads must be >= 1, got {value}")
    return int(value)


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Ordered map, on a thread pool when ``threads > 1``."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def derive_seed(master: int, *labels) -> int:
    """Child seed for a labelled stream, independent of other labels."""
    words = [int(master) & 0xFFFFFFFF]
    for lab in labels:
        words.append(lab & 0xFFFFFFFF if isinstance(lab, int) else zlib.crc32(str(lab).encode()))
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0] >> 1)


def rng_for(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))
