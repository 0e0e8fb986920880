"""Random DAGs and data sampled from them, with known ground truth."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .data import Dataset
from .errors import SpecInvalid
from .graph import MixedGraph, default_names, topological_order


class Mechanism(str, Enum):
    LINEAR_GAUSSIAN = "linear_gaussian"
    NONLINEAR_ANM = "nonlinear_anm"


@dataclass(frozen=True)
class SyntheticSpec:
    p: int = 10
    expected_degree: float = 2.0
    mechanism: Mechanism = Mechanism.LINEAR_GAUSSIAN
    n: int = 1000
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.p < 2:
            raise SpecInvalid(f"p must be >= 2, got {self.p}")
        if self.n < 2:
            raise SpecInvalid(f"n must be >= 2, got {self.n}")
        if not 0 <= self.expected_degree < self.p:
            raise SpecInvalid(f"expected_degree must be in [0, p), got {self.expected_degree}")
        if self.expected_degree > self.p - 1:
            raise SpecInvalid("expected_degree cannot exceed p - 1")
        if self.noise_sigma < 0:
            raise SpecInvalid("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mechanism"] = self.mechanism.value
        return d


def random_dag(p: int, edge_prob: float, rng: np.random.Generator, names=None) -> MixedGraph:
    """DAG from a random topological order with independent edge inclusion."""
    order = rng.permutation(p)
    edges = set()
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < edge_prob:
                edges.add((int(order[a]), int(order[b])))
    return MixedGraph(names or default_names(p), frozenset(edges))


def _cubic(v):
    return v**3


def _sine(v):
    return np.sin(2 * np.pi * v)


NONLINEAR_FUNCS = (_cubic, _sine)


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, MixedGraph]:
    """Sample a random DAG and ``spec.n`` rows from a structural model on it.

    Linear: each node is a weighted parent sum (weights uniform on
    +/-[0.5, 1.5]) plus ``noise_sigma`` Gaussian noise.  Nonlinear: roots are
    uniform on [-1, 1]; each parent, rescaled to [-1, 1], passes through a
    randomly chosen cubic or sine before summing, plus Gaussian noise.
    """
    rng = np.random.default_rng(spec.seed)
    q = spec.expected_degree / (spec.p - 1)
    truth = random_dag(spec.p, q, rng)
    x = np.zeros((spec.n, spec.p))
    for v in topological_order(truth):
        pa = sorted(truth.parents(v))
        noise = spec.noise_sigma * rng.standard_normal(spec.n)
        if spec.mechanism is Mechanism.LINEAR_GAUSSIAN:
            w = rng.uniform(0.5, 1.5, len(pa)) * rng.choice([-1.0, 1.0], len(pa))
            x[:, v] = x[:, pa] @ w + noise if pa else noise
        else:
            if not pa:
                x[:, v] = rng.uniform(-1, 1, spec.n)
                continue
            total = np.zeros(spec.n)
            for u in pa:
                f = NONLINEAR_FUNCS[rng.integers(len(NONLINEAR_FUNCS))]
                scale = np.max(np.abs(x[:, u])) or 1.0
                total += f(x[:, u] / scale)
            x[:, v] = total + noise
    return Dataset(x, truth.names), truth


def anm_pair(mechanism: str, n: int = 500, noise_sigma: float = 0.2, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """One cause-effect pair: cause uniform on [-1, 1], effect = f(cause) + noise.

    ``mechanism`` is ``"cubic"``, ``"sine"`` or ``"linear_gaussian"`` (the
    last draws a standard normal cause with a linear effect, which is not
    identifiable).
    """
    rng = np.random.default_rng(seed)
    if mechanism == "linear_gaussian":
        x = rng.standard_normal(n)
        return x, 0.8 * x + 0.6 * rng.standard_normal(n)
    x = rng.uniform(-1, 1, n)
    f = {"cubic": _cubic, "sine": _sine}[mechanism]
    return x, f(x) + noise_sigma * rng.standard_normal(n)
