"""Pipeline configuration and its INI file format.

A config file has one flat section per stage::

    [input]
    path = data.csv

    [synthetic]          ; used when no input path is given
    p = 10
    expected_degree = 2
    mechanism = linear_gaussian
    n = 10000
    noise_sigma = 1.0

    [skeleton]
    method = dependency_graph
    alpha = 0.01
    correction = bh

    [orientation]
    method = hill_climb

    [run]
    seed = 1
    threads = auto
    use_skeleton_as_whitelist = true

    [output]
    format = dot
    path = graph.dot
    truth = truth.csv

Command-line flags override file values.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .graph import Format
from .skeleton import BlanketRule, Correction, PairTest
from .synthetic import Mechanism


class SkeletonMethod(str, Enum):
    DEPENDENCY_GRAPH = "dependency_graph"
    DECONVOLUTION = "deconvolution"
    GLASSO = "glasso"
    IAMB = "iamb"
    NONE = "none"


class OrientationMethod(str, Enum):
    PC = "pc"
    HILL_CLIMB = "hill_climb"
    ANM = "anm"
    NONE = "none"


@dataclass
class SkeletonParams:
    method: SkeletonMethod = SkeletonMethod.DEPENDENCY_GRAPH
    test: PairTest = PairTest.PEARSON_FISHER_Z
    alpha: float = 0.01
    correction: Correction = Correction.BH
    permutations: int = 200
    beta: float = 0.9
    density: float = 0.3
    lam: float = 0.1
    rule: BlanketRule = BlanketRule.AND


@dataclass
class OrientationParams:
    method: OrientationMethod = OrientationMethod.PC
    alpha: float = 0.01
    max_cond_size: int | None = 3
    max_indegree: int | None = None
    tabu_length: int = 0
    max_iters: int = 10_000
    threshold: float = 0.05
    ridge: float = 1e-3


@dataclass
class SyntheticParams:
    p: int = 10
    expected_degree: float = 2.0
    mechanism: Mechanism = Mechanism.LINEAR_GAUSSIAN
    n: int = 1000
    noise_sigma: float = 1.0


@dataclass
class PipelineConfig:
    input: str | None = None
    synthetic: SyntheticParams | None = None
    skeleton: SkeletonParams = field(default_factory=SkeletonParams)
    orientation: OrientationParams = field(default_factory=OrientationParams)
    use_skeleton_as_whitelist: bool = True
    seed: int = 0
    threads: int | str | None = None  # None: $CDKIT_THREADS, else auto
    output_format: Format = Format.DOT
    output_path: str | None = None
    truth: str | None = None

    def validate(self) -> None:
        if self.skeleton.method is SkeletonMethod.NONE and self.orientation.method is OrientationMethod.NONE:
            raise ConfigError("at least one of the skeleton and orientation methods must be set")
        if self.input is None and self.synthetic is None:
            raise ConfigError("no input data: give an input path or a [synthetic] section")

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> PipelineConfig:
        d = dict(d)
        syn = d.pop("synthetic", None)
        return cls(
            synthetic=_build(SyntheticParams, syn) if syn is not None else None,
            skeleton=_build(SkeletonParams, d.pop("skeleton", {})),
            orientation=_build(OrientationParams, d.pop("orientation", {})),
            **{k: _coerce(_field_types(cls)[k], v) for k, v in d.items()},
        )


def _plain(v):
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _field_types(cls) -> dict[str, Any]:
    import typing

    return typing.get_type_hints(cls)


def _coerce(tp, value):
    """Convert a config value (often a string) to the annotated field type."""
    import types
    import typing

    if value is None:
        return None
    args = typing.get_args(tp)
    if typing.get_origin(tp) in (typing.Union, types.UnionType):
        if isinstance(value, str) and value.strip().lower() in ("none", "null", ""):
            return None
        last = None
        for a in args:
            if a is type(None):
                continue
            try:
                return _coerce(a, value)
            except (ValueError, ConfigError) as exc:
                last = exc
        raise ConfigError(f"cannot interpret {value!r}") from last
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(value.lower() if isinstance(value, str) else value)
        except ValueError:
            allowed = ", ".join(m.value for m in tp)
            raise ConfigError(f"{value!r} is not one of: {allowed}") from None
    if tp is bool:
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{value!r} is not a boolean")
    if tp is int:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value!r} is not an integer")
        return int(value)
    if tp is float:
        return float(value)
    if tp is str:
        return str(value)
    return value


def _build(cls, values: dict):
    types_ = _field_types(cls)
    unknown = set(values) - set(types_)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**{k: _coerce(types_[k], v) for k, v in values.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_SECTION_KEYS = {
    "input": {"path": "input"},
    "run": {"seed": "seed", "threads": "threads", "use_skeleton_as_whitelist": "use_skeleton_as_whitelist"},
    "output": {"format": "output_format", "path": "output_path", "truth": "truth"},
}


def load_config(path: str | Path) -> PipelineConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    top: dict[str, Any] = {}
    nested: dict[str, dict] = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section in ("skeleton", "orientation", "synthetic"):
            if "lambda" in items:
                items["lam"] = items.pop("lambda")
            nested[section] = items
        elif section in _SECTION_KEYS:
            for k, v in items.items():
                if k not in _SECTION_KEYS[section]:
                    raise ConfigError(f"unknown key {k!r} in [{section}]")
                top[_SECTION_KEYS[section][k]] = v
        else:
            raise ConfigError(f"unknown config section [{section}]")
    return PipelineConfig.from_dict({**top, **nested})


def apply_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    """Return ``cfg`` with non-None overrides applied.

    Keys are top-level field names, or ``skeleton__<key>`` /
    ``orientation__<key>`` for stage parameters.
    """
    d = cfg.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if "__" in key:
            section, name = key.split("__", 1)
            d.setdefault(section, {})[name] = value
        else:
            d[key] = value
    return PipelineConfig.from_dict(d)
