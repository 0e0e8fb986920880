"""Pairwise orientation with the additive noise model.

For a candidate direction ``x -> y`` the effect is regressed on the cause
with RBF kernel ridge regression and the dependence between residual and
cause is measured by HSIC.  The direction with the less dependent residual
wins when the log-score gap exceeds a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .data import Dataset
from .errors import LengthMismatch, OutOfRange, SolveFailure, TooFewSamples
from .graph import MixedGraph, meek_closure
from .graph.orient import _Pdag
from .indep import HSIC_MIN_SAMPLES, hsic_statistic, median_heuristic_bandwidth, rbf_gram
from .runtime import pmap

_SCORE_FLOOR = 1e-300


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class KernelRidgeModel:
    inputs: np.ndarray
    dual_coef: np.ndarray
    bandwidth: float
    ridge: float
    offset: float

    def predict(self, x) -> np.ndarray:
        k = rbf_gram(np.asarray(x, dtype=float), self.bandwidth, self.inputs)
        return k @ self.dual_coef + self.offset


@dataclass
class AnmConfig:
    ridge: float = 1e-3
    threshold: float = 0.05
    threads: int = 1

    def __post_init__(self):
        if not self.ridge > 0:
            raise OutOfRange("ridge must be positive")
        if self.threshold < 0:
            raise OutOfRange("threshold must be >= 0")


@dataclass(frozen=True)
class PairDecision:
    direction: Direction
    score_forward: float
    score_backward: float
    confidence: float

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "score_forward": self.score_forward,
            "score_backward": self.score_backward,
            "confidence": self.confidence,
        }


def _check_pair(x: np.ndarray, y: np.ndarray) -> None:
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} samples")
    if x.size < HSIC_MIN_SAMPLES:
        raise TooFewSamples(f"need at least {HSIC_MIN_SAMPLES} samples, got {x.size}")


def kernel_ridge_fit(x, y, bandwidth: float | None = None, ridge: float = 1e-3) -> KernelRidgeModel:
    """Fit ``(K + n * ridge * I) a = y - mean(y)`` with an RBF Gram matrix of ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    _check_pair(x, y)
    if not ridge > 0:
        raise OutOfRange("ridge must be positive")
    if bandwidth is None:
        bandwidth = median_heuristic_bandwidth(x).bandwidth
    elif not bandwidth > 0:
        raise OutOfRange("bandwidth must be positive")
    n = x.size
    offset = float(y.mean())
    a = rbf_gram(x, bandwidth) + n * ridge * np.eye(n)
    try:
        coef = linalg.solve(a, y - offset, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as exc:
        raise SolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(coef)):
        raise SolveFailure("non-finite dual coefficients")
    return KernelRidgeModel(x.copy(), coef, float(bandwidth), float(ridge), offset)


def anm_residuals(x, y, bandwidth: float | None = None, ridge: float = 1e-3) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    return y - kernel_ridge_fit(x, y, bandwidth, ridge).predict(x)


def _standardized(v: np.ndarray) -> np.ndarray:
    sd = v.std()
    return (v - v.mean()) / sd if sd > 0 else v - v.mean()


def anm_score(cause, effect, ridge: float = 1e-3) -> float:
    """HSIC between the regression residual of ``effect`` on ``cause`` and ``cause``."""
    cause = _standardized(np.asarray(cause, dtype=float).ravel())
    effect = _standardized(np.asarray(effect, dtype=float).ravel())
    return hsic_statistic(anm_residuals(cause, effect, ridge=ridge), cause)


def anm_decide(x, y, threshold: float | None = None, cfg: AnmConfig | None = None) -> PairDecision:
    """Decide between ``x -> y`` and ``y -> x``.

    Both inputs are standardized first, so the decision does not depend on
    affine rescaling.
    """
    cfg = cfg or AnmConfig()
    threshold = cfg.threshold if threshold is None else threshold
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    _check_pair(x, y)
    fwd = anm_score(x, y, cfg.ridge)
    bwd = anm_score(y, x, cfg.ridge)
    gap = math.log(max(bwd, _SCORE_FLOOR)) - math.log(max(fwd, _SCORE_FLOOR))
    if gap > threshold:
        direction = Direction.FORWARD
    elif -gap > threshold:
        direction = Direction.BACKWARD
    else:
        direction = Direction.INCONCLUSIVE
    return PairDecision(direction, fwd, bwd, abs(gap))


def orient_skeleton_pairwise(d: Dataset, skeleton: MixedGraph, cfg: AnmConfig | None = None) -> MixedGraph:
    """Orient each undirected edge by its pairwise ANM decision.

    Inconclusive edges stay undirected.  If the new orientations close a
    directed cycle, the lowest-confidence new orientation on a cycle is
    reverted to undirected, repeatedly, until none remains.  Meek closure
    finishes the job.
    """
    cfg = cfg or AnmConfig()
    if skeleton.node_count != d.p:
        raise OutOfRange("skeleton node count differs from the dataset")
    pairs = sorted(skeleton.undirected)
    decisions = pmap(lambda ij: anm_decide(d.values[:, ij[0]], d.values[:, ij[1]], cfg=cfg), pairs, cfg.threads)
    work = _Pdag(skeleton)
    confidence: dict[tuple[int, int], float] = {}
    for (i, j), dec in zip(pairs, decisions):
        if dec.direction is Direction.FORWARD:
            work.orient(i, j)
            confidence[(i, j)] = dec.confidence
        elif dec.direction is Direction.BACKWARD:
            work.orient(j, i)
            confidence[(j, i)] = dec.confidence
    while True:
        cycle = _find_cycle(work)
        if cycle is None:
            break
        on_cycle = [e for e in cycle if e in confidence]
        if not on_cycle:
            # the cycle runs through pre-existing orientations only; nothing of ours to revert
            break
        weakest = min(on_cycle, key=lambda e: (confidence[e], e))
        work.unorient(*weakest)
        del confidence[weakest]
    return meek_closure(work.to_graph())


def _find_cycle(w: _Pdag) -> list[tuple[int, int]] | None:
    """Edges of one directed cycle, searching from the lowest index; None if acyclic."""
    p = len(w.names)
    color = [0] * p
    stack_edges: list[tuple[int, int]] = []

    def visit(v):
        color[v] = 1
        for c in sorted(w.ch[v]):
            stack_edges.append((v, c))
            if color[c] == 1:
                start = next(k for k, e in enumerate(stack_edges) if e[0] == c)
                return stack_edges[start:]
            if color[c] == 0:
                found = visit(c)
                if found is not None:
                    return found
            stack_edges.pop()
        color[v] = 2
        return None

    for v in range(p):
        if color[v] == 0:
            found = visit(v)
            if found is not None:
                return found
    return None
