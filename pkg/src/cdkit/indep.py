"""Marginal and conditional independence tests.

Gaussian tests work from a correlation matrix: partial correlations come from
inverting the small submatrix over ``{i, j} | S`` and are scored with
Fisher's z transform.  HSIC covers the nonparametric case needed by the
additive noise model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import (
    DegenerateCorrelation,
    DegenerateSample,
    LengthMismatch,
    OutOfRange,
    SingularSubmatrix,
    TooFewSamples,
)

RHO_CLAMP = 0.999999
HSIC_MIN_SAMPLES = 20
BANDWIDTH_MAX_POINTS = 1000


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    dof_or_n: int

    __test__ = False  # not a pytest class

    def independent(self, alpha: float) -> bool:
        return self.p_value > alpha


@dataclass(frozen=True)
class KernelParams:
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise OutOfRange(f"bandwidth must be positive, got {self.bandwidth}")


def partial_correlation(corr: np.ndarray, i: int, j: int, s: Iterable[int] = ()) -> float:
    """Partial correlation of ``i`` and ``j`` given ``s``, clamped to +/-0.999999."""
    s = sorted(s)
    if i == j or i in s or j in s:
        raise ValueError("i, j must be distinct and outside the conditioning set")
    if not s:
        rho = float(corr[i, j])
    else:
        idx = [i, j] + s
        sub = corr[np.ix_(idx, idx)]
        if np.linalg.cond(sub) > 1e12:
            raise SingularSubmatrix(f"correlation submatrix over {idx} is singular")
        try:
            prec = np.linalg.inv(sub)
        except np.linalg.LinAlgError as exc:
            raise SingularSubmatrix(str(exc)) from exc
        denom = prec[0, 0] * prec[1, 1]
        if not denom > 0:
            raise SingularSubmatrix(f"non-positive precision diagonal over {idx}")
        rho = float(-prec[0, 1] / math.sqrt(denom))
    return min(RHO_CLAMP, max(-RHO_CLAMP, rho))


def fisher_z_test(rho: float, n: int, s: int = 0) -> TestResult:
    """Two-sided Fisher z test of zero (partial) correlation.

    ``s`` is the size of the conditioning set; the effective sample size is
    ``n - s - 3``.
    """
    dof = n - s - 3
    if dof < 1:
        raise TooFewSamples(f"n - |S| - 3 = {dof} < 1 (n={n}, |S|={s})")
    rho = min(RHO_CLAMP, max(-RHO_CLAMP, float(rho)))
    z = math.sqrt(dof) * math.atanh(rho)
    p = float(2.0 * stats.norm.sf(abs(z)))
    return TestResult(z, min(1.0, max(0.0, p)), dof)


def gaussian_mi(rho: float) -> float:
    """Mutual information (nats) of a bivariate Gaussian with correlation ``rho``."""
    if abs(rho) >= 1:
        raise DegenerateCorrelation(f"|rho| = {abs(rho)} >= 1")
    return -0.5 * math.log1p(-rho * rho)


def median_heuristic_bandwidth(x: Sequence[float]) -> KernelParams:
    """Median of pairwise absolute differences.

    Samples above 1000 points are subsampled (fixed seed) before taking the
    median.  Heavily tied samples whose median distance is zero fall back to
    the median of the nonzero distances.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise TooFewSamples("bandwidth heuristic needs at least 2 points")
    if x.size > BANDWIDTH_MAX_POINTS:
        rng = np.random.default_rng(0)
        x = x[np.sort(rng.choice(x.size, BANDWIDTH_MAX_POINTS, replace=False))]
    iu = np.triu_indices(x.size, k=1)
    dist = np.abs(x[:, None] - x[None, :])[iu]
    med = float(np.median(dist))
    if med <= 0:
        nz = dist[dist > 0]
        if nz.size == 0:
            raise DegenerateSample("all pairwise distances are zero")
        med = float(np.median(nz))
    return KernelParams(med)


def rbf_gram(x: np.ndarray, bandwidth: float, y: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix of ``exp(-(a - b)**2 / bandwidth**2)``.

    With the median-distance bandwidth this is ``exp(-d**2 / median(d)**2)``,
    the usual HSIC kernel width.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = x if y is None else np.asarray(y, dtype=float).ravel()
    d2 = (x[:, None] - y[None, :]) ** 2
    return np.exp(-d2 / (bandwidth * bandwidth))


def _center(k: np.ndarray) -> np.ndarray:
    # H K H without forming H
    return k - k.mean(axis=0, keepdims=True) - k.mean(axis=1, keepdims=True) + k.mean()


def hsic_statistic(x, y, kx: KernelParams | None = None, ky: KernelParams | None = None) -> float:
    return hsic_test(x, y, kx, ky, mode="none").statistic


def hsic_test(
    x,
    y,
    kx: KernelParams | None = None,
    ky: KernelParams | None = None,
    mode: str = "gamma",
    permutations: int = 500,
    seed: int | None = 0,
) -> TestResult:
    """HSIC independence test with RBF kernels.

    The statistic is the biased estimator ``trace(Kc Lc) / n**2``.  ``mode``
    selects the p-value: ``"gamma"`` (two-moment gamma approximation of the
    null), ``"permutation"`` (permuting ``y``), or ``"none"`` (p-value 1,
    statistic only).  Bandwidths default to the median heuristic; a constant
    input gets a unit bandwidth since its centered Gram matrix vanishes.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} samples")
    n = x.size
    if n < HSIC_MIN_SAMPLES:
        raise TooFewSamples(f"HSIC needs at least {HSIC_MIN_SAMPLES} samples, got {n}")
    kx = kx or _bandwidth_or_unit(x)
    ky = ky or _bandwidth_or_unit(y)
    k = rbf_gram(x, kx.bandwidth)
    l = rbf_gram(y, ky.bandwidth)
    kc, lc = _center(k), _center(l)
    stat = float(np.sum(kc * lc)) / (n * n)
    if mode == "none":
        return TestResult(stat, 1.0, n)
    if mode == "gamma":
        return TestResult(stat, _gamma_pvalue(k, l, kc, lc, stat), n)
    if mode == "permutation":
        rng = np.random.default_rng(seed)
        exceed = 0
        for _ in range(permutations):
            perm = rng.permutation(n)
            if float(np.sum(kc * lc[np.ix_(perm, perm)])) / (n * n) >= stat - 1e-15:
                exceed += 1
        return TestResult(stat, (1 + exceed) / (1 + permutations), n)
    raise OutOfRange(f"unknown HSIC mode {mode!r}")


def _bandwidth_or_unit(v: np.ndarray) -> KernelParams:
    if np.all(v == v[0]):
        return KernelParams(1.0)
    return median_heuristic_bandwidth(v)


def _gamma_pvalue(k, l, kc, lc, stat) -> float:
    n = k.shape[0]
    test_stat = n * stat
    var = (kc * lc / 6.0) ** 2
    var = (var.sum() - np.trace(var)) / n / (n - 1)
    var = var * 72 * (n - 4) * (n - 5) / n / (n - 1) / (n - 2) / (n - 3)
    mu_x = (k.sum() - np.trace(k)) / n / (n - 1)
    mu_y = (l.sum() - np.trace(l)) / n / (n - 1)
    mean = (1 + mu_x * mu_y - mu_x - mu_y) / n
    if not (var > 0 and mean > 0):
        return 1.0
    shape = mean * mean / var
    scale = var * n / mean
    return float(min(1.0, max(0.0, stats.gamma.sf(test_stat, shape, scale=scale))))


def bh_adjust(p_values: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=float)
    if p.size == 0:
        return []
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise OutOfRange("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = np.minimum(1.0, m * p[order] / np.arange(1, m + 1))
    q = np.minimum.accumulate(scaled[::-1])[::-1]
    # m*p/k can round below p when k == m
    q = np.maximum(q, p[order])
    out = np.empty(m)
    out[order] = q
    return out.tolist()


def bonferroni_adjust(p_values: Sequence[float]) -> list[float]:
    p = np.asarray(p_values, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise OutOfRange("p-values must lie in [0, 1]")
    return np.minimum(1.0, p * p.size).tolist()
