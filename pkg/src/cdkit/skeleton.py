"""Undirected skeleton recovery.

Four routes to the dependence graph: thresholded pairwise tests, network
deconvolution of the correlation matrix, the graphical lasso, and IAMB
Markov blankets symmetrized into a (moral) graph.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

from .data import Dataset, summary_stats
from .errors import BetaOutOfRange, EigenFailure, NotPSD, OutOfRange
from .graph import MixedGraph, default_names
from .indep import bh_adjust, bonferroni_adjust, fisher_z_test, gaussian_mi, partial_correlation
from .runtime import pmap, rng_for

log = logging.getLogger(__name__)


class PairTest(str, Enum):
    PEARSON_FISHER_Z = "pearson_fisher_z"
    GAUSSIAN_MI_PERM = "gaussian_mi_perm"


class Correction(str, Enum):
    NONE = "none"
    BH = "bh"
    BONFERRONI = "bonferroni"


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise OutOfRange(f"alpha must be in (0, 1), got {alpha}")


def pairwise_pvalues(
    d: Dataset,
    test: PairTest | str = PairTest.PEARSON_FISHER_Z,
    permutations: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> tuple[list[tuple[int, int]], list[float]]:
    """p-values of the marginal test for every pair ``i < j``."""
    test = PairTest(test)
    pairs = list(combinations(range(d.p), 2))
    if test is PairTest.PEARSON_FISHER_Z:
        corr = summary_stats(d).correlation
        return pairs, [fisher_z_test(corr[i, j], d.n).p_value for i, j in pairs]

    z = (d.values - d.values.mean(axis=0)) / d.values.std(axis=0)

    def perm_test(pair):
        i, j = pair
        rng = rng_for(seed, "mi_perm", i, j)
        xi, xj = z[:, i], z[:, j]
        observed = gaussian_mi(min(0.999999, abs(float(xi @ xj) / d.n)))
        exceed = 0
        for _ in range(permutations):
            r = abs(float(xi @ xj[rng.permutation(d.n)]) / d.n)
            if gaussian_mi(min(0.999999, r)) >= observed:
                exceed += 1
        return (1 + exceed) / (1 + permutations)

    return pairs, pmap(perm_test, pairs, threads)


def dependency_graph(
    d: Dataset,
    test: PairTest | str = PairTest.PEARSON_FISHER_Z,
    alpha: float = 0.05,
    correction: Correction | str = Correction.NONE,
    permutations: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> MixedGraph:
    """Undirected edge wherever the (corrected) pairwise p-value is at most ``alpha``."""
    _check_alpha(alpha)
    correction = Correction(correction)
    pairs, pvals = pairwise_pvalues(d, test, permutations, seed, threads)
    if correction is Correction.BH:
        pvals = bh_adjust(pvals)
    elif correction is Correction.BONFERRONI:
        pvals = bonferroni_adjust(pvals)
    edges = frozenset(pr for pr, pv in zip(pairs, pvals) if pv <= alpha)
    return MixedGraph(d.names, undirected=edges)


# -- network deconvolution ----------------------------------------------------


def network_deconvolution(obs: np.ndarray, beta: float | None = 0.9) -> np.ndarray:
    """Remove transitive weight from a symmetric similarity matrix.

    Inverts the closure map ``G_obs = G_dir (I - G_dir)^-1`` spectrally:
    each eigenvalue ``l`` of the (rescaled) input becomes ``l / (1 + l)``.
    The input is first scaled so its largest-magnitude eigenvalue equals
    ``beta``; ``beta=None`` skips the rescaling.  The diagonal of the result
    is zeroed.
    """
    obs = np.asarray(obs, dtype=float)
    if beta is not None and not 0 < beta < 1:
        raise BetaOutOfRange(f"beta must be in (0, 1), got {beta}")
    if obs.ndim != 2 or obs.shape[0] != obs.shape[1]:
        raise EigenFailure("input must be a square matrix")
    if not np.allclose(obs, obs.T, atol=1e-10, rtol=0):
        raise EigenFailure("input must be symmetric")
    sym = (obs + obs.T) / 2
    try:
        lam, u = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    radius = float(np.max(np.abs(lam))) if lam.size else 0.0
    if radius == 0:
        return np.zeros_like(sym)
    if beta is not None:
        lam = lam * (beta / radius)
    if np.any(np.abs(1 + lam) < 1e-12):
        raise EigenFailure("eigenvalue -1 makes the closure map singular")
    out = (u * (lam / (1 + lam))) @ u.T
    out = (out + out.T) / 2
    np.fill_diagonal(out, 0.0)
    return out


def closure_map(direct: np.ndarray) -> np.ndarray:
    """Forward map ``G (I - G)^-1`` summing direct and all indirect path weights."""
    direct = np.asarray(direct, dtype=float)
    return direct @ np.linalg.inv(np.eye(direct.shape[0]) - direct)


def top_k_edges(weights: np.ndarray, k: int) -> frozenset:
    """The ``k`` pairs ``i < j`` of largest weight; ties go to the smaller pair."""
    p = weights.shape[0]
    pairs = list(combinations(range(p), 2))
    ranked = sorted(pairs, key=lambda ij: (-weights[ij], ij))
    return frozenset(ranked[:k])


def deconvolved_graph(d: Dataset, beta: float | None = 0.9, density: float = 0.5) -> MixedGraph:
    """Keep the ``ceil(density * p(p-1)/2)`` strongest deconvolved correlations."""
    if not 0 < density <= 1:
        raise OutOfRange(f"density must be in (0, 1], got {density}")
    sim = np.abs(summary_stats(d).correlation)
    np.fill_diagonal(sim, 0.0)
    direct = network_deconvolution(sim, beta)
    m = d.p * (d.p - 1) // 2
    # tolerance keeps e.g. density=2/3 with m=3 at exactly two edges
    k = min(m, math.ceil(density * m - 1e-9))
    return MixedGraph(d.names, undirected=top_k_edges(direct, k))


# -- graphical lasso ----------------------------------------------------------


@dataclass
class GlassoResult:
    precision: np.ndarray
    covariance: np.ndarray
    n_iter: int
    converged: bool
    kkt_residual: float
    objective_trace: list[float] = field(default_factory=list)


def glasso_objective(cov: np.ndarray, theta: np.ndarray, lam: float) -> float:
    """``log det theta - trace(cov theta) - lam * sum_{i != j} |theta_ij|``."""
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return -np.inf
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(logdet - np.sum(cov * theta) - lam * off)


def kkt_residual(cov: np.ndarray, theta: np.ndarray, lam: float, support_tol: float = 1e-8) -> float:
    """Largest violation of the graphical lasso optimality conditions.

    With ``W = theta^-1``: diagonal ``W_ii = cov_ii``; on the support
    ``W_ij - cov_ij = lam * sign(theta_ij)``; off the support
    ``|W_ij - cov_ij| <= lam``.
    """
    w = np.linalg.inv(theta)
    g = w - cov
    res = np.abs(np.diag(g)).max() if g.size else 0.0
    p = cov.shape[0]
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            if abs(theta[i, j]) > support_tol:
                r = abs(g[i, j] - lam * np.sign(theta[i, j]))
            else:
                r = max(0.0, abs(g[i, j]) - lam)
            res = max(res, r)
    return float(res)


def _lasso_cd(w11: np.ndarray, s12: np.ndarray, lam: float, beta: np.ndarray, tol: float, max_sweeps: int):
    # min_b 1/2 b'W11 b - s12'b + lam |b|_1, coordinate descent
    for _ in range(max_sweeps):
        delta = 0.0
        for k in range(beta.size):
            r = s12[k] - w11[k] @ beta + w11[k, k] * beta[k]
            new = math.copysign(max(abs(r) - lam, 0.0), r) / w11[k, k]
            delta = max(delta, abs(new - beta[k]))
            beta[k] = new
        if delta < tol:
            break
    return beta


def graphical_lasso(
    cov: np.ndarray, lam: float, tol: float = 1e-6, max_iter: int = 200, inner_tol: float = 1e-12
) -> GlassoResult:
    """Sparse precision estimate by block coordinate descent over columns.

    Maximizes ``log det T - trace(cov T) - lam * sum_{i != j} |T_ij|``; the
    diagonal is unpenalized, so the working covariance keeps ``cov``'s
    diagonal.  Stops once the largest off-diagonal change of the working
    covariance in a sweep drops below ``tol``.  Non-convergence is logged and
    flagged on the result, which still carries the last iterate.
    """
    cov = np.asarray(cov, dtype=float)
    p = cov.shape[0]
    if cov.shape != (p, p) or not np.allclose(cov, cov.T, atol=1e-10):
        raise NotPSD("covariance must be a symmetric square matrix")
    if lam < 0:
        raise OutOfRange(f"lambda must be >= 0, got {lam}")
    cov = (cov + cov.T) / 2
    if np.any(np.diag(cov) <= 0) or np.linalg.eigvalsh(cov).min() < -1e-10:
        raise NotPSD("covariance must be positive semidefinite with positive diagonal")

    w = cov.copy()
    betas = np.zeros((p, max(p - 1, 0)))
    trace: list[float] = []
    converged = p == 1
    it = 0
    for it in range(1, max_iter + 1):
        if p == 1:
            break
        w_old = w.copy()
        for j in range(p):
            rest = np.arange(p) != j
            w11 = w[np.ix_(rest, rest)]
            s12 = cov[rest, j]
            b = _lasso_cd(w11, s12, lam, betas[j].copy(), inner_tol, 10000)
            betas[j] = b
            w12 = w11 @ b
            w[rest, j] = w12
            w[j, rest] = w12
        theta = _precision_from(w, betas)
        trace.append(glasso_objective(cov, theta, lam))
        change = np.abs(w - w_old)
        np.fill_diagonal(change, 0.0)
        if change.max() < tol:
            converged = True
            break
    theta = _precision_from(w, betas) if p > 1 else np.array([[1.0 / cov[0, 0]]])
    if not converged:
        log.warning("graphical lasso did not converge in %d sweeps", max_iter)
    return GlassoResult(theta, w, it, converged, kkt_residual(cov, theta, lam), trace)


def _precision_from(w: np.ndarray, betas: np.ndarray) -> np.ndarray:
    p = w.shape[0]
    theta = np.zeros((p, p))
    for j in range(p):
        rest = np.arange(p) != j
        t22 = 1.0 / (w[j, j] - w[rest, j] @ betas[j])
        theta[j, j] = t22
        theta[rest, j] = -betas[j] * t22
    return (theta + theta.T) / 2


def glasso_graph(d: Dataset, lam: float, tol: float = 1e-6, max_iter: int = 200) -> MixedGraph:
    return precision_graph(d.names, graphical_lasso(summary_stats(d).correlation, lam, tol, max_iter).precision)


def precision_graph(names: Sequence[str], theta: np.ndarray, threshold: float = 1e-8) -> MixedGraph:
    p = len(names)
    edges = frozenset((i, j) for i, j in combinations(range(p), 2) if abs(theta[i, j]) > threshold)
    return MixedGraph(names, undirected=edges)


# -- Markov blankets ----------------------------------------------------------


@dataclass(frozen=True)
class Blanket:
    target: int
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if self.target in self.members:
            raise ValueError("a blanket cannot contain its target")


def _ci_pvalue(corr, n, i, j, s) -> tuple[float, float]:
    res = fisher_z_test(partial_correlation(corr, i, j, s), n, len(s))
    return res.statistic, res.p_value


def iamb(d: Dataset, target: int, alpha: float = 0.01, corr: np.ndarray | None = None) -> Blanket:
    """Incremental association Markov blanket of ``target`` under Fisher z tests.

    Grow: add the candidate with the largest ``|z|`` given the current
    blanket while its test rejects independence.  Shrink: drop members that
    test independent of the target given the rest, lowest index first,
    until none does.
    """
    _check_alpha(alpha)
    if corr is None:
        corr = summary_stats(d).correlation
    n = d.n
    mb: list[int] = []
    while True:
        best = None
        for c in range(d.p):
            if c == target or c in mb or n - len(mb) - 3 < 1:
                continue
            z, pv = _ci_pvalue(corr, n, target, c, mb)
            if best is None or abs(z) > best[0]:
                best = (abs(z), c, pv)
        if best is None or best[2] > alpha:
            break
        mb.append(best[1])
    changed = True
    while changed:
        changed = False
        for m in sorted(mb):
            rest = [v for v in mb if v != m]
            _, pv = _ci_pvalue(corr, n, target, m, rest)
            if pv > alpha:
                mb.remove(m)
                changed = True
                break
    return Blanket(target, frozenset(mb))


def all_blankets(d: Dataset, alpha: float = 0.01, threads: int = 1) -> list[Blanket]:
    corr = summary_stats(d).correlation
    return pmap(lambda t: iamb(d, t, alpha, corr), range(d.p), threads)


class BlanketRule(str, Enum):
    AND = "and"
    OR = "or"


def blankets_to_skeleton(
    blankets: Sequence[Blanket], rule: BlanketRule | str = BlanketRule.AND, names: Sequence[str] | None = None
) -> MixedGraph:
    """Symmetrize blankets into an undirected graph.

    Blankets include spouses, so the result is the moral graph rather than
    the causal skeleton.
    """
    rule = BlanketRule(rule)
    p = len(blankets)
    mb = {b.target: b.members for b in blankets}
    if sorted(mb) != list(range(p)):
        raise ValueError("expected exactly one blanket per node 0..p-1")
    edges = set()
    for i, j in combinations(range(p), 2):
        a, b = j in mb[i], i in mb[j]
        if (a and b) if rule is BlanketRule.AND else (a or b):
            edges.add((i, j))
    return MixedGraph(names if names is not None else default_names(p), undirected=frozenset(edges))


def iamb_graph(d: Dataset, alpha: float = 0.01, rule: BlanketRule | str = BlanketRule.AND, threads: int = 1):
    return blankets_to_skeleton(all_blankets(d, alpha, threads), rule, d.names)
