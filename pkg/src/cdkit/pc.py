"""The PC algorithm, stable variant.

Skeleton search deletes edges level by level with conditioning sets drawn
from the adjacency snapshot taken at the start of each level, so the result
does not depend on the order in which pairs are visited.  Orientation reuses
the shared v-structure and Meek machinery.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import combinations
from typing import Protocol

import numpy as np

from .data import Dataset, summary_stats
from .errors import NotADag, OutOfRange
from .graph import MixedGraph, SepSets, d_separated, default_names, is_dag, meek_closure, orient_v_structures
from .indep import TestResult, fisher_z_test, partial_correlation
from .runtime import pmap

DATA_MAX_COND_SIZE = 3


class CiOracle(Protocol):
    def __call__(self, i: int, j: int, s: frozenset) -> TestResult: ...


class _Counted:
    def __init__(self):
        self.queries = 0
        self._lock = threading.Lock()

    def _tick(self):
        with self._lock:
            self.queries += 1


class FisherZOracle(_Counted):
    """Partial-correlation Fisher z test on a dataset's correlation matrix."""

    def __init__(self, d: Dataset | None = None, *, corr: np.ndarray | None = None, n: int | None = None):
        super().__init__()
        if d is not None:
            corr, n = summary_stats(d).correlation, d.n
        if corr is None or n is None:
            raise ValueError("need a dataset or (corr, n)")
        self.corr = corr
        self.n = n

    def __call__(self, i, j, s):
        self._tick()
        return fisher_z_test(partial_correlation(self.corr, i, j, s), self.n, len(s))


class DSeparationOracle(_Counted):
    """Exact oracle: p-value 1 when d-separated in the true DAG, else 0."""

    def __init__(self, dag: MixedGraph):
        super().__init__()
        if not is_dag(dag):
            raise NotADag("d-separation oracle needs a DAG")
        self.dag = dag

    def __call__(self, i, j, s):
        self._tick()
        sep = d_separated(self.dag, i, j, s)
        return TestResult(0.0 if sep else np.inf, 1.0 if sep else 0.0, 0)


@dataclass
class PcConfig:
    alpha: float = 0.01
    max_cond_size: int | None = None
    edge_whitelist: MixedGraph | None = None
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise OutOfRange(f"alpha must be in (0, 1), got {self.alpha}")
        if self.max_cond_size is not None and self.max_cond_size < 0:
            raise OutOfRange("max_cond_size must be >= 0")


def _search_pair(oracle, alpha, i, j, adj_i, adj_j, level):
    """First separating set of size ``level`` for (i, j), or None.

    Subsets of adj(i) \\ {j} come first, then those of adj(j) \\ {i} not
    already tried, each in lexicographic order.
    """
    tried = set()
    for pool in (sorted(adj_i - {j}), sorted(adj_j - {i})):
        if len(pool) < level:
            continue
        for s in combinations(pool, level):
            fs = frozenset(s)
            if fs in tried:
                continue
            tried.add(fs)
            if oracle(i, j, fs).p_value > alpha:
                return fs
    return None


def pc_skeleton(oracle: CiOracle, p: int | MixedGraph | tuple, cfg: PcConfig | None = None):
    """Skeleton and separating sets.

    ``p`` is a node count or a sequence of names.  Returns ``(graph, sepsets)``.
    Pairs missing from ``cfg.edge_whitelist`` are never tested; their
    separating set is recorded as unknown.
    """
    cfg = cfg or PcConfig()
    names = default_names(p) if isinstance(p, int) else tuple(p)
    n_nodes = len(names)
    seps = SepSets()
    if cfg.edge_whitelist is not None:
        if cfg.edge_whitelist.node_count != n_nodes:
            raise OutOfRange("whitelist node count differs from p")
        pairs = set(cfg.edge_whitelist.skeleton_pairs())
        for i, j in combinations(range(n_nodes), 2):
            if (i, j) not in pairs:
                seps.record_unknown(i, j)
    else:
        pairs = set(combinations(range(n_nodes), 2))

    level = 0
    while cfg.max_cond_size is None or level <= cfg.max_cond_size:
        adj = [set() for _ in range(n_nodes)]
        for i, j in pairs:
            adj[i].add(j)
            adj[j].add(i)
        if not any(max(len(adj[i]), len(adj[j])) - 1 >= level for i, j in pairs):
            break
        ordered = sorted(pairs)
        found = pmap(
            lambda ij: _search_pair(oracle, cfg.alpha, ij[0], ij[1], adj[ij[0]], adj[ij[1]], level),
            ordered,
            cfg.threads,
        )
        for (i, j), s in zip(ordered, found):
            if s is not None:
                pairs.discard((i, j))
                seps.record(i, j, s)
        level += 1
    return MixedGraph(names, undirected=frozenset(pairs)), seps


def pc(oracle: CiOracle, p, cfg: PcConfig | None = None) -> MixedGraph:
    skel, seps = pc_skeleton(oracle, p, cfg)
    return meek_closure(orient_v_structures(skel, seps))
