"""Gaussian BIC score and greedy hill climbing over DAGs."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .data import Dataset, standardize
from .errors import NotADag, OutOfRange, RankDeficient, ZeroResidualVariance
from .graph import MixedGraph, is_dag

LN_2PI = math.log(2 * math.pi)
IMPROVEMENT_EPS = 1e-9
TIE_EPS = 1e-10
OPS = ("add", "delete", "reverse")


def bic_local(d: Dataset, node: int, parents: Iterable[int]) -> float:
    """BIC of one node's linear-Gaussian regression on its parents.

    ``d`` should be standardized: the fit has no intercept.  The penalty
    counts one coefficient per parent plus the residual variance.
    """
    parents = sorted(parents)
    if node in parents:
        raise ValueError("a node cannot be its own parent")
    n = d.n
    y = d.values[:, node]
    if parents:
        x = d.values[:, parents]
        coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < len(parents):
            raise RankDeficient(f"design matrix for node {node} on {parents} is rank deficient")
        resid = y - x @ coef
    else:
        resid = y
    sigma2 = float(resid @ resid) / n
    if sigma2 < 1e-12:
        raise ZeroResidualVariance(f"node {node} is fit exactly by {parents}")
    return -0.5 * n * (LN_2PI + math.log(sigma2) + 1) - 0.5 * (len(parents) + 1) * math.log(n)


class LocalScoreCache:
    """Memo of ``bic_local`` keyed by (node, parent set)."""

    def __init__(self, d: Dataset):
        self.d = d
        self._scores: dict[tuple[int, frozenset], float] = {}
        self.misses = 0

    def __call__(self, node: int, parents) -> float:
        key = (node, frozenset(parents))
        if key not in self._scores:
            self.misses += 1
            self._scores[key] = bic_local(self.d, node, key[1])
        return self._scores[key]

    def __len__(self) -> int:
        return len(self._scores)

    def items(self):
        return self._scores.items()


def score_dag(d: Dataset, g: MixedGraph, cache: LocalScoreCache | None = None) -> float:
    if not is_dag(g):
        raise NotADag("score_dag requires a DAG")
    local = cache or (lambda v, pa: bic_local(d, v, pa))
    return sum(local(v, g.parents(v)) for v in range(g.node_count))


@dataclass
class SearchConfig:
    max_indegree: int | None = None
    tabu_length: int = 0
    max_iters: int = 10_000
    whitelist: MixedGraph | None = None

    def __post_init__(self):
        if self.max_indegree is not None and self.max_indegree < 0:
            raise OutOfRange("max_indegree must be >= 0")
        if self.tabu_length < 0:
            raise OutOfRange("tabu_length must be >= 0")


@dataclass(frozen=True)
class Move:
    op: str
    i: int
    j: int

    @property
    def key(self) -> tuple[int, int, int]:
        return (OPS.index(self.op), self.i, self.j)

    def inverse(self) -> Move:
        if self.op == "add":
            return Move("delete", self.i, self.j)
        if self.op == "delete":
            return Move("add", self.i, self.j)
        return Move("reverse", self.j, self.i)


@dataclass(frozen=True)
class TraceStep:
    move: Move
    delta: float
    score: float


@dataclass
class HillClimbResult:
    graph: MixedGraph
    score: float
    trace: list[TraceStep] = field(default_factory=list)
    evaluations: int = 0
    iterations: int = 0

    def replay(self, names) -> list[MixedGraph]:
        """Graphs after each step of the trace, starting from the empty DAG."""
        parents = [set() for _ in names]
        out = []
        for step in self.trace:
            _apply(parents, step.move)
            out.append(_to_graph(names, parents))
        return out


def _apply(parents: list[set], m: Move) -> None:
    if m.op == "add":
        parents[m.j].add(m.i)
    elif m.op == "delete":
        parents[m.j].discard(m.i)
    else:
        parents[m.j].discard(m.i)
        parents[m.i].add(m.j)


def _to_graph(names, parents) -> MixedGraph:
    return MixedGraph(names, frozenset((a, b) for b, pa in enumerate(parents) for a in pa))


def _reaches(parents: list[set], children: list[set], src: int, dst: int, skip: tuple[int, int] | None = None) -> bool:
    """Directed path src ~> dst, optionally ignoring the single edge ``skip``."""
    seen = {src}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for c in children[v]:
            if skip is not None and (v, c) == skip:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return False


def hill_climb(d: Dataset, cfg: SearchConfig | None = None, *, standardized: bool = False) -> HillClimbResult:
    """Greedy search from the empty DAG using add, delete and reverse moves.

    Each step scores every legal move and applies the best one if it improves
    the score by more than 1e-9; near-equal deltas (within 1e-10) are broken
    by the lexicographic (operation, i, j) key.  Adds are limited to pairs in
    ``cfg.whitelist`` when given.  ``evaluations`` counts scored moves.
    """
    cfg = cfg or SearchConfig()
    if not standardized:
        d = standardize(d)
    p = d.p
    if cfg.whitelist is not None and cfg.whitelist.node_count != p:
        raise OutOfRange("whitelist node count differs from the dataset")
    allowed = cfg.whitelist.skeleton_pairs() if cfg.whitelist is not None else None
    cap = cfg.max_indegree if cfg.max_indegree is not None else p
    cache = LocalScoreCache(d)
    parents: list[set] = [set() for _ in range(p)]
    children: list[set] = [set() for _ in range(p)]
    local = [cache(v, ()) for v in range(p)]
    score = sum(local)
    result = HillClimbResult(_to_graph(d.names, parents), score)
    tabu: deque[Move] = deque(maxlen=cfg.tabu_length or None)

    def is_tabu(m: Move) -> bool:
        return cfg.tabu_length > 0 and (m in tabu or m.inverse() in tabu)

    for it in range(cfg.max_iters):
        candidates: list[tuple[Move, float]] = []
        for i in range(p):
            for j in range(p):
                if i == j:
                    continue
                if i in parents[j]:
                    m = Move("delete", i, j)
                    if not is_tabu(m):
                        delta = cache(j, parents[j] - {i}) - local[j]
                        candidates.append((m, delta))
                    m = Move("reverse", i, j)
                    if (
                        len(parents[i]) < cap
                        and not is_tabu(m)
                        and not _reaches(parents, children, i, j, skip=(i, j))
                    ):
                        delta = (cache(j, parents[j] - {i}) - local[j]) + (cache(i, parents[i] | {j}) - local[i])
                        candidates.append((m, delta))
                elif j not in parents[i]:
                    if allowed is not None and (min(i, j), max(i, j)) not in allowed:
                        continue
                    m = Move("add", i, j)
                    if len(parents[j]) < cap and not is_tabu(m) and not _reaches(parents, children, j, i):
                        delta = cache(j, parents[j] | {i}) - local[j]
                        candidates.append((m, delta))
        result.evaluations += len(candidates)
        if not candidates:
            break
        best_delta = max(delta for _, delta in candidates)
        if best_delta <= IMPROVEMENT_EPS:
            break
        move = min(
            (m for m, delta in candidates if delta >= best_delta - TIE_EPS and delta > IMPROVEMENT_EPS),
            key=lambda m: m.key,
        )
        delta = dict(candidates)[move]
        _apply(parents, move)
        if move.op == "add":
            children[move.i].add(move.j)
        elif move.op == "delete":
            children[move.i].discard(move.j)
        else:
            children[move.i].discard(move.j)
            children[move.j].add(move.i)
        for v in {move.i, move.j}:
            local[v] = cache(v, parents[v])
        score = sum(local)
        result.trace.append(TraceStep(move, delta, score))
        if cfg.tabu_length:
            tabu.append(move)
        result.iterations = it + 1
    result.graph = _to_graph(d.names, parents)
    result.score = score
    return result
