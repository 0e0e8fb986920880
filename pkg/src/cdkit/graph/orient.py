"""V-structure orientation, Meek closure and CPDAG construction."""

from __future__ import annotations

import logging
from itertools import combinations

from ..errors import GraphError, MissingSepSet, NotADag
from .core import MixedGraph, SepSets, is_dag

log = logging.getLogger(__name__)


class _Pdag:
    """Mutable working copy of a MixedGraph used during orientation."""

    def __init__(self, g: MixedGraph):
        self.names = g.names
        p = g.node_count
        self.und = [set(g.neighbors(i)) for i in range(p)]
        self.pa = [set(g.parents(i)) for i in range(p)]
        self.ch = [set(g.children(i)) for i in range(p)]

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.und[a] or b in self.pa[a] or b in self.ch[a]

    def orient(self, a: int, b: int) -> None:
        """Turn the undirected edge a - b into a -> b."""
        self.und[a].discard(b)
        self.und[b].discard(a)
        self.ch[a].add(b)
        self.pa[b].add(a)

    def unorient(self, a: int, b: int) -> None:
        self.ch[a].discard(b)
        self.pa[b].discard(a)
        self.und[a].add(b)
        self.und[b].add(a)

    def to_graph(self) -> MixedGraph:
        p = len(self.names)
        d = frozenset((a, b) for a in range(p) for b in self.ch[a])
        u = frozenset((a, b) for a in range(p) for b in self.und[a] if a < b)
        return MixedGraph(self.names, d, u)


def unshielded_triples(g: MixedGraph):
    """Yield ``(i, k, j)`` with ``i < j``, both adjacent to ``k``, ``i`` and ``j`` not adjacent."""
    for k in range(g.node_count):
        for i, j in combinations(sorted(g.adjacent_nodes(k)), 2):
            if not g.adjacent(i, j):
                yield i, k, j


def orient_v_structures(skeleton: MixedGraph, seps: SepSets) -> MixedGraph:
    """Orient every unshielded triple ``i - k - j`` with ``k`` outside sep(i, j) as ``i -> k <- j``.

    An edge claimed in both directions by different triples is left
    undirected and reported through the module logger.  Pairs whose
    separating set is recorded as unknown never produce a collider.
    """
    if not skeleton.is_fully_undirected():
        raise GraphError("v-structure orientation expects a fully undirected skeleton")
    heads: set[tuple[int, int]] = set()
    for i, k, j in unshielded_triples(skeleton):
        if (i, j) not in seps:
            raise MissingSepSet(i, j)
        s = seps.get(i, j)
        if s is None or k in s:
            continue
        heads.add((i, k))
        heads.add((j, k))
    work = _Pdag(skeleton)
    for a, b in sorted(heads):
        if (b, a) in heads:
            if a < b:
                log.warning(
                    "conflicting v-structure orientation on %s - %s; left undirected",
                    skeleton.names[a],
                    skeleton.names[b],
                )
            continue
        work.orient(a, b)
    return work.to_graph()


def _rule1(w: _Pdag) -> bool:
    # a -> b - c, a and c non-adjacent  =>  b -> c
    changed = False
    for b in range(len(w.names)):
        for a in sorted(w.pa[b]):
            for c in sorted(w.und[b]):
                if c in w.und[b] and not w.adjacent(a, c):
                    w.orient(b, c)
                    changed = True
    return changed


def _rule2(w: _Pdag) -> bool:
    # a -> b -> c, a - c  =>  a -> c
    changed = False
    for a in range(len(w.names)):
        for c in sorted(w.und[a]):
            if c in w.und[a] and w.ch[a] & w.pa[c]:
                w.orient(a, c)
                changed = True
    return changed


def _rule3(w: _Pdag) -> bool:
    # a - c -> b, a - d -> b, a - b, c and d non-adjacent  =>  a -> b
    changed = False
    for a in range(len(w.names)):
        for b in sorted(w.und[a]):
            if b not in w.und[a]:
                continue
            cands = sorted(w.und[a] & w.pa[b])
            if any(not w.adjacent(c, d) for c, d in combinations(cands, 2)):
                w.orient(a, b)
                changed = True
    return changed


def _rule4(w: _Pdag) -> bool:
    # a - c -> d -> b, a - b, a adjacent to d, c and b non-adjacent  =>  a -> b
    changed = False
    for a in range(len(w.names)):
        for b in sorted(w.und[a]):
            if b not in w.und[a]:
                continue
            fire = False
            for d in sorted(w.pa[b]):
                if not w.adjacent(a, d):
                    continue
                for c in sorted(w.pa[d] & w.und[a]):
                    if c != b and not w.adjacent(c, b):
                        fire = True
                        break
                if fire:
                    break
            if fire:
                w.orient(a, b)
                changed = True
    return changed


_RULES = (_rule1, _rule2, _rule3, _rule4)


def meek_closure(g: MixedGraph) -> MixedGraph:
    """Apply Meek rules R1-R4 until no rule fires.

    Only undirected edges are ever oriented, so the skeleton and all
    existing directed edges are preserved.
    """
    w = _Pdag(g)
    while True:
        changed = False
        for rule in _RULES:
            changed |= rule(w)
        if not changed:
            return w.to_graph()


def v_structures(g: MixedGraph) -> set[tuple[int, int, int]]:
    """Colliders ``(i, k, j)``, ``i < j``, with ``i -> k <- j`` and ``i``, ``j`` non-adjacent."""
    out = set()
    for k in range(g.node_count):
        for i, j in combinations(sorted(g.parents(k)), 2):
            if not g.adjacent(i, j):
                out.add((i, k, j))
    return out


def dag_to_cpdag(g: MixedGraph) -> MixedGraph:
    """Completed PDAG of the Markov equivalence class of DAG ``g``."""
    if not is_dag(g):
        raise NotADag("dag_to_cpdag requires a DAG")
    keep = set()
    for i, k, j in v_structures(g):
        keep.add((i, k))
        keep.add((j, k))
    undirected = frozenset((min(a, b), max(a, b)) for a, b in g.directed if (a, b) not in keep)
    return meek_closure(MixedGraph(g.names, frozenset(keep), undirected))
