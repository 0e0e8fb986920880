"""Mixed graph representation and DAG queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from ..errors import GraphError, NotADag


def default_names(p: int) -> tuple[str, ...]:
    return tuple(f"X{i}" for i in range(p))


@dataclass(frozen=True)
class Edge:
    """One edge slot. For undirected edges ``source < target``."""

    source: int
    target: int
    directed: bool


@dataclass(frozen=True)
class MixedGraph:
    """Graph whose edges are each either directed or undirected.

    Skeletons (all undirected), PDAGs/CPDAGs and DAGs (all directed) share
    this type.  Instances are immutable; algorithms that need to mutate work
    on a private copy and build a new graph at the end.

    ``directed`` holds ordered pairs ``(i, j)`` meaning ``i -> j``;
    ``undirected`` holds pairs ``(i, j)`` with ``i < j``.
    """

    names: tuple[str, ...]
    directed: frozenset = field(default_factory=frozenset)
    undirected: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "directed", frozenset((int(a), int(b)) for a, b in self.directed))
        object.__setattr__(
            self, "undirected", frozenset((min(a, b), max(a, b)) for a, b in ((int(a), int(b)) for a, b in self.undirected))
        )
        p = len(self.names)
        if any(not n for n in self.names):
            raise GraphError("node names must be nonempty")
        if len(set(self.names)) != p:
            raise GraphError("node names must be unique")
        seen = set()
        for a, b in list(self.directed) + list(self.undirected):
            if a == b:
                raise GraphError(f"self-loop on node {a}")
            if not (0 <= a < p and 0 <= b < p):
                raise GraphError(f"edge ({a}, {b}) out of range for {p} nodes")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise GraphError(f"more than one edge between {key[0]} and {key[1]}")
            seen.add(key)

    # -- construction ---------------------------------------------------------

    @classmethod
    def empty(cls, nodes: int | Sequence[str]) -> MixedGraph:
        names = default_names(nodes) if isinstance(nodes, int) else tuple(nodes)
        return cls(names)

    @classmethod
    def complete(cls, nodes: int | Sequence[str]) -> MixedGraph:
        names = default_names(nodes) if isinstance(nodes, int) else tuple(nodes)
        p = len(names)
        return cls(names, undirected=frozenset((i, j) for i in range(p) for j in range(i + 1, p)))

    @classmethod
    def from_edges(cls, nodes: int | Sequence[str], edges: Iterable[Edge]) -> MixedGraph:
        names = default_names(nodes) if isinstance(nodes, int) else tuple(nodes)
        d, u = set(), set()
        for e in edges:
            (d if e.directed else u).add((e.source, e.target))
        return cls(names, frozenset(d), frozenset(u))

    # -- basic queries --------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @cached_property
    def _parents(self) -> tuple[frozenset, ...]:
        pa = [set() for _ in self.names]
        for a, b in self.directed:
            pa[b].add(a)
        return tuple(frozenset(s) for s in pa)

    @cached_property
    def _children(self) -> tuple[frozenset, ...]:
        ch = [set() for _ in self.names]
        for a, b in self.directed:
            ch[a].add(b)
        return tuple(frozenset(s) for s in ch)

    @cached_property
    def _neighbors(self) -> tuple[frozenset, ...]:
        nb = [set() for _ in self.names]
        for a, b in self.undirected:
            nb[a].add(b)
            nb[b].add(a)
        return tuple(frozenset(s) for s in nb)

    @cached_property
    def _pairs(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.directed) | self.undirected

    def parents(self, i: int) -> frozenset:
        return self._parents[i]

    def children(self, i: int) -> frozenset:
        return self._children[i]

    def neighbors(self, i: int) -> frozenset:
        """Nodes joined to ``i`` by an undirected edge."""
        return self._neighbors[i]

    def adjacent_nodes(self, i: int) -> frozenset:
        return self._parents[i] | self._children[i] | self._neighbors[i]

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._pairs

    def has_directed(self, i: int, j: int) -> bool:
        return (i, j) in self.directed

    def has_undirected(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.undirected

    def skeleton_pairs(self) -> frozenset:
        """Unordered adjacent pairs ``(i, j)`` with ``i < j``, ignoring marks."""
        return self._pairs

    def edges(self) -> list[Edge]:
        """All edges sorted by (source, target)."""
        out = [Edge(a, b, True) for a, b in self.directed]
        out += [Edge(a, b, False) for a, b in self.undirected]
        return sorted(out, key=lambda e: (e.source, e.target))

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges())

    @property
    def edge_count(self) -> int:
        return len(self.directed) + len(self.undirected)

    def is_fully_undirected(self) -> bool:
        return not self.directed

    def to_skeleton(self) -> MixedGraph:
        return MixedGraph(self.names, undirected=self._pairs)

    def relabel(self, perm: Sequence[int]) -> MixedGraph:
        """Move node ``i`` to position ``perm[i]``."""
        names = [""] * len(self.names)
        for i, n in enumerate(self.names):
            names[perm[i]] = n
        return MixedGraph(
            names,
            frozenset((perm[a], perm[b]) for a, b in self.directed),
            frozenset((perm[a], perm[b]) for a, b in self.undirected),
        )

    def mark_counts(self) -> dict:
        return {"nodes": self.node_count, "directed": len(self.directed), "undirected": len(self.undirected)}

    def __repr__(self) -> str:
        parts = [f"{self.names[e.source]}{'->' if e.directed else '--'}{self.names[e.target]}" for e in self.edges()]
        return f"MixedGraph(p={self.node_count}, [{', '.join(parts)}])"


class SepSets:
    """Separating sets recorded while deleting edges.

    A pair may also be stored as *unknown* (``None``): it is non-adjacent
    because of outside knowledge (an edge whitelist), not a test, so no
    separating set exists for it.
    """

    def __init__(self):
        self._sets: dict[tuple[int, int], frozenset | None] = {}

    @staticmethod
    def _key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def record(self, i: int, j: int, s: Iterable[int]) -> None:
        s = frozenset(s)
        if i in s or j in s:
            raise GraphError(f"separating set for ({i}, {j}) contains an endpoint")
        self._sets[self._key(i, j)] = s

    def record_unknown(self, i: int, j: int) -> None:
        self._sets[self._key(i, j)] = None

    def __contains__(self, pair) -> bool:
        return self._key(*pair) in self._sets

    def get(self, i: int, j: int):
        """Return the separating set, ``None`` if unknown. Raises KeyError if absent."""
        return self._sets[self._key(i, j)]

    def items(self):
        return sorted(self._sets.items())

    def __len__(self) -> int:
        return len(self._sets)

    def __eq__(self, other) -> bool:
        return isinstance(other, SepSets) and self._sets == other._sets

    def __repr__(self) -> str:
        return f"SepSets({dict(self.items())})"


def is_dag(g: MixedGraph) -> bool:
    if g.undirected:
        return False
    return _kahn(g) is not None


def _kahn(g: MixedGraph) -> list[int] | None:
    indeg = [len(g.parents(i)) for i in range(g.node_count)]
    # a heap would be cheaper; p is small and ascending order must be deterministic
    ready = sorted(i for i, d in enumerate(indeg) if d == 0)
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for c in sorted(g.children(i)):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
                ready.sort()
    return order if len(order) == g.node_count else None


def has_directed_cycle(g: MixedGraph) -> bool:
    """Cycle check over the directed edges only (undirected edges ignored)."""
    return _kahn(g) is None


def topological_order(g: MixedGraph) -> list[int]:
    """Topological order, smallest ready index first."""
    if g.undirected:
        raise NotADag("graph has undirected edges")
    order = _kahn(g)
    if order is None:
        raise NotADag("graph has a directed cycle")
    return order


def ancestors(g: MixedGraph, nodes: Iterable[int]) -> set[int]:
    """Nodes with a directed path into ``nodes``, including ``nodes`` themselves."""
    seen = set(nodes)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for u in g.parents(v):
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def descendants(g: MixedGraph, i: int) -> set[int]:
    seen = {i}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        for c in g.children(v):
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return seen


def d_separated(g: MixedGraph, x: int, y: int, z: Iterable[int] = ()) -> bool:
    """Whether ``x`` and ``y`` are d-separated by ``z`` in DAG ``g``.

    Uses the moralized ancestral graph criterion: restrict to ancestors of
    ``{x, y} | z``, marry co-parents, drop directions, delete ``z`` and test
    connectivity.
    """
    if not is_dag(g):
        raise NotADag("d-separation requires a DAG")
    z = set(z)
    if x == y or x in z or y in z:
        raise GraphError("x, y must be distinct and outside the conditioning set")
    keep = ancestors(g, {x, y} | z)
    adj: dict[int, set[int]] = {v: set() for v in keep}
    for v in keep:
        pa = [u for u in g.parents(v) if u in keep]
        for u in pa:
            adj[u].add(v)
            adj[v].add(u)
        for a in range(len(pa)):
            for b in range(a + 1, len(pa)):
                adj[pa[a]].add(pa[b])
                adj[pa[b]].add(pa[a])
    seen = {x}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u == y:
                return False
            if u not in seen and u not in z:
                seen.add(u)
                queue.append(u)
    return True
