"""Graph comparison metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import NodeCountMismatch
from .core import MixedGraph


@dataclass(frozen=True)
class GraphMetrics:
    shd: int
    skeleton_precision: float
    skeleton_recall: float
    orientation_accuracy: float

    @property
    def skeleton_f1(self) -> float:
        p, r = self.skeleton_precision, self.skeleton_recall
        return 0.0 if p + r == 0 else 2 * p * r / (p + r)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["skeleton_f1"] = self.skeleton_f1
        return d


def _mark(g: MixedGraph, i: int, j: int):
    """Edge mark of the pair i < j: None, '--', '->' or '<-'."""
    if g.has_undirected(i, j):
        return "--"
    if g.has_directed(i, j):
        return "->"
    if g.has_directed(j, i):
        return "<-"
    return None


def _check(g1: MixedGraph, g2: MixedGraph) -> None:
    if g1.node_count != g2.node_count:
        raise NodeCountMismatch(f"{g1.node_count} vs {g2.node_count} nodes")


def shd(g1: MixedGraph, g2: MixedGraph) -> int:
    """Structural Hamming distance: one unit per pair whose edge slot differs."""
    _check(g1, g2)
    return sum(
        1 for i, j in g1.skeleton_pairs() | g2.skeleton_pairs() if _mark(g1, i, j) != _mark(g2, i, j)
    )


def skeleton_metrics(pred: MixedGraph, truth: MixedGraph) -> GraphMetrics:
    _check(pred, truth)
    sp, st = pred.skeleton_pairs(), truth.skeleton_pairs()
    hit = len(sp & st)
    precision = hit / len(sp) if sp else 1.0
    recall = hit / len(st) if st else 1.0
    scored = [(a, b) for a, b in pred.directed if truth.adjacent(a, b)]
    orient = sum(1 for a, b in scored if truth.has_directed(a, b)) / len(scored) if scored else 1.0
    return GraphMetrics(shd(pred, truth), precision, recall, orient)
