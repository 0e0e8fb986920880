"""Text serialization: Graphviz DOT, GraphML and a plain edge list CSV."""

from __future__ import annotations

import csv
import io
import re
import xml.etree.ElementTree as ET
from enum import Enum
from typing import Sequence

from ..errors import DataError, GraphError, ParseError
from .core import Edge, MixedGraph

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


class Format(str, Enum):
    DOT = "dot"
    GRAPHML = "graphml"
    EDGE_CSV = "edgecsv"

    @classmethod
    def from_path(cls, path: str) -> "Format":
        p = str(path).lower()
        if p.endswith((".dot", ".gv")):
            return cls.DOT
        if p.endswith((".graphml", ".xml")):
            return cls.GRAPHML
        return cls.EDGE_CSV


def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: MixedGraph) -> str:
    lines = ["digraph G {"]
    lines += [f"  {_q(n)};" for n in g.names]
    for e in g.edges():
        a, b = _q(g.names[e.source]), _q(g.names[e.target])
        lines.append(f"  {a} -> {b};" if e.directed else f"  {a} -> {b} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_graphml(g: MixedGraph) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<graphml xmlns="{_GRAPHML_NS}">',
        '  <key id="directed" for="edge" attr.name="directed" attr.type="boolean"/>',
        '  <graph id="G" edgedefault="directed">',
    ]
    esc = lambda s: s.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;").replace(">", "&gt;")
    lines += [f'    <node id="{esc(n)}"/>' for n in g.names]
    for e in g.edges():
        lines.append(
            f'    <edge source="{esc(g.names[e.source])}" target="{esc(g.names[e.target])}">'
            f'<data key="directed">{"true" if e.directed else "false"}</data></edge>'
        )
    lines += ["  </graph>", "</graphml>"]
    return "\n".join(lines) + "\n"


def to_edge_csv(g: MixedGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "target", "mark"])
    for e in g.edges():
        w.writerow([g.names[e.source], g.names[e.target], "directed" if e.directed else "undirected"])
    return buf.getvalue()


def serialize(g: MixedGraph, fmt: Format | str = Format.DOT) -> str:
    fmt = Format(fmt)
    if fmt is Format.DOT:
        return to_dot(g)
    if fmt is Format.GRAPHML:
        return to_graphml(g)
    return to_edge_csv(g)


def _assemble(triples, names: Sequence[str] | None) -> MixedGraph:
    """Build a graph from (source name, target name, directed) triples.

    Without ``names`` the node order is first appearance in the triples.
    """
    order = list(names) if names is not None else []
    index = {n: i for i, n in enumerate(order)}
    edges = []
    for src, dst, directed in triples:
        for n in (src, dst):
            if n not in index:
                if names is not None:
                    raise DataError(f"unknown node {n!r}")
                index[n] = len(order)
                order.append(n)
        edges.append(Edge(index[src], index[dst], directed))
    try:
        return MixedGraph.from_edges(order, edges)
    except GraphError as exc:
        raise DataError(f"invalid graph: {exc}") from exc


def parse_edge_csv(text: str, names: Sequence[str] | None = None) -> MixedGraph:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["source", "target", "mark"]:
        raise ParseError(0, 1, "expected header 'source,target,mark'")
    triples = []
    for r, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(r, len(row), "expected 3 fields")
        mark = row[2].strip()
        if mark not in ("directed", "undirected"):
            raise ParseError(r, 3, f"unknown mark {mark!r}")
        triples.append((row[0].strip(), row[1].strip(), mark == "directed"))
    return _assemble(triples, names)


_DOT_NODE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*;\s*$')
_DOT_EDGE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*(->|--)\s*"((?:[^"\\]|\\.)*)"\s*(\[dir=none\])?\s*;\s*$')


def _unq(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


def parse_dot(text: str, names: Sequence[str] | None = None) -> MixedGraph:
    """Parse the DOT subset written by :func:`to_dot`."""
    nodes, triples = [], []
    for r, line in enumerate(text.splitlines()):
        if m := _DOT_EDGE.match(line):
            triples.append((_unq(m[1]), _unq(m[3]), m[2] == "->" and not m[4]))
        elif m := _DOT_NODE.match(line):
            nodes.append(_unq(m[1]))
        elif line.strip() and not line.strip().startswith(("digraph", "graph", "}")):
            raise ParseError(r, 1, "unrecognized DOT statement")
    return _assemble(triples, names if names is not None else nodes)


def parse_graphml(text: str, names: Sequence[str] | None = None) -> MixedGraph:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(exc.position[0], exc.position[1], str(exc)) from exc
    ns = {"g": _GRAPHML_NS}
    graph = root.find("g:graph", ns)
    if graph is None:
        raise DataError("no <graph> element")
    keys = {k.get("id") for k in root.findall("g:key", ns) if k.get("attr.name") == "directed"}
    default_directed = graph.get("edgedefault", "directed") == "directed"
    nodes = [n.get("id") for n in graph.findall("g:node", ns)]
    triples = []
    for e in graph.findall("g:edge", ns):
        directed = default_directed
        for d in e.findall("g:data", ns):
            if d.get("key") in keys:
                directed = (d.text or "").strip().lower() == "true"
        triples.append((e.get("source"), e.get("target"), directed))
    return _assemble(triples, names if names is not None else nodes)


def parse(text: str, fmt: Format | str, names: Sequence[str] | None = None) -> MixedGraph:
    fmt = Format(fmt)
    if fmt is Format.DOT:
        return parse_dot(text, names)
    if fmt is Format.GRAPHML:
        return parse_graphml(text, names)
    return parse_edge_csv(text, names)
