import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdkit.errors import DataError, ParseError
from cdkit.graph import Format, MixedGraph, parse, parse_edge_csv, serialize

from oracles import random_mixed_graph


def test_dot_empty_two_nodes():
    text = serialize(MixedGraph(("X", "Y")), "dot")
    assert text == 'digraph G {\n  "X";\n  "Y";\n}\n'


def test_dot_mixed():
    m = MixedGraph(("X", "Y", "A"), frozenset({(0, 1)}), frozenset({(1, 2)}))
    lines = serialize(m, Format.DOT).splitlines()
    assert '  "X" -> "Y";' in lines
    assert '  "Y" -> "A" [dir=none];' in lines


def test_dot_edges_sorted_by_index():
    m = MixedGraph(("a", "b", "c"), frozenset({(2, 0), (0, 1)}))
    lines = [ln for ln in serialize(m, "dot").splitlines() if "->" in ln]
    assert lines == ['  "a" -> "b";', '  "c" -> "a";']


def test_dot_quotes_are_escaped():
    m = MixedGraph(('say "hi"', "b"), frozenset({(0, 1)}))
    text = serialize(m, "dot")
    assert r'"say \"hi\""' in text
    assert parse(text, "dot") == m


def test_edge_csv_line():
    m = MixedGraph(("X", "Y"), frozenset({(0, 1)}))
    assert serialize(m, "edgecsv") == "source,target,mark\nX,Y,directed\n"


def test_edge_csv_undirected_lower_index_first():
    m = MixedGraph(("X", "Y"), undirected=frozenset({(1, 0)}))
    assert serialize(m, "edgecsv").splitlines()[1] == "X,Y,undirected"


def test_graphml_structure():
    m = MixedGraph(("X", "Y", "Z"), frozenset({(0, 1)}), frozenset({(1, 2)}))
    text = serialize(m, "graphml")
    assert 'edgedefault="directed"' in text
    assert 'attr.name="directed" attr.type="boolean"' in text
    assert parse(text, "graphml") == m


def test_serialization_is_deterministic():
    rng = np.random.default_rng(0)
    m = random_mixed_graph(6, rng)
    for fmt in Format:
        assert serialize(m, fmt) == serialize(MixedGraph(m.names, m.directed, m.undirected), fmt)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_edge_csv_roundtrip(p, seed, prob):
    m = random_mixed_graph(p, np.random.default_rng(seed), prob)
    assert parse(serialize(m, Format.EDGE_CSV), Format.EDGE_CSV, m.names) == m


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_dot_and_graphml_roundtrip(p, seed):
    m = random_mixed_graph(p, np.random.default_rng(seed))
    assert parse(serialize(m, "dot"), "dot") == m
    assert parse(serialize(m, "graphml"), "graphml") == m


def test_edge_csv_without_names_uses_first_appearance():
    m = parse_edge_csv("source,target,mark\nB,A,directed\n")
    assert m.names == ("B", "A") and m.has_directed(0, 1)


def test_edge_csv_errors():
    with pytest.raises(ParseError):
        parse_edge_csv("a,b,c\n")
    with pytest.raises(ParseError):
        parse_edge_csv("source,target,mark\nX,Y,sideways\n")
    with pytest.raises(DataError):
        parse_edge_csv("source,target,mark\nX,Q,directed\n", names=("X", "Y"))
    with pytest.raises(DataError):
        parse_edge_csv("source,target,mark\nX,Y,directed\nY,X,directed\n")


def test_format_from_path():
    assert Format.from_path("g.dot") is Format.DOT
    assert Format.from_path("g.graphml") is Format.GRAPHML
    assert Format.from_path("g.csv") is Format.EDGE_CSV
