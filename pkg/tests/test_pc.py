import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdkit.data import Dataset
from cdkit.errors import NotADag, OutOfRange
from cdkit.graph import MixedGraph, d_separated, dag_to_cpdag
from cdkit.pc import DSeparationOracle, FisherZOracle, PcConfig, pc, pc_skeleton

from oracles import random_dag

dags = st.builds(
    lambda p, prob, seed: random_dag(p, prob, np.random.default_rng(seed)),
    st.integers(1, 5),
    st.floats(0.0, 1.0),
    st.integers(0, 2**32 - 1),
)


@settings(max_examples=200, deadline=None)
@given(dags)
def test_oracle_pc_recovers_cpdag(dag):
    assert pc(DSeparationOracle(dag), dag.names) == dag_to_cpdag(dag)


@settings(max_examples=200, deadline=None)
@given(dags)
def test_sepsets_separate(dag):
    skel, seps = pc_skeleton(DSeparationOracle(dag), dag.names)
    for (i, j), s in seps.items():
        assert not skel.adjacent(i, j)
        assert d_separated(dag, i, j, s)
        assert i not in s and j not in s


@settings(max_examples=200, deadline=None)
@given(dags, st.randoms(use_true_random=False))
def test_permutation_equivariance(dag, rnd):
    perm = list(range(dag.node_count))
    rnd.shuffle(perm)
    moved = dag.relabel(perm)
    assert pc(DSeparationOracle(moved), moved.names) == pc(DSeparationOracle(dag), dag.names).relabel(perm)


def test_level_zero_query_count():
    for p in range(1, 7):
        oracle = DSeparationOracle(MixedGraph.empty([f"V{i}" for i in range(p)]))
        g = pc(oracle, p)
        assert g.edge_count == 0
        assert oracle.queries == p * (p - 1) // 2


def test_chain_and_collider():
    chain = MixedGraph(("A", "B", "C"), frozenset({(0, 1), (1, 2)}))
    g = pc(DSeparationOracle(chain), chain.names)
    assert g.undirected == {(0, 1), (1, 2)} and not g.directed
    coll = MixedGraph(("A", "B", "C"), frozenset({(0, 2), (1, 2)}))
    assert pc(DSeparationOracle(coll), coll.names) == coll


def test_whitelist_restricts_and_blocks_colliders():
    coll = MixedGraph(("A", "B", "C"), frozenset({(0, 2), (1, 2)}))
    wl = MixedGraph(coll.names, undirected=frozenset({(0, 2), (1, 2)}))
    oracle = DSeparationOracle(coll)
    g = pc(oracle, coll.names, PcConfig(edge_whitelist=wl))
    # A-B never tested, so no separating set supports the collider
    assert g.undirected == {(0, 2), (1, 2)} and not g.directed
    # level 0: two pairs; level 1: each pair conditioned on the other parent
    assert oracle.queries == 4


@settings(max_examples=200, deadline=None)
@given(dags, st.integers(0, 2**32 - 1))
def test_whitelist_output_is_subgraph(dag, seed):
    rng = np.random.default_rng(seed)
    pairs = frozenset(pr for pr in dag.to_skeleton().undirected if rng.random() < 0.7)
    wl = MixedGraph(dag.names, undirected=pairs)
    g = pc(DSeparationOracle(dag), dag.names, PcConfig(edge_whitelist=wl))
    assert set(g.skeleton_pairs()) <= set(pairs)


def test_max_cond_size_zero_keeps_marginal_edges():
    chain = MixedGraph(("A", "B", "C"), frozenset({(0, 1), (1, 2)}))
    skel, _ = pc_skeleton(DSeparationOracle(chain), chain.names, PcConfig(max_cond_size=0))
    assert skel.edge_count == 3


def test_fisher_z_on_data():
    rng = np.random.default_rng(0)
    n = 3000
    a = rng.standard_normal(n)
    b = rng.standard_normal(n)
    c = 0.8 * a + 0.8 * b + rng.standard_normal(n)
    e = 0.8 * c + rng.standard_normal(n)
    d = Dataset(np.c_[a, b, c, e], ("A", "B", "C", "E"))
    g = pc(FisherZOracle(d), d.names, PcConfig(alpha=0.01, max_cond_size=3))
    assert g.directed == {(0, 2), (1, 2), (2, 3)}


def test_threads_identical():
    rng = np.random.default_rng(1)
    dag = random_dag(8, 0.3, rng)
    x = np.zeros((2000, 8))
    from cdkit.graph import topological_order

    for v in topological_order(dag):
        x[:, v] = rng.standard_normal(2000) + sum(0.7 * x[:, u] for u in dag.parents(v))
    d = Dataset.from_array(x)
    g1 = pc(FisherZOracle(d), d.names, PcConfig(threads=1))
    g4 = pc(FisherZOracle(d), d.names, PcConfig(threads=4))
    assert g1 == g4


def test_validation():
    with pytest.raises(OutOfRange):
        PcConfig(alpha=0)
    with pytest.raises(NotADag):
        DSeparationOracle(MixedGraph(("A", "B"), undirected=frozenset({(0, 1)})))
    with pytest.raises(ValueError):
        FisherZOracle()


def test_complete_dag_nothing_separable():
    dag = MixedGraph(("A", "B", "C", "D"), frozenset({(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}))
    skel, seps = pc_skeleton(DSeparationOracle(dag), dag.names)
    assert skel.edge_count == 6 and len(seps) == 0


def test_collider_sepset_empty():
    coll = MixedGraph(("X", "Y", "Z"), frozenset({(0, 2), (1, 2)}))
    skel, seps = pc_skeleton(DSeparationOracle(coll), coll.names)
    assert skel.undirected == {(0, 2), (1, 2)} and seps.get(0, 1) == frozenset()


def test_two_correlated_columns():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(300)
    d = Dataset.from_array(np.c_[x, x + rng.standard_normal(300)])
    g = pc(FisherZOracle(d), d.names)
    assert g.undirected == {(0, 1)} and not g.directed
