import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdkit.data import Dataset
from cdkit.errors import BetaOutOfRange, EigenFailure, NotPSD, OutOfRange
from cdkit.graph import MixedGraph
from cdkit.skeleton import (
    Blanket,
    BlanketRule,
    blankets_to_skeleton,
    closure_map,
    deconvolved_graph,
    dependency_graph,
    glasso_graph,
    graphical_lasso,
    iamb,
    iamb_graph,
    kkt_residual,
    network_deconvolution,
    pairwise_pvalues,
)

from oracles import random_spd


def linear_data(n, edges, p, seed, weight=0.8):
    rng = np.random.default_rng(seed)
    x = np.zeros((n, p))
    for v in range(p):
        x[:, v] = rng.standard_normal(n)
        for a, b in edges:
            if b == v:
                x[:, v] += weight * x[:, a]
    return Dataset.from_array(x)


def random_direct(p, rng, radius):
    a = rng.standard_normal((p, p))
    g = (a + a.T) / 2
    np.fill_diagonal(g, 0.0)
    r = np.abs(np.linalg.eigvalsh(g)).max()
    return g * (radius / r) if r > 0 else g


class TestDependencyGraph:
    def test_chain_marginally_complete(self):
        d = linear_data(2000, [(0, 1), (1, 2)], 3, 0)
        g = dependency_graph(d, alpha=0.01)
        assert g.undirected == {(0, 1), (0, 2), (1, 2)}

    def test_independent_columns(self):
        d = Dataset.from_array(np.random.default_rng(1).standard_normal((500, 6)))
        g = dependency_graph(d, alpha=0.001, correction="bh")
        assert g.edge_count == 0

    def test_corrections_are_nested(self):
        d = linear_data(80, [(0, 1), (2, 3), (3, 4)], 6, 3, weight=0.3)
        none = dependency_graph(d, alpha=0.05).undirected
        bh = dependency_graph(d, alpha=0.05, correction="bh").undirected
        bonf = dependency_graph(d, alpha=0.05, correction="bonferroni").undirected
        assert bonf <= bh <= none

    def test_mi_permutation_deterministic_across_threads(self):
        d = linear_data(200, [(0, 1)], 4, 2)
        a = pairwise_pvalues(d, "gaussian_mi_perm", permutations=50, seed=9, threads=1)
        b = pairwise_pvalues(d, "gaussian_mi_perm", permutations=50, seed=9, threads=4)
        assert a == b
        pairs, pv = a
        assert pv[pairs.index((0, 1))] == pytest.approx(1 / 51)

    def test_alpha_range(self):
        d = linear_data(50, [], 2, 0)
        with pytest.raises(OutOfRange):
            dependency_graph(d, alpha=1.5)


class TestDeconvolution:
    def test_chain_roundtrip(self):
        direct = np.array([[0, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0]])
        obs = closure_map(direct)
        assert obs[0, 2] > 0.2
        np.testing.assert_allclose(network_deconvolution(obs, beta=None), direct, atol=1e-12)

    def test_zero_matrix(self):
        assert np.all(network_deconvolution(np.zeros((3, 3))) == 0)

    def test_rescaled_spectrum(self):
        rng = np.random.default_rng(0)
        obs = random_direct(5, rng, 3.0)
        out = network_deconvolution(obs, beta=0.5)
        lam = np.linalg.eigvalsh(obs)
        lam = lam * 0.5 / np.abs(lam).max()
        u = np.linalg.eigh(obs)[1]
        ref = (u * (lam / (1 + lam))) @ u.T
        np.fill_diagonal(ref, 0)
        np.testing.assert_allclose(out, ref, atol=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.1, 2.0])
    def test_beta_range(self, beta):
        with pytest.raises(BetaOutOfRange):
            network_deconvolution(np.eye(2), beta)

    def test_asymmetric(self):
        with pytest.raises(EigenFailure):
            network_deconvolution(np.array([[0, 1.0], [0.0, 0]]))

    def test_eigenvalue_minus_one(self):
        with pytest.raises(EigenFailure):
            network_deconvolution(np.array([[0, 1.0], [1.0, 0]]), beta=None)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 8), st.floats(0.05, 0.9), st.integers(0, 2**32 - 1))
    def test_roundtrip_property(self, p, radius, seed):
        direct = random_direct(p, np.random.default_rng(seed), radius)
        back = network_deconvolution(closure_map(direct), beta=None)
        assert np.abs(back - direct).max() < 1e-8

    def test_density(self):
        d = linear_data(500, [(0, 1), (1, 2), (2, 3)], 4, 0)
        assert deconvolved_graph(d, density=0.5).edge_count == 3
        assert deconvolved_graph(d, density=1.0).edge_count == 6
        with pytest.raises(OutOfRange):
            deconvolved_graph(d, density=0.0)


class TestGlasso:
    def test_two_by_two_closed_form(self):
        r, lam = 0.6, 0.2
        res = graphical_lasso(np.array([[1, r], [r, 1]]), lam)
        w = np.array([[1, r - lam], [r - lam, 1]])
        np.testing.assert_allclose(res.precision, np.linalg.inv(w), atol=1e-8)

    def test_large_lambda_is_diagonal(self):
        cov = random_spd(5, np.random.default_rng(0))
        res = graphical_lasso(cov, lam=10.0)
        np.testing.assert_allclose(res.precision, np.diag(1 / np.diag(cov)), atol=1e-12)

    def test_lambda_zero_is_inverse(self):
        rng = np.random.default_rng(1)
        for p in (2, 5, 10):
            cov = random_spd(p, rng)
            res = graphical_lasso(cov, 0.0, tol=1e-10, max_iter=1000)
            assert np.abs(res.precision - np.linalg.inv(cov)).max() < 1e-6

    @pytest.mark.parametrize("lam", [0.01, 0.1, 0.5])
    def test_kkt(self, lam):
        rng = np.random.default_rng(int(lam * 100))
        for _ in range(10):
            cov = random_spd(int(rng.integers(2, 11)), rng)
            res = graphical_lasso(cov, lam)
            assert res.converged
            assert res.kkt_residual <= 1e-4
            assert kkt_residual(cov, res.precision, lam) == res.kkt_residual

    def test_objective_nondecreasing(self):
        cov = random_spd(8, np.random.default_rng(4))
        tr = graphical_lasso(cov, 0.1, tol=1e-10).objective_trace
        assert all(b >= a - 1e-9 for a, b in zip(tr, tr[1:]))

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            graphical_lasso(np.array([[1, 2.0], [2.0, 1]]), 0.1)

    def test_nonconvergence_logged(self, caplog):
        cov = random_spd(6, np.random.default_rng(2))
        with caplog.at_level(logging.WARNING, logger="cdkit"):
            res = graphical_lasso(cov, 0.01, tol=1e-300, max_iter=2)
        assert not res.converged and "did not converge" in caplog.text

    def test_graph_recovers_chain(self):
        d = linear_data(5000, [(0, 1), (1, 2), (2, 3)], 4, 0)
        edges = glasso_graph(d, 0.05).undirected
        assert {(0, 1), (1, 2), (2, 3)} <= edges
        assert (0, 3) not in edges


class TestBlankets:
    def test_chain(self):
        d = linear_data(3000, [(0, 1), (1, 2)], 3, 0)
        assert iamb(d, 0).members == {1}
        assert iamb(d, 1).members == {0, 2}

    def test_collider_includes_spouse(self):
        d = linear_data(3000, [(0, 2), (1, 2)], 3, 0)
        assert iamb(d, 0).members == {1, 2}
        assert iamb_graph(d).undirected == {(0, 1), (0, 2), (1, 2)}

    def test_and_or_rules(self):
        bl = [Blanket(0, {1}), Blanket(1, set()), Blanket(2, {1}), Blanket(3, set())]
        assert blankets_to_skeleton(bl, "and").edge_count == 0
        g = blankets_to_skeleton(bl, BlanketRule.OR)
        assert g.undirected == {(0, 1), (1, 2)}
        assert g.names == ("X0", "X1", "X2", "X3")

    def test_blanket_excludes_target(self):
        with pytest.raises(ValueError):
            Blanket(0, {0})

    def test_threads_agree(self):
        d = linear_data(1000, [(0, 1), (1, 2), (3, 2)], 5, 1)
        assert iamb_graph(d, threads=1) == iamb_graph(d, threads=3)


class TestTaggedExamples:
    def test_exact_copy_has_edge(self):
        x = np.random.default_rng(0).standard_normal(50)
        d = Dataset.from_array(np.c_[x, x])
        assert dependency_graph(d, alpha=0.05).undirected == {(0, 1)}

    def test_bonferroni_family_wise(self):
        d = Dataset.from_array(np.random.default_rng(3).standard_normal((1000, 20)))
        assert dependency_graph(d, alpha=0.05, correction="bonferroni").edge_count <= 2

    def test_permissive_alpha_complete(self):
        d = linear_data(200, [(0, 1)], 4, 0)
        assert dependency_graph(d, alpha=0.999999).edge_count == 6

    def test_rank_one_spectral_map(self):
        u = np.array([1.0, 2.0, 2.0]) / 3
        obs = 0.5 * np.outer(u, u)
        expect = np.outer(u, u) / 3
        np.fill_diagonal(expect, 0)
        np.testing.assert_allclose(network_deconvolution(obs, beta=None), expect, atol=1e-14)
        np.testing.assert_allclose(network_deconvolution(obs, beta=0.5), expect, atol=1e-14)

    def test_chain_density_two_thirds(self):
        d = linear_data(10000, [(0, 1), (1, 2)], 3, 0)
        assert deconvolved_graph(d, density=2 / 3).undirected == {(0, 1), (1, 2)}
        assert deconvolved_graph(d, density=1e-6).edge_count == 1

    def test_glasso_chain_three_nodes(self):
        # with marginal chain correlations r, lambda zeroes X-Z only if 2r - lambda <= 1
        d = linear_data(10000, [(0, 1), (1, 2)], 3, 0, weight=0.5)
        assert glasso_graph(d, 0.1).undirected == {(0, 1), (1, 2)}
        assert glasso_graph(d, 5.0).edge_count == 0

    def test_glasso_lambda_zero_support(self):
        d = linear_data(500, [(0, 1), (1, 2)], 3, 0)
        assert glasso_graph(d, 0.0).edge_count == 3

    def test_iamb_null_calibration(self):
        empty = 0
        for seed in range(20):
            d = Dataset.from_array(np.random.default_rng(seed).standard_normal((500, 5)))
            empty += iamb(d, 0).members == frozenset()
        assert empty >= 18

    def test_empty_blankets(self):
        assert blankets_to_skeleton([Blanket(i, set()) for i in range(3)]).edge_count == 0
        assert blankets_to_skeleton([Blanket(0, {1}), Blanket(1, {0})], "and").undirected == {(0, 1)}
