import io

import numpy as np
import pytest

from hitmix.graph import (SeedSet, build_nonseed_index, load_edge_list,
                          reachable_from)
from hitmix.moments import (compute_moments, moment_rhs, simulate_hitting_times)
from hitmix.sbm import SbmConfig, sample_sbm
from hitmix.solver import CgConfig


def load(text):
    return load_edge_list(io.StringIO(text))


def path3():
    return load("0 1\n1 2"), SeedSet.from_members([2], 3)


def random_connected(n, p, seed):
    rng = np.random.default_rng(seed)
    while True:
        g, _ = sample_sbm(SbmConfig(1, n, p, 0.0), rng)
        if g.degrees.min() > 0 and reachable_from(
                g, SeedSet.from_members([0], n)).reachable.all():
            return g


def dense_moments(graph, seeds, order=2):
    """Direct dense solve of the first-step moment systems (oracle)."""
    from math import comb
    idx = np.asarray(seeds.complement)
    a = graph.adjacency.toarray().astype(float)
    p = a / graph.degrees[:, None]
    p_sub = p[np.ix_(idx, idx)]
    system = np.eye(idx.size) - p_sub
    out = []
    for m in range(1, order + 1):
        b = np.ones(idx.size)
        for s in range(1, m):
            b += comb(m, s) * (p_sub @ out[s - 1])
        out.append(np.linalg.solve(system, b))
    return out


class TestMomentRhs:
    def test_order_one_is_ones(self):
        g, seeds = path3()
        idx = build_nonseed_index(g, seeds)
        assert moment_rhs(1, [], g, idx).tolist() == [1.0, 1.0]

    def test_order_two_hand_value(self):
        g, seeds = path3()
        idx = build_nonseed_index(g, seeds)
        b2 = moment_rhs(2, [np.array([4.0, 3.0])], g, idx)
        assert np.allclose(b2, [7.0, 5.0], atol=1e-14)

    def test_zero_lower_moments(self):
        g, seeds = path3()
        idx = build_nonseed_index(g, seeds)
        b2 = moment_rhs(2, [np.zeros(2)], g, idx)
        assert b2.tolist() == [1.0, 1.0]

    def test_invalid_order(self):
        g, seeds = path3()
        idx = build_nonseed_index(g, seeds)
        with pytest.raises(ValueError):
            moment_rhs(0, [], g, idx)
        with pytest.raises(ValueError):
            moment_rhs(2, [], g, idx)


class TestComputeMoments:
    def test_path3_fixture(self):
        g, seeds = path3()
        t = compute_moments(g, seeds)
        assert np.allclose(t.mean, [4.0, 3.0], atol=1e-10)
        assert np.allclose(t.variance, [8.0, 8.0], atol=1e-9)
        assert t.reachable.all()

    def test_star_leaves(self):
        g = load("0 1\n0 2\n0 3\n0 4")
        t = compute_moments(g, SeedSet.from_members([0], 5))
        assert np.allclose(t.mean, 1.0, atol=1e-12)
        assert np.allclose(t.variance, 0.0, atol=1e-12)

    def test_triangle(self):
        g = load("0 1\n1 2\n0 2")
        t = compute_moments(g, SeedSet.from_members([2], 3))
        assert np.allclose(t.mean, [2.0, 2.0], atol=1e-10)

    def test_unreachable_flagged_not_valued(self):
        g = load("0 1\n2 3")
        t = compute_moments(g, SeedSet.from_members([0], 4))
        assert t.reachable.tolist() == [True, False, False]
        assert np.isnan(t.mean[1]) and np.isnan(t.mean[2])
        assert np.isfinite(t.mean[0])

    def test_all_unreachable_errors(self):
        g = load("0 1\n2 3")
        with pytest.raises(ValueError):
            compute_moments(g, SeedSet.from_members([0, 1], 4))

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_dense_solve(self, seed):
        g = random_connected(100, 0.08, seed)
        seeds = SeedSet.from_members(range(6), 100)
        t = compute_moments(g, seeds)
        et1, et2 = dense_moments(g, seeds)
        assert np.linalg.norm(t.mean - et1) <= 1e-8 * np.linalg.norm(et1)
        var = et2 - et1 ** 2
        assert np.linalg.norm(t.variance - var) <= 1e-8 * np.linalg.norm(var)

    def test_first_step_consistency(self):
        g = random_connected(80, 0.1, 9)
        seeds = SeedSet.from_members(range(5), 80)
        t = compute_moments(g, seeds)
        idx = build_nonseed_index(g, seeds)
        rhs = moment_rhs(2, [t.mean], g, idx)  # reuses P_sub machinery
        # direct check of mu_i = 1 + sum_j P_ij mu_j
        p_sub = g.restricted_adjacency(seeds.complement).astype(float)
        inv_d = 1.0 / g.degrees[seeds.complement]
        resid = t.mean - (1.0 + inv_d * (p_sub @ t.mean))
        assert np.abs(resid).max() <= 1e-8
        assert rhs.shape == t.mean.shape

    def test_mean_at_least_one(self):
        g = random_connected(60, 0.15, 2)
        t = compute_moments(g, SeedSet.from_members(range(10), 60))
        assert (t.mean >= 1.0 - 1e-10).all()

    def test_higher_order_supported(self):
        g, seeds = path3()
        t = compute_moments(g, seeds, order=3)
        assert len(t.raw_moments) == 3


class TestSimulation:
    def test_leaf_adjacent_to_seed(self):
        g = load("0 1")
        seeds = SeedSet.from_members([0], 2)
        mean, var, trunc = simulate_hitting_times(g, seeds, 1, 500, 100, 1)
        assert mean == 1.0 and var == 0.0 and trunc == 0

    def test_path3_matches_analytic(self):
        g, seeds = path3()
        n_walks = 100_000
        mean, var, trunc = simulate_hitting_times(g, seeds, 0, n_walks, 10_000, 42)
        se = np.sqrt(var / n_walks)
        assert abs(mean - 4.0) <= 3 * se
        assert trunc == 0

    def test_start_in_seed_errors(self):
        g, seeds = path3()
        with pytest.raises(ValueError):
            simulate_hitting_times(g, seeds, 2, 10, 100, 0)

    def test_zero_max_steps_errors(self):
        g, seeds = path3()
        with pytest.raises(ValueError):
            simulate_hitting_times(g, seeds, 0, 10, 0, 0)

    def test_deterministic_given_seed(self):
        g = random_connected(40, 0.15, 5)
        seeds = SeedSet.from_members(range(3), 40)
        a = simulate_hitting_times(g, seeds, 20, 1000, 10_000, 7)
        b = simulate_hitting_times(g, seeds, 20, 1000, 10_000, 7)
        assert a == b

    def test_agrees_with_cg_moments(self):
        g = random_connected(60, 0.12, 11)
        seeds = SeedSet.from_members(range(5), 60)
        t = compute_moments(g, seeds)
        n_walks = 40_000
        for local in [0, 17, 40]:
            v = int(t.vertices[local])
            mean, var, _ = simulate_hitting_times(g, seeds, v, n_walks, 100_000, local)
            se = np.sqrt(var / n_walks)
            assert abs(t.mean[local] - mean) <= 3 * se
