import math

import numpy as np
import pytest

from multiphase import (
    CoherentProbe,
    NoonProbe,
    cost_all_pairs,
    cost_common,
    cost_ring,
    invert_restricted,
    optimal_all_pairs,
    optimal_common,
    optimal_ring,
    optimize_numeric,
    scalar_bound,
)
from multiphase.allocation import project_simplex


def recompute_bound(energies, cost):
    probe = CoherentProbe.from_energies(energies)
    return scalar_bound(invert_restricted(probe), cost).value


class TestClosedForms:
    def test_common_d4(self):
        alloc = optimal_common(4, 1.0)
        assert alloc.energies[0] == pytest.approx(1 / 3)
        assert alloc.energies[1:] == pytest.approx(np.full(4, 1 / 6))
        assert alloc.achieved_bound == pytest.approx(9.0)

    def test_common_d1(self):
        alloc = optimal_common(1, 1.0)
        assert alloc.energies == pytest.approx([0.5, 0.5])
        assert alloc.achieved_bound == pytest.approx(1.0)

    def test_common_unit_weights_match_unweighted(self):
        plain = optimal_common(2, 1.0)
        weighted = optimal_common(2, 1.0, [1.0, 1.0])
        assert weighted.energies == pytest.approx(plain.energies)
        assert weighted.achieved_bound == pytest.approx(plain.achieved_bound)

    def test_ring_equal_split(self):
        alloc = optimal_ring(2, 1.0)
        assert alloc.energies == pytest.approx(np.full(3, 1 / 3))
        assert alloc.achieved_bound == pytest.approx(4.5)

    def test_ring_unit_weights_match_unweighted(self):
        assert optimal_ring(2, 1.0, [1.0] * 3).energies == pytest.approx(
            optimal_ring(2, 1.0).energies)

    def test_all_pairs_values(self):
        assert optimal_all_pairs(3, 1.0).achieved_bound == pytest.approx(12.0)
        assert optimal_all_pairs(1, 1.0).achieved_bound == pytest.approx(1.0)

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_bounds_recompute_from_energies(self, d):
        for alloc, cost in [
            (optimal_common(d, 2.0), cost_common(d)),
            (optimal_ring(d, 2.0), cost_ring(d)),
            (optimal_all_pairs(d, 2.0), cost_all_pairs(d)),
            (optimal_common(d, 1.5, np.arange(1, d + 1)), cost_common(d, np.arange(1, d + 1))),
        ]:
            assert alloc.total == pytest.approx(alloc.energies.sum(), abs=1e-9)
            assert alloc.achieved_bound == pytest.approx(
                recompute_bound(alloc.energies, cost), rel=1e-9)


class TestSimplexProjection:
    def test_projects_onto_plane(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            v = rng.normal(size=5) * 3
            x = project_simplex(v, total=2.0)
            assert x.sum() == pytest.approx(2.0)
            assert np.all(x >= 0)

    def test_feasible_point_is_fixed(self):
        v = np.array([0.2, 0.3, 0.5])
        assert project_simplex(v, 1.0) == pytest.approx(v)

    def test_floor_respected(self):
        x = project_simplex(np.array([1.0, 0.0, 0.0]), 1.0, floor=0.1)
        assert np.all(x >= 0.1 - 1e-15)
        assert x.sum() == pytest.approx(1.0)


class TestNumericOptimizer:
    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_recovers_common_optimum(self, d):
        alloc = optimize_numeric(d, 1.0, cost_common(d))
        closed = optimal_common(d, 1.0)
        assert alloc.achieved_bound == pytest.approx(closed.achieved_bound, rel=1e-5)
        assert alloc.energies == pytest.approx(closed.energies, abs=1e-5)

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_recovers_ring_optimum(self, d):
        alloc = optimize_numeric(d, 1.0, cost_ring(d))
        closed = optimal_ring(d, 1.0)
        assert alloc.achieved_bound == pytest.approx(closed.achieved_bound, rel=1e-5)
        assert alloc.energies == pytest.approx(closed.energies, abs=1e-5)

    def test_recovers_weighted_ring_optimum(self):
        weights = [2.0, 1.0, 1.0]
        alloc = optimize_numeric(2, 1.0, cost_ring(2, weights))
        closed = optimal_ring(2, 1.0, weights)
        assert alloc.achieved_bound == pytest.approx(closed.achieved_bound, rel=1e-6)
        assert alloc.energies == pytest.approx(closed.energies, abs=1e-5)
        # the optimum splits evenly between the two modes touching the heavy
        # edge and gives less to the remaining one
        assert closed.energies[0] == pytest.approx(closed.energies[1])
        assert closed.energies[2] < closed.energies[0]

    def test_heavier_weight_attracts_energy(self):
        weights = [1.0, 100.0]
        alloc = optimize_numeric(2, 1.0, cost_common(2, weights))
        closed = optimal_common(2, 1.0, weights)
        assert alloc.energies[2] > alloc.energies[1]
        assert alloc.energies == pytest.approx(closed.energies, abs=1e-5)

    def test_noon_family_matches_classical_fractions(self):
        d, n = 3, 4
        cost = cost_common(d)
        quantum = optimize_numeric(d, n, cost, probe_family="noon")
        classical = optimal_common(d, 1.0)
        assert quantum.energies / n == pytest.approx(classical.energies, abs=1e-5)
        probe = NoonProbe.from_weights(quantum.energies / n, n)
        assert quantum.achieved_bound == pytest.approx(
            scalar_bound(invert_restricted(probe), cost).value, rel=1e-9)

    def test_optimum_beats_random_feasible_points(self):
        d = 3
        cost = cost_ring(d)
        best = optimize_numeric(d, 1.0, cost)
        rng = np.random.default_rng(23)
        for _ in range(100):
            energies = rng.dirichlet(np.ones(d + 1))
            energies = np.maximum(energies, 1e-6)
            energies /= energies.sum()
            assert best.achieved_bound <= recompute_bound(energies, cost) + 1e-9

    def test_simplex_feasibility(self):
        alloc = optimize_numeric(4, 2.5, cost_all_pairs(4))
        assert alloc.energies.sum() == pytest.approx(2.5, abs=1e-9)
        assert np.all(alloc.energies >= 0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            optimize_numeric(2, -1.0, cost_common(2))
        with pytest.raises(ValueError):
            optimize_numeric(2, 1.0, cost_common(3))
        with pytest.raises(ValueError):
            optimize_numeric(2, 1.5, cost_common(2), probe_family="noon")
        with pytest.raises(ValueError):
            optimize_numeric(2, 1.0, cost_common(2), probe_family="squeezed")


class TestWeightedClosedForms:
    def test_weighted_common_formula(self):
        d, weights = 3, np.array([1.0, 4.0, 9.0])
        alloc = optimal_common(d, 1.0, weights)
        scale = math.sqrt(weights.sum()) + np.sqrt(weights).sum()
        assert alloc.energies[0] == pytest.approx(math.sqrt(weights.sum()) / scale)
        assert alloc.energies[1:] == pytest.approx(np.sqrt(weights) / scale)

    def test_weighted_ring_edge_convention(self):
        # mode i sits between edges i-1 and i; the edge closing the cycle
        # (weight w_d) belongs to mode 0
        weights = np.array([2.0, 1.0, 1.0])
        alloc = optimal_ring(2, 1.0, weights)
        shares = np.sqrt([weights[2] + weights[0], weights[0] + weights[1],
                          weights[1] + weights[2]])
        assert alloc.energies == pytest.approx(shares / shares.sum())

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_weighted_optima_beat_numeric_search(self, d):
        rng = np.random.default_rng(d + 100)
        w_common = rng.uniform(0.5, 3.0, d)
        w_ring = rng.uniform(0.5, 3.0, d + 1)
        for closed, cost in [
            (optimal_common(d, 1.0, w_common), cost_common(d, w_common)),
            (optimal_ring(d, 1.0, w_ring), cost_ring(d, w_ring)),
        ]:
            numeric = optimize_numeric(d, 1.0, cost, seed=d)
            assert numeric.achieved_bound == pytest.approx(
                closed.achieved_bound, rel=1e-5)
