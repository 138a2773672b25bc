import numpy as np
import pytest

from satisrank.batch_solver import (
    EPS_FEAS,
    cvar_satisficing_direct,
    rank_batch,
    satisficing_binary_search,
    solve_items,
)
from satisrank.data_io import DistributionFamily, DistributionSpec, generate_synthetic
from satisrank.divergence import DivergenceKind, DivergenceSpec
from satisrank.risk_core import ALPHA_MIN, ItemBatch, RegretScaling, empirical_oce_risk

CVAR = DivergenceSpec(DivergenceKind.CVAR_INDICATOR)
IA = RegretScaling.INVERSE_ALPHA
IOMA = RegretScaling.INVERSE_ONE_MINUS_ALPHA


def normal_batch(item_id, tau, n, seed, mean=100.0, sd=50.0):
    spec = DistributionSpec(DistributionFamily.NORMAL, mean, sd, seed)
    return ItemBatch(item_id, generate_synthetic(spec, n), tau)


class TestBinarySearch:
    def test_attainment_content(self):
        batch = ItemBatch("good", [-1.0, -1.0, -1.0], 0.0)
        sol = satisficing_binary_search(batch, CVAR)
        assert sol.alpha_star == ALPHA_MIN
        assert sol.index == pytest.approx(1.0, abs=2e-6)
        assert sol.feasible_at_alpha_star

    def test_non_attainment_apathy(self):
        batch = ItemBatch("bad", [1.0, 1.0, 1.0], 0.0)
        sol = satisficing_binary_search(batch, CVAR)
        assert sol.alpha_star == 1.0
        assert sol.index == 0.0
        assert not sol.feasible_at_alpha_star

    def test_two_point_boundary(self):
        batch = ItemBatch("b", [-2.0, 1.0], 0.0)
        epsilon = 1e-4
        sol = satisficing_binary_search(batch, CVAR, IA, epsilon)
        assert abs(sol.alpha_star - 0.75) <= epsilon + 1e-9
        assert sol.index == pytest.approx(0.25, abs=epsilon + 1e-9)
        assert sol.index == 1.0 - sol.alpha_star
        assert sol.feasible_at_alpha_star
        assert sol.bisection_steps > 0

    def test_feasibility_certificate(self, rng):
        # boundary side feasible, the other side infeasible
        for seed in range(5):
            batch = normal_batch("n", 120.0, 400, seed)
            epsilon = 1e-4
            sol = satisficing_binary_search(batch, CVAR, IA, epsilon)
            assert empirical_oce_risk(batch, sol.alpha_star, CVAR, IA).value <= EPS_FEAS
            below = sol.alpha_star - 2 * epsilon
            assert empirical_oce_risk(batch, below, CVAR, IA).value > 0.0

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            satisficing_binary_search(ItemBatch("a", [1.0], 0.0), CVAR, epsilon=0.0)

    def test_threshold_tau_restores_literal_comparison(self):
        # with threshold = target > 0, feasibility is easier to reach
        batch = ItemBatch("b", [-2.0, 1.0], 0.5)
        strict = satisficing_binary_search(batch, CVAR, IA, threshold=0.0)
        literal = satisficing_binary_search(batch, CVAR, IA, threshold=batch.target)
        assert literal.alpha_star <= strict.alpha_star

    def test_mirrored_scaling_identity(self, rng):
        # the 1/(1-alpha) index equals the 1/alpha boundary on the same data
        epsilon = 1e-4
        for seed in range(4):
            batch = normal_batch("n", 120.0, 300, seed + 10)
            ia = satisficing_binary_search(batch, CVAR, IA, epsilon)
            ioma = satisficing_binary_search(batch, CVAR, IOMA, epsilon)
            assert ioma.index == pytest.approx(ia.alpha_star, abs=2 * epsilon)
            assert ioma.index == 1.0 - ioma.alpha_star

    def test_mirrored_scaling_degenerate_ends(self):
        good = ItemBatch("good", [-1.0, -1.0], 0.0)
        sol = satisficing_binary_search(good, CVAR, IOMA)
        assert sol.index == pytest.approx(0.0, abs=2e-6)
        assert sol.feasible_at_alpha_star
        bad = ItemBatch("bad", [1.0, 1.0], 0.0)
        sol = satisficing_binary_search(bad, CVAR, IOMA)
        assert sol.index == pytest.approx(1.0, abs=2e-6)
        assert not sol.feasible_at_alpha_star


class TestAxioms:
    def test_monotonicity(self, rng):
        epsilon = 1e-4
        for _ in range(20):
            n = int(rng.integers(3, 40))
            samples = rng.normal(0.0, 5.0, size=n)
            batch = ItemBatch("b", samples, 0.0)
            worse = ItemBatch("w", samples + rng.uniform(0.0, 3.0, size=n), 0.0)
            sol = satisficing_binary_search(batch, CVAR, IA, epsilon)
            sol_w = satisficing_binary_search(worse, CVAR, IA, epsilon)
            assert sol_w.index <= sol.index + 2 * epsilon

    def test_gain_continuity_proxy(self, rng):
        epsilon = 1e-4
        for _ in range(10):
            samples = rng.normal(0.0, 5.0, size=25)
            batch = ItemBatch("b", samples, 0.0)
            nudged = ItemBatch("b", samples - 1e-9, 0.0)
            i0 = satisficing_binary_search(batch, CVAR, IA, epsilon).index
            i1 = satisficing_binary_search(nudged, CVAR, IA, epsilon).index
            assert abs(i1 - i0) <= 2 * epsilon + 1e-6


class TestDirectRoute:
    def test_two_point_value(self):
        batch = ItemBatch("b", [-2.0, 1.0], 0.0)
        assert cvar_satisficing_direct(batch) == pytest.approx(0.25, abs=1e-7)

    def test_non_attainment_clips_to_zero(self):
        batch = ItemBatch("b", [1.0, 1.0], 0.0)
        assert cvar_satisficing_direct(batch) == 0.0

    def test_attainment_reaches_one(self):
        batch = ItemBatch("b", [-1.0, -1.0], 0.0)
        assert cvar_satisficing_direct(batch) == pytest.approx(1.0, abs=1e-9)

    def test_matches_binary_search(self, rng):
        epsilon = 1e-4
        for _ in range(100):
            n = int(rng.integers(2, 80))
            batch = ItemBatch("b", rng.normal(0.0, rng.uniform(0.5, 10.0), size=n),
                              float(rng.normal(0.0, 3.0)))
            direct = cvar_satisficing_direct(batch)
            search = satisficing_binary_search(batch, CVAR, IA, epsilon)
            assert abs(direct - search.index) <= 2 * epsilon + 1e-6


class TestRankBatch:
    def test_axioms_order_items(self):
        items = [
            ItemBatch("bad", [1.0, 1.0], 0.0),
            ItemBatch("good", [-1.0, -1.0], 0.0),
        ]
        report = rank_batch(items, CVAR)
        assert [e.item_id for e in report.entries] == ["good", "bad"]
        assert report.entries[0].rank == 1
        assert report.entries[1].rank == 2

    def test_singleton(self):
        report = rank_batch([ItemBatch("only", [0.5], 0.0)], CVAR)
        assert len(report.entries) == 1
        assert report.entries[0].rank == 1
        assert report.ties == ()

    def test_duplicate_ids_rejected(self):
        items = [ItemBatch("a", [1.0], 0.0), ItemBatch("a", [2.0], 0.0)]
        with pytest.raises(ValueError):
            rank_batch(items, CVAR)

    def test_rank_monotone_in_target(self):
        # identical loss law, growing target: easier target ranks first
        taus = [110.0, 120.0, 130.0, 140.0]
        items = [normal_batch(f"t{int(t)}", t, 20_000, seed=7 + k) for k, t in enumerate(taus)]
        report = rank_batch(items, CVAR, IA, 1e-4)
        assert [e.item_id for e in report.entries] == ["t140", "t130", "t120", "t110"]

    def test_solve_items_matches_search(self):
        items = [ItemBatch("a", [-2.0, 1.0], 0.0), ItemBatch("b", [1.0], 0.0)]
        sols = solve_items(items, CVAR)
        assert [s.item_id for s in sols] == ["a", "b"]
        assert sols[0].index == pytest.approx(0.25, abs=2e-4)
