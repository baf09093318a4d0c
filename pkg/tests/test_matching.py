import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blinklabel.errors import BothWeightsZero
from blinklabel.leds import LedConfig
from blinklabel.matching import (Assignment, CostMatrix, Tracker, TrackStatus,
                                 assign, build_cost_matrix, combined_distance,
                                 gate_costs, period_distance, time_distance,
                                 track_update)
from blinklabel.signature import ClusterSignature

from conftest import brute_force_assign

LED = LedConfig(id="a", on_time_us=150, off_time_us=250)


def sig(on, off, tp=None, tn=None):
    return ClusterSignature(on, off, on + off, tp or on + off, tn or on + off, 10)


class TestDistances:
    def test_time_distance_identity(self):
        assert time_distance(sig(150, 250), LED) == 0

    def test_time_distance_sum_of_abs(self):
        assert time_distance(sig(160, 240), LED) == 20

    def test_time_distance_symmetric(self):
        assert time_distance(sig(140, 260), LED) == 20

    def test_period_distance_zero(self):
        assert period_distance(sig(150, 250, 400, 400), LED) == 0

    def test_period_distance_one_sided(self):
        assert period_distance(sig(150, 250, 400, 410), LED) == 10

    def test_ambiguous_duty_pair_separation(self):
        # equal periods, different duty: period distance blind, on-off seeing
        led_b = LedConfig(id="b", on_time_us=250, off_time_us=150)
        s = sig(150, 250)  # perfect measurement of led a
        assert period_distance(s, led_b) == 0
        assert time_distance(s, led_b) == 200

    def test_combined(self):
        s = sig(160, 240, 390, 410)  # d_t=20, d_p=10+10=20
        assert combined_distance(s, LED, 1.0, 0.5) == pytest.approx(30.0)

    def test_ablation_reductions(self):
        s = sig(160, 240, 390, 410)
        assert combined_distance(s, LED, 1.0, 0.0) == time_distance(s, LED)
        assert combined_distance(s, LED, 0.0, 1.0) == period_distance(s, LED)

    def test_both_weights_zero(self):
        with pytest.raises(BothWeightsZero):
            combined_distance(sig(150, 250), LED, 0.0, 0.0)
        with pytest.raises(BothWeightsZero):
            build_cost_matrix([sig(150, 250)], [LED], 0.0, 0.0)


class TestAssign:
    def test_diagonal(self):
        out = assign(CostMatrix(np.array([[1.0, 10.0], [10.0, 1.0]]),
                                d_max=np.inf))
        assert [(i, j) for i, j, _ in out.pairs] == [(0, 0), (1, 1)]
        assert out.total_cost == 2

    def test_tie_broken_lexicographically(self):
        out = assign(CostMatrix(np.array([[1.0, 2.0], [1.0, 2.0]]),
                                d_max=np.inf))
        assert [(i, j) for i, j, _ in out.pairs] == [(0, 0), (1, 1)]
        assert out.total_cost == 3

    def test_all_forbidden(self):
        out = assign(CostMatrix(np.array([[5.0, 5.0]]), d_max=1.0))
        assert out.pairs == ()
        assert out.unmatched_clusters == (0,)
        assert out.unmatched_leds == (0, 1)

    def test_gate_prefers_cardinality(self):
        # matching both rows costs more but cardinality wins
        out = assign(CostMatrix(np.array([[1.0, 100.0], [np.inf, 100.0]]),
                                d_max=np.inf))
        assert len(out.pairs) == 2

    def test_brute_force_oracle_5x5(self):
        rng = np.random.default_rng(99)
        for trial in range(1000):
            m = int(rng.integers(1, 6))
            n = int(rng.integers(1, 6))
            costs = np.round(rng.random((m, n)) * 100, 3)
            if rng.random() < 0.3:
                costs[rng.random((m, n)) < 0.3] = np.inf
            d_max = float(rng.choice([np.inf, 75.0, 40.0]))
            got = assign(CostMatrix(costs, d_max=d_max))
            want = brute_force_assign(costs, d_max)
            assert [(i, j) for i, j, _ in got.pairs] == want, \
                f"trial {trial}: {costs} d_max={d_max}"

    def test_brute_force_with_integer_ties(self):
        rng = np.random.default_rng(5)
        for trial in range(300):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(1, 5))
            costs = rng.integers(0, 4, size=(m, n)).astype(float)
            got = assign(CostMatrix(costs, d_max=np.inf))
            want = brute_force_assign(costs, np.inf)
            assert [(i, j) for i, j, _ in got.pairs] == want

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(1, 5), n=st.integers(1, 5),
        seed=st.integers(0, 10_000),
    )
    def test_injectivity(self, m, n, seed):
        rng = np.random.default_rng(seed)
        costs = rng.random((m, n)) * 50
        out = assign(CostMatrix(costs, d_max=30.0))
        rows = [i for i, _, _ in out.pairs]
        cols = [j for _, j, _ in out.pairs]
        assert len(set(rows)) == len(rows)
        assert len(set(cols)) == len(cols)
        assert all(c <= 30.0 for _, _, c in out.pairs)

    def test_monotone_gating(self, rng):
        for _ in range(50):
            costs = rng.random((4, 4)) * 100
            sizes = [len(assign(CostMatrix(costs, d_max=d)).pairs)
                     for d in (np.inf, 80.0, 50.0, 20.0, 5.0)]
            assert sizes == sorted(sizes, reverse=True)

    def test_weight_scaling_invariance(self, rng):
        leds = [LedConfig(id=f"l{i}", on_time_us=100 + 50 * i,
                          off_time_us=300 - 50 * i) for i in range(4)]
        sigs = [sig(100 + 50 * i + rng.normal(0, 5),
                    300 - 50 * i + rng.normal(0, 5)) for i in range(4)]
        base = assign(build_cost_matrix(sigs, leds, 1.0, 0.5, np.inf))
        for c in (0.1, 3.0, 42.0):
            scaled = assign(build_cost_matrix(sigs, leds, c * 1.0, c * 0.5,
                                              np.inf))
            assert [(i, j) for i, j, _ in scaled.pairs] == \
                [(i, j) for i, j, _ in base.pairs]

    def test_zero_distance_soundness(self):
        leds = [LedConfig(id="a", on_time_us=150, off_time_us=250),
                LedConfig(id="b", on_time_us=250, off_time_us=150),
                LedConfig(id="c", on_time_us=100, off_time_us=100)]
        # one cluster that is exactly led b
        cm = build_cost_matrix([sig(250, 150)], leds, 1.0, 0.5, 200.0)
        out = assign(cm)
        assert out.pairs[0][1] == 1
        assert out.pairs[0][2] == 0.0


class TestTracker:
    def leds(self):
        return [LedConfig(id="a", on_time_us=150, off_time_us=250)]

    def test_velocity_finite_difference(self):
        tr = Tracker(self.leds())
        a = Assignment(((0, 0, 0.0),), (), ())
        tr.update(a, [(0.0, 0.0)], now=0)
        tr.update(a, [(1.0, 0.0)], now=1000)
        t = tr.tracks[0]
        assert t.velocity == pytest.approx((1.0, 0.0))
        assert t.status is TrackStatus.ACTIVE

    def test_coasting_advances_by_velocity(self):
        tr = Tracker(self.leds())
        a = Assignment(((0, 0, 0.0),), (), ())
        tr.update(a, [(0.0, 0.0)], now=0)
        tr.update(a, [(1.0, 0.0)], now=1000)
        empty = Assignment((), (), (0,))
        for k in range(2, 22):
            tr.update(empty, [], now=k * 1000)
        t = tr.tracks[0]
        assert t.status is TrackStatus.COASTING
        assert t.position[0] == pytest.approx(21.0)

    def test_lost_after_coast_limit_resets_velocity(self):
        tr = Tracker(self.leds(), coast_limit_us=5_000)
        a = Assignment(((0, 0, 0.0),), (), ())
        tr.update(a, [(0.0, 0.0)], now=0)
        tr.update(a, [(1.0, 0.0)], now=1000)
        empty = Assignment((), (), (0,))
        for k in range(2, 9):
            tr.update(empty, [], now=k * 1000)
        t = tr.tracks[0]
        assert t.status is TrackStatus.LOST
        assert t.velocity == (0.0, 0.0)

    def test_track_update_wrapper(self):
        from blinklabel.cluster import Cluster
        from blinklabel.events import EventArray
        tr = Tracker(self.leds())
        c = Cluster((0, 1000), EventArray([1], [3], [4], [1]), (3.0, 4.0),
                    (3, 4, 3, 4))
        track_update(tr, Assignment(((0, 0, 0.0),), (), ()), [c], now=0)
        assert tr.tracks[0].position == (3.0, 4.0)

    def test_history_extended_with_matched_runs(self):
        tr = Tracker(self.leds())
        a = Assignment(((0, 0, 0.0),), (), ())
        tr.update(a, [(0.0, 0.0)], now=0,
                  runs_per_cluster={0: [(1, 0, 150), (0, 150, 400)]})
        tr.update(a, [(0.0, 0.0)], now=1000,
                  runs_per_cluster={0: [(0, 400, 650)]})
        runs = tr.tracks[0].signature_history
        assert (1, 0, 150) in runs
        # adjacent same-polarity runs merged across the frame boundary
        assert (0, 150, 650) in runs


class TestGating:
    def test_far_cluster_forbidden(self):
        leds = [LedConfig(id="a", on_time_us=150, off_time_us=250)]
        tr = Tracker(leds)
        tr.update(Assignment(((0, 0, 0.0),), (), ()), [(100.0, 100.0)], now=0)
        cm = CostMatrix(np.array([[5.0]]), d_max=200.0)
        gated = gate_costs(cm, tr, [(300.0, 100.0)], spatial_gate_px=50.0,
                           now=1000)
        assert np.isinf(gated.costs[0, 0])

    def test_lost_not_gated(self):
        leds = [LedConfig(id="a", on_time_us=150, off_time_us=250)]
        tr = Tracker(leds)  # never seen: lost
        cm = CostMatrix(np.array([[5.0]]), d_max=200.0)
        gated = gate_costs(cm, tr, [(300.0, 100.0)], spatial_gate_px=50.0,
                           now=1000)
        assert gated.costs[0, 0] == 5.0
