import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blinklabel.errors import (EmptyInput, EmptyLedTable, InsufficientTransitions)
from blinklabel.events import EventArray
from blinklabel.leds import LedConfig
from blinklabel.signature import (ClusterSignature, PolaritySequence,
                                  estimate_signature, is_outlier,
                                  polarity_sequence, signature_from_runs, smooth)


def events_at(times, polarities):
    n = len(times)
    return EventArray(times, [10] * n, [10] * n, polarities)


def dense_blink_events(on_us, off_us, cycles, step=5, t0=0):
    """Events spread across on (positive) and off (negative) intervals."""
    ts, ps = [], []
    t = t0
    for _ in range(cycles):
        ts.extend(range(t, t + on_us, step))
        ps.extend([1] * len(range(t, t + on_us, step)))
        ts.extend(range(t + on_us, t + on_us + off_us, step))
        ps.extend([0] * len(range(t + on_us, t + on_us + off_us, step)))
        t += on_us + off_us
    return events_at(ts, ps)


def runs_for(pattern, sub=25, t0=0):
    """Build alternating runs from (polarity, length_us) pairs."""
    out = []
    t = t0
    for pol, ln in pattern:
        out.append((pol, t, t + ln))
        t += ln
    return tuple(out)


class TestPolaritySequence:
    def test_majority_positive(self):
        ev = events_at([0, 1, 2, 3, 4, 5, 10, 11, 12, 13],
                       [1, 1, 1, 1, 1, 1, 0, 0, 0, 0])
        seq = polarity_sequence(ev, subwindow_us=25)
        assert seq.runs == ((1, 0, 25),)

    def test_tie_carries_previous(self):
        # first window 6/4 positive, second window 5/5 -> carries positive
        ts = list(range(0, 10)) + list(range(25, 35))
        ps = [1] * 6 + [0] * 4 + [1] * 5 + [0] * 5
        seq = polarity_sequence(events_at(ts, ps), subwindow_us=25)
        assert seq.runs == ((1, 0, 50),)

    def test_leading_tie_is_negative(self):
        ts = [0, 1, 30, 31, 32]
        ps = [1, 0, 1, 1, 1]  # first window tied, then positive
        seq = polarity_sequence(events_at(ts, ps), subwindow_us=25)
        assert seq.runs[0][0] == 0

    def test_alternating_bursts_run_lengths(self):
        ev = dense_blink_events(150, 250, cycles=10)
        seq = polarity_sequence(ev, subwindow_us=25, span=(0, 4000))
        lengths = [(pol, t1 - t0) for pol, t0, t1 in seq.runs]
        assert all(ln == 150 for pol, ln in lengths if pol == 1)
        # the final off run is truncated by the span
        assert all(ln == 250 for pol, ln in lengths[:-1] if pol == 0)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            polarity_sequence(EventArray.empty())


class TestSmooth:
    def test_isolated_flip_removed(self):
        seq = PolaritySequence(25, runs_for([(1, 75), (0, 25), (1, 75)]))
        out = smooth(seq, kernel_width=3)
        assert out.runs == ((1, 0, 175),)

    def test_kernel_one_identity(self):
        seq = PolaritySequence(25, runs_for([(1, 75), (0, 25), (1, 75)]))
        assert smooth(seq, kernel_width=1).runs == seq.runs

    def test_adjacent_pair_preserved(self):
        seq = PolaritySequence(25, runs_for([(1, 75), (0, 50), (1, 75)]))
        out = smooth(seq, kernel_width=3)
        assert (0, 75, 125) in out.runs

    def test_even_kernel_rejected(self):
        seq = PolaritySequence(25, runs_for([(1, 75), (0, 50)]))
        with pytest.raises(ValueError):
            smooth(seq, kernel_width=4)


class TestEstimate:
    def test_ideal_sequence_exact(self):
        pattern = [(1, 150), (0, 250)] * 10 + [(1, 150)]
        sig = signature_from_runs(runs_for(pattern))
        assert sig.mean_on_us == 150
        assert sig.mean_off_us == 250
        assert sig.period_us == 400
        assert sig.period_pos_us == 400
        assert sig.period_neg_us == 400

    def test_perturbed_run_shifts_mean(self):
        # ten interior on-runs, one of them 160
        pattern = [(0, 250)]
        for i in range(10):
            pattern.append((1, 160 if i == 0 else 150))
            pattern.append((0, 250))
        sig = signature_from_runs(runs_for(pattern))
        assert sig.mean_on_us == pytest.approx(151.0)

    def test_period_identity(self):
        pattern = [(1, 140), (0, 260)] * 8 + [(1, 140)]
        sig = signature_from_runs(runs_for(pattern))
        assert sig.period_us == sig.mean_on_us + sig.mean_off_us

    def test_insufficient_transitions(self):
        with pytest.raises(InsufficientTransitions):
            signature_from_runs(runs_for([(1, 150), (0, 250)]))
        # three runs but only one polarity interior
        with pytest.raises(InsufficientTransitions):
            signature_from_runs(runs_for([(1, 150), (0, 250), (1, 150)]))

    def test_period_fallback_when_single_onset(self):
        # four runs: one interior of each class, but only one real onset per
        # class pair, so measured period gaps may be absent for one side
        sig = signature_from_runs(runs_for([(0, 100), (1, 150), (0, 250),
                                            (1, 150), (0, 90)]))
        assert sig.period_pos_us == pytest.approx(400.0)

    def test_estimate_signature_wraps_sequence(self):
        ev = dense_blink_events(150, 250, cycles=12)
        seq = polarity_sequence(ev, subwindow_us=25, span=(0, 12 * 400))
        sig = estimate_signature(seq)
        assert sig.mean_on_us == pytest.approx(150, abs=1e-9)
        assert sig.mean_off_us == pytest.approx(250, abs=1e-9)


class TestJitterRecovery:
    def test_recovery_within_10us(self):
        from blinklabel.simulate import SceneConfig, SinusoidPath, simulate
        from blinklabel.errors import BlinkLabelError
        for seed in range(10):
            led = LedConfig(id="j", on_time_us=150, off_time_us=250)
            scene = SceneConfig(
                leds=(led,), paths={"j": SinusoidPath(100.0, 100.0)},
                duration_us=100_000, seed=seed, events_per_edge=6, jitter_us=5)
            _, ev, _ = simulate(scene)
            seq = polarity_sequence(ev, subwindow_us=25, span=(0, 100_000))
            sig = estimate_signature(smooth(seq, 3))
            assert abs(sig.mean_on_us - 150) <= 10
            assert abs(sig.period_us - 400) <= 10


class TestInvariants:
    @settings(max_examples=40, deadline=None)
    @given(shift=st.integers(0, 10_000_000))
    def test_time_shift_invariance(self, shift):
        ev = dense_blink_events(150, 250, cycles=8)
        ev2 = EventArray(ev.t + shift, ev.x, ev.y, ev.p)
        s1 = estimate_signature(polarity_sequence(ev, 25))
        s2 = estimate_signature(polarity_sequence(ev2, 25))
        assert s1 == s2

    def test_subwindow_refinement(self):
        ev = dense_blink_events(150, 250, cycles=10, step=2)
        a = polarity_sequence(ev, 24, span=(0, 4000))
        b = polarity_sequence(ev, 12, span=(0, 4000))
        # run boundaries may move by at most one coarse sub-window per edge
        for (pa, a0, a1), (pb, b0, b1) in zip(a.runs[1:-1], b.runs[1:-1]):
            assert pa == pb
            assert abs(a0 - b0) <= 24 and abs(a1 - b1) <= 24

    def test_noise_robustness_after_smoothing(self, rng):
        classes = np.tile(np.concatenate((np.ones(6, np.int8),
                                          -np.ones(10, np.int8))), 30)
        n = len(classes)
        flips = rng.choice(np.arange(2, n - 2, 4), size=int(0.05 * n) // 1,
                           replace=False)
        noisy = classes.copy()
        noisy[flips] = -noisy[flips]
        from blinklabel.signature import runs_from_classes, smooth_classes
        clean_sig = signature_from_runs(runs_from_classes(classes, 0, 25))
        smoothed = smooth_classes(noisy, 3)
        noisy_sig = signature_from_runs(runs_from_classes(smoothed, 0, 25))
        assert abs(noisy_sig.mean_on_us - clean_sig.mean_on_us) <= 50
        assert abs(noisy_sig.mean_off_us - clean_sig.mean_off_us) <= 50


class TestOutlier:
    TABLE = [LedConfig(id="a", on_time_us=150, off_time_us=250),
             LedConfig(id="b", on_time_us=250, off_time_us=150)]

    def sig(self, on, off, period=None):
        t = period if period is not None else on + off
        return ClusterSignature(on, off, on + off, t, t, 10)

    def test_exact_match_not_outlier(self):
        assert not is_outlier(self.sig(150, 250), self.TABLE, 0.5)

    def test_flickering_lamp_outlier(self):
        assert is_outlier(self.sig(2000, 2000), self.TABLE, 0.5)

    def test_borderline_within_tolerance(self):
        # max relative deviation vs (150, 250) is ~0.067
        assert not is_outlier(self.sig(140, 260), self.TABLE, 0.5)

    def test_empty_table(self):
        with pytest.raises(EmptyLedTable):
            is_outlier(self.sig(150, 250), [], 0.5)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            is_outlier(self.sig(150, 250), self.TABLE, 0.0)
