"""Blink-signature decoding from cluster event timing.

A cluster's time span is tiled into sub-windows (default 25 us, well under
the shortest 100 us on-time). Each sub-window is classified by majority
polarity; empty or tied sub-windows carry the previous class, so the gaps
between bursts inherit the surrounding state. Adjacent same-class
sub-windows merge into runs, and run statistics give the signature:
mean on/off durations plus the periods of the positive and negative
sequences.

Boundary runs are truncated by the span, so they are excluded from the
duration means. Onset-to-onset period statistics likewise skip the first
run's start, which is a tiling artifact rather than a real transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, EmptyLedTable, InsufficientTransitions
from .events import EventArray
from .leds import LedConfig

DEFAULT_SUBWINDOW_US = 25
DEFAULT_SMOOTH_KERNEL = 3

# Run tuples are (polarity, start_us, end_us) with polarity 1/0.
Run = tuple[int, int, int]


@dataclass(frozen=True)
class PolaritySequence:
    """Alternating polarity runs tiling a time span."""

    subwindow_us: int
    runs: tuple[Run, ...]

    @property
    def span(self) -> tuple[int, int]:
        if not self.runs:
            return (0, 0)
        return (self.runs[0][1], self.runs[-1][2])


@dataclass(frozen=True)
class ClusterSignature:
    """Measured blink statistics of one cluster.

    ``period_us`` is mean_on + mean_off by construction; the positive and
    negative periods are measured independently from onset gaps.
    """

    mean_on_us: float
    mean_off_us: float
    period_us: float
    period_pos_us: float
    period_neg_us: float
    sample_count: int


# --------------------------------------------------------------------------
# sub-window classification

def _forward_fill_classes(cls: np.ndarray) -> np.ndarray:
    """Replace 0 (tie/empty) with the previous class; leading ties negative."""
    if cls.ndim == 1:
        return _forward_fill_classes(cls[None, :])[0]
    n, m = cls.shape
    idx = np.arange(m)
    last = np.where(cls != 0, idx[None, :], -1)
    np.maximum.accumulate(last, axis=1, out=last)
    filled = np.take_along_axis(cls, np.clip(last, 0, None), axis=1)
    return np.where(last >= 0, filled, -1).astype(np.int8)


def classify_subwindows(pos_counts: np.ndarray, neg_counts: np.ndarray) -> np.ndarray:
    """Majority class per sub-window (+1/-1), after carry filling.

    Works on 1-D count vectors or (batch, n_sub) matrices.
    """
    raw = np.sign(pos_counts.astype(np.int64) - neg_counts.astype(np.int64))
    return _forward_fill_classes(raw.astype(np.int8))


def smooth_classes(cls: np.ndarray, kernel_width: int) -> np.ndarray:
    """Sliding majority vote; windows truncate at span edges, ties keep
    the original class."""
    if kernel_width == 1:
        return cls
    if kernel_width < 1 or kernel_width % 2 == 0:
        raise ValueError("kernel_width must be odd and >= 1")
    squeeze = cls.ndim == 1
    if squeeze:
        cls = cls[None, :]
    n, m = cls.shape
    h = kernel_width // 2
    csum = np.zeros((n, m + 1), dtype=np.int64)
    np.cumsum(cls, axis=1, out=csum[:, 1:])
    lo = np.clip(np.arange(m) - h, 0, m)
    hi = np.clip(np.arange(m) + h + 1, 0, m)
    win = csum[:, hi] - csum[:, lo]
    out = np.where(win > 0, 1, np.where(win < 0, -1, cls)).astype(np.int8)
    return out[0] if squeeze else out


def runs_from_classes(cls: np.ndarray, t0: int, subwindow_us: int) -> tuple[Run, ...]:
    """Run-length encode one class vector into absolute-time runs."""
    n = len(cls)
    if n == 0:
        return ()
    change = np.nonzero(np.diff(cls))[0]
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [n]))
    return tuple(
        (1 if cls[s] > 0 else 0,
         int(t0 + s * subwindow_us), int(t0 + e * subwindow_us))
        for s, e in zip(starts, ends)
    )


# --------------------------------------------------------------------------
# public operations

def polarity_sequence(events, subwindow_us: int = DEFAULT_SUBWINDOW_US,
                      span: tuple[int, int] | None = None) -> PolaritySequence:
    """Tile events into sub-windows and classify each by majority polarity.

    The tiling anchors at the first event unless an explicit span is given
    (the pipeline passes frame bounds), so the result is invariant under
    time translation of the whole input.
    """
    if subwindow_us < 1:
        raise ValueError("subwindow_us must be >= 1")
    if not isinstance(events, EventArray):
        events = EventArray.from_events(events)
    if len(events) == 0:
        raise EmptyInput("polarity_sequence needs at least one event")
    if span is None:
        t0 = int(events.t[0])
        t1 = int(events.t[-1]) + 1
    else:
        t0, t1 = span
    n_sub = max(1, -(-(t1 - t0) // subwindow_us))
    sub = (events.t - t0) // subwindow_us
    ok = (sub >= 0) & (sub < n_sub)
    pos = np.bincount(sub[ok & (events.p == 1)], minlength=n_sub)
    neg = np.bincount(sub[ok & (events.p == 0)], minlength=n_sub)
    cls = classify_subwindows(pos, neg)
    return PolaritySequence(subwindow_us=subwindow_us,
                            runs=runs_from_classes(cls, t0, subwindow_us))


def smooth(seq: PolaritySequence, kernel_width: int = DEFAULT_SMOOTH_KERNEL
           ) -> PolaritySequence:
    """Majority-filter the sub-window classes, then re-merge runs.

    A single flipped sub-window inside a long run disappears for
    kernel_width >= 3; adjacent pairs survive.
    """
    if not seq.runs:
        return seq
    t0, t1 = seq.span
    sub = seq.subwindow_us
    n = (t1 - t0) // sub
    cls = np.empty(n, dtype=np.int8)
    for pol, r0, r1 in seq.runs:
        cls[(r0 - t0) // sub:(r1 - t0) // sub] = 1 if pol == 1 else -1
    cls = smooth_classes(cls, kernel_width)
    return PolaritySequence(subwindow_us=sub, runs=runs_from_classes(cls, t0, sub))


def signature_from_runs(runs) -> ClusterSignature:
    """Estimate a signature from alternating runs.

    Raises InsufficientTransitions unless both polarities have at least one
    interior (untruncated) run. When a polarity has a single onset, its
    period falls back to mean_on + mean_off.
    """
    m = len(runs)
    if m < 3:
        raise InsufficientTransitions(f"{m - 1 if m else 0} polarity changes")
    on_sum = on_n = off_sum = off_n = 0
    for pol, r0, r1 in runs[1:-1]:
        if pol == 1:
            on_sum += r1 - r0
            on_n += 1
        else:
            off_sum += r1 - r0
            off_n += 1
    if on_n == 0 or off_n == 0:
        raise InsufficientTransitions("one polarity has no interior run")
    mean_on = on_sum / on_n
    mean_off = off_sum / off_n
    period = mean_on + mean_off

    pos_prev = neg_prev = None
    pos_gap_sum = pos_gaps = neg_gap_sum = neg_gaps = 0
    for pol, r0, _ in runs[1:]:  # starts of runs after the first are real onsets
        if pol == 1:
            if pos_prev is not None:
                pos_gap_sum += r0 - pos_prev
                pos_gaps += 1
            pos_prev = r0
        else:
            if neg_prev is not None:
                neg_gap_sum += r0 - neg_prev
                neg_gaps += 1
            neg_prev = r0
    period_pos = pos_gap_sum / pos_gaps if pos_gaps else period
    period_neg = neg_gap_sum / neg_gaps if neg_gaps else period
    return ClusterSignature(
        mean_on_us=mean_on, mean_off_us=mean_off, period_us=period,
        period_pos_us=period_pos, period_neg_us=period_neg,
        sample_count=m - 1,
    )


def estimate_signature(seq: PolaritySequence) -> ClusterSignature:
    """Signature of a polarity sequence; see signature_from_runs."""
    return signature_from_runs(seq.runs)


def is_outlier(sig: ClusterSignature, led_table: list[LedConfig],
               rel_tol: float = 0.5) -> bool:
    """True when the signature deviates from every table entry by more than
    rel_tol in relative terms (worst of on-time, off-time, period)."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be > 0")
    if not led_table:
        raise EmptyLedTable("outlier test needs a non-empty LED table")
    best = min(
        max(
            abs(sig.mean_on_us - led.on_time_us) / led.on_time_us,
            abs(sig.mean_off_us - led.off_time_us) / led.off_time_us,
            abs(sig.period_us - led.period_us) / led.period_us,
        )
        for led in led_table
    )
    return best > rel_tol


# --------------------------------------------------------------------------
# batched helpers for the pipeline

def subwindow_count_matrix(events: EventArray, labels: np.ndarray,
                           n_clusters: int, t0: int, window_us: int,
                           subwindow_us: int):
    """Per-cluster (pos, neg) sub-window count matrices for a frame batch.

    ``labels`` maps each event to a cluster id (or -1); frames must start at
    t0 and window_us must be a multiple of subwindow_us.
    """
    spf = window_us // subwindow_us
    if spf * subwindow_us != window_us:
        raise ValueError("window_us must be a multiple of subwindow_us")
    m = labels >= 0
    if n_clusters == 0 or not m.any():
        z = np.zeros((n_clusters, spf), dtype=np.int64)
        return z, z.copy()
    sub = ((events.t[m] - t0) // subwindow_us) % spf
    code = labels[m] * spf + sub
    pol = events.p[m]
    size = n_clusters * spf
    pos = np.bincount(code[pol == 1], minlength=size).reshape(n_clusters, spf)
    neg = np.bincount(code[pol == 0], minlength=size).reshape(n_clusters, spf)
    return pos, neg


def runs_from_class_matrix(cls: np.ndarray, row_t0: np.ndarray,
                           subwindow_us: int):
    """Vectorized RLE of a (rows, n_sub) class matrix.

    Returns (row_offsets, classes, t_starts, t_ends): runs of row r live in
    slice row_offsets[r]:row_offsets[r+1], in time order.
    """
    n, m = cls.shape
    if n == 0:
        return np.zeros(1, np.int64), np.empty(0, np.int8), \
            np.empty(0, np.int64), np.empty(0, np.int64)
    diffs = cls[:, 1:] != cls[:, :-1]
    n_runs = 1 + diffs.sum(axis=1)
    off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(n_runs, out=off[1:])
    total = int(off[-1])

    start_sub = np.zeros(total, dtype=np.int64)
    rows, cols = np.nonzero(diffs)
    first = np.searchsorted(rows, rows, side="left")
    pos_in_row = np.arange(len(rows)) - first
    start_sub[off[rows] + 1 + pos_in_row] = cols + 1

    end_sub = np.empty(total, dtype=np.int64)
    end_sub[:-1] = start_sub[1:]
    end_sub[off[1:] - 1] = m

    run_row = np.repeat(np.arange(n), n_runs)
    classes = cls[run_row, start_sub]
    t_start = row_t0[run_row] + start_sub * subwindow_us
    t_end = row_t0[run_row] + end_sub * subwindow_us
    return off, classes, t_start, t_end
