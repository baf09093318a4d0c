"""Evaluation: precision/recall against ground truth, motion-timing
extraction, and the stage-ablation harness.

Precision is identity-aware: a prediction counts as a true positive only
when its own LED's visible ground truth lies within tolerance. Recall is
coverage-based: a visible ground-truth joint is recalled when any
prediction lands within tolerance, whatever its label says. Identity swaps
therefore crater precision while recall stays high, and missing detections
pull recall down; the two metrics separate the two failure modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLine, EmptyOverlap, NoCrossing
from .labels import LabelTable
from .leds import LedConfig
from .pipeline import PipelineConfig, annotate_stream, apply_ablation

US_PER_MS = 1_000

ABLATION_FLAGS = ("no_time_distance", "no_period_distance",
                  "no_outlier_filter", "no_tracking")


# --------------------------------------------------------------------------
# precise motion timing

@dataclass(frozen=True)
class LineSpec:
    """A crossing line for timing queries, tied to one joint."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    joint: str
    t_start_us: int = 0
    segment_bounded: bool = True

    def __post_init__(self):
        if self.p0 == self.p1:
            raise DegenerateLine("line endpoints coincide")


def detect_crossing(traj, line: LineSpec) -> float:
    """First time (us) the trajectory crosses the line after t_start.

    ``traj`` is (t_ms, x, y) arrays. A sample exactly on the line counts as
    the crossing; otherwise the crossing time interpolates the signed
    distance between the bracketing samples. With segment bounds on, a sign
    change whose crossing point falls outside the segment is skipped.
    """
    t_ms, xs, ys = (np.asarray(a, dtype=np.float64) for a in traj)
    if len(t_ms) == 0:
        raise NoCrossing("empty trajectory")
    t_us = t_ms * US_PER_MS
    keep = t_us >= line.t_start_us
    if not keep.any():
        raise NoCrossing(f"no samples after t_start={line.t_start_us}")
    t_us, xs, ys = t_us[keep], xs[keep], ys[keep]

    (x0, y0), (x1, y1) = line.p0, line.p1
    dx, dy = x1 - x0, y1 - y0
    seg2 = dx * dx + dy * dy
    # signed distance (unnormalized): cross product with the line direction
    s = (xs - x0) * dy - (ys - y0) * dx

    def in_segment(px, py) -> bool:
        if not line.segment_bounded:
            return True
        u = ((px - x0) * dx + (py - y0) * dy) / seg2
        return 0.0 <= u <= 1.0

    for i in range(len(s)):
        if s[i] == 0.0 and in_segment(xs[i], ys[i]):
            return float(t_us[i])
        if i + 1 < len(s) and s[i] * s[i + 1] < 0.0:
            theta = s[i] / (s[i] - s[i + 1])
            px = xs[i] + theta * (xs[i + 1] - xs[i])
            py = ys[i] + theta * (ys[i + 1] - ys[i])
            if in_segment(px, py):
                return float(t_us[i] + theta * (t_us[i + 1] - t_us[i]))
    raise NoCrossing(f"joint {line.joint!r} never crosses the line")


def timing_error(estimated_us: float, reference_us: float) -> float:
    """Absolute timing error in milliseconds."""
    return abs(estimated_us - reference_us) / US_PER_MS


def trajectory_from_labels(table: LabelTable, led_id: str):
    """(t_ms, x, y) samples of one LED from a label table."""
    li = table.led_ids.index(led_id)
    m = table.led_idx == li
    return table.t_ms[m], table.x[m], table.y[m]


def downsample_labels(table: LabelTable, rate_hz: float) -> LabelTable:
    """Keep one tick every 1000/rate_hz ms (low-frame-rate comparison)."""
    step = max(1, int(round(1000.0 / rate_hz)))
    m = table.t_ms % step == 0
    return LabelTable(
        led_ids=table.led_ids, t_ms=table.t_ms[m], led_idx=table.led_idx[m],
        x=table.x[m], y=table.y[m], source=table.source[m],
        n_ticks=table.n_ticks, led_table_hash=table.led_table_hash,
        config_hash=table.config_hash,
    )


# --------------------------------------------------------------------------
# precision / recall

@dataclass(frozen=True)
class PrReport:
    precision: float | None
    recall: float | None
    tp: int
    fp: int
    fn: int
    gt_covered: int
    tolerance_px: float
    per_led: dict = field(default_factory=dict)

    def row(self) -> str:
        p = "n/a" if self.precision is None else f"{self.precision:.4f}"
        r = "n/a" if self.recall is None else f"{self.recall:.4f}"
        return (f"precision {p}  recall {r}  tp {self.tp}  fp {self.fp}  "
                f"fn {self.fn}  tol {self.tolerance_px}px")


def precision_recall(pred: LabelTable, gt: LabelTable,
                     tol_px: float = 1.0) -> PrReport:
    """Compare predicted labels to ground truth at a pixel tolerance.

    Only the overlapping tick range is scored. Ground truth absent at a
    (tick, led) means the joint was invisible there; predictions at such
    ticks count against precision.
    """
    lo = 0
    hi = min(pred.n_ticks, gt.n_ticks)
    if hi <= lo:
        raise EmptyOverlap("prediction and ground-truth tick ranges are disjoint")

    names = tuple(dict.fromkeys(pred.led_ids + gt.led_ids))
    nidx = {lid: i for i, lid in enumerate(names)}
    L = len(names)

    def keyed(table: LabelTable):
        sel = (table.t_ms >= lo) & (table.t_ms < hi)
        li = np.array([nidx[table.led_ids[j]] for j in table.led_idx[sel]],
                      dtype=np.int64)
        key = table.t_ms[sel] * L + li
        order = np.argsort(key)
        return key[order], table.x[sel][order], table.y[sel][order], li[order]

    pk, px, py, pl = keyed(pred)
    gk, gx, gy, gl = keyed(gt)

    # identity-aware: prediction vs its own LED's ground truth
    pos = np.searchsorted(gk, pk)
    pos_c = np.clip(pos, 0, max(len(gk) - 1, 0))
    own = (len(gk) > 0) & (gk[pos_c] == pk) if len(gk) else np.zeros(len(pk), bool)
    dist_ok = np.zeros(len(pk), dtype=bool)
    if len(gk):
        d2 = (px - gx[pos_c]) ** 2 + (py - gy[pos_c]) ** 2
        dist_ok = own & (d2 <= tol_px * tol_px)
    tp = int(dist_ok.sum())
    fp = int(len(pk) - tp)

    # coverage: ground truth hit by any prediction at its tick
    covered = np.zeros(len(gk), dtype=bool)
    gpos = np.searchsorted(pk, gk)
    gpos_c = np.clip(gpos, 0, max(len(pk) - 1, 0))
    if len(pk):
        same = pk[gpos_c] == gk
        d2 = (gx - px[gpos_c]) ** 2 + (gy - py[gpos_c]) ** 2
        covered = same & (d2 <= tol_px * tol_px)
    rest = np.nonzero(~covered)[0]
    if len(rest) and len(pk):
        pt = pk // L
        gt_tick = gk[rest] // L
        t_lo = np.searchsorted(pt, gt_tick, side="left")
        t_hi = np.searchsorted(pt, gt_tick, side="right")
        for r, a, b in zip(rest, t_lo, t_hi):
            if a == b:
                continue
            d2 = (px[a:b] - gx[r]) ** 2 + (py[a:b] - gy[r]) ** 2
            if (d2 <= tol_px * tol_px).any():
                covered[r] = True
    n_cov = int(covered.sum())
    fn = int(len(gk) - n_cov)

    per_led = {}
    for lid in names:
        i = nidx[lid]
        pm = pl == i
        gm = gl == i
        ltp = int(dist_ok[pm].sum())
        lfp = int(pm.sum() - ltp)
        lcov = int(covered[gm].sum())
        lfn = int(gm.sum() - lcov)
        per_led[lid] = {
            "tp": ltp, "fp": lfp, "fn": lfn, "covered": lcov,
            "precision": ltp / (ltp + lfp) if ltp + lfp else None,
            "recall": lcov / (lcov + lfn) if lcov + lfn else None,
        }

    return PrReport(
        precision=tp / (tp + fp) if tp + fp else None,
        recall=n_cov / (n_cov + fn) if n_cov + fn else None,
        tp=tp, fp=fp, fn=fn, gt_covered=n_cov,
        tolerance_px=tol_px, per_led=per_led,
    )


# --------------------------------------------------------------------------
# ablation harness

def ablation_run(stream, gt: LabelTable, led_table: list[LedConfig],
                 flags=ABLATION_FLAGS,
                 config: PipelineConfig = PipelineConfig(),
                 tol_px: float = 1.0) -> dict[str, PrReport]:
    """Score the complete pipeline and each requested single-stage ablation."""
    reports = {}
    result = annotate_stream(stream, led_table, config)
    reports["complete"] = precision_recall(result.labels, gt, tol_px)
    for flag in flags:
        if flag not in ABLATION_FLAGS:
            raise ValueError(f"unknown ablation flag {flag!r}")
        cfg = apply_ablation(config, **{flag: True})
        res = annotate_stream(stream, led_table, cfg)
        reports[flag] = precision_recall(res.labels, gt, tol_px)
    return reports


def report_table(reports: dict[str, PrReport]) -> str:
    """Fixed-width text table over ablation rows."""
    lines = [f"{'configuration':<22} {'precision':>9} {'recall':>9} "
             f"{'tp':>8} {'fp':>8} {'fn':>8}"]
    for name, rep in reports.items():
        p = "n/a" if rep.precision is None else f"{rep.precision:.4f}"
        r = "n/a" if rep.recall is None else f"{rep.recall:.4f}"
        lines.append(f"{name:<22} {p:>9} {r:>9} {rep.tp:>8} {rep.fp:>8} {rep.fn:>8}")
    return "\n".join(lines)


def report_records(reports: dict[str, PrReport]) -> dict:
    """Machine-readable form of a report set."""
    return {
        name: {
            "precision": rep.precision, "recall": rep.recall,
            "tp": rep.tp, "fp": rep.fp, "fn": rep.fn,
            "gt_covered": rep.gt_covered, "tolerance_px": rep.tolerance_px,
            "per_led": rep.per_led,
        }
        for name, rep in reports.items()
    }
