"""End-to-end annotation: event stream + LED table -> millisecond labels.

Per frame the pipeline clusters events, decodes each cluster's blink
signature, rejects outliers, gates candidate pairs spatially around track
predictions, solves the optimal assignment, and updates tracks. Matched
LEDs emit a label at the cluster centroid.

Single-frame signatures are noisy (a 1 ms frame holds only a few blink
cycles), so clusters are linked into chains by spatial continuity across
consecutive frames and signature statistics accumulate over a sliding
window along each chain. Chains are independent of LED identity; they are
what bootstraps matching in the first frames and after reacquisition.

For throughput, clustering, polarity classification, signature statistics,
outlier flags, and the full cost matrix are computed in vectorized passes
over chunks of frames; only gating, assignment, and track updates run in
the sequential per-frame loop.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .cluster import cluster_events
from .errors import BothWeightsZero
from .events import EventStream, frame_index
from .labels import LabelTable
from .leds import LedConfig, led_table_hash
from .matching import Assignment, CostMatrix, Tracker, assign, gate_costs
from .signature import smooth_classes, subwindow_count_matrix

US_PER_MS = 1_000


@dataclass(frozen=True)
class PipelineConfig:
    """Every tuning knob of the annotation pipeline."""

    frame_us: int = 1_000
    subwindow_us: int = 25
    smooth_kernel: int = 3
    eps_px: float = 3.0
    min_pts: int = 5
    alpha: float = 1.0
    beta: float = 0.5
    d_max: float = 200.0
    rel_tol: float = 0.5
    spatial_gate_px: float = 50.0
    chain_gate_px: float = 15.0
    coast_limit_ms: int = 100
    history_ms: int = 10
    min_transitions: int = 3
    velocity_smoothing: float = 0.5
    emit_coasted: bool = False
    outlier_filter: bool = True
    tracking: bool = True
    chunk_frames: int = 512

    def __post_init__(self):
        if self.alpha == 0 and self.beta == 0:
            raise BothWeightsZero("alpha and beta cannot both be zero")
        if self.frame_us % self.subwindow_us != 0:
            raise ValueError("frame_us must be a multiple of subwindow_us")

    def config_hash(self) -> str:
        canon = yaml.safe_dump(asdict(self), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def to_yaml(self, path=None) -> str:
        text = yaml.safe_dump(asdict(self), sort_keys=False)
        if path is not None:
            Path(path).write_text(text)
        return text


def load_config(path) -> PipelineConfig:
    data = yaml.safe_load(Path(path).read_text()) or {}
    return PipelineConfig(**data)


def apply_ablation(config: PipelineConfig, no_time_distance: bool = False,
                   no_period_distance: bool = False,
                   no_outlier_filter: bool = False,
                   no_tracking: bool = False) -> PipelineConfig:
    """Switch off pipeline stages for ablation runs."""
    out = config
    if no_time_distance:
        out = replace(out, alpha=0.0)
    if no_period_distance:
        out = replace(out, beta=0.0)
    if no_outlier_filter:
        out = replace(out, outlier_filter=False)
    if no_tracking:
        out = replace(out, tracking=False)
    return out


@dataclass
class Diagnostics:
    frames: int = 0
    events: int = 0
    clusters: int = 0
    insufficient_signature: int = 0
    outliers_dropped: int = 0
    matched: int = 0
    coasted: int = 0
    unmatched_clusters: int = 0

    def as_dict(self) -> dict:
        return dict(vars(self))


@dataclass
class AnnotationResult:
    labels: LabelTable
    diagnostics: Diagnostics
    tracker: Tracker | None = None
    frame_records: dict | None = None  # per-cluster index (collect_clusters)

    def to_frames(self) -> list[LabelFrame]:
        return self.labels.to_frames()


# --------------------------------------------------------------------------
# chain bookkeeping

@dataclass
class _ChainCarry:
    """State of one live chain at a chunk boundary."""

    chain_id: int
    centroid: tuple[float, float]
    seed_class: int  # last filled sub-window class, seeds the next fill
    runs: tuple  # (cls, t0, t1) arrays of the trailing history window


def _link_frames(prev_cent: np.ndarray, cur_cent: np.ndarray,
                 gate_px: float) -> np.ndarray:
    """Greedy nearest pairing of clusters across consecutive frames.

    Returns, for each current cluster, the index of its predecessor in the
    previous frame (-1 when none within the gate). Deterministic: candidate
    pairs are taken in (distance, prev, cur) order.
    """
    m_prev, m_cur = len(prev_cent), len(cur_cent)
    out = np.full(m_cur, -1, dtype=np.int64)
    if m_prev == 0 or m_cur == 0:
        return out
    dx = cur_cent[:, 0][:, None] - prev_cent[:, 0][None, :]
    dy = cur_cent[:, 1][:, None] - prev_cent[:, 1][None, :]
    d2 = dx * dx + dy * dy
    cur_i, prev_i = np.nonzero(d2 <= gate_px * gate_px)
    if len(cur_i) == 0:
        return out
    order = np.lexsort((cur_i, prev_i, d2[cur_i, prev_i]))
    used_prev = np.zeros(m_prev, dtype=bool)
    used_cur = np.zeros(m_cur, dtype=bool)
    for k in order:
        p, c = prev_i[k], cur_i[k]
        if not used_prev[p] and not used_cur[c]:
            used_prev[p] = True
            used_cur[c] = True
            out[c] = p
    return out


def _fill_classes_1d(raw: np.ndarray, seed: int) -> np.ndarray:
    """Forward-fill ties/empties with the previous class, seeded."""
    idx = np.arange(len(raw))
    last = np.where(raw != 0, idx, -1)
    np.maximum.accumulate(last, out=last)
    filled = np.where(last >= 0, raw[np.clip(last, 0, None)], np.int8(seed))
    return filled.astype(np.int8)


def _rle_1d(cls: np.ndarray):
    change = np.nonzero(np.diff(cls))[0]
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [len(cls)]))
    return cls[starts], starts, ends


# --------------------------------------------------------------------------
# the pipeline

def annotate_stream(stream: EventStream, led_table: list[LedConfig],
                    config: PipelineConfig = PipelineConfig(),
                    collect_clusters: bool = False) -> AnnotationResult:
    """Run the full pipeline over a stream; never aborts on empty frames.

    With ``collect_clusters`` the result carries flattened per-cluster
    records (the review-session index); costs one extra copy per chunk.
    """
    if not led_table:
        raise ValueError("LED table must be non-empty")
    header, events = stream.header, stream.events
    w_us = config.frame_us
    offsets = frame_index(events, w_us, header.t_start, header.t_end)
    n_frames = len(offsets) - 1
    n_ticks = max(1, -(-(n_frames * w_us) // US_PER_MS))
    spf = w_us // config.subwindow_us

    diag = Diagnostics(frames=n_frames, events=len(events))
    tracker = Tracker(led_table, coast_limit_us=config.coast_limit_ms * US_PER_MS,
                      velocity_smoothing=config.velocity_smoothing,
                      history_us=config.history_ms * US_PER_MS)
    led_on = np.array([led.on_time_us for led in led_table], dtype=np.float64)
    led_off = np.array([led.off_time_us for led in led_table], dtype=np.float64)
    led_t = led_on + led_off

    rows: list[tuple[int, int, float, float, int]] = []
    carry: dict[int, _ChainCarry] = {}
    prev_cent = np.empty((0, 2))
    prev_chain = np.empty(0, dtype=np.int64)
    next_chain_id = 0
    history_us = config.history_ms * US_PER_MS
    collected: list[dict] | None = [] if collect_clusters else None

    for c0 in range(0, n_frames, config.chunk_frames):
        c1 = min(c0 + config.chunk_frames, n_frames)
        lo, hi = int(offsets[c0]), int(offsets[c1])
        t0_chunk = header.t_start + c0 * w_us
        ev = events.slice(lo, hi)
        fids = (ev.t - t0_chunk) // w_us
        batch = cluster_events(ev, fids, c1 - c0, header.sensor_width,
                               header.sensor_height, config.eps_px, config.min_pts)
        k_clusters = len(batch)
        diag.clusters += k_clusters

        pos, neg = subwindow_count_matrix(ev, batch.event_label, k_clusters,
                                          t0_chunk, w_us, config.subwindow_us)

        cents = np.column_stack((batch.centroid_x, batch.centroid_y))

        # chain linking across frames (and across the chunk boundary)
        chain_of = np.full(k_clusters, -1, dtype=np.int64)
        for k in range(c1 - c0):
            a, b = int(batch.frame_starts[k]), int(batch.frame_starts[k + 1])
            cent = cents[a:b]
            pred = _link_frames(prev_cent, cent, config.chain_gate_px) \
                if config.tracking else np.full(b - a, -1, np.int64)
            for j in range(b - a):
                if pred[j] >= 0:
                    chain_of[a + j] = prev_chain[pred[j]]
                else:
                    chain_of[a + j] = next_chain_id
                    next_chain_id += 1
            prev_cent = cent
            prev_chain = chain_of[a:b]

        # per-chain classification with cross-frame carry, then run stats
        chunk_end_us = t0_chunk + (c1 - c0) * w_us
        sig_arrays, run_data = _chain_signatures(
            batch, pos, neg, chain_of, carry, t0_chunk, chunk_end_us, w_us,
            config, history_us)
        s_on, s_off, s_tp, s_tn, s_valid, s_count = sig_arrays

        usable = s_valid & (s_count >= config.min_transitions)
        diag.insufficient_signature += int(k_clusters - usable.sum())
        outlier = np.zeros(k_clusters, dtype=bool)
        if config.outlier_filter and usable.any():
            rel = np.full(k_clusters, np.inf)
            u = usable
            dev = np.maximum.reduce([
                np.abs(s_on[u][:, None] - led_on[None, :]) / led_on[None, :],
                np.abs(s_off[u][:, None] - led_off[None, :]) / led_off[None, :],
                np.abs((s_on + s_off)[u][:, None] - led_t[None, :]) / led_t[None, :],
            ]).min(axis=1)
            rel[u] = dev
            outlier = usable & (rel > config.rel_tol)
            diag.outliers_dropped += int(outlier.sum())
            usable = usable & ~outlier

        # chunk-wide cost matrix (inadmissible rows stay +inf)
        n_leds = len(led_table)
        costs_chunk = np.full((k_clusters, n_leds), np.inf)
        if usable.any():
            d_t = np.abs(s_on[usable][:, None] - led_on[None, :]) \
                + np.abs(s_off[usable][:, None] - led_off[None, :])
            d_p = np.abs(s_tn[usable][:, None] - led_t[None, :]) \
                + np.abs(s_tp[usable][:, None] - led_t[None, :])
            costs_chunk[usable] = config.alpha * d_t + config.beta * d_p

        # chunk-wide argmin and runner-up, for the per-frame dominant path
        if k_clusters and n_leds:
            arg_best = np.argmin(costs_chunk, axis=1)
            best_cost = costs_chunk[np.arange(k_clusters), arg_best]
            if n_leds > 1:
                second_cost = np.partition(costs_chunk, 1, axis=1)[:, 1]
            else:
                second_cost = np.full(k_clusters, np.inf)
        else:
            arg_best = np.zeros(k_clusters, dtype=np.int64)
            best_cost = np.full(k_clusters, np.inf)
            second_cost = best_cost

        if collected is not None:
            rec = {
                "tick": ((c0 + batch.frame_of) * w_us) // US_PER_MS,
                "cx": batch.centroid_x.astype(np.float32),
                "cy": batch.centroid_y.astype(np.float32),
                "bbox": batch.bbox.astype(np.int16),
                "size": batch.size.astype(np.int32),
                "sig_on": s_on.astype(np.float32),
                "sig_off": s_off.astype(np.float32),
                "sig_tp": s_tp.astype(np.float32),
                "sig_tn": s_tn.astype(np.float32),
                "sig_valid": s_valid & (s_count >= config.min_transitions),
                "outlier": outlier,
                "matched_led": np.full(k_clusters, -1, dtype=np.int16),
                "cost": np.full(k_clusters, np.nan, dtype=np.float32),
            }
            collected.append(rec)

        # sequential matching loop
        fs_list = batch.frame_starts.tolist()
        for k in range(c1 - c0):
            a, b = fs_list[k], fs_list[k + 1]
            now = t0_chunk + k * w_us
            tick = (now - header.t_start) // US_PER_MS
            m = b - a
            if m == 0:
                if config.tracking:
                    tracker.update(Assignment((), (), ()), (), now)
                    if config.emit_coasted:
                        _emit_coasted(tracker, rows, tick, header, led_table)
                continue
            cx_l = batch.centroid_x[a:b].tolist()
            cy_l = batch.centroid_y[a:b].tolist()
            asg = _dominant_frame_assignment(
                arg_best[a:b], best_cost[a:b], second_cost[a:b], cx_l, cy_l,
                tracker if config.tracking else None, now, n_leds, config)
            if asg is None:
                cm = CostMatrix(costs_chunk[a:b], d_max=config.d_max)
                if config.tracking:
                    cm = gate_costs(cm, tracker, cents[a:b],
                                    config.spatial_gate_px, now)
                asg = assign(cm)
            diag.matched += len(asg.pairs)
            diag.unmatched_clusters += len(asg.unmatched_clusters)
            for ci, li, cost_v in asg.pairs:
                rows.append((tick, li, cx_l[ci], cy_l[ci], 0))
                if collected is not None:
                    rec["matched_led"][a + ci] = li
                    rec["cost"][a + ci] = cost_v
            if config.tracking:
                runs_for = _frame_run_slices(asg, a, now, w_us, run_data)
                tracker.update_fast(asg, cx_l, cy_l, now, runs_for)
                if config.emit_coasted:
                    _emit_coasted(tracker, rows, tick, header, led_table)

    table = _rows_to_table(rows, led_table, n_ticks, config)
    diag.coasted = sum(1 for r in rows if r[4] == 2)
    records = _assemble_records(collected, n_ticks) if collected is not None else None
    return AnnotationResult(labels=table, diagnostics=diag, tracker=tracker,
                            frame_records=records)


def _assemble_records(collected: list[dict], n_ticks: int) -> dict:
    keys = ("cx", "cy", "bbox", "size", "sig_on", "sig_off", "sig_tp",
            "sig_tn", "sig_valid", "outlier", "matched_led", "cost")
    if collected:
        tick = np.concatenate([r["tick"] for r in collected])
        out = {k: np.concatenate([r[k] for r in collected]) for k in keys}
    else:
        tick = np.empty(0, np.int64)
        out = {k: np.empty(0) for k in keys}
    out["tick_starts"] = np.searchsorted(tick, np.arange(n_ticks + 1))
    return out


def _dominant_frame_assignment(arg_j, best, second, cx_l, cy_l, tracker,
                               now, n_leds, config):
    """Solver-free assignment when the frame is unambiguous.

    Sound when every matchable cluster's best LED is strictly unique, the
    argmins are pairwise distinct, and each winning pair passes the spatial
    gate: gating only removes columns, so the ungated argmin stays optimal
    and the ungated runner-up only underestimates the true margin. Returns
    None when any condition fails and the full gated solve must run.
    """
    fin = np.isfinite(best) & (best <= config.d_max)
    idx = np.nonzero(fin)[0]
    if len(idx) == 0:
        return Assignment((), tuple(range(len(arg_j))), tuple(range(n_leds)))
    cols = arg_j[idx]
    used = np.zeros(n_leds, dtype=bool)
    used[cols] = True
    if int(used.sum()) != len(cols):
        return None
    bb = best[idx]
    tol = 1e-9 * max(1.0, float(bb.sum()))
    if not (second[idx] - bb > tol).all():
        return None
    idx_l = idx.tolist()
    col_l = cols.tolist()
    if tracker is not None:
        g2 = config.spatial_gate_px * config.spatial_gate_px
        if not tracker.within_gate(idx_l, col_l, cx_l, cy_l, now, g2):
            return None
    pairs = tuple(zip(idx_l, col_l, bb.tolist()))
    return Assignment(
        pairs=pairs,
        unmatched_clusters=tuple(np.nonzero(~fin)[0].tolist()),
        unmatched_leds=tuple(np.nonzero(~used)[0].tolist()),
    )


def _emit_coasted(tracker: Tracker, rows, tick: int, header, led_table) -> None:
    from .matching import TrackStatus
    for j, tr in enumerate(tracker.tracks):
        if tr.status is TrackStatus.COASTING and tr.position is not None:
            x, y = tr.position
            if 0 <= x <= header.sensor_width - 1 and 0 <= y <= header.sensor_height - 1:
                rows.append((tick, j, float(x), float(y), 2))


def _frame_run_slices(asg: Assignment, base: int, now: int, w_us: int,
                      run_data):
    """Per matched cluster: a lazy view of its chain runs in this frame.

    Segments are (cls, t0, t1, clip_lo, clip_hi) array slices; the tracker
    materializes run tuples only when a history is actually read.
    """
    chain_arrays, chain_ref, r0s, bs = run_data
    out: dict[int, tuple] = {}
    fe = now + w_us
    for ci, _li, _c in asg.pairs:
        gi = base + ci
        out[ci] = (chain_arrays[int(chain_ref[gi])], int(r0s[gi]),
                   int(bs[gi]) + 1, now, fe)
    return out


def _rows_to_table(rows, led_table, n_ticks, config) -> LabelTable:
    led_ids = tuple(led.id for led in led_table)
    t = np.array([r[0] for r in rows], dtype=np.int64)
    li = np.array([r[1] for r in rows], dtype=np.int64)
    return LabelTable(
        led_ids=led_ids, t_ms=t, led_idx=li,
        x=np.array([r[2] for r in rows], dtype=np.float64),
        y=np.array([r[3] for r in rows], dtype=np.float64),
        source=np.array([r[4] for r in rows], dtype=np.int8),
        n_ticks=n_ticks,
        led_table_hash=led_table_hash(led_table),
        config_hash=config.config_hash(),
    ).sort()


# --------------------------------------------------------------------------
# chain signature statistics

def _chain_signatures(batch, pos, neg, chain_of, carry, t0_chunk, chunk_end_us,
                      w_us, config, history_us):
    """Signature statistics for every cluster of a chunk.

    Concatenates each chain's sub-window counts, classifies with carry,
    smooths, run-length encodes once per chain, and answers every member
    cluster's trailing-window query from cumulative sums. Returns the
    per-cluster signature arrays plus per-cluster run slices, and replaces
    ``carry`` content with the chunk-final chain state.
    """
    k_clusters = len(batch)
    s_on = np.zeros(k_clusters)
    s_off = np.zeros(k_clusters)
    s_tp = np.zeros(k_clusters)
    s_tn = np.zeros(k_clusters)
    s_valid = np.zeros(k_clusters, dtype=bool)
    s_count = np.zeros(k_clusters, dtype=np.int64)

    chain_arrays: list[tuple] = []
    chain_ref = np.zeros(k_clusters, dtype=np.int64)
    r0_arr = np.zeros(k_clusters, dtype=np.int64)
    b_arr = np.zeros(k_clusters, dtype=np.int64)

    new_carry: dict[int, _ChainCarry] = {}
    last_frame_members: dict[int, tuple] = {}

    if k_clusters:
        order = np.argsort(chain_of, kind="stable")
        bounds = np.nonzero(np.diff(chain_of[order]))[0] + 1
        groups = np.split(order, bounds)
    else:
        groups = []

    for members in groups:
        cid = int(chain_of[members[0]])
        frames = batch.frame_of[members]
        frame_ends = t0_chunk + (frames + 1) * w_us

        raw = np.sign(pos[members].astype(np.int64)
                      - neg[members].astype(np.int64)).astype(np.int8).ravel()
        prev = carry.get(cid)
        seed = prev.seed_class if prev is not None else -1
        cls = _fill_classes_1d(raw, seed)
        cls = smooth_classes(cls, config.smooth_kernel)
        seg_t0 = t0_chunk + int(frames[0]) * w_us
        r_cls, r_starts, r_ends = _rle_1d(cls)
        r_t0 = seg_t0 + r_starts.astype(np.int64) * config.subwindow_us
        r_t1 = seg_t0 + r_ends.astype(np.int64) * config.subwindow_us

        if prev is not None and len(prev.runs[0]):
            p_cls, p_t0, p_t1 = prev.runs
            if len(r_cls) and p_cls[-1] == r_cls[0] and p_t1[-1] == r_t0[0]:
                r_t0 = np.concatenate((p_t0, r_t0[1:]))
                r_t1 = np.concatenate((p_t1[:-1], r_t1))
                r_cls = np.concatenate((p_cls, r_cls[1:]))
            else:
                r_t0 = np.concatenate((p_t0, r_t0))
                r_t1 = np.concatenate((p_t1, r_t1))
                r_cls = np.concatenate((p_cls, r_cls))

        stats = _window_stats(r_cls, r_t0, r_t1, frame_ends, history_us)
        (s_on[members], s_off[members], s_tp[members], s_tn[members],
         s_valid[members], s_count[members], win_a, win_b) = stats

        # per-cluster run views: window tail runs inside the member's frame
        r0_all = np.searchsorted(r_t1, frame_ends - w_us, side="right")
        chain_ref[members] = len(chain_arrays)
        chain_arrays.append((r_cls, r_t0, r_t1))
        r0_arr[members] = np.maximum(r0_all, win_a)
        b_arr[members] = win_b

        last_member = members[-1]
        last_fe = int(frame_ends[-1])
        last_frame_members[cid] = (int(last_member), last_fe, r_cls, r_t0, r_t1,
                                   int(cls[-1]))

    # carry chains that reach the final frame of the chunk into the next one
    for cid, (m_idx, last_fe, r_cls, r_t0, r_t1, seed) in last_frame_members.items():
        if last_fe == chunk_end_us:
            keep = r_t1 > last_fe - history_us
            new_carry[cid] = _ChainCarry(
                chain_id=cid,
                centroid=(float(batch.centroid_x[m_idx]),
                          float(batch.centroid_y[m_idx])),
                seed_class=seed,
                runs=(r_cls[keep], r_t0[keep], r_t1[keep]),
            )
    carry.clear()
    carry.update(new_carry)

    return (s_on, s_off, s_tp, s_tn, s_valid, s_count), \
        (chain_arrays, chain_ref, r0_arr, b_arr)


def _window_stats(r_cls, r_t0, r_t1, frame_ends, history_us):
    """Trailing-window signature stats for one chain, vectorized over queries.

    For each query frame end ``fe`` the window spans runs overlapping
    (fe - history, fe]; the first and last window runs are treated as
    truncated, matching the standalone estimator.
    """
    L = len(r_cls)
    q = len(frame_ends)
    length = (r_t1 - r_t0).astype(np.float64)
    is_pos = r_cls > 0
    c_on_len = np.zeros(L + 1)
    c_on_cnt = np.zeros(L + 1)
    c_off_len = np.zeros(L + 1)
    c_off_cnt = np.zeros(L + 1)
    np.cumsum(np.where(is_pos, length, 0.0), out=c_on_len[1:])
    np.cumsum(is_pos.astype(np.float64), out=c_on_cnt[1:])
    np.cumsum(np.where(is_pos, 0.0, length), out=c_off_len[1:])
    np.cumsum((~is_pos).astype(np.float64), out=c_off_cnt[1:])

    idx = np.arange(L)
    gap = np.zeros(L)
    if L > 2:
        gap[2:] = (r_t0[2:] - r_t0[:-2]).astype(np.float64)
    gp = np.zeros(L + 1)
    gn = np.zeros(L + 1)
    gpc = np.zeros(L + 1)
    gnc = np.zeros(L + 1)
    valid_gap = idx >= 2
    np.cumsum(np.where(valid_gap & is_pos, gap, 0.0), out=gp[1:])
    np.cumsum((valid_gap & is_pos).astype(np.float64), out=gpc[1:])
    np.cumsum(np.where(valid_gap & ~is_pos, gap, 0.0), out=gn[1:])
    np.cumsum((valid_gap & ~is_pos).astype(np.float64), out=gnc[1:])

    fe = np.asarray(frame_ends, dtype=np.int64)
    b = np.searchsorted(r_t0, fe, side="left") - 1
    a = np.searchsorted(r_t1, fe - history_us, side="right")
    b = np.clip(b, 0, L - 1)
    a = np.minimum(a, b)

    on_n = c_on_cnt[b] - c_on_cnt[a + 1]
    off_n = c_off_cnt[b] - c_off_cnt[a + 1]
    on_sum = c_on_len[b] - c_on_len[a + 1]
    off_sum = c_off_len[b] - c_off_len[a + 1]
    valid = (b - a + 1 >= 3) & (on_n >= 1) & (off_n >= 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_on = np.where(on_n > 0, on_sum / np.maximum(on_n, 1), 0.0)
        mean_off = np.where(off_n > 0, off_sum / np.maximum(off_n, 1), 0.0)
        lo = np.minimum(a + 3, b + 1)
        pg_n = gpc[b + 1] - gpc[lo]
        ng_n = gnc[b + 1] - gnc[lo]
        pg = np.where(pg_n > 0, (gp[b + 1] - gp[lo]) / np.maximum(pg_n, 1),
                      mean_on + mean_off)
        ng = np.where(ng_n > 0, (gn[b + 1] - gn[lo]) / np.maximum(ng_n, 1),
                      mean_on + mean_off)
    count = (b - a).astype(np.int64)  # transitions in the window
    return mean_on, mean_off, pg, ng, valid, count, a, b
