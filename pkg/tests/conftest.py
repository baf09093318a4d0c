"""Shared test helpers: independent reference implementations.

These deliberately avoid the library's vectorized code paths: the naive
DBSCAN is the textbook O(n^2) algorithm, the assignment oracle enumerates
every partial matching, and the reference pipeline walks frames with plain
Python loops and the public single-frame operations.
"""

from __future__ import annotations

import numpy as np
import pytest

from blinklabel.events import EventArray, frame_index
from blinklabel.labels import LabelTable
from blinklabel.matching import CostMatrix, Tracker, assign, gate_costs
from blinklabel.signature import (InsufficientTransitions, signature_from_runs,
                                  is_outlier, classify_subwindows,
                                  smooth_classes, runs_from_classes)
from blinklabel.leds import led_table_hash


# --------------------------------------------------------------------------
# naive DBSCAN (textbook, O(n^2))

def naive_dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Classic DBSCAN over 2-D points; returns labels (-1 noise).

    Component ids are arbitrary; compare results as partitions.
    """
    n = len(points)
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    nbrs = [np.nonzero(d2[i] <= eps * eps)[0] for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in nbrs])
    labels = np.full(n, -1, dtype=int)
    cur = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = cur
        stack = list(nbrs[i])
        while stack:
            q = stack.pop()
            if labels[q] == -1:
                labels[q] = cur
                if core[q]:
                    stack.extend(nbrs[q])
        cur += 1
    return labels


def partition_sets(labels) -> tuple[frozenset, set]:
    """(set of clusters as frozensets of indices, noise indices)."""
    groups: dict[int, set] = {}
    noise = set()
    for i, lab in enumerate(labels):
        if lab < 0:
            noise.add(i)
        else:
            groups.setdefault(int(lab), set()).add(i)
    return frozenset(frozenset(g) for g in groups.values()), noise


# --------------------------------------------------------------------------
# brute-force assignment oracle

def brute_force_assign(costs: np.ndarray, d_max: float):
    """Best partial injective matching by exhaustive enumeration.

    Ranking: max cardinality, then min total cost (1e-9 relative tolerance),
    then lexicographically smallest pair sequence. Returns a pair list
    [(row, col), ...] sorted by row.
    """
    costs = np.asarray(costs, dtype=float)
    m, n = costs.shape
    admissible = [
        [j for j in range(n) if np.isfinite(costs[i, j]) and costs[i, j] <= d_max]
        for i in range(m)
    ]
    best: list[tuple[int, float, tuple]] = []  # (card, cost, pairs)

    def rec(i, used, pairs, cost):
        if i == m:
            best.append((len(pairs), cost, tuple(pairs)))
            return
        rec(i + 1, used, pairs, cost)  # row unmatched
        for j in admissible[i]:
            if not used & (1 << j):
                pairs.append((i, j))
                rec(i + 1, used | (1 << j), pairs, cost + costs[i, j])
                pairs.pop()

    rec(0, 0, [], 0.0)
    max_card = max(b[0] for b in best)
    cands = [b for b in best if b[0] == max_card]
    min_cost = min(b[1] for b in cands)
    tol = 1e-9 * max(1.0, abs(min_cost))
    cands = [b for b in cands if b[1] <= min_cost + tol]
    return sorted(min(b[2] for b in cands))


# --------------------------------------------------------------------------
# reference pipeline (plain loops + public single-frame ops)

def reference_annotate(stream, led_table, config) -> LabelTable:
    """Frame-by-frame pipeline using naive loops; mirrors chain semantics.

    Only valid for streams that fit one chunk (chunked smoothing context is
    a documented boundary effect), so pass config.chunk_frames >= n_frames.
    """
    from blinklabel.cluster import dbscan
    from blinklabel.events import EventFrame

    header, events = stream.header, stream.events
    w = config.frame_us
    offsets = frame_index(events, w, header.t_start, header.t_end)
    n_frames = len(offsets) - 1
    assert config.chunk_frames >= n_frames, "reference expects a single chunk"
    spf = w // config.subwindow_us

    # pass 1: cluster every frame, link chains by nearest centroid
    frames_clusters = []
    for k in range(n_frames):
        lo, hi = int(offsets[k]), int(offsets[k + 1])
        frame = EventFrame(header.t_start + k * w, header.t_start + (k + 1) * w,
                           events.slice(lo, hi))
        frames_clusters.append(dbscan(frame, config.eps_px, config.min_pts,
                                      header.sensor_width, header.sensor_height))

    chain_of = []  # per frame: list of chain ids
    chains_members = {}  # chain id -> list of (frame, cluster)
    next_chain = 0
    prev = []
    prev_ids = []
    for k, clusters in enumerate(frames_clusters):
        ids = []
        cand = []
        for j, c in enumerate(clusters):
            for q, pc in enumerate(prev):
                d2 = (c.centroid[0] - pc.centroid[0]) ** 2 \
                    + (c.centroid[1] - pc.centroid[1]) ** 2
                if d2 <= config.chain_gate_px ** 2:
                    cand.append((d2, q, j))
        cand.sort()
        link = {}
        used_q = set()
        for d2, q, j in cand:
            if q not in used_q and j not in link and config.tracking:
                link[j] = q
                used_q.add(q)
        for j, c in enumerate(clusters):
            if j in link:
                cid = prev_ids[link[j]]
            else:
                cid = next_chain
                next_chain += 1
            ids.append(cid)
            chains_members.setdefault(cid, []).append((k, j))
        chain_of.append(ids)
        prev = clusters
        prev_ids = ids

    # pass 2: per chain, concatenate sub-window counts, classify, smooth, RLE
    chain_runs = {}
    for cid, members in chains_members.items():
        pos = []
        neg = []
        for k, j in members:
            c = frames_clusters[k][j]
            p = np.zeros(spf, dtype=int)
            q = np.zeros(spf, dtype=int)
            t0 = header.t_start + k * w
            for i in range(len(c.events)):
                sub = (int(c.events.t[i]) - t0) // config.subwindow_us
                if c.events.p[i] == 1:
                    p[sub] += 1
                else:
                    q[sub] += 1
            pos.append(p)
            neg.append(q)
        cls = classify_subwindows(np.concatenate(pos), np.concatenate(neg))
        cls = smooth_classes(cls, config.smooth_kernel)
        seg_t0 = header.t_start + members[0][0] * w
        chain_runs[cid] = runs_from_classes(cls, seg_t0, config.subwindow_us)

    # pass 3: per frame, window signatures, filter, gate, assign, track
    tracker = Tracker(led_table, coast_limit_us=config.coast_limit_ms * 1000,
                      velocity_smoothing=config.velocity_smoothing,
                      history_us=config.history_ms * 1000)
    rows = []
    hist_us = config.history_ms * 1000
    for k, clusters in enumerate(frames_clusters):
        now = header.t_start + k * w
        fe = now + w
        sigs = []
        for j, c in enumerate(clusters):
            runs = chain_runs[chain_of[k][j]]
            win = [r for r in runs if r[1] < fe and r[2] > fe - hist_us]
            # clip the trailing straddler the way a live view would
            win = [(p, a, min(b, fe)) for p, a, b in win if a < fe]
            try:
                sig = signature_from_runs(win)
            except InsufficientTransitions:
                sig = None
            if sig is not None and sig.sample_count < config.min_transitions:
                sig = None
            if sig is not None and config.outlier_filter and \
                    is_outlier(sig, led_table, config.rel_tol):
                sig = None
            sigs.append(sig)
        from blinklabel.matching import build_cost_matrix
        cm = build_cost_matrix(sigs, led_table, config.alpha, config.beta,
                               config.d_max)
        cents = [c.centroid for c in clusters]
        if config.tracking and clusters:
            cm = gate_costs(cm, tracker, cents, config.spatial_gate_px, now)
        asg = assign(cm)
        for ci, li, _cost in asg.pairs:
            rows.append((k, li, cents[ci][0], cents[ci][1], 0))
        if config.tracking:
            tracker.update(asg, cents, now)

    led_ids = tuple(led.id for led in led_table)
    n_ticks = max(1, -(-(n_frames * w) // 1000))
    return LabelTable(
        led_ids=led_ids,
        t_ms=np.array([r[0] for r in rows], dtype=np.int64),
        led_idx=np.array([r[1] for r in rows], dtype=np.int64),
        x=np.array([r[2] for r in rows], dtype=np.float64),
        y=np.array([r[3] for r in rows], dtype=np.float64),
        source=np.array([r[4] for r in rows], dtype=np.int8),
        n_ticks=n_ticks,
        led_table_hash=led_table_hash(led_table),
        config_hash=config.config_hash(),
    ).sort()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
