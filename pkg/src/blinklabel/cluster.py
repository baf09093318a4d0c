"""Density-based clustering of event frames into candidate marker regions.

Events carry integer pixel coordinates, so DBSCAN over a frame reduces to
a grid problem: all events at one pixel are identical points, and the eps
disc becomes, per row offset dy, a contiguous span of pixel codes. Neighbor
counts come from prefix sums over those spans, core pixels are contracted
into horizontal runs (adjacent pixels are trivially connected), and run
connectivity plus border attachment follow from the same spans. This is
exact DBSCAN, independent of event order, vectorized across a whole batch
of frames at once.

Tuning leans toward recall: defaults are chosen so a single marker burst
forms a core cluster; spurious clusters are left for the signature and
matching stages to reject.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyCluster
from .events import EventArray, EventFrame

DEFAULT_EPS_PX = 3.0
DEFAULT_MIN_PTS = 5


@dataclass(frozen=True)
class Cluster:
    """One dense event region within a frame."""

    frame_window: tuple[int, int]
    events: EventArray
    centroid: tuple[float, float]
    bbox: tuple[int, int, int, int]  # x_min, y_min, x_max, y_max

    def __len__(self) -> int:
        return len(self.events)


def centroid(cluster: Cluster) -> tuple[float, float]:
    """Sub-pixel mean of member coordinates."""
    if len(cluster.events) == 0:
        raise EmptyCluster("cannot take centroid of an empty cluster")
    return (float(np.mean(cluster.events.x)), float(np.mean(cluster.events.y)))


@dataclass
class ClusterBatch:
    """Clusters of many frames, flattened and ordered.

    Clusters are sorted by (frame, centroid_y, centroid_x) and numbered
    0..n-1 in that order; ``frame_starts`` slices them per frame and
    ``event_label`` maps every input event to its cluster (-1 = noise).
    """

    n_frames: int
    frame_of: np.ndarray
    centroid_x: np.ndarray
    centroid_y: np.ndarray
    bbox: np.ndarray  # (n, 4) x_min, y_min, x_max, y_max
    size: np.ndarray
    event_label: np.ndarray
    frame_starts: np.ndarray

    def __len__(self) -> int:
        return len(self.frame_of)

    def clusters_in_frame(self, k: int) -> range:
        return range(int(self.frame_starts[k]), int(self.frame_starts[k + 1]))


def _empty_batch(n_frames: int, n_events: int) -> ClusterBatch:
    return ClusterBatch(
        n_frames=n_frames,
        frame_of=np.empty(0, np.int64),
        centroid_x=np.empty(0), centroid_y=np.empty(0),
        bbox=np.empty((0, 4), np.int64),
        size=np.empty(0, np.int64),
        event_label=np.full(n_events, -1, np.int64),
        frame_starts=np.zeros(n_frames + 1, np.int64),
    )


def cluster_events(events: EventArray, frame_ids: np.ndarray, n_frames: int,
                   width: int, height: int,
                   eps_px: float = DEFAULT_EPS_PX,
                   min_pts: int = DEFAULT_MIN_PTS) -> ClusterBatch:
    """Grid DBSCAN over every frame of a batch in one vectorized pass."""
    if eps_px <= 0:
        raise ValueError("eps_px must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    n_ev = len(events)
    if n_ev == 0:
        return _empty_batch(n_frames, 0)

    plane = width * height
    # int32 codes sort measurably faster; fall back when the batch is too big
    span = (int(frame_ids[-1]) + 1) * plane if len(frame_ids) else 0
    dtype = np.int32 if span + 4 * width < 2**31 else np.int64
    code = frame_ids.astype(dtype) * plane + events.y.astype(dtype) * width \
        + events.x.astype(dtype)
    order = np.argsort(code, kind="stable")
    sc = code[order]
    new = np.empty(n_ev, dtype=bool)
    new[0] = True
    np.not_equal(sc[1:], sc[:-1], out=new[1:])
    uidx = np.nonzero(new)[0]
    uniq = sc[uidx]
    nu = len(uniq)
    cnt = np.diff(np.append(uidx, n_ev))
    inv = np.empty(n_ev, dtype=np.int64)
    inv[order] = np.cumsum(new) - 1
    ux = (uniq % plane) % width
    uy = (uniq % plane) // width

    # Per row offset dy, the eps disc covers dx in [-k, k]: a contiguous
    # code span. Neighbor counts are prefix-sum differences over the spans.
    r = int(np.floor(eps_px))
    csum = np.concatenate(([0], np.cumsum(cnt)))
    nbr = np.zeros(nu, dtype=np.int64)
    spans = []  # (dy, lo, hi) positions into uniq
    for dy in range(-r, r + 1):
        k = int(np.floor(np.sqrt(eps_px * eps_px - dy * dy)))
        valid = (uy + dy >= 0) & (uy + dy < height)
        base = uniq + dy * width
        lo = np.searchsorted(uniq, base + np.maximum(-k, -ux))
        hi = np.searchsorted(uniq, base + np.minimum(k, width - 1 - ux) + 1)
        lo = np.where(valid, lo, 0)
        hi = np.where(valid, hi, lo)
        nbr += csum[hi] - csum[lo]
        spans.append((dy, lo, hi))

    core = nbr >= min_pts
    if not core.any():
        return _empty_batch(n_frames, n_ev)
    core_pos = np.nonzero(core)[0]
    n_core = len(core_pos)
    core_rank = np.concatenate(([0], np.cumsum(core)))  # uniq idx -> core idx

    # Contract horizontal runs of adjacent core pixels; they are connected
    # at distance 1, so components can be computed on runs instead.
    cc = uniq[core_pos]
    cux = ux[core_pos]
    new_run = np.empty(n_core, dtype=bool)
    new_run[0] = True
    new_run[1:] = (cc[1:] != cc[:-1] + 1) | (cux[1:] != cux[:-1] + 1)
    run_of = np.cumsum(new_run) - 1
    n_runs = int(run_of[-1]) + 1

    # Run adjacency: every core pixel links its run to the runs intersecting
    # each of its spans (all within eps of it, hence the same component).
    tri_parts = []
    for dy, lo, hi in spans:
        cl = core_rank[lo[core_pos]]
        ch = core_rank[hi[core_pos]]
        has = ch > cl
        if has.any():
            src = run_of[np.nonzero(has)[0]]
            rlo = run_of[cl[has]]
            rhi = run_of[ch[has] - 1]
            tri_parts.append(np.stack((src, rlo, rhi)))
    tri = np.concatenate(tri_parts, axis=1)
    if n_runs < (1 << 20):  # pack to one int64 key for a fast dedupe
        key = np.unique((tri[0] * n_runs + tri[1]) * n_runs + tri[2])
        t_src = key // (n_runs * n_runs)
        t_lo = (key // n_runs) % n_runs
        t_hi = key % n_runs
    else:
        sel = np.lexsort((tri[2], tri[1], tri[0]))
        tri = tri[:, sel]
        first = np.empty(tri.shape[1], dtype=bool)
        first[0] = True
        first[1:] = (np.diff(tri, axis=1) != 0).any(axis=0)
        t_src, t_lo, t_hi = tri[0, first], tri[1, first], tri[2, first]
    n_edge = t_hi - t_lo + 1
    a = np.repeat(t_src, n_edge)
    off = np.concatenate(([0], np.cumsum(n_edge)))
    b = np.repeat(t_lo, n_edge) + (np.arange(off[-1]) - np.repeat(off[:-1], n_edge))
    keep = a != b
    graph = coo_matrix((np.ones(int(keep.sum()), np.int8), (a[keep], b[keep])),
                       shape=(n_runs, n_runs))
    n_comp, comp_run = connected_components(graph, directed=False)

    label_u = np.full(nu, -1, dtype=np.int64)
    label_u[core_pos] = comp_run[run_of]

    # Border pixels: non-core with a core pixel within eps; they join the
    # nearest core pixel's component (ties by smaller (dy, dx) offset).
    nc_pos = np.nonzero(~core)[0]
    if len(nc_pos):
        cand_i, cand_c, cand_dy = [], [], []
        for dy, lo, hi in spans:
            cl = core_rank[lo[nc_pos]]
            ch = core_rank[hi[nc_pos]]
            has = ch > cl
            if not has.any():
                continue
            counts = ch[has] - cl[has]
            cand_i.append(np.repeat(nc_pos[has], counts))
            offs = np.concatenate(([0], np.cumsum(counts)))
            cand_c.append(np.repeat(cl[has], counts)
                          + (np.arange(offs[-1]) - np.repeat(offs[:-1], counts)))
            cand_dy.append(np.full(int(counts.sum()), dy, dtype=np.int64))
        if cand_i:
            ci = np.concatenate(cand_i)
            ccand = np.concatenate(cand_c)
            cdy = np.concatenate(cand_dy)
            cdx = cux[ccand] - ux[ci]
            d2 = cdy * cdy + cdx * cdx
            sel = np.lexsort((cdx, cdy, d2, ci))
            first = np.empty(len(sel), dtype=bool)
            first[0] = True
            first[1:] = ci[sel][1:] != ci[sel][:-1]
            pick = sel[first]
            label_u[ci[pick]] = comp_run[run_of[ccand[pick]]]

    # Component stats from per-pixel aggregates.
    assigned = label_u >= 0
    lab_a = label_u[assigned]
    w_cnt = cnt[assigned].astype(np.float64)
    sum_n = np.bincount(lab_a, weights=w_cnt, minlength=n_comp)
    sum_x = np.bincount(lab_a, weights=w_cnt * ux[assigned], minlength=n_comp)
    sum_y = np.bincount(lab_a, weights=w_cnt * uy[assigned], minlength=n_comp)
    cx = sum_x / sum_n
    cy = sum_y / sum_n

    order_a = np.argsort(lab_a, kind="stable")
    bounds = np.searchsorted(lab_a[order_a], np.arange(n_comp))
    bbox = np.empty((n_comp, 4), dtype=np.int64)
    bbox[:, 0] = np.minimum.reduceat(ux[assigned][order_a], bounds)
    bbox[:, 1] = np.minimum.reduceat(uy[assigned][order_a], bounds)
    bbox[:, 2] = np.maximum.reduceat(ux[assigned][order_a], bounds)
    bbox[:, 3] = np.maximum.reduceat(uy[assigned][order_a], bounds)

    frame_of = np.empty(n_comp, dtype=np.int64)
    frame_of[lab_a] = uniq[assigned] // plane

    # Final deterministic numbering: by frame, then centroid y, then x.
    final = np.lexsort((cx, cy, frame_of))
    remap = np.empty(n_comp, dtype=np.int64)
    remap[final] = np.arange(n_comp)

    ev_label = label_u[inv]
    pos_mask = ev_label >= 0
    ev_label[pos_mask] = remap[ev_label[pos_mask]]

    frame_sorted = frame_of[final]
    frame_starts = np.searchsorted(frame_sorted, np.arange(n_frames + 1))

    return ClusterBatch(
        n_frames=n_frames,
        frame_of=frame_sorted,
        centroid_x=cx[final], centroid_y=cy[final],
        bbox=bbox[final],
        size=sum_n[final].astype(np.int64),
        event_label=ev_label,
        frame_starts=frame_starts,
    )


def dbscan(frame: EventFrame, eps_px: float = DEFAULT_EPS_PX,
           min_pts: int = DEFAULT_MIN_PTS,
           width: int | None = None, height: int | None = None) -> list[Cluster]:
    """Cluster one frame; noise events are dropped.

    Returned clusters are ordered by centroid (y, then x). Geometry defaults
    to a bounding box over the events when not given.
    """
    ev = frame.events
    if len(ev) == 0:
        return []
    if width is None:
        width = int(ev.x.max()) + 1
    if height is None:
        height = int(ev.y.max()) + 1
    batch = cluster_events(ev, np.zeros(len(ev), np.int64), 1,
                           width, height, eps_px, min_pts)
    out = []
    for ci in range(len(batch)):
        member = batch.event_label == ci
        sub = EventArray(ev.t[member], ev.x[member], ev.y[member], ev.p[member])
        out.append(Cluster(
            frame_window=(frame.window_start, frame.window_end),
            events=sub,
            centroid=(float(batch.centroid_x[ci]), float(batch.centroid_y[ci])),
            bbox=tuple(int(v) for v in batch.bbox[ci]),
        ))
    return out
