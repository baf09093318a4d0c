"""Cluster-to-LED assignment and cross-frame tracking.

The cost between a cluster signature and an LED combines the on-off time
distance (|mean_on - on| + |mean_off - off|) and the period distance
(|period_neg - T| + |period_pos - T|), weighted alpha/beta. Assignment is
optimal bipartite matching over entries within the d_max gate: maximum
cardinality first, then minimum total cost, ties broken toward the
lexicographically smallest (cluster, led) pair sequence.

Tracks carry position, velocity, and status per LED. Active and coasting
tracks spatially gate the cost matrix around their predicted positions;
lost tracks are re-acquired by signature alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BothWeightsZero
from .leds import LedConfig
from .signature import ClusterSignature, Run

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 0.5
DEFAULT_D_MAX = 200.0
DEFAULT_SPATIAL_GATE_PX = 50.0
DEFAULT_COAST_LIMIT_US = 100_000
DEFAULT_VELOCITY_SMOOTHING = 0.5

US_PER_MS = 1_000


# --------------------------------------------------------------------------
# distances

def time_distance(sig: ClusterSignature, led: LedConfig) -> float:
    """On-off time distance in microseconds."""
    return abs(sig.mean_on_us - led.on_time_us) + abs(sig.mean_off_us - led.off_time_us)


def period_distance(sig: ClusterSignature, led: LedConfig) -> float:
    """Period distance: both measured periods against the nominal one."""
    return abs(sig.period_neg_us - led.period_us) + abs(sig.period_pos_us - led.period_us)


def combined_distance(sig: ClusterSignature, led: LedConfig,
                      alpha: float = DEFAULT_ALPHA,
                      beta: float = DEFAULT_BETA) -> float:
    if alpha < 0 or beta < 0:
        raise ValueError("weights must be non-negative")
    if alpha == 0 and beta == 0:
        raise BothWeightsZero("alpha and beta cannot both be zero")
    return alpha * time_distance(sig, led) + beta * period_distance(sig, led)


# --------------------------------------------------------------------------
# cost matrix and assignment

@dataclass(frozen=True)
class CostMatrix:
    """M x N cluster-by-LED costs; entries above d_max (or inf) are forbidden."""

    costs: np.ndarray
    d_max: float = DEFAULT_D_MAX

    @property
    def shape(self) -> tuple[int, int]:
        return self.costs.shape

    def admissible(self) -> np.ndarray:
        return np.isfinite(self.costs) & (self.costs <= self.d_max)


def build_cost_matrix(sigs: list[ClusterSignature | None], leds: list[LedConfig],
                      alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
                      d_max: float = DEFAULT_D_MAX) -> CostMatrix:
    """Vectorized combined distance; rows with no signature are forbidden."""
    if alpha < 0 or beta < 0:
        raise ValueError("weights must be non-negative")
    if alpha == 0 and beta == 0:
        raise BothWeightsZero("alpha and beta cannot both be zero")
    m, n = len(sigs), len(leds)
    costs = np.full((m, n), np.inf)
    have = [i for i, s in enumerate(sigs) if s is not None]
    if have and n:
        s_on = np.array([sigs[i].mean_on_us for i in have])[:, None]
        s_off = np.array([sigs[i].mean_off_us for i in have])[:, None]
        s_tp = np.array([sigs[i].period_pos_us for i in have])[:, None]
        s_tn = np.array([sigs[i].period_neg_us for i in have])[:, None]
        l_on = np.array([led.on_time_us for led in leds])[None, :]
        l_off = np.array([led.off_time_us for led in leds])[None, :]
        l_t = l_on + l_off
        d_t = np.abs(s_on - l_on) + np.abs(s_off - l_off)
        d_p = np.abs(s_tn - l_t) + np.abs(s_tp - l_t)
        costs[have, :] = alpha * d_t + beta * d_p
    return CostMatrix(costs=costs, d_max=d_max)


@dataclass(frozen=True)
class Assignment:
    """Injective cluster-to-LED matching with per-pair costs."""

    pairs: tuple[tuple[int, int, float], ...]  # (cluster_index, led_index, cost)
    unmatched_clusters: tuple[int, ...]
    unmatched_leds: tuple[int, ...]

    @property
    def total_cost(self) -> float:
        return float(sum(c for _, _, c in self.pairs))

    def led_of_cluster(self) -> dict[int, int]:
        return {i: j for i, j, _ in self.pairs}

    def cluster_of_led(self) -> dict[int, int]:
        return {j: i for i, j, _ in self.pairs}


def _lap(costs: np.ndarray, admissible: np.ndarray):
    """Max-cardinality then min-cost matching over admissible entries.

    Returns (row->col dict, cardinality, total cost). Implemented as a padded
    rectangular LAP where every row also has a private dummy column priced
    above any admissible total, which makes the solver fill real edges first.
    """
    m, n = costs.shape
    if m == 0 or n == 0 or not admissible.any():
        return {}, 0, 0.0
    adm_sum = float(costs[admissible].sum())
    dummy = adm_sum + 1.0
    forbid = m * dummy + adm_sum + 1.0
    pad = np.full((m, n + m), forbid)
    pad[:, :n][admissible] = costs[admissible]
    pad[np.arange(m), n + np.arange(m)] = dummy
    rows, cols = linear_sum_assignment(pad)
    match = {}
    for r, c in zip(rows, cols):
        if c < n and admissible[r, c]:
            match[int(r)] = int(c)
    total = float(sum(costs[r, c] for r, c in match.items()))
    return match, len(match), total


def _assign_dominant(costs, admissible, m, n):
    if m == 0 or n == 0:
        return None
    masked = np.where(admissible, costs, np.inf)
    best_j = np.argmin(masked, axis=1)
    best = masked[np.arange(m), best_j]
    finite = np.isfinite(best)
    if not finite.any():
        return Assignment((), tuple(range(m)), tuple(range(n)))
    rows = np.nonzero(finite)[0]
    cols = best_j[rows]
    used = np.zeros(n, dtype=bool)
    used[cols] = True
    if int(used.sum()) != len(cols):
        return None
    tol = 1e-9 * max(1.0, float(best[rows].sum()))
    if n > 1:
        second = np.partition(masked[rows], 1, axis=1)[:, 1]
        if not (second - best[rows] > tol).all():
            return None
    row_l = rows.tolist()
    col_l = cols.tolist()
    pairs = tuple((i, j, costs[i, j]) for i, j in zip(row_l, col_l))
    return Assignment(
        pairs=pairs,
        unmatched_clusters=tuple(np.nonzero(~finite)[0].tolist()),
        unmatched_leds=tuple(np.nonzero(~used)[0].tolist()),
    )


def assign(cost: CostMatrix) -> Assignment:
    """Optimal gated assignment with deterministic tie-breaking.

    Equals the brute-force optimum over all partial injective matchings of
    the gated matrix, ranked by (max cardinality, min total cost, lexico-
    graphically smallest pair sequence). Cost comparisons use a relative
    tolerance so the tie rule is scale-invariant.
    """
    costs = np.asarray(cost.costs, dtype=np.float64)
    m, n = costs.shape
    if np.isnan(costs).any():
        raise ValueError("cost matrix contains NaN")
    admissible = cost.admissible()
    if (costs[admissible] < 0).any():
        raise ValueError("costs must be non-negative")

    # Dominant-diagonal fast path: when every matchable row has a strictly
    # unique best column and those argmins are pairwise distinct, picking
    # them reaches the row-minima lower bound, so it is the unique optimum
    # (max cardinality, min cost) and no solver call is needed.
    fast = _assign_dominant(costs, admissible, m, n)
    if fast is not None:
        return fast

    base, card, total = _lap(costs, admissible)
    if card == 0:
        return Assignment((), tuple(range(m)), tuple(range(n)))
    tol = 1e-9 * max(1.0, abs(total))

    masked = np.where(admissible, costs, np.inf)
    rowmin = masked.min(axis=1) if n else np.full(m, np.inf)

    # Fast path: a pair (i, j) can sit in an optimal assignment only if
    # costs[i, j] <= total - (sum of the card-1 smallest row minima of the
    # other rows). If no admissible entry left of a row's matched column
    # passes that test, the solver solution is already the lexicographic
    # minimum.
    finite = rowmin[np.isfinite(rowmin)]
    if len(finite) >= card:
        head = np.sort(finite)[:card]
        s_head = float(head.sum())
        slb_i = np.where(rowmin <= head[-1] + tol,
                         s_head - np.minimum(rowmin, head[-1]),
                         s_head - head[-1])
    else:
        slb_i = np.zeros(m)
    jb = np.full(m, n, dtype=np.int64)
    for i, j in base.items():
        jb[i] = j
    cand_any = (admissible
                & (np.arange(n)[None, :] < jb[:, None])
                & (costs + slb_i[:, None] <= total + tol))
    if not cand_any.any():
        pairs = tuple((i, base[i], float(costs[i, base[i]]))
                      for i in sorted(base))
        matched_cols = set(base.values())
        return Assignment(
            pairs=pairs,
            unmatched_clusters=tuple(i for i in range(m) if i not in base),
            unmatched_leds=tuple(j for j in range(n) if j not in matched_cols),
        )

    # Greedy lexicographic fix-up: walk rows in order and take the smallest
    # admissible column that still permits an optimal completion. Candidates
    # are pruned with a lower bound (sum of smallest row minima, computed
    # once; stale minima can only loosen the bound, which stays valid), so a
    # reduced solve happens only near genuine cost ties.

    fixed: list[tuple[int, int]] = []
    free_cols = np.ones(n, dtype=bool)
    rest = dict(base)  # optimal completion for rows not yet processed
    card_rem = card
    total_rem = total
    for i in range(m):
        if card_rem == 0:
            break
        cand = np.nonzero(admissible[i] & free_cols)[0]
        if len(cand) == 0:
            rest.pop(i, None)
            continue
        j_base = rest.get(i)

        k_needed = card_rem - 1
        if k_needed > 0:
            later = rowmin[i + 1:]
            later = later[np.isfinite(later)]
            if len(later) < k_needed:
                lb = np.inf
            else:
                lb = float(np.partition(later, k_needed - 1)[:k_needed].sum())
        else:
            lb = 0.0

        upto = j_base if j_base is not None else n
        cand = cand[cand < upto]
        if len(cand):
            cand = cand[costs[i, cand] + lb <= total_rem + tol]
        chosen = None
        for j in cand:
            j = int(j)
            sub_adm = admissible[i + 1:].copy()
            sub_adm[:, j] = False
            sub_adm[:, ~free_cols] = False
            sub_match, sub_card, sub_total = _lap(costs[i + 1:], sub_adm)
            if sub_card == card_rem - 1 and \
                    costs[i, j] + sub_total <= total_rem + tol:
                chosen = j
                rest = {i + 1 + r: c for r, c in sub_match.items()}
                break
        if chosen is None and j_base is not None:
            chosen = j_base
            rest.pop(i, None)
        if chosen is not None:
            fixed.append((i, chosen))
            free_cols[chosen] = False
            card_rem -= 1
            total_rem -= costs[i, chosen]

    pairs = tuple((i, j, float(costs[i, j])) for i, j in fixed)
    matched_rows = {i for i, _ in fixed}
    matched_cols = {j for _, j in fixed}
    return Assignment(
        pairs=pairs,
        unmatched_clusters=tuple(i for i in range(m) if i not in matched_rows),
        unmatched_leds=tuple(j for j in range(n) if j not in matched_cols),
    )


# --------------------------------------------------------------------------
# tracking

class TrackStatus(Enum):
    ACTIVE = "active"
    COASTING = "coasting"
    LOST = "lost"


@dataclass
class TrackState:
    """Per-LED track: last position, velocity (px/ms), and staleness."""

    led_id: str
    status: TrackStatus = TrackStatus.LOST
    position: tuple[float, float] | None = None
    velocity: tuple[float, float] = (0.0, 0.0)
    last_seen: int | None = None
    updated_at: int | None = None
    velocity_valid: bool = False
    signature_history: list[Run] = field(default_factory=list)

    def predicted_position(self, now: int) -> tuple[float, float] | None:
        if self.position is None:
            return None
        dt_ms = (now - (self.updated_at if self.updated_at is not None
                        else self.last_seen)) / US_PER_MS
        return (self.position[0] + self.velocity[0] * dt_ms,
                self.position[1] + self.velocity[1] * dt_ms)


_ACTIVE, _COASTING, _LOST = 0, 1, 2
_STATUS = {_ACTIVE: TrackStatus.ACTIVE, _COASTING: TrackStatus.COASTING,
           _LOST: TrackStatus.LOST}


class Tracker:
    """Sequential track store; one update per frame, in time order.

    State lives in flat parallel lists (this runs once per millisecond);
    ``tracks`` materializes TrackState snapshots on demand.
    """

    def __init__(self, leds: list[LedConfig],
                 coast_limit_us: int = DEFAULT_COAST_LIMIT_US,
                 velocity_smoothing: float = DEFAULT_VELOCITY_SMOOTHING,
                 history_us: int = 10_000):
        self.leds = leds
        self.coast_limit_us = coast_limit_us
        self.velocity_smoothing = velocity_smoothing
        self.history_us = history_us
        n = len(leds)
        self._px = [0.0] * n
        self._py = [0.0] * n
        self._vx = [0.0] * n
        self._vy = [0.0] * n
        self._seen = [False] * n
        self._vvalid = [False] * n
        self._last_seen = [0] * n
        self._updated = [0] * n
        self._status = [_LOST] * n
        # run history per track: list of segments, each either an explicit
        # run list or a lazy (cls, t0, t1, clip_lo, clip_hi) array slice
        self._history: list[list] = [[] for _ in range(n)]

    def history_runs(self, j: int) -> list[Run]:
        """Materialized signature history of track j (merged run tuples)."""
        runs: list[Run] = []
        for seg in self._history[j]:
            if isinstance(seg, list):
                items = seg
            else:
                (cls, t0s, t1s), a, b, lo, hi = seg
                items = [
                    (1 if c > 0 else 0, s if s > lo else lo, e if e < hi else hi)
                    for c, s, e in zip(cls[a:b].tolist(), t0s[a:b].tolist(),
                                       t1s[a:b].tolist())
                    if e > lo and s < hi
                ]
            for run in items:
                if runs and runs[-1][0] == run[0] and runs[-1][2] == run[1]:
                    runs[-1] = (run[0], runs[-1][1], run[2])
                else:
                    runs.append(run)
        cutoff = self._last_seen[j] - self.history_us
        return [r for r in runs if r[2] > cutoff]

    @property
    def tracks(self) -> list[TrackState]:
        out = []
        for j, led in enumerate(self.leds):
            out.append(TrackState(
                led_id=led.id,
                status=_STATUS[self._status[j]],
                position=(self._px[j], self._py[j]) if self._seen[j] else None,
                velocity=(self._vx[j], self._vy[j]),
                last_seen=self._last_seen[j] if self._seen[j] else None,
                updated_at=self._updated[j] if self._seen[j] else None,
                velocity_valid=self._vvalid[j],
                signature_history=self.history_runs(j),
            ))
        return out

    def within_gate(self, rows, cols, cx_l, cy_l, now: int, gate_sq: float) -> bool:
        """True when every (cluster, led) pair lies inside its track gate.

        Lost and never-seen tracks are ungated.
        """
        for i, j in zip(rows, cols):
            if self._status[j] != _LOST and self._seen[j]:
                dt = (now - self._updated[j]) / US_PER_MS
                dx = cx_l[i] - (self._px[j] + self._vx[j] * dt)
                dy = cy_l[i] - (self._py[j] + self._vy[j] * dt)
                if dx * dx + dy * dy > gate_sq:
                    return False
        return True

    def update(self, assignment: Assignment, centroids, now: int,
               runs_per_cluster=None) -> None:
        """Apply one frame's assignment at time ``now`` (frame start, us)."""
        cx_l = [float(c[0]) for c in centroids]
        cy_l = [float(c[1]) for c in centroids]
        self.update_fast(assignment, cx_l, cy_l, now, runs_per_cluster)

    def update_fast(self, assignment: Assignment, cx_l, cy_l, now: int,
                    runs_per_cluster=None) -> None:
        matched = [False] * len(self.leds)
        a = self.velocity_smoothing
        for ci, j, _cost in assignment.pairs:
            matched[j] = True
            cx, cy = cx_l[ci], cy_l[ci]
            if self._status[j] != _LOST and self._seen[j]:
                dt = (now - self._updated[j]) / US_PER_MS
                if dt > 0:
                    vx = (cx - self._px[j]) / dt
                    vy = (cy - self._py[j]) / dt
                    if self._vvalid[j]:
                        vx = a * vx + (1 - a) * self._vx[j]
                        vy = a * vy + (1 - a) * self._vy[j]
                    self._vx[j] = vx
                    self._vy[j] = vy
                    self._vvalid[j] = True
            else:
                self._vx[j] = 0.0
                self._vy[j] = 0.0
                self._vvalid[j] = False
            self._px[j] = cx
            self._py[j] = cy
            self._seen[j] = True
            self._last_seen[j] = now
            self._updated[j] = now
            self._status[j] = _ACTIVE
            if runs_per_cluster is not None:
                self._extend_history(j, runs_per_cluster[ci], now)
        for j in range(len(self.leds)):
            if matched[j] or self._status[j] == _LOST:
                continue
            if now - self._last_seen[j] > self.coast_limit_us:
                self._status[j] = _LOST
                self._vx[j] = 0.0
                self._vy[j] = 0.0
                self._vvalid[j] = False
            else:
                # coast: advance position by current velocity
                dt = (now - self._updated[j]) / US_PER_MS
                self._px[j] += self._vx[j] * dt
                self._py[j] += self._vy[j] * dt
                self._updated[j] = now
                self._status[j] = _COASTING

    @staticmethod
    def _seg_end(seg) -> int:
        if isinstance(seg, list):
            return seg[-1][2] if seg else 0
        return seg[4]

    def _extend_history(self, j: int, seg, now: int) -> None:
        # trim lazily; history_runs() re-filters by the cutoff anyway
        hist = self._history[j]
        hist.append(seg)
        if len(hist) & 0xF == 0:
            cutoff = now - self.history_us
            while hist and self._seg_end(hist[0]) <= cutoff:
                hist.pop(0)

    def predicted_positions(self, now: int):
        """(n_leds, 2) predictions; NaN rows for lost/unseen tracks."""
        nan = float("nan")
        xs, ys = [], []
        for j in range(len(self.leds)):
            if self._status[j] != _LOST and self._seen[j]:
                dt = (now - self._updated[j]) / US_PER_MS
                xs.append(self._px[j] + self._vx[j] * dt)
                ys.append(self._py[j] + self._vy[j] * dt)
            else:
                xs.append(nan)
                ys.append(nan)
        return np.array([xs, ys]).T


def track_update(tracker: Tracker, assignment: Assignment, clusters,
                 now: int) -> Tracker:
    """Functional wrapper over Tracker.update for list-of-Cluster input."""
    centroids = [c.centroid for c in clusters]
    tracker.update(assignment, centroids, now)
    return tracker


def gate_costs(cost: CostMatrix, tracker: Tracker, centroids,
               spatial_gate_px: float = DEFAULT_SPATIAL_GATE_PX,
               now: int | None = None) -> CostMatrix:
    """Forbid pairs whose cluster lies too far from a live track's prediction.

    Lost tracks are not gated: they re-acquire on signature alone.
    """
    costs = np.array(cost.costs, dtype=np.float64, copy=True)
    m = costs.shape[0]
    if m and now is not None:
        pred = tracker.predicted_positions(now)  # NaN rows for lost tracks
        cent = np.asarray(centroids, dtype=np.float64).reshape(m, 2)
        dx = cent[:, 0:1] - pred[:, 0][None, :]
        dy = cent[:, 1:2] - pred[:, 1][None, :]
        # NaN comparisons are False, so lost tracks are never gated
        far = dx * dx + dy * dy > spatial_gate_px * spatial_gate_px
        costs[far] = np.inf
    return CostMatrix(costs=costs, d_max=cost.d_max)
