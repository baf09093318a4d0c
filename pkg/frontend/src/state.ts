/** View state and its pure transition functions.
 *
 * Pending corrections live here until flushed; the server stays the single
 * source of truth for label values, so the optimistic view only moves or
 * hides markers, it never invents centroids.
 */

import type { CorrectionRecord, LabelRow, SessionMeta } from "./types.js";

export interface Overlays {
  events: boolean;
  clusters: boolean;
  labels: boolean;
  trajectories: boolean;
}

export interface ViewState {
  tick: number;
  nTicks: number;
  zoom: number;
  panX: number;
  panY: number;
  overlays: Overlays;
  selected: string | null;
  pending: CorrectionRecord[];
  version: number;
}

export function initialState(meta: SessionMeta): ViewState {
  return {
    tick: 0,
    nTicks: meta.n_ticks,
    zoom: 1,
    panX: 0,
    panY: 0,
    overlays: { events: true, clusters: true, labels: true, trajectories: true },
    selected: null,
    pending: [],
    version: meta.version,
  };
}

export function scrub(state: ViewState, tick: number): ViewState {
  const clamped = Math.max(0, Math.min(state.nTicks - 1, Math.round(tick)));
  return { ...state, tick: clamped };
}

export function stepTick(state: ViewState, delta: number): ViewState {
  return scrub(state, state.tick + delta);
}

export function toggleOverlay(state: ViewState, name: keyof Overlays): ViewState {
  return {
    ...state,
    overlays: { ...state.overlays, [name]: !state.overlays[name] },
  };
}

export function selectJoint(state: ViewState, ledId: string | null): ViewState {
  return { ...state, selected: ledId };
}

/** Stage a correction; a later edit on the same (tick, led) supersedes. */
export function stageCorrection(
  state: ViewState,
  record: CorrectionRecord,
): ViewState {
  const pending = state.pending.filter(
    (r) => !(r.t_ms === record.t_ms && r.led_id === record.led_id),
  );
  pending.push(record);
  return { ...state, pending };
}

export function clearPending(state: ViewState, version?: number): ViewState {
  return { ...state, pending: [], version: version ?? state.version };
}

/** Server labels merged with the pending edits, for optimistic rendering.
 * Reassignments keep the server position and are flagged for the renderer;
 * the real centroid arrives with the POST response. */
export function applyOptimistic(
  labels: LabelRow[],
  pending: CorrectionRecord[],
): (LabelRow & { pending?: boolean })[] {
  const out: (LabelRow & { pending?: boolean })[] = [];
  for (const row of labels) {
    const edit = pending.find(
      (r) => r.t_ms === row.t_ms && r.led_id === row.led_id,
    );
    if (!edit) {
      out.push(row);
    } else if (edit.action === "delete") {
      continue;
    } else if (edit.action === "move") {
      out.push({ ...row, x: edit.x!, y: edit.y!, source: "corrected",
                 pending: true });
    } else {
      out.push({ ...row, pending: true });
    }
  }
  for (const edit of pending) {
    if (edit.action === "move"
        && !labels.some((r) => r.t_ms === edit.t_ms && r.led_id === edit.led_id)) {
      out.push({ t_ms: edit.t_ms, led_id: edit.led_id, x: edit.x!, y: edit.y!,
                 source: "corrected", pending: true });
    }
  }
  return out;
}
