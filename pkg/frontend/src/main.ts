/** Review app bootstrap: timeline scrubbing, overlays, corrections.
 *
 * Keys: left/right step 1 ms (shift: 10 ms), space plays, delete removes
 * the selected joint's label. Drag a label to move it; with a joint
 * selected, click a cluster to reassign. "Save" flushes pending edits;
 * on a version conflict the app reloads and asks to retry.
 */

import { ApiClient } from "./api.js";
import { deleteRecord, flushCorrections, moveRecord, reassignRecord }
  from "./corrections.js";
import { drawClusters, drawLabels, drawRaster, drawTrajectory, hitTestCluster,
         hitTestLabel, statusLine, toWorld } from "./render.js";
import { applyOptimistic, clearPending, initialState, scrub, selectJoint,
         stageCorrection, stepTick, toggleOverlay } from "./state.js";
import type { ClusterInfo, LabelRow, RasterRun, SessionMeta } from "./types.js";
import type { Overlays, ViewState } from "./state.js";

const TRACE_MS = 50;

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const meta: SessionMeta = await api.session();
  let state: ViewState = initialState(meta);

  const canvas = document.getElementById("view") as HTMLCanvasElement;
  canvas.width = meta.sensor_width;
  canvas.height = meta.sensor_height;
  const ctx = canvas.getContext("2d")!;
  const status = document.getElementById("status")!;
  const slider = document.getElementById("tick") as HTMLInputElement;
  slider.max = String(meta.n_ticks - 1);

  let runs: RasterRun[] = [];
  let clusters: ClusterInfo[] = [];
  let labels: LabelRow[] = [];
  let trace: LabelRow[] = [];
  let playing = false;

  async function loadTick(): Promise<void> {
    const t = state.tick;
    const [framePayload, clusterPayload, labelRows] = await Promise.all([
      api.frames(t, t + 1),
      api.clusters(t),
      api.labels(t, t + 1),
    ]);
    runs = framePayload.frames[0].runs;
    clusters = clusterPayload.clusters;
    labels = labelRows;
    if (state.overlays.trajectories && state.selected) {
      const t0 = Math.max(0, t - TRACE_MS);
      const span = await api.labels(t0, t + 1);
      trace = span.filter((r) => r.led_id === state.selected);
    } else {
      trace = [];
    }
    redraw();
  }

  function redraw(): void {
    ctx.fillStyle = "#111";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    const cam = { zoom: state.zoom, panX: state.panX, panY: state.panY };
    if (state.overlays.events) {
      drawRaster(ctx, runs, meta.sensor_width, meta.sensor_height, cam);
    }
    if (state.overlays.clusters) {
      drawClusters(ctx, clusters, cam);
    }
    if (state.overlays.trajectories) {
      drawTrajectory(ctx, trace, cam);
    }
    if (state.overlays.labels) {
      drawLabels(ctx, applyOptimistic(labels, state.pending), state.selected,
                 cam);
    }
    status.textContent = statusLine(state);
    slider.value = String(state.tick);
  }

  async function setTick(tick: number): Promise<void> {
    state = scrub(state, tick);
    await loadTick();
  }

  // --- corrections -------------------------------------------------------

  let dragging: LabelRow | null = null;

  canvas.addEventListener("mousedown", (ev) => {
    const cam = { zoom: state.zoom, panX: state.panX, panY: state.panY };
    const hit = hitTestLabel(labels, cam, ev.offsetX, ev.offsetY);
    if (hit) {
      state = selectJoint(state, hit.led_id);
      dragging = hit;
      redraw();
      return;
    }
    if (state.selected) {
      const cl = hitTestCluster(clusters, cam, ev.offsetX, ev.offsetY);
      if (cl) {
        state = stageCorrection(
          state, reassignRecord(state.tick, state.selected, cl.id));
        redraw();
      }
    }
  });

  canvas.addEventListener("mouseup", (ev) => {
    if (!dragging) return;
    const cam = { zoom: state.zoom, panX: state.panX, panY: state.panY };
    const [wx, wy] = toWorld(cam, ev.offsetX, ev.offsetY);
    const moved = Math.hypot(wx - dragging.x, wy - dragging.y) > 0.5;
    if (moved) {
      state = stageCorrection(
        state,
        moveRecord(state.tick, dragging.led_id,
                   Math.round(wx * 100) / 100, Math.round(wy * 100) / 100));
    }
    dragging = null;
    redraw();
  });

  document.addEventListener("keydown", async (ev) => {
    if (ev.key === "ArrowRight") {
      state = stepTick(state, ev.shiftKey ? 10 : 1);
      await loadTick();
    } else if (ev.key === "ArrowLeft") {
      state = stepTick(state, ev.shiftKey ? -10 : -1);
      await loadTick();
    } else if (ev.key === " ") {
      ev.preventDefault();
      playing = !playing;
    } else if ((ev.key === "Delete" || ev.key === "Backspace")
               && state.selected) {
      state = stageCorrection(state,
                              deleteRecord(state.tick, state.selected));
      redraw();
    } else if (ev.key === "Escape") {
      state = selectJoint(state, null);
      redraw();
    }
  });

  slider.addEventListener("input", () => void setTick(Number(slider.value)));

  for (const name of ["events", "clusters", "labels", "trajectories"]) {
    const box = document.getElementById(`ov-${name}`) as HTMLInputElement;
    box.addEventListener("change", () => {
      state = toggleOverlay(state, name as keyof Overlays);
      void loadTick();
    });
  }

  document.getElementById("save")!.addEventListener("click", async () => {
    const outcome = await flushCorrections(api, state.version, state.pending);
    if (outcome.status === "conflict") {
      const fresh = await api.session();
      const retry = window.confirm(
        `Corrections changed on the server (now v${fresh.version}). ` +
        "Retry your edits on top?");
      state = { ...state, version: fresh.version };
      if (retry) {
        const again = await flushCorrections(api, state.version, state.pending);
        if (again.status === "ok") {
          state = clearPending(state, again.version);
        }
      }
    } else if (outcome.status === "ok") {
      state = clearPending(state, outcome.version);
    }
    await loadTick();
  });

  document.getElementById("discard")!.addEventListener("click", () => {
    state = clearPending(state);
    redraw();
  });

  setInterval(() => {
    if (playing) void setTick(state.tick + 1);
  }, 40);

  await loadTick();
}

boot().catch((err) => {
  document.getElementById("status")!.textContent = `error: ${err}`;
});
