/** Live-service acceptance: correction round-trip and scrub latency.
 *
 * Spawns the python review service against freshly built sessions, drives
 * corrections through the same client modules the browser uses, and
 * compares /export byte-for-byte with the library's correction-merge
 * oracle. Requires the python package installed (pip install -e .).
 */

import { spawn, execFileSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { deleteRecord, flushCorrections, moveRecord, reassignRecord }
  from "../src/corrections.js";
import type { CorrectionRecord } from "../src/types.js";

const PY = process.env.PYTHON ?? "python3";
const BUILD_SMALL = `
import sys
from blinklabel.events import write_event_stream
from blinklabel.leds import save_led_table
from blinklabel.pipeline import PipelineConfig
from blinklabel.scenarios import build_scenario
from blinklabel.session import build_session
from blinklabel.simulate import simulate
from pathlib import Path
root = Path(sys.argv[1])
root.mkdir(parents=True, exist_ok=True)
scene = build_scenario("wave", seed=2, duration_us=1_000_000, noise_rate=2e-3)
hdr, ev, _ = simulate(scene)
write_event_stream(hdr, ev, root / "stream.fevt")
save_led_table(list(scene.leds), root / "leds.cfg")
build_session(root, root / "stream.fevt", root / "leds.cfg", PipelineConfig())
print("ok")
`;
const BUILD_LONG = `
import sys
from pathlib import Path
from blinklabel.events import write_event_stream
from blinklabel.leds import LedConfig, save_led_table
from blinklabel.pipeline import PipelineConfig
from blinklabel.session import build_session
from blinklabel.simulate import SceneConfig, SinusoidPath, simulate
root = Path(sys.argv[1])
root.mkdir(parents=True, exist_ok=True)
leds = (LedConfig(id="m1", on_time_us=150, off_time_us=250, body_site="a"),
        LedConfig(id="m2", on_time_us=250, off_time_us=150, body_site="b"))
dur = 600_000_000  # ten minutes
occl = []
for k in range(0, 600, 10):  # markers visible 1.5 s out of every 10 s
    occl += [("m1", (k + 1) * 10**6 + 500_000, (k + 10) * 10**6),
             ("m2", (k + 1) * 10**6 + 500_000, (k + 10) * 10**6)]
scene = SceneConfig(
    leds=leds,
    paths={"m1": SinusoidPath(300.0, 300.0), "m2": SinusoidPath(900.0, 400.0)},
    duration_us=dur, seed=5, events_per_edge=5, jitter_us=5,
    noise_rate=1e-4, occlusions=tuple(occl))
hdr, ev, _ = simulate(scene)
write_event_stream(hdr, ev, root / "stream.fevt")
save_led_table(list(leds), root / "leds.cfg")
build_session(root, root / "stream.fevt", root / "leds.cfg", PipelineConfig())
print("ok")
`;
const ORACLE = `
import sys
from blinklabel.labels import write_labels
from blinklabel.session import open_session
s = open_session(sys.argv[1])
sys.stdout.buffer.write(write_labels(s.corrected_labels()))
`;

interface Server {
  proc: ChildProcess;
  base: string;
}

async function startServer(sessionDir: string): Promise<Server> {
  const proc = spawn(PY, ["-m", "blinklabel.cli", "serve",
                          "--session", sessionDir, "--port", "0"]);
  const base = await new Promise<string>((resolve, reject) => {
    let buf = "";
    proc.stdout!.on("data", (chunk) => {
      buf += String(chunk);
      const m = buf.match(/http:\/\/[\d.]+:(\d+)/);
      if (m) resolve(`http://127.0.0.1:${m[1]}`);
    });
    proc.stderr!.on("data", (chunk) => { buf += String(chunk); });
    proc.on("exit", (code) => reject(new Error(`server exited ${code}: ${buf}`)));
    setTimeout(() => reject(new Error(`server start timeout: ${buf}`)), 30000);
  });
  return { proc, base };
}

let workdir: string;
let small: Server;
let long: Server;

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "blinklabel-it-"));
  execFileSync(PY, ["-c", BUILD_SMALL, join(workdir, "small")],
               { stdio: "pipe", timeout: 120_000 });
  execFileSync(PY, ["-c", BUILD_LONG, join(workdir, "long")],
               { stdio: "pipe", timeout: 240_000 });
  small = await startServer(join(workdir, "small"));
  long = await startServer(join(workdir, "long"));
}, 420_000);

afterAll(() => {
  small?.proc.kill();
  long?.proc.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("correction round-trip against a live service", () => {
  it("20 UI corrections match the merge oracle exactly", async () => {
    const api = new ApiClient(small.base);
    const meta = await api.session();
    const ledIds: string[] = meta.led_ids;

    // 8 moves, 6 reassigns, 6 deletes across distinct (tick, led) targets
    const records: CorrectionRecord[] = [];
    for (let i = 0; i < 8; i++) {
      records.push(moveRecord(100 + i, ledIds[i % ledIds.length],
                              200 + i * 3 + 0.25, 300 - i * 2 + 0.5, "it"));
    }
    for (let i = 0; i < 6; i++) {
      const tick = 300 + i;
      const clusters = await api.clusters(tick);
      expect(clusters.clusters.length).toBeGreaterThan(0);
      records.push(reassignRecord(tick, ledIds[i % ledIds.length],
                                  clusters.clusters[0].id, "it"));
    }
    for (let i = 0; i < 6; i++) {
      records.push(deleteRecord(500 + i, ledIds[i % ledIds.length], "it"));
    }
    expect(records).toHaveLength(20);

    const outcome = await flushCorrections(api, meta.version, records);
    expect(outcome.status).toBe("ok");
    expect(outcome.version).toBe(meta.version + 20);

    const exported = await api.exportLabels();
    const oracle = execFileSync(PY, ["-c", ORACLE, join(workdir, "small")],
                                { timeout: 60_000 }).toString();
    expect(exported).toBe(oracle);

    // moved labels actually moved, deleted ones are gone
    expect(exported).toContain("100 led01 200.2500 300.5000 corrected");
    expect(exported.split("\n").some(
      (line) => line.startsWith("500 led01 "))).toBe(false);
  });

  it("a fresh client and a restarted server reproduce the corrected view",
     async () => {
    const before = await new ApiClient(small.base).exportLabels();
    small.proc.kill();
    small = await startServer(join(workdir, "small"));
    const after = await new ApiClient(small.base).exportLabels();
    expect(after).toBe(before);
  });

  it("stale versions conflict with 409 and succeed after reload", async () => {
    const api = new ApiClient(small.base);
    const stale = await flushCorrections(api, 0, [deleteRecord(101, "led02")]);
    expect(stale.status).toBe("conflict");
    const fresh = await flushCorrections(api, stale.version,
                                         [deleteRecord(101, "led02")]);
    expect(fresh.status).toBe("ok");
  });
});

describe("scrub latency on a ten-minute session", () => {
  it("adjacent-tick frame fetches stay under 200 ms", async () => {
    const api = new ApiClient(long.base);
    const meta = await api.session();
    expect(meta.n_ticks).toBe(600_000);
    await api.frames(5000, 5001); // warm up
    const laps: number[] = [];
    const anchors = [5000, 105_000, 305_000, 599_000];
    for (const anchor of anchors) {
      for (let k = 0; k < 5; k++) {
        const t = anchor + k;
        const begin = performance.now();
        const payload = await api.frames(t, t + 1);
        laps.push(performance.now() - begin);
        expect(payload.frames).toHaveLength(1);
      }
    }
    const worst = Math.max(...laps);
    console.log(`scrub latency: worst ${worst.toFixed(1)} ms over `
                + `${laps.length} adjacent-tick fetches`);
    expect(worst).toBeLessThan(200);
  }, 60_000);
});
