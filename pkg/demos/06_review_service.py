"""Build a review session and exercise the correction service end to end.

Starts the HTTP service on a free port, posts a correction the way the
browser frontend would, and shows that /export equals replaying the log.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from blinklabel import build_scenario, simulate, write_event_stream
from blinklabel.leds import save_led_table
from blinklabel.pipeline import PipelineConfig
from blinklabel.service import make_server
from blinklabel.session import build_session

root = Path(tempfile.mkdtemp(prefix="blinklabel_session_"))
scene = build_scenario("wave", seed=2, duration_us=1_000_000, noise_rate=2e-3)
header, events, _ = simulate(scene)
write_event_stream(header, events, root / "stream.fevt")
save_led_table(list(scene.leds), root / "leds.cfg")
build_session(root, root / "stream.fevt", root / "leds.cfg", PipelineConfig())
print(f"session built at {root}")

server = make_server(root, port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print(f"service on {base}")


def get(path):
    with urllib.request.urlopen(base + path) as r:
        return json.loads(r.read()) if "json" in r.headers.get_content_type() \
            else r.read()


meta = get("/session")
print(f"session span {meta['n_ticks']} ms, version {meta['version']}")
frame = get("/frames?t0_ms=500&t1_ms=501")["frames"][0]
print(f"tick 500 raster: {len(frame['runs'])} runs")
clusters = get("/clusters?t_ms=500")["clusters"]
print(f"tick 500: {len(clusters)} clusters, "
      f"{sum(c['matched_led'] is not None for c in clusters)} matched")

req = urllib.request.Request(
    base + "/corrections",
    data=json.dumps({
        "base_version": meta["version"],
        "records": [{"t_ms": 500, "led_id": meta["led_ids"][0],
                     "action": "move", "x": 111.0, "y": 222.0,
                     "author": "demo"}],
    }).encode(),
    headers={"Content-Type": "application/json"})
with urllib.request.urlopen(req) as r:
    out = json.loads(r.read())
print(f"posted correction, new version {out['version']}")

exported = get("/export").decode()
moved = [l for l in exported.splitlines() if l.startswith("500 ")][0]
print(f"export now reads: {moved}")
server.shutdown()
print("done; delete the session directory when finished exploring")
