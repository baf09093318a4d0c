"""Generate a synthetic marker scene and look at the raw event stream.

Renders one millisecond of events as a red/blue polarity raster plus the
per-marker event rate over time. Run from the repo root:

    python demos/01_simulate_and_inspect.py
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blinklabel import EventStream, build_scenario, simulate, write_event_stream

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = build_scenario("wave", seed=7, duration_us=2_000_000, noise_rate=2e-3)
header, events, gt = simulate(scene)
print(f"scene 'wave': {len(events)} events over "
      f"{scene.duration_us / 1e6:.1f}s, {len(scene.leds)} markers")

write_event_stream(header, events, OUT / "wave.fevt")
print(f"stream written to {OUT / 'wave.fevt'}")

# one event frame as a polarity raster
tick = 500
m = (events.t >= tick * 1000) & (events.t < (tick + 1) * 1000)
fig, axes = plt.subplots(1, 2, figsize=(13, 4.5))
axes[0].scatter(events.x[m & (events.p == 1)], events.y[m & (events.p == 1)],
                s=4, c="red", label="positive")
axes[0].scatter(events.x[m & (events.p == 0)], events.y[m & (events.p == 0)],
                s=4, c="blue", label="negative")
axes[0].set_xlim(0, header.sensor_width)
axes[0].set_ylim(header.sensor_height, 0)
axes[0].set_title(f"event frame at t = {tick} ms")
axes[0].legend(loc="lower right")

# events per millisecond
counts = np.bincount(events.t // 1000, minlength=2000)
axes[1].plot(counts, lw=0.5)
axes[1].set_xlabel("tick (ms)")
axes[1].set_ylabel("events / ms")
axes[1].set_title("stream density")
fig.tight_layout()
fig.savefig(OUT / "01_raster.png", dpi=110)
print(f"figure saved to {OUT / '01_raster.png'}")
