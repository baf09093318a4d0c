"""Decode blink signatures from clustered events.

Clusters one frame, builds each cluster's polarity sequence, and compares
the recovered on/off times against the LED table.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blinklabel import (build_scenario, dbscan, estimate_signature,
                        partition_into_frames, polarity_sequence, simulate,
                        smooth)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = build_scenario("static", seed=1, duration_us=100_000, noise_rate=0.0)
header, events, _ = simulate(scene)

# decode over a 20 ms slice so every marker shows dozens of transitions
window = (events.t >= 0) & (events.t < 20_000)
frames = partition_into_frames(events.slice(0, int(window.sum())), 20_000)
clusters = dbscan(frames[0], width=header.sensor_width,
                  height=header.sensor_height)
print(f"{len(clusters)} clusters in the first 20 ms")

nominal = {(led.on_time_us, led.off_time_us): led.id for led in scene.leds}
rows = []
for c in clusters:
    seq = smooth(polarity_sequence(c.events, 25), 3)
    sig = estimate_signature(seq)
    rows.append((c.centroid, sig))
    key = (round(sig.mean_on_us / 50) * 50, round(sig.mean_off_us / 50) * 50)
    led = nominal.get(key, "?")
    print(f"  cluster at ({c.centroid[0]:7.1f}, {c.centroid[1]:7.1f})  "
          f"on {sig.mean_on_us:6.1f} us  off {sig.mean_off_us:6.1f} us  "
          f"period {sig.period_us:6.1f} us  -> {led}")

fig, ax = plt.subplots(figsize=(6, 5))
ax.scatter([s.mean_on_us for _, s in rows], [s.mean_off_us for _, s in rows],
           c="tab:green", label="measured")
ax.scatter([led.on_time_us for led in scene.leds],
           [led.off_time_us for led in scene.leds],
           marker="x", c="black", label="nominal")
ax.set_xlabel("on-time (us)")
ax.set_ylabel("off-time (us)")
ax.set_title("recovered blink signatures vs LED table")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "02_signatures.png", dpi=110)
print(f"figure saved to {OUT / '02_signatures.png'}")
