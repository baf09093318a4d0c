"""Full pipeline run: stream -> millisecond labels -> precision/recall.

Also plots the recovered wrist trajectory against ground truth and a 20 Hz
linear interpolation, which visibly cuts the corners of fast motion.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blinklabel import EventStream, annotate_stream, build_scenario, \
    precision_recall, simulate
from blinklabel.evaluate import trajectory_from_labels
from blinklabel.labels import labels_from_ground_truth

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = build_scenario("wave", seed=4, duration_us=4_000_000, noise_rate=2e-3)
header, events, gt = simulate(scene)
result = annotate_stream(EventStream(header, events), list(scene.leds))
print("diagnostics:", result.diagnostics.as_dict())

report = precision_recall(result.labels, labels_from_ground_truth(gt), 1.0)
print(f"precision {report.precision:.5f}  recall {report.recall:.5f}  "
      f"(tp {report.tp}, fp {report.fp}, fn {report.fn})")

wrist = scene.metadata["moving_joint"]
gi = gt.index_of(wrist)
t_ms, x, y = trajectory_from_labels(result.labels, wrist)
lo = np.arange(0, gt.n_ticks, 50)  # 20 Hz samples
interp = np.interp(np.arange(gt.n_ticks), lo, gt.x[gi, lo])

fig, axes = plt.subplots(2, 1, figsize=(11, 6), sharex=True)
axes[0].plot(gt.x[gi], c="green", lw=1.2, label="1000 Hz truth")
axes[0].plot(t_ms, x, c="tab:orange", lw=0.7, ls="--", label="recovered")
axes[0].plot(interp, c="red", lw=1.0, alpha=0.6, label="20 Hz interpolation")
axes[0].set_ylabel("wrist x (px)")
axes[0].legend(loc="upper right")
axes[1].plot(t_ms, np.hypot(x - gt.x[gi, t_ms], y - gt.y[gi, t_ms]),
             c="tab:orange", lw=0.6, label="recovered error")
axes[1].plot(np.abs(interp - gt.x[gi]), c="red", lw=0.8, alpha=0.6,
             label="20 Hz interpolation error")
axes[1].set_xlabel("tick (ms)")
axes[1].set_ylabel("error (px)")
axes[1].legend(loc="upper right")
fig.tight_layout()
fig.savefig(OUT / "03_trajectory.png", dpi=110)
print(f"figure saved to {OUT / '03_trajectory.png'}")
