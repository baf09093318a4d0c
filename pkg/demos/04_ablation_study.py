"""Stage ablations on the duty-cycle-ambiguous scene.

The two markers share a 400 us period and differ only in duty cycle, with
occlusions, hidden crossings, and blinking distractor lamps. Each pipeline
stage covers a distinct failure channel, so knocking one out shows up as a
specific precision drop while recall stays high.
"""

import time

from blinklabel import EventStream, build_scenario, simulate
from blinklabel.evaluate import ablation_run, report_table
from blinklabel.labels import labels_from_ground_truth

scene = build_scenario("ambiguous_duty", seed=0, duration_us=10_000_000,
                       noise_rate=2e-3)
header, events, gt = simulate(scene)
print(f"ambiguous_duty: {len(events)} events, "
      f"{len(scene.occlusions) // 2} occlusion windows, "
      f"{len(scene.distractors)} distractors")

t0 = time.perf_counter()
reports = ablation_run(EventStream(header, events),
                       labels_from_ground_truth(gt), list(scene.leds))
print(f"\n{report_table(reports)}\n")
print(f"five pipeline variants in {time.perf_counter() - t0:.1f}s")
print("reading: losing the on-off time distance collapses identity "
      "(precision) while joints are still found (recall).")
