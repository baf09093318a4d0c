import pytest

from blinklabel.events import EventStream
from blinklabel.evaluate import (ABLATION_FLAGS, ablation_run, report_records,
                                 report_table)
from blinklabel.labels import labels_from_ground_truth
from blinklabel.scenarios import build_scenario
from blinklabel.simulate import simulate


@pytest.fixture(scope="module")
def ontime_run():
    scene = build_scenario("ambiguous_ontime", seed=1, duration_us=4_000_000,
                           noise_rate=2e-3)
    hdr, ev, gt = simulate(scene)
    reports = ablation_run(EventStream(hdr, ev), labels_from_ground_truth(gt),
                           list(scene.leds))
    return reports


class TestAblationRun:
    def test_all_rows_present(self, ontime_run):
        assert set(ontime_run) == {"complete", *ABLATION_FLAGS}

    def test_complete_at_least_as_precise_without_period(self, ontime_run):
        # equal on-times, different periods: dropping the period term can
        # only hurt
        assert ontime_run["complete"].precision >= \
            ontime_run["no_period_distance"].precision

    def test_complete_at_least_as_precise_without_ontime(self, ontime_run):
        assert ontime_run["complete"].precision >= \
            ontime_run["no_time_distance"].precision

    def test_unknown_flag_rejected(self):
        scene = build_scenario("static", seed=0, duration_us=100_000)
        hdr, ev, gt = simulate(scene)
        with pytest.raises(ValueError):
            ablation_run(EventStream(hdr, ev), labels_from_ground_truth(gt),
                         list(scene.leds), flags=("no_magic",))

    def test_report_formats(self, ontime_run):
        text = report_table(ontime_run)
        assert "complete" in text and "precision" in text
        records = report_records(ontime_run)
        assert records["complete"]["tp"] == ontime_run["complete"].tp
        assert "per_led" in records["complete"]
