import numpy as np
import pytest

from blinklabel.errors import TickOutOfRange, UnknownCluster, UnknownLed
from blinklabel.labels import (Correction, CorrectionSet, LabelSource,
                               LabelTable, apply_corrections,
                               labels_from_ground_truth, read_corrections,
                               read_labels, write_corrections, write_labels)


def table(rows, led_ids=("a", "b"), n_ticks=100):
    idx = {lid: i for i, lid in enumerate(led_ids)}
    return LabelTable(
        led_ids=led_ids,
        t_ms=np.array([r[0] for r in rows], dtype=np.int64),
        led_idx=np.array([idx[r[1]] for r in rows], dtype=np.int64),
        x=np.array([r[2] for r in rows], dtype=np.float64),
        y=np.array([r[3] for r in rows], dtype=np.float64),
        source=np.array([r[4] if len(r) > 4 else 0 for r in rows],
                        dtype=np.int8),
        n_ticks=n_ticks, led_table_hash="h1", config_hash="h2",
    ).sort()


class TestLabelFile:
    def test_round_trip(self, tmp_path):
        t = table([(0, "a", 1.25, 2.5), (0, "b", 3.0, 4.0), (5, "a", 9.0, 9.0)])
        data = write_labels(t)
        back = read_labels(data)
        assert back.led_ids == ("a", "b")
        assert back.n_ticks == 100
        assert list(back.t_ms) == [0, 0, 5]
        assert back.led_table_hash == "h1"
        assert back.config_hash == "h2"
        assert np.allclose(back.x, t.x)

    def test_canonical_bytes(self):
        t = table([(3, "b", 1.0, 2.0), (1, "a", 5.0, 6.0)])
        assert write_labels(t) == write_labels(t.sort())

    def test_frames_view(self):
        t = table([(0, "a", 1.0, 2.0), (2, "b", 3.0, 4.0)], n_ticks=3)
        frames = t.to_frames()
        assert len(frames) == 3
        assert frames[0].joints["a"] == (1.0, 2.0, LabelSource.AUTO)
        assert frames[1].joints == {}

    def test_ground_truth_shares_schema(self):
        from blinklabel.scenarios import build_scenario
        from blinklabel.simulate import ground_truth_labels
        scene = build_scenario("static", seed=0, duration_us=50_000)
        gt = labels_from_ground_truth(ground_truth_labels(scene))
        back = read_labels(write_labels(gt))
        assert len(back) == len(gt)


class TestCorrections:
    def base(self):
        return table([(42, "a", 10.0, 10.0), (42, "b", 20.0, 20.0),
                      (43, "a", 11.0, 10.0)])

    def test_move(self):
        labels = self.base()
        cs = CorrectionSet((Correction(42, "a", "move", x=100.0, y=50.0,
                                       author="ann", created_at=1),))
        out = apply_corrections(labels, cs)
        i = np.nonzero((out.t_ms == 42) & (out.led_idx == 0))[0][0]
        assert out.x[i] == 100.0 and out.y[i] == 50.0
        assert out.source[i] == 1  # corrected

    def test_empty_set_identity(self):
        labels = self.base()
        out = apply_corrections(labels, CorrectionSet())
        assert write_labels(out) == write_labels(labels)

    def test_delete_then_move_move_wins(self):
        labels = self.base()
        cs = CorrectionSet((
            Correction(42, "a", "delete", author="ann", created_at=1),
            Correction(42, "a", "move", x=7.0, y=8.0, author="ann",
                       created_at=2),
        ))
        out = apply_corrections(labels, cs)
        i = np.nonzero((out.t_ms == 42) & (out.led_idx == 0))[0]
        assert len(i) == 1
        assert out.x[i[0]] == 7.0

    def test_delete_removes(self):
        labels = self.base()
        cs = CorrectionSet((Correction(42, "b", "delete", author="x",
                                       created_at=1),))
        out = apply_corrections(labels, cs)
        assert not ((out.t_ms == 42) & (out.led_idx == 1)).any()

    def test_idempotent(self):
        labels = self.base()
        cs = CorrectionSet((
            Correction(42, "a", "move", x=1.0, y=2.0, author="x", created_at=1),
            Correction(43, "a", "delete", author="x", created_at=2),
        ))
        once = apply_corrections(labels, cs)
        twice = apply_corrections(once, cs)
        assert write_labels(once) == write_labels(twice)

    def test_disjoint_sets_commute(self):
        labels = self.base()
        c1 = CorrectionSet((Correction(42, "a", "move", x=1.0, y=2.0,
                                       author="x", created_at=1),))
        c2 = CorrectionSet((Correction(42, "b", "delete", author="y",
                                       created_at=2),))
        ab = apply_corrections(apply_corrections(labels, c1), c2)
        ba = apply_corrections(apply_corrections(labels, c2), c1)
        assert write_labels(ab) == write_labels(ba)

    def test_move_can_insert_missing_label(self):
        labels = self.base()
        cs = CorrectionSet((Correction(50, "a", "move", x=5.0, y=5.0,
                                       author="x", created_at=1),))
        out = apply_corrections(labels, cs)
        assert ((out.t_ms == 50) & (out.led_idx == 0)).any()

    def test_unknown_led(self):
        with pytest.raises(UnknownLed):
            apply_corrections(self.base(), CorrectionSet(
                (Correction(42, "zz", "delete", author="x", created_at=1),)))

    def test_tick_out_of_range(self):
        with pytest.raises(TickOutOfRange):
            apply_corrections(self.base(), CorrectionSet(
                (Correction(1000, "a", "delete", author="x", created_at=1),)))

    def test_reassign_needs_cluster_data(self):
        cs = CorrectionSet((Correction(42, "a", "reassign", cluster_ref=1,
                                       author="x", created_at=1),))
        with pytest.raises(UnknownCluster):
            apply_corrections(self.base(), cs)
        out = apply_corrections(self.base(), cs,
                                cluster_centroid=lambda t, ref: (55.0, 66.0))
        i = np.nonzero((out.t_ms == 42) & (out.led_idx == 0))[0][0]
        assert out.x[i] == 55.0

    def test_correction_file_round_trip(self, tmp_path):
        cs = CorrectionSet((
            Correction(42, "a", "move", x=1.5, y=2.5, author="ann",
                       created_at=111),
            Correction(43, "b", "reassign", cluster_ref=2, author="bob",
                       created_at=222),
            Correction(44, "a", "delete", author="ann", created_at=333),
        ))
        data = write_corrections(cs)
        back = read_corrections(data)
        assert back.records[0].x == 1.5
        assert back.records[1].cluster_ref == 2
        assert back.records[2].action == "delete"
        assert back.records[2].created_at == 333
