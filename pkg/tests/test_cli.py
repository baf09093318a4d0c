import hashlib
import json
from pathlib import Path

import pytest

from blinklabel.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    rc = run(["simulate", "static", "-o", d / "s.fevt",
              "--labels", d / "gt.flbl", "--leds-out", d / "leds.cfg",
              "--duration-s", "1.0", "--seed", "3"])
    assert rc == 0
    return d


class TestSimulate:
    def test_deterministic_output(self, tmp_path):
        for name in ("a", "b"):
            rc = run(["simulate", "wave", "-o", tmp_path / f"{name}.fevt",
                      "--duration-s", "0.3", "--seed", "5"])
            assert rc == 0
        ha = hashlib.sha256((tmp_path / "a.fevt").read_bytes()).hexdigest()
        hb = hashlib.sha256((tmp_path / "b.fevt").read_bytes()).hexdigest()
        assert ha == hb

    def test_scene_file_input(self, tmp_path):
        rc = run(["simulate", "kick", "-o", tmp_path / "k.fevt",
                  "--duration-s", "0.2", "--scene-out", tmp_path / "k.yaml"])
        assert rc == 0
        rc = run(["simulate", tmp_path / "k.yaml", "-o", tmp_path / "k2.fevt"])
        assert rc == 0
        assert (tmp_path / "k.fevt").read_bytes() == \
            (tmp_path / "k2.fevt").read_bytes()

    def test_sprint_meta(self, tmp_path):
        rc = run(["simulate", "sprint_crossing", "-o", tmp_path / "s.fevt",
                  "--duration-s", "0.5", "--meta", tmp_path / "m.yaml"])
        assert rc == 0
        import yaml
        meta = yaml.safe_load((tmp_path / "m.yaml").read_text())
        assert "crossing_time_us" in meta["metadata"]

    def test_unknown_scenario_exit_1(self, tmp_path, capsys):
        rc = run(["simulate", "nope.yaml", "-o", tmp_path / "x.fevt"])
        assert rc == 1

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["simulate"])  # missing -o and scene
        assert exc.value.code == 2


class TestAnnotateEvalChain:
    def test_full_chain_meets_targets(self, workdir, capsys):
        rc = run(["annotate", workdir / "s.fevt", "--leds", workdir / "leds.cfg",
                  "-o", workdir / "pred.flbl",
                  "--diagnostics", workdir / "diag.json"])
        assert rc == 0
        rc = run(["eval", "--pred", workdir / "pred.flbl",
                  "--gt", workdir / "gt.flbl", "--tol", "1.0",
                  "--report", workdir / "rep.json",
                  "--min-precision", "0.999", "--min-recall", "0.98"])
        assert rc == 0
        rep = json.loads((workdir / "rep.json").read_text())
        assert rep["precision"] >= 0.999
        assert rep["recall"] >= 0.98
        diag = json.loads((workdir / "diag.json").read_text())
        assert diag["frames"] == 1000

    def test_annotate_deterministic(self, workdir):
        rc = run(["annotate", workdir / "s.fevt", "--leds", workdir / "leds.cfg",
                  "-o", workdir / "pred2.flbl"])
        assert rc == 0
        assert (workdir / "pred.flbl").read_bytes() == \
            (workdir / "pred2.flbl").read_bytes()

    def test_both_weights_zero_exit_1(self, workdir, capsys):
        rc = run(["annotate", workdir / "s.fevt", "--leds", workdir / "leds.cfg",
                  "-o", workdir / "x.flbl",
                  "--no-time-distance", "--no-period-distance"])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error: BothWeightsZero")

    def test_eval_threshold_failure_exit_1(self, workdir, capsys):
        rc = run(["eval", "--pred", workdir / "pred.flbl",
                  "--gt", workdir / "gt.flbl",
                  "--min-precision", "1.1"])
        assert rc == 1
        assert "error: threshold" in capsys.readouterr().err


class TestTiming:
    def test_crossing_time(self, tmp_path, capsys):
        d = tmp_path
        rc = run(["simulate", "sprint_crossing", "-o", d / "s.fevt",
                  "--labels", d / "gt.flbl", "--leds-out", d / "leds.cfg",
                  "--meta", d / "m.yaml", "--duration-s", "8", "--seed", "1"])
        assert rc == 0
        rc = run(["annotate", d / "s.fevt", "--leds", d / "leds.cfg",
                  "-o", d / "pred.flbl"])
        assert rc == 0
        import yaml
        meta = yaml.safe_load((d / "m.yaml").read_text())
        truth = meta["metadata"]["crossing_time_us"]
        line = meta["metadata"]["line"]
        capsys.readouterr()
        rc = run(["timing", "--labels", d / "pred.flbl",
                  "--line", "640,200,640,700", "--joint", line["joint"],
                  "--reference", str(truth)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "t_cross_us=" in out
        err_ms = float(out.split("error_ms=")[1])
        assert err_ms <= 2.0

    def test_no_crossing_exit_1(self, workdir, capsys):
        rc = run(["timing", "--labels", workdir / "pred.flbl",
                  "--line", "0,0,0,720", "--joint", "led01"])
        assert rc == 1
        assert "NoCrossing" in capsys.readouterr().err
