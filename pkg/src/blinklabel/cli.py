"""Command-line entry points.

Subcommands: simulate, annotate, eval, timing, serve. Usage errors exit 2
(argparse); validation failures exit 1 with a single machine-parsable
``error: <kind>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .errors import BlinkLabelError
from .events import (EventStream, read_event_stream, read_events_csv,
                     write_event_stream)
from .evaluate import (LineSpec, detect_crossing, downsample_labels,
                       precision_recall, report_records, timing_error,
                       trajectory_from_labels)
from .labels import labels_from_ground_truth, read_labels, write_labels
from .leds import load_led_table, save_led_table, led_table_hash
from .pipeline import (PipelineConfig, annotate_stream, apply_ablation,
                       load_config)
from .scenarios import SCENARIO_NAMES, build_scenario
from .simulate import load_scene, save_scene, simulate

US_PER_S = 1_000_000


def _read_stream(path: str) -> EventStream:
    if path.endswith(".csv"):
        return read_events_csv(path)
    return read_event_stream(path)


def cmd_simulate(args) -> int:
    if args.scene in SCENARIO_NAMES:
        scene = build_scenario(
            args.scene, seed=args.seed,
            duration_us=int(args.duration_s * US_PER_S),
            noise_rate=args.noise_rate,
            events_per_edge=args.events_per_edge)
    else:
        scene = load_scene(args.scene)
        if args.seed is not None:
            scene = scene.with_seed(args.seed)
    header, events, gt = simulate(scene)
    write_event_stream(header, events, args.out)
    print(f"wrote {len(events)} events to {args.out}")
    if args.labels:
        table = labels_from_ground_truth(gt, led_table_hash(list(scene.leds)))
        write_labels(table, args.labels)
        print(f"wrote {len(table)} ground-truth labels to {args.labels}")
    if args.meta:
        Path(args.meta).write_text(yaml.safe_dump({
            "name": scene.name, "seed": scene.seed,
            "duration_us": scene.duration_us,
            "occlusions": [list(o) for o in scene.occlusions],
            "metadata": scene.metadata,
        }, sort_keys=False))
    if args.leds_out:
        save_led_table(list(scene.leds), args.leds_out)
    if args.scene_out:
        save_scene(scene, args.scene_out)
    return 0


def cmd_annotate(args) -> int:
    stream = _read_stream(args.stream)
    leds = load_led_table(args.leds)
    config = load_config(args.config) if args.config else PipelineConfig()
    config = apply_ablation(
        config,
        no_time_distance=args.no_time_distance,
        no_period_distance=args.no_period_distance,
        no_outlier_filter=args.no_outlier_filter,
        no_tracking=args.no_tracking,
    )
    if args.emit_coasted:
        from dataclasses import replace
        config = replace(config, emit_coasted=True)
    result = annotate_stream(stream, leds, config)
    write_labels(result.labels, args.out)
    d = result.diagnostics
    print(f"wrote {len(result.labels)} labels to {args.out} "
          f"({d.frames} frames, {d.clusters} clusters, "
          f"{d.outliers_dropped} outliers dropped, {d.matched} matches)")
    if args.diagnostics:
        Path(args.diagnostics).write_text(json.dumps(d.as_dict(), indent=1))
    return 0


def cmd_eval(args) -> int:
    pred = read_labels(args.pred)
    gt = read_labels(args.gt)
    rep = precision_recall(pred, gt, args.tol)
    print(f"{'metric':<12} {'value':>10}")
    p = "n/a" if rep.precision is None else f"{rep.precision:.4f}"
    r = "n/a" if rep.recall is None else f"{rep.recall:.4f}"
    print(f"{'precision':<12} {p:>10}")
    print(f"{'recall':<12} {r:>10}")
    print(f"{'tp':<12} {rep.tp:>10}")
    print(f"{'fp':<12} {rep.fp:>10}")
    print(f"{'fn':<12} {rep.fn:>10}")
    if args.report:
        Path(args.report).write_text(json.dumps(
            report_records({"eval": rep})["eval"], indent=1, sort_keys=True))
    failed = []
    if args.min_precision is not None and (rep.precision or 0) < args.min_precision:
        failed.append(f"precision {p} < {args.min_precision}")
    if args.min_recall is not None and (rep.recall or 0) < args.min_recall:
        failed.append(f"recall {r} < {args.min_recall}")
    if failed:
        print("error: threshold: " + "; ".join(failed), file=sys.stderr)
        return 1
    return 0


def cmd_timing(args) -> int:
    table = read_labels(args.labels)
    if args.rate_hz:
        table = downsample_labels(table, args.rate_hz)
    x0, y0, x1, y1 = (float(v) for v in args.line.split(","))
    line = LineSpec(p0=(x0, y0), p1=(x1, y1), joint=args.joint,
                    t_start_us=args.start,
                    segment_bounded=not args.infinite_line)
    t_ms, xs, ys = trajectory_from_labels(table, args.joint)
    # labels describe tick midpoints
    t_cross = detect_crossing((t_ms + 0.5, xs, ys), line)
    out = f"t_cross_us={t_cross:.1f}"
    if args.reference is not None:
        out += f" error_ms={timing_error(t_cross, args.reference):.3f}"
    print(out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever
    from .session import build_session
    session_dir = Path(args.session)
    if args.stream:
        config = load_config(args.config) if args.config else PipelineConfig()
        build_session(session_dir, args.stream,
                      args.leds or session_dir / "leds.cfg",
                      config, force=args.reindex)
    port = int(os.environ.get("BLINKLABEL_PORT", args.port))
    serve_forever(session_dir, port, args.frontend)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="blinklabel",
        description="Blinking-LED marker labeling for event-camera streams")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic scene")
    p.add_argument("scene", help=f"preset ({', '.join(SCENARIO_NAMES)}) "
                                 "or a scene YAML file")
    p.add_argument("-o", "--out", required=True, help="output .fevt path")
    p.add_argument("--labels", help="write ground-truth labels (.flbl)")
    p.add_argument("--meta", help="write scene metadata YAML")
    p.add_argument("--leds-out", help="write the scene LED table")
    p.add_argument("--scene-out", help="write the fully resolved scene YAML")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-s", type=float, default=10.0)
    p.add_argument("--noise-rate", type=float, default=2e-3,
                   help="background events per pixel per second")
    p.add_argument("--events-per-edge", type=int, default=5)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("annotate", help="run the labeling pipeline")
    p.add_argument("stream", help="input .fevt (or .csv) event stream")
    p.add_argument("--leds", required=True, help="LED table file")
    p.add_argument("-o", "--out", required=True, help="output labels (.flbl)")
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--no-time-distance", action="store_true")
    p.add_argument("--no-period-distance", action="store_true")
    p.add_argument("--no-outlier-filter", action="store_true")
    p.add_argument("--no-tracking", action="store_true")
    p.add_argument("--emit-coasted", action="store_true")
    p.add_argument("--diagnostics", help="write per-stage counts JSON")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("eval", help="precision/recall against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--tol", type=float, default=1.0)
    p.add_argument("--report", help="write machine-readable JSON report")
    p.add_argument("--min-precision", type=float)
    p.add_argument("--min-recall", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("timing", help="line-crossing time of one joint")
    p.add_argument("--labels", required=True)
    p.add_argument("--line", required=True, metavar="X0,Y0,X1,Y1")
    p.add_argument("--joint", required=True)
    p.add_argument("--start", type=int, default=0, help="search start (us)")
    p.add_argument("--reference", type=float,
                   help="reference crossing time (us) to report error against")
    p.add_argument("--rate-hz", type=float,
                   help="downsample labels to this rate first")
    p.add_argument("--infinite-line", action="store_true",
                   help="ignore segment bounds")
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("serve", help="run the annotation review service")
    p.add_argument("--session", required=True, help="session directory")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--stream", help="build the session from this stream")
    p.add_argument("--leds", help="LED table (with --stream)")
    p.add_argument("--config", help="pipeline config YAML (with --stream)")
    p.add_argument("--reindex", action="store_true",
                   help="rebuild the session index")
    p.add_argument("--frontend", help="static frontend directory override")
    p.set_defaults(func=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BlinkLabelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: FileNotFound: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
