"""Review-session storage: one directory per annotated stream.

Layout:
    stream.fevt        immutable event stream
    leds.cfg           LED table
    config.yaml        pipeline config used for the auto labels
    labels.flbl        auto labels (never mutated)
    corrections.log    append-only correction records, replayable
    index/             per-millisecond lookup tables (numpy files)

The index holds event offsets per tick plus flattened per-cluster records
(centroid, bbox, signature, matched LED, cost), so the service can answer
frame and cluster queries for any tick without touching the pipeline.
Arrays are memory-mapped on load; a one-hour stream stays on disk.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BlinkLabelError
from .events import _HEADER_DTYPE, _RECORD_DTYPE, read_event_stream
from .labels import (CorrectionSet, apply_corrections, read_corrections,
                     read_labels, write_labels)
from .leds import led_table_hash, load_led_table, save_led_table
from .pipeline import PipelineConfig, annotate_stream, load_config

INDEX_VERSION = 1
_HEADER_BYTES = 4 + _HEADER_DTYPE.itemsize

US_PER_MS = 1_000


class SessionError(BlinkLabelError):
    pass


@dataclass
class Session:
    """Open handle over a session directory; read paths are memory-mapped."""

    root: Path
    meta: dict
    events: np.ndarray  # record array view of stream.fevt
    offsets: np.ndarray  # event offset per tick, len n_ticks + 1
    cluster_starts: np.ndarray  # cluster offset per tick
    clusters: dict  # column arrays, flattened over ticks

    @property
    def n_ticks(self) -> int:
        return int(self.meta["n_ticks"])

    def version(self) -> int:
        """Number of correction records applied so far (optimistic lock)."""
        path = self.root / "corrections.log"
        if not path.exists():
            return 0
        return max(0, len(path.read_text().splitlines()) - 1)

    def corrections(self) -> CorrectionSet:
        path = self.root / "corrections.log"
        if not path.exists():
            return CorrectionSet()
        return read_corrections(path)

    def auto_labels(self):
        return read_labels(self.root / "labels.flbl")

    def corrected_labels(self):
        return apply_corrections(self.auto_labels(), self.corrections(),
                                 cluster_centroid=self.cluster_centroid)

    def cluster_centroid(self, t_ms: int, ref: int):
        lo = int(self.cluster_starts[t_ms])
        hi = int(self.cluster_starts[t_ms + 1])
        if not 0 <= ref < hi - lo:
            raise SessionError(f"tick {t_ms} has no cluster {ref}")
        return (float(self.clusters["cx"][lo + ref]),
                float(self.clusters["cy"][lo + ref]))

    def events_in_span(self, t0_ms: int, t1_ms: int):
        lo = int(self.offsets[t0_ms])
        hi = int(self.offsets[t1_ms])
        return self.events[lo:hi]

    def clusters_at(self, t_ms: int) -> list[dict]:
        lo = int(self.cluster_starts[t_ms])
        hi = int(self.cluster_starts[t_ms + 1])
        c = self.clusters
        led_ids = self.meta["led_ids"]
        out = []
        for i in range(lo, hi):
            li = int(c["matched_led"][i])
            sig = None
            if c["sig_valid"][i]:
                sig = {
                    "mean_on_us": float(c["sig_on"][i]),
                    "mean_off_us": float(c["sig_off"][i]),
                    "period_us": float(c["sig_on"][i] + c["sig_off"][i]),
                    "period_pos_us": float(c["sig_tp"][i]),
                    "period_neg_us": float(c["sig_tn"][i]),
                }
            out.append({
                "id": i - lo,
                "centroid": [float(c["cx"][i]), float(c["cy"][i])],
                "bbox": [int(v) for v in c["bbox"][i]],
                "size": int(c["size"][i]),
                "signature": sig,
                "outlier": bool(c["outlier"][i]),
                "matched_led": led_ids[li] if li >= 0 else None,
                "cost": float(c["cost"][i]) if li >= 0 else None,
            })
        return out


def build_session(root: str | Path, stream_path: str | Path,
                  leds_path: str | Path,
                  config: PipelineConfig | None = None,
                  force: bool = False) -> Path:
    """Create (or rebuild) a session directory from a stream and LED table."""
    root = Path(root)
    if root.exists() and (root / "meta.json").exists() and not force:
        return root
    root.mkdir(parents=True, exist_ok=True)
    (root / "index").mkdir(exist_ok=True)
    if Path(stream_path).resolve() != (root / "stream.fevt").resolve():
        shutil.copyfile(stream_path, root / "stream.fevt")
    leds = load_led_table(leds_path)
    save_led_table(leds, root / "leds.cfg")
    config = config or PipelineConfig()
    config.to_yaml(root / "config.yaml")

    stream = read_event_stream(root / "stream.fevt")
    result = annotate_stream(stream, leds, config, collect_clusters=True)
    write_labels(result.labels, root / "labels.flbl")

    n_ticks = result.labels.n_ticks
    bounds = np.arange(n_ticks + 1, dtype=np.int64) * US_PER_MS + stream.header.t_start
    offsets = np.searchsorted(stream.events.t, bounds).astype(np.int64)
    np.save(root / "index" / "offsets.npy", offsets)

    frames = result.frame_records
    np.save(root / "index" / "cluster_starts.npy", frames["tick_starts"])
    for key in ("cx", "cy", "bbox", "size", "sig_on", "sig_off", "sig_tp",
                "sig_tn", "sig_valid", "outlier", "matched_led", "cost"):
        np.save(root / "index" / f"{key}.npy", frames[key])

    meta = {
        "index_version": INDEX_VERSION,
        "n_ticks": n_ticks,
        "sensor_width": stream.header.sensor_width,
        "sensor_height": stream.header.sensor_height,
        "t_start": stream.header.t_start,
        "t_end": stream.header.t_end,
        "event_count": stream.header.event_count,
        "led_ids": [led.id for led in leds],
        "led_table": [[led.id, led.on_time_us, led.off_time_us, led.body_site]
                      for led in leds],
        "led_table_hash": led_table_hash(leds),
        "config_hash": config.config_hash(),
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=1))
    if not (root / "corrections.log").exists():
        (root / "corrections.log").write_text("FCOR 1\n")
    return root


def open_session(root: str | Path) -> Session:
    root = Path(root)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise SessionError(f"{root} is not a session directory (no meta.json)")
    meta = json.loads(meta_path.read_text())
    if meta.get("index_version") != INDEX_VERSION:
        raise SessionError("session index version mismatch; rebuild with --reindex")
    events = np.memmap(root / "stream.fevt", dtype=_RECORD_DTYPE, mode="r",
                       offset=_HEADER_BYTES)
    idx = root / "index"
    offsets = np.load(idx / "offsets.npy", mmap_mode="r")
    cluster_starts = np.load(idx / "cluster_starts.npy", mmap_mode="r")
    clusters = {
        key: np.load(idx / f"{key}.npy", mmap_mode="r")
        for key in ("cx", "cy", "bbox", "size", "sig_on", "sig_off", "sig_tp",
                    "sig_tn", "sig_valid", "outlier", "matched_led", "cost")
    }
    return Session(root=root, meta=meta, events=events, offsets=offsets,
                   cluster_starts=cluster_starts, clusters=clusters)


def raster_runs(events_slice, width: int) -> list[list[int]]:
    """Run-length encode per-pixel polarity counts of one tick.

    Returns [start_pixel, length, positive, negative] rows over the
    row-major pixel index; all-zero spans are omitted.
    """
    if len(events_slice) == 0:
        return []
    code = events_slice["y"].astype(np.int64) * width \
        + events_slice["x"].astype(np.int64)
    pol = events_slice["p"]
    order = np.argsort(code, kind="stable")
    code = code[order]
    pol = pol[order]
    uniq, start = np.unique(code, return_index=True)
    counts = np.diff(np.append(start, len(code)))
    pos = np.add.reduceat(pol.astype(np.int64), start)
    neg = counts - pos
    runs = []
    k = 0
    n = len(uniq)
    while k < n:
        j = k
        while (j + 1 < n and uniq[j + 1] == uniq[j] + 1
               and pos[j + 1] == pos[k] and neg[j + 1] == neg[k]):
            j += 1
        runs.append([int(uniq[k]), int(j - k + 1), int(pos[k]), int(neg[k])])
        k = j + 1
    return runs
