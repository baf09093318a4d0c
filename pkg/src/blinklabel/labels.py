"""Millisecond label tables, the .flbl text format, and human corrections.

A label is one (tick, led) -> sub-pixel position record with a source tag:
auto (pipeline), corrected (human), or coasted (predicted during dropout,
off by default). Files are canonical: fixed float formatting and sorted
records, so identical inputs produce identical bytes.

The .flbl layout is line-oriented:

    FLBL 1
    # leds <hash>        LED table fingerprint
    # config <hash>      pipeline config fingerprint
    # ticks <n>
    # led_ids a,b,c      table order
    <t_ms> <led_id> <x> <y> <source>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TickOutOfRange, UnknownCluster, UnknownLed
from .simulate import GroundTruthLabels


class LabelSource(Enum):
    AUTO = "auto"
    CORRECTED = "corrected"
    COASTED = "coasted"


_SOURCE_CODE = {LabelSource.AUTO: 0, LabelSource.CORRECTED: 1, LabelSource.COASTED: 2}
_CODE_SOURCE = {v: k for k, v in _SOURCE_CODE.items()}


@dataclass(frozen=True)
class LabelFrame:
    """Joints of one millisecond tick: led_id -> (x, y, source)."""

    t_ms: int
    joints: dict[str, tuple[float, float, LabelSource]] = field(default_factory=dict)


@dataclass
class LabelTable:
    """Columnar label store: one row per (tick, led) pair.

    Rows are kept sorted by (t_ms, led_id). ``led_ids`` fixes the id order
    used by ``led_idx``.
    """

    led_ids: tuple[str, ...]
    t_ms: np.ndarray
    led_idx: np.ndarray
    x: np.ndarray
    y: np.ndarray
    source: np.ndarray
    n_ticks: int
    led_table_hash: str = ""
    config_hash: str = ""

    def __len__(self) -> int:
        return len(self.t_ms)

    def sort(self) -> "LabelTable":
        ids = np.array(self.led_ids, dtype=object)[self.led_idx]
        order = np.lexsort((ids, self.t_ms))
        return LabelTable(self.led_ids, self.t_ms[order], self.led_idx[order],
                          self.x[order], self.y[order], self.source[order],
                          self.n_ticks, self.led_table_hash, self.config_hash)

    def to_frames(self) -> list[LabelFrame]:
        frames = [LabelFrame(t_ms=k) for k in range(self.n_ticks)]
        for i in range(len(self.t_ms)):
            frames[int(self.t_ms[i])].joints[self.led_ids[int(self.led_idx[i])]] = (
                float(self.x[i]), float(self.y[i]),
                _CODE_SOURCE[int(self.source[i])],
            )
        return frames

    @classmethod
    def from_frames(cls, frames: list[LabelFrame], led_ids: tuple[str, ...],
                    led_table_hash: str = "", config_hash: str = "") -> "LabelTable":
        idx = {lid: i for i, lid in enumerate(led_ids)}
        rows = [
            (f.t_ms, idx[lid], x, y, _SOURCE_CODE[src])
            for f in frames for lid, (x, y, src) in f.joints.items()
        ]
        t = np.array([r[0] for r in rows], dtype=np.int64)
        li = np.array([r[1] for r in rows], dtype=np.int64)
        return cls(
            led_ids=led_ids, t_ms=t, led_idx=li,
            x=np.array([r[2] for r in rows], dtype=np.float64),
            y=np.array([r[3] for r in rows], dtype=np.float64),
            source=np.array([r[4] for r in rows], dtype=np.int8),
            n_ticks=len(frames),
            led_table_hash=led_table_hash, config_hash=config_hash,
        ).sort()


def labels_from_ground_truth(gt: GroundTruthLabels,
                             led_table_hash: str = "") -> LabelTable:
    """Visible ground-truth rows as a label table (shared file schema)."""
    led_i, tick = np.nonzero(gt.visible)
    table = LabelTable(
        led_ids=gt.led_ids,
        t_ms=tick.astype(np.int64), led_idx=led_i.astype(np.int64),
        x=gt.x[led_i, tick], y=gt.y[led_i, tick],
        source=np.zeros(len(tick), dtype=np.int8),
        n_ticks=gt.n_ticks, led_table_hash=led_table_hash,
        config_hash="groundtruth",
    )
    return table.sort()


def write_labels(table: LabelTable, path: str | Path | None = None) -> bytes:
    """Serialize to canonical .flbl bytes (optionally write to path)."""
    table = table.sort()
    lines = [
        "FLBL 1",
        f"# leds {table.led_table_hash}",
        f"# config {table.config_hash}",
        f"# ticks {table.n_ticks}",
        "# led_ids " + ",".join(table.led_ids),
    ]
    src_names = {0: "auto", 1: "corrected", 2: "coasted"}
    for i in range(len(table)):
        lines.append(
            f"{int(table.t_ms[i])} {table.led_ids[int(table.led_idx[i])]} "
            f"{table.x[i]:.4f} {table.y[i]:.4f} {src_names[int(table.source[i])]}"
        )
    data = ("\n".join(lines) + "\n").encode()
    if path is not None:
        Path(path).write_bytes(data)
    return data


def read_labels(source: bytes | str | Path) -> LabelTable:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.decode()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("FLBL"):
        raise MalformedHeader("missing FLBL header")
    leds_hash = config_hash = ""
    n_ticks = 0
    led_ids: tuple[str, ...] = ()
    body_at = 1
    for i, line in enumerate(lines[1:], start=1):
        if not line.startswith("#"):
            body_at = i
            break
        parts = line[1:].strip().split(" ", 1)
        key = parts[0]
        val = parts[1] if len(parts) > 1 else ""
        if key == "leds":
            leds_hash = val
        elif key == "config":
            config_hash = val
        elif key == "ticks":
            n_ticks = int(val)
        elif key == "led_ids":
            led_ids = tuple(v for v in val.split(",") if v)
        body_at = i + 1
    rows = []
    name_code = {"auto": 0, "corrected": 1, "coasted": 2}
    idx = {lid: i for i, lid in enumerate(led_ids)}
    for line in lines[body_at:]:
        line = line.strip()
        if not line:
            continue
        t_s, lid, xs, ys, src = line.split()
        if lid not in idx:
            idx[lid] = len(idx)
            led_ids = led_ids + (lid,)
        rows.append((int(t_s), idx[lid], float(xs), float(ys), name_code[src]))
    n_ticks = max(n_ticks, max((r[0] for r in rows), default=-1) + 1)
    return LabelTable(
        led_ids=led_ids,
        t_ms=np.array([r[0] for r in rows], dtype=np.int64),
        led_idx=np.array([r[1] for r in rows], dtype=np.int64),
        x=np.array([r[2] for r in rows], dtype=np.float64),
        y=np.array([r[3] for r in rows], dtype=np.float64),
        source=np.array([r[4] for r in rows], dtype=np.int8),
        n_ticks=n_ticks,
        led_table_hash=leds_hash, config_hash=config_hash,
    ).sort()


# --------------------------------------------------------------------------
# corrections

@dataclass(frozen=True)
class Correction:
    """One human edit: move a label, reassign it to a cluster, or delete it."""

    t_ms: int
    led_id: str
    action: str  # move | reassign | delete
    x: float | None = None
    y: float | None = None
    cluster_ref: int | None = None
    author: str = ""
    created_at: int = 0  # unix microseconds


@dataclass(frozen=True)
class CorrectionSet:
    records: tuple[Correction, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def merged(self) -> dict[tuple[int, str], Correction]:
        """Effective correction per (tick, led): the latest record wins."""
        out: dict[tuple[int, str], Correction] = {}
        for rec in self.records:
            out[(rec.t_ms, rec.led_id)] = rec
        return out


def write_corrections(cset: CorrectionSet, path: str | Path | None = None) -> bytes:
    lines = ["FCOR 1"]
    for r in cset.records:
        if r.action == "move":
            args = f"{r.x:.4f} {r.y:.4f}"
        elif r.action == "reassign":
            args = str(int(r.cluster_ref))
        elif r.action == "delete":
            args = "-"
        else:
            raise ValueError(f"unknown action {r.action!r}")
        lines.append(f"{r.action} {r.t_ms} {r.led_id} {args} "
                     f"{r.author or '-'} {r.created_at}")
    data = ("\n".join(lines) + "\n").encode()
    if path is not None:
        Path(path).write_bytes(data)
    return data


def read_corrections(source: bytes | str | Path) -> CorrectionSet:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.decode()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("FCOR"):
        raise MalformedHeader("missing FCOR header")
    records = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        action, t_ms, led_id = parts[0], int(parts[1]), parts[2]
        if action == "move":
            rec = Correction(t_ms, led_id, "move", x=float(parts[3]),
                             y=float(parts[4]), author=parts[5], created_at=int(parts[6]))
        elif action == "reassign":
            rec = Correction(t_ms, led_id, "reassign", cluster_ref=int(parts[3]),
                             author=parts[4], created_at=int(parts[5]))
        elif action == "delete":
            rec = Correction(t_ms, led_id, "delete",
                             author=parts[4], created_at=int(parts[5]))
        else:
            raise ValueError(f"unknown action {action!r}")
        records.append(rec)
    return CorrectionSet(tuple(records))


def apply_corrections(labels: LabelTable, corrections: CorrectionSet,
                      cluster_centroid=None) -> LabelTable:
    """Merge human corrections into a label table.

    ``cluster_centroid`` resolves reassignments: a callable
    (t_ms, cluster_ref) -> (x, y). Applying the same set twice equals
    applying it once, and disjoint sets commute.
    """
    known = set(labels.led_ids)
    rows: dict[tuple[int, int], tuple[float, float, int]] = {}
    for i in range(len(labels)):
        rows[(int(labels.t_ms[i]), int(labels.led_idx[i]))] = (
            float(labels.x[i]), float(labels.y[i]), int(labels.source[i]))
    idx = {lid: i for i, lid in enumerate(labels.led_ids)}

    for (t_ms, led_id), rec in sorted(corrections.merged().items(),
                                      key=lambda kv: (kv[0][0], kv[0][1])):
        if led_id not in known:
            raise UnknownLed(f"correction references unknown LED {led_id!r}")
        if not (0 <= t_ms < labels.n_ticks):
            raise TickOutOfRange(f"tick {t_ms} outside [0, {labels.n_ticks})")
        key = (t_ms, idx[led_id])
        if rec.action == "delete":
            rows.pop(key, None)
        elif rec.action == "move":
            rows[key] = (float(rec.x), float(rec.y), 1)
        elif rec.action == "reassign":
            if cluster_centroid is None:
                raise UnknownCluster("reassign requires cluster data")
            cx, cy = cluster_centroid(t_ms, rec.cluster_ref)
            rows[key] = (float(cx), float(cy), 1)
        else:
            raise ValueError(f"unknown action {rec.action!r}")

    keys = sorted(rows.keys(), key=lambda k: (k[0], labels.led_ids[k[1]]))
    return LabelTable(
        led_ids=labels.led_ids,
        t_ms=np.array([k[0] for k in keys], dtype=np.int64),
        led_idx=np.array([k[1] for k in keys], dtype=np.int64),
        x=np.array([rows[k][0] for k in keys], dtype=np.float64),
        y=np.array([rows[k][1] for k in keys], dtype=np.float64),
        source=np.array([rows[k][2] for k in keys], dtype=np.int8),
        n_ticks=labels.n_ticks,
        led_table_hash=labels.led_table_hash,
        config_hash=labels.config_hash,
    )
