"""Event data model, binary stream I/O, and frame partitioning.

Streams hold asynchronous camera events (x, y, t, polarity) sorted by
timestamp. Storage is column-oriented numpy for throughput; the Event
tuple view exists for convenience and tests.

Binary ".fevt" layout (all little-endian):
    magic "FEVT" | version u16 | sensor_width u16 | sensor_height u16
    | event_count u64 | t_start u64 | t_end u64
followed by 13-byte records: t u64, x u16, y u16, polarity u8 (1=positive).

A CSV alternative with header ``t_us,x,y,p`` is accepted for interchange.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import MalformedHeader, OutOfBoundsEvent, UnsortedStream, ZeroWindow

MAGIC = b"FEVT"
FORMAT_VERSION = 1

_HEADER_DTYPE = np.dtype([
    ("version", "<u2"),
    ("width", "<u2"),
    ("height", "<u2"),
    ("count", "<u8"),
    ("t_start", "<u8"),
    ("t_end", "<u8"),
])
_RECORD_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "u1")])

DEFAULT_WIDTH = 1280
DEFAULT_HEIGHT = 720


class Polarity(IntEnum):
    NEGATIVE = 0
    POSITIVE = 1


class Event(NamedTuple):
    x: int
    y: int
    t: int
    polarity: Polarity


@dataclass(frozen=True)
class StreamHeader:
    sensor_width: int = DEFAULT_WIDTH
    sensor_height: int = DEFAULT_HEIGHT
    t_start: int = 0
    t_end: int = 0
    event_count: int = 0


class EventArray:
    """Column store for a time-sorted run of events.

    Arrays are shared, not copied, on slicing. ``t`` is int64 microseconds,
    ``x``/``y`` int32 pixels, ``p`` int8 polarity (1 positive, 0 negative).
    """

    __slots__ = ("t", "x", "y", "p")

    def __init__(self, t, x, y, p):
        self.t = np.asarray(t, dtype=np.int64)
        self.x = np.asarray(x, dtype=np.int32)
        self.y = np.asarray(y, dtype=np.int32)
        self.p = np.asarray(p, dtype=np.int8)
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ValueError("column lengths differ")

    @classmethod
    def empty(cls) -> "EventArray":
        return cls([], [], [], [])

    @classmethod
    def from_events(cls, events) -> "EventArray":
        evs = list(events)
        return cls(
            [e.t for e in evs], [e.x for e in evs],
            [e.y for e in evs], [int(e.polarity) for e in evs],
        )

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self.t)):
            yield Event(int(self.x[i]), int(self.y[i]), int(self.t[i]),
                        Polarity(int(self.p[i])))

    def slice(self, lo: int, hi: int) -> "EventArray":
        return EventArray(self.t[lo:hi], self.x[lo:hi], self.y[lo:hi], self.p[lo:hi])

    def to_list(self) -> list[Event]:
        return list(self)


@dataclass(frozen=True)
class EventStream:
    header: StreamHeader
    events: EventArray

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class EventFrame:
    """Events falling in one half-open time window [window_start, window_end)."""

    window_start: int
    window_end: int
    events: EventArray

    def __len__(self) -> int:
        return len(self.events)


def _validate(header: StreamHeader, ev: EventArray) -> None:
    if header.t_end < header.t_start:
        raise MalformedHeader(f"t_end {header.t_end} < t_start {header.t_start}")
    if header.event_count != len(ev):
        raise MalformedHeader(
            f"header declares {header.event_count} events, found {len(ev)}")
    if len(ev) == 0:
        return
    if np.any(np.diff(ev.t) < 0):
        i = int(np.argmax(np.diff(ev.t) < 0))
        raise UnsortedStream(f"timestamp regression at record {i + 1}")
    bad_x = (ev.x < 0) | (ev.x >= header.sensor_width)
    bad_y = (ev.y < 0) | (ev.y >= header.sensor_height)
    if np.any(bad_x | bad_y):
        i = int(np.argmax(bad_x | bad_y))
        raise OutOfBoundsEvent(
            f"event {i} at ({int(ev.x[i])}, {int(ev.y[i])}) outside "
            f"{header.sensor_width}x{header.sensor_height}")
    if ev.t[0] < header.t_start or ev.t[-1] > header.t_end:
        raise MalformedHeader(
            f"events span [{int(ev.t[0])}, {int(ev.t[-1])}] outside declared "
            f"[{header.t_start}, {header.t_end}]")


def read_event_stream(source: bytes | str | Path) -> EventStream:
    """Parse a .fevt byte string or file. Validates sort order and bounds."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    if len(data) < 4 + _HEADER_DTYPE.itemsize or data[:4] != MAGIC:
        raise MalformedHeader("missing FEVT magic")
    hdr = np.frombuffer(data, dtype=_HEADER_DTYPE, count=1, offset=4)[0]
    if int(hdr["version"]) != FORMAT_VERSION:
        raise MalformedHeader(f"unsupported version {int(hdr['version'])}")
    header = StreamHeader(
        sensor_width=int(hdr["width"]), sensor_height=int(hdr["height"]),
        t_start=int(hdr["t_start"]), t_end=int(hdr["t_end"]),
        event_count=int(hdr["count"]),
    )
    body = data[4 + _HEADER_DTYPE.itemsize:]
    if len(body) != header.event_count * _RECORD_DTYPE.itemsize:
        raise MalformedHeader(
            f"body holds {len(body)} bytes, expected "
            f"{header.event_count * _RECORD_DTYPE.itemsize}")
    rec = np.frombuffer(body, dtype=_RECORD_DTYPE)
    ev = EventArray(rec["t"].astype(np.int64), rec["x"].astype(np.int32),
                    rec["y"].astype(np.int32), rec["p"].astype(np.int8))
    _validate(header, ev)
    return EventStream(header, ev)


def write_event_stream(header: StreamHeader, events: EventArray,
                       path: str | Path | None = None) -> bytes:
    """Serialize to .fevt bytes (and optionally write to path).

    Round-trips byte-exactly: read(write(h, e)) == (h, e).
    """
    _validate(header, events)
    buf = io.BytesIO()
    buf.write(MAGIC)
    hdr = np.zeros(1, dtype=_HEADER_DTYPE)
    hdr["version"] = FORMAT_VERSION
    hdr["width"] = header.sensor_width
    hdr["height"] = header.sensor_height
    hdr["count"] = header.event_count
    hdr["t_start"] = header.t_start
    hdr["t_end"] = header.t_end
    buf.write(hdr.tobytes())
    rec = np.empty(len(events), dtype=_RECORD_DTYPE)
    rec["t"] = events.t
    rec["x"] = events.x
    rec["y"] = events.y
    rec["p"] = events.p
    buf.write(rec.tobytes())
    data = buf.getvalue()
    if path is not None:
        Path(path).write_bytes(data)
    return data


def read_events_csv(path: str | Path, header: StreamHeader | None = None) -> EventStream:
    """Read the `t_us,x,y,p` interchange CSV.

    Geometry defaults to 1280x720 unless a header is supplied; the time span
    is taken from the data.
    """
    raw = np.loadtxt(path, dtype=np.int64, delimiter=",", skiprows=1, ndmin=2)
    if raw.size == 0:
        raw = raw.reshape(0, 4)
    if raw.shape[1] != 4:
        raise MalformedHeader("CSV must have columns t_us,x,y,p")
    ev = EventArray(raw[:, 0], raw[:, 1], raw[:, 2], raw[:, 3])
    if header is None:
        t0 = int(ev.t[0]) if len(ev) else 0
        t1 = int(ev.t[-1]) if len(ev) else 0
        header = StreamHeader(t_start=min(t0, 0), t_end=t1, event_count=len(ev))
    _validate(header, ev)
    return EventStream(header, ev)


def write_events_csv(stream: EventStream, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("t_us,x,y,p\n")
        ev = stream.events
        for i in range(len(ev)):
            fh.write(f"{int(ev.t[i])},{int(ev.x[i])},{int(ev.y[i])},{int(ev.p[i])}\n")


def frame_index(events: EventArray, window_us: int, t_start: int = 0,
                t_end: int | None = None) -> np.ndarray:
    """Offsets into the event arrays for each frame, length n_frames + 1.

    Frame k covers [t_start + k*w, t_start + (k+1)*w). Frames tile the
    declared span; trailing events extend the tiling if they fall past it.
    """
    if window_us < 1:
        raise ZeroWindow(f"window_us must be >= 1, got {window_us}")
    if t_end is None:
        t_end = int(events.t[-1]) if len(events) else t_start
    n = -(-(t_end - t_start) // window_us)  # ceil
    if len(events):
        n = max(n, (int(events.t[-1]) - t_start) // window_us + 1)
    bounds = t_start + window_us * np.arange(n + 1, dtype=np.int64)
    return np.searchsorted(events.t, bounds, side="left")


def partition_into_frames(events: EventArray, window_us: int, t_start: int = 0,
                          t_end: int | None = None) -> list[EventFrame]:
    """Tile events into fixed-width frames, emitting empty frames too.

    The union of frame events equals the input; each event lands in exactly
    one half-open window.
    """
    offsets = frame_index(events, window_us, t_start, t_end)
    frames = []
    for k in range(len(offsets) - 1):
        lo, hi = int(offsets[k]), int(offsets[k + 1])
        frames.append(EventFrame(
            window_start=t_start + k * window_us,
            window_end=t_start + (k + 1) * window_us,
            events=events.slice(lo, hi),
        ))
    return frames
