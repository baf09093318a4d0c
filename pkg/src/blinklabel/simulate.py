"""Synthetic event-stream generator for moving blinking-LED markers.

Stands in for a physical rig: given a scene (LED table, per-marker
trajectories, occlusions, noise), it emits a time-sorted event stream and
the matching millisecond ground-truth labels. Output is a pure function
of (scene, seed).

The generator uses a burst model: each on/off transition of an LED emits a
small burst of events (positive for on, negative for off) scattered over
the marker disc, with a few microseconds of timestamp jitter. That is what
the downstream pipeline actually consumes; per-pixel photometry is not
modeled.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from enum import IntEnum
from pathlib import Path

import numpy as np
import yaml

from .errors import TrajectoryOutOfBounds
from .events import EventArray, EventStream, StreamHeader
from .leds import LedConfig

US_PER_MS = 1_000
US_PER_S = 1_000_000


class Edge(IntEnum):
    OFF = 0
    ON = 1


# --------------------------------------------------------------------------
# trajectories

@dataclass(frozen=True)
class SinusoidPath:
    """Drifting sinusoid: x(t) = x0 + vx*t + amp_x*sin(2*pi*f*t + phase_x).

    Velocities are px/s, t in seconds. amp == 0 and v == 0 gives a static
    marker; amp == 0 gives constant-velocity motion.
    """

    x0: float
    y0: float
    vx: float = 0.0
    vy: float = 0.0
    amp_x: float = 0.0
    amp_y: float = 0.0
    freq_hz: float = 0.0
    phase_x: float = 0.0
    phase_y: float = 0.0

    def at(self, t_us):
        ts = np.asarray(t_us, dtype=np.float64) / US_PER_S
        w = 2.0 * np.pi * self.freq_hz
        x = self.x0 + self.vx * ts + self.amp_x * np.sin(w * ts + self.phase_x)
        y = self.y0 + self.vy * ts + self.amp_y * np.sin(w * ts + self.phase_y)
        return x, y

    def to_dict(self):
        return {"kind": "sinusoid", "x0": self.x0, "y0": self.y0,
                "vx": self.vx, "vy": self.vy, "amp_x": self.amp_x,
                "amp_y": self.amp_y, "freq_hz": self.freq_hz,
                "phase_x": self.phase_x, "phase_y": self.phase_y}


@dataclass(frozen=True)
class WaypointPath:
    """Piecewise-linear path through (t_us, x, y) waypoints, clamped outside."""

    points: tuple[tuple[int, float, float], ...]

    def at(self, t_us):
        ts = np.asarray(t_us, dtype=np.float64)
        knots = np.array([p[0] for p in self.points], dtype=np.float64)
        xs = np.array([p[1] for p in self.points], dtype=np.float64)
        ys = np.array([p[2] for p in self.points], dtype=np.float64)
        return np.interp(ts, knots, xs), np.interp(ts, knots, ys)

    def to_dict(self):
        return {"kind": "waypoints",
                "points": [[int(t), float(x), float(y)] for t, x, y in self.points]}


def path_from_dict(d: dict):
    kind = d.get("kind", "sinusoid")
    if kind == "sinusoid":
        args = {k: v for k, v in d.items() if k != "kind"}
        return SinusoidPath(**args)
    if kind == "waypoints":
        return WaypointPath(points=tuple((int(t), float(x), float(y))
                                         for t, x, y in d["points"]))
    raise ValueError(f"unknown path kind {kind!r}")


static_path = SinusoidPath  # alias: SinusoidPath(x0, y0) is a static point


# --------------------------------------------------------------------------
# scene description

@dataclass(frozen=True)
class Distractor:
    """A blinking source that is not in the LED table (reflection, lamp).

    ``active`` limits emission to the given windows; None means always on.
    """

    id: str
    on_time_us: int
    off_time_us: int
    path: SinusoidPath | WaypointPath
    active: tuple[tuple[int, int], ...] | None = None

    @property
    def period_us(self) -> int:
        return self.on_time_us + self.off_time_us


@dataclass(frozen=True)
class SceneConfig:
    leds: tuple[LedConfig, ...]
    paths: dict[str, SinusoidPath | WaypointPath]
    duration_us: int
    seed: int
    sensor_width: int = 1280
    sensor_height: int = 720
    led_radius_px: float = 2.0
    events_per_edge: int = 6
    jitter_us: int = 5
    noise_rate: float = 0.0  # background events per pixel per second
    occlusions: tuple[tuple[str, int, int], ...] = ()
    distractors: tuple[Distractor, ...] = ()
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def with_seed(self, seed: int) -> "SceneConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GroundTruthLabels:
    """Per-millisecond true marker positions; one row per LED.

    Arrays are (n_leds, n_ticks). Tick k covers [k, k+1) ms and stores the
    position at the tick midpoint.
    """

    led_ids: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    visible: np.ndarray

    @property
    def n_ticks(self) -> int:
        return self.x.shape[1]

    def index_of(self, led_id: str) -> int:
        return self.led_ids.index(led_id)

    def trajectory(self, led_id: str):
        """(t_ms, x, y) samples for one LED, visible ticks only."""
        i = self.index_of(led_id)
        vis = self.visible[i]
        t_ms = np.nonzero(vis)[0]
        return t_ms, self.x[i, vis], self.y[i, vis]


# --------------------------------------------------------------------------
# blink edge generation

def led_phase_us(led_id: str, period_us: int) -> int:
    """Deterministic per-LED phase so markers are not edge-synchronized."""
    return zlib.crc32(led_id.encode("utf-8")) % period_us


def _edge_arrays(on_us: int, off_us: int, t0: int, t1: int, phase_us: int):
    """Edge times/kinds for one source over [t0, t1), first On at t0+phase."""
    period = on_us + off_us
    start = t0 + phase_us
    if start >= t1:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int8))
    n_cyc = (t1 - start + period - 1) // period
    on_t = start + period * np.arange(n_cyc, dtype=np.int64)
    off_t = on_t + on_us
    times = np.empty(2 * n_cyc, dtype=np.int64)
    times[0::2] = on_t
    times[1::2] = off_t
    kinds = np.empty(2 * n_cyc, dtype=np.int8)
    kinds[0::2] = int(Edge.ON)
    kinds[1::2] = int(Edge.OFF)
    keep = times < t1
    return times[keep], kinds[keep]


def blink_edges(led: LedConfig, t0: int, t1: int,
                phase_us: int | None = None) -> list[tuple[int, Edge]]:
    """On/off transition times of one LED over [t0, t1).

    Edges alternate starting with On at t0 + phase; the gap after On is the
    on-time, after Off the off-time. Default phase is the LED's hash phase.
    """
    if t0 >= t1:
        raise ValueError("t0 must be < t1")
    if phase_us is None:
        phase_us = led_phase_us(led.id, led.period_us)
    times, kinds = _edge_arrays(led.on_time_us, led.off_time_us, t0, t1, phase_us)
    return [(int(t), Edge(int(k))) for t, k in zip(times, kinds)]


# --------------------------------------------------------------------------
# scene synthesis

def _mask_windows(times: np.ndarray, windows, pad: int = 0) -> np.ndarray:
    """Boolean mask of times falling inside any [t0-pad, t1+pad) window."""
    hit = np.zeros(len(times), dtype=bool)
    for t0, t1 in windows:
        hit |= (times >= t0 - pad) & (times < t1 + pad)
    return hit


def _burst_events(rng, times, kinds, cx, cy, cfg: SceneConfig):
    """Expand edges into jittered event bursts on the marker disc."""
    m = len(times)
    e = cfg.events_per_edge
    if m == 0 or e == 0:
        return (np.empty(0, np.int64), np.empty(0, np.int32),
                np.empty(0, np.int32), np.empty(0, np.int8))
    n = m * e
    t = np.repeat(times, e)
    if cfg.jitter_us > 0:
        t = t + rng.integers(-cfg.jitter_us, cfg.jitter_us + 1, size=n)
    np.clip(t, 0, cfg.duration_us - 1, out=t)
    rad = cfg.led_radius_px * np.sqrt(rng.random(n))
    ang = rng.random(n) * (2.0 * np.pi)
    x = np.rint(np.repeat(cx, e) + rad * np.cos(ang)).astype(np.int32)
    y = np.rint(np.repeat(cy, e) + rad * np.sin(ang)).astype(np.int32)
    np.clip(x, 0, cfg.sensor_width - 1, out=x)
    np.clip(y, 0, cfg.sensor_height - 1, out=y)
    p = np.repeat(kinds, e).astype(np.int8)  # On bursts are positive
    return t, x, y, p


def _check_path_bounds(led_id: str, path, cfg: SceneConfig) -> None:
    grid = np.arange(0, cfg.duration_us + 1, US_PER_MS, dtype=np.int64)
    x, y = path.at(grid)
    if (x.min() < 0 or x.max() > cfg.sensor_width - 1
            or y.min() < 0 or y.max() > cfg.sensor_height - 1):
        raise TrajectoryOutOfBounds(
            f"{led_id}: path spans x [{x.min():.1f}, {x.max():.1f}] "
            f"y [{y.min():.1f}, {y.max():.1f}] outside "
            f"{cfg.sensor_width}x{cfg.sensor_height}")


def simulate(scene: SceneConfig):
    """Generate (header, events, ground_truth) for a scene.

    Identical scenes produce identical byte streams: every random draw comes
    from generators keyed on (scene.seed, source index).
    """
    cols_t, cols_x, cols_y, cols_p = [], [], [], []

    occ_by_led: dict[str, list[tuple[int, int]]] = {}
    for led_id, o0, o1 in scene.occlusions:
        occ_by_led.setdefault(led_id, []).append((int(o0), int(o1)))

    for i, led in enumerate(scene.leds):
        path = scene.paths[led.id]
        _check_path_bounds(led.id, path, scene)
        rng = np.random.default_rng(np.random.SeedSequence([scene.seed, i]))
        phase = led_phase_us(led.id, led.period_us)
        times, kinds = _edge_arrays(led.on_time_us, led.off_time_us,
                                    0, scene.duration_us, phase)
        occ = occ_by_led.get(led.id, ())
        if occ:
            # pad by the jitter so no jittered timestamp lands inside
            keep = ~_mask_windows(times, occ, pad=scene.jitter_us)
            times, kinds = times[keep], kinds[keep]
        cx, cy = path.at(times)
        t, x, y, p = _burst_events(rng, times, kinds, cx, cy, scene)
        cols_t.append(t), cols_x.append(x), cols_y.append(y), cols_p.append(p)

    for j, d in enumerate(scene.distractors):
        _check_path_bounds(d.id, d.path, scene)
        rng = np.random.default_rng(np.random.SeedSequence([scene.seed, 10_000 + j]))
        phase = led_phase_us(d.id, d.period_us)
        times, kinds = _edge_arrays(d.on_time_us, d.off_time_us,
                                    0, scene.duration_us, phase)
        if d.active is not None:
            keep = _mask_windows(times, d.active)
            times, kinds = times[keep], kinds[keep]
        cx, cy = d.path.at(times)
        t, x, y, p = _burst_events(rng, times, kinds, cx, cy, scene)
        cols_t.append(t), cols_x.append(x), cols_y.append(y), cols_p.append(p)

    if scene.noise_rate > 0:
        rng = np.random.default_rng(np.random.SeedSequence([scene.seed, 99_999]))
        mean = scene.noise_rate * scene.sensor_width * scene.sensor_height \
            * (scene.duration_us / US_PER_S)
        n = int(rng.poisson(mean))
        cols_t.append(rng.integers(0, scene.duration_us, size=n))
        cols_x.append(rng.integers(0, scene.sensor_width, size=n).astype(np.int32))
        cols_y.append(rng.integers(0, scene.sensor_height, size=n).astype(np.int32))
        cols_p.append(rng.integers(0, 2, size=n).astype(np.int8))

    t = np.concatenate(cols_t) if cols_t else np.empty(0, np.int64)
    x = np.concatenate(cols_x) if cols_x else np.empty(0, np.int32)
    y = np.concatenate(cols_y) if cols_y else np.empty(0, np.int32)
    p = np.concatenate(cols_p) if cols_p else np.empty(0, np.int8)
    order = np.argsort(t, kind="stable")
    events = EventArray(t[order], x[order], y[order], p[order])

    header = StreamHeader(
        sensor_width=scene.sensor_width, sensor_height=scene.sensor_height,
        t_start=0, t_end=scene.duration_us, event_count=len(events),
    )
    return header, events, ground_truth_labels(scene)


def ground_truth_labels(scene: SceneConfig) -> GroundTruthLabels:
    """Millisecond labels straight from the scene trajectories."""
    n_ticks = scene.duration_us // US_PER_MS
    mids = np.arange(n_ticks, dtype=np.int64) * US_PER_MS + US_PER_MS // 2
    led_ids = tuple(led.id for led in scene.leds)
    xs = np.empty((len(led_ids), n_ticks))
    ys = np.empty((len(led_ids), n_ticks))
    vis = np.ones((len(led_ids), n_ticks), dtype=bool)
    for i, led in enumerate(scene.leds):
        xs[i], ys[i] = scene.paths[led.id].at(mids)
    for led_id, o0, o1 in scene.occlusions:
        if led_id in led_ids:
            i = led_ids.index(led_id)
            vis[i] &= ~((mids >= o0) & (mids < o1))
    return GroundTruthLabels(led_ids=led_ids, x=xs, y=ys, visible=vis)


def simulate_stream(scene: SceneConfig) -> EventStream:
    header, events, _ = simulate(scene)
    return EventStream(header, events)


# --------------------------------------------------------------------------
# scene files

def scene_to_dict(scene: SceneConfig) -> dict:
    return {
        "name": scene.name,
        "seed": scene.seed,
        "duration_us": scene.duration_us,
        "sensor_width": scene.sensor_width,
        "sensor_height": scene.sensor_height,
        "led_radius_px": scene.led_radius_px,
        "events_per_edge": scene.events_per_edge,
        "jitter_us": scene.jitter_us,
        "noise_rate": scene.noise_rate,
        "leds": [
            {"id": led.id, "on_time_us": led.on_time_us,
             "off_time_us": led.off_time_us, "body_site": led.body_site}
            for led in scene.leds
        ],
        "paths": {led_id: p.to_dict() for led_id, p in scene.paths.items()},
        "occlusions": [[lid, int(a), int(b)] for lid, a, b in scene.occlusions],
        "distractors": [
            {"id": d.id, "on_time_us": d.on_time_us, "off_time_us": d.off_time_us,
             "path": d.path.to_dict(),
             "active": None if d.active is None
             else [[int(a), int(b)] for a, b in d.active]}
            for d in scene.distractors
        ],
        "metadata": scene.metadata,
    }


def scene_from_dict(d: dict) -> SceneConfig:
    leds = tuple(LedConfig(**entry) for entry in d["leds"])
    paths = {lid: path_from_dict(pd) for lid, pd in d["paths"].items()}
    distractors = tuple(
        Distractor(
            id=e["id"], on_time_us=e["on_time_us"], off_time_us=e["off_time_us"],
            path=path_from_dict(e["path"]),
            active=None if e.get("active") is None
            else tuple((int(a), int(b)) for a, b in e["active"]),
        )
        for e in d.get("distractors", ())
    )
    return SceneConfig(
        leds=leds, paths=paths,
        duration_us=int(d["duration_us"]), seed=int(d["seed"]),
        sensor_width=int(d.get("sensor_width", 1280)),
        sensor_height=int(d.get("sensor_height", 720)),
        led_radius_px=float(d.get("led_radius_px", 2.0)),
        events_per_edge=int(d.get("events_per_edge", 6)),
        jitter_us=int(d.get("jitter_us", 5)),
        noise_rate=float(d.get("noise_rate", 0.0)),
        occlusions=tuple((lid, int(a), int(b))
                         for lid, a, b in d.get("occlusions", ())),
        distractors=distractors,
        name=d.get("name", ""),
        metadata=d.get("metadata", {}) or {},
    )


def save_scene(scene: SceneConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scene_to_dict(scene), sort_keys=False))


def load_scene(path: str | Path) -> SceneConfig:
    return scene_from_dict(yaml.safe_load(Path(path).read_text()))
