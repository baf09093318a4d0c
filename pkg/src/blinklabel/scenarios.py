"""Named scene presets for testing, evaluation, and benchmarks.

Each builder returns a deterministic SceneConfig for a seed. The adversarial
presets are constructed so specific pipeline stages are load-bearing:

- ``ambiguous_duty``: two markers share a 400 us period but differ in duty
  cycle, cross each other only while occluded, and two blinking distractors
  lurk nearby. Re-acquisition after the long occlusions must rely on the
  on-off time distance; the first distractor is admissible unless the period
  distance raises its cost past the gate, and the second is admissible
  unless the outlier filter rejects it.
- ``ambiguous_ontime``: two markers share the on-time but differ in period,
  the complementary construction.
- ``sprint_crossing``: one joint crosses a vertical line on a curved,
  oscillating approach; the analytic crossing time is stored in metadata.
  The curvature is what separates millisecond labels from low-rate
  interpolation.
"""

from __future__ import annotations

import numpy as np

from .errors import UnknownScenario
from .leds import LedConfig, default_led_table
from .simulate import Distractor, SceneConfig, SinusoidPath, WaypointPath

US_PER_S = 1_000_000

# Standing-figure layout on the 1280x720 sensor, one entry per body site.
BODY_LAYOUT = {
    "head": (640, 120), "chest": (640, 230), "waist": (640, 330),
    "left_shoulder": (560, 210), "right_shoulder": (720, 210),
    "left_elbow": (520, 300), "right_elbow": (760, 300),
    "left_wrist": (490, 385), "right_wrist": (790, 385),
    "left_hip": (590, 400), "right_hip": (690, 400),
    "left_knee": (580, 510), "right_knee": (700, 510),
    "left_ankle": (575, 620), "right_ankle": (705, 620),
    "left_foot": (560, 680), "right_foot": (720, 680),
}

SCENARIO_NAMES = ("static", "wave", "kick", "crossing_hands",
                  "sprint_crossing", "ambiguous_duty", "ambiguous_ontime")


def _body_paths() -> dict[str, SinusoidPath]:
    table = default_led_table()
    return {led.id: SinusoidPath(*BODY_LAYOUT[led.body_site]) for led in table}


def _site_id(site: str) -> str:
    for led in default_led_table():
        if led.body_site == site:
            return led.id
    raise KeyError(site)


def _base(seed: int, duration_us: int, noise_rate: float,
          events_per_edge: int) -> dict:
    return dict(
        duration_us=duration_us, seed=seed, noise_rate=noise_rate,
        events_per_edge=events_per_edge, led_radius_px=2.0, jitter_us=5,
    )


def _static(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    return SceneConfig(
        leds=tuple(default_led_table()), paths=_body_paths(),
        name="static", **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _wave(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    paths = _body_paths()
    wrist = _site_id("right_wrist")
    x0, y0 = BODY_LAYOUT["right_wrist"]
    paths[wrist] = SinusoidPath(x0=x0, y0=y0, amp_x=70.0, amp_y=40.0,
                                freq_hz=2.5, phase_x=0.0, phase_y=np.pi / 2)
    return SceneConfig(
        leds=tuple(default_led_table()), paths=paths, name="wave",
        metadata={"moving_joint": wrist},
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _kick(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    paths = _body_paths()
    ankle = _site_id("right_ankle")
    knee = _site_id("right_knee")
    ax, ay = BODY_LAYOUT["right_ankle"]
    kx, ky = BODY_LAYOUT["right_knee"]
    a_pts = [(0, float(ax), float(ay))]
    k_pts = [(0, float(kx), float(ky))]
    for t0 in (2.0, 5.0, 8.0):
        if (t0 + 0.6) * US_PER_S > duration_us:
            break
        a_pts += [(int(t0 * US_PER_S), float(ax), float(ay)),
                  (int((t0 + 0.25) * US_PER_S), ax + 145.0, ay - 140.0),
                  (int((t0 + 0.5) * US_PER_S), float(ax), float(ay))]
        k_pts += [(int(t0 * US_PER_S), float(kx), float(ky)),
                  (int((t0 + 0.25) * US_PER_S), kx + 60.0, ky - 40.0),
                  (int((t0 + 0.5) * US_PER_S), float(kx), float(ky))]
    a_pts.append((duration_us, float(ax), float(ay)))
    k_pts.append((duration_us, float(kx), float(ky)))
    paths[ankle] = WaypointPath(points=tuple(a_pts))
    paths[knee] = WaypointPath(points=tuple(k_pts))
    return SceneConfig(
        leds=tuple(default_led_table()), paths=paths, name="kick",
        metadata={"moving_joint": ankle},
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _crossing_hands(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    paths = _body_paths()
    left = _site_id("left_wrist")
    right = _site_id("right_wrist")
    # wrists sweep across the body midline in antiphase and meet at x=640
    paths[left] = SinusoidPath(x0=640.0, y0=385.0, amp_x=150.0, freq_hz=0.25,
                               phase_x=-np.pi / 2)
    paths[right] = SinusoidPath(x0=640.0, y0=385.0, amp_x=150.0, freq_hz=0.25,
                                phase_x=np.pi / 2)
    return SceneConfig(
        leds=tuple(default_led_table()), paths=paths, name="crossing_hands",
        metadata={"crossing_pair": [left, right]},
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _sprint_crossing(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    paths = _body_paths()
    ankle = _site_id("right_ankle")
    line_x = 640.0
    dur_s = duration_us / US_PER_S
    x0, amp, freq = 300.0, 50.0, 2.0
    v = (line_x - x0) / (0.62 * dur_s)  # nominal crossing ~62% in
    w = 2.0 * np.pi * freq

    def x_at(ts, phi: float):
        return x0 + v * ts + amp * np.sin(w * ts + phi)

    def first_crossing(phi: float) -> float | None:
        ts = np.arange(0.0, dur_s, 1e-4)
        s = x_at(ts, phi) - line_x
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        if len(idx) == 0:
            return None
        lo, hi = ts[idx[0]], ts[idx[0] + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if (x_at(lo, phi) - line_x) * (x_at(mid, phi) - line_x) <= 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    # Pick a phase whose first crossing is well inside the scene, fast
    # enough for clean millisecond timing, yet curved enough that 50 ms
    # interpolation visibly misses it.
    rng = np.random.default_rng(np.random.SeedSequence([seed, 777]))
    phi = 0.0
    for _ in range(1000):
        cand = float(rng.uniform(0.0, 2.0 * np.pi))
        t_star = first_crossing(cand)
        if t_star is None or not 0.2 * dur_s <= t_star <= 0.85 * dur_s:
            continue
        speed = v + amp * w * np.cos(w * t_star + cand)
        bend = abs(np.sin(w * t_star + cand))
        if 200.0 <= abs(speed) <= max(360.0, 1.3 * v) and bend >= 0.5:
            phi = cand
            break
    t_star = first_crossing(phi)
    if t_star is None:  # degenerate very short scenes: any crossing will do
        for cand in np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False):
            t_star = first_crossing(float(cand))
            if t_star is not None:
                phi = float(cand)
                break

    paths[ankle] = SinusoidPath(x0=x0, y0=620.0, vx=v, amp_x=amp,
                                freq_hz=freq, phase_x=phi)
    return SceneConfig(
        leds=tuple(default_led_table()), paths=paths, name="sprint_crossing",
        metadata={
            "crossing_time_us": float(t_star * US_PER_S),
            "line": {"p0": [line_x, 200.0], "p1": [line_x, 700.0],
                     "joint": ankle},
            "phase": float(phi),
        },
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _ambiguous_duty(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    # Equal period (400 us), different duty: only the on-off distance can
    # tell the pair apart. Both markers vanish for 350 ms every 2 s; they
    # cross while hidden and their vertical order alternates between
    # reappearances, so period-only matching relocks wrong half the time.
    # Distractor lamps blink only around the occlusions and go dark early
    # enough that captured tracks are lost again before the markers return.
    led_a = LedConfig(id="dutyA", on_time_us=150, off_time_us=250,
                      body_site="left_wrist")
    led_b = LedConfig(id="dutyB", on_time_us=250, off_time_us=150,
                      body_site="right_wrist")
    paths = {
        "dutyA": SinusoidPath(x0=400.0, y0=300.0, amp_y=80.0, freq_hz=0.25,
                              phase_y=0.0),
        "dutyB": SinusoidPath(x0=400.0, y0=300.0, amp_y=80.0, freq_hz=0.25,
                              phase_y=np.pi),
    }
    starts = [t for t in range(0, int(duration_us // US_PER_S), 2)
              if (t + 0.25) * US_PER_S <= duration_us]
    occl = []
    for t in starts:
        o0 = max(0, int((t - 0.1) * US_PER_S))
        o1 = int((t + 0.25) * US_PER_S)
        occl += [("dutyA", o0, o1), ("dutyB", o0, o1)]
    lamp_win = tuple((max(0, int((t - 0.1) * US_PER_S)),
                      int((t + 0.12) * US_PER_S)) for t in starts)
    lamp_c_win = tuple((max(0, int((t - 0.3) * US_PER_S)),
                        int((t + 0.12) * US_PER_S)) for t in starts[::2])
    distractors = (
        # believable on/off means, period off by 180 us: the period term
        # prices them out of the gate, so only the on-off ablation bites
        Distractor(id="lamp_a", on_time_us=210, off_time_us=370,
                   path=SinusoidPath(x0=950.0, y0=180.0), active=lamp_win),
        Distractor(id="lamp_b", on_time_us=370, off_time_us=210,
                   path=SinusoidPath(x0=950.0, y0=560.0), active=lamp_win),
        # genuine outlier that still fits under the cost gate: only the
        # outlier filter stops it
        Distractor(id="lamp_c", on_time_us=240, off_time_us=255,
                   path=SinusoidPath(x0=950.0, y0=360.0), active=lamp_c_win),
    )
    return SceneConfig(
        leds=(led_a, led_b), paths=paths, occlusions=tuple(occl),
        distractors=distractors, name="ambiguous_duty",
        metadata={"pair": ["dutyA", "dutyB"]},
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


def _ambiguous_ontime(seed, duration_us, noise_rate, events_per_edge) -> SceneConfig:
    led_a = LedConfig(id="ontimeA", on_time_us=150, off_time_us=250,
                      body_site="left_ankle")
    led_b = LedConfig(id="ontimeB", on_time_us=150, off_time_us=150,
                      body_site="right_ankle")
    paths = {
        "ontimeA": SinusoidPath(x0=500.0, y0=360.0, amp_x=60.0, freq_hz=0.4),
        "ontimeB": SinusoidPath(x0=780.0, y0=360.0, amp_x=60.0, freq_hz=0.4,
                                phase_x=np.pi),
    }
    n_sec = duration_us // US_PER_S
    occl = []
    for k in range(1, int(n_sec), 2):
        o0 = int(k * US_PER_S)
        o1 = int((k + 0.3) * US_PER_S)
        if o1 <= duration_us:
            occl += [("ontimeA", o0, o1), ("ontimeB", o0, o1)]
    return SceneConfig(
        leds=(led_a, led_b), paths=paths, occlusions=tuple(occl),
        name="ambiguous_ontime", metadata={"pair": ["ontimeA", "ontimeB"]},
        **_base(seed, duration_us, noise_rate, events_per_edge),
    )


_BUILDERS = {
    "static": _static,
    "wave": _wave,
    "kick": _kick,
    "crossing_hands": _crossing_hands,
    "sprint_crossing": _sprint_crossing,
    "ambiguous_duty": _ambiguous_duty,
    "ambiguous_ontime": _ambiguous_ontime,
}


def build_scenario(name: str, seed: int = 0, duration_us: int = 10 * US_PER_S,
                   noise_rate: float = 2e-3,
                   events_per_edge: int = 5) -> SceneConfig:
    """Build one named preset for a seed."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownScenario(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}"
        ) from None
    return builder(seed, duration_us, noise_rate, events_per_edge)


def scenario_library(seed: int = 0, duration_us: int = 10 * US_PER_S,
                     noise_rate: float = 2e-3,
                     events_per_edge: int = 5) -> dict[str, SceneConfig]:
    """All presets for one seed."""
    return {name: build_scenario(name, seed, duration_us, noise_rate,
                                 events_per_edge)
            for name in SCENARIO_NAMES}
