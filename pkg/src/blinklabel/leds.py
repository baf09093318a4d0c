"""LED identities and their nominal blink signatures.

Each marker LED blinks with a fixed on-time and off-time (microseconds);
the pair identifies the LED. The decoder compares measured cluster
signatures against this table, so entries should be mutually separated
in (on, off) space.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyLedTable

# Operating range used when designing tables; values outside are legal
# but get a warning because decode margins degrade.
NOMINAL_MIN_US = 100
NOMINAL_MAX_US = 300


@dataclass(frozen=True)
class LedConfig:
    """One LED: id, nominal on/off times (us), and the body site it marks."""

    id: str
    on_time_us: int
    off_time_us: int
    body_site: str = ""

    def __post_init__(self):
        if self.on_time_us < 1 or self.off_time_us < 1:
            raise ValueError(f"LED {self.id}: on/off times must be >= 1 us")
        if not (NOMINAL_MIN_US <= self.on_time_us <= NOMINAL_MAX_US
                and NOMINAL_MIN_US <= self.off_time_us <= NOMINAL_MAX_US):
            warnings.warn(
                f"LED {self.id}: blink times {self.on_time_us}/{self.off_time_us} us "
                f"outside the nominal {NOMINAL_MIN_US}-{NOMINAL_MAX_US} us range",
                stacklevel=2,
            )

    @property
    def period_us(self) -> int:
        return self.on_time_us + self.off_time_us


# 17 body sites, head to foot. Order matters: it fixes LED ids.
BODY_SITES = (
    "head", "chest", "waist",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_foot", "right_foot",
)

# (on, off) assignments on a 50 us grid, periods capped at 500 us so a
# single 1 ms frame always contains enough transitions to decode.
# Pairwise on-off distance |d_on| + |d_off| is >= 50 us, mostly >= 100.
_TABLE_TIMES = (
    (100, 100), (100, 200), (100, 300),
    (150, 150), (150, 250),
    (200, 100), (200, 200), (200, 300),
    (250, 150), (250, 250),
    (300, 100), (300, 200),
    (100, 150), (150, 300), (200, 150),
    (250, 200), (300, 150),
)


def default_led_table() -> list[LedConfig]:
    """The stock 17-LED full-body marker table."""
    return [
        LedConfig(id=f"led{i + 1:02d}", on_time_us=on, off_time_us=off, body_site=site)
        for i, ((on, off), site) in enumerate(zip(_TABLE_TIMES, BODY_SITES))
    ]


def load_led_table(path: str | Path) -> list[LedConfig]:
    """Read a table from text: one `id on_us off_us body_site` line per LED."""
    leds = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"{path}:{lineno}: expected 'id on_us off_us [body_site]'")
        site = parts[3] if len(parts) == 4 else ""
        leds.append(LedConfig(id=parts[0], on_time_us=int(parts[1]),
                              off_time_us=int(parts[2]), body_site=site))
    if not leds:
        raise EmptyLedTable(f"no LED entries in {path}")
    ids = [led.id for led in leds]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate LED ids in {path}")
    return leds


def save_led_table(leds: list[LedConfig], path: str | Path) -> None:
    lines = ["# id on_us off_us body_site"]
    for led in leds:
        lines.append(f"{led.id} {led.on_time_us} {led.off_time_us} {led.body_site}")
    Path(path).write_text("\n".join(lines) + "\n")


def led_table_hash(leds: list[LedConfig]) -> str:
    """Stable content hash, recorded in label files for provenance."""
    canon = ";".join(
        f"{led.id},{led.on_time_us},{led.off_time_us},{led.body_site}" for led in leds
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
