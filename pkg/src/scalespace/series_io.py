"""Time series container, canonical CSV format and synthetic series.

The on-disk format is a plain CSV with header ``t,y`` or ``t,y,se``.
Lines starting with ``#`` and blank lines are ignored. Numbers use a
decimal point regardless of locale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InputError,
    InvalidSpec,
    MalformedRow,
    NonFiniteValue,
    NonMonotoneTimes,
    NonPositiveStderr,
    TooFewPoints,
)

MIN_POINTS = 4


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observed reconstruction ``y_i`` at times ``t_i``.

    ``stderrs`` are optional per-point standard errors of the
    reconstruction, in the units of ``values``.
    """

    times: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        t = _readonly(self.times)
        y = _readonly(self.values)
        s = None if self.stderrs is None else _readonly(self.stderrs)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "stderrs", s)

        if t.ndim != 1 or y.shape != t.shape or (s is not None and s.shape != t.shape):
            raise InputError("times, values and stderrs must be 1-D of equal length")
        if t.size < MIN_POINTS:
            raise TooFewPoints(f"need at least {MIN_POINTS} points, got {t.size}")
        for name, arr in (("times", t), ("values", y), ("stderrs", s)):
            if arr is not None and not np.all(np.isfinite(arr)):
                i = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise NonFiniteValue(i + 1, f"non-finite {name} entry")
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise NonMonotoneTimes(int(bad[0]) + 2, "times must be strictly increasing")
        if s is not None and np.any(s <= 0):
            i = int(np.flatnonzero(s <= 0)[0])
            raise NonPositiveStderr(i + 1, "standard errors must be positive")

    @property
    def n(self) -> int:
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        if (self.stderrs is None) != (other.stderrs is None):
            return False
        return (
            self.label == other.label
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
            and (self.stderrs is None or np.array_equal(self.stderrs, other.stderrs))
        )

    __hash__ = None


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def parse_series(text: str, label: str = "") -> TimeSeries:
    """Parse canonical CSV text into a validated :class:`TimeSeries`.

    Row numbers in errors are 1-based line numbers of ``text``. Times are
    checked for strict increase but never re-sorted.
    """
    header = None
    rows: list[tuple[int, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            if cells not in (["t", "y"], ["t", "y", "se"]):
                raise MalformedRow(lineno, f"expected header 't,y' or 't,y,se', got {line!r}")
            header = cells
            continue
        if len(cells) != len(header):
            raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(cells)}")
        try:
            nums = [float(c) for c in cells]
        except ValueError:
            raise MalformedRow(lineno, f"non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in nums):
            raise NonFiniteValue(lineno, "NaN or infinite value")
        rows.append((lineno, nums))

    if header is None:
        raise MalformedRow(1, "missing header")

    for (_, prev), (lineno, cur) in zip(rows, rows[1:]):
        if cur[0] <= prev[0]:
            raise NonMonotoneTimes(lineno, f"time {cur[0]!r} does not exceed {prev[0]!r}")
    if len(header) == 3:
        for lineno, cur in rows:
            if cur[2] <= 0:
                raise NonPositiveStderr(lineno, f"standard error {cur[2]!r} is not positive")
    if len(rows) < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} data rows, got {len(rows)}")

    data = np.array([r for _, r in rows], dtype=float)
    se = data[:, 2] if len(header) == 3 else None
    return TimeSeries(data[:, 0], data[:, 1], se, label)


def render_series(series: TimeSeries) -> str:
    """Inverse of :func:`parse_series`; numbers carry 17 significant digits."""
    cols = [series.times, series.values]
    head = "t,y"
    if series.stderrs is not None:
        cols.append(series.stderrs)
        head = "t,y,se"
    lines = [head]
    for row in zip(*cols):
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def read_series(path: str | Path) -> TimeSeries:
    path = Path(path)
    return parse_series(path.read_text(encoding="utf-8"), label=path.stem)


# -- synthetic series ------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a trend + Gaussian bump + hinge ramp signal plus noise."""

    n: int = 160
    t_start: float = 1200.0
    t_end: float = 2000.0
    trend_slope: float = 0.0
    bump_center: float = 1600.0
    bump_width: float = 120.0
    bump_depth: float = 0.0
    ramp_start: float = 1920.0
    ramp_slope: float = 0.0
    noise_sd: float = 0.3
    seed: int = 42
    label: str = "synthetic"

    def validate(self) -> None:
        if int(self.n) != self.n or self.n < MIN_POINTS:
            raise InvalidSpec(f"n must be an integer >= {MIN_POINTS}, got {self.n}")
        if not self.t_start < self.t_end:
            raise InvalidSpec("t_start must be less than t_end")
        if not self.bump_width > 0:
            raise InvalidSpec("bump_width must be positive")
        if not self.noise_sd >= 0:
            raise InvalidSpec("noise_sd must be nonnegative")
        nums = (self.t_start, self.t_end, self.trend_slope, self.bump_center,
                self.bump_width, self.bump_depth, self.ramp_start,
                self.ramp_slope, self.noise_sd)
        if not all(math.isfinite(v) for v in nums):
            raise InvalidSpec("all parameters must be finite")
        if self.seed < 0:
            raise InvalidSpec("seed must be nonnegative")

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, int(self.n))

    def mean_function(self, t) -> np.ndarray:
        """Noiseless signal evaluated at ``t``."""
        t = np.asarray(t, dtype=float)
        return (
            self.trend_slope * (t - self.t_start)
            + self.bump_depth * np.exp(-((t - self.bump_center) ** 2) / (2 * self.bump_width**2))
            + self.ramp_slope * np.maximum(0.0, t - self.ramp_start)
        )


PRESETS: dict[str, SyntheticSpec] = {
    "fig1-analogue": SyntheticSpec(
        n=160, t_start=1200, t_end=2000, trend_slope=-0.001,
        bump_center=1600, bump_width=120, bump_depth=-0.8,
        ramp_start=1920, ramp_slope=0.02, noise_sd=0.3, seed=42,
        label="fig1-analogue",
    ),
    "flat": SyntheticSpec(n=100, noise_sd=0.3, label="flat"),
    "trend": SyntheticSpec(n=200, trend_slope=0.01, noise_sd=0.3, label="trend"),
}


def box_muller_normals(seed: int, size: int) -> np.ndarray:
    """Standard normals from a seeded Philox counter generator via Box-Muller.

    Uniform pairs ``(u1, u2)`` with ``u1`` in (0, 1] give
    ``sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)``.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2 * np.pi * u2)
    z[1::2] = r * np.sin(2 * np.pi * u2)
    return z[:size]


def generate_synthetic(spec: SyntheticSpec) -> TimeSeries:
    spec.validate()
    t = spec.grid()
    y = spec.mean_function(t)
    if spec.noise_sd > 0:
        y = y + spec.noise_sd * box_muller_normals(spec.seed, t.size)
    return TimeSeries(t, y, None, spec.label)
