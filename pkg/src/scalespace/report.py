"""Output files: map.csv, smooths.csv, draws.csv, summary.json, figure.svg.

Every writer formats numbers with fixed, locale-independent precision so
the same inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .credibility import CredibilityMap
from .errors import DimensionMismatch
from .model import PosteriorDraws
from .scalespace import DerivativeField, ScaleGrid
from .series_io import TimeSeries

FORMAT_VERSION = "1.0"

MAP_HEADER = ["scale_index", "h", "time_index", "t", "label", "p_pos", "p_neg"]
SMOOTHS_HEADER = ["h", "t", "post_mean_smooth", "post_mean_deriv"]


def _num(x: float) -> str:
    return format(float(x), ".17g")


# -- map.csv ---------------------------------------------------------------

def render_map_csv(cmap: CredibilityMap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MAP_HEADER)
    codes = cmap.label_codes()
    K, n = cmap.shape
    for k in range(K):
        for i in range(n):
            w.writerow([k, _num(cmap.bandwidths[k]), i, _num(cmap.times[i]), codes[k, i],
                        _num(cmap.p_pos[k, i]), _num(cmap.p_neg[k, i])])
    return buf.getvalue()


@dataclass
class MapTable:
    bandwidths: np.ndarray
    times: np.ndarray
    labels: np.ndarray      # K x n of "inc" / "dec" / "none"
    p_pos: np.ndarray
    p_neg: np.ndarray


def parse_map_csv(text: str) -> MapTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != MAP_HEADER:
        raise ValueError(f"unexpected map.csv header {header}")
    rows = list(reader)
    K = max(int(r[0]) for r in rows) + 1
    n = max(int(r[2]) for r in rows) + 1
    if len(rows) != K * n:
        raise ValueError(f"map.csv has {len(rows)} rows, expected {K * n}")
    h = np.empty(K)
    t = np.empty(n)
    labels = np.empty((K, n), dtype=object)
    pp = np.empty((K, n))
    pn = np.empty((K, n))
    for r in rows:
        k, i = int(r[0]), int(r[2])
        h[k] = float(r[1])
        t[i] = float(r[3])
        labels[k, i] = r[4]
        pp[k, i] = float(r[5])
        pn[k, i] = float(r[6])
    return MapTable(h, t, labels.astype(str), pp, pn)


# -- smooths.csv -----------------------------------------------------------

def render_smooths_csv(field: DerivativeField) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SMOOTHS_HEADER)
    for k in field.grid.display_indices():
        h = field.grid.bandwidths[k]
        for i, t in enumerate(field.times):
            w.writerow([_num(h), _num(t), _num(field.mean_smooth[k, i]),
                        _num(field.mean_deriv[k, i])])
    return buf.getvalue()


def parse_smooths_csv(text: str) -> dict[float, np.ndarray]:
    """Map of bandwidth -> ``(n, 3)`` array of ``t, smooth, deriv``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != SMOOTHS_HEADER:
        raise ValueError(f"unexpected smooths.csv header {header}")
    out: dict[float, list] = {}
    for r in reader:
        out.setdefault(float(r[0]), []).append([float(v) for v in r[1:]])
    return {h: np.array(v) for h, v in out.items()}


# -- draws.csv -------------------------------------------------------------

def render_draws_csv(draws: PosteriorDraws) -> str:
    n = draws.times.size
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["draw", "sigma2", "lambda"] + [f"mu_{i}" for i in range(1, n + 1)])
    for m in range(draws.n_draws):
        w.writerow([m + 1, _num(draws.sigma2_draws[m]), _num(draws.lambda_draws[m])]
                   + [_num(v) for v in draws.mu_draws[m]])
    return buf.getvalue()


def parse_draws_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns ``(sigma2, lambda, mu)`` arrays."""
    rows = list(csv.reader(io.StringIO(text)))
    data = np.array(rows[1:], dtype=float)
    return data[:, 1], data[:, 2], data[:, 3:]


# -- summary.json ----------------------------------------------------------

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["format_version", "series", "config", "grid", "map", "sampler", "timings"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "series": {
            "type": "object",
            "required": ["label", "n", "t_first", "t_last", "has_stderrs"],
        },
        "config": {
            "type": "object",
            "required": ["seed", "level", "joint_mode", "model"],
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "joint_mode": {"enum": ["row", "map"]},
                "model": {"type": "object"},
            },
        },
        "grid": {
            "type": "object",
            "required": ["bandwidths", "display_scales"],
            "properties": {
                "bandwidths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                               "minItems": 1},
                "display_scales": {"type": "array", "items": {"type": "number"}, "maxItems": 3},
            },
        },
        "map": {
            "type": "object",
            "required": ["rows"],
            "properties": {
                "rows": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["scale_index", "h", "selected_count", "joint_prob",
                                     "n_increase", "n_decrease"],
                        "properties": {
                            "selected_count": {"type": "integer", "minimum": 0},
                            "joint_prob": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                    },
                },
                "map_joint_prob": {"type": ["number", "null"]},
            },
        },
        "sampler": {
            "type": "object",
            "required": ["draws", "sweeps", "cholesky_ok"],
        },
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


def build_summary(series: TimeSeries, draws: PosteriorDraws, grid: ScaleGrid,
                  cmap: CredibilityMap, timings: dict | None = None) -> dict:
    rows = []
    for k in range(cmap.shape[0]):
        rows.append({
            "scale_index": k,
            "h": float(cmap.bandwidths[k]),
            "selected_count": int(cmap.selected_count[k]),
            "joint_prob": float(cmap.joint_prob[k]),
            "n_increase": int(np.count_nonzero(cmap.labels[k] > 0)),
            "n_decrease": int(np.count_nonzero(cmap.labels[k] < 0)),
        })
    cfg = draws.config_echo
    return {
        "format_version": FORMAT_VERSION,
        "series": {
            "label": series.label,
            "n": series.n,
            "t_first": float(series.times[0]),
            "t_last": float(series.times[-1]),
            "has_stderrs": series.stderrs is not None,
        },
        "config": {
            "seed": int(cfg.seed),
            "level": float(cmap.level),
            "joint_mode": cmap.joint_mode,
            "model": cfg.to_dict(),
        },
        "grid": {
            "bandwidths": [float(h) for h in grid.bandwidths],
            "display_scales": [float(h) for h in grid.display_scales],
        },
        "map": {"rows": rows, "map_joint_prob": cmap.map_joint_prob},
        "sampler": {
            "draws": int(draws.n_draws),
            "sweeps": int(draws.diagnostics.get("sweeps", 0)),
            "cholesky_ok": int(draws.diagnostics.get("cholesky_ok", 0)),
            "sigma2_mean": float(np.mean(draws.sigma2_draws)),
            "lambda_median": float(np.median(draws.lambda_draws)),
        },
        "timings": {k: float(v) for k, v in (timings or {}).items()},
    }


def write_summary_json(series, draws, grid, cmap, timings=None) -> str:
    import jsonschema

    summary = build_summary(series, draws, grid, cmap, timings)
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


# -- figure.svg ------------------------------------------------------------

@dataclass(frozen=True)
class RenderStyle:
    rgb_increase: tuple[int, int, int] = (214, 39, 40)
    rgb_decrease: tuple[int, int, int] = (31, 119, 180)
    rgb_none: tuple[int, int, int] = (180, 180, 180)
    width_px: int = 900
    height_px: int = 640
    show_display_scale_lines: bool = True

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("canvas size must be positive")
        colors = {self.rgb_increase, self.rgb_decrease, self.rgb_none}
        if len(colors) != 3:
            raise ValueError("label colors must be distinct")
        for c in colors:
            if len(c) != 3 or any(not 0 <= v <= 255 for v in c):
                raise ValueError(f"invalid RGB triple {c}")

    def fill(self, label: int) -> str:
        rgb = {1: self.rgb_increase, -1: self.rgb_decrease, 0: self.rgb_none}[int(label)]
        return "#{:02x}{:02x}{:02x}".format(*rgb)


SMOOTH_STROKES = ("#222222", "#7a4f9e", "#2a9d8f")


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _edges(centers: np.ndarray) -> np.ndarray:
    """Cell boundaries at midpoints, extended half a step at both ends."""
    c = np.asarray(centers, dtype=float)
    if c.size == 1:
        return np.array([c[0] - 0.5, c[0] + 0.5])
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[c[0] - (mid[0] - c[0])], mid, [c[-1] + (c[-1] - mid[-1])]])


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * span:
        ticks.append(round(v, 10))
        v += step
    return ticks


def render_map_svg(cmap: CredibilityMap, grid: ScaleGrid, smooths: np.ndarray | None = None,
                   style: RenderStyle = RenderStyle(), series: TimeSeries | None = None) -> str:
    """Two-panel figure: data with display-scale smooths above, credibility map below.

    ``smooths`` is the ``K x n`` array of posterior-mean smooths; only rows
    at the grid's display scales are drawn. ``series`` adds the observed
    values as asterisks.
    """
    K, n = cmap.shape
    if grid.K != K or cmap.times.size != n:
        raise DimensionMismatch(f"map {cmap.shape} vs grid K={grid.K}")
    if smooths is not None and np.shape(smooths) != (K, n):
        raise DimensionMismatch(f"smooths shape {np.shape(smooths)} vs map {cmap.shape}")
    if series is not None and series.n != n:
        raise DimensionMismatch("series length differs from map")

    W, H = style.width_px, style.height_px
    left, right, top, bottom, gap = 70.0, 20.0, 20.0, 45.0, 40.0
    plot_w = W - left - right
    upper_h = (H - top - bottom - gap) * 0.45
    lower_h = (H - top - bottom - gap) - upper_h
    upper_y0 = top
    lower_y0 = top + upper_h + gap

    t_edges = _edges(cmap.times)
    t_lo, t_hi = t_edges[0], t_edges[-1]

    def x_of(t):
        return left + (t - t_lo) / (t_hi - t_lo) * plot_w

    logh = np.log10(cmap.bandwidths)
    h_edges = _edges(logh)
    lh_lo, lh_hi = h_edges[0], h_edges[-1]

    def y_of_logh(v):
        # small scales at the bottom
        return lower_y0 + lower_h - (v - lh_lo) / (lh_hi - lh_lo) * lower_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect class="background" x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
    ]

    # upper panel
    vals = []
    if series is not None:
        vals.append(np.asarray(series.values))
    disp = grid.display_indices()
    if smooths is not None:
        vals.extend(np.asarray(smooths)[k] for k in disp)
    out.append('<g class="upper-panel">')
    out.append(f'<rect class="frame" x="{_f(left)}" y="{_f(upper_y0)}" width="{_f(plot_w)}" '
               f'height="{_f(upper_h)}" fill="none" stroke="#000000"/>')
    if vals:
        allv = np.concatenate(vals)
        v_lo, v_hi = float(allv.min()), float(allv.max())
        if v_hi == v_lo:
            v_lo, v_hi = v_lo - 1.0, v_hi + 1.0
        pad = 0.05 * (v_hi - v_lo)
        v_lo, v_hi = v_lo - pad, v_hi + pad

        def y_of_v(v):
            return upper_y0 + upper_h - (v - v_lo) / (v_hi - v_lo) * upper_h

        for v in _nice_ticks(v_lo, v_hi, 4):
            y = y_of_v(v)
            out.append(f'<line x1="{_f(left - 4)}" y1="{_f(y)}" x2="{_f(left)}" y2="{_f(y)}" stroke="#000000"/>')
            out.append(f'<text x="{_f(left - 6)}" y="{_f(y + 4)}" text-anchor="end">{v:g}</text>')
        if series is not None:
            for t, v in zip(series.times, series.values):
                out.append(f'<text class="obs" x="{_f(x_of(t))}" y="{_f(y_of_v(v) + 4)}" '
                           f'text-anchor="middle" fill="#444444">*</text>')
        if smooths is not None:
            for j, k in enumerate(disp):
                pts = " ".join(f"{_f(x_of(t))},{_f(y_of_v(v))}"
                               for t, v in zip(cmap.times, np.asarray(smooths)[k]))
                out.append(f'<polyline class="smooth" data-h="{cmap.bandwidths[k]:.6g}" '
                           f'points="{pts}" fill="none" stroke="{SMOOTH_STROKES[j % 3]}" '
                           f'stroke-width="2"/>')
    out.append("</g>")

    # lower panel: one rect per cell
    out.append('<g class="lower-panel">')
    for k in range(K):
        y_top = y_of_logh(h_edges[k + 1])
        y_bot = y_of_logh(h_edges[k])
        for i in range(n):
            x0 = x_of(t_edges[i])
            x1 = x_of(t_edges[i + 1])
            out.append(f'<rect class="cell" x="{_f(x0)}" y="{_f(y_top)}" width="{_f(x1 - x0)}" '
                       f'height="{_f(y_bot - y_top)}" fill="{style.fill(cmap.labels[k, i])}"/>')
    if style.show_display_scale_lines:
        for k in disp:
            y = y_of_logh(logh[k])
            out.append(f'<line class="display-scale" x1="{_f(left)}" y1="{_f(y)}" '
                       f'x2="{_f(left + plot_w)}" y2="{_f(y)}" stroke="#000000" stroke-width="1.5"/>')
    out.append(f'<rect class="frame" x="{_f(left)}" y="{_f(lower_y0)}" width="{_f(plot_w)}" '
               f'height="{_f(lower_h)}" fill="none" stroke="#000000"/>')
    for v in _nice_ticks(lh_lo, lh_hi, 4):
        y = y_of_logh(v)
        out.append(f'<line x1="{_f(left - 4)}" y1="{_f(y)}" x2="{_f(left)}" y2="{_f(y)}" stroke="#000000"/>')
        out.append(f'<text x="{_f(left - 6)}" y="{_f(y + 4)}" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{_f(16)}" y="{_f(lower_y0 + lower_h / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_f(lower_y0 + lower_h / 2)})">log10(h)</text>')
    out.append("</g>")

    # shared time axis
    axis_y = lower_y0 + lower_h
    for v in _nice_ticks(float(cmap.times[0]), float(cmap.times[-1]), 8):
        x = x_of(v)
        out.append(f'<line x1="{_f(x)}" y1="{_f(axis_y)}" x2="{_f(x)}" y2="{_f(axis_y + 4)}" stroke="#000000"/>')
        out.append(f'<text x="{_f(x)}" y="{_f(axis_y + 16)}" text-anchor="middle">{v:g}</text>')
    out.append(f'<text x="{_f(left + plot_w / 2)}" y="{_f(H - 8)}" text-anchor="middle">time</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
