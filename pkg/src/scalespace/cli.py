"""Command line entry point: ``scalespace analyze`` and ``scalespace synth``.

Exit codes: 0 success, 1 usage, 2 input, 3 numerical, 4 io. On failure a
single line ``error: <category>: <message>`` goes to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .credibility import JOINT_MODES, build_map
from .errors import InputError, LevelOutOfRange, ScaleSpaceError
from .model import ModelConfig, gibbs_sample
from .report import (
    RenderStyle,
    render_draws_csv,
    render_map_csv,
    render_map_svg,
    render_smooths_csv,
    write_summary_json,
)
from .scalespace import make_scale_grid, push_draws
from .series_io import (
    PRESETS,
    SyntheticSpec,
    TimeSeries,
    generate_synthetic,
    read_series,
    render_series,
)

EXIT_CODES = {"usage": 1, "input": 2, "numerical": 3, "io": 4}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    input_path: str | None
    out_dir: str
    model: ModelConfig
    K: int = 30
    h_min: float | None = None
    h_max: float | None = None
    display_scales: tuple[float, ...] | None = None
    level: float = 0.95
    joint_mode: str = "row"
    emit_draws: bool = False
    synth: str | None = None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not 1 <= len(vals) <= 3:
        raise argparse.ArgumentTypeError("between one and three display scales")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scalespace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run the full pipeline and write the output directory")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="series CSV (header t,y or t,y,se)")
    src.add_argument("--synth", choices=sorted(PRESETS), help="analyze a synthetic preset")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--seed", type=int, default=42)
    a.add_argument("--burnin", type=int, default=1000)
    a.add_argument("--draws", type=int, default=4000)
    a.add_argument("--thin", type=int, default=1)
    a.add_argument("--rho", type=float, default=0.0)
    a.add_argument("--scales", type=int, default=30, metavar="K")
    a.add_argument("--hmin", type=float)
    a.add_argument("--hmax", type=float)
    a.add_argument("--display", type=_float_list, metavar="h1,h2,h3")
    a.add_argument("--level", type=float, default=0.95)
    a.add_argument("--joint", choices=JOINT_MODES, default="row")
    a.add_argument("--emit-draws", action="store_true")

    s = sub.add_parser("synth", help="write a synthetic series as CSV")
    s.add_argument("preset", choices=sorted(PRESETS))
    s.add_argument("--n", type=int)
    s.add_argument("--t-start", type=float)
    s.add_argument("--t-end", type=float)
    s.add_argument("--slope", type=float, help="linear trend, units per year")
    s.add_argument("--bump-center", type=float)
    s.add_argument("--bump-width", type=float)
    s.add_argument("--bump-depth", type=float)
    s.add_argument("--ramp-start", type=float)
    s.add_argument("--ramp-slope", type=float)
    s.add_argument("--noise", type=float, help="noise standard deviation")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="output file (default: stdout)")
    return parser


def _synth_spec(args) -> SyntheticSpec:
    overrides = {
        "n": args.n, "t_start": args.t_start, "t_end": args.t_end,
        "trend_slope": args.slope, "bump_center": args.bump_center,
        "bump_width": args.bump_width, "bump_depth": args.bump_depth,
        "ramp_start": args.ramp_start, "ramp_slope": args.ramp_slope,
        "noise_sd": args.noise, "seed": args.seed,
    }
    return dataclasses.replace(PRESETS[args.preset],
                               **{k: v for k, v in overrides.items() if v is not None})


def cmd_synth(args) -> int:
    series = generate_synthetic(_synth_spec(args))
    text = render_series(series)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def run_config_from_args(args) -> RunConfig:
    model = ModelConfig(burn_in=args.burnin, n_draws=args.draws, thin=args.thin,
                        rho=args.rho, seed=args.seed)
    return RunConfig(
        input_path=args.input, out_dir=args.out_dir, model=model, K=args.scales,
        h_min=args.hmin, h_max=args.hmax, display_scales=args.display,
        level=args.level, joint_mode=args.joint, emit_draws=args.emit_draws,
        synth=args.synth,
    )


def _load_series(cfg: RunConfig) -> TimeSeries:
    if cfg.synth is not None:
        # all randomness flows from the run seed
        return generate_synthetic(dataclasses.replace(PRESETS[cfg.synth], seed=cfg.model.seed))
    path = Path(cfg.input_path)
    try:
        return read_series(path)
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}") from None
    except (IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read input {path}: {exc}") from None
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None


def run_analysis(cfg: RunConfig) -> dict:
    """Run the pipeline and write all outputs; returns the in-memory results."""
    timings = {}
    t0 = time.perf_counter()
    series = _load_series(cfg)
    if cfg.level <= 0 or cfg.level >= 1:
        raise LevelOutOfRange(f"level must lie in (0, 1), got {cfg.level}")
    grid = make_scale_grid(series, cfg.K, cfg.h_min, cfg.h_max, cfg.display_scales)
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    draws = gibbs_sample(series, cfg.model)
    timings["sample"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    field = push_draws(draws, grid)
    timings["scale_space"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cmap = build_map(field, cfg.level, cfg.joint_mode)
    timings["credibility"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _write(out / "map.csv", render_map_csv(cmap))
    _write(out / "smooths.csv", render_smooths_csv(field))
    _write(out / "figure.svg", render_map_svg(cmap, grid, field.mean_smooth, RenderStyle(), series))
    if cfg.emit_draws:
        _write(out / "draws.csv", render_draws_csv(draws))
    timings["render"] = time.perf_counter() - t0
    _write(out / "summary.json", write_summary_json(series, draws, grid, cmap, timings))
    return {"series": series, "draws": draws, "grid": grid, "field": field, "map": cmap}


def cmd_analyze(args) -> int:
    run_analysis(run_config_from_args(args))
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_analyze(args)
    except UsageError as exc:
        category, message = "usage", str(exc)
    except ScaleSpaceError as exc:
        category, message = exc.category, str(exc)
    except OSError as exc:
        category, message = "io", str(exc)
    message = " ".join(message.split())
    print(f"error: {category}: {message}", file=sys.stderr)
    return EXIT_CODES[category]


if __name__ == "__main__":
    sys.exit(main())
