"""Command-line front end: parses run configurations, dispatches experiments,
and emits CSV/JSON reports plus optional SVG convergence plots.

Exit codes: 0 when every check passes (INFO rows never fail a run), 2 when
any verdict is FAIL, 1 for usage or I/O errors.  The same configuration and
seed always produce byte-identical artifacts, whatever the worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .hgroup import ProductSpec
from .lab import (
    DEFAULT_EPS_GRID,
    ExperimentReport,
    bound_fuzz,
    duality_check,
    geometry_selftest,
    radialization_check,
    sharpness_sweep,
    volume_check,
    weighted_sharpness,
)
from .funcs import parse_test_function
from .operators import parse_weight

SUBCOMMANDS = (
    "geometry-check",
    "sharpness",
    "fuzz",
    "radialize-check",
    "weighted",
    "cesaro-duality",
    "volume",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through exit code 1."""

    def error(self, message: str):  # noqa: D401
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="hardylab", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    common = _Parser(add_help=False)
    common.add_argument("--p", type=float, default=None, help="Lebesgue exponent in (1, inf)")
    common.add_argument("--factors", type=str, default=None,
                        help="comma-separated group orders, e.g. 1,1")
    common.add_argument("--eps", type=str, default=None, help="comma-separated eps grid")
    common.add_argument("--weight", type=str, default=None,
                        help="weight spec: one | monomial:a1,... | table:<file>")
    common.add_argument("--function", type=str, default=None,
                        help="test function: power-inside:a1,... | power-outside:b1,... "
                             "| bumps:<file> (extra scored row in `fuzz`)")
    common.add_argument("--method", type=str, default=None, choices=("closed", "radial", "mc"))
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--inner-samples", type=int, default=None, dest="inner_samples")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--pairs", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--n", type=int, default=None, help="group order (volume subcommand)")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--format", type=str, default=None, choices=("csv", "json"))
    common.add_argument("--output", type=str, default=None, help="output path, '-' for stdout")
    common.add_argument("--plot", action="store_true", default=None,
                        help="also write an SVG convergence plot next to the output")
    common.add_argument("--config", type=str, default=None, help="JSON config file")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_DEFAULTS = {
    "p": 2.0,
    "factors": "1",
    "eps": ",".join(str(e) for e in DEFAULT_EPS_GRID),
    "weight": "monomial:3",
    "function": None,
    "method": "closed",
    "samples": 100_000,
    "inner_samples": 768,
    "trials": 50,
    "pairs": 20,
    "tol": 1e-10,
    "n": 1,
    "workers": 1,
    "format": "json",
    "output": "-",
    "plot": False,
}


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flag values over config-file values over defaults."""
    cfg = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config file: {err}") from err
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    out = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
        else:
            out[key] = default
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    elif "seed" in cfg:
        out["seed"] = int(cfg["seed"])
    elif os.environ.get("HARDYLAB_SEED"):
        out["seed"] = int(os.environ["HARDYLAB_SEED"])
    else:
        out["seed"] = 0
    return out


def _validate(cmd: str, cfg: dict) -> None:
    if not 1.0 < cfg["p"] < math.inf:
        raise UsageError(f"--p must lie in (1, inf), got {cfg['p']}")
    try:
        factors = [int(v) for v in str(cfg["factors"]).split(",") if v != ""]
    except ValueError as err:
        raise UsageError(f"bad --factors: {err}") from err
    if not factors or any(n < 1 for n in factors):
        raise UsageError("--factors needs at least one positive group order")
    cfg["factors_list"] = factors
    try:
        cfg["eps_list"] = [float(v) for v in str(cfg["eps"]).split(",") if v != ""]
    except ValueError as err:
        raise UsageError(f"bad --eps grid: {err}") from err
    if any(not 0.0 < e < 1.0 for e in cfg["eps_list"]):
        raise UsageError("--eps values must lie in (0, 1)")
    uses_mc = cfg["method"] == "mc" or cmd in (
        "fuzz", "radialize-check", "cesaro-duality", "geometry-check", "volume"
    )
    if uses_mc and cfg["samples"] < 1000:
        raise UsageError("--samples must be at least 1000 for Monte Carlo runs")
    if cfg["n"] < 1:
        raise UsageError("--n must be a positive integer")
    if cfg["plot"] and cfg["output"] in (None, "-"):
        raise UsageError("--plot needs an --output path for the SVG sibling file")


def _dispatch(cmd: str, cfg: dict) -> ExperimentReport:
    spec = ProductSpec.of_orders(*cfg["factors_list"])
    seed = cfg["seed"]
    if cmd == "geometry-check":
        return geometry_selftest(seed=seed, samples=cfg["samples"])
    if cmd == "sharpness":
        return sharpness_sweep(
            cfg["p"], spec, eps_grid=tuple(cfg["eps_list"]), method=cfg["method"],
            samples=cfg["samples"], inner_samples=cfg["inner_samples"],
            seed=seed, workers=cfg["workers"],
        )
    if cmd == "fuzz":
        extra = None
        if cfg.get("function"):
            try:
                extra = parse_test_function(cfg["function"], spec)
            except (ValueError, OSError) as err:
                raise UsageError(f"bad --function: {err}") from err
        return bound_fuzz(
            cfg["trials"], cfg["p"], spec, samples=cfg["samples"],
            seed=seed, workers=cfg["workers"], extra_function=extra,
        )
    if cmd == "radialize-check":
        return radialization_check(
            cfg["trials"], cfg["p"], spec, samples=max(cfg["samples"] // 16, 1000),
            inner_samples=min(cfg["inner_samples"], 64), seed=seed, workers=cfg["workers"],
        )
    if cmd == "weighted":
        phi = parse_weight(cfg["weight"], spec.m)
        if not phi.is_monomial:
            raise UsageError("the weighted sweep needs a monomial weight")
        return weighted_sharpness(phi, cfg["p"], spec, seed=seed)
    if cmd == "cesaro-duality":
        phi = parse_weight(cfg["weight"], spec.m)
        return duality_check(
            phi, cfg["p"], spec, pairs=cfg["pairs"], samples=cfg["samples"],
            seed=seed, workers=cfg["workers"],
        )
    if cmd == "volume":
        return volume_check(cfg["n"], samples=cfg["samples"], seed=seed)
    raise UsageError(f"unknown subcommand {cmd!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def report_to_csv(report: ExperimentReport) -> str:
    params = json.dumps({**report.params, "seed": report.seed},
                        sort_keys=True, separators=(",", ":"))
    lines = ["experiment,param_json,input,estimate,std_error,oracle,deviation,sigma_multiple,verdict"]
    for row in report.rows:
        cells = [
            report.experiment,
            '"' + params.replace('"', '""') + '"',
            '"' + row.input.replace('"', '""') + '"',
            _fmt(row.estimate),
            _fmt(row.std_error),
            _fmt(row.oracle),
            _fmt(row.deviation),
            _fmt(row.sigma_multiple),
            row.verdict,
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def report_to_json(report: ExperimentReport) -> str:
    payload = {
        "experiment": report.experiment,
        "params": report.params,
        "rows": [
            {
                "input": r.input,
                "estimate": r.estimate,
                "std_error": r.std_error,
                "oracle": r.oracle,
                "deviation": r.deviation,
                "sigma_multiple": r.sigma_multiple,
                "verdict": r.verdict,
            }
            for r in report.rows
        ],
        "summary": report.summary,
        "seed": report.seed,
        # measured time is reported on stderr; the file stays byte-identical
        # across reruns of the same config and seed
        "wall_time_ms": None,
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def render_svg(report: ExperimentReport) -> str:
    """One polyline of the swept series against eps, with a single horizontal
    rule at the report's reference constant.  viewBox is 800x500."""
    series_name = report.params.get("plot_series", "quotient")
    rule = report.params.get("plot_rule")
    pts = []
    for row in report.rows:
        if row.input.startswith(f"{series_name} eps=") and "(" not in row.input:
            eps = float(row.input.split("eps=")[1].split()[0])
            pts.append((eps, row.estimate))
    pts.sort()
    if not pts:
        raise ValueError("report has no swept series to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    y_all = ys + ([rule] if rule is not None else [])
    x_lo, x_hi = 0.0, max(xs) * 1.05
    y_lo = min(y_all) - 0.1 * (max(y_all) - min(y_all) + 1e-9)
    y_hi = max(y_all) + 0.1 * (max(y_all) - min(y_all) + 1e-9)
    L, R, T, B = 70.0, 770.0, 40.0, 460.0

    def sx(x: float) -> float:
        return L + (R - L) * (x - x_lo) / (x_hi - x_lo)

    def sy(y: float) -> float:
        return B - (B - T) * (y - y_lo) / (y_hi - y_lo)

    poly = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in pts)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 500">',
        '<rect x="0" y="0" width="800" height="500" fill="white"/>',
        f'<path d="M {L} {T} L {L} {B} L {R} {B}" stroke="black" fill="none" stroke-width="1"/>',
    ]
    if rule is not None:
        parts.append(
            f'<line x1="{L}" y1="{sy(rule):.3f}" x2="{R}" y2="{sy(rule):.3f}" '
            'stroke="crimson" stroke-dasharray="6 4" stroke-width="1.5"/>'
        )
    parts.append(
        f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>'
    )
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.3f}" cy="{sy(y):.3f}" r="3" fill="steelblue"/>')
    parts.append(
        f'<text x="{(L + R) / 2:.0f}" y="490" text-anchor="middle" font-size="14">eps</text>'
    )
    parts.append(
        f'<text x="16" y="{(T + B) / 2:.0f}" font-size="14" '
        f'transform="rotate(-90 16 {(T + B) / 2:.0f})" text-anchor="middle">{series_name}</text>'
    )
    title = f"{report.experiment}: {series_name} vs eps"
    parts.append(f'<text x="{(L + R) / 2:.0f}" y="24" text-anchor="middle" font-size="16">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(report: ExperimentReport, fmt: str, path: str, plot: bool = False) -> None:
    """Write the report (and optionally its SVG sibling) with LF endings."""
    text = report_to_csv(report) if fmt == "csv" else report_to_json(report)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if plot:
        svg_path = os.path.splitext(path)[0] + ".svg"
        with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(report))


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
        cfg = _resolve(args)
        _validate(args.command, cfg)
        report = _dispatch(args.command, cfg)
        emit_report(report, cfg["format"], cfg["output"], plot=bool(cfg["plot"]))
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        # bad parameter combinations surface from the experiments themselves,
        # e.g. an eps outside the admissible range for the chosen p
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1
    if report.wall_time_ms is not None:
        print(f"[{report.experiment}] wall time {report.wall_time_ms:.0f} ms, "
              f"summary: {report.summary}", file=sys.stderr)
    return 0 if report.passed else 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
