"""Command line interface.

Verbs: ``summary``, ``analyze``, ``grid``, ``bound``, ``enumerate``.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import __version__, dist, ols, robustness, specsearch
from .errors import (
    ConsistencyError,
    DataError,
    DomainError,
    SearchTooLargeError,
    SingularDesignError,
)
from .ovb import Extreme, RestrictedFit, adjusted_t
from .robustness import StrengthBounds

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
T_CONSISTENCY_TOL = 1e-6


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    mode: Literal["summary", "data"] = "summary"
    alpha: float = 0.05
    null_value: float = 0.0
    output_format: Literal["text", "json", "csv"] = "text"
    resolution: int = 101

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise UsageError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if self.resolution < 2:
            raise UsageError(f"--resolution must be >= 2, got {self.resolution}")


@dataclass(frozen=True)
class GridSheet:
    axis_y: np.ndarray
    axis_d: np.ndarray
    t_values: np.ndarray
    critical_value: float


def make_grid(fit: RestrictedFit, r2_y_max: float, r2_d_max: float, resolution: int = 101, alpha: float = 0.05) -> GridSheet:
    """Adjusted |t| on an inclusive linear grid of partial R^2 pairs."""
    if not (0.0 <= r2_y_max < 1.0 and 0.0 <= r2_d_max < 1.0):
        raise UsageError("grid bounds must lie in [0, 1)")
    if resolution < 2:
        raise UsageError("resolution must be >= 2")
    ay = np.linspace(0.0, r2_y_max, resolution)
    ad = np.linspace(0.0, r2_d_max, resolution)
    t = adjusted_t(fit.f_stat, ay[:, None], ad[None, :], fit.df - 1)
    return GridSheet(ay, ad, t, dist.t_critical(alpha, fit.df - 1))


# -- payloads -----------------------------------------------------------------


def _num(v):
    """JSON-safe scalar: Extreme markers and infinities become strings."""
    if isinstance(v, Extreme):
        return v.value
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and math.isinf(v):
        return "unbounded" if v > 0 else "-unbounded"
    return v


def report_payload(fit: RestrictedFit, alpha: float, r2_d_caps=()) -> dict:
    rep = robustness.report(fit, alpha, r2_d_caps)
    return {
        "estimate": fit.estimate,
        "std_error": fit.std_error,
        "t": fit.t_stat,
        "df": fit.df,
        "null_value": fit.null_value,
        "alpha": alpha,
        "critical_value": rep.critical_value,
        "already_significant": rep.already_significant,
        "xrvi1": rep.xrvi1,
        "rvi": rep.rvi,
        "xrvi0": _num(rep.xrvi0),
        "xrvi_at": [{"r2_d_max": rd, "xrvi": _num(v)} for rd, v in rep.xrvi_at],
    }


def cmd_summary(
    df: int,
    t: float | None = None,
    estimate: float | None = None,
    std_error: float | None = None,
    alpha: float = 0.05,
    null_value: float = 0.0,
    r2_d_caps=(),
) -> dict:
    fit = _summary_fit(df, t, estimate, std_error, null_value)
    return {"command": "summary", **report_payload(fit, alpha, r2_d_caps)}


def _summary_fit(df, t, estimate, std_error, null_value) -> RestrictedFit:
    have_est = estimate is not None or std_error is not None
    if have_est and (estimate is None or std_error is None):
        raise UsageError("--estimate and --se must be given together")
    if t is None and not have_est:
        raise UsageError("give either --t or both --estimate and --se")
    if have_est:
        fit = RestrictedFit(estimate, std_error, df, null_value)
        if t is not None and abs(fit.t_stat - t) > T_CONSISTENCY_TOL:
            raise UsageError(f"--t {t} disagrees with (estimate - null)/se = {fit.t_stat:.9g}")
        return fit
    if null_value != 0.0:
        # a bare t-statistic already encodes the null
        logging.getLogger(__name__).warning("--null ignored when only --t is given")
    return RestrictedFit.from_t(t, df)


def _benchmark_verdict(strength, rvi_value, fit, alpha) -> tuple[float, str]:
    sol = robustness.t_max(fit, StrengthBounds(strength.r2_y, strength.r2_d))
    t = sol.t_max
    crit = dist.t_critical(alpha, fit.df - 1)
    if robustness.f_critical(alpha, fit.df - 1) <= fit.f_stat:
        return t, "already significant"
    if strength.r2_y < rvi_value and strength.r2_d < rvi_value:
        return t, "below RVI: cannot overturn"
    if isinstance(t, Extreme) or t >= crit:
        return t, "could overturn"
    return t, "cannot overturn"


def cmd_analyze(
    path,
    outcome: str,
    treatment: str,
    covariates=(),
    benchmarks=(),
    alpha: float = 0.05,
    null_value: float = 0.0,
    r2_d_caps=(),
    q95: bool = False,
) -> dict:
    cols = [outcome, treatment, *covariates, *benchmarks]
    data = ols.read_csv(path, columns=cols)
    spec = ols.ModelSpec(outcome, treatment, tuple(covariates))
    fit = ols.restricted_fit(data, spec, null_value)
    r2_d_caps = list(r2_d_caps) + ([robustness.q95_r2d(fit.df)] if q95 else [])
    payload = {"command": "analyze", "n": data.n, "dropped_rows": data.dropped_rows}
    payload.update(report_payload(fit, alpha, r2_d_caps))
    bench = []
    for z in benchmarks:
        s = ols.observed_strength(data, spec, z)
        t, verdict = _benchmark_verdict(s, payload["rvi"], fit, alpha)
        bench.append({"name": z, "r2_y": s.r2_y, "r2_d": s.r2_d, "t_max": _num(t), "verdict": verdict})
    payload["benchmarks"] = bench
    return payload


def cmd_grid(fit: RestrictedFit, r2_y_max: float, r2_d_max: float, resolution: int = 101, alpha: float = 0.05) -> dict:
    g = make_grid(fit, r2_y_max, r2_d_max, resolution, alpha)
    return {
        "command": "grid",
        "t": fit.t_stat,
        "df": fit.df,
        "alpha": alpha,
        "critical_value": g.critical_value,
        "axis_y": g.axis_y.tolist(),
        "axis_d": g.axis_d.tolist(),
        "t_values": g.t_values.tolist(),
    }


def _search_problem(path, outcome, treatment, base, optional, alpha, null_value):
    data = ols.read_csv(path, columns=[outcome, treatment, *base, *optional])
    return specsearch.SearchProblem(data, outcome, treatment, tuple(base), tuple(optional), null_value, alpha)


def _bound_fields(problem, strict) -> dict:
    det = specsearch.bound_details(problem, strict)
    return {
        "t_r": det.base_fit.t_stat,
        "df": det.base_fit.df,
        "p": problem.p,
        "r2_y_max": det.bounds.r2_y_max,
        "r2_d_max": det.bounds.r2_d_max,
        "m": det.m,
        "regime": det.solution.regime,
        "bound": _num(specsearch.phack_bound(problem, strict)),
        "t_max": _num(det.solution.t_max),
    }


def cmd_bound(path, outcome, treatment, base=(), optional=(), alpha=0.05, null_value=0.0, strict=False) -> dict:
    problem = _search_problem(path, outcome, treatment, base, optional, alpha, null_value)
    return {"command": "bound", "alpha": alpha, **_bound_fields(problem, strict)}


def cmd_enumerate(
    path, outcome, treatment, base=(), optional=(), alpha=0.05, null_value=0.0,
    cap=specsearch.DEFAULT_CAP, workers=None, strict=False,
) -> dict:
    problem = _search_problem(path, outcome, treatment, base, optional, alpha, null_value)
    payload = {"command": "enumerate", "alpha": alpha, **_bound_fields(problem, strict)}
    try:
        res = specsearch.enumerate_specs(problem, cap=cap, workers=workers)
    except SearchTooLargeError as exc:
        payload["notice"] = str(exc)
        return payload
    payload.update(
        exact_max_t=_num(res.exact_max_t),
        argmax_subset=res.argmax_subset,
        n_significant=res.n_significant,
        n_total=res.n_total,
        n_singular=res.n_singular,
    )
    return payload


# -- rendering ------------------------------------------------------------------


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _pct(v) -> str:
    if isinstance(v, str):
        return v
    return f"{100 * v:.3g}%"


def _g(v, digits=4) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return f"{v:.{digits}g}"


def _table(headers, rows) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _text_report(p: dict) -> list[str]:
    out = [
        _table(
            ["Estimate", "Std. Error", "t-statistic", "XRVI1", "RVI", "XRVI0"],
            [[_g(p["estimate"], 3), _g(p["std_error"], 3), _g(p["t"], 3), _pct(p["xrvi1"]), _pct(p["rvi"]), _pct(p["xrvi0"])]],
        ),
        f"Note: df = {p['df']}, null = {_g(p['null_value'])}, alpha = {_g(p['alpha'])}, "
        f"critical t (df-1) = {_g(p['critical_value'])}",
    ]
    if p["already_significant"]:
        out.append("already significant: no added covariate is needed")
    for row in p["xrvi_at"]:
        out.append(f"XRVI at r2_d_max = {_g(row['r2_d_max'])}: {_pct(row['xrvi'])}")
    return out


def render_text(p: dict) -> str:
    cmd = p["command"]
    if cmd == "summary":
        lines = _text_report(p)
    elif cmd == "analyze":
        lines = [f"n = {p['n']} (dropped {p['dropped_rows']} incomplete rows)"] + _text_report(p)
        if p["benchmarks"]:
            lines.append("")
            lines.append(
                _table(
                    ["Benchmark", "R2_Y", "R2_D", "t_max", "Verdict"],
                    [[b["name"], _pct(b["r2_y"]), _pct(b["r2_d"]), _g(b["t_max"]), b["verdict"]] for b in p["benchmarks"]],
                )
            )
    elif cmd == "grid":
        lines = [f"critical value: {_g(p['critical_value'], 6)}", _grid_csv(p).rstrip("\n")]
    elif cmd in ("bound", "enumerate"):
        lines = [
            f"base model: t_r = {_g(p['t_r'])}, df = {p['df']}, p = {p['p']} optional covariates",
            f"joint strengths: R2_Y = {_pct(p['r2_y_max'])}, R2_D = {_pct(p['r2_d_max'])}",
            f"bound on max |t| (m = {p['m']}, {p['regime']}): {_g(p['bound'])}",
        ]
        if "notice" in p:
            lines.append(f"notice: {p['notice']}")
        elif cmd == "enumerate":
            lines += [
                f"exact max |t|: {_g(p['exact_max_t'])} with [{', '.join(p['argmax_subset'])}]",
                f"significant specifications: {p['n_significant']} of {p['n_total']}"
                + (f" ({p['n_singular']} singular, skipped)" if p["n_singular"] else ""),
            ]
    else:  # pragma: no cover
        raise ValueError(cmd)
    return "\n".join(lines) + "\n"


def _grid_csv(p: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r2_y\\r2_d", *[repr(v) for v in p["axis_d"]]])
    for y, row in zip(p["axis_y"], p["t_values"]):
        w.writerow([repr(y), *[repr(v) for v in row]])
    return buf.getvalue()


def render_csv(p: dict) -> str:
    if p["command"] == "grid":
        return _grid_csv(p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in p.items():
        if isinstance(v, list):
            if v and isinstance(v[0], dict):
                for i, item in enumerate(v):
                    for kk, vv in item.items():
                        w.writerow([f"{k}.{i}.{kk}", vv])
                continue
            v = ";".join(map(str, v))
        w.writerow([k, v])
    return buf.getvalue()


def render(payload: dict, fmt: str) -> str:
    return {"text": render_text, "json": render_json, "csv": render_csv}[fmt](payload)


# -- argument parsing -----------------------------------------------------------


def _names(text: str) -> list[str]:
    return [c.strip() for c in text.split(",") if c.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--null", type=float, default=0.0, dest="null_value", help="null value of the coefficient")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text", dest="output_format")
    p.add_argument("--output", metavar="PATH", help="write to PATH instead of stdout")


def _fit_inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("summary statistics")
    g.add_argument("--t", type=float, help="observed t-statistic")
    g.add_argument("--estimate", type=float)
    g.add_argument("--se", type=float, dest="std_error")
    g.add_argument("--df", type=int, help="residual degrees of freedom of the observed regression")


def _data_inputs(p: argparse.ArgumentParser, csv_required: bool) -> None:
    if csv_required:
        p.add_argument("csv", help="comma-separated file with a header row")
    else:
        p.add_argument("--data", dest="csv", metavar="CSV", help="fit the restricted model from this file")
    p.add_argument("--outcome", required=csv_required)
    p.add_argument("--treatment", required=csv_required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigreversal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summary", help="robustness values from summary statistics")
    _fit_inputs(p)
    p.add_argument("--r2d-max", type=float, action="append", default=[], help="extra cap on R2_D (repeatable)")
    p.add_argument("--q95", action="store_true", help="also report XRVI at the randomized-treatment 95%% R2_D")
    _common(p)

    p = sub.add_parser("analyze", help="robustness values and benchmarks from raw data")
    _data_inputs(p, True)
    p.add_argument("--covariates", type=_names, default=[], help="comma-separated covariate names")
    p.add_argument("--benchmark", type=_names, default=[], help="comma-separated benchmark covariates")
    p.add_argument("--r2d-max", type=float, action="append", default=[])
    p.add_argument("--q95", action="store_true")
    _common(p)

    p = sub.add_parser("grid", help="adjusted |t| over a grid of partial R2 pairs")
    _fit_inputs(p)
    _data_inputs(p, False)
    p.add_argument("--covariates", type=_names, default=[])
    p.add_argument("--r2y-max", type=float, required=True)
    p.add_argument("--r2d-max", type=float, required=True)
    p.add_argument("--resolution", type=int, default=101)
    _common(p)

    for name, text in (("bound", "closed-form bound on specification search"), ("enumerate", "fit every specification")):
        p = sub.add_parser(name, help=text)
        _data_inputs(p, True)
        p.add_argument("--base", type=_names, default=[], help="always-included covariates")
        p.add_argument("--optional", type=_names, default=[], help="covariates toggled in and out")
        p.add_argument("--strict", action="store_true", help="correct degrees of freedom by p instead of 1")
        if name == "enumerate":
            p.add_argument("--cap", type=int, default=specsearch.DEFAULT_CAP, help="refuse enumeration above 2**cap")
            p.add_argument("--workers", type=int, default=None, help="worker threads (default RVI_THREADS or all cores)")
        _common(p)
    return parser


def _caps(args, df: int) -> list[float]:
    caps = list(args.r2d_max)
    if args.q95:
        caps.append(robustness.q95_r2d(df))
    return caps


def run(args) -> dict:
    cfg = AnalysisConfig(
        mode="data" if getattr(args, "csv", None) else "summary",
        alpha=args.alpha,
        null_value=args.null_value,
        output_format=args.output_format,
        resolution=getattr(args, "resolution", 101),
    )
    if args.command == "summary":
        if args.df is None:
            raise UsageError("--df is required")
        fit = _summary_fit(args.df, args.t, args.estimate, args.std_error, cfg.null_value)
        return {"command": "summary", **report_payload(fit, cfg.alpha, _caps(args, fit.df))}
    if args.command == "analyze":
        return cmd_analyze(
            args.csv, args.outcome, args.treatment, args.covariates, args.benchmark,
            cfg.alpha, cfg.null_value, args.r2d_max, q95=args.q95,
        )
    if args.command == "grid":
        if cfg.mode == "data":
            if not (args.outcome and args.treatment):
                raise UsageError("--data requires --outcome and --treatment")
            data = ols.read_csv(args.csv, columns=[args.outcome, args.treatment, *args.covariates])
            fit = ols.restricted_fit(data, ols.ModelSpec(args.outcome, args.treatment, tuple(args.covariates)), cfg.null_value)
        else:
            if args.df is None:
                raise UsageError("--df is required")
            fit = _summary_fit(args.df, args.t, args.estimate, args.std_error, cfg.null_value)
        return cmd_grid(fit, args.r2y_max, args.r2d_max, cfg.resolution, cfg.alpha)
    if args.command == "bound":
        return cmd_bound(args.csv, args.outcome, args.treatment, args.base, args.optional, cfg.alpha, cfg.null_value, args.strict)
    if args.command == "enumerate":
        return cmd_enumerate(
            args.csv, args.outcome, args.treatment, args.base, args.optional, cfg.alpha, cfg.null_value,
            cap=args.cap, workers=args.workers, strict=args.strict,
        )
    raise UsageError(f"unknown command {args.command}")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        text = render(run(args), args.output_format)
    except (UsageError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SingularDesignError, ConsistencyError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
