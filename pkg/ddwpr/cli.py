"""
DDWPR Command Line
Reproduces the printed tables, emits measure data for plotting, samples variates and runs oracle comparisons

This is the only module that reads flags or writes output. Tables go to
stdout (or --out) and log records to stderr, so the table bytes depend only on
the flags.
"""
import argparse
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from ddwpr import __version__
from ddwpr import ddwpr_dist as dd
from ddwpr import tddwpr_dist as td
from ddwpr.core.errors import DdwprError, DomainError, UndefinedMeasureError
from ddwpr.core.series_kernel import DEFAULT_EPS, DEFAULT_KMAX, SeriesControl, continuous_range_pdf
from ddwpr.services import golden_tables
from ddwpr.wiener_oracle import OracleConfig, compare_to_analytic, default_steps, simulate_ranges

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"
SIGNIFICANT_DIGITS = 10

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# Flags that change how a run executes but not what it computes
EXECUTION_FLAGS = ("workers", "out", "log_level")

TABLE1_T = [1.0, 2.0, 3.0]
TABLE2_T = [15.0, 20.0, 25.0]
TABLE3_T = [25.0, 50.0, 75.0, 100.0]
TABLE3_R = [1, 2, 3, 4, 5, 9, 10]
TABLE_A, TABLE_B = 3, 10

MOMENT_HEADERS = ["raw1", "raw2", "raw3", "raw4", "central2", "central3", "central4",
                  "skewness", "excess_kurtosis"]

SAMPLE_BATCH_MIN = 1024
MAX_REJECTION_ROUNDS = 10_000

Cell = Union[int, float, str]


# -------------------------------------------------------
# Output table
# -------------------------------------------------------
class OutputTable(BaseModel):
    """A rectangular result table with an optional companion (deviation) table"""
    headers: List[str]
    rows: List[List[Cell]]
    format: str = Field(default="csv", pattern="^(csv|json)$")
    meta: Dict[str, Any] = Field(default_factory=dict)
    companion: Optional["OutputTable"] = None

    @model_validator(mode="after")
    def check_row_lengths(self) -> "OutputTable":
        for i, row in enumerate(self.rows):
            if len(row) != len(self.headers):
                raise ValueError(f"row {i} has {len(row)} cells for {len(self.headers)} headers")
        return self


OutputTable.model_rebuild()


def normalize_cell(value: Any) -> Cell:
    """Round numbers to 10 significant digits; NaN and missing values become 'undefined'."""
    if value is None:
        return UNDEFINED
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return int(value)
    number = float(value)
    if not math.isfinite(number):
        return UNDEFINED
    return float(f"{number:.{SIGNIFICANT_DIGITS}g}")


def make_table(headers: List[str], rows: Sequence[Sequence[Any]], args: argparse.Namespace,
               companion: Optional[OutputTable] = None, **meta: Any) -> OutputTable:
    return OutputTable(
        headers=headers,
        rows=[[normalize_cell(v) for v in row] for row in rows],
        format=args.format,
        meta={**run_meta(args), **meta},
        companion=companion,
    )


def run_meta(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in EXECUTION_FLAGS and k not in ("func", "command")}
    return {
        "tool": "ddwpr",
        "version": __version__,
        "command": args.command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
    }


def _csv_text(cell: Cell) -> str:
    if isinstance(cell, float):
        return f"{cell:.{SIGNIFICANT_DIGITS}g}"
    return str(cell)


def _csv_block(table: OutputTable) -> str:
    frame = pd.DataFrame([[_csv_text(c) for c in row] for row in table.rows],
                         columns=table.headers, dtype=object)
    return frame.to_csv(index=False, lineterminator="\n")


def _json_payload(table: OutputTable) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"headers": table.headers, "rows": table.rows}
    if table.meta:
        payload["meta"] = table.meta
    if table.companion is not None:
        payload["companion"] = _json_payload(table.companion)
    return payload


def render(table: OutputTable) -> str:
    """CSV (companion after one blank line) or JSON (companion nested) text of a table."""
    if table.format == "json":
        return json.dumps(_json_payload(table), indent=2, ensure_ascii=False) + "\n"
    text = _csv_block(table)
    if table.companion is not None:
        text += "\n" + _csv_block(table.companion)
    return text


# -------------------------------------------------------
# Argument types
# -------------------------------------------------------
def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {value!r}")
    if not math.isfinite(number) or number <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {value!r}")
    return number


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if number <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    return number


def nonnegative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value!r}")
    return number


def horizon_list(value: str) -> List[float]:
    """Comma-separated horizons; the empty string is an empty list."""
    return [positive_float(part.strip()) for part in value.split(",") if part.strip()]


def series_control(args: argparse.Namespace) -> SeriesControl:
    return SeriesControl(eps=args.eps, kmax=args.kmax)


def _window(args: argparse.Namespace) -> Optional[Tuple[int, int]]:
    if args.a is None and args.b is None:
        return None
    if args.a is None or args.b is None:
        raise DomainError("--a and --b must be given together")
    return args.a, args.b


def _evaluate(fn: Callable[..., float], *fn_args: Any) -> Cell:
    try:
        return fn(*fn_args)
    except (UndefinedMeasureError, DomainError) as e:
        logger.debug(f"undefined cell: {e}")
        return UNDEFINED


# -------------------------------------------------------
# Commands
# -------------------------------------------------------
DIST_MEASURES: Dict[str, Callable[[dd.DdwprSpec, int], float]] = {
    "pmf": dd.pmf,
    "cdf": dd.cdf,
    "survival": dd.survival,
    "hazard": dd.hazard,
    "rhazard": dd.reversed_hazard,
    "srate": dd.second_rate_of_failure,
    "mrl": dd.mrl_L,
    "mrlmu": dd.mrl_mu,
}

TDIST_MEASURES: Dict[str, Callable[[td.TddwprSpec, int], float]] = {
    "pmf": td.t_pmf,
    "cdf": td.t_cdf,
    "survival": td.t_survival,
    "hazard": td.t_hazard,
    "rhazard": td.t_reversed_hazard,
    "srate": td.t_second_rate,
}


def cmd_dist(args: argparse.Namespace) -> OutputTable:
    """One DDWPR measure per r in r_min..r_max (cpdf: continuous density on an r-step grid)."""
    if args.r_min > args.r_max:
        raise DomainError(f"--r-min {args.r_min} exceeds --r-max {args.r_max}")
    spec = dd.DdwprSpec(T=args.T, ctrl=series_control(args))

    if args.measure == "cpdf":
        count = int(math.floor((args.r_max - args.r_min) / args.r_step + 1e-9)) + 1
        grid = [args.r_min + i * args.r_step for i in range(count)]
        rows = [[r, continuous_range_pdf(r, spec.T, spec.ctrl)] for r in grid]
    elif args.measure == "pmf" and args.r_max >= 0:
        masses = dd.pmf_table(spec, args.r_max)
        rows = [[r, masses[r] if r >= 0 else UNDEFINED] for r in range(args.r_min, args.r_max + 1)]
    else:
        measure = DIST_MEASURES[args.measure]
        rows = [[r, _evaluate(measure, spec, r)] for r in range(args.r_min, args.r_max + 1)]
    return make_table(["r", args.measure], rows, args)


def cmd_tdist(args: argparse.Namespace) -> OutputTable:
    """One TDDWPR measure per r; the r range defaults to the window a..b."""
    spec = td.TddwprSpec(base=dd.DdwprSpec(T=args.T, ctrl=series_control(args)), a=args.a, b=args.b)
    r_min = spec.a if args.r_min is None else args.r_min
    r_max = spec.b if args.r_max is None else args.r_max
    if r_min > r_max:
        raise DomainError(f"--r-min {r_min} exceeds --r-max {r_max}")
    measure = TDIST_MEASURES[args.measure]
    rows = [[r, _evaluate(measure, spec, r)] for r in range(r_min, r_max + 1)]
    return make_table(["r", args.measure], rows, args, normalizer=normalize_cell(spec.xi))


def _moment_row(summary: dd.MomentSummary) -> List[float]:
    return [*summary.raw, *summary.central, summary.skewness, summary.excess_kurtosis]


def cmd_table1(args: argparse.Namespace) -> OutputTable:
    """Moment table for DDWPR, or for TDDWPR on [a, b] when --a/--b are given."""
    frame = golden_tables.load_golden_table(args.golden)
    window = _window(args)
    ctrl = series_control(args)
    if window is None:
        table_id, default_T = "table1", TABLE1_T
    else:
        table_id, default_T = "table2", TABLE2_T
    T_values = default_T if args.T_list is None else args.T_list

    computed: Dict[Tuple[float, str], float] = {}
    rows = []
    for T in T_values:
        spec = dd.DdwprSpec(T=T, ctrl=ctrl)
        if window is None:
            summary = dd.moments(spec)
        else:
            summary = td.t_moments(td.TddwprSpec(base=spec, a=window[0], b=window[1]))
        values = _moment_row(summary)
        computed.update({(float(T), q): v for q, v in zip(MOMENT_HEADERS, values)})
        rows.append([T, *values])
        logger.info(f"{table_id} T={T}: mean {summary.mean:.10g}")

    cells = golden_tables.golden_cells(frame, table_id, T_values)
    if window is not None:
        cells = cells[(cells["a"] == window[0]) & (cells["b"] == window[1])]
    deviations = golden_tables.compare_cells(
        cells, lambda cell: computed.get((float(cell["T"]), cell["quantity"]), UNDEFINED))
    companion = make_table(golden_tables.COMPANION_HEADERS, deviations, args)
    return make_table(["T", *MOMENT_HEADERS], rows, args, companion=companion, table=table_id)


def _window_spec(spec: dd.DdwprSpec, a: int, b: int) -> Optional[td.TddwprSpec]:
    """The truncated law on [a, b], or None when the window carries no mass at this horizon."""
    if a >= b:
        raise DomainError(f"truncation bounds need a < b, got a={a}, b={b}")
    try:
        return td.TddwprSpec(base=spec, a=a, b=b)
    except ValueError as e:
        logger.warning(f"T={spec.T}: truncated cells undefined ({e})")
        return None


def cmd_table3(args: argparse.Namespace) -> OutputTable:
    """pmf and cdf of DDWPR and TDDWPR on the printed (T, r) grid, with the deviation table."""
    frame = golden_tables.load_golden_table(args.golden)
    ctrl = series_control(args)
    T_values = TABLE3_T if args.T_list is None else args.T_list

    computed: Dict[Tuple[float, int, str], Cell] = {}
    rows = []
    for T in T_values:
        spec = dd.DdwprSpec(T=T, ctrl=ctrl)
        tspec = _window_spec(spec, args.a, args.b)
        for r in TABLE3_R:
            values = {
                "pmf": dd.pmf(spec, r),
                "cdf": dd.cdf(spec, r),
                "t_pmf": UNDEFINED if tspec is None else _evaluate(td.t_pmf, tspec, r),
                "t_cdf": UNDEFINED if tspec is None else _evaluate(td.t_cdf, tspec, r),
            }
            computed.update({(float(T), r, q): v for q, v in values.items()})
            rows.append([T, r, *values.values()])

    cells = golden_tables.golden_cells(frame, "table3", T_values)
    cells = cells[(cells["a"] == args.a) & (cells["b"] == args.b)]
    deviations = golden_tables.compare_cells(
        cells, lambda cell: computed.get((float(cell["T"]), int(cell["r"]), cell["quantity"]), UNDEFINED))
    companion = make_table(golden_tables.COMPANION_HEADERS, deviations, args)
    return make_table(["T", "r", "pmf", "cdf", "t_pmf", "t_cdf"], rows, args,
                      companion=companion, table="table3")


def _uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    return np.clip(rng.random(size), np.finfo(float).tiny, np.nextafter(1.0, 0.0))


def cmd_sample(args: argparse.Namespace) -> OutputTable:
    """n inverse-transform variates (rejection onto (a, b] when a window is given) plus mean and variance."""
    spec = dd.DdwprSpec(T=args.T, ctrl=series_control(args))
    window = _window(args)
    rng = np.random.default_rng(args.seed)

    if window is None:
        values = dd.sample(spec, _uniforms(rng, args.n))
    else:
        tspec = td.TddwprSpec(base=spec, a=window[0], b=window[1])
        batch = max(args.n, SAMPLE_BATCH_MIN)
        kept: List[np.ndarray] = []
        total = 0
        for _ in range(MAX_REJECTION_ROUNDS):
            draws = dd.sample(spec, _uniforms(rng, batch))
            accepted = draws[(draws > tspec.a) & (draws <= tspec.b)]
            kept.append(accepted)
            total += accepted.size
            if total >= args.n:
                break
        else:
            raise DomainError(f"window ({tspec.a}, {tspec.b}] accepted only {total} of "
                              f"{batch * MAX_REJECTION_ROUNDS} draws")
        values = np.concatenate(kept)[:args.n]

    x = values.astype(float)
    variance = float(x.var(ddof=1)) if x.size > 1 else 0.0
    rows: List[List[Any]] = [[i, int(v)] for i, v in enumerate(values)]
    rows.append(["mean", float(x.mean())])
    rows.append(["variance", variance])
    return make_table(["index", "value"], rows, args)


def cmd_oracle(args: argparse.Namespace) -> OutputTable:
    """Simulate Wiener paths and grade the analytic law against them; meta['passed'] carries the verdict."""
    steps = args.steps if args.steps is not None else default_steps(args.T)
    cfg = OracleConfig(T=args.T, paths=args.paths, steps=steps, seed=args.seed, r_max=args.r_max)
    spec = dd.DdwprSpec(T=args.T, ctrl=series_control(args))
    window = _window(args)
    if window is not None:
        spec = td.TddwprSpec(base=spec, a=window[0], b=window[1])

    sample = simulate_ranges(cfg, workers=args.workers)
    report = compare_to_analytic(sample, spec, steps=cfg.steps, r_max=cfg.r_max)

    verdict = "PASS" if report.passed else "FAIL"
    rows = [
        ["n", report.n],
        ["paths", cfg.paths],
        ["steps", cfg.steps],
        ["mean", report.mean],
        ["analytic_mean", report.analytic_mean],
        ["mean_deviation", report.mean_deviation],
        ["variance", report.variance],
        ["third_central", report.third_central],
        ["fourth_central", report.fourth_central],
        ["std_error_mean", report.std_error_mean],
        ["max_abs_cdf_deviation", report.max_abs_cdf_deviation],
        ["dkw_band", report.dkw_band],
        ["discretization_bias_bound", report.discretization_bias_bound],
        ["verdict", verdict],
    ]
    view = td.TddwprView(spec) if window is not None else dd.DdwprView(spec)
    top = max(report.empirical_cdf)
    per_r = [[r, report.empirical_pmf.get(r, 0.0), report.empirical_cdf[r], view.cdf_at(r)]
             for r in range(top + 1)]
    companion = make_table(["r", "empirical_pmf", "empirical_cdf", "analytic_cdf"], per_r, args)
    return make_table(["field", "value"], rows, args, companion=companion, passed=report.passed)


# -------------------------------------------------------
# Parser and entry point
# -------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")
    common.add_argument("--out", default=None, help="write output to this path instead of stdout")
    common.add_argument("--eps", type=positive_float, default=DEFAULT_EPS, help="series truncation tolerance")
    common.add_argument("--kmax", type=positive_int, default=DEFAULT_KMAX, help="series term cap")
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])

    parser = argparse.ArgumentParser(
        prog="ddwpr",
        description="Discrete distribution of the Wiener process range and its truncated variant",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="DDWPR measure over a range of r")
    p.add_argument("--T", type=positive_float, required=True)
    p.add_argument("--measure", choices=[*DIST_MEASURES, "cpdf"], default="pmf")
    p.add_argument("--r-min", type=int, default=0)
    p.add_argument("--r-max", type=int, default=10)
    p.add_argument("--r-step", type=positive_float, default=1.0, help="grid step for --measure cpdf")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("tdist", parents=[common], help="TDDWPR measure over a range of r")
    p.add_argument("--T", type=positive_float, required=True)
    p.add_argument("--a", type=nonnegative_int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--measure", choices=list(TDIST_MEASURES), default="pmf")
    p.add_argument("--r-min", type=int, default=None)
    p.add_argument("--r-max", type=int, default=None)
    p.set_defaults(func=cmd_tdist)

    p = sub.add_parser("table1", parents=[common], help="moment table (TDDWPR moments with --a/--b)")
    p.add_argument("--T-list", type=horizon_list, default=None, help="comma-separated horizons")
    p.add_argument("--a", type=nonnegative_int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--golden", default=None, help="golden-value CSV (default: bundled file)")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("table3", parents=[common], help="pmf/cdf table of DDWPR and TDDWPR")
    p.add_argument("--T-list", type=horizon_list, default=None, help="comma-separated horizons")
    p.add_argument("--a", type=nonnegative_int, default=TABLE_A)
    p.add_argument("--b", type=int, default=TABLE_B)
    p.add_argument("--golden", default=None, help="golden-value CSV (default: bundled file)")
    p.set_defaults(func=cmd_table3)

    p = sub.add_parser("sample", parents=[common], help="draw DDWPR (or truncated) variates")
    p.add_argument("--T", type=positive_float, required=True)
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--seed", type=nonnegative_int, default=0)
    p.add_argument("--a", type=nonnegative_int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("oracle", parents=[common], help="Monte-Carlo path check of the analytic law")
    p.add_argument("--T", type=positive_float, required=True)
    p.add_argument("--paths", type=positive_int, default=100_000)
    p.add_argument("--steps", type=positive_int, default=None)
    p.add_argument("--seed", type=nonnegative_int, default=7)
    p.add_argument("--a", type=nonnegative_int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--r-max", type=positive_int, default=None)
    p.add_argument("--workers", type=positive_int, default=1)
    p.set_defaults(func=cmd_oracle)
    return parser


def _error_message(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}".lstrip(": ")
                         for e in error.errors())
    return str(error)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (None, 0) else EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        table = args.func(args)
    except (DdwprError, ValidationError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"ddwpr {args.command}: error: {_error_message(e)}", file=sys.stderr)
        return EXIT_USAGE

    text = render(table)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as e:
            print(f"ddwpr {args.command}: error: cannot write {args.out}: {e}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)

    if table.meta.get("passed") is False:
        return EXIT_FAIL
    return EXIT_OK
