"""Command-line reports: threshold tables, yield curves, LHV tests, crossovers, witness radii.

Exit codes: 0 success, 2 usage error, 3 infeasible verdict (lhv-test only),
4 internal numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bell_tests as bt
from .distillation import (
    separable_ball_radius,
    one_way_yield_ghz,
    two_way_yield,
    witness_bound_w,
    yield_report,
)
from .errors import InvalidArgumentError, WghzError
from .lhv_polytope import (
    lhv_feasible,
    lhv_threshold,
    quantum_probability_table,
    read_table_csv,
)
from .quantum_core import MeasurementSetting, make_g_state, make_ghz_state, make_w_state, mix_with_white_noise

log = logging.getLogger("wghz")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("thresholds", "yield-curve", "lhv-test", "crossovers", "witness")
LP_MAX_N = 5
_FAMILIES = {"W": make_w_state, "GHZ": make_ghz_state, "G": make_g_state}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ReportConfig:
    command: str
    n_min: int = 3
    n_max: int = 15
    p_start: float = 0.0
    p_stop: float = 1.0
    p_step: float = 0.01
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    with_lp: bool = False
    table: str | None = None
    family: str = "W"
    n: int | None = None
    p: float | None = None
    restarts: int | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.n_min > self.n_max:
            raise UsageError("--n-min must not exceed --n-max")
        if self.command in ("thresholds", "witness") and self.n_min < 3:
            raise UsageError("closed-form thresholds need n >= 3")
        if self.p_step <= 0:
            raise UsageError("--p-step must be positive")
        if not 0 <= self.p_start <= self.p_stop <= 1:
            raise UsageError("need 0 <= --p-start <= --p-stop <= 1")
        if self.restarts is not None and self.restarts < 1:
            raise UsageError("--restarts must be positive")


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    return f"{float(v):.12g}"


def _render(header: Sequence[str], rows: Sequence[Sequence], config: ReportConfig, comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    if config.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    else:
        cells = [list(header)] + [[_fmt(v) for v in r] for r in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
        for c in cells:
            buf.write("  ".join(s.rjust(wd) for s, wd in zip(c, widths)) + "\n")
    return buf.getvalue()


def _comment(config: ReportConfig, **extra) -> str:
    parts = [f"command={config.command}", f"seed={config.seed}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


def p_grid(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def cmd_thresholds(config: ReportConfig) -> str:
    header = [
        "n",
        "threshold_w_conditioned",
        "threshold_sufficient_w",
        "threshold_ghz",
        "threshold_g_crit",
        "threshold_functional_ghz",
    ]
    if config.with_lp:
        header += ["lhv_threshold", "wwzb_threshold"]
    rows = []
    for n in range(config.n_min, config.n_max + 1):
        row = [
            n,
            bt.threshold_w_conditioned(n),
            bt.threshold_sufficient_w(n),
            bt.threshold_ghz(n),
            bt.threshold_g_crit(n),
            bt.threshold_functional_ghz(n),
        ]
        if config.with_lp:
            if n <= LP_MAX_N:
                log.info("thresholds: numerical searches for W_%d", n)
                w = make_w_state(n)
                row.append(lhv_threshold(w, restarts=config.restarts, seed=config.seed).critical_visibility)
                row.append(bt.wwzb_threshold(w, restarts=config.restarts, seed=config.seed).critical_visibility)
            else:
                log.warning("thresholds: n=%d exceeds the LP limit N <= %d; writing n/a", n, LP_MAX_N)
                row += [None, None]
        rows.append(row)
    return _render(header, rows, config, _comment(config))


def cmd_yield_curve(config: ReportConfig) -> str:
    n = config.n or 7
    header = [
        "p",
        "yield_w_one_way",
        "yield_ghz_one_way",
        "yield_w_two_way",
        "yield_ghz_two_way",
        "conditioned_visibility",
        "acceptance_probability",
    ]
    rows = []
    for p in p_grid(config.p_start, config.p_stop, config.p_step):
        w = yield_report("W", n, p)
        rows.append(
            [p, w.one_way_yield, one_way_yield_ghz(p), w.two_way_yield, two_way_yield(p),
             w.conditioned_visibility, w.acceptance_probability]
        )
    return _render(header, rows, config, _comment(config, n=n))


def _settings_text(settings: MeasurementSetting) -> str:
    lines = []
    for k, pair in enumerate(settings.directions):
        vecs = "  ".join("(" + ", ".join(f"{c:+.6f}" for c in v) + ")" for v in pair)
        lines.append(f"  observer {k + 1}: {vecs}")
    return "\n".join(lines)


def cmd_lhv_test(config: ReportConfig) -> tuple[str, int]:
    if config.table:
        problem = read_table_csv(config.table)
        verdict = lhv_feasible(problem)
        head = f"# {_comment(config, table=config.table)}\n"
        body = f"verdict: {'feasible' if verdict.feasible else 'infeasible'}\ndistance: {verdict.distance:.12g}\n"
        return head + body, EXIT_OK if verdict.feasible else EXIT_INFEASIBLE
    if config.family not in _FAMILIES:
        raise UsageError(f"unknown family {config.family!r}")
    n = config.n or 3
    p = 1.0 if config.p is None else config.p
    if not 2 <= n <= LP_MAX_N:
        raise UsageError(f"lhv-test supports 2 <= n <= {LP_MAX_N}")
    if not 0 <= p <= 1:
        raise UsageError("--p must lie in [0, 1]")
    pure = _FAMILIES[config.family](n)
    if p == 0:
        # white noise is local for every setting
        settings = MeasurementSetting(np.tile([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], (n, 1, 1)))
        crit = None
    else:
        report = lhv_threshold(pure, restarts=config.restarts, seed=config.seed)
        settings, crit = report.optimizer_settings_used, report.critical_visibility
    verdict = lhv_feasible(quantum_probability_table(mix_with_white_noise(pure, p), settings))
    head = f"# {_comment(config, family=config.family, n=n, p=p)}\n"
    body = [
        f"verdict: {'feasible' if verdict.feasible else 'infeasible'}",
        f"distance: {verdict.distance:.12g}",
    ]
    if crit is not None:
        body.append(f"critical_visibility_at_settings: {crit:.12g}")
    body.append("settings:")
    body.append(_settings_text(settings))
    return head + "\n".join(body) + "\n", EXIT_OK if verdict.feasible else EXIT_INFEASIBLE


CROSSOVERS = (
    ("w_conditioned_vs_ghz", bt.threshold_w_conditioned, bt.threshold_ghz),
    ("w_conditioned_vs_functional_ghz", bt.threshold_w_conditioned, bt.threshold_functional_ghz),
    ("g_crit_vs_ghz", bt.threshold_g_crit, bt.threshold_ghz),
)


def cmd_crossovers(config: ReportConfig) -> str:
    rows = []
    for name, fa, fb in CROSSOVERS:
        n = bt.find_crossover(fa, fb, config.n_max, n_min=config.n_min)
        rows.append([name, n, None if n is None else fa(n), None if n is None else fb(n)])
    return _render(["comparison", "crossover_n", "threshold_a", "threshold_b"], rows, config, _comment(config))


def cmd_witness(config: ReportConfig) -> str:
    rows = []
    for n in range(config.n_min, config.n_max + 1):
        ball, bound = separable_ball_radius(n), witness_bound_w(n)
        rows.append([n, ball, bound, ball / bound])
    return _render(["n", "separable_ball_radius", "witness_bound_w", "ratio"], rows, config, _comment(config))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wghz", description=__doc__.splitlines()[0])
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=15)
    ap.add_argument("--p-start", type=float, default=0.0)
    ap.add_argument("--p-stop", type=float, default=1.0)
    ap.add_argument("--p-step", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "table"), default="csv")
    ap.add_argument("--with-lp", action="store_true", help="add numerical LP and WWZB columns (n <= 5)")
    ap.add_argument("--table", default=None, help="probability-table CSV for lhv-test")
    ap.add_argument("--family", default="W", choices=sorted(_FAMILIES))
    ap.add_argument("--n", type=int, default=None, help="qubit count for yield-curve (7) and lhv-test (3)")
    ap.add_argument("--p", type=float, default=None, help="visibility for lhv-test")
    ap.add_argument("--restarts", type=int, default=None, help="override optimizer restart budget")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    try:
        return _run(args)
    finally:
        log.removeHandler(handler)


def _run(args: argparse.Namespace) -> int:
    config = ReportConfig(
        command=args.command,
        n_min=args.n_min,
        n_max=args.n_max,
        p_start=args.p_start,
        p_stop=args.p_stop,
        p_step=args.p_step,
        seed=args.seed,
        output_path=args.out,
        format=args.format,
        with_lp=args.with_lp,
        table=args.table,
        family=args.family,
        n=args.n,
        p=args.p,
        restarts=args.restarts,
    )
    code = EXIT_OK
    try:
        config.validate()
        if config.command == "lhv-test":
            text, code = cmd_lhv_test(config)
        else:
            command = {
                "thresholds": cmd_thresholds,
                "yield-curve": cmd_yield_curve,
                "crossovers": cmd_crossovers,
                "witness": cmd_witness,
            }[config.command]
            text = command(config)
    except (UsageError, InvalidArgumentError) as exc:
        print(f"wghz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WghzError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"wghz: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
