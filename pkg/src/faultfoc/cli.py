"""Command-line front-end.

Subcommands: run (simulate a scenario, export CSV + summary + figures),
sweep-phi0 (injection-angle sweep), verify-tables (check the hard-coded
faulty-converter matrices against the circuit-level oracle), and plot
(render figures from an exported trace).  Exit codes: 0 success,
1 domain error, 2 usage error.
"""

import argparse
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import interval_thd, sweep_phi0
from .converter import PHASES, SWITCHING_MATRICES, FaultSpec, circuit_matrix
from .errors import AnalysisError, ConfigError, SimulationDiverged
from .plotting import (TRACE_PANELS, render_sweep, render_trace_panels,
                       trace_columns)
from .scenario import load_scenario
from .simulator import Trace, e3_intervals, run

SUMMARY_PERIODS = 6     # fundamental periods in the steady summary window


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _grid(text: str) -> list[float]:
    """Parse an A:STEP:B angle grid, inclusive of both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must look like A:STEP:B")
    try:
        lo, step, hi = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("grid bounds must be numbers") from None
    if step <= 0.0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs STEP > 0 and B >= A")
    count = int(round((hi - lo) / step)) + 1
    grid = [lo + k * step for k in range(count)]
    return [a for a in grid if a <= hi + 1e-9]


def _panel_list(text: str) -> tuple[str, ...]:
    panels = tuple(p.strip() for p in text.split(",") if p.strip())
    if not panels:
        raise argparse.ArgumentTypeError("no panels given")
    return panels


def _resolve_scenario(path: Path) -> Path:
    """Accept a filesystem path or the bare name of a bundled scenario."""
    if path.exists():
        return path
    bundle = resources.files("faultfoc") / "scenarios" / path.name
    if path.name == str(path) and bundle.is_file():
        return Path(str(bundle))
    raise ConfigError(f"scenario file not found: {path}")


def _flag_share(flags: np.ndarray, bit: int) -> float:
    if flags.size == 0:
        return 0.0
    return float(np.count_nonzero(flags & bit)) / flags.size


def _summarize(cfg, trace: Trace, scenario_name: str) -> str:
    lines = [f"scenario: {scenario_name}",
             f"fault: {cfg.fault}" + (f" from t = {cfg.t_fault_on:g} s"
                                      if cfg.fault.is_fault else ""),
             f"simulated: {len(trace) * cfg.h:g} s "
             f"({len(trace)} steps at h = {cfg.h:g} s)",
             f"trace sha256: {trace.sha256()}"]
    if len(trace) == 0:
        lines.append("no samples: steady-state statistics skipped")
        return "\n".join(lines) + "\n"

    omega_mean = float(np.mean(trace.omega_m))
    f_fund = cfg.machine.n_p * omega_mean / (2.0 * math.pi)
    try:
        thd_per_phase = [interval_thd(trace, cfg, 0.0, cfg.t_end,
                                      SUMMARY_PERIODS, phase)
                         for phase in range(3)]
    except AnalysisError as exc:
        lines.append(f"THD: n/a ({exc})")
        window = slice(len(trace), len(trace))
    else:
        n_tail = int((SUMMARY_PERIODS + 0.1) / (f_fund * cfg.h))
        window = slice(len(trace) - n_tail, len(trace))
        lines.append(f"steady window: last {SUMMARY_PERIODS} fundamental "
                     f"periods at {f_fund:.4g} Hz")
        for phase, value in zip(PHASES, thd_per_phase):
            lines.append(f"THD i_{phase}: {100.0 * value:.2f} %")
        i_dq = trace.i_dq[window]
        lines.append(f"mean i_d: {np.mean(i_dq[:, 0]):+.3f} A "
                     f"(std {np.std(i_dq[:, 0]):.3f})")
        lines.append(f"mean i_q: {np.mean(i_dq[:, 1]):+.3f} A "
                     f"(std {np.std(i_dq[:, 1]):.3f})")

    lines.append("flags: saturated {:.1f} % | integrators frozen {:.1f} % | "
                 "fault active {:.1f} %".format(
                     100.0 * _flag_share(trace.flags, Trace.FLAG_SATURATED),
                     100.0 * _flag_share(trace.flags, Trace.FLAG_AW_FROZEN),
                     100.0 * _flag_share(trace.flags, Trace.FLAG_FAULT)))

    try:
        intervals = e3_intervals(cfg)
    except ConfigError:
        intervals = None
    if intervals is not None:
        lines.append("interval THD of i_a:")
        for label, t0, t1 in intervals:
            try:
                value = interval_thd(trace, cfg, t0, t1, SUMMARY_PERIODS)
                text = f"{100.0 * value:6.2f} %"
            except AnalysisError:
                text = "   n/a"
            lines.append(f"  {label:40s} {t0:g} .. {t1:g} s: {text}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    cfg = load_scenario(scenario)
    trace = run(cfg)
    if args.seedless:
        repeat = run(cfg)
        if repeat.sha256() != trace.sha256():
            print("error: determinism check failed: repeated run differs",
                  file=sys.stderr)
            return 1
    args.out.mkdir(parents=True, exist_ok=True)
    trace.to_csv(args.out / "trace.csv", args.decimate)
    summary = _summarize(cfg, trace, scenario.name)
    (args.out / "summary.txt").write_text(summary)
    if not args.no_plots:
        render_trace_panels(trace_columns(trace), args.out)
    print(summary, end="")
    return 0


def cmd_sweep_phi0(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    cfg = load_scenario(scenario)
    result = sweep_phi0(cfg, args.grid, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    result.to_csv(args.out / "sweep.csv")
    render_sweep(result, args.out / "sweep.svg")
    best = float(np.min(result.thd))
    print(f"THD minimum at {result.argmin_deg:g} deg: {100.0 * best:.2f} %")
    return 0


_SIGN_NAMES = {-1: "sign<0", 0: "sign=0", 1: "sign>0"}


def cmd_verify_tables(args) -> int:
    ok = 0
    failures = []
    for side in ("upper", "lower"):
        for phase in PHASES:
            fault = FaultSpec(side, phase)
            selector = "1-s" if side == "lower" else "s"
            print(f"{side} {phase}: switching vector selector {selector}")
            for sign in (-1, 0, 1):
                table = SWITCHING_MATRICES[(side, phase, sign)]
                oracle = circuit_matrix(fault, sign)
                if np.array_equal(table, oracle):
                    ok += 1
                    print(f"  {_SIGN_NAMES[sign]}: ok")
                    continue
                r, c = np.argwhere(table != oracle)[0]
                failures.append(
                    f"mismatch at ({side}, {phase}, {_SIGN_NAMES[sign]}) "
                    f"cell [{r},{c}]: table {table[r, c]:g}, "
                    f"circuit {oracle[r, c]:g}")
                print(f"  {_SIGN_NAMES[sign]}: MISMATCH")
    for line in failures:
        print(line, file=sys.stderr)
    print(f"{ok}/18 matrices verified")
    return 0 if ok == 18 else 1


def _read_trace_csv(path: Path) -> dict[str, np.ndarray]:
    try:
        f = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read trace: {exc}") from None
    with f:
        header = f.readline().strip()
        if not header:
            raise ConfigError("trace file is empty")
        names = header.split(",")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # empty data is legitimate
            rows = np.loadtxt(f, delimiter=",", ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, len(names))
    if rows.shape[1] != len(names):
        raise ConfigError(f"trace rows have {rows.shape[1]} columns, "
                          f"header names {len(names)}")
    return {name: rows[:, k] for k, name in enumerate(names)}


def cmd_plot(args) -> int:
    data = _read_trace_csv(args.trace)
    written = render_trace_panels(data, args.out, panels=args.panels)
    for path in written:
        print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultfoc",
        description="PM generator drive simulator with injectable "
                    "open-switch converter faults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and export results")
    p.add_argument("--scenario", type=Path, required=True,
                   help="scenario file path, or the name of a bundled one")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--decimate", type=_positive_int, default=1,
                   help="keep every Nth sample in the CSV export")
    p.add_argument("--seedless", action="store_true",
                   help="run twice and require identical trace hashes")
    p.add_argument("--no-plots", action="store_true",
                   help="skip figure rendering")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-phi0",
                       help="sweep the injection angle, report the optimum")
    p.add_argument("--scenario", type=Path, required=True,
                   help="base scenario: faulted, extended anti-windup, "
                        "flat-top modulation")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--grid", type=_grid, default="150:2:210",
                   help="angle grid in degrees as A:STEP:B "
                        "(default 150:2:210)")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="parallel simulation processes")
    p.set_defaults(func=cmd_sweep_phi0)

    p = sub.add_parser("verify-tables",
                       help="diff the hard-coded faulty-converter matrices "
                            "against the circuit-level oracle")
    p.set_defaults(func=cmd_verify_tables)

    p = sub.add_parser("plot", help="render figures from an exported trace")
    p.add_argument("--trace", type=Path, required=True, help="trace.csv path")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--panels", type=_panel_list,
                   default=tuple(sorted(TRACE_PANELS)),
                   help="comma-separated list: abc,dq,speed")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationDiverged as exc:
        print(f"error: simulation diverged at t = {exc.t_bad:g} s "
              f"(last good t = {exc.t_last_good:g} s)", file=sys.stderr)
        return 1
    except (ConfigError, AnalysisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
