"""Command-line entry point ``newmark-bea``.

Examples::

    newmark-bea converge --scenario fourth-order-1dof --out results --ci
    newmark-bea run --config my_scenario.json --format both
    newmark-bea compensate --scenario dvf-time --kind fourth-order --dt 0.7

Exit codes: 0 on success, 1 when a scenario fails (including slope checks
under ``--ci``), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import sys as _sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .bea import distorted_system
from .compensation import CompensationError, damping_compensation, fourth_order_compensation
from .harness import (
    BUILTIN_SCENARIOS,
    accuracy_runtime_benchmark,
    builtin_scenario,
    convergence_study,
    energy_trace,
    run_scenario,
    steps_to_target,
)
from .integrators import IntegrationError, StepperConfig

SUBCOMMANDS = ("run", "converge", "energy", "bench", "compensate", "distort")


def _common(parser: argparse.ArgumentParser, top: bool) -> None:
    # the subparser copies use SUPPRESS so they never clobber a value given
    # before the subcommand
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--config", metavar="PATH", default=d(None), help="scenario JSON file")
    parser.add_argument("--scenario", metavar="NAME", default=d(None),
                        help=f"built-in scenario: {', '.join(sorted(BUILTIN_SCENARIOS))}")
    parser.add_argument("--out", metavar="DIR", default=d(None),
                        help=f"output directory (else ${io.OUTPUT_ENV}, the config, or ./out)")
    parser.add_argument("--format", choices=("csv", "svg", "both"), default=d(None),
                        help="output format (default csv)")
    parser.add_argument("--ci", action="store_true", default=d(False),
                        help="turn failed slope checks into exit code 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newmark-bea",
        description="Newmark integration, distorted equations and compensated systems.")
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    helps = {
        "run": "integrate every method once and write trajectories",
        "converge": "convergence study over the time-step schedule",
        "energy": "total energy traces of every method",
        "bench": "accuracy versus runtime benchmark",
        "compensate": "write compensated damping and stiffness matrices",
        "distort": "write the distorted damping and stiffness matrices",
    }
    subs = {}
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        _common(p, top=False)
        subs[name] = p
    subs["compensate"].add_argument("--kind", choices=("damping", "fourth-order"), required=True)
    for name in ("compensate", "distort"):
        p = subs[name]
        p.add_argument("--dt", type=float, help="time step (default: first of the scenario)")
        p.add_argument("--gamma", type=Fraction, help="Newmark gamma, e.g. 0.55 or 1/2")
        p.add_argument("--beta", type=Fraction, help="Newmark beta, e.g. 0.28 or 1/6")
    return parser


def _load(args):
    if args.config and args.scenario:
        raise io.ScenarioError("give either --config or --scenario, not both")
    if args.config:
        return io.load_scenario(args.config)
    if args.scenario:
        return builtin_scenario(args.scenario), {}
    raise io.ScenarioError("a scenario is required (--config PATH or --scenario NAME)")


def _formats(args, doc) -> set[str]:
    if args.format:
        return {"csv", "svg"} if args.format == "both" else {args.format}
    fmts = doc.get("output", {}).get("formats")
    return set(fmts) if fmts else {"csv"}


def _cmd_run(scn, out: Path, fmts, args) -> int:
    trajs = run_scenario(scn)
    for label, tr in trajs.items():
        if "csv" in fmts:
            io.write_trajectory_csv(out / "trajectories" / f"{label}.csv", tr, scn.system)
        print(f"{label:>24s}: {len(tr.t) - 1} steps, wall {tr.wall_time:.3f} s")
    if "svg" in fmts:
        io.plot_svg(out / "position.svg", {k: (t.t, t.q[:, 0]) for k, t in trajs.items()},
                    "t", "q_1", title=scn.name)
    io.write_manifest(out / "manifest.json", command="run", scenario=scn.name, dt=scn.dts[0],
                      t_end=scn.t_end, digest=scn.system.digest(),
                      wall_time={k: t.wall_time for k, t in trajs.items()})
    return 0


def _cmd_converge(scn, out: Path, fmts, args) -> int:
    rep = convergence_study(scn)
    checks = rep.check(scn.expectations)
    if "csv" in fmts:
        io.write_report_csv(out / "report.csv", rep)
        io.write_slopes_csv(out / "slopes.csv", rep, scn.expectations)
    if "svg" in fmts:
        for var in ("q", "v"):
            series = {}
            for (m, x) in rep.slopes:
                if x == var:
                    tab = rep.table(m)
                    series[m] = ([r.dt for r in tab], [getattr(r, f"error_{var}") for r in tab])
            io.plot_svg(out / f"convergence_{var}.svg", series, "dt", f"error in {var}",
                        title=scn.name, logx=True, logy=True)
    for (m, x), s in rep.slopes.items():
        print(f"{m:>24s} {x}: slope {s:6.3f}")
    failed = [c for c in checks if not c[2]]
    for exp, s, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {exp.method} {exp.variable}: slope {s:.3f}, "
              f"expected {exp.expected} +/- {exp.tolerance}")
    io.write_manifest(out / "manifest.json", command="converge", scenario=scn.name, dts=scn.dts,
                      t_eval=scn.t_eval, baseline=scn.baseline,
                      checks=[{"method": e.method, "variable": e.variable, "slope": s, "passed": ok}
                              for e, s, ok in checks])
    return 1 if (args.ci and failed) else 0


def _cmd_energy(scn, out: Path, fmts, args) -> int:
    trajs = run_scenario(scn)
    traces = {k: energy_trace(t, scn.system) for k, t in trajs.items()}
    if "csv" in fmts:
        io.write_energy_csv(out / "energy.csv", traces)
    if "svg" in fmts:
        io.plot_svg(out / "energy.svg", {k: (e[:, 0], e[:, 1]) for k, e in traces.items()},
                    "t", "total energy", title=scn.name)
    for k, e in traces.items():
        drift = (e[-1, 1] - e[0, 1]) / e[0, 1] if e[0, 1] else float("nan")
        print(f"{k:>24s}: relative energy change {drift:+.3e}")
    io.write_manifest(out / "manifest.json", command="energy", scenario=scn.name, dt=scn.dts[0])
    return 0


def _cmd_bench(scn, out: Path, fmts, args) -> int:
    rows = accuracy_runtime_benchmark(scn)
    if "csv" in fmts:
        io.write_bench_csv(out / "bench.csv", rows)
    if "svg" in fmts:
        series = {}
        for r in rows:
            x, y = series.setdefault(r.method, ([], []))
            x.append(r.wall_time)
            y.append(r.error)
        io.plot_svg(out / "bench.svg", series, "wall time [s]", "error", title=scn.name,
                    logy=True)
    for r in rows:
        print(f"{r.method:>24s} dt={r.dt:.4e} steps={r.steps:7d} error={r.error:.3e} "
              f"wall={r.wall_time:.4f}s")
    if scn.target_error is not None:
        for m in dict.fromkeys(r.method for r in rows):
            hit = steps_to_target(rows, m, scn.target_error)
            print(f"{m:>24s}: " + ("target not reached" if hit is None
                                   else f"{hit.steps} steps to reach {scn.target_error:g}"))
    io.write_manifest(out / "manifest.json", command="bench", scenario=scn.name, repeats=scn.repeats)
    return 0


def _newmark_params(scn, args, default_beta):
    spec = next((m for m in scn.methods if m.name == "newmark"), None)
    gamma = args.gamma if args.gamma is not None else (spec.gamma if spec else Fraction(1, 2))
    beta = args.beta if args.beta is not None else (spec.beta if spec else default_beta)
    dt = args.dt if args.dt is not None else scn.dts[0]
    return dt, gamma, beta


def _cmd_compensate(scn, out: Path, fmts, args) -> int:
    if args.kind == "fourth-order":
        dt = args.dt if args.dt is not None else scn.dts[0]
        comp = fourth_order_compensation(scn.system, dt)
    else:
        dt, gamma, beta = _newmark_params(scn, args, Fraction(1, 4))
        comp = damping_compensation(scn.system, StepperConfig(dt, gamma=gamma, beta=beta))
    io.write_matrix_market(out / "C_hat.mtx", comp.C)
    io.write_matrix_market(out / "K_hat.mtx", comp.K)
    if "csv" in fmts:
        io.write_forcing_csv(out / "F_hat.csv", comp.forcing, comp.dt, scn.t_end)
    io.write_manifest(out / "manifest.json", command="compensate", scenario=scn.name,
                      build_time=comp.build_time, **comp.manifest())
    print(f"wrote {out / 'C_hat.mtx'} and {out / 'K_hat.mtx'} ({comp.kind}, dt={comp.dt})")
    return 0


def _cmd_distort(scn, out: Path, fmts, args) -> int:
    dt, gamma, beta = _newmark_params(scn, args, Fraction(1, 4))
    d = distorted_system(scn.system, StepperConfig(dt, gamma=gamma, beta=beta))
    io.write_matrix_market(out / "C_tilde.mtx", d.C)
    io.write_matrix_market(out / "K_tilde.mtx", d.K)
    if "csv" in fmts:
        io.write_forcing_csv(out / "F_tilde.csv", d.forcing, dt, scn.t_end)
    io.write_manifest(out / "manifest.json", command="distort", scenario=scn.name, dt=dt,
                      gamma=str(gamma), beta=str(beta), base_digest=scn.system.digest())
    print(f"wrote {out / 'C_tilde.mtx'} and {out / 'K_tilde.mtx'} (dt={dt}, gamma={gamma}, beta={beta})")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "converge": _cmd_converge,
    "energy": _cmd_energy,
    "bench": _cmd_bench,
    "compensate": _cmd_compensate,
    "distort": _cmd_distort,
}


def cli(argv=None) -> int:
    """Run the command line; returns the exit code instead of exiting."""
    parser = build_parser()
    argv = list(_sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(_sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(_sys.stderr)
        return 2
    try:
        scn, doc = _load(args)
        out = io.output_directory(args.out, doc.get("output", {}).get("directory"))
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](scn, out, _formats(args, doc), args)
    except (io.ScenarioError, io.MatrixMarketError, CompensationError, IntegrationError,
            ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"newmark-bea {args.command}: error: {exc}", file=_sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli())
