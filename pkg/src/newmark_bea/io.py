"""File formats: Matrix Market matrices, scenario JSON, CSV tables, SVG plots.

Every data file is a deterministic function of its inputs. Timestamps and
run times go to ``manifest.json`` (and ``bench.csv``, which exists to
record run times).
"""
from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
import scipy
import scipy.io as sio
import scipy.sparse as sps

from .harness import (
    BenchRow,
    ConvergenceReport,
    MethodSpec,
    Scenario,
    SlopeExpectation,
    exact_free_response,
    _oscillator_exact_fn,
)
from .integrators import Trajectory, grid_steps
from .model import (
    ConstantForcing,
    Pulse,
    SampledForcing,
    SecondOrderSystem,
    SinusoidBank,
    SquareWaveBank,
    ZeroForcing,
)
from .systems import builtin_system

__all__ = [
    "MatrixMarketError",
    "ScenarioError",
    "OUTPUT_ENV",
    "SCENARIO_SCHEMA",
    "load_matrix_market",
    "write_matrix_market",
    "parse_scenario",
    "load_scenario",
    "write_trajectory_csv",
    "write_report_csv",
    "write_slopes_csv",
    "write_energy_csv",
    "write_bench_csv",
    "write_manifest",
    "write_forcing_csv",
    "load_compensation",
    "plot_svg",
    "output_directory",
]

OUTPUT_ENV = "NEWMARK_BEA_OUT"


class MatrixMarketError(ValueError):
    """A Matrix Market file is malformed or holds an unsupported field."""


class ScenarioError(ValueError):
    """A scenario document failed validation; ``path`` locates the field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------


def load_matrix_market(path):
    """Read a real matrix. Coordinate files give CSR, array files a dense array.

    Symmetric storage is expanded to the full matrix.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    try:
        rows, cols, entries, fmt, field, symmetry = sio.mminfo(str(path))
    except Exception as exc:
        raise MatrixMarketError(f"{path}: malformed header ({exc})") from exc
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"{path}: field {field!r} is not supported, need real")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"{path}: symmetry {symmetry!r} is not supported")
    try:
        A = sio.mmread(str(path))
    except Exception as exc:
        raise MatrixMarketError(f"{path}: {exc}") from exc
    if A.shape != (rows, cols):
        raise MatrixMarketError(f"{path}: header says {rows}x{cols}, data is {A.shape}")
    if sps.issparse(A):
        return sps.csr_matrix(A, dtype=float)
    return np.asarray(A, dtype=float)


def write_matrix_market(path, A) -> Path:
    """Write ``A`` with 17 significant digits, so a read gives back the same doubles."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if sps.issparse(A):
        A = sps.coo_matrix(A)
    else:
        A = np.atleast_2d(np.asarray(A, dtype=float))
    sio.mmwrite(str(path), A, precision=17)
    return path


# ---------------------------------------------------------------------------
# Scenario documents
# ---------------------------------------------------------------------------

_RATIONAL = {"oneOf": [{"type": "number"},
                       {"type": "string", "pattern": r"^\s*-?\d+(\.\d+)?\s*(/\s*\d+\s*)?$"}]}
_MATRIX = {"oneOf": [
    {"type": "number"},
    {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "minItems": 1},
    {"type": "object", "properties": {"path": {"type": "string"}},
     "required": ["path"], "additionalProperties": False},
]}
_VECTOR = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}]}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["system", "methods", "run"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "builtin": {"enum": ["oscillator-1dof", "paper-3dof", "fe-beam-synthetic"]},
                "options": {"type": "object"},
                "M": _MATRIX, "C": _MATRIX, "K": _MATRIX,
            },
            "oneOf": [{"required": ["builtin"]}, {"required": ["M", "K"]}],
        },
        "forcing": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["zero", "constant", "sinusoid", "square", "pulse", "sampled"]},
                "load": _VECTOR,
                "amplitudes": {"type": "array", "items": {"type": "number"}},
                "frequencies": {"type": "array", "items": {"type": "number"}},
                "phases": {"type": "array", "items": {"type": "number"}},
                "direction": {"type": "array", "items": {"type": "number"}},
                "mu": {"type": "number", "exclusiveMinimum": 0},
                "t_cut": {"type": "number", "exclusiveMinimum": 0},
                "times": {"type": "array", "items": {"type": "number"}},
                "values": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "derivative_mode": {"enum": ["analytic", "central-difference"]},
            },
        },
        "initial_conditions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"q0": _VECTOR, "v0": _VECTOR},
        },
        "methods": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name"],
                "properties": {
                    "name": {"enum": ["newmark", "generalized_alpha", "rk4", "explicit_euler",
                                      "dvf", "distorted", "reference", "exact", "euler_distorted"]},
                    "label": {"type": "string"},
                    "dt": {"type": "number", "exclusiveMinimum": 0},
                    "gamma": _RATIONAL,
                    "beta": _RATIONAL,
                    "rho_inf": {"type": "number", "minimum": 0, "maximum": 1},
                    "compensation": {"enum": ["none", "damping", "fourth-order"]},
                    "substeps": {"type": "integer", "minimum": 1},
                },
            },
        },
        "compensation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"enum": ["none", "damping", "fourth-order"]}},
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_end"],
            "properties": {
                "t_end": {"type": "number", "minimum": 0},
                "t_eval": {"type": "number", "minimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "dts": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "halvings": {"type": "integer", "minimum": 0},
                "baseline": {"type": "string"},
                "reference_substeps": {"type": "integer", "minimum": 1},
                "target_error": {"type": "number", "exclusiveMinimum": 0},
                "repeats": {"type": "integer", "minimum": 1},
                "noise_floor": {"type": "number", "minimum": 0},
            },
        },
        "expectations": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["method", "variable", "expected", "tolerance"],
                "properties": {
                    "method": {"type": "string"},
                    "variable": {"enum": ["q", "v"]},
                    "expected": {"type": "number"},
                    "tolerance": {"type": "number", "minimum": 0},
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "svg"]}},
            },
        },
    },
}


def _rational(x):
    if isinstance(x, str):
        return Fraction(x.replace(" ", ""))
    return float(x)


def _json_path(parts) -> str:
    return "/".join(str(p) for p in parts) or "<root>"


def _matrix(value, base_dir: Path, where: str, n: int | None = None):
    """A bare number means that multiple of the identity (size ``n``)."""
    if isinstance(value, (int, float)) and n is not None:
        return float(value) * np.eye(n)
    if isinstance(value, dict):
        p = Path(value["path"])
        if not p.is_absolute():
            p = base_dir / p
        try:
            return load_matrix_market(p)
        except (OSError, MatrixMarketError) as exc:
            raise ScenarioError(str(exc), where) from exc
    return np.atleast_2d(np.asarray(value, dtype=float))


def _forcing(doc: dict, n: int):
    kind = doc["kind"]
    mode = doc.get("derivative_mode")
    extra = {} if mode is None else {"derivative_mode": mode}
    try:
        if kind == "zero":
            return ZeroForcing(n)
        if kind == "constant":
            return ConstantForcing(np.broadcast_to(np.asarray(doc.get("load", 0.0), float), (n,)).copy())
        if kind == "sinusoid":
            return SinusoidBank(doc["amplitudes"], doc["frequencies"], doc.get("phases"), **extra)
        if kind == "square":
            return SquareWaveBank(doc["amplitudes"], doc["frequencies"])
        if kind == "pulse":
            return Pulse(doc["direction"], doc["mu"], doc["t_cut"], **extra)
        return SampledForcing(doc["times"], doc["values"], **extra)
    except KeyError as exc:
        raise ScenarioError(f"missing parameter {exc.args[0]!r} for {kind} forcing", "forcing") from None
    except (ValueError, TypeError) as exc:
        raise ScenarioError(str(exc), "forcing") from exc


def _system(doc: dict, base_dir: Path) -> tuple[SecondOrderSystem, dict]:
    sd = doc["system"]
    if "builtin" in sd:
        try:
            sys = builtin_system(sd["builtin"], **sd.get("options", {}))
        except TypeError as exc:
            raise ScenarioError(f"bad options: {exc}", "system/options") from exc
    else:
        M = _matrix(sd["M"], base_dir, "system/M")
        n = M.shape[0]
        K = _matrix(sd["K"], base_dir, "system/K", n)
        C = _matrix(sd["C"], base_dir, "system/C", n) if "C" in sd else None
        try:
            sys = SecondOrderSystem(M, C, K)
        except ValueError as exc:
            raise ScenarioError(str(exc), "system") from exc
    changes = {}
    if "forcing" in doc:
        changes["forcing"] = _forcing(doc["forcing"], sys.n)
    ic = doc.get("initial_conditions", {})
    for key in ("q0", "v0"):
        if key in ic:
            vec = np.asarray(ic[key], dtype=float)
            if vec.ndim == 0:
                vec = np.full(sys.n, float(vec))
            if vec.shape != (sys.n,):
                raise ScenarioError(f"expected {sys.n} entries, got {vec.size}", f"initial_conditions/{key}")
            changes[key] = vec
    if changes:
        try:
            sys = sys.replace(**changes)
        except ValueError as exc:
            raise ScenarioError(str(exc), "system") from exc
    return sys, sd


def _exact_for(sys: SecondOrderSystem, sd: dict):
    if isinstance(sys.forcing, ZeroForcing):
        return exact_free_response(sys)
    if sd.get("builtin") == "oscillator-1dof":
        opts = sd.get("options", {})
        return _oscillator_exact_fn(opts.get("xi", 0.02))
    return None


def parse_scenario(doc, base_dir=None) -> Scenario:
    """Validate a scenario document (dict or JSON text) and build the :class:`Scenario`.

    Raises :class:`ScenarioError` naming the offending field.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(e.absolute_path)))
    if errors:
        err = errors[0]
        raise ScenarioError(err.message, _json_path(err.absolute_path))
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    sys, sd = _system(doc, base_dir)

    run = doc["run"]
    t_end = float(run["t_end"])
    method_dts = {float(m["dt"]) for m in doc["methods"] if "dt" in m}
    if "dts" in run:
        dts = [float(x) for x in run["dts"]]
    else:
        if "dt" in run:
            dt0 = float(run["dt"])
        elif len(method_dts) == 1:
            dt0 = method_dts.pop()
        elif method_dts:
            raise ScenarioError("all methods must share one time step", "methods")
        else:
            raise ScenarioError("no time step given (run/dt, run/dts or methods/*/dt)", "run")
        dts = Scenario.halving(dt0, int(run.get("halvings", 0)))
    t_eval = float(run.get("t_eval", t_end))
    for i, dt in enumerate(dts):
        for label, t in (("t_end", t_end), ("t_eval", t_eval)):
            try:
                grid_steps(t, dt)
            except ValueError as exc:
                raise ScenarioError(str(exc), f"run/{label}") from None

    methods = []
    for i, m in enumerate(doc["methods"]):
        kw = {k: m[k] for k in ("label", "rho_inf", "compensation", "substeps") if k in m}
        for k in ("gamma", "beta"):
            if k in m:
                try:
                    kw[k] = _rational(m[k])
                except (ValueError, ZeroDivisionError) as exc:
                    raise ScenarioError(str(exc), f"methods/{i}/{k}") from None
        try:
            methods.append(MethodSpec(m["name"], **kw))
        except ValueError as exc:
            raise ScenarioError(str(exc), f"methods/{i}") from exc

    baseline = run.get("baseline", "reference")
    exact = _exact_for(sys, sd)
    if baseline == "exact" and exact is None:
        raise ScenarioError("no exact solution is known for this system", "run/baseline")
    exps = [SlopeExpectation(e["method"], e["variable"], float(e["expected"]), float(e["tolerance"]))
            for e in doc.get("expectations", [])]
    try:
        return Scenario(
            name=doc.get("name", "scenario"),
            system=sys,
            methods=methods,
            t_end=t_end,
            dts=dts,
            t_eval=t_eval,
            compensation=doc.get("compensation", {}).get("kind", "none"),
            baseline=baseline,
            exact=exact,
            reference_substeps=run.get("reference_substeps", 100),
            noise_floor=run.get("noise_floor", 0.0),
            target_error=run.get("target_error"),
            repeats=run.get("repeats", 5),
            expectations=exps,
            description=doc.get("description", ""),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc), "run") from exc


def load_scenario(path) -> tuple[Scenario, dict]:
    """Read and parse a scenario file; returns the scenario and the raw document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scenario(doc, base_dir=path.parent), doc


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x) + 0.0  # folds -0.0 into 0.0
    return "nan" if math.isnan(x) else repr(x)


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


def write_trajectory_csv(path, traj: Trajectory, sys: SecondOrderSystem) -> Path:
    """Columns ``t,q_1..q_n,v_1..v_n,a_1..a_n,energy``; energy uses ``sys``."""
    from .harness import energy_trace

    n = traj.q.shape[1]
    header = (["t"] + [f"q_{i}" for i in range(1, n + 1)] + [f"v_{i}" for i in range(1, n + 1)]
              + [f"a_{i}" for i in range(1, n + 1)] + ["energy"])
    E = energy_trace(traj, sys)[:, 1]
    rows = (np.concatenate([[t], q, v, a, [e]])
            for t, q, v, a, e in zip(traj.t, traj.q, traj.v, traj.a, E))
    return _write_rows(path, header, rows)


def write_report_csv(path, report: ConvergenceReport) -> Path:
    header = ["method", "dt", "error_q", "error_v", "floor_q", "floor_v"]
    rows = [(r.method, r.dt, r.error_q, r.error_v, r.floor_q, r.floor_v) for r in report.rows]
    return _write_rows(path, header, rows)


def write_slopes_csv(path, report: ConvergenceReport, expectations=()) -> Path:
    checks = {(e.method, e.variable): (e, ok) for e, _, ok in report.check(expectations)}
    rows = []
    for (method, var), s in report.slopes.items():
        exp, ok = checks.get((method, var), (None, None))
        rows.append((method, var, s, "" if exp is None else exp.expected,
                     "" if exp is None else exp.tolerance, "" if ok is None else ("pass" if ok else "fail")))
    return _write_rows(path, ["method", "variable", "slope", "expected", "tolerance", "status"], rows)


def write_energy_csv(path, traces: dict) -> Path:
    """Wide table ``t,<label>...``; all traces must share the grid."""
    labels = list(traces)
    t = traces[labels[0]][:, 0]
    for lab in labels[1:]:
        if traces[lab].shape[0] != t.shape[0] or not np.allclose(traces[lab][:, 0], t):
            raise ValueError(f"energy trace {lab!r} is on a different grid")
    cols = np.column_stack([t] + [traces[lab][:, 1] for lab in labels])
    return _write_rows(path, ["t"] + labels, cols)


def write_bench_csv(path, rows: list[BenchRow]) -> Path:
    header = ["method", "dt", "steps", "error", "wall_time", "per_step", "build_time"]
    return _write_rows(path, header, [(r.method, r.dt, r.steps, r.error, r.wall_time, r.per_step, r.build_time)
                                      for r in rows])


def write_forcing_csv(path, forcing, dt: float, t_end: float) -> Path:
    """Samples ``t,F_1..F_n`` of a forcing on the grid ``j dt`` up to ``t_end``."""
    J = grid_steps(t_end, dt)
    header = ["t"] + [f"F_{i}" for i in range(1, forcing.n + 1)]
    return _write_rows(path, header, (np.concatenate([[j * dt], forcing(j * dt)]) for j in range(J + 1)))


def load_compensation(directory, base: SecondOrderSystem, cfg):
    """Reload ``C_hat.mtx``/``K_hat.mtx`` written by ``compensate`` for use with ``cfg``.

    The manifest must match ``base`` and ``cfg``; compensated matrices are
    specific to one time step and scheme, so a mismatch is refused.
    """
    from .compensation import CompensatedSystem, CompensationError, _CompensatedForcing

    directory = Path(directory)
    man = json.loads((directory / "manifest.json").read_text())
    if man.get("base_digest") != base.digest():
        raise CompensationError("compensated matrices were built for a different system")
    kind = man["kind"]
    gamma = Fraction(man["gamma"]) if man.get("gamma") is not None else None
    beta = Fraction(man["beta"]) if man.get("beta") is not None else None
    C = load_matrix_market(directory / "C_hat.mtx")
    K = load_matrix_market(directory / "K_hat.mtx")
    forcing = _CompensatedForcing(base, man["dt"]) if kind == "fourth_order" else base.forcing
    comp = CompensatedSystem(base, C, K, forcing, kind, float(man["dt"]), gamma, beta)
    comp.check(cfg)
    return comp


def write_manifest(path, **entries) -> Path:
    """``manifest.json`` with run metadata and a timestamp."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    data.update(entries)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    return path


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def plot_svg(path, series: dict, xlabel: str, ylabel: str, title: str = "",
             logx: bool = False, logy: bool = False) -> Path:
    """Line plot of ``{label: (x, y)}`` written as a standalone SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "newmark-bea", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for label, (x, y) in series.items():
            ax.plot(x, y, marker="o" if len(x) < 30 else None, label=label)
        if logx:
            ax.set_xscale("log", base=2)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return path


def output_directory(cli_value=None, config_value=None) -> Path:
    """``--out`` wins, then the environment override, then the config, then ``./out``."""
    for v in (cli_value, os.environ.get(OUTPUT_ENV), config_value):
        if v:
            return Path(v)
    return Path("out")
