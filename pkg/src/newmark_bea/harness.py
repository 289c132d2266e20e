"""Scenario runner: convergence studies, energy traces and benchmarks.

A :class:`Scenario` bundles a system, a list of methods and a time-step
schedule. :func:`run_scenario` produces trajectories,
:func:`convergence_study` turns a schedule into a
:class:`ConvergenceReport` and :func:`accuracy_runtime_benchmark` times
methods against an error target.

Errors are always the Euclidean norm of the state deviation at
``t_eval``, measured separately for ``q`` and ``v``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as la
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .bea import euler_oscillator_distortion, integrate_distorted, integrate_dvf
from .compensation import (
    CompensatedSystem,
    CompensationError,
    damping_compensation,
    fourth_order_compensation,
)
from .integrators import StepperConfig, Trajectory, integrate, reference_solution
from .model import SecondOrderSystem, ZeroForcing
from .systems import OSC_OMEGA, OSC_XI, fe_chain, oscillator_1dof, oscillator_exact, paper_3dof

__all__ = [
    "MethodSpec",
    "SlopeExpectation",
    "Scenario",
    "ConvergenceRow",
    "ConvergenceReport",
    "BenchRow",
    "run_scenario",
    "run_method",
    "convergence_study",
    "observed_order",
    "energy_trace",
    "exponential_rate",
    "accuracy_runtime_benchmark",
    "steps_to_target",
    "exact_free_response",
    "BUILTIN_SCENARIOS",
    "builtin_scenario",
]

METHOD_KINDS = ("newmark", "generalized_alpha", "rk4", "explicit_euler",
                "dvf", "distorted", "reference", "exact", "euler_distorted")
COMPENSATIONS = ("none", "damping", "fourth-order")


@dataclass(frozen=True)
class MethodSpec:
    """One method entry of a scenario.

    ``compensation=None`` inherits the scenario-level setting. ``label``
    defaults to the method name and keys the result maps.
    """

    name: str
    gamma: float | Fraction = Fraction(1, 2)
    beta: float | Fraction = Fraction(1, 4)
    rho_inf: float | None = None
    compensation: str | None = None
    label: str = ""
    substeps: int = 100

    def __post_init__(self):
        if self.name not in METHOD_KINDS:
            raise ValueError(f"unknown method {self.name!r}; choose from {METHOD_KINDS}")
        if self.compensation is not None and self.compensation not in COMPENSATIONS:
            raise ValueError(f"unknown compensation {self.compensation!r}")
        if self.substeps < 1:
            raise ValueError("substeps must be a positive integer")
        if not self.label:
            object.__setattr__(self, "label", self.name)

    def config(self, dt: float) -> StepperConfig:
        if self.name == "generalized_alpha":
            return StepperConfig(dt, method="generalized_alpha",
                                 rho_inf=1.0 if self.rho_inf is None else self.rho_inf)
        if self.name in ("rk4", "explicit_euler"):
            return StepperConfig(dt, method=self.name)
        # dvf and distorted describe the Newmark scheme with these parameters
        return StepperConfig(dt, method="newmark", gamma=self.gamma, beta=self.beta)


@dataclass(frozen=True)
class SlopeExpectation:
    """An assertion on a fitted slope, checked in CI mode."""

    method: str
    variable: str
    expected: float
    tolerance: float

    def holds(self, slope: float) -> bool:
        return bool(np.isfinite(slope)) and abs(slope - self.expected) <= self.tolerance


@dataclass
class Scenario:
    """A reproducible experiment.

    ``dts`` is the time-step schedule; the first entry is used by
    :func:`run_scenario`. ``baseline`` selects what convergence errors are
    measured against: ``"reference"`` (RK4 at a fine step), ``"exact"``
    (requires ``exact``) or the label of one of the methods.
    """

    name: str
    system: SecondOrderSystem
    methods: list[MethodSpec]
    t_end: float
    dts: list[float]
    t_eval: float | None = None
    compensation: str = "none"
    baseline: str = "reference"
    exact: Callable | None = None
    reference_substeps: int = 100
    noise_floor: float = 0.0
    target_error: float | None = None
    repeats: int = 5
    expectations: list[SlopeExpectation] = field(default_factory=list)
    description: str = ""

    def __post_init__(self):
        if self.compensation not in COMPENSATIONS:
            raise ValueError(f"unknown compensation {self.compensation!r}")
        self.dts = [float(dt) for dt in self.dts]
        if not self.dts:
            raise ValueError("scenario needs at least one time step")
        if any(not dt > 0 for dt in self.dts):
            raise ValueError("time steps must be positive")
        if self.t_eval is None:
            self.t_eval = self.t_end
        if self.t_eval > self.t_end + 1e-12:
            raise ValueError("t_eval must not exceed t_end")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")

    @staticmethod
    def halving(dt0: float, halvings: int) -> list[float]:
        """``[dt0, dt0/2, ..., dt0/2**halvings]``."""
        return [dt0 / 2**k for k in range(halvings + 1)]

    def compensation_for(self, spec: MethodSpec) -> str:
        return self.compensation if spec.compensation is None else spec.compensation

    def labels(self) -> list[str]:
        return _unique_labels(self.methods)


def _unique_labels(methods) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for m in methods:
        k = seen.get(m.label, 0) + 1
        seen[m.label] = k
        out.append(m.label if k == 1 else f"{m.label}#{k}")
    return out


# ---------------------------------------------------------------------------
# Exact references
# ---------------------------------------------------------------------------


def exact_free_response(sys: SecondOrderSystem) -> Callable:
    """Closed-form ``(q, v)`` of an unforced system via the matrix exponential."""
    if not isinstance(sys.forcing, ZeroForcing):
        raise ValueError("exact_free_response needs a system without forcing")
    n = sys.n
    C = sys.C.toarray() if sps.issparse(sys.C) else np.asarray(sys.C)
    K = sys.K.toarray() if sps.issparse(sys.K) else np.asarray(sys.K)
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -sys.minv_times(K)
    A[n:, n:] = -sys.minv_times(C)
    y0 = np.concatenate([sys.q0, sys.v0])

    def response(t):
        y = la.expm(A * float(t)) @ y0
        return y[:n], y[n:]

    return response


def _exact_trajectory(exact: Callable, sys: SecondOrderSystem, dt: float, t_end: float) -> Trajectory:
    J = int(round(t_end / dt))
    ts = np.arange(J + 1) * dt
    qs = np.empty((J + 1, sys.n))
    vs = np.empty((J + 1, sys.n))
    for j, t in enumerate(ts):
        q, v = exact(t)
        qs[j], vs[j] = np.ravel(q), np.ravel(v)
    accs = np.array([sys.acceleration(t, q, v) for t, q, v in zip(ts, qs, vs)])
    return Trajectory(ts, qs, vs, accs, method="exact", digest=sys.digest())


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _compensate(sys: SecondOrderSystem, kind: str, cfg: StepperConfig) -> CompensatedSystem | None:
    if kind == "none":
        return None
    if kind == "damping":
        if cfg.method != "newmark":
            raise CompensationError(f"damping compensation needs the newmark method, got {cfg.method!r}")
        return damping_compensation(sys, cfg)
    comp = fourth_order_compensation(sys, cfg.dt)
    comp.check(cfg)
    return comp


def run_method(scenario: Scenario, spec: MethodSpec, dt: float, t_end: float | None = None) -> Trajectory:
    """Run one method of ``scenario`` at step ``dt``.

    Compensation is applied before stepping; its construction time is
    stored in ``meta["build_time"]`` and excluded from ``wall_time``.
    """
    sys = scenario.system
    t_end = scenario.t_end if t_end is None else t_end
    cfg = spec.config(dt)
    kind = scenario.compensation_for(spec)
    if spec.name in ("newmark", "generalized_alpha", "rk4", "explicit_euler"):
        comp = _compensate(sys, kind, cfg)
        traj = integrate(comp.system if comp else sys, cfg, t_end)
        traj.meta.update(compensation=kind, build_time=comp.build_time if comp else 0.0)
    elif kind != "none":
        raise CompensationError(f"compensation does not apply to method {spec.name!r}")
    elif spec.name == "dvf":
        traj = integrate_dvf(sys, cfg, t_end, substeps=spec.substeps)
    elif spec.name == "distorted":
        traj = integrate_distorted(sys, cfg, t_end, substeps=spec.substeps)
    elif spec.name == "reference":
        traj = reference_solution(sys, dt, t_end, substeps=spec.substeps)
    elif spec.name == "exact":
        if scenario.exact is None:
            raise ValueError(f"scenario {scenario.name!r} has no exact solution")
        traj = _exact_trajectory(scenario.exact, sys, dt, t_end)
    else:
        traj = _euler_distorted_trajectory(sys, dt, t_end)
    traj.meta.setdefault("compensation", "none")
    traj.meta["label"] = spec.label
    return traj


def _euler_distorted_trajectory(sys: SecondOrderSystem, dt: float, t_end: float) -> Trajectory:
    if sys.n != 1 or not isinstance(sys.forcing, ZeroForcing) or float(sys.C[0, 0]) != 0.0:
        raise ValueError("euler_distorted needs an undamped, unforced single-degree-of-freedom system")
    m, k = float(sys.M[0, 0]), float(sys.K[0, 0])
    d = euler_oscillator_distortion(math.sqrt(k / m), dt, m)
    x0, v0 = float(sys.q0[0]), float(sys.v0[0])
    exact = lambda t: (d.position(t, x0, v0), d.velocity(t, x0, v0))  # noqa: E731
    traj = _exact_trajectory(exact, sys, dt, t_end)
    traj.method = "euler_distorted"
    return traj


def run_scenario(scenario: Scenario, dt: float | None = None) -> dict[str, Trajectory]:
    """Run every method of ``scenario`` on a shared grid.

    Duplicate labels get a ``#k`` suffix; they run independently.
    """
    dt = scenario.dts[0] if dt is None else float(dt)
    return {label: run_method(scenario, spec, dt)
            for label, spec in zip(scenario.labels(), scenario.methods)}


# ---------------------------------------------------------------------------
# Convergence
# ---------------------------------------------------------------------------


def observed_order(points) -> float:
    """Least-squares slope of ``log2(e)`` against ``log2(dt)``."""
    pts = [(float(h), float(e)) for h, e in points]
    if len(pts) < 2:
        raise ValueError("need at least two (dt, error) points")
    if any(e <= 0 for _, e in pts):
        raise ValueError("errors must be positive")
    if any(h <= 0 for h, _ in pts):
        raise ValueError("time steps must be positive")
    x = np.log2([h for h, _ in pts])
    y = np.log2([e for _, e in pts])
    if np.ptp(x) == 0:
        raise ValueError("need at least two distinct time steps")
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ConvergenceRow:
    method: str
    dt: float
    error_q: float
    error_v: float
    floor_q: bool
    floor_v: bool
    wall_time: float


def _floor_flags(errors, noise_floor=0.0):
    """Flag every row from the first one whose error fails to decrease."""
    flags = []
    hit = False
    prev = math.inf
    for e in errors:
        if not hit and (not e < prev or e <= noise_floor):
            hit = True
        flags.append(hit)
        prev = e
    return flags


@dataclass
class ConvergenceReport:
    scenario: str
    baseline: str
    t_eval: float
    rows: list[ConvergenceRow]
    slopes: dict[tuple[str, str], float]

    def table(self, method: str) -> list[ConvergenceRow]:
        return [r for r in self.rows if r.method == method]

    def slope(self, method: str, variable: str) -> float:
        return self.slopes[(method, variable)]

    def errors(self, method: str, variable: str) -> np.ndarray:
        return np.array([getattr(r, f"error_{variable}") for r in self.table(method)])

    def smallest_prefloor(self, method: str, variable: str) -> ConvergenceRow:
        ok = [r for r in self.table(method) if not getattr(r, f"floor_{variable}")]
        return ok[-1]

    def check(self, expectations) -> list[tuple[SlopeExpectation, float, bool]]:
        out = []
        for exp in expectations:
            s = self.slopes.get((exp.method, exp.variable), math.nan)
            out.append((exp, s, exp.holds(s)))
        return out


def _fit(rows, variable):
    pts = [(r.dt, getattr(r, f"error_{variable}")) for r in rows
           if not getattr(r, f"floor_{variable}")]
    if len(pts) < 2:
        return math.nan
    return observed_order(pts)


def convergence_study(scenario: Scenario) -> ConvergenceReport:
    """Errors at ``t_eval`` for each method and time step, plus fitted slopes.

    Rows after the first non-decreasing error (or below ``noise_floor``)
    are flagged and excluded from the fit.
    """
    if len(scenario.dts) < 4:
        raise ValueError("a convergence study needs at least four time steps")
    t_eval = scenario.t_eval
    labels = scenario.labels()
    base = scenario.baseline
    fixed = None
    if base == "reference":
        h = min(scenario.dts)
        ref = reference_solution(scenario.system, h, t_eval, substeps=scenario.reference_substeps)
        fixed = (ref.q[-1], ref.v[-1])
    elif base == "exact":
        if scenario.exact is None:
            raise ValueError("baseline 'exact' needs an exact solution")
        q, v = scenario.exact(t_eval)
        fixed = (np.ravel(q), np.ravel(v))
    elif base not in labels:
        raise ValueError(f"unknown baseline {base!r}")

    raw: dict[str, list] = {lab: [] for lab in labels if lab != base}
    for dt in scenario.dts:
        trajs = {}
        for lab, spec in zip(labels, scenario.methods):
            trajs[lab] = run_method(scenario, spec, dt, t_end=t_eval)
        if fixed is None:
            bq, bv = trajs[base].q[-1], trajs[base].v[-1]
        else:
            bq, bv = fixed
        for lab in raw:
            tr = trajs[lab]
            raw[lab].append((dt, float(np.linalg.norm(tr.q[-1] - bq)),
                             float(np.linalg.norm(tr.v[-1] - bv)), tr.wall_time))

    rows, slopes = [], {}
    for lab, entries in raw.items():
        fq = _floor_flags([e[1] for e in entries], scenario.noise_floor)
        fv = _floor_flags([e[2] for e in entries], scenario.noise_floor)
        mrows = [ConvergenceRow(lab, dt, eq, ev, a, b, w)
                 for (dt, eq, ev, w), a, b in zip(entries, fq, fv)]
        rows.extend(mrows)
        slopes[(lab, "q")] = _fit(mrows, "q")
        slopes[(lab, "v")] = _fit(mrows, "v")
    return ConvergenceReport(scenario.name, base, t_eval, rows, slopes)


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


def energy_trace(traj: Trajectory, sys: SecondOrderSystem) -> np.ndarray:
    """``(t, E)`` rows with ``E = v.M v / 2 + q.K q / 2``.

    Pass the original system: a compensated run is judged by the physical
    energy, not by its perturbed matrices.
    """
    q, v = np.atleast_2d(traj.q), np.atleast_2d(traj.v)
    if q.shape[1] != sys.n:
        raise ValueError(f"trajectory has {q.shape[1]} coordinates, system has {sys.n}")
    Mv = (sys.M @ v.T).T
    Kq = (sys.K @ q.T).T
    E = 0.5 * np.einsum("ij,ij->i", v, Mv) + 0.5 * np.einsum("ij,ij->i", q, Kq)
    return np.column_stack([traj.t, E])


def exponential_rate(trace: np.ndarray) -> float:
    """Rate ``r`` of the least-squares fit ``E ~ E0 exp(r t)``."""
    t, E = trace[:, 0], trace[:, 1]
    if np.any(E <= 0):
        raise ValueError("energy must be positive for an exponential fit")
    return float(np.polyfit(t, np.log(E), 1)[0])


# ---------------------------------------------------------------------------
# Accuracy versus runtime
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchRow:
    method: str
    dt: float
    steps: int
    error: float
    wall_time: float
    build_time: float

    @property
    def per_step(self) -> float:
        return self.wall_time / max(self.steps, 1)


def accuracy_runtime_benchmark(scenario: Scenario) -> list[BenchRow]:
    """Error at ``t_eval`` and max-of-``repeats`` stepping time per (method, dt).

    With ``target_error`` set, a method stops refining once it reaches the
    target. Repeats run one after another so timings do not compete.
    """
    t_eval = scenario.t_eval
    if scenario.baseline == "exact":
        if scenario.exact is None:
            raise ValueError("baseline 'exact' needs an exact solution")
        bq = np.ravel(scenario.exact(t_eval)[0])
    elif scenario.baseline == "reference":
        ref = reference_solution(scenario.system, min(scenario.dts), t_eval,
                                 substeps=scenario.reference_substeps)
        bq = ref.q[-1]
    else:
        raise ValueError("benchmark baseline must be 'exact' or 'reference'")

    rows = []
    for lab, spec in zip(scenario.labels(), scenario.methods):
        for dt in scenario.dts:
            times, build = [], 0.0
            for _ in range(scenario.repeats):
                tr = run_method(scenario, spec, dt, t_end=t_eval)
                times.append(tr.wall_time)
                build = max(build, tr.meta.get("build_time", 0.0))
            err = float(np.linalg.norm(tr.q[-1] - bq))
            rows.append(BenchRow(lab, dt, len(tr.t) - 1, err, max(times), build))
            if scenario.target_error is not None and err <= scenario.target_error:
                break
    return rows


def steps_to_target(rows, method: str, target: float) -> BenchRow | None:
    """First row of ``method`` whose error is at most ``target``."""
    for r in rows:
        if r.method == method and r.error <= target:
            return r
    return None


# ---------------------------------------------------------------------------
# Built-in scenarios, one per figure
# ---------------------------------------------------------------------------

_HALF = Fraction(1, 2)
_SIXTH = Fraction(1, 6)
_T100 = 143 * 0.7  # first multiple of 0.7 past t = 100
# 1-DoF schedule: starts at a fifth of the drive period 2 pi / (10 omega) = 0.1
_ONE_DOF_DTS = Scenario.halving(0.02, 5)


def _oscillator_exact_fn(xi=OSC_XI):
    c = 2 * xi * OSC_OMEGA
    return lambda t: oscillator_exact(t, c=c)


def _ee_oscillator():
    sys = SecondOrderSystem([[1.0]], [[0.0]], [[1.0]], None, [1.0], [0.0])
    exact = lambda t: (np.array([math.cos(t)]), np.array([-math.sin(t)]))  # noqa: E731
    return Scenario("ee-oscillator", sys,
                    [MethodSpec("explicit_euler"), MethodSpec("euler_distorted"), MethodSpec("exact")],
                    t_end=10.0, dts=[0.1], baseline="exact", exact=exact,
                    description="Explicit Euler on x'' + x = 0 against the truncated distorted solution")


def _dvf_error():
    g, b = 0.55, 0.28
    return Scenario("dvf-error", paper_3dof(),
                    [MethodSpec("newmark", g, b), MethodSpec("dvf", g, b), MethodSpec("distorted", g, b)],
                    t_end=0.4, dts=Scenario.halving(0.1, 4), baseline="newmark",
                    expectations=[SlopeExpectation(m, x, 3.0, 0.3)
                                  for m in ("dvf", "distorted") for x in ("q", "v")],
                    description="Deviation of Newmark from its distorted vector field and distorted system")


def _dvf_time():
    g, b = 0.55, 0.28
    return Scenario("dvf-time", paper_3dof(),
                    [MethodSpec("newmark", g, b), MethodSpec("dvf", g, b, substeps=20),
                     MethodSpec("distorted", g, b, substeps=20), MethodSpec("reference")],
                    t_end=_T100, dts=[0.7],
                    description="Newmark, distorted solutions and reference over time at dt = 0.7")


def _order_map():
    return Scenario("order-map", oscillator_1dof(),
                    [MethodSpec("newmark", 0.55, 0.28, label="newmark-g055"),
                     MethodSpec("newmark", _HALF, Fraction(1, 4), label="newmark-g050")],
                    t_end=0.4, dts=_ONE_DOF_DTS, baseline="exact",
                    exact=_oscillator_exact_fn(),
                    expectations=[SlopeExpectation("newmark-g055", "q", 2.0, 0.3),
                                  SlopeExpectation("newmark-g055", "v", 1.0, 0.3),
                                  SlopeExpectation("newmark-g050", "q", 2.0, 0.3),
                                  SlopeExpectation("newmark-g050", "v", 2.0, 0.3)],
                    description="Observed order of plain Newmark for gamma = 0.55 and 1/2")


def _energy_methods(g, b):
    return [MethodSpec("newmark", g, b, label="newmark"),
            MethodSpec("newmark", g, b, compensation="damping", label="newmark-damping-comp"),
            MethodSpec("generalized_alpha", rho_inf=0.9),
            MethodSpec("rk4"), MethodSpec("reference")]


def _damping_undamped():
    return Scenario("damping-comp-undamped", paper_3dof(damped=False, forcing="zero"),
                    _energy_methods(0.55, 0.28), t_end=_T100, dts=[0.7],
                    description="Energy of the undamped free 3-DoF system with damping compensation")


def _damping_damped():
    return Scenario("damping-comp-damped", paper_3dof(damped=True, forcing="zero"),
                    _energy_methods(0.55, 0.28), t_end=_T100, dts=[0.7],
                    description="Energy of the damped free 3-DoF system with damping compensation")


def _fourth_methods():
    return [MethodSpec("newmark", _HALF, _SIXTH, label="newmark"),
            MethodSpec("newmark", _HALF, _SIXTH, compensation="fourth-order", label="newmark-4th-comp"),
            MethodSpec("generalized_alpha", rho_inf=1.0),
            MethodSpec("rk4")]


def _fourth_1dof(mode, name):
    exps = [SlopeExpectation("newmark-4th-comp", x, 4.0, 0.4) for x in ("q", "v")]
    exps += [SlopeExpectation(m, x, 2.0, 0.3) for m in ("newmark", "generalized_alpha") for x in ("q", "v")]
    if mode == "analytic":
        exps += [SlopeExpectation("rk4", x, 4.0, 0.3) for x in ("q", "v")]
    return Scenario(name, oscillator_1dof(derivative_mode=mode), _fourth_methods(),
                    t_end=0.4, dts=_ONE_DOF_DTS, baseline="exact",
                    exact=_oscillator_exact_fn(), expectations=exps,
                    description=f"Fourth-order compensation on the 1-DoF oscillator ({mode} derivatives)")


def _fourth_3dof(forcing, damped, name, mode="analytic"):
    return Scenario(name, paper_3dof(damped=damped, forcing=forcing, derivative_mode=mode),
                    _fourth_methods() + [MethodSpec("reference")], t_end=_T100, dts=[0.7],
                    description=f"Fourth-order compensation on the 3-DoF system, {forcing} load")


def _fe_system():
    base = fe_chain(300)
    # release from the static shape under a uniformly distributed load
    load = base.M @ np.ones(base.n)
    q0 = spla.spsolve(sps.csc_matrix(base.K), load)
    return base.replace(q0=q0)


def _fe_benchmark():
    sys = _fe_system()
    t_eval = 0.5
    return Scenario("fe-benchmark", sys,
                    [MethodSpec("generalized_alpha", rho_inf=1.0),
                     MethodSpec("newmark", _HALF, _SIXTH, compensation="fourth-order",
                                label="newmark-4th-comp")],
                    t_end=t_eval, dts=Scenario.halving(t_eval / 193, 5), baseline="exact",
                    exact=exact_free_response(sys), target_error=1e-6, repeats=5,
                    description="Accuracy versus runtime on a 300-element rod")


BUILTIN_SCENARIOS: dict[str, Callable[[], Scenario]] = {
    "ee-oscillator": _ee_oscillator,
    "dvf-error": _dvf_error,
    "dvf-time": _dvf_time,
    "order-map": _order_map,
    "damping-comp-undamped": _damping_undamped,
    "damping-comp-damped": _damping_damped,
    "fourth-order-1dof": lambda: _fourth_1dof("analytic", "fourth-order-1dof"),
    "fourth-order-1dof-numeric": lambda: _fourth_1dof("central-difference", "fourth-order-1dof-numeric"),
    "fourth-order-3dof-harmonic": lambda: _fourth_3dof("sinusoid", True, "fourth-order-3dof-harmonic"),
    "fourth-order-3dof-pulse": lambda: _fourth_3dof("pulse", False, "fourth-order-3dof-pulse"),
    "fourth-order-3dof-square": lambda: _fourth_3dof("square", True, "fourth-order-3dof-square",
                                                     mode="central-difference"),
    "fe-benchmark": _fe_benchmark,
}


def builtin_scenario(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(BUILTIN_SCENARIOS)}") from None
