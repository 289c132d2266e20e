"""Fixed-step integrators: Newmark, generalized-alpha, RK4 and explicit Euler.

Newmark and generalized-alpha share one implementation
(:class:`NewmarkFamilyStepper`); Newmark is the ``alpha_m = alpha_f = 0``
member. The implicit update is solved for the new acceleration with an
effective matrix that is factorized once per (system, configuration).
"""
from __future__ import annotations

import time
import warnings
import weakref
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import scipy.linalg as la
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .model import FirstOrderView, SecondOrderSystem, first_order_view

__all__ = [
    "StepperConfig",
    "State",
    "Trajectory",
    "StepFailure",
    "IntegrationError",
    "NewmarkFamilyStepper",
    "alpha_parameters",
    "initial_acceleration",
    "newmark_step",
    "generalized_alpha_step",
    "rk4_step",
    "explicit_euler_step",
    "integrate",
    "reference_solution",
    "grid_steps",
]

METHODS = ("newmark", "generalized_alpha", "rk4", "explicit_euler")


class StepFailure(RuntimeError):
    """The effective matrix of an implicit step could not be factorized."""


class IntegrationError(RuntimeError):
    """A run aborted mid-way; ``partial`` holds the trajectory up to the failure."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def alpha_parameters(rho_inf: float):
    """Optimal generalized-alpha parameters ``(alpha_m, alpha_f, gamma, beta)``.

    >>> alpha_parameters(1.0)
    (0.5, 0.5, 0.5, 0.25)
    """
    if not 0.0 <= rho_inf <= 1.0:
        raise ValueError(f"rho_inf must lie in [0, 1], got {rho_inf}")
    alpha_m = (2.0 * rho_inf - 1.0) / (rho_inf + 1.0)
    alpha_f = rho_inf / (rho_inf + 1.0)
    gamma = 0.5 - alpha_m + alpha_f
    beta = 0.25 * (1.0 - alpha_m + alpha_f) ** 2
    return alpha_m, alpha_f, gamma, beta


@dataclass(frozen=True)
class StepperConfig:
    """Time step and scheme parameters.

    ``gamma`` and ``beta`` may be floats or :class:`fractions.Fraction`; the
    latter allow exact checks such as the fourth-order requirement
    ``(gamma, beta) == (1/2, 1/6)``. For ``generalized_alpha`` the scheme
    parameters follow from ``rho_inf`` unless ``alpha_m``/``alpha_f`` are
    given explicitly.
    """

    dt: float
    method: str = "newmark"
    gamma: float | Fraction = Fraction(1, 2)
    beta: float | Fraction = Fraction(1, 4)
    rho_inf: float | None = None
    alpha_m: float | None = None
    alpha_f: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method == "generalized_alpha":
            if self.alpha_m is None and self.alpha_f is None:
                if self.rho_inf is None:
                    raise ValueError("generalized_alpha needs rho_inf or explicit alpha_m/alpha_f")
                am, af, g, b = alpha_parameters(self.rho_inf)
                object.__setattr__(self, "alpha_m", am)
                object.__setattr__(self, "alpha_f", af)
                object.__setattr__(self, "gamma", g)
                object.__setattr__(self, "beta", b)
            elif self.alpha_m is None or self.alpha_f is None:
                raise ValueError("give both alpha_m and alpha_f")

    def scheme(self):
        """``(gamma, beta, alpha_m, alpha_f)`` as floats."""
        return (float(self.gamma), float(self.beta),
                float(self.alpha_m or 0.0), float(self.alpha_f or 0.0))


@dataclass(frozen=True)
class State:
    t: float
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray


@dataclass
class Trajectory:
    """Uniformly sampled states ``t_j = j dt`` with metadata."""

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray
    method: str = ""
    config: StepperConfig | None = None
    digest: str = ""
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def state(self, j: int) -> State:
        return State(self.t[j], self.q[j], self.v[j], self.a[j])

    def states(self):
        for j in range(len(self)):
            yield self.state(j)

    def index(self, t: float) -> int:
        """Index of the grid point at time ``t``."""
        j = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[j] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"t={t} is not a grid point of this trajectory")
        return j

    def at(self, t: float) -> State:
        return self.state(self.index(t))


# ---------------------------------------------------------------------------
# Newmark family
# ---------------------------------------------------------------------------


class NewmarkFamilyStepper:
    """One-step update of the Newmark/generalized-alpha family.

    With ``alpha_m = alpha_f = 0`` this is the classical Newmark scheme::

        (M + gamma dt C + beta dt^2 K) a1 = F(t + dt)
            - C (v0 + (1 - gamma) dt a0)
            - K (q0 + dt v0 + (1/2 - beta) dt^2 a0)
        q1 = q0 + dt v0 + dt^2 ((1/2 - beta) a0 + beta a1)
        v1 = v0 + dt ((1 - gamma) a0 + gamma a1)

    Generalized-alpha enforces the equation of motion at the weighted
    instants ``t + (1 - alpha_f) dt`` (displacement, velocity, load) and
    ``(1 - alpha_m)`` (inertia).
    """

    def __init__(self, sys: SecondOrderSystem, dt: float, gamma: float, beta: float,
                 alpha_m: float = 0.0, alpha_f: float = 0.0):
        self.sys = sys
        self.dt = float(dt)
        self.gamma, self.beta = float(gamma), float(beta)
        self.alpha_m, self.alpha_f = float(alpha_m), float(alpha_f)
        dt = self.dt
        wf = 1.0 - self.alpha_f
        S = ((1.0 - self.alpha_m) * sys.M + (wf * self.gamma * dt) * sys.C
             + (wf * self.beta * dt * dt) * sys.K)
        self._sparse = sps.issparse(S)
        try:
            if self._sparse:
                self._lu = spla.splu(sps.csc_matrix(S))
                diag = self._lu.U.diagonal()
                bad = not np.all(np.isfinite(diag)) or np.any(diag == 0)
            else:
                with warnings.catch_warnings():
                    # singularity is reported below as a StepFailure
                    warnings.simplefilter("ignore", la.LinAlgWarning)
                    self._lu = la.lu_factor(S, check_finite=True)
                diag = np.abs(np.diag(self._lu[0]))
                bad = np.any(diag == 0) or diag.min() < 1e-14 * diag.max()
        except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
            raise StepFailure(f"effective matrix factorization failed: {exc}") from exc
        if bad:
            raise StepFailure(
                f"singular effective matrix (dt={dt}, gamma={gamma}, beta={beta}, "
                f"alpha_m={alpha_m}, alpha_f={alpha_f})")

    def _solve(self, rhs):
        if self._sparse:
            return self._lu.solve(rhs)
        return la.lu_solve(self._lu, rhs, check_finite=False)

    def step(self, state: State, t_next: float | None = None) -> State:
        s, dt = self.sys, self.dt
        g, b, am, af = self.gamma, self.beta, self.alpha_m, self.alpha_f
        q0, v0, a0 = state.q, state.v, state.a
        if t_next is None:
            t_next = state.t + dt
        t_load = state.t + (1.0 - af) * dt if af else t_next
        wf = 1.0 - af
        rhs = (s.forcing(t_load)
               - am * (s.M @ a0)
               - s.C @ (v0 + (wf * (1.0 - g) * dt) * a0)
               - s.K @ (q0 + wf * (dt * v0 + ((0.5 - b) * dt * dt) * a0)))
        a1 = self._solve(rhs)
        q1 = q0 + dt * v0 + (dt * dt) * ((0.5 - b) * a0 + b * a1)
        v1 = v0 + dt * ((1.0 - g) * a0 + g * a1)
        return State(t_next, q1, v1, a1)


_STEPPER_CACHE: "weakref.WeakKeyDictionary[SecondOrderSystem, dict]" = weakref.WeakKeyDictionary()


def _stepper_for(sys: SecondOrderSystem, cfg: StepperConfig) -> NewmarkFamilyStepper:
    per_sys = _STEPPER_CACHE.setdefault(sys, {})
    key = (cfg.dt,) + cfg.scheme()
    if key not in per_sys:
        g, b, am, af = cfg.scheme()
        per_sys[key] = NewmarkFamilyStepper(sys, cfg.dt, g, b, am, af)
    return per_sys[key]


def initial_acceleration(sys: SecondOrderSystem, q0=None, v0=None) -> np.ndarray:
    """``M^-1 (F(0) - C v0 - K q0)``."""
    q0 = sys.q0 if q0 is None else np.asarray(q0, dtype=float)
    v0 = sys.v0 if v0 is None else np.asarray(v0, dtype=float)
    return sys.acceleration(0.0, q0, v0)


def newmark_step(sys: SecondOrderSystem, state: State, cfg: StepperConfig) -> State:
    """One Newmark step with ``cfg.gamma``, ``cfg.beta``."""
    if cfg.method == "generalized_alpha":
        cfg = replace(cfg, method="newmark", rho_inf=None, alpha_m=None, alpha_f=None)
    return _stepper_for(sys, cfg).step(state)


def generalized_alpha_step(sys: SecondOrderSystem, state: State, cfg: StepperConfig) -> State:
    """One generalized-alpha step; reduces to :func:`newmark_step` when both alphas vanish."""
    return _stepper_for(sys, cfg).step(state)


# ---------------------------------------------------------------------------
# Explicit one-step methods on the first-order form
# ---------------------------------------------------------------------------


def rk4_step(view, y, t: float, dt: float) -> np.ndarray:
    """Classical four-stage Runge-Kutta step of ``y' = view(y, t)``."""
    k1 = view(y, t)
    k2 = view(y + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = view(y + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = view(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def explicit_euler_step(view, y, t: float, dt: float) -> np.ndarray:
    return y + dt * view(y, t)


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def grid_steps(t_end: float, dt: float) -> int:
    """Number of steps ``J`` with ``J dt == t_end``; rejects non-multiples."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if t_end < 0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    J = int(round(t_end / dt))
    if abs(J * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not an integer multiple of dt={dt}")
    return J


def _empty(J, n):
    return np.empty(J + 1), np.empty((J + 1, n)), np.empty((J + 1, n)), np.empty((J + 1, n))


def integrate(sys: SecondOrderSystem, cfg: StepperConfig, t_end: float) -> Trajectory:
    """Run ``cfg.method`` from the system's initial state up to ``t_end``.

    Every state on the grid ``t_j = j dt`` is recorded. The acceleration
    column of explicit-method trajectories is evaluated from the equation
    of motion.
    """
    J = grid_steps(t_end, cfg.dt)
    n, dt = sys.n, cfg.dt
    ts, qs, vs, accs = _empty(J, n)
    a0 = initial_acceleration(sys)
    ts[0], qs[0], vs[0], accs[0] = 0.0, sys.q0, sys.v0, a0
    traj = Trajectory(ts, qs, vs, accs, method=cfg.method, config=cfg, digest=sys.digest())

    start = time.perf_counter()
    j = 0
    try:
        if cfg.method in ("newmark", "generalized_alpha"):
            stepper = _stepper_for(sys, cfg)
            state = State(0.0, sys.q0, sys.v0, a0)
            for j in range(1, J + 1):
                state = stepper.step(state, t_next=j * dt)
                ts[j], qs[j], vs[j], accs[j] = state.t, state.q, state.v, state.a
        else:
            view = first_order_view(sys)
            stepfn = rk4_step if cfg.method == "rk4" else explicit_euler_step
            y = view.initial_state()
            for j in range(1, J + 1):
                y = stepfn(view, y, (j - 1) * dt, dt)
                ts[j] = j * dt
                qs[j], vs[j] = y[:n], y[n:]
                accs[j] = sys.acceleration(ts[j], qs[j], vs[j])
    except Exception as exc:
        traj.t, traj.q, traj.v, traj.a = ts[:j], qs[:j], vs[:j], accs[:j]
        raise IntegrationError(f"{cfg.method} failed at step {j}: {exc}", partial=traj) from exc
    traj.wall_time = time.perf_counter() - start
    return traj


def integrate_first_order(view, y0, t_end: float, dt: float, substeps: int = 1,
                          stepfn=rk4_step) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``y' = view(y, t)`` with ``substeps`` RK4 steps per coarse step.

    Returns the coarse grid and the states sampled on it.
    """
    J = grid_steps(t_end, dt)
    h = dt / substeps
    ys = np.empty((J + 1, len(y0)))
    ys[0] = y = np.asarray(y0, dtype=float)
    for j in range(J):
        base = j * dt
        for k in range(substeps):
            y = stepfn(view, y, base + k * h, h)
        ys[j + 1] = y
    return np.arange(J + 1) * dt, ys


def reference_solution(sys: SecondOrderSystem, dt: float, t_end: float,
                       substeps: int = 100) -> Trajectory:
    """RK4 at ``dt / substeps``, sampled on the ``dt`` grid."""
    view = first_order_view(sys)
    n = sys.n
    start = time.perf_counter()
    ts, ys = integrate_first_order(view, view.initial_state(), t_end, dt, substeps)
    wall = time.perf_counter() - start
    qs, vs = ys[:, :n], ys[:, n:]
    accs = np.array([sys.acceleration(t, q, v) for t, q, v in zip(ts, qs, vs)])
    return Trajectory(ts, qs, vs, accs, method="reference",
                      config=StepperConfig(dt, method="rk4"), digest=sys.digest(),
                      wall_time=wall, meta={"substeps": substeps})
