"""Distorted (modified) equations of the Newmark scheme for linear systems.

Newmark iterates are, up to ``O(dt^3)``, exact samples of the flow of a
distorted vector field. For ``y = (tau, q, v)`` it reads::

    tau' = 1
    q'   = v + dt^2 eta A(tau, q, v)
    v'   = -M^-1 (K q + C v - F(tau)) + dt (1/2 - gamma) A(tau, q, v) + dt^2 f_v2

with ``eta = gamma/2 - beta - 1/12``, ``G = M^-1 C``, ``H = M^-1 K`` and::

    A    = -G H q + (H - G^2) v + G M^-1 F - M^-1 F'
    f_v2 = (H (H q + G v - M^-1 F) + M^-1 F'') / 12 + ((gamma - 1/2)^2 + 1/12) G A

The same dynamics can be rewritten as ``M q'' + C~ q' + K~ q = F~(t)``; see
:func:`distorted_system`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .integrators import StepperConfig, Trajectory, integrate_first_order
from .model import Forcing, SecondOrderSystem

__all__ = [
    "DistortionCoefficients",
    "DistortedVectorField",
    "DistortedSystem",
    "EulerOscillatorDistortion",
    "A_field",
    "dvf_eval",
    "distorted_system",
    "euler_oscillator_distortion",
    "integrate_dvf",
    "integrate_distorted",
]


def _dense(A):
    return A.toarray() if sps.issparse(A) else np.asarray(A, dtype=float)


class DistortionCoefficients:
    """Scalars and solve-backed operators shared by the distortion formulas.

    ``G``, ``H`` and ``minv`` apply ``M^-1 C``, ``M^-1 K`` and ``M^-1`` to
    vectors through the mass factorization. For dense systems ``G`` and
    ``H`` are also kept as matrices (computed by the same solves).
    """

    def __init__(self, sys: SecondOrderSystem, cfg: StepperConfig, dt: float | None = None):
        self.sys = sys
        self.dt = float(cfg.dt if dt is None else dt)
        if self.dt < 0:
            raise ValueError("time step must be nonnegative")
        self.gamma = float(cfg.gamma)
        self.beta = float(cfg.beta)
        self.eta = 0.5 * self.gamma - self.beta - 1.0 / 12.0
        self.c1 = self.gamma - 0.5
        self.c2 = self.c1**2 + 1.0 / 12.0
        if not sys.sparse:
            self.G_matrix = sys.minv_times(sys.C)
            self.H_matrix = sys.minv_times(sys.K)

    def minv(self, x):
        return self.sys.solve_mass(x)

    def G(self, x):
        return self.sys.solve_mass(self.sys.C @ x)

    def H(self, x):
        return self.sys.solve_mass(self.sys.K @ x)

    def B(self, x):
        """``dt (gamma - 1/2) x - dt^2 ((gamma - 1/2)^2 + 1/12) C M^-1 x``."""
        return self.dt * self.c1 * x - self.dt**2 * self.c2 * (self.sys.C @ self.minv(x))

    def B_matrix(self):
        """Dense ``B``; ``C M^-1`` comes from a transposed solve, not from ``M^-1``."""
        s = self.sys
        CMi = s.solve_mass_transposed(_dense(s.C).T).T
        return self.dt * self.c1 * np.eye(s.n) - self.dt**2 * self.c2 * CMi


def A_field(sys: SecondOrderSystem, tau: float, q, v, dt: float | None = None) -> np.ndarray:
    """``-G H q + (H - G^2) v + G M^-1 F(tau) - M^-1 F'(tau)``.

    ``dt`` is only used when the forcing differentiates numerically.
    """
    solve = sys.solve_mass
    F = sys.forcing(tau)
    dF = sys.forcing.derivative(tau, 1, dt)
    Hq = solve(sys.K @ q)
    Gv = solve(sys.C @ v)
    return (-solve(sys.C @ Hq) + solve(sys.K @ v) - solve(sys.C @ Gv)
            + solve(sys.C @ solve(F)) - solve(dF))


class DistortedVectorField:
    """The ``O(dt^2)``-truncated distorted vector field as a callable ``f(y, t)``.

    The state is ``y = (q, v)``; the clock ``tau`` is the time argument.
    Dense systems use precomputed matrices, sparse ones go through solves.
    """

    def __init__(self, sys: SecondOrderSystem, cfg: StepperConfig, dt: float | None = None):
        self.sys = sys
        self.coef = co = DistortionCoefficients(sys, cfg, dt)
        self.n = sys.n
        if not sys.sparse:
            G, H = co.G_matrix, co.H_matrix
            self._Aq = -G @ H
            self._Av = H - G @ G
            self._G, self._H = G, H

    def A(self, tau, q, v, F=None, dF=None):
        s, co = self.sys, self.coef
        if F is None:
            F = s.forcing(tau)
        if dF is None:
            dF = s.forcing.derivative(tau, 1, co.dt)
        if s.sparse:
            return A_field(s, tau, q, v, co.dt)
        mF = s.solve_mass(F)
        return self._Aq @ q + self._Av @ v + self._G @ mF - s.solve_mass(dF)

    def components(self, tau, q, v):
        """``(f_q, f_v)`` of the truncated field at ``(tau, q, v)``."""
        s, co = self.sys, self.coef
        dt = co.dt
        F, dF, d2F = s.forcing.derivatives(tau, dt)
        A = self.A(tau, q, v, F, dF)
        mF = s.solve_mass(F)
        if s.sparse:
            Hq, Gv = co.H(q), co.G(v)
            base = -(Hq + Gv) + mF
            fv2 = (co.H(Hq + Gv - mF) + s.solve_mass(d2F)) / 12.0 + co.c2 * co.G(A)
        else:
            Hq, Gv = self._H @ q, self._G @ v
            base = -(Hq + Gv) + mF
            fv2 = (self._H @ (Hq + Gv - mF) + s.solve_mass(d2F)) / 12.0 + co.c2 * (self._G @ A)
        fq = v + dt * dt * co.eta * A
        fv = base + dt * (0.5 - co.gamma) * A + dt * dt * fv2
        return fq, fv

    def __call__(self, y, t):
        n = self.n
        fq, fv = self.components(t, y[:n], y[n:])
        return np.concatenate([fq, fv])


def dvf_eval(sys: SecondOrderSystem, cfg: StepperConfig, tau: float, q, v, dt: float | None = None):
    """Truncated distorted vector field ``(f_tau, f_q, f_v)`` at ``(tau, q, v)``.

    ``dt`` overrides ``cfg.dt``; ``dt=0`` gives the undistorted field.
    """
    fq, fv = DistortedVectorField(sys, cfg, dt).components(
        tau, np.asarray(q, dtype=float), np.asarray(v, dtype=float))
    return 1.0, fq, fv


class _DistortedForcing(Forcing):
    """``F~(t) = F - B (C M^-1 F - F') + dt^2 (eta - 1/12) (K M^-1 F - F'')``."""

    has_analytic_derivatives = False
    derivative_mode = "central-difference"

    def __init__(self, coef: DistortionCoefficients):
        self.coef = coef
        self.n = coef.sys.n

    def value(self, t):
        co = self.coef
        s = co.sys
        F, dF, d2F = s.forcing.derivatives(t, co.dt)
        mF = s.solve_mass(F)
        return (F - co.B(s.C @ mF - dF)
                + co.dt**2 * (co.eta - 1.0 / 12.0) * (s.K @ mF - d2F))


@dataclass
class DistortedSystem:
    """Distorted damping, stiffness and forcing with the shifted initial velocity."""

    base: SecondOrderSystem
    config: StepperConfig
    C: np.ndarray
    K: np.ndarray
    forcing: Forcing
    qdot0_correction: np.ndarray
    coef: DistortionCoefficients

    def as_system(self) -> SecondOrderSystem:
        """``M q'' + C~ q' + K~ q = F~`` with ``q'(0) = v0 + correction``."""
        b = self.base
        return SecondOrderSystem(b.M, self.C, self.K, self.forcing, b.q0,
                                 b.v0 + self.qdot0_correction, sparse=b.sparse)

    def newmark_velocity(self, t, q, qdot):
        """Map ``q'`` of the distorted system back to the Newmark velocity ``v``.

        ``q' = v + dt^2 eta A(t, q, v)``; evaluating ``A`` at ``q'`` instead
        of ``v`` only costs ``O(dt^4)``.
        """
        co = self.coef
        return qdot - co.dt**2 * co.eta * A_field(self.base, t, q, qdot, co.dt)


def distorted_system(sys: SecondOrderSystem, cfg: StepperConfig,
                     dt: float | None = None) -> DistortedSystem:
    """Second-order form of the truncated distorted equation.

    ``C~ = C + B (K - C M^-1 C) + dt^2 (eta - 1/12) K M^-1 C``,
    ``K~ = K - B C M^-1 K + dt^2 (eta - 1/12) K M^-1 K``.

    ``dt`` overrides ``cfg.dt``; at ``dt=0`` the original system comes back.
    """
    co = DistortionCoefficients(sys, cfg, dt)
    C, K = _dense(sys.C), _dense(sys.K)
    MiC, MiK = sys.minv_times(C), sys.minv_times(K)
    dt = co.dt
    w = dt**2 * (co.eta - 1.0 / 12.0)

    def B(X):
        return dt * co.c1 * X - dt**2 * co.c2 * (C @ sys.minv_times(X))

    Ct = C + B(K - C @ MiC) + w * (K @ MiC)
    Kt = K - B(C @ MiK) + w * (K @ MiK)
    if sys.sparse:
        Ct, Kt = sps.csr_matrix(Ct), sps.csr_matrix(Kt)
    corr = dt**2 * co.eta * A_field(sys, 0.0, sys.q0, sys.v0, dt)
    return DistortedSystem(sys, cfg, Ct, Kt, _DistortedForcing(co), corr, co)


def integrate_dvf(sys: SecondOrderSystem, cfg: StepperConfig, t_end: float,
                  substeps: int = 100) -> Trajectory:
    """RK4 solution of the truncated distorted vector field on the ``cfg.dt`` grid."""
    field = DistortedVectorField(sys, cfg)
    y0 = np.concatenate([sys.q0, sys.v0])
    ts, ys = integrate_first_order(field, y0, t_end, cfg.dt, substeps)
    n = sys.n
    qs, vs = ys[:, :n], ys[:, n:]
    accs = np.array([field.components(t, q, v)[1] for t, q, v in zip(ts, qs, vs)])
    return Trajectory(ts, qs, vs, accs, method="dvf", config=cfg, digest=sys.digest(),
                      meta={"substeps": substeps})


def integrate_distorted(sys: SecondOrderSystem, cfg: StepperConfig, t_end: float,
                        substeps: int = 100) -> Trajectory:
    """RK4 solution of the distorted second-order system.

    The velocity column holds the Newmark-comparable ``v``, not ``q'``.
    """
    from .integrators import reference_solution

    ds = distorted_system(sys, cfg)
    ref = reference_solution(ds.as_system(), cfg.dt, t_end, substeps)
    v = np.array([ds.newmark_velocity(t, q, qd) for t, q, qd in zip(ref.t, ref.q, ref.v)])
    return Trajectory(ref.t, ref.q, v, ref.a, method="distorted", config=cfg,
                      digest=sys.digest(), wall_time=ref.wall_time,
                      meta={"substeps": substeps, "qdot": ref.v})


# ---------------------------------------------------------------------------
# Explicit Euler on the harmonic oscillator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerOscillatorDistortion:
    """Distorted oscillator seen by explicit Euler, truncated after ``dt^2``.

    ``x(t) = exp(growth_rate t) (x0 cos(frequency t) + v0/omega sin(frequency t))``
    solves the truncated distorted equation with ``x(0) = x0``, ``v(0) = v0``.
    """

    omega: float
    dt: float
    m: float
    m_distorted: float
    c_distorted: float
    k_distorted: float
    growth_rate: float
    frequency: float

    def position(self, t, x0=1.0, v0=0.0):
        t = np.asarray(t, dtype=float)
        env = np.exp(self.growth_rate * t)
        return env * (x0 * np.cos(self.frequency * t) + v0 / self.omega * np.sin(self.frequency * t))

    def velocity(self, t, x0=1.0, v0=0.0):
        """Time derivative of :meth:`position`."""
        t = np.asarray(t, dtype=float)
        r, w = self.growth_rate, self.frequency
        c1, c2 = x0, v0 / self.omega
        cs, sn = np.cos(w * t), np.sin(w * t)
        return np.exp(r * t) * ((r * c1 + w * c2) * cs + (r * c2 - w * c1) * sn)


def euler_oscillator_distortion(omega: float, dt: float, m: float = 1.0) -> EulerOscillatorDistortion:
    """Distorted mass, damping and stiffness of explicit Euler on ``m x'' + k x = 0``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    k = m * omega**2
    return EulerOscillatorDistortion(
        omega=omega,
        dt=dt,
        m=m,
        m_distorted=m * (1.0 + dt**2 * k / (3.0 * m)),
        c_distorted=-dt * k + dt**3 * k**2 / (6.0 * m),
        k_distorted=k * (1.0 - dt**2 * k / (12.0 * m)),
        growth_rate=0.5 * dt * omega**2,
        frequency=omega - dt**2 * omega**3 / 3.0,
    )
