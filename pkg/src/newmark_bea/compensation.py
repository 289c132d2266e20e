"""Compensated system parameters that cancel Newmark's distortion.

Two constructions, both leaving the scheme itself untouched:

* :func:`damping_compensation` replaces ``C`` by ``C^`` so that the
  distorted damping of the Newmark run equals the physical ``C`` through
  ``O(dt^2)``. Any ``gamma``, ``beta``.
* :func:`fourth_order_compensation` perturbs ``C``, ``K`` and ``F`` so that
  Newmark with ``gamma = 1/2``, ``beta = 1/6`` becomes fourth-order.

Compensated quantities depend on ``dt`` and must only be used with the
time step they were built for.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sps

from .integrators import StepperConfig
from .model import Forcing, SecondOrderSystem

__all__ = [
    "CompensatedSystem",
    "CompensationError",
    "damping_compensation",
    "fourth_order_compensation",
    "compensated_forcing_eval",
    "requires_fourth_order_scheme",
]

FOURTH_ORDER_GAMMA = Fraction(1, 2)
FOURTH_ORDER_BETA = Fraction(1, 6)


class CompensationError(ValueError):
    """A compensated system is used with parameters it was not built for."""


def _dense(A):
    return A.toarray() if sps.issparse(A) else np.asarray(A, dtype=float)


def _exact_equal(value, target: Fraction) -> bool:
    # exact comparison: Fractions compare exactly, floats must be the
    # double nearest to the target
    if isinstance(value, Fraction):
        return value == target
    return float(value) == float(target)


def requires_fourth_order_scheme(cfg: StepperConfig) -> None:
    """Raise unless ``cfg`` is Newmark with exactly ``gamma = 1/2``, ``beta = 1/6``."""
    if cfg.method != "newmark":
        raise CompensationError(f"fourth-order compensation needs the newmark method, got {cfg.method!r}")
    if not (_exact_equal(cfg.gamma, FOURTH_ORDER_GAMMA) and _exact_equal(cfg.beta, FOURTH_ORDER_BETA)):
        raise CompensationError(
            f"fourth-order compensation needs gamma=1/2, beta=1/6 exactly; got gamma={cfg.gamma}, beta={cfg.beta}")


class _CompensatedForcing(Forcing):
    """``F^(t) = F - dt^2/12 (C M^-1 (C M^-1 F - F') - K M^-1 F + F'')``."""

    has_analytic_derivatives = False
    derivative_mode = "central-difference"

    def __init__(self, base: SecondOrderSystem, dt: float):
        self.base = base
        self.dt = float(dt)
        self.n = base.n

    def value(self, t):
        s = self.base
        F, dF, d2F = s.forcing.derivatives(t, self.dt)
        x = s.solve_mass(F)
        y = s.solve_mass(s.C @ x - dF)
        return F - (self.dt**2 / 12.0) * (s.C @ y - s.K @ x + d2F)


@dataclass
class CompensatedSystem:
    """Compensated damping, stiffness and forcing for one time step.

    ``system`` is the ready-to-integrate :class:`SecondOrderSystem` with the
    original mass matrix and initial conditions.
    """

    base: SecondOrderSystem
    C: object
    K: object
    forcing: Forcing
    kind: str
    dt: float
    gamma: float | Fraction | None = None
    beta: float | Fraction | None = None
    build_time: float = 0.0

    def __post_init__(self):
        b = self.base
        self.system = SecondOrderSystem(b.M, self.C, self.K, self.forcing, b.q0, b.v0, sparse=b.sparse)

    def check(self, cfg: StepperConfig) -> None:
        """Refuse a configuration this compensation was not built for."""
        if abs(cfg.dt - self.dt) > 1e-14 * self.dt:
            raise CompensationError(
                f"compensated system was built for dt={self.dt}, not dt={cfg.dt}")
        if self.kind == "fourth_order":
            requires_fourth_order_scheme(cfg)
        elif (cfg.method != "newmark" or float(cfg.gamma) != float(self.gamma)
              or float(cfg.beta) != float(self.beta)):
            raise CompensationError(
                f"damping compensation was built for newmark gamma={self.gamma}, beta={self.beta}")

    def manifest(self) -> dict:
        return {
            "kind": self.kind,
            "dt": self.dt,
            "gamma": str(self.gamma) if self.gamma is not None else None,
            "beta": str(self.beta) if self.beta is not None else None,
            "n": self.base.n,
            "base_digest": self.base.digest(),
        }


def _like_base(base: SecondOrderSystem, A):
    if base.sparse:
        A = sps.csr_matrix(A)
        A.eliminate_zeros()
    return A


def damping_compensation(sys: SecondOrderSystem, cfg: StepperConfig) -> CompensatedSystem:
    """``C^ = C + dt C^_1 + dt^2 C^_2`` eliminating numerical damping.

    ``C^_1 = (gamma - 1/2) (C M^-1 C - K)`` and::

        C^_2 = ((gamma - 1/2)^2 - 1/12) C M^-1 C M^-1 C
               - (gamma^2 - gamma/2 - beta + 1/12) K M^-1 C
               + C M^-1 K / 12

    ``K`` and ``F`` are unchanged.
    """
    start = time.perf_counter()
    g, b, dt = float(cfg.gamma), float(cfg.beta), float(cfg.dt)
    C, K = _dense(sys.C), _dense(sys.K)
    MiC, MiK = sys.minv_times(C), sys.minv_times(K)
    CMiC = C @ MiC
    C1 = (g - 0.5) * (CMiC - K)
    C2 = (((g - 0.5) ** 2 - 1.0 / 12.0) * (CMiC @ MiC)
          - (g * g - 0.5 * g - b + 1.0 / 12.0) * (K @ MiC)
          + (C @ MiK) / 12.0)
    C_hat = _like_base(sys, C + dt * C1 + dt * dt * C2)
    return CompensatedSystem(sys, C_hat, sys.K, sys.forcing, "damping_compensation", dt,
                             cfg.gamma, cfg.beta, time.perf_counter() - start)


def fourth_order_compensation(sys: SecondOrderSystem, dt: float) -> CompensatedSystem:
    """Compensated ``C^``, ``K^``, ``F^`` for fourth-order Newmark (gamma=1/2, beta=1/6).

    ::

        C^ = C + dt^2/12 (C M^-1 K + K M^-1 C - C M^-1 C M^-1 C)
        K^ = K + dt^2/12 (K M^-1 K - C M^-1 C M^-1 K)
        F^ = F - dt^2/12 (C M^-1 (C M^-1 F - F') - K M^-1 F + F'')

    The forcing correction is the negative of the distortion the scheme
    adds to ``F``, mirroring the stiffness and damping corrections.

    The derivatives of ``F`` are exact or central differences with step
    ``dt``, following the forcing's derivative mode.
    """
    start = time.perf_counter()
    dt = float(dt)
    if not dt > 0:
        raise ValueError("time step must be positive")
    w = dt * dt / 12.0
    C, K = _dense(sys.C), _dense(sys.K)
    MiC, MiK = sys.minv_times(C), sys.minv_times(K)
    CMiC = C @ MiC
    C_hat = C + w * (C @ MiK + K @ MiC - CMiC @ MiC)
    K_hat = K + w * (K @ MiK - CMiC @ MiK)
    return CompensatedSystem(sys, _like_base(sys, C_hat), _like_base(sys, K_hat),
                             _CompensatedForcing(sys, dt), "fourth_order", dt,
                             FOURTH_ORDER_GAMMA, FOURTH_ORDER_BETA, time.perf_counter() - start)


def compensated_forcing_eval(comp: CompensatedSystem, t: float, dt: float | None = None) -> np.ndarray:
    """``F^(t)`` of a compensated system.

    ``dt`` defaults to the step the compensation was built for.
    """
    if t < 0:
        raise ValueError(f"negative time t={t}")
    if dt is None or dt == comp.dt or comp.kind != "fourth_order":
        return comp.forcing(t)
    return _CompensatedForcing(comp.base, dt)(t)
