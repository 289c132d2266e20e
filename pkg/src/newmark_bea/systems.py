"""Built-in test systems.

``paper_3dof``
    Randomly generated, fully coupled 3-DoF system with light damping and
    a bank of slow sinusoids. Variants swap the load for a square wave or
    a finite pulse, or drop damping/forcing.
``oscillator_1dof``
    Damped 1-DoF oscillator driven by ``0.8 cos(10 omega t)``; it has a
    closed-form solution (:func:`oscillator_exact`).
``fe_chain``
    Sparse banded stand-in for a finite-element model: a clamped-free
    chain of two-node rod elements with consistent mass.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .model import Pulse, SecondOrderSystem, SinusoidBank, SquareWaveBank, ZeroForcing

__all__ = [
    "PAPER_M",
    "PAPER_K",
    "PAPER_C",
    "PAPER_FORCE_AMPLITUDES",
    "PAPER_FORCE_FREQUENCIES",
    "paper_3dof",
    "oscillator_1dof",
    "oscillator_exact",
    "fe_chain",
    "BUILTIN_SYSTEMS",
    "builtin_system",
]

PAPER_M = np.array([
    [4.6965, 1.4187, 1.6038],
    [1.4187, 4.7195, 1.5540],
    [1.6038, 1.5540, 4.4809],
])
PAPER_K = np.array([
    [4.5316, 1.6906, 1.6784],
    [1.6906, 4.7245, 1.4670],
    [1.6784, 1.4670, 4.3618],
])
PAPER_C = np.array([
    [0.033921, 0.003909, 0.007335],
    [0.003909, 0.030597, 0.002903],
    [0.007335, 0.002903, 0.031755],
])
PAPER_FORCE_AMPLITUDES = np.array([-0.040790, -0.006630, -0.006914])
PAPER_FORCE_FREQUENCIES = np.array([0.2457, 0.2587, 0.3262])
PAPER_Q0 = np.array([0.1, 0.0, 0.0])
PAPER_V0 = np.zeros(3)

for _a in (PAPER_M, PAPER_K, PAPER_C, PAPER_FORCE_AMPLITUDES, PAPER_FORCE_FREQUENCIES,
           PAPER_Q0, PAPER_V0):
    _a.setflags(write=False)


def paper_3dof(damped: bool = True, forcing: str = "sinusoid", mu: float = 0.2,
               t_cut: float = 14.0, derivative_mode: str = "analytic") -> SecondOrderSystem:
    """The 3-DoF verification system.

    ``forcing`` is one of ``"sinusoid"``, ``"square"``, ``"pulse"`` or
    ``"zero"``. The pulse acts on the first degree of freedom.
    """
    if forcing == "sinusoid":
        F = SinusoidBank(PAPER_FORCE_AMPLITUDES, PAPER_FORCE_FREQUENCIES,
                         derivative_mode=derivative_mode)
    elif forcing == "square":
        F = SquareWaveBank(PAPER_FORCE_AMPLITUDES, PAPER_FORCE_FREQUENCIES)
    elif forcing == "pulse":
        F = Pulse([1.0, 0.0, 0.0], mu, t_cut, derivative_mode=derivative_mode)
    elif forcing == "zero":
        F = ZeroForcing(3)
    else:
        raise ValueError(f"unknown forcing {forcing!r}")
    C = PAPER_C if damped else np.zeros((3, 3))
    return SecondOrderSystem(PAPER_M, C, PAPER_K, F, PAPER_Q0, PAPER_V0)


OSC_M = 1.0
OSC_XI = 0.02
OSC_OMEGA = 2.0 * np.pi
OSC_AMPLITUDE = 0.8
OSC_DRIVE = 10.0 * OSC_OMEGA


def oscillator_1dof(derivative_mode: str = "analytic", xi: float = OSC_XI) -> SecondOrderSystem:
    """``m q'' + 2 xi omega q' + m omega^2 q = 0.8 cos(10 omega t)``, ``q0 = v0 = 1``."""
    F = SinusoidBank([OSC_AMPLITUDE], [OSC_DRIVE], [np.pi / 2], derivative_mode=derivative_mode)
    return SecondOrderSystem([[OSC_M]], [[2 * xi * OSC_OMEGA]], [[OSC_M * OSC_OMEGA**2]], F,
                             [1.0], [1.0])


def oscillator_exact(t, m=OSC_M, c=2 * OSC_XI * OSC_OMEGA, k=OSC_M * OSC_OMEGA**2,
                     amplitude=OSC_AMPLITUDE, drive=OSC_DRIVE, q0=1.0, v0=1.0):
    """Closed-form ``(q, v)`` of ``m q'' + c q' + k q = amplitude cos(drive t)``.

    Underdamped case only.
    """
    t = np.asarray(t, dtype=float)
    # steady state X cos + Y sin
    a11, a12 = k - m * drive**2, c * drive
    det = a11**2 + a12**2
    X = amplitude * a11 / det
    Y = amplitude * a12 / det
    sigma = c / (2 * m)
    wd2 = k / m - sigma**2
    if wd2 <= 0:
        raise ValueError("oscillator_exact only handles underdamped systems")
    wd = np.sqrt(wd2)
    A = q0 - X
    B = (v0 - Y * drive + sigma * A) / wd
    e = np.exp(-sigma * t)
    cs, sn = np.cos(wd * t), np.sin(wd * t)
    q = e * (A * cs + B * sn) + X * np.cos(drive * t) + Y * np.sin(drive * t)
    v = (e * (-sigma * (A * cs + B * sn) + wd * (-A * sn + B * cs))
         - X * drive * np.sin(drive * t) + Y * drive * np.cos(drive * t))
    return q, v


def fe_chain(n: int = 300, length: float = 1.0, stiffness: float = 1.0, density: float = 1.0,
             tip_load: float = 1.0, damping: tuple[float, float] = (0.0, 0.0)) -> SecondOrderSystem:
    """Clamped-free rod of ``n`` linear elements, released from a static tip deflection.

    Consistent element mass ``rho A le / 6 [[2, 1], [1, 2]]`` and stiffness
    ``EA / le [[1, -1], [-1, 1]]`` give tridiagonal ``M`` and ``K``.
    ``damping = (a, b)`` adds Rayleigh damping ``a M + b K``. No external
    load acts after release.
    """
    if n < 1:
        raise ValueError("need at least one element")
    le = length / n
    ke = stiffness / le
    me = density * le / 6.0
    main_k = np.full(n, 2 * ke)
    main_k[-1] = ke
    main_m = np.full(n, 4 * me)
    main_m[-1] = 2 * me
    off_k = np.full(n - 1, -ke)
    off_m = np.full(n - 1, me)
    K = sps.diags([off_k, main_k, off_k], [-1, 0, 1], format="csr")
    M = sps.diags([off_m, main_m, off_m], [-1, 0, 1], format="csr")
    C = damping[0] * M + damping[1] * K
    load = np.zeros(n)
    load[-1] = tip_load
    q0 = spla.spsolve(sps.csc_matrix(K), load)
    return SecondOrderSystem(M, C, K, ZeroForcing(n), q0, np.zeros(n), sparse=True)


BUILTIN_SYSTEMS = {
    "paper-3dof": paper_3dof,
    "oscillator-1dof": oscillator_1dof,
    "fe-beam-synthetic": fe_chain,
}


def builtin_system(name: str, **options) -> SecondOrderSystem:
    try:
        factory = BUILTIN_SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown built-in system {name!r}; choose from {sorted(BUILTIN_SYSTEMS)}") from None
    return factory(**options)
