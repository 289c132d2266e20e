"""Linear second-order systems ``M q'' + C q' + K q = F(t)`` and their forcings.

The mass matrix is factorized once when a :class:`SecondOrderSystem` is
built. Every ``M^-1 x`` product in the package goes through that
factorization; sparse systems never form ``M^-1`` explicitly.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from scipy.interpolate import make_interp_spline

__all__ = [
    "Forcing",
    "ZeroForcing",
    "ConstantForcing",
    "SinusoidBank",
    "SquareWaveBank",
    "Pulse",
    "AnalyticForcing",
    "SampledForcing",
    "ForcingError",
    "SecondOrderSystem",
    "FirstOrderView",
    "evaluate_forcing",
    "forcing_derivative",
    "total_energy",
    "first_order_view",
]


class ForcingError(ValueError):
    """Raised for forcing queries that cannot be answered."""


# ---------------------------------------------------------------------------
# Forcings
# ---------------------------------------------------------------------------


class Forcing:
    """Base class for time-dependent loads ``F(t)``.

    Subclasses implement :meth:`value` and, when exact derivatives exist,
    :meth:`exact_derivative`. ``derivative_mode`` selects between the exact
    derivatives and the second-order central-difference stencils.
    """

    n: int
    derivative_mode: str = "analytic"
    has_analytic_derivatives = True

    def __call__(self, t: float) -> np.ndarray:
        return self.value(t)

    def value(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def exact_derivative(self, t: float, order: int) -> np.ndarray:
        raise ForcingError(f"{type(self).__name__} has no analytic derivatives")

    def derivative(self, t: float, order: int, dt: float | None = None) -> np.ndarray:
        """First or second time derivative in the configured mode."""
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.derivative_mode == "analytic":
            return self.exact_derivative(t, order)
        if dt is None or dt <= 0:
            raise ValueError("central-difference derivatives need a positive dt")
        return central_difference(self.value, t, order, dt)

    def derivatives(self, t: float, dt: float | None = None):
        """Return ``(F, F', F'')`` at ``t``.

        In central-difference mode away from the left boundary this costs
        exactly three evaluations of ``F``.
        """
        if self.derivative_mode == "analytic":
            return self.value(t), self.exact_derivative(t, 1), self.exact_derivative(t, 2)
        if dt is None or dt <= 0:
            raise ValueError("central-difference derivatives need a positive dt")
        if t - dt < 0:
            f0 = self.value(t)
            return (
                f0,
                central_difference(self.value, t, 1, dt, f0=f0),
                central_difference(self.value, t, 2, dt, f0=f0),
            )
        fm, f0, fp = self.value(t - dt), self.value(t), self.value(t + dt)
        return f0, (fp - fm) / (2 * dt), (fp - 2 * f0 + fm) / dt**2

    def with_mode(self, mode: str) -> "Forcing":
        """Copy of this forcing using derivative mode ``mode``."""
        if mode not in ("analytic", "central-difference"):
            raise ValueError(f"unknown derivative mode {mode!r}")
        if mode == "analytic" and not self.has_analytic_derivatives:
            raise ForcingError(f"{type(self).__name__} only supports central-difference derivatives")
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.derivative_mode = mode
        return new


def central_difference(f, t: float, order: int, dt: float, f0=None) -> np.ndarray:
    """Second-order finite-difference derivative of ``f`` at ``t``.

    Falls back to one-sided second-order stencils when ``t - dt < 0``.
    """
    if t - dt >= 0:
        fm, fp = f(t - dt), f(t + dt)
        if order == 1:
            return (fp - fm) / (2 * dt)
        f0 = f(t) if f0 is None else f0
        return (fp - 2 * f0 + fm) / dt**2
    f0 = f(t) if f0 is None else f0
    f1, f2 = f(t + dt), f(t + 2 * dt)
    if order == 1:
        return (-3 * f0 + 4 * f1 - f2) / (2 * dt)
    f3 = f(t + 3 * dt)
    return (2 * f0 - 5 * f1 + 4 * f2 - f3) / dt**2


def _check_time(t):
    if t < 0:
        raise ForcingError(f"forcing evaluated at negative time t={t}")


class ZeroForcing(Forcing):
    def __init__(self, n: int):
        self.n = int(n)

    def value(self, t):
        return np.zeros(self.n)

    def exact_derivative(self, t, order):
        return np.zeros(self.n)


class ConstantForcing(Forcing):
    def __init__(self, load):
        self.load = np.array(load, dtype=float).ravel()
        self.load.setflags(write=False)
        self.n = self.load.size

    def value(self, t):
        return self.load.copy()

    def exact_derivative(self, t, order):
        return np.zeros(self.n)


class SinusoidBank(Forcing):
    """``F_i(t) = a_i sin(w_i t + phi_i)``, one sinusoid per degree of freedom."""

    def __init__(self, amplitudes, frequencies, phases=None, derivative_mode="analytic"):
        self.amplitudes = np.array(amplitudes, dtype=float).ravel()
        self.frequencies = np.array(frequencies, dtype=float).ravel()
        if phases is None:
            phases = np.zeros_like(self.amplitudes)
        self.phases = np.array(phases, dtype=float).ravel()
        if not (self.amplitudes.shape == self.frequencies.shape == self.phases.shape):
            raise ValueError("amplitudes, frequencies and phases must have the same length")
        self.n = self.amplitudes.size
        self.derivative_mode = derivative_mode

    def value(self, t):
        return self.amplitudes * np.sin(self.frequencies * t + self.phases)

    def exact_derivative(self, t, order):
        arg = self.frequencies * t + self.phases
        if order == 1:
            return self.amplitudes * self.frequencies * np.cos(arg)
        return -self.amplitudes * self.frequencies**2 * np.sin(arg)


class SquareWaveBank(Forcing):
    """``F_i(t) = a_i sign(sin(w_i t))``. Only central-difference derivatives."""

    has_analytic_derivatives = False
    derivative_mode = "central-difference"

    def __init__(self, amplitudes, frequencies, derivative_mode="central-difference"):
        if derivative_mode != "central-difference":
            raise ForcingError("square-wave forcing requires central-difference derivatives")
        self.amplitudes = np.array(amplitudes, dtype=float).ravel()
        self.frequencies = np.array(frequencies, dtype=float).ravel()
        if self.amplitudes.shape != self.frequencies.shape:
            raise ValueError("amplitudes and frequencies must have the same length")
        self.n = self.amplitudes.size

    def value(self, t):
        return self.amplitudes * np.sign(np.sin(self.frequencies * t))


class Pulse(Forcing):
    """Finite pulse ``F(t) = d exp(t / (mu t*)) (1 - t/t*)^3`` on ``[0, t*]``, zero after."""

    def __init__(self, direction, mu: float, t_cut: float, derivative_mode="analytic"):
        self.direction = np.array(direction, dtype=float).ravel()
        self.mu = float(mu)
        self.t_cut = float(t_cut)
        if self.mu <= 0 or self.t_cut <= 0:
            raise ValueError("pulse needs mu > 0 and t_cut > 0")
        self.n = self.direction.size
        self.derivative_mode = derivative_mode

    def _shape(self, t):
        # (g, g', g'') of the scalar envelope; the left limit is used at t = t*
        if t > self.t_cut:
            return 0.0, 0.0, 0.0
        r = 1.0 / (self.mu * self.t_cut)
        s = 1.0 - t / self.t_cut
        e = np.exp(r * t)
        tc = self.t_cut
        g = e * s**3
        g1 = e * (r * s**3 - 3 * s**2 / tc)
        g2 = e * (r**2 * s**3 - 6 * r * s**2 / tc + 6 * s / tc**2)
        return g, g1, g2

    def value(self, t):
        return self._shape(t)[0] * self.direction

    def exact_derivative(self, t, order):
        return self._shape(t)[order] * self.direction


class AnalyticForcing(Forcing):
    """Forcing given by user closures for ``F``, ``F'`` and ``F''``."""

    def __init__(self, n, value, first=None, second=None, derivative_mode=None):
        self.n = int(n)
        self._value = value
        self._first = first
        self._second = second
        self.has_analytic_derivatives = first is not None and second is not None
        if derivative_mode is None:
            derivative_mode = "analytic" if self.has_analytic_derivatives else "central-difference"
        if derivative_mode == "analytic" and not self.has_analytic_derivatives:
            raise ForcingError("analytic derivative mode needs both derivative closures")
        self.derivative_mode = derivative_mode

    def value(self, t):
        return np.asarray(self._value(t), dtype=float).reshape(self.n)

    def exact_derivative(self, t, order):
        fn = self._first if order == 1 else self._second
        if fn is None:
            raise ForcingError("no analytic derivative closure supplied")
        return np.asarray(fn(t), dtype=float).reshape(self.n)


class SampledForcing(Forcing):
    """Forcing interpolated from samples on a time grid.

    ``values`` has shape ``(len(times), n)``. ``order`` is the spline degree
    (1 for piecewise linear, 3 for cubic).
    """

    has_analytic_derivatives = False
    derivative_mode = "central-difference"

    def __init__(self, times, values, order: int = 3, derivative_mode="central-difference"):
        if derivative_mode != "central-difference":
            raise ForcingError("sampled forcing requires central-difference derivatives")
        self.times = np.array(times, dtype=float).ravel()
        vals = np.array(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.times.size:
            raise ValueError("values must have one row per sample time")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        self.values = vals
        self.n = vals.shape[1]
        self.order = int(order)
        self._spline = make_interp_spline(self.times, vals, k=self.order)

    def value(self, t):
        lo, hi = self.times[0], self.times[-1]
        tol = 1e-12 * max(1.0, abs(hi))
        if t < lo - tol or t > hi + tol:
            raise ForcingError(f"t={t} outside sampled range [{lo}, {hi}]")
        return np.asarray(self._spline(min(max(t, lo), hi)), dtype=float)


def evaluate_forcing(f: Forcing, t: float) -> np.ndarray:
    """``F(t)`` for ``t >= 0``."""
    _check_time(t)
    return f.value(t)


def forcing_derivative(f: Forcing, t: float, order: int, dt: float | None = None) -> np.ndarray:
    """``F'(t)`` or ``F''(t)`` in the forcing's derivative mode."""
    _check_time(t)
    return f.derivative(t, order, dt)


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


class _MassSolver:
    """Factorization of ``M``; ``solve`` accepts vectors or dense 2-D blocks."""

    def __init__(self, M):
        if sps.issparse(M):
            self.sparse = True
            try:
                self._lu = spla.splu(sps.csc_matrix(M))
            except RuntimeError as exc:
                raise np.linalg.LinAlgError(f"mass matrix is singular: {exc}") from exc
            diag = self._lu.U.diagonal()
            if not np.all(np.isfinite(diag)) or np.any(diag == 0):
                raise np.linalg.LinAlgError("mass matrix is singular")
        else:
            self.sparse = False
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", la.LinAlgWarning)
                self._lu = la.lu_factor(M, check_finite=True)
            diag = np.diag(self._lu[0])
            if np.any(diag == 0) or np.min(np.abs(diag)) < 1e-14 * np.max(np.abs(diag)):
                raise np.linalg.LinAlgError("mass matrix is singular")

    def solve(self, x):
        x = np.asarray(x, dtype=float)
        if self.sparse:
            return self._lu.solve(x)
        return la.lu_solve(self._lu, x, check_finite=False)

    def solve_transposed(self, x):
        x = np.asarray(x, dtype=float)
        if self.sparse:
            return self._lu.solve(x, trans="T")
        return la.lu_solve(self._lu, x, trans=1, check_finite=False)


def _as_matrix(A, n, sparse):
    if sps.issparse(A):
        A = sps.csr_matrix(A, dtype=float)
        return A if sparse else A.toarray()
    A = np.atleast_2d(np.array(A, dtype=float))
    return sps.csr_matrix(A) if sparse else A


class SecondOrderSystem:
    """``M q'' + C q' + K q = F(t)`` with initial conditions ``q0``, ``v0``.

    Parameters
    ----------
    M, C, K : array_like or scipy.sparse matrix
        Square ``n x n`` matrices. ``C`` may be ``None`` (undamped).
    forcing : Forcing, optional
        Defaults to :class:`ZeroForcing`.
    q0, v0 : array_like, optional
        Initial position and velocity, zero by default.
    sparse : bool, optional
        Storage flag. Defaults to sparse if ``M`` is given as a sparse matrix.

    Raises
    ------
    ValueError
        On inconsistent dimensions.
    numpy.linalg.LinAlgError
        If ``M`` cannot be factorized.
    """

    def __init__(self, M, C=None, K=None, forcing=None, q0=None, v0=None, sparse=None):
        if sparse is None:
            sparse = sps.issparse(M)
        self.sparse = bool(sparse)
        n = M.shape[0] if sps.issparse(M) else np.atleast_2d(np.asarray(M)).shape[0]
        self.n = int(n)
        if C is None:
            C = sps.csr_matrix((n, n)) if self.sparse else np.zeros((n, n))
        if K is None:
            K = sps.csr_matrix((n, n)) if self.sparse else np.zeros((n, n))
        self.M = _as_matrix(M, n, self.sparse)
        self.C = _as_matrix(C, n, self.sparse)
        self.K = _as_matrix(K, n, self.sparse)
        for name, A in (("M", self.M), ("C", self.C), ("K", self.K)):
            if A.shape != (n, n):
                raise ValueError(f"{name} has shape {A.shape}, expected {(n, n)}")
        self.forcing = ZeroForcing(n) if forcing is None else forcing
        if self.forcing.n != n:
            raise ValueError(f"forcing has dimension {self.forcing.n}, expected {n}")
        self.q0 = np.zeros(n) if q0 is None else np.array(q0, dtype=float).ravel()
        self.v0 = np.zeros(n) if v0 is None else np.array(v0, dtype=float).ravel()
        if self.q0.shape != (n,) or self.v0.shape != (n,):
            raise ValueError("q0 and v0 must have length n")
        for arr in (self.q0, self.v0) + (() if self.sparse else (self.M, self.C, self.K)):
            arr.setflags(write=False)
        self._mass = _MassSolver(self.M)
        self._digest = None

    def solve_mass(self, x) -> np.ndarray:
        """``M^-1 x`` through the stored factorization."""
        return self._mass.solve(x)

    def solve_mass_transposed(self, x) -> np.ndarray:
        """``M^-T x`` through the stored factorization."""
        return self._mass.solve_transposed(x)

    def minv_times(self, A) -> np.ndarray:
        """Dense ``M^-1 A`` for a (sparse or dense) matrix ``A``."""
        A = A.toarray() if sps.issparse(A) else np.asarray(A, dtype=float)
        return self._mass.solve(A)

    def residual(self, t, q, v, a) -> np.ndarray:
        """``M a + C v + K q - F(t)``."""
        return self.M @ a + self.C @ v + self.K @ q - self.forcing(t)

    def acceleration(self, t, q, v) -> np.ndarray:
        """``M^-1 (F(t) - C v - K q)``."""
        return self.solve_mass(self.forcing(t) - self.C @ v - self.K @ q)

    def replace(self, **changes) -> "SecondOrderSystem":
        """New system with some of ``M, C, K, forcing, q0, v0, sparse`` replaced."""
        kw = dict(M=self.M, C=self.C, K=self.K, forcing=self.forcing,
                  q0=self.q0, v0=self.v0, sparse=self.sparse)
        kw.update(changes)
        return SecondOrderSystem(**kw)

    def digest(self) -> str:
        """Short content hash of the matrices and initial conditions."""
        if self._digest is None:
            h = hashlib.sha1()
            for A in (self.M, self.C, self.K):
                dense = A.toarray() if sps.issparse(A) else A
                h.update(np.ascontiguousarray(dense).tobytes())
            h.update(self.q0.tobytes())
            h.update(self.v0.tobytes())
            h.update(type(self.forcing).__name__.encode())
            self._digest = h.hexdigest()[:12]
        return self._digest

    def dense(self) -> "SecondOrderSystem":
        return self if not self.sparse else self.replace(
            M=self.M.toarray(), C=self.C.toarray(), K=self.K.toarray(), sparse=False)

    def __repr__(self):
        kind = "sparse" if self.sparse else "dense"
        return f"SecondOrderSystem(n={self.n}, {kind}, forcing={type(self.forcing).__name__})"


def total_energy(sys: SecondOrderSystem, q, v) -> float:
    """Mechanical energy ``0.5 v^T M v + 0.5 q^T K q``."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if q.shape != (sys.n,) or v.shape != (sys.n,):
        raise ValueError(f"state dimension mismatch: expected ({sys.n},)")
    return 0.5 * float(v @ (sys.M @ v)) + 0.5 * float(q @ (sys.K @ q))


@dataclass(frozen=True)
class FirstOrderView:
    """First-order form ``y' = f(y, t)`` of a :class:`SecondOrderSystem`.

    The state is ``y = (q, v)``, or ``y = (tau, q, v)`` when ``autonomous``
    is set, in which case ``tau' = 1`` and the forcing is evaluated at ``tau``.
    """

    system: SecondOrderSystem
    autonomous: bool = False

    def __post_init__(self):
        s = self.system
        if not s.sparse:
            # small dense systems: precompute M^-1 K and M^-1 C once
            object.__setattr__(self, "_H", s.minv_times(s.K))
            object.__setattr__(self, "_G", s.minv_times(s.C))

    @property
    def dimension(self) -> int:
        return 2 * self.system.n + (1 if self.autonomous else 0)

    def initial_state(self) -> np.ndarray:
        y = np.concatenate([self.system.q0, self.system.v0])
        return np.concatenate([[0.0], y]) if self.autonomous else y

    def split(self, y):
        n = self.system.n
        off = 1 if self.autonomous else 0
        return y[off:off + n], y[off + n:off + 2 * n]

    def __call__(self, y, t=None) -> np.ndarray:
        s = self.system
        n = s.n
        if self.autonomous:
            tau = y[0]
            q, v = y[1:1 + n], y[1 + n:]
        else:
            tau = t
            q, v = y[:n], y[n:]
        if s.sparse:
            acc = s.solve_mass(s.forcing(tau) - s.C @ v - s.K @ q)
        else:
            acc = s.solve_mass(s.forcing(tau)) - self._H @ q - self._G @ v
        if self.autonomous:
            return np.concatenate([[1.0], v, acc])
        return np.concatenate([v, acc])


def first_order_view(sys: SecondOrderSystem, autonomous: bool = False) -> FirstOrderView:
    return FirstOrderView(sys, autonomous)
