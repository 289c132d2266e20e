from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from newmark_bea.bea import distorted_system
from newmark_bea.compensation import (
    CompensationError,
    compensated_forcing_eval,
    damping_compensation,
    fourth_order_compensation,
    requires_fourth_order_scheme,
)
from newmark_bea.harness import observed_order
from newmark_bea.integrators import StepperConfig
from newmark_bea.model import AnalyticForcing, ConstantForcing, SecondOrderSystem, SinusoidBank
from newmark_bea.systems import fe_chain, oscillator_1dof, paper_3dof

HALF, SIXTH = Fraction(1, 2), Fraction(1, 6)


def _random_system(rng, n=3, damped=True):
    C = 0.1 * random_spd(rng, n) if damped else np.zeros((n, n))
    F = SinusoidBank(rng.normal(size=n), rng.uniform(0.2, 2.0, n), rng.normal(size=n))
    return SecondOrderSystem(random_spd(rng, n, 2.0), C, random_spd(rng, n), F,
                             q0=rng.normal(size=n), v0=rng.normal(size=n))


# --------------------------------------------------------- damping variant
def test_damping_compensation_vanishes_for_half_gamma_undamped(rng):
    s = _random_system(rng, damped=False)
    comp = damping_compensation(s, StepperConfig(0.3, gamma=HALF, beta=0.25))
    np.testing.assert_array_equal(comp.C, 0.0)
    assert comp.K is s.K and comp.forcing is s.forcing


def test_damping_compensation_undamped_gamma_055(rng):
    s = _random_system(rng, damped=False)
    dt = 0.7
    comp = damping_compensation(s, StepperConfig(dt, gamma=0.55, beta=0.28))
    np.testing.assert_allclose(comp.C, -0.05 * dt * s.K, rtol=1e-12)


def test_damping_compensation_cancels_first_two_orders(rng):
    # the distorted damping of the compensated system equals C up to O(dt^3)
    s = _random_system(rng)
    pts = []
    for dt in [0.1 / 2**k for k in range(4)]:
        cfg = StepperConfig(dt, gamma=0.6, beta=0.3)
        d = distorted_system(damping_compensation(s, cfg).system, cfg)
        pts.append((dt, np.linalg.norm(d.C - s.C)))
    assert observed_order(pts) == pytest.approx(3.0, abs=0.2)


def test_damping_compensation_refused_for_other_configs(rng):
    s = _random_system(rng)
    comp = damping_compensation(s, StepperConfig(0.1, gamma=0.55, beta=0.28))
    comp.check(StepperConfig(0.1, gamma=0.55, beta=0.28))
    with pytest.raises(CompensationError):
        comp.check(StepperConfig(0.05, gamma=0.55, beta=0.28))
    with pytest.raises(CompensationError):
        comp.check(StepperConfig(0.1, gamma=0.6, beta=0.28))


# ----------------------------------------------------- fourth-order variant
def test_fourth_order_undamped_structure(rng):
    s = _random_system(rng, damped=False)
    dt = 0.2
    comp = fourth_order_compensation(s, dt)
    Mi = np.linalg.inv(s.M)
    w = dt**2 / 12
    np.testing.assert_allclose(comp.C, 0.0, atol=1e-15)
    np.testing.assert_allclose(comp.K, s.K + w * s.K @ Mi @ s.K, rtol=1e-12)
    t = 0.9
    F, d2F = s.forcing(t), s.forcing.exact_derivative(t, 2)
    # the correction removes the scheme's own forcing distortion, hence the minus sign
    np.testing.assert_allclose(comp.forcing(t), F - w * (d2F - s.K @ Mi @ F), rtol=1e-12)


def test_fourth_order_scalar_stiffness():
    s = SecondOrderSystem([[1.0]], None, [[1.0]])
    comp = fourth_order_compensation(s, 0.1)
    assert comp.K[0, 0] == pytest.approx(1 + 0.01 / 12, abs=1e-15)
    assert comp.K[0, 0] == pytest.approx(1.000833, abs=5e-7)


def test_fourth_order_constant_load(rng):
    n = 3
    M, K = random_spd(rng, n, 2.0), random_spd(rng, n)
    load = rng.normal(size=n)
    dt = 0.3
    comp = fourth_order_compensation(SecondOrderSystem(M, None, K, ConstantForcing(load)), dt)
    expect = load + dt**2 / 12 * K @ np.linalg.solve(M, load)
    np.testing.assert_allclose(compensated_forcing_eval(comp, 4.0), expect, rtol=1e-12)


def test_fourth_order_square_wave_between_switches():
    s = paper_3dof(forcing="square")
    dt, t = 0.01, 1.0  # no sign change of any component in [0.99, 1.01]
    comp = fourth_order_compensation(s, dt)
    Mi = np.linalg.inv(s.M)
    F = s.forcing(t)
    expect = F - dt**2 / 12 * (s.C @ Mi @ s.C @ Mi @ F - s.K @ Mi @ F)
    np.testing.assert_allclose(compensated_forcing_eval(comp, t), expect, rtol=1e-12)


def test_fourth_order_damped_matrices_against_dense_oracle(rng):
    s = _random_system(rng)
    dt = 0.25
    comp = fourth_order_compensation(s, dt)
    C, K, Mi = s.C, s.K, np.linalg.inv(s.M)
    w = dt**2 / 12
    np.testing.assert_allclose(comp.C, C + w * (C @ Mi @ K + K @ Mi @ C - C @ Mi @ C @ Mi @ C),
                               rtol=1e-11)
    np.testing.assert_allclose(comp.K, K + w * (K @ Mi @ K - C @ Mi @ C @ Mi @ K), rtol=1e-11)


def test_fourth_order_cancels_distortion_through_dt4(rng):
    s = _random_system(rng)
    pts_c, pts_k, pts_f = [], [], []
    for dt in [0.1 / 2**k for k in range(4)]:
        cfg = StepperConfig(dt, gamma=HALF, beta=SIXTH)
        d = distorted_system(fourth_order_compensation(s, dt).system, cfg)
        pts_c.append((dt, np.linalg.norm(d.C - s.C)))
        pts_k.append((dt, np.linalg.norm(d.K - s.K)))
        pts_f.append((dt, np.linalg.norm(d.forcing(1.7) - s.forcing(1.7))))
    for pts in (pts_c, pts_k):
        assert observed_order(pts) == pytest.approx(4.0, abs=0.2)
    # the forcing picks up dt^4 terms through the central differences of F^
    assert observed_order(pts_f) >= 3.7


def test_compensation_is_consistent_as_dt_vanishes(rng):
    s = _random_system(rng)
    for dt in (1e-3, 1e-5):
        c4 = fourth_order_compensation(s, dt)
        cd = damping_compensation(s, StepperConfig(dt, gamma=0.55, beta=0.28))
        assert np.linalg.norm(c4.C - s.C) < 10 * dt**2
        assert np.linalg.norm(c4.K - s.K) < 10 * dt**2
        assert np.linalg.norm(cd.C - s.C) < 10 * dt
        np.testing.assert_allclose(c4.forcing(0.5), s.forcing(0.5), atol=10 * dt**2)


def test_compensated_stiffness_is_not_symmetric(rng):
    # C M^-1 C M^-1 K has no reason to be symmetric
    comp = fourth_order_compensation(_random_system(rng), 0.3)
    assert not np.allclose(comp.K, comp.K.T, rtol=1e-12, atol=0)
    cd = damping_compensation(_random_system(rng), StepperConfig(0.3, gamma=0.6, beta=0.3))
    assert not np.allclose(cd.C, cd.C.T, rtol=1e-12, atol=0)


@pytest.mark.parametrize("gamma,beta", [
    (0.5, 0.1666667),
    (Fraction(1, 2), Fraction(1, 4)),
    (Fraction(11, 20), Fraction(1, 6)),
])
def test_fourth_order_refuses_inexact_parameters(gamma, beta):
    with pytest.raises(CompensationError):
        requires_fourth_order_scheme(StepperConfig(0.1, gamma=gamma, beta=beta))


def test_fourth_order_accepts_exact_parameters():
    requires_fourth_order_scheme(StepperConfig(0.1, gamma=HALF, beta=SIXTH))
    requires_fourth_order_scheme(StepperConfig(0.1, gamma=0.5, beta=1 / 6))
    comp = fourth_order_compensation(paper_3dof(), 0.1)
    with pytest.raises(CompensationError):
        comp.check(StepperConfig(0.1, method="generalized_alpha", rho_inf=1.0))
    with pytest.raises(CompensationError):
        comp.check(StepperConfig(0.2, gamma=HALF, beta=SIXTH))


def test_numeric_forcing_uses_three_evaluations():
    calls = []

    def value(t):
        calls.append(t)
        return [np.cos(3 * t)]

    s = SecondOrderSystem([[1.0]], [[0.1]], [[4.0]], AnalyticForcing(1, value))
    comp = fourth_order_compensation(s, 0.05)
    calls.clear()
    compensated_forcing_eval(comp, 1.0)
    assert len(calls) == 3


def test_numeric_and_analytic_forcing_converge_at_order_two():
    an, nu = oscillator_1dof("analytic"), oscillator_1dof("central-difference")
    pts = []
    for dt in [0.004 / 2**k for k in range(5)]:
        a = compensated_forcing_eval(fourth_order_compensation(an, dt), 0.23)
        b = compensated_forcing_eval(fourth_order_compensation(nu, dt), 0.23)
        pts.append((dt, abs(a[0] - b[0])))
    # the derivative error is O(dt^2) and enters multiplied by dt^2
    assert observed_order(pts) == pytest.approx(4.0, abs=0.2)
    # relative to the dt^2 correction term itself the error is second order
    rel = [(dt, e / dt**2) for dt, e in pts]
    assert observed_order(rel) == pytest.approx(2.0, abs=0.2)


def test_forcing_eval_with_other_dt_rebuilds():
    s = oscillator_1dof()
    comp = fourth_order_compensation(s, 0.01)
    np.testing.assert_allclose(compensated_forcing_eval(comp, 0.3, 0.02),
                               fourth_order_compensation(s, 0.02).forcing(0.3))
    with pytest.raises(ValueError):
        compensated_forcing_eval(comp, -1.0)


def test_sparse_input_gives_sparse_denser_output():
    s = fe_chain(40)
    comp = fourth_order_compensation(s, 1e-3)
    assert sps.issparse(comp.K) and comp.system.sparse
    assert comp.K.nnz > s.K.nnz
    dense = fourth_order_compensation(s.dense(), 1e-3)
    np.testing.assert_allclose(comp.K.toarray(), dense.K, rtol=1e-12, atol=1e-9)


def test_manifest_contents():
    comp = damping_compensation(paper_3dof(), StepperConfig(0.7, gamma=0.55, beta=0.28))
    m = comp.manifest()
    assert m["kind"] == "damping_compensation" and m["dt"] == 0.7
    assert m["gamma"] == "0.55" and m["n"] == 3 and m["base_digest"] == paper_3dof().digest()
    assert fourth_order_compensation(paper_3dof(), 0.7).manifest()["beta"] == "1/6"


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), dt=st.floats(1e-3, 0.5))
def test_damping_compensation_keeps_stiffness_and_load(seed, dt):
    rng = np.random.default_rng(seed)
    s = _random_system(rng, n=2)
    comp = damping_compensation(s, StepperConfig(dt, gamma=0.6, beta=0.3))
    np.testing.assert_array_equal(comp.system.K, s.K)
    np.testing.assert_array_equal(comp.system.forcing(1.0), s.forcing(1.0))
    np.testing.assert_array_equal(comp.system.q0, s.q0)
