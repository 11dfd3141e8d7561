import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mchcasimir import energy
from mchcasimir.params import default_params

vec = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).map(np.array)


@given(vec, vec, st.floats(0.1, 10.0), st.floats(1.0, 1e4))
def test_work_equals_kinetic_change_for_linear_momentum(kappa, q, B0, M):
    if np.linalg.norm(kappa) < 1e-3:
        kappa = kappa + np.array([0.0, 0.0, 1.0])
    W = energy.magnetization_work_fn(lambda b: b * kappa, B0, q, M, n_steps=10_000)
    D = energy.delta_e_kin_fn(B0 * kappa, q, M)
    closed = (B0 * kappa) @ (B0 * kappa) / (2 * M) - q @ (B0 * kappa) / M
    assert D == pytest.approx(closed, rel=1e-12, abs=1e-15 * abs(closed) + 1e-300)
    assert W == pytest.approx(D, rel=1e-7, abs=1e-12 * (abs(D) + np.linalg.norm(kappa) ** 2 * B0**2 / M))


def test_linear_path_integrand_is_exact_with_few_steps():
    # for P = kappa B the integrand is linear in B, so the trapezoid rule is exact
    kappa = np.array([0.1, 0.0, 1.0])
    q = np.array([0.0, 0.0, 2.0])
    W = energy.magnetization_work_fn(lambda b: b * kappa, 1.5, q, 2.0, n_steps=2)
    assert W == pytest.approx(energy.delta_e_kin_fn(1.5 * kappa, q, 2.0), rel=1e-14)


def test_lamb_energies_trivial_cases(p0):
    B = p0.B0_norm
    assert energy.lamb_parallel(B, np.zeros(3), p0) == 0
    assert energy.lamb_perp(B, np.zeros(3), p0) == 0
    q_perp = np.array([1e-3, -2e-3, 0.0])
    assert energy.lamb_parallel(B, q_perp, p0) == 0
    assert energy.lamb_perp(B, q_perp, p0) == 0
    q = np.array([1e-3, 0.0, 2e-3])
    assert energy.lamb_parallel(2 * B, q, p0) == pytest.approx(2 * energy.lamb_parallel(B, q, p0))
    assert energy.lamb_perp(2 * B, q, p0) == pytest.approx(2 * energy.lamb_perp(B, q, p0))


def test_lamb_odd_in_momentum(p0):
    q = np.array([1e-3, 0.0, 2e-3])
    assert energy.lamb_parallel(p0.B0_norm, -q, p0) == -energy.lamb_parallel(p0.B0_norm, q, p0)


def test_fixed_orientation_option(p0):
    q = np.array([0.0, 0.0, 1e-3])
    v = energy.lamb_parallel(p0.B0_norm, q, p0, fixed=True)
    assert np.isfinite(v) and v != energy.lamb_parallel(p0.B0_norm, q, p0)


def test_zero_field_and_momentum(p0):
    assert energy.magnetization_work(0.0, np.zeros(3), p0) == 0
    assert energy.delta_e_kin(0.0, np.array([1e-3, 0, 0]), p0) == 0


def test_kinetic_change_signs(p0):
    P = energy.total_momentum(p0, p0.B0_norm)
    anti = -10 * P
    assert energy.delta_e_kin(p0.B0_norm, anti, p0) > 0
    assert energy.delta_e_kin(p0.B0_norm, 1e3 * P, p0) < 0


def test_default_path_balance(p0):
    p = p0.replace(Q0=(1e-16, -3e-16, 2e-16))
    W = energy.magnetization_work(p.B0_norm, p.Q0_vec, p)
    D = energy.delta_e_kin(p.B0_norm, p.Q0_vec, p)
    assert W == pytest.approx(D, rel=1e-7)


def test_diamagnetic_work(p0):
    B = p0.B0_norm
    assert energy.diamagnetic_work(0.0, p0) == 0
    assert energy.diamagnetic_work(2 * B, p0) == pytest.approx(4 * energy.diamagnetic_work(B, p0))
    iso = p0.with_omegas([p0.omega_0] * 3)
    assert energy.diamagnetic_work(B, iso) == 0


@given(st.floats(0.2, 5.0))
def test_magnetisation_forms_agree(B):
    kappa = np.array([0.2, -0.1, 0.5])
    q = np.array([1.0, 0.5, -0.3])
    P = lambda b: b * kappa
    short = energy.vacuum_magnetization(P, q, 3.0, B)
    strict = energy.vacuum_magnetization(P, q, 3.0, B, strict=True)
    assert strict == pytest.approx(short, rel=1e-8)


def test_work_is_minus_integral_of_magnetisation():
    from scipy import integrate

    kappa = np.array([0.2, -0.1, 0.5])
    q = np.array([1.0, 0.5, -0.3])
    P = lambda b: b * kappa
    M = 3.0
    integral = integrate.quad(lambda b: energy.vacuum_magnetization(P, q, M, b), 1e-12, 2.0)[0]
    assert -integral == pytest.approx(energy.delta_e_kin_fn(P(2.0), q, M), rel=1e-9)


def test_ledger(p0):
    p = p0.replace(Q0=(0.0, 0.0, 1e-16))
    led = energy.energy_ledger(p)
    assert led.balance_residual == pytest.approx(0.0, abs=1e-7 * abs(led.Delta_E_kin))
    assert led.E_diamag == energy.diamagnetic_work(p.B0_norm, p)


def test_n_steps_guard(p0):
    with pytest.raises(ValueError):
        energy.magnetization_work(1.0, np.zeros(3), p0, n_steps=1)
