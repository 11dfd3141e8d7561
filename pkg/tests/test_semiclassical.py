import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mchcasimir import semiclassical as s
from mchcasimir.errors import QuadratureNotConverged
from mchcasimir.params import default_params

# finite part of the frequency integral in units of integral_unit, obtained in
# closed form by partial fractions of the rational integrand
FINITE_PART = 1699 / 810 - 3682 / 1215 * math.log(2)


def test_finite_part_closed_form(p0):
    assert s.sc_integral_finite_part(p0) == pytest.approx(FINITE_PART, rel=1e-9)


@pytest.mark.parametrize("ladder", [s.QuadratureSpec().eps_ladder, s.ALT_LADDER])
def test_eps_extrapolation_matches_finite_part(p0, ladder):
    res = s.sc_integral_extrapolated(p0, s.QuadratureSpec(eps_ladder=ladder))
    assert res.value == pytest.approx(s.sc_integral_finite_part(p0), rel=1e-5)


def test_two_ladders_agree(p0):
    a = s.sc_momentum_numeric(p0)
    b = s.sc_momentum_numeric(p0, s.QuadratureSpec(eps_ladder=s.ALT_LADDER))
    assert np.allclose(a, b, rtol=1e-5)


def test_real_part_even_in_eps(p0):
    # the advanced shift is the complex conjugate of the retarded one
    w0 = p0.omega_0
    w = 0.8 * w0
    a = s._integrand(w, p0, w0 * w0 * (1 - 0.1j))
    b = s._integrand(w, p0, w0 * w0 * (1 + 0.1j))
    assert a == pytest.approx(np.conj(b))


def test_unconverged_ladder_raises(p0):
    with pytest.raises(QuadratureNotConverged):
        s.sc_integral_extrapolated(p0, s.QuadratureSpec(eps_ladder=(0.9, 0.6), rel_tol=1e-12))


def test_ladder_validation():
    with pytest.raises(ValueError):
        s.QuadratureSpec(eps_ladder=(0.1, 0.2))
    with pytest.raises(ValueError):
        s.QuadratureSpec(eps_ladder=(0.1,))


def test_neville_exact_on_polynomial():
    xs = [0.4, 0.2, 0.1, 0.05]
    ys = [3 - 2 * x + 5 * x * x for x in xs]
    assert s.neville(xs, ys)[-1] == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("x", [0.3, 0.7, 1.4, 3.0])
def test_q_space_reduction_converges(p0, x):
    w = x * p0.omega_0
    d = []
    for eps in (1e-2, 5e-3):
        fin, on = s.green_reduction_check(w, eps, p0)
        d.append(fin / on - 1)
        assert abs(fin / on - 1) <= eps
    # the finite-width correction is quadratic in eps
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("x", [0.3, 0.7, 1.4, 3.0])
def test_mode_sum_matches_integrand(p0, x):
    w = x * p0.omega_0
    ms = s.mode_sum_integrand(w, p0)
    ref = s.momentum_prefactor(p0) * s.sc_integrand(w, p0) * p0.B0_vec
    assert np.allclose(ms, ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())


def test_zero_without_chirality_or_field(p0):
    assert np.all(s.sc_momentum_numeric(p0.replace(C=0.0)) == 0)
    assert np.all(s.sc_momentum_closed(p0.replace(B0=(0.0, 0.0, 0.0))) == 0)


@given(st.floats(0.1, 10.0))
def test_closed_form_linear_in_field(p0, f):
    q = p0.replace(B0=tuple(f * p0.B0_vec))
    assert np.allclose(s.sc_momentum_closed(q), f * s.sc_momentum_closed(p0), rtol=1e-13)


def test_numeric_along_field(p0):
    q = p0.replace(B0=(1e-6, 2e-6, -1e-6))
    v = s.sc_momentum_numeric(q)
    assert np.linalg.norm(np.cross(v, q.B0_vec)) < 1e-12 * np.linalg.norm(v) * q.B0_norm


def test_sign_convention_against_closed_form(p0):
    # finite part and printed closed form share sign; the magnitudes differ (see acceptance)
    assert np.sign(s.sc_momentum_finite_part(p0)[2]) == np.sign(s.sc_momentum_closed(p0)[2])


def test_integrand_pole_guard(p0):
    from mchcasimir.errors import OnResonance

    with pytest.raises(OnResonance):
        s.sc_integrand(p0.omega_0, p0)
    assert s.sc_integrand(0.0, p0) == 0.0


def test_finite_part_independent_of_anisotropy_at_leading_order():
    a = s.sc_integral_finite_part(default_params(eta=1e-2))
    b = s.sc_integral_finite_part(default_params(eta=2e-2))
    assert a == pytest.approx(b, rel=1e-12)
