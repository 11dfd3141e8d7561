import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mchcasimir import response as r
from mchcasimir.errors import NotTransverse, OffShell, OnResonance
from mchcasimir.params import ModelParams


@pytest.mark.parametrize("kind", ["E", "chi", "beta", "gamma", "xi"])
def test_on_resonance_at_omega0(p0, kind):
    with pytest.raises(OnResonance):
        r.polarizability(kind, p0.omega_0, p0)


@pytest.mark.parametrize("kind", ["M", "zeta", "beta", "gamma", "xi"])
def test_on_resonance_at_two_omega0(p0, kind):
    with pytest.raises(OnResonance):
        r.polarizability(kind, 2 * p0.omega_0, p0)


def test_eps_moves_pole_off_axis(p0):
    v = r.polarizability("E", p0.omega_0, p0, eps=1e-3)
    assert np.isfinite(v) and v.imag != 0


def test_static_limits(p0):
    assert r.polarizability("beta", 0.0, p0).real == pytest.approx(r.beta_static(p0), rel=1e-13)
    assert r.polarizability("E", 0.0, p0).real == pytest.approx(r.alpha_e_static(p0), rel=1e-13)


def test_chiral_length_is_small_length(p0):
    # a length far below the oscillator length
    ell = abs(r.chiral_length(p0))
    assert 0 < ell < np.sqrt(p0.hbar / (p0.mu * p0.omega_0))


def test_isotropic_kills_chiral_and_magnetic_terms(p0):
    iso = p0.with_omegas([p0.omega_0] * 3)
    w = 0.3 * p0.omega_0
    for kind in ("M", "zeta", "beta", "gamma", "xi"):
        assert r.polarizability(kind, w, iso) == 0


def test_odd_in_C(p0):
    w = 0.4 * p0.omega_0
    q = p0.replace(C=-p0.C)
    for kind in ("beta", "gamma", "xi"):
        assert r.polarizability(kind, w, q) == pytest.approx(-r.polarizability(kind, w, p0))


@given(st.floats(0.05, 0.9), st.floats(0, 2 * np.pi), st.floats(0.1, 3.0))
def test_free_wave_form_matches_general_form(p0, x, phi, amp):
    # dual route: eliminated-B relation against the constitutive law with B = k ^ E / omega
    w = x * p0.omega_0
    kh = np.array([np.sin(phi) * 0.6, np.cos(phi) * 0.6, 0.8])
    k = w / p0.c * kh / np.linalg.norm(kh)
    e1 = np.cross(k, [1.0, 0.0, 0.0])
    E = amp * (e1 / np.linalg.norm(e1)) * (1 + 0.5j)
    B = np.cross(k, E) / w
    p = p0.replace(B0=(1e-6, -2e-6, 3e-6))
    a = r.induced_dipole(E, None, k, w, p)
    b = r.induced_dipole(E, B, k, w, p)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


def test_free_wave_checks(p0):
    w = 0.5 * p0.omega_0
    with pytest.raises(OffShell):
        r.induced_dipole([1, 0, 0], None, [0, 0, 2 * w], w, p0)
    with pytest.raises(NotTransverse):
        r.induced_dipole([0, 0, 1], None, [0, 0, w], w, p0)


def test_alpha_nr_and_index_shift(p0):
    w = 0.5 * p0.omega_0
    k = np.array([0, 0, w])
    a = r.alpha_nr(k, w, p0)
    assert r.alpha_nr(-k, w, p0) == pytest.approx(-a)
    assert r.delta_n_mch(2.0, k, w, p0) == pytest.approx(2 * a / p0.eps0)
    rs = r.response_set(w, k, p0)
    assert rs.alpha_nr == pytest.approx(a)


def test_response_tensor_structure(p0):
    w = 0.5 * p0.omega_0
    k = np.array([0.0, 0.0, w])
    rs = r.response_set(w, k, p0)
    bz = p0.B0[2]
    assert rs.alpha_EE[2, 2] == pytest.approx(rs.alpha_E + rs.xi * bz * w)
    assert rs.alpha_EM[0, 1] == pytest.approx(rs.gamma * bz)


def test_unknown_kind(p0):
    with pytest.raises(ValueError):
        r.polarizability("nu", 0.1, p0)


def test_alpha_m_proportional_to_n_xyz():
    p = ModelParams(m_N=1836.0, omega_x=1e-4, omega_y=1.1e-4, omega_z=1.3e-4)
    from mchcasimir.params import anisotropy

    v = r.polarizability("M", 0.0, p).real
    q = p.with_omegas([1e-4, 1.2e-4, 1.3e-4])
    ratio = r.polarizability("M", 0.0, q).real / v
    an_p, an_q = anisotropy(p), anisotropy(q)
    # alpha_M(0) = e^2 hbar N_xyz / (9 mu*^2 omega_0)
    assert ratio == pytest.approx(an_q.N_xyz / an_p.N_xyz * p.omega_0 / q.omega_0, rel=1e-12)
