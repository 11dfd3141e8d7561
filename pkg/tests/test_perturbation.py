import warnings

import numpy as np
import pytest

from mchcasimir import fock, perturbation as pt
from mchcasimir.errors import BasisMismatch, DegenerateGroundState, PerturbationTooLarge
from mchcasimir.params import ModelParams, default_params


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_analytic_blocks_match_diagonalisation(p0, axis):
    # independent route: finite differences of the exact ground state
    basis = fock.build_basis(6)
    num = pt.numeric_coefficient_blocks(p0, basis, axis, step=1e-3)
    for block, coeffs in pt.analytic_terms(p0, axis).items():
        for st, ref in coeffs.items():
            assert num[block][basis.index(st)] == pytest.approx(ref, rel=2e-4)


def test_blocks_outside_formula_are_negligible(p0):
    basis = fock.build_basis(6)
    num = pt.numeric_coefficient_blocks(p0, basis, 2, step=1e-3)
    listed = {basis.index(s) for s in pt.analytic_terms(p0, 2)["CB"]}
    rest = np.delete(num["CB"], sorted(listed))
    assert np.abs(rest).max() < 1e-3 * np.abs(num["CB"]).max()


def test_intermediate_normalisation(p0):
    st = pt.ground_state_analytic(p0)
    assert st.coefficient((0, 0, 0)) == 1
    assert st.normalization == "intermediate"
    assert st.normalized().norm == pytest.approx(1.0)


def test_analytic_state_at_first_order_against_numeric(p0):
    basis = fock.build_basis(6)
    H = fock.hamiltonian(basis, p0)
    num = pt.ground_state_numeric(H, basis, p0.hbar * p0.omega_0).intermediate()
    ana = pt.ground_state_analytic(p0, basis)
    diff = np.abs(num.amplitudes - ana.amplitudes).max()
    # residual is second order in the small strengths (1e-3)
    assert diff < 1e-5


def test_size_guards():
    p = default_params(curlyC=0.2)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        pt.ground_state_analytic(p)
    assert any("exceeds" in str(x.message) for x in w)
    with pytest.raises(PerturbationTooLarge):
        pt.ground_state_analytic(default_params(curlyC=0.5))


def test_degenerate_ground_state_detected():
    p = ModelParams(m_N=1836.0, omega_x=1e-4, omega_y=1e-4, omega_z=1e-4)
    basis = fock.build_basis(2)
    H = fock.hamiltonian(basis, p, include=("HO",))
    # a shifted copy with the ground level doubled
    m = H.dense().copy()
    m[1, 1] = m[0, 0]
    with pytest.raises(DegenerateGroundState):
        pt.ground_state_numeric(fock.OperatorMatrix(m, basis, True, True), basis)


def test_expectation_basis_mismatch(p0):
    st = pt.ground_state_analytic(p0, fock.build_basis(2))
    with pytest.raises(BasisMismatch):
        pt.expectation(st, fock.position_op(fock.build_basis(3), 0, p0))


def test_position_vanishes(p0):
    p = p0.replace(B0=(0.2e-6, -0.4e-6, 0.9e-6))
    assert np.all(pt.position_expectation_to_order(p) == 0.0)
    basis = fock.build_basis(6)
    num = pt.ground_state_numeric(fock.hamiltonian(basis, p), basis, p.hbar * p.omega_0)
    assert np.abs(pt.position_expectation(num, p)).max() < 1e-10 * np.sqrt(1 / (p.mu * p.omega_0))


def test_sparse_eigensolver_matches_dense(p0):
    basis = fock.build_basis(fock.DENSE_LIMIT + 1)
    H = fock.hamiltonian(basis, p0)
    st = pt.ground_state_numeric(H, basis, p0.hbar * p0.omega_0)
    small = fock.build_basis(6)
    ref = pt.ground_state_numeric(fock.hamiltonian(small, p0), small, p0.hbar * p0.omega_0)
    assert st.energy == pytest.approx(ref.energy, rel=1e-12)
