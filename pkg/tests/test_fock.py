import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mchcasimir import fock
from mchcasimir.errors import BasisMismatch, TruncationTooLarge


@given(st.integers(0, 6), st.data())
def test_index_state_round_trip(n_max, data):
    b = fock.build_basis(n_max)
    i = data.draw(st.integers(0, b.size - 1))
    assert b.index(b.state(i)) == i


def test_index_matches_kron_order():
    b = fock.build_basis(3)
    assert b.index((1, 2, 3)) == (1 * 4 + 2) * 4 + 3
    assert b.states()[b.index((2, 0, 1))] == (2, 0, 1)


def test_truncation_guard():
    with pytest.raises(TruncationTooLarge):
        fock.build_basis(fock.N_MAX_LIMIT + 1)
    with pytest.raises(TruncationTooLarge):
        fock.build_basis(-1)


def test_canonical_commutator_on_interior(p0):
    b = fock.build_basis(5)
    for k in range(3):
        x = fock.position_op(b, k, p0)
        p = fock.momentum_op(b, k, p0)
        comm = x.commutator(p).dense()
        inner = b.interior
        block = comm[np.ix_(inner, inner)]
        assert np.allclose(block, 1j * p0.hbar * np.eye(inner.sum()), atol=1e-12)


def test_ho_spectrum(p0):
    b = fock.build_basis(2)
    H = fock.ho_op(b, p0)
    assert H.element((0, 0, 0), (0, 0, 0)) == pytest.approx(p0.E0)
    assert H.element((1, 0, 2), (1, 0, 2)) == pytest.approx(p0.E0 + p0.omega_x + 2 * p0.omega_z)


def test_chiral_matrix_element(p0):
    b = fock.build_basis(2)
    V = fock.chiral_op(b, p0)
    scale = np.prod(np.sqrt(p0.hbar / (2 * p0.mu * p0.omega)))
    assert V.element((1, 1, 1), (0, 0, 0)) == pytest.approx(p0.C * scale)


def test_hamiltonian_hermitian(p0):
    b = fock.build_basis(3)
    H = fock.hamiltonian(b, p0.replace(Q0=(1e-3, 0, 0)), include=("HO", "V_C", "V_Z", "dV"))
    assert H.hermiticity_error() < 1e-14


def test_x_squared_exact_in_truncation(p0):
    b = fock.build_basis(2)
    ax = fock._axis_matrices(b.n_axis, p0.hbar, p0.mu, p0.omega_x)
    # <n|x^2|n> = (hbar / 2 mu w)(2n + 1) also at the top level
    top = ax["x2"].toarray()[b.n_max, b.n_max]
    assert top == pytest.approx(p0.hbar / (2 * p0.mu * p0.omega_x) * (2 * b.n_max + 1))


def test_sparse_above_dense_limit(p0):
    b = fock.build_basis(fock.DENSE_LIMIT + 1)
    import scipy.sparse as sp

    assert sp.issparse(fock.position_op(b, 0, p0).matrix)


def test_basis_mismatch(p0):
    a = fock.position_op(fock.build_basis(2), 0, p0)
    c = fock.position_op(fock.build_basis(3), 0, p0)
    with pytest.raises(BasisMismatch):
        a + c


def test_unknown_term_rejected(p0):
    with pytest.raises(ValueError):
        fock.hamiltonian(fock.build_basis(1), p0, include=("HO", "spin"))
