"""Truncated three-dimensional oscillator basis and operator matrices.

Ladder convention: ``a = sqrt(mu w / 2 hbar) (x + i p / mu w)``, hence
``x = sqrt(hbar / 2 mu w) (a + a^dagger)`` and
``p = i sqrt(hbar mu w / 2) (a^dagger - a)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatch, TruncationTooLarge
from .params import ModelParams

N_MAX_LIMIT = 30
DENSE_LIMIT = 12
ALL_TERMS = frozenset({"HO", "V_C", "V_Z", "dV"})


class FockState(NamedTuple):
    n_x: int
    n_y: int
    n_z: int


@dataclass(frozen=True)
class FockBasis:
    """All states with ``0 <= n_x, n_y, n_z <= n_max``, n_z running fastest."""

    n_max: int

    @property
    def n_axis(self) -> int:
        return self.n_max + 1

    @property
    def size(self) -> int:
        return self.n_axis**3

    def __len__(self) -> int:
        return self.size

    def index(self, state: Iterable[int]) -> int:
        nx, ny, nz = state
        n = self.n_axis
        for v in (nx, ny, nz):
            if not 0 <= v <= self.n_max:
                raise IndexError(f"state {tuple(state)} outside truncation n_max={self.n_max}")
        return (nx * n + ny) * n + nz

    def state(self, i: int) -> FockState:
        n = self.n_axis
        if not 0 <= i < self.size:
            raise IndexError(i)
        return FockState(i // (n * n), (i // n) % n, i % n)

    def states(self) -> list[FockState]:
        return [FockState(*s) for s in itertools.product(range(self.n_axis), repeat=3)]

    def occupations(self) -> np.ndarray:
        """Integer array of shape (size, 3)."""
        return np.array(list(itertools.product(range(self.n_axis), repeat=3)), dtype=int)

    @property
    def interior(self) -> np.ndarray:
        """Mask of states with every occupation below ``n_max``."""
        return np.all(self.occupations() < self.n_max, axis=1)


def build_basis(n_max: int) -> FockBasis:
    if int(n_max) != n_max or n_max < 0:
        raise TruncationTooLarge(f"n_max must be a non-negative integer, got {n_max!r}")
    if n_max > N_MAX_LIMIT:
        raise TruncationTooLarge(f"n_max={n_max} exceeds the memory guard {N_MAX_LIMIT}")
    return FockBasis(int(n_max))


@dataclass(frozen=True)
class OperatorMatrix:
    """Operator over a ``FockBasis`` stored dense or as a sparse CSR matrix."""

    matrix: np.ndarray | sp.csr_matrix
    basis: FockBasis
    hermitian: bool = False
    real: bool = False
    name: str = ""

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)

    def element(self, bra: Iterable[int], ket: Iterable[int]) -> complex:
        i, j = self.basis.index(bra), self.basis.index(ket)
        return complex(self.matrix[i, j])

    def hermiticity_error(self) -> float:
        a = self.dense()
        scale = np.abs(a).max()
        return 0.0 if scale == 0 else float(np.abs(a - a.conj().T).max() / scale)

    def _check(self, other: "OperatorMatrix") -> None:
        if other.basis != self.basis:
            raise BasisMismatch(f"bases differ: {self.basis} vs {other.basis}")

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.matrix + other.matrix, self.basis,
                              self.hermitian and other.hermitian, self.real and other.real)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self + other * -1.0

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        real_scalar = np.isreal(scalar)
        return OperatorMatrix(self.matrix * scalar, self.basis,
                              self.hermitian and real_scalar, self.real and real_scalar, self.name)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.matrix @ other.matrix, self.basis,
                                  real=self.real and other.real)
        return self.matrix @ other

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return (self @ other) - (other @ self)


# single-axis building blocks, exact inside the truncation

def _ladder(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n)), 1, shape=(n, n), format="csr")


def _axis_matrices(n_axis: int, hbar: float, mu: float, w: float) -> dict[str, sp.csr_matrix]:
    # build one level larger so products like x^2 are exact on the retained block
    big = n_axis + 1
    a = _ladder(big)
    ad = a.T.tocsr()
    xs = np.sqrt(hbar / (2.0 * mu * w))
    ps = np.sqrt(hbar * mu * w / 2.0)
    x = xs * (a + ad)
    p = 1j * ps * (ad - a)
    keep = slice(0, n_axis)
    return {
        "x": x[keep, keep].tocsr(),
        "p": p[keep, keep].tocsr(),
        "x2": (x @ x)[keep, keep].tocsr(),
        "a": a[keep, keep].tocsr(),
        "n": sp.diags(np.arange(n_axis, dtype=float), 0, format="csr"),
    }


def _embed(basis: FockBasis, axis: int, m: sp.spmatrix) -> sp.csr_matrix:
    eye = sp.identity(basis.n_axis, format="csr")
    factors = [eye, eye, eye]
    factors[axis] = m
    return sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")


def _product(basis: FockBasis, ops: dict[int, sp.spmatrix]) -> sp.csr_matrix:
    eye = sp.identity(basis.n_axis, format="csr")
    f = [ops.get(k, eye) for k in range(3)]
    return sp.kron(sp.kron(f[0], f[1]), f[2], format="csr")


def _finish(m: sp.csr_matrix, basis: FockBasis, **flags) -> OperatorMatrix:
    if basis.n_max <= DENSE_LIMIT:
        m = m.toarray()
    return OperatorMatrix(m, basis, **flags)


def _axis_set(basis: FockBasis, p: ModelParams) -> list[dict[str, sp.csr_matrix]]:
    return [_axis_matrices(basis.n_axis, p.hbar, p.mu, w) for w in p.omega]


def _axis_index(axis) -> int:
    return "xyz".index(axis) if isinstance(axis, str) else int(axis)


def position_op(basis: FockBasis, axis, p: ModelParams) -> OperatorMatrix:
    k = _axis_index(axis)
    m = _axis_matrices(basis.n_axis, p.hbar, p.mu, p.omega[k])["x"]
    return _finish(_embed(basis, k, m), basis, hermitian=True, real=True, name=f"r_{'xyz'[k]}")


def momentum_op(basis: FockBasis, axis, p: ModelParams) -> OperatorMatrix:
    k = _axis_index(axis)
    m = _axis_matrices(basis.n_axis, p.hbar, p.mu, p.omega[k])["p"]
    return _finish(_embed(basis, k, m), basis, hermitian=True, name=f"p_{'xyz'[k]}")


def lowering_op(basis: FockBasis, axis) -> OperatorMatrix:
    k = _axis_index(axis)
    a = _ladder(basis.n_axis)
    return _finish(_embed(basis, k, a), basis, real=True, name=f"a_{'xyz'[k]}")


def ho_op(basis: FockBasis, p: ModelParams) -> OperatorMatrix:
    occ = basis.occupations()
    diag = p.hbar * ((occ + 0.5) @ p.omega)
    return _finish(sp.diags(diag, 0, format="csr"), basis, hermitian=True, real=True, name="H_HO")


def chiral_op(basis: FockBasis, p: ModelParams) -> OperatorMatrix:
    ax = _axis_set(basis, p)
    m = p.C * _product(basis, {0: ax[0]["x"], 1: ax[1]["x"], 2: ax[2]["x"]})
    return _finish(m.real.tocsr(), basis, hermitian=True, real=True, name="V_C")


def angular_momentum(basis: FockBasis, p: ModelParams) -> list[sp.csr_matrix]:
    """Components of r ^ p as sparse matrices."""
    ax = _axis_set(basis, p)

    def xp(i: int, j: int) -> sp.csr_matrix:
        return _product(basis, {i: ax[i]["x"], j: ax[j]["p"]})

    return [xp(1, 2) - xp(2, 1), xp(2, 0) - xp(0, 2), xp(0, 1) - xp(1, 0)]


def zeeman_op(basis: FockBasis, p: ModelParams, B=None) -> OperatorMatrix:
    B = p.B0_vec if B is None else np.asarray(B, dtype=float)
    L = angular_momentum(basis, p)
    m = sum((b * l for b, l in zip(B, L)), sp.csr_matrix((basis.size, basis.size), dtype=complex))
    return _finish((p.e / (2.0 * p.mu_star)) * m, basis, hermitian=True, name="V_Z")


def delta_v_op(basis: FockBasis, p: ModelParams, Q=None, B=None) -> OperatorMatrix:
    """Diamagnetic and motional terms of order B^2 and QB."""
    B = p.B0_vec if B is None else np.asarray(B, dtype=float)
    Q = p.Q0_vec if Q is None else np.asarray(Q, dtype=float)
    ax = _axis_set(basis, p)
    size = basis.size
    # (r ^ B)^2 = sum_ij r_i r_j (delta_ij B^2 - B_i B_j)
    quad = sp.csr_matrix((size, size))
    b2 = B @ B
    for i in range(3):
        for j in range(3):
            coef = (b2 if i == j else 0.0) - B[i] * B[j]
            if coef == 0.0:
                continue
            if i == j:
                quad = quad + coef * _embed(basis, i, ax[i]["x2"])
            else:
                quad = quad + coef * _product(basis, {i: ax[i]["x"], j: ax[j]["x"]})
    # Q . (r ^ B) = r . (B ^ Q)
    bq = np.cross(B, Q)
    lin = sum((bq[i] * _embed(basis, i, ax[i]["x"]) for i in range(3)), sp.csr_matrix((size, size)))
    coef = 0.5 * p.e**2 * (1.0 / p.M + p.mu / p.mu_star**2)
    m = coef * quad + (p.e / p.M) * lin
    return _finish(m.real.tocsr(), basis, hermitian=True, real=True, name="dV")


def hamiltonian(basis: FockBasis, p: ModelParams, include=("HO", "V_C", "V_Z"),
                Q=None) -> OperatorMatrix:
    """Effective internal Hamiltonian restricted to the chosen terms.

    The constant kinetic term of the centre of mass is left out.
    """
    include = frozenset(include)
    unknown = include - ALL_TERMS
    if unknown:
        raise ValueError(f"unknown Hamiltonian terms {sorted(unknown)}")
    builders = {
        "HO": lambda: ho_op(basis, p),
        "V_C": lambda: chiral_op(basis, p),
        "V_Z": lambda: zeeman_op(basis, p),
        "dV": lambda: delta_v_op(basis, p, Q=Q),
    }
    terms = [builders[k]() for k in ("HO", "V_C", "V_Z", "dV") if k in include]
    if not terms:
        return OperatorMatrix(np.zeros((basis.size, basis.size)), basis, True, True, "H")
    H = terms[0]
    for t in terms[1:]:
        H = H + t
    return OperatorMatrix(H.matrix, basis, hermitian=True, real=H.real, name="H")
