"""Dressed ground state of the chiral oscillator in a magnetic field.

The analytic state is the second-order Rayleigh-Schrodinger result in
intermediate normalisation (the |000> amplitude is exactly 1). The numeric
state comes from diagonalising the truncated Hamiltonian and serves as its
oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BasisMismatch, DegenerateGroundState, InvariantViolation, PerturbationTooLarge
from .fock import FockBasis, FockState, OperatorMatrix, build_basis, hamiltonian, position_op
from .params import ModelParams, anisotropy

WARN_LIMIT = 0.1
HARD_LIMIT = 0.3


@dataclass(frozen=True)
class PerturbedState:
    basis: FockBasis
    amplitudes: np.ndarray
    normalization: str = "unit"
    energy: float | None = None

    def coefficient(self, state) -> complex:
        return complex(self.amplitudes[self.basis.index(state)])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PerturbedState":
        return PerturbedState(self.basis, _fix_phase(self.amplitudes / self.norm), "unit", self.energy)

    def intermediate(self) -> "PerturbedState":
        c0 = self.amplitudes[0]
        if c0 == 0:
            raise InvariantViolation("no overlap with |000>: intermediate normalisation undefined")
        return PerturbedState(self.basis, self.amplitudes / c0, "intermediate", self.energy)

    def as_dict(self, tol: float = 0.0) -> dict[FockState, complex]:
        idx = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return {self.basis.state(int(i)): complex(self.amplitudes[i]) for i in idx}


def _fix_phase(v: np.ndarray) -> np.ndarray:
    ref = v[0] if abs(v[0]) > 1e-300 else v[np.argmax(np.abs(v))]
    return v * (abs(ref) / ref)


def _check_size(curlyC: float, curlyB: np.ndarray) -> None:
    size = max(abs(curlyC), float(np.max(np.abs(curlyB))))
    if size > HARD_LIMIT:
        raise PerturbationTooLarge(f"expansion parameter {size:.3g} exceeds {HARD_LIMIT}")
    if size > WARN_LIMIT:
        warnings.warn(f"expansion parameter {size:.3g} exceeds {WARN_LIMIT}; "
                      "second-order state may be inaccurate", stacklevel=3)


def analytic_terms(p: ModelParams, axis: int) -> dict[str, dict[FockState, complex]]:
    """Unit-strength coefficient blocks for a field along ``axis``.

    Returns the blocks multiplying ``C``, ``B`` and ``C*B`` (dimensionless
    strengths), obtained from the z block by cyclic relabelling of axes.
    """
    k = axis
    i, j = (k + 1) % 3, (k + 2) % 3
    w = p.omega
    eta_ji = anisotropy(p).eta[j, i]

    def st(ni: int, nj: int, nk: int) -> FockState:
        occ = [0, 0, 0]
        occ[i], occ[j], occ[k] = ni, nj, nk
        return FockState(*occ)

    s2 = math.sqrt(2.0)
    cb = {
        st(0, 0, 1): 1j * eta_ji,
        st(2, 2, 1): 2j * eta_ji,
        st(2, 0, 1): -s2 * 1j * (2 * w[i] - w[k] * eta_ji) / (w[k] + 2 * w[i]),
        st(0, 2, 1): s2 * 1j * (2 * w[j] + w[k] * eta_ji) / (w[k] + 2 * w[j]),
    }
    return {
        "C": {FockState(1, 1, 1): -1.0 + 0j},
        "B": {st(1, 1, 0): -1j * eta_ji},
        "CB": cb,
    }


def order_blocks(p: ModelParams, basis: FockBasis | None = None) -> dict[str, np.ndarray]:
    """Amplitudes of the analytic state split by order: ``"0"``, ``"C"``, ``"B"``, ``"CB"``."""
    basis = basis or build_basis(2)
    if basis.n_max < 2:
        raise BasisMismatch("the dressed state needs n_max >= 2")
    an = anisotropy(p)
    _check_size(an.curlyC, an.curlyB0)
    out = {k: np.zeros(basis.size, dtype=complex) for k in ("0", "C", "B", "CB")}
    out["0"][basis.index((0, 0, 0))] = 1.0
    out["C"][basis.index((1, 1, 1))] = -an.curlyC
    for axis in range(3):
        b = an.curlyB0[axis]
        if b == 0.0:
            continue
        blocks = analytic_terms(p, axis)
        for st, v in blocks["B"].items():
            out["B"][basis.index(st)] += b * v
        for st, v in blocks["CB"].items():
            out["CB"][basis.index(st)] += b * an.curlyC * v
    return out


def ground_state_analytic(p: ModelParams, basis: FockBasis | None = None) -> PerturbedState:
    basis = basis or build_basis(2)
    blocks = order_blocks(p, basis)
    return PerturbedState(basis, blocks["0"] + blocks["C"] + blocks["B"] + blocks["CB"], "intermediate")


_ORDER = {"0": (0, 0), "C": (1, 0), "B": (0, 1), "CB": (1, 1)}


def expectation_to_order(p: ModelParams, op: OperatorMatrix) -> complex:
    """Expectation in the analytic state kept to first order in C and in B0 separately.

    Cross terms of higher order (e.g. B block against CB block) lie beyond the
    accuracy of the second-order state and are dropped. The norm correction
    starts at second order in a single strength and is dropped too.
    """
    blocks = order_blocks(p, op.basis)
    val = 0j
    for a, va in blocks.items():
        for b, vb in blocks.items():
            oc = _ORDER[a][0] + _ORDER[b][0]
            ob = _ORDER[a][1] + _ORDER[b][1]
            if oc <= 1 and ob <= 1:
                val += np.vdot(va, op @ vb)
    return complex(val)


def ground_state_numeric(H: OperatorMatrix, basis: FockBasis,
                         energy_scale: float | None = None) -> PerturbedState:
    """Lowest eigenvector of ``H``, unit-normalised with a real positive |000> amplitude."""
    if H.basis != basis:
        raise BasisMismatch("Hamiltonian and basis differ")
    if sp.issparse(H.matrix):
        vals, vecs = spla.eigsh(H.matrix, k=2, which="SA", tol=1e-14)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    else:
        vals, vecs = sla.eigh(H.dense(), subset_by_index=[0, min(1, basis.size - 1)])
    scale = abs(vals[0]) if energy_scale is None else energy_scale
    if basis.size > 1 and vals[1] - vals[0] <= 1e-8 * scale:
        raise DegenerateGroundState(f"gap {vals[1] - vals[0]:.3e} below 1e-8 x {scale:.3e}")
    return PerturbedState(basis, _fix_phase(vecs[:, 0].astype(complex)), "unit", float(vals[0]))


def numeric_coefficient_blocks(p: ModelParams, basis: FockBasis, axis: int,
                               step: float = 1e-3) -> dict[str, np.ndarray]:
    """Finite-difference coefficient blocks of the numeric ground state.

    Central differences in the dimensionless strengths give the blocks linear
    in C and in B; the four-point mixed difference gives the C*B block. The
    state is taken in intermediate normalisation.
    """
    unit_b = np.zeros(3)
    unit_b[axis] = 1.0

    def amps(sc: float, sb: float) -> np.ndarray:
        q = p.with_dimensionless(curlyC=sc, curlyB0=sb * unit_b)
        H = hamiltonian(basis, q, include=("HO", "V_C", "V_Z"))
        return ground_state_numeric(H, basis, energy_scale=p.hbar * p.omega_0).intermediate().amplitudes

    h = step
    pp, pm, mp, mm = amps(h, h), amps(h, -h), amps(-h, h), amps(-h, -h)
    c_only = (amps(h, 0.0) - amps(-h, 0.0)) / (2 * h)
    b_only = (amps(0.0, h) - amps(0.0, -h)) / (2 * h)
    mixed = (pp - pm - mp + mm) / (4 * h * h)
    return {"C": c_only, "B": b_only, "CB": mixed}


def expectation(state: PerturbedState, op: OperatorMatrix) -> complex | float:
    if state.basis != op.basis:
        raise BasisMismatch(f"state basis {state.basis} differs from operator basis {op.basis}")
    v = state.amplitudes
    val = np.vdot(v, op @ v) / np.vdot(v, v).real
    if op.hermitian:
        scale = max(float(np.abs(op.matrix).max()) if op.basis.size else 0.0, 1e-300)
        if abs(val.imag) > 1e-12 * scale:
            raise InvariantViolation(f"Hermitian expectation has imaginary part {val.imag:.3e}")
        return float(val.real)
    return complex(val)


def position_expectation(state: PerturbedState, p: ModelParams) -> np.ndarray:
    return np.array([expectation(state, position_op(state.basis, k, p)) for k in range(3)])


def position_expectation_to_order(p: ModelParams, basis: FockBasis | None = None) -> np.ndarray:
    """<r> of the analytic state at first order in C and in B0 (real part)."""
    basis = basis or build_basis(2)
    return np.array([expectation_to_order(p, position_op(basis, k, p)).real for k in range(3)])
