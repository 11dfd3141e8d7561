"""Casimir momentum from the microscopic (QED) route.

Transverse part
    evaluated numerically in the truncated Fock space: the k integral of the
    Doppler-expanded two-resolvent expression with the angular projector
    integrated in closed form, and the order-C*B piece isolated by mixed
    central differences. Closed forms for the orientation average are also
    provided.

Longitudinal part
    closed forms for a fixed orientation and for the orientation average,
    together with a quadrature over Euler angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from . import fock
from .errors import (DegenerateGroundState, GridTooCoarse, NonNegativeTransitionEnergy,
                     QuadratureNotConverged, ResolventSingular)
from .params import ModelParams, _curly_b_per_b, _curly_c_per_c, anisotropy
from .perturbation import position_expectation_to_order
from .response import alpha_e_static, beta_static

# --- k-space kernel integrals ------------------------------------------------


@dataclass(frozen=True)
class KernelArgs:
    E1: float
    E2: float
    mass: float = 1.0
    k_max: float | None = None
    dispersion: str = "full"
    hbar: float = 1.0
    c: float = 1.0


def photon_energy(k, mass: float, dispersion: str = "full", hbar: float = 1.0, c: float = 1.0):
    """Recoil plus photon energy ``hbar^2 k^2 / 2m + hbar c k`` (recoil only when ``nr``)."""
    k = np.asarray(k, dtype=float)
    recoil = (hbar * k) ** 2 / (2 * mass)
    if dispersion == "full":
        return recoil + hbar * c * k
    if dispersion == "nr":
        return recoil
    raise ValueError(f"unknown dispersion {dispersion!r}")


def kernel_integral_numeric(a: KernelArgs) -> float:
    if a.E1 >= 0 or a.E2 >= 0:
        raise NonNegativeTransitionEnergy(f"E1={a.E1}, E2={a.E2} must be negative")

    def f(k):
        Ek = photon_energy(k, a.mass, a.dispersion, a.hbar, a.c)
        d1, d2 = Ek - a.E1, Ek - a.E2
        return k**3 * (1 / (d1 * d2 * d2) + 1 / (d2 * d1 * d1))

    scales = sorted({abs(a.E1) / (a.hbar * a.c), abs(a.E2) / (a.hbar * a.c), a.mass * a.c / a.hbar})
    top = a.k_max if a.k_max is not None else np.inf
    edges = [0.0]
    for s in scales:
        for m in (0.1, 1.0, 10.0):
            if s * m < top:
                edges.append(s * m)
    edges = sorted(set(edges)) + [top]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=500)
        total += val
    return float(total)


def kernel_integral_log(a: KernelArgs) -> float:
    """Closed form ``2 m^2 log(E1/E2) / (hbar^4 (E1 - E2))`` with its equal-energy limit."""
    pref = 2 * a.mass**2 / a.hbar**4
    if a.E1 == a.E2:
        return pref / a.E1
    x = (a.E1 - a.E2) / a.E2
    # log(E1/E2)/(E1 - E2) = log1p(x) / (E2 x)
    return pref * math.log1p(x) / (a.E2 * x)


# --- transverse momentum in Fock space ----------------------------------------


@dataclass(frozen=True)
class KQuadrature:
    """Log-spaced Gauss-Legendre panels in k (units of 1/length).

    The grid runs from ``k_lo_factor * min(omega)/c`` to ``k_hi * m_e c / hbar``
    (or to ``k_max``); above ``k_hi`` the large-k tail is added analytically.
    """

    n_panels: int = 59
    order: int = 24
    check_order: int = 16
    k_lo_factor: float = 1e-4
    k_hi: float = 1e4
    k_max: float | None = None
    dispersion: str = "full"
    rel_tol: float = 1e-6

    def nodes(self, p: ModelParams, order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        order = order or self.order
        k_lo = self.k_lo_factor * p.omega.min() / p.c
        k_top = self.k_max if self.k_max is not None else self.k_hi * p.m_e * p.c / p.hbar
        x, w = leggauss(order)
        edges = np.linspace(math.log(k_lo), math.log(k_top), self.n_panels + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        k = np.exp(s).ravel()
        wk = (0.5 * (hi - lo) * w * np.exp(s)).ravel()
        return k, wk

    def tail(self, p: ModelParams) -> float:
        """Integral of k^3 G^3 beyond the grid, with G ~ 2m / (hbar k)^2."""
        if self.k_max is not None:
            return 0.0
        K = self.k_hi * p.m_e * p.c / p.hbar
        return 4 * p.m_e**3 / (p.hbar**6 * K**2)


@dataclass(frozen=True)
class _Operators:
    X: list
    P: list
    H_ho: np.ndarray
    V_c_unit: np.ndarray
    L: list


def _operators(basis: fock.FockBasis, p: ModelParams) -> _Operators:
    q = p.replace(C=1.0, B0=(0.0, 0.0, 0.0))
    X = [fock.position_op(basis, k, p).dense() for k in range(3)]
    P = [fock.momentum_op(basis, k, p).dense() for k in range(3)]
    L = [l.toarray() for l in fock.angular_momentum(basis, p)]
    return _Operators(X, P, fock.ho_op(basis, p).dense(), fock.chiral_op(basis, q).dense(), L)


def _kernel_matrix(gaps: np.ndarray, k: np.ndarray, wk: np.ndarray, p: ModelParams,
                   kq: KQuadrature) -> np.ndarray:
    """J[n, m] = int k^3 dk G_n(k)^2 G_m(k) over the grid, ground column removed."""
    Ek = photon_energy(k, p.m_e, kq.dispersion, p.hbar, p.c)
    den = Ek[:, None] + gaps[None, :]
    if np.any(den[:, 1:] <= 0):
        raise ResolventSingular("non-positive resolvent denominator")
    G = np.zeros_like(den)
    G[:, 1:] = 1.0 / den[:, 1:]
    J = ((G * G) * (wk * k**3)[:, None]).T @ G
    J[1:, 1:] += kq.tail(p)
    return J


def _transverse_raw(ops: _Operators, p: ModelParams, C: float, B: np.ndarray, kq: KQuadrature,
                    include_zeeman_shift: bool) -> tuple[np.ndarray, np.ndarray, float]:
    """Transverse momentum at finite (C, B) from two k rules (main, check).

    The third value is the largest absolute sum of the contracted terms,
    the scale against which the quadrature error is judged.
    """
    H = ops.H_ho + C * ops.V_c_unit + (p.e / (2 * p.mu_star)) * sum(b * l for b, l in zip(B, ops.L))
    E, U = sla.eigh(H)
    if E.size > 1 and E[1] - E[0] <= 1e-8 * p.hbar * p.omega_0:
        raise DegenerateGroundState("degenerate ground state in transverse evaluation")
    gaps = E - E[0]
    omega = U[:, 0]
    BxR = [B[1] * ops.X[2] - B[2] * ops.X[1], B[2] * ops.X[0] - B[0] * ops.X[2],
           B[0] * ops.X[1] - B[1] * ops.X[0]]
    Uh = U.conj().T
    v = np.array([Uh @ ((ops.P[i] + 0.5 * p.e * BxR[i]) @ omega) for i in range(3)])
    v[:, 0] = 0.0
    if include_zeeman_shift:
        shift = p.e * p.mu / (2 * p.mu_star)
        dop = [Uh @ (ops.P[m] + shift * BxR[m]) @ U for m in range(3)]
    else:
        dop = [Uh @ ops.P[m] @ U for m in range(3)]
    pref = p.hbar**3 * p.e**2 / (p.c * p.m_e**3 * p.eps0 * (2 * math.pi) ** 3) * 4 * math.pi / 15
    out = []
    size = 0.0
    for order in (kq.order, kq.check_order):
        k, wk = kq.nodes(p, order)
        J = _kernel_matrix(gaps, k, wk, p, kq)
        vec = np.zeros(3)
        for l in range(3):
            tot = 0.0j
            for i in range(3):
                term = v[i].conj()[:, None] * dop[l] * v[i][None, :] * J
                tot += 4 * np.sum(term)
                if order == kq.order:
                    size = max(size, abs(pref) * float(np.abs(term).sum()))
            for m in range(3):
                tot -= np.sum(v[l].conj()[:, None] * dop[m] * v[m][None, :] * J)
                tot -= np.sum(v[m].conj()[:, None] * dop[m] * v[l][None, :] * J)
            vec[l] = (pref * tot).real
        out.append(vec)
    return out[0], out[1], size


def transverse_momentum(p: ModelParams, basis: fock.FockBasis, kq: KQuadrature = KQuadrature(),
                        include_zeeman_shift: bool = False) -> np.ndarray:
    """Transverse momentum at the finite C and B0 of ``p`` (all orders kept)."""
    if basis.n_max > fock.DENSE_LIMIT:
        raise ValueError(f"dense evaluation limited to n_max <= {fock.DENSE_LIMIT}")
    main, _, _ = _transverse_raw(_operators(basis, p), p, p.C, p.B0_vec, kq, include_zeeman_shift)
    return main


@dataclass(frozen=True)
class FockResult:
    tensor: np.ndarray
    error: np.ndarray
    columns: tuple[int, ...]
    settings: dict = field(default_factory=dict)

    def trace_over_3(self) -> float:
        return float(np.trace(self.tensor)) / 3.0


def p_perp_tensor(p: ModelParams, basis: fock.FockBasis, kq: KQuadrature = KQuadrature(),
                  axes=(0, 1, 2), step: float = 1e-3, include_zeeman_shift: bool = False) -> FockResult:
    """Linear-response tensor T with P_perp_l = C T_lj B_j at order C*B.

    Column j is obtained with the field along molecular axis j from the
    four-point mixed difference in (C, B_j), with dimensionless steps ``step``.
    """
    if basis.n_max > fock.DENSE_LIMIT:
        raise ValueError(f"dense evaluation limited to n_max <= {fock.DENSE_LIMIT}")
    ops = _operators(basis, p)
    hC = step / _curly_c_per_c(p)
    hB = step / _curly_b_per_b(p)
    T = np.zeros((3, 3))
    err = np.zeros((3, 3))
    for j in axes:
        b = np.zeros(3)
        b[j] = hB[j]
        main = np.zeros(3)
        check = np.zeros(3)
        raw = 0.0
        for sc, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            m, c, size = _transverse_raw(ops, p, sc * hC, sb * b, kq, include_zeeman_shift)
            main += sc * sb * m
            check += sc * sb * c
            raw = max(raw, size)
        T[:, j] = main / (4 * hC * hB[j])
        err[:, j] = np.abs(main - check) / (4 * hC * hB[j])
        # judge the k rule against the term magnitudes, not the cancelling sums
        if err[:, j].max() > kq.rel_tol * raw / (4 * hC * hB[j]):
            raise QuadratureNotConverged(
                f"k quadrature rules disagree: {err[:, j].max():.3e} vs scale {raw / (4 * hC * hB[j]):.3e}")
    settings = {"n_max": basis.n_max, "step": step, "k_panels": kq.n_panels, "k_order": kq.order,
                "dispersion": kq.dispersion, "zeeman_shift": include_zeeman_shift}
    return FockResult(T, err, tuple(axes), settings)


def p_perp_fock(p: ModelParams, basis: fock.FockBasis, kq: KQuadrature = KQuadrature(),
                step: float = 1e-3, include_zeeman_shift: bool = False) -> np.ndarray:
    """Fixed-orientation transverse momentum C T B0 for the field of ``p``."""
    if p.C == 0 or p.B0_norm == 0:
        return np.zeros(3)
    axes = tuple(j for j in range(3) if p.B0[j] != 0.0)
    res = p_perp_tensor(p, basis, kq, axes, step, include_zeeman_shift)
    return p.C * res.tensor @ p.B0_vec


def p_perp_fock_rot(p: ModelParams, basis: fock.FockBasis, kq: KQuadrature = KQuadrature(),
                    step: float = 1e-3, include_zeeman_shift: bool = False) -> np.ndarray:
    """Orientation-averaged transverse momentum (trace/3 of the Fock tensor)."""
    res = p_perp_tensor(p, basis, kq, (0, 1, 2), step, include_zeeman_shift)
    return p.C * res.trace_over_3() * p.B0_vec


# --- closed forms --------------------------------------------------------------

P_PERP_BRACKET = (20736 * math.log(4 / 3) - 12928 * math.log(2) - 14511) / 93312
P_PERP_APPROX = -1.06 / 144


def perp_unit(p: ModelParams) -> float:
    """C e^3 M_xyz / (pi^2 c eps0 m_e^2 omega_x omega_y omega_z)."""
    return (p.C * p.e**3 * anisotropy(p).M_xyz
            / (math.pi**2 * p.c * p.eps0 * p.m_e**2 * p.omega_prod))


def par_unit(p: ModelParams) -> float:
    """C e^3 M_xyz / (pi^2 c eps0 mu mu* omega_x omega_y omega_z)."""
    return (p.C * p.e**3 * anisotropy(p).M_xyz
            / (math.pi**2 * p.c * p.eps0 * p.mu * p.mu_star * p.omega_prod))


def p_perp_rot(p: ModelParams, form: str = "bracket") -> np.ndarray:
    const = {"bracket": P_PERP_BRACKET, "approx": P_PERP_APPROX}[form]
    return const * perp_unit(p) * p.B0_vec


def p_par_tensor(p: ModelParams) -> np.ndarray:
    """Diagonal molecular-frame tensor of the fixed-orientation longitudinal momentum."""
    eta = anisotropy(p).eta
    w = p.omega
    K = (p.C * p.e**3 * math.log(p.m_N / p.m_e)
         / (96 * math.pi**2 * p.c * p.eps0 * p.mu * p.mu_star * p.omega_sum))
    diag = np.zeros(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        # eps_ijk eta^{kj} + eps_ikj eta^{jk} = 2 eta^{kj}
        diag[i] = 2 * eta[k, j] / (w[k] * w[j])
    return K * np.diag(diag)


def p_par_fixed(p: ModelParams) -> np.ndarray:
    return p_par_tensor(p) @ p.B0_vec


def p_par_rot(p: ModelParams) -> np.ndarray:
    return math.log(p.m_e / p.m_N) / 144 * par_unit(p) * p.B0_vec


def p_total_closed(p: ModelParams) -> np.ndarray:
    """Combined closed form with the [ln(m_e/m_N) + 1] / 144 constant."""
    return (math.log(p.m_e / p.m_N) + 1) / 144 * par_unit(p) * p.B0_vec


def p_cas_optical(p: ModelParams) -> np.ndarray:
    """Optical-parameter form (2 alpha / 9 pi) (beta(0)/alpha_E(0)) [ln(m_N/m_e) + 1] e B0."""
    ell = beta_static(p) / alpha_e_static(p)
    return (2 * p.alpha_fs / (9 * math.pi)) * ell * (math.log(p.m_N / p.m_e) + 1) * p.e * p.B0_vec


# --- orientation averages --------------------------------------------------------


@dataclass(frozen=True)
class SO3Grid:
    """Product rule over ZYZ Euler angles: trapezoid in alpha and gamma, Gauss in cos(beta)."""

    n_alpha: int = 6
    n_beta: int = 4
    n_gamma: int = 6
    tol: float = 1e-12

    def refined(self) -> "SO3Grid":
        return SO3Grid(self.n_alpha + 2, self.n_beta + 2, self.n_gamma + 2, self.tol)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        a = 2 * np.pi * np.arange(self.n_alpha) / self.n_alpha
        g = 2 * np.pi * np.arange(self.n_gamma) / self.n_gamma
        x, wb = leggauss(self.n_beta)
        b = np.arccos(x)
        R, W = [], []
        for ai in a:
            for bi, wi in zip(b, wb):
                for gi in g:
                    R.append(euler_zyz(ai, bi, gi))
                    W.append(wi / (2 * self.n_alpha * self.n_gamma))
        return np.array(R), np.array(W)


def euler_zyz(a: float, b: float, g: float) -> np.ndarray:
    def rz(t):
        c, s = math.cos(t), math.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    cb, sb = math.cos(b), math.sin(b)
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    return rz(a) @ ry @ rz(g)


def _average(f: Callable[[np.ndarray], np.ndarray], grid: SO3Grid) -> np.ndarray:
    R, W = grid.points()
    return sum(w * np.asarray(f(r), dtype=float) for r, w in zip(R, W))


def rotational_average(f: Callable[[np.ndarray], np.ndarray], grid: SO3Grid = SO3Grid()) -> np.ndarray:
    """Haar average of ``f(R)`` over rotations, checked against a refined grid."""
    coarse = _average(f, grid)
    fine = _average(f, grid.refined())
    scale = max(np.abs(fine).max(), np.abs(np.asarray(f(np.eye(3)))).max(), 1e-300)
    if np.abs(fine - coarse).max() > grid.tol * scale:
        raise GridTooCoarse(f"grid refinement changed the average by {np.abs(fine - coarse).max():.3e}")
    return fine


def tensor_average(T: np.ndarray, B) -> np.ndarray:
    """Shortcut (tr T / 3) B for a linear-response tensor."""
    return np.trace(T) / 3.0 * np.asarray(B, dtype=float)


def p_par_rot_quadrature(p: ModelParams, grid: SO3Grid = SO3Grid()) -> np.ndarray:
    """Orientation average of the fixed-orientation longitudinal momentum by quadrature.

    For molecule orientation R (molecular to lab frame) the field seen by the
    molecule is R^T B0 and the momentum returned to the lab frame is R P.
    """
    T = p_par_tensor(p)
    B = p.B0_vec
    return rotational_average(lambda R: R @ (T @ (R.T @ B)), grid)


# --- exact anisotropy expansion of the longitudinal trace ------------------------


class _Series:
    """Truncated power series in t with Fraction coefficients."""

    def __init__(self, coeffs, order: int):
        self.order = order
        c = [Fraction(x) for x in coeffs][: order + 1]
        self.c = c + [Fraction(0)] * (order + 1 - len(c))

    def __add__(self, o):
        o = o if isinstance(o, _Series) else _Series([o], self.order)
        return _Series([a + b for a, b in zip(self.c, o.c)], self.order)

    def __sub__(self, o):
        o = o if isinstance(o, _Series) else _Series([o], self.order)
        return _Series([a - b for a, b in zip(self.c, o.c)], self.order)

    def __mul__(self, o):
        o = o if isinstance(o, _Series) else _Series([o], self.order)
        out = [Fraction(0)] * (self.order + 1)
        for i, a in enumerate(self.c):
            for j, b in enumerate(o.c[: self.order + 1 - i]):
                out[i + j] += a * b
        return _Series(out, self.order)

    def __truediv__(self, o):
        o = o if isinstance(o, _Series) else _Series([o], self.order)
        if o.c[0] == 0:
            raise ZeroDivisionError("series division needs a nonzero constant term")
        q = [Fraction(0)] * (self.order + 1)
        for n in range(self.order + 1):
            q[n] = (self.c[n] - sum(q[m] * o.c[n - m] for m in range(n))) / o.c[0]
        return _Series(q, self.order)


def par_trace_series(d: tuple[Fraction, Fraction, Fraction], order: int = 4) -> list[Fraction]:
    """Exact expansion of the longitudinal trace in the anisotropy scale t.

    Frequencies are ``omega_i = 1 + t d_i``. Returns the coefficients of
    ``sum_i eta^{kj} / (omega_k omega_j) * omega_x omega_y omega_z / (omega_x + omega_y + omega_z)``
    (cyclic i, j, k) in powers of t; the t^1 and t^2 terms vanish identically.
    """
    w = [_Series([1, Fraction(di)], order) for di in d]

    def eta(i, j):
        return (w[i] - w[j]) / (w[i] + w[j])

    total = _Series([0], order)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        total = total + eta(k, j) * w[i]  # eta^{kj}/(w_k w_j) times the product of all three
    total = total / (w[0] + w[1] + w[2])
    return total.c


# --- combined report ---------------------------------------------------------------


@dataclass(frozen=True)
class CasimirReport:
    P_perp: np.ndarray
    P_par: np.ndarray
    P_total: np.ndarray
    P_kin: np.ndarray
    P_abr: np.ndarray
    K: np.ndarray
    P_optical: np.ndarray
    P_combined_closed: np.ndarray
    perp_method: str
    par_method: str
    consistency: dict
    settings: dict = field(default_factory=dict)

    @property
    def K_residual(self) -> np.ndarray:
        return self.K - (self.P_kin + self.P_abr + self.P_total)


def abraham_momentum(p: ModelParams) -> np.ndarray:
    """e B0 ^ <r> with <r> from the analytic dressed state at order C*B0."""
    if p.C == 0 and p.B0_norm == 0:
        return np.zeros(3)
    return p.e * np.cross(p.B0_vec, position_expectation_to_order(p))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb else float(np.linalg.norm(a))


def consistency_matrix(p: ModelParams, P_perp_fock_rot: np.ndarray | None = None) -> dict:
    """Relative residuals between the printed closed forms of the total momentum."""
    par = p_par_rot(p)
    br = par + p_perp_rot(p, "bracket")
    ap = par + p_perp_rot(p, "approx")
    comb = p_total_closed(p)
    opt = p_cas_optical(p)
    out = {
        "combined_vs_par_plus_bracket": _rel(comb, br),
        "combined_vs_par_plus_approx": _rel(comb, ap),
        "optical_vs_combined": _rel(opt, comb),
        "optical_vs_par_plus_approx": _rel(opt, ap),
        "optical_vs_par_plus_bracket": _rel(opt, br),
    }
    if P_perp_fock_rot is not None:
        out["fock_vs_bracket"] = _rel(P_perp_fock_rot, p_perp_rot(p, "bracket"))
        out["fock_vs_approx"] = _rel(P_perp_fock_rot, p_perp_rot(p, "approx"))
    return out


def p_cas_total(p: ModelParams, perp_form: str = "bracket",
                P_perp: np.ndarray | None = None) -> CasimirReport:
    """Orientation-averaged Casimir momentum with the pseudo-momentum ledger.

    ``P_perp`` overrides the transverse closed form (e.g. with a Fock-space
    value); ``perp_form`` picks the printed constant otherwise.
    """
    if P_perp is None:
        P_perp = p_perp_rot(p, perp_form)
        perp_method = f"analytic-{perp_form}"
    else:
        P_perp = np.asarray(P_perp, dtype=float)
        perp_method = "fock-numeric"
    P_par = p_par_rot(p)
    P_total = P_perp + P_par
    K = p.Q0_vec
    P_abr = abraham_momentum(p)
    P_kin = K - P_abr - P_total
    return CasimirReport(
        P_perp=P_perp,
        P_par=P_par,
        P_total=P_total,
        P_kin=P_kin,
        P_abr=P_abr,
        K=K,
        P_optical=p_cas_optical(p),
        P_combined_closed=p_total_closed(p),
        perp_method=perp_method,
        par_method="analytic-rot",
        consistency=consistency_matrix(p, P_perp if perp_method == "fock-numeric" else None),
    )
