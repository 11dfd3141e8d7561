"""Rotationally averaged polarizabilities and the induced-dipole relation.

All seven response functions are leading order in the anisotropy factors.
They are written in terms of the mean frequency ``omega_0`` and accept an
optional retarded shift ``omega_0**2 -> omega_0**2 (1 - i eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotTransverse, OffShell, OnResonance
from .params import ModelParams, anisotropy

KINDS = ("E", "M", "chi", "zeta", "beta", "gamma", "xi")

# poles of each formula in units of omega_0
_POLES = {
    "E": (1.0,),
    "M": (2.0,),
    "chi": (1.0,),
    "zeta": (0.0, 2.0),
    "beta": (1.0, 2.0),
    "gamma": (1.0, 2.0),
    "xi": (1.0, 2.0),
}


def evaluate(kind: str, omega, p: ModelParams, w0sq=None):
    """Raw formula evaluation, vectorised, no pole guard.

    ``w0sq`` overrides ``omega_0**2`` (complex values give the shifted form).
    Complex ``omega`` is allowed.
    """
    an = anisotropy(p)
    e, hb, C, mu, ms = p.e, p.hbar, p.C, p.mu, p.mu_star
    w0 = p.omega_0
    s = w0 * w0 if w0sq is None else w0sq
    w = np.asarray(omega)
    w2 = w * w
    if kind == "E":
        return e**2 / (mu * (s - w2))
    if kind == "M":
        return 4 * e**2 * hb * np.sqrt(s) * an.N_xyz / (9 * ms**2 * (4 * s - w2))
    if kind == "chi":
        return e**3 / (mu * ms * (s - w2) ** 2)
    if kind == "zeta":
        return (e**3 * hb * np.sqrt(s) * (4 * s - 3 * w2) * an.N_xyz
                / (18 * ms**3 * w * (4 * s - w2) ** 2))
    d = (w2 - s) * (w2 - 4 * s)  # = w^4 - 5 w0^2 w^2 + 4 w0^4
    s32 = s * np.sqrt(s)
    if kind == "beta":
        return (-2 * e**2 * hb * C * s32 * (w2 * w2 + 7 * s * w2 + 4 * s * s) * an.M_xyz
                / (mu**2 * ms * d**3))
    if kind == "gamma":
        return e**3 * hb * C * s32 * w2 * (w2 + 12 * s) * an.M_xyz / (mu**2 * ms**2 * d**3)
    if kind == "xi":
        poly = 19 * w2**3 - 842 * w2 * w2 * s - 224 * w2 * s * s - 672 * s**3
        return (-2 * e**3 * hb * C * an.M_xyz * s32 * w * poly
                / (15 * mu**2 * ms**2 * (w2 - s) ** 3 * (w2 - 4 * s) ** 5))
    raise ValueError(f"unknown polarizability kind {kind!r}; expected one of {KINDS}")


def polarizability(kind: str, omega: float, p: ModelParams, eps: float = 0.0) -> complex:
    """Appendix-style polarizability at real frequency ``omega``.

    With ``eps = 0`` evaluation within ``1e-9 omega_0`` of a pole raises
    ``OnResonance``; a positive ``eps`` moves the poles off the real axis.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown polarizability kind {kind!r}; expected one of {KINDS}")
    if omega < 0:
        raise ValueError("omega must be non-negative")
    w0 = p.omega_0
    if eps == 0.0:
        for pole in _POLES[kind]:
            if abs(omega - pole * w0) <= 1e-9 * w0:
                raise OnResonance(f"{kind} evaluated on its pole at {pole} omega_0")
        return complex(evaluate(kind, omega, p))
    return complex(evaluate(kind, omega, p, w0sq=w0 * w0 * (1 - 1j * eps)))


def beta_static(p: ModelParams) -> float:
    """Zero-frequency limit of beta."""
    an = anisotropy(p)
    return -p.e**2 * p.hbar * p.C * an.M_xyz / (8 * p.mu**2 * p.mu_star * p.omega_0**5)


def alpha_e_static(p: ModelParams) -> float:
    return p.e**2 / (p.mu * p.omega_0**2)


def chiral_length(p: ModelParams) -> float:
    """beta(0)/alpha_E(0), a signed length."""
    return beta_static(p) / alpha_e_static(p)


def _levi_civita_dot(B: np.ndarray) -> np.ndarray:
    """Matrix L with L[i, j] = eps_{ikj} B_k."""
    bx, by, bz = B
    return np.array([[0.0, bz, -by], [-bz, 0.0, bx], [by, -bx, 0.0]])


@dataclass(frozen=True)
class ResponseSet:
    omega: float
    alpha_E: complex
    alpha_M: complex
    chi: complex
    zeta: complex
    beta: complex
    gamma: complex
    xi: complex
    alpha_EE: np.ndarray
    alpha_EM: np.ndarray
    alpha_nr: complex


def response_set(omega: float, k, p: ModelParams, eps: float = 0.0) -> ResponseSet:
    """All response functions at ``omega`` plus the tensors for wavevector ``k``."""
    vals = {kind: polarizability(kind, omega, p, eps) for kind in KINDS}
    k = np.asarray(k, dtype=float)
    B = p.B0_vec
    L = _levi_civita_dot(B)
    a_ee = ((vals["E"] + 0.5 * vals["xi"] * (B @ k)) * np.eye(3)
            + 0.5 * vals["xi"] * np.outer(k, B) - 1j * omega * vals["chi"] * L)
    a_em = 1j * omega * vals["beta"] * np.eye(3) + vals["gamma"] * L
    a_nr = (0.5 * vals["xi"] - vals["gamma"] / omega) * (B @ k) if omega > 0 else 0.0
    return ResponseSet(omega, vals["E"], vals["M"], vals["chi"], vals["zeta"], vals["beta"],
                       vals["gamma"], vals["xi"], a_ee, a_em, a_nr)


def induced_dipole(E_free, B_free, k, omega: float, p: ModelParams) -> np.ndarray:
    """Dipole induced by a plane wave of frequency ``omega`` and wavevector ``k``.

    When ``B_free`` is None the magnetic field is eliminated through
    ``B = k ^ E / omega`` and the wave must be on shell and transverse.
    Otherwise the general constitutive relation is used with the given field.
    """
    E = np.asarray(E_free, dtype=complex)
    k = np.asarray(k, dtype=float)
    B0 = p.B0_vec
    r = {kind: polarizability(kind, omega, p) for kind in ("E", "chi", "beta", "gamma", "xi")}
    if B_free is None:
        kn = np.linalg.norm(k)
        if abs(kn * p.c - omega) > 1e-9 * omega:
            raise OffShell(f"|k| c = {kn * p.c:.6g} differs from omega = {omega:.6g}")
        if abs(k @ E) > 1e-9 * kn * np.linalg.norm(E):
            raise NotTransverse("k . E must vanish for a free transverse wave")
        return (r["E"] * E - 1j * omega * r["chi"] * np.cross(B0, E)
                + 1j * r["beta"] * np.cross(k, E)
                + (0.5 * r["xi"] - r["gamma"] / omega) * (B0 @ k) * E
                + (0.5 * r["xi"] + r["gamma"] / omega) * (B0 @ E) * k)
    Bf = np.asarray(B_free, dtype=complex)
    # time dependence exp(-i omega t): d/dt -> -i omega
    return (r["E"] * E + r["chi"] * np.cross(B0, -1j * omega * E)
            + 1j * omega * r["beta"] * Bf + r["gamma"] * np.cross(B0, Bf)
            + 0.5 * r["xi"] * ((B0 @ k) * E + (B0 @ E) * k))


def alpha_nr(k, omega: float, p: ModelParams) -> float:
    """Non-reciprocal scalar polarizability ``(xi/2 - gamma/omega)(B0 . k)``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    k = np.asarray(k, dtype=float)
    xi = polarizability("xi", omega, p).real
    gamma = polarizability("gamma", omega, p).real
    return float((0.5 * xi - gamma / omega) * (p.B0_vec @ k))


def delta_n_mch(rho: float, k, omega: float, p: ModelParams) -> float:
    """Non-reciprocal refractive-index correction of a dilute medium."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    return rho * alpha_nr(k, omega, p) / p.eps0
