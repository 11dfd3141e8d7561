"""Linear-response route to the Casimir momentum.

The momentum is a frequency integral of ``omega^4 (xi/2 - gamma/omega)``,
whose integrand has fifth-order real-axis poles at ``omega_0`` and
``2 omega_0``. Two independent regularisations are provided:

* retarded shift ``omega_0^2 -> omega_0^2 (1 - i eps)`` on an eps ladder,
  followed by polynomial (Neville) extrapolation to ``eps = 0``. The real
  part is even in eps (the advanced shift gives the complex conjugate), so
  the extrapolation variable is ``eps^2``;
* Hadamard finite part, with the Laurent series around each pole read off
  from a discrete Cauchy transform on a circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureNotConverged
from .params import ModelParams, anisotropy
from .response import evaluate


@dataclass(frozen=True)
class QuadratureSpec:
    eps_ladder: tuple[float, ...] = (0.32, 0.16, 0.08, 0.04)
    rel_tol: float = 1e-5
    abs_tol: float = 0.0
    quad_rel: float = 1e-12
    limit: int = 2000

    def __post_init__(self):
        lad = tuple(float(e) for e in self.eps_ladder)
        object.__setattr__(self, "eps_ladder", lad)
        if len(lad) < 2:
            raise ValueError("eps_ladder needs at least two entries")
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ValueError("eps_ladder must be strictly decreasing")
        if lad[-1] < 1e-8:
            raise ValueError("eps_ladder entries must be >= 1e-8")


ALT_LADDER = (0.24, 0.12, 0.06, 0.03)


def momentum_prefactor(p: ModelParams) -> float:
    """hbar / (6 pi^2 eps0 c^5)."""
    return p.hbar / (6 * math.pi**2 * p.eps0 * p.c**5)


def integral_unit(p: ModelParams) -> float:
    """Natural scale hbar e^3 C M_xyz / (mu^2 mu*^2 omega_0) of the frequency integral."""
    return p.hbar * p.e**3 * p.C * anisotropy(p).M_xyz / (p.mu**2 * p.mu_star**2 * p.omega_0)


def _integrand(omega, p: ModelParams, w0sq=None):
    w = np.asarray(omega)
    return w**4 * (0.5 * evaluate("xi", w, p, w0sq) - evaluate("gamma", w, p, w0sq) / w)


def sc_integrand(omega: float, p: ModelParams) -> float:
    """omega^4 (xi/2 - gamma/omega) at a real frequency."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    if omega == 0:
        return 0.0
    from .response import polarizability

    xi = polarizability("xi", omega, p).real
    gamma = polarizability("gamma", omega, p).real
    return omega**4 * (0.5 * xi - gamma / omega)


def sc_integral_regularized(p: ModelParams, eps: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Re of the frequency integral with the retarded shift, in units of ``integral_unit``.

    The half line is compactified by ``omega = omega_0 t / (1 - t)``.
    """
    unit = integral_unit(p)
    if unit == 0:
        return 0.0
    w0 = p.omega_0
    w0sq = w0 * w0 * (1 - 1j * eps)

    def g(t):
        w = w0 * t / (1 - t)
        return (_integrand(w, p, w0sq) * w0 / (1 - t) ** 2 / unit).real

    brk = set()
    for pole in (1.0, 2.0):
        for m in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
            for sgn in (-1, 1):
                x = pole * (1 + sgn * m * eps / 2)
                if 0 < x:
                    brk.add(x / (1 + x))
    edges = [0.0] + sorted(b for b in brk if 0 < b < 1) + [1.0]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, err = integrate.quad(g, a, b, epsabs=0.0, epsrel=spec.quad_rel, limit=spec.limit)
        total += val
    return total


def neville(xs, ys, x0: float = 0.0) -> np.ndarray:
    """Diagonal of the Neville table: extrapolants using 1, 2, ... points."""
    xs = list(map(float, xs))
    T = [float(y) for y in ys]
    diag = [T[0]]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            T[i] = ((x0 - xs[i - level]) * T[i] - (x0 - xs[i]) * T[i - 1]) / (xs[i] - xs[i - level])
        diag.append(T[level])
    return np.array(diag)


@dataclass(frozen=True)
class ExtrapolationResult:
    value: float
    error: float
    eps: tuple[float, ...]
    samples: tuple[float, ...]
    extrapolants: tuple[float, ...]


def sc_integral_extrapolated(p: ModelParams, spec: QuadratureSpec = QuadratureSpec()) -> ExtrapolationResult:
    """Eps-ladder extrapolation of the regularised integral (units of ``integral_unit``)."""
    ys = [sc_integral_regularized(p, e, spec) for e in spec.eps_ladder]
    diag = neville(np.square(spec.eps_ladder), ys)
    value, err = float(diag[-1]), float(abs(diag[-1] - diag[-2]))
    if err > spec.rel_tol * abs(value) + spec.abs_tol:
        raise QuadratureNotConverged(
            f"eps extrapolation not converged: last change {err:.3e} vs value {value:.6e}")
    return ExtrapolationResult(value, err, spec.eps_ladder, tuple(ys), tuple(map(float, diag)))


def _fp_window(f, center: float, rho: float, h: float, nodes: int = 256, max_order: int = 8) -> float:
    """Hadamard finite part of the integral of ``f`` over ``[center - h, center + h]``.

    The Laurent coefficients about ``center`` come from the trapezoidal rule on
    a circle of radius ``rho`` (> h) that encloses no other singularity. Only
    even powers contribute on the symmetric window.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = f(center + rho * np.exp(1j * theta))
    total = 0.0 + 0.0j
    for n in range(-max_order, nodes // 2):
        if n % 2:
            continue
        c_n = np.mean(vals * np.exp(-1j * n * theta))  # = a_n rho^n
        total += c_n * 2 * h * (h / rho) ** n / (n + 1)
    return total


def sc_integral_finite_part(p: ModelParams, rho: float = 0.6, h: float = 0.4,
                            rel: float = 1e-12) -> float:
    """Hadamard finite-part value of the frequency integral (units of ``integral_unit``)."""
    unit = integral_unit(p)
    if unit == 0:
        return 0.0
    w0 = p.omega_0

    def f(x):
        return _integrand(w0 * np.asarray(x), p) * w0 / unit

    windows = [(1.0, rho, h), (2.0, rho, h)]
    total = 0.0
    for center, r, hw in windows:
        win = _fp_window(f, center, r, hw)
        total += win.real
    segments = [(0.0, 1.0 - h), (1.0 + h, 2.0 - h), (2.0 + h, np.inf)]
    for a, b in segments:
        val, _ = integrate.quad(lambda x: float(np.real(f(x))), a, b, epsabs=0.0, epsrel=rel, limit=500)
        total += val
    return total


def sc_momentum_numeric(p: ModelParams, q: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    res = sc_integral_extrapolated(p, q)
    return momentum_prefactor(p) * integral_unit(p) * res.value * p.B0_vec


def sc_momentum_finite_part(p: ModelParams) -> np.ndarray:
    return momentum_prefactor(p) * integral_unit(p) * sc_integral_finite_part(p) * p.B0_vec


SC_CLOSED_COEFFICIENT = -1.0 / 1458.0


def sc_momentum_closed(p: ModelParams) -> np.ndarray:
    """Closed form -hbar^2 e^3 C B0 M_xyz / (1458 pi^2 c^5 eps0 omega_0 mu^2 mu*^2)."""
    an = anisotropy(p)
    coef = (SC_CLOSED_COEFFICIENT * p.hbar**2 * p.e**3 * p.C * an.M_xyz
            / (math.pi**2 * p.c**5 * p.eps0 * p.omega_0 * p.mu**2 * p.mu_star**2))
    return coef * p.B0_vec


# --- q-space reduction check ------------------------------------------------

_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_i, _j, _k], _LEVI[_i, _k, _j] = 1.0, -1.0


def g_em(q, k: float, width: float = 0.0) -> np.ndarray:
    """q-space electric-magnetic Green tensor with Lorentzian width ``width``."""
    q = np.asarray(q, dtype=float)
    return -k * np.einsum("pkr,r->pk", _LEVI, q) / (k * k - q @ q + 1j * width)


def g_mm(q, k: float, width: float = 0.0) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q2 = q @ q
    return -q2 * (np.eye(3) - np.outer(q, q) / q2) / (k * k - q2 + 1j * width)


def sphere_grid(n: int = 16):
    """Gauss-Legendre in cos(theta) times uniform phi; returns unit vectors and weights."""
    x, wx = np.polynomial.legendre.leggauss(n)
    phi = 2 * np.pi * np.arange(2 * n) / (2 * n)
    st = np.sqrt(1 - x**2)
    dirs = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                     np.outer(x, np.ones_like(phi))], axis=-1).reshape(-1, 3)
    w = np.outer(wx, np.full(phi.size, 2 * np.pi / phi.size)).reshape(-1)
    return dirs, w


def green_reduction_check(omega: float, eps: float, p: ModelParams, n_angle: int = 8) -> tuple[float, float]:
    """Finite-width q-integral of the non-reciprocal kernel versus its on-shell limit.

    Returns the component along B0 of the momentum-per-frequency density:
    first evaluated with angular quadrature and a radial integral whose pole
    carries the Lorentzian width ``eps k^2``, then from the closed on-shell
    reduction. The polynomial part of ``q^4/(k^2 - q^2 + i width)`` is a
    contact term without absorptive part and is left out of the radial integral.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    k = omega / p.c
    B = p.B0_vec
    bnorm = np.linalg.norm(B)
    if bnorm == 0:
        return 0.0, 0.0
    bhat = B / bnorm
    coef = (0.5 * evaluate("xi", omega, p) - evaluate("gamma", omega, p) / omega)
    # angular part at unit |q| with the pole factor stripped
    dirs, w = sphere_grid(n_angle)
    ang = np.zeros(3)
    for qh, wt in zip(dirs, w):
        a_nr = coef * (B @ qh)
        ang += wt * a_nr * np.einsum("ijk,jk->i", _LEVI, -k * np.einsum("pkr,r->pk", _LEVI, qh))
    # radial part: Im int q^2 dq q^2 / (k^2 - q^2 + i width), resonant piece only
    a2 = k * k * (1 + 1j * eps)

    def radial(q):
        return (a2 * a2 / (a2 - q * q)).imag

    pts = sorted({k * (1 + s * m * eps) for m in (0.25, 1.0, 4.0, 16.0, 64.0) for s in (-1, 1)} | {k})
    edges = [0.0] + [x for x in pts if 0 < x < 2 * k] + [2 * k]
    rad = integrate.quad(radial, 2 * k, np.inf, epsabs=0.0, epsrel=1e-11, limit=400)[0]
    for lo, hi in zip(edges, edges[1:]):
        rad += integrate.quad(radial, lo, hi, epsabs=0.0, epsrel=1e-11, limit=400)[0]
    pref = p.hbar / (math.pi * p.eps0 * p.c)
    finite = pref * float(ang @ bhat) * rad / (2 * math.pi) ** 3
    on_shell = p.hbar * omega**4 * coef * bnorm / (6 * math.pi**2 * p.eps0 * p.c**5)
    return float(finite), float(on_shell)


def mode_sum_integrand(omega: float, p: ModelParams, n_angle: int = 8) -> np.ndarray:
    """Momentum per unit frequency from zero-point modes of a dilute medium.

    Each of the two polarisations of a mode of wavevector k carries the
    zero-point momentum ``hbar k / 2`` scaled by the non-reciprocal index
    shift, with one molecule in the quantisation volume.
    """
    k = omega / p.c
    dirs, w = sphere_grid(n_angle)
    from .response import delta_n_mch

    total = np.zeros(3)
    for kh, wt in zip(dirs, w):
        dn = delta_n_mch(1.0, k * kh, omega, p)
        total += wt * 2 * 0.5 * p.hbar * dn * k * kh
    # d^3k / (2 pi)^3 = k^2 dk dOmega / (2 pi)^3, dk = domega / c
    return total * k * k / ((2 * math.pi) ** 3 * p.c)
