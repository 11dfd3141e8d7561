"""Energy bookkeeping while the magnetic field is switched on adiabatically.

The field grows along a fixed direction, ``B(s) = s B0_hat`` for ``s`` from 0
to ``|B0|``. At each step the kinetic momentum is the instantaneous value
``Q0 - P_Cas(B)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qed
from .params import ModelParams
from .response import polarizability


def _direction(p: ModelParams) -> np.ndarray:
    n = p.B0_norm
    return p.B0_vec / n if n else np.array([0.0, 0.0, 1.0])


def _at(p: ModelParams, B: float) -> ModelParams:
    return p.replace(B0=tuple(B * _direction(p)))


def par_momentum(p: ModelParams, B: float, fixed: bool = False) -> np.ndarray:
    q = _at(p, B)
    return qed.p_par_fixed(q) if fixed else qed.p_par_rot(q)


def perp_momentum(p: ModelParams, B: float, form: str = "bracket") -> np.ndarray:
    return qed.p_perp_rot(_at(p, B), form)


def total_momentum(p: ModelParams, B: float, form: str = "bracket", fixed: bool = False) -> np.ndarray:
    return par_momentum(p, B, fixed) + perp_momentum(p, B, form)


def lamb_parallel(B: float, Q, p: ModelParams, fixed: bool = False) -> float:
    return float(-par_momentum(p, B, fixed) @ np.asarray(Q, dtype=float) / p.M)


def lamb_perp(B: float, Q, p: ModelParams, form: str = "bracket") -> float:
    return float(-perp_momentum(p, B, form) @ np.asarray(Q, dtype=float) / p.M)


MomentumFn = Callable[[float], np.ndarray]


def _lamb_total(P: MomentumFn, Q0: np.ndarray, M: float, B: float) -> float:
    Pb = P(B)
    return float(-Pb @ (Q0 - Pb) / M)


def magnetization_work_fn(P: MomentumFn, B0: float, Q0, M: float, n_steps: int = 10_000) -> float:
    """Trapezoidal line integral of (E_par + E_perp)/B along the switching path.

    ``P(B)`` is the total Casimir momentum at field magnitude ``B``; it must be
    linear in ``B`` so that the integrand is finite at ``B = 0``, where the
    integrand is taken from its limit ``-P'(0) . Q0 / M``.
    """
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    Q0 = np.asarray(Q0, dtype=float)
    if B0 == 0:
        return 0.0
    grid = np.linspace(0.0, B0, n_steps + 1)
    vals = np.empty_like(grid)
    slope = P(B0) / B0
    vals[0] = float(-slope @ Q0 / M)
    for n, b in enumerate(grid[1:], start=1):
        vals[n] = _lamb_total(P, Q0, M, b) / b
    return float(np.trapezoid(vals, grid))


def magnetization_work(B0_final: float, Q0, p: ModelParams, n_steps: int = 10_000,
                       form: str = "bracket") -> float:
    # every closed form is linear in the field, so one evaluation fixes the path
    kappa = total_momentum(p, 1.0, form)
    return magnetization_work_fn(lambda b: b * kappa, B0_final, Q0, p.M, n_steps)


def delta_e_kin_fn(P_final: np.ndarray, Q0, M: float) -> float:
    # (Q0 - P)^2/2M - Q0^2/2M, expanded to avoid cancellation when |P| << |Q0|
    Q0 = np.asarray(Q0, dtype=float)
    P = np.asarray(P_final, dtype=float)
    return float((P @ P - 2 * (Q0 @ P)) / (2 * M))


def delta_e_kin(B0_final: float, Q0, p: ModelParams, form: str = "bracket") -> float:
    return delta_e_kin_fn(total_momentum(p, B0_final, form), Q0, p.M)


def diamagnetic_work(B0_final: float, p: ModelParams) -> float:
    """Order-of-magnitude diamagnetic term ``-alpha_M(0) B0^2`` (no extra prefactor)."""
    return float(-polarizability("M", 0.0, p).real * B0_final**2)


def vacuum_magnetization(P: MomentumFn, Q0, M: float, B: float, strict: bool = False,
                         h: float | None = None) -> float:
    """Vacuum magnetization correction along the field.

    Shortcut form ``-E(B)/B``; the strict form
    ``-dE/dB + (B/2) d^2E/dB^2`` uses central differences, exact for the
    quadratic-in-B energies produced by a linear ``P``.
    """
    Q0 = np.asarray(Q0, dtype=float)

    def E(b):
        return _lamb_total(P, Q0, M, b)

    if not strict:
        return -E(B) / B
    h = h if h is not None else 1e-2 * abs(B)
    d1 = (E(B + h) - E(B - h)) / (2 * h)
    d2 = (E(B + h) - 2 * E(B) + E(B - h)) / (h * h)
    return -d1 + 0.5 * B * d2


@dataclass(frozen=True)
class EnergyLedger:
    E_lamb_par: float
    E_lamb_perp: float
    W_B0: float
    Delta_E_kin: float
    E_diamag: float

    @property
    def balance_residual(self) -> float:
        return self.W_B0 - self.Delta_E_kin


def energy_ledger(p: ModelParams, n_steps: int = 10_000, form: str = "bracket") -> EnergyLedger:
    """Ledger at the final field of ``p`` with initial kinetic momentum ``p.Q0``.

    Lamb energies use the final kinetic momentum ``Q0 - P_Cas(B0)``.
    """
    B = p.B0_norm
    Q0 = p.Q0_vec
    Qf = Q0 - total_momentum(p, B, form)
    return EnergyLedger(
        E_lamb_par=lamb_parallel(B, Qf, p),
        E_lamb_perp=lamb_perp(B, Qf, p, form),
        W_B0=magnetization_work(B, Q0, p, n_steps, form),
        Delta_E_kin=delta_e_kin(B, Q0, p, form),
        E_diamag=diamagnetic_work(B, p),
    )
