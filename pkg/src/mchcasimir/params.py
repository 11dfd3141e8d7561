"""Model parameters, unit conversion and dimensionless expansion parameters.

Internal units set hbar = c = m_e = eps0 = 1, so the elementary charge is
``sqrt(4*pi*alpha)``. Constants are still carried as fields so that every
formula downstream can be written with its full dimensional prefactor.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import constants as sc

from .errors import DegenerateMasses, NonPositiveInput

AXES = ("x", "y", "z")

ALPHA_FS = sc.fine_structure
E_INTERNAL = math.sqrt(4.0 * math.pi * ALPHA_FS)
M_PROTON_OVER_ME = sc.m_p / sc.m_e

# SI value of one internal unit of each quantity kind.
_HBAR, _C, _ME, _EPS0 = sc.hbar, sc.c, sc.m_e, sc.epsilon_0
_LENGTH = _HBAR / (_ME * _C)
_CHARGE = math.sqrt(_EPS0 * _HBAR * _C)
SI_SCALE = {
    "mass": _ME,
    "length": _LENGTH,
    "time": _HBAR / (_ME * _C**2),
    "frequency": _ME * _C**2 / _HBAR,
    "energy": _ME * _C**2,
    "momentum": _ME * _C,
    "velocity": _C,
    "action": _HBAR,
    "charge": _CHARGE,
    "magnetic_field": _ME * _C / (_CHARGE * _LENGTH),
    "chiral_coupling": _ME * _C**2 / _LENGTH**3,
}


def to_si(kind: str, value):
    """Convert an internal-unit value of the given kind to SI."""
    return value * SI_SCALE[kind] if np.isscalar(value) else np.asarray(value, float) * SI_SCALE[kind]


def from_si(kind: str, value):
    """Convert an SI value of the given kind to internal units."""
    return value / SI_SCALE[kind] if np.isscalar(value) else np.asarray(value, float) / SI_SCALE[kind]


def _vec3(v, name: str) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise NonPositiveInput(f"{name} must have three components, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonPositiveInput(f"{name} must be finite")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class ModelParams:
    """Two-body chiral oscillator in an external magnetic field.

    The chromophoric electron carries charge -e and mass ``m_e``; the
    effective nucleus carries +e and mass ``m_N``.
    """

    m_N: float
    omega_x: float
    omega_y: float
    omega_z: float
    C: float = 0.0
    B0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    Q0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    m_e: float = 1.0
    e: float = E_INTERNAL
    hbar: float = 1.0
    c: float = 1.0
    eps0: float = 1.0
    alpha_fs: float = field(init=False)

    def __post_init__(self):
        for name in ("m_N", "m_e", "omega_x", "omega_y", "omega_z", "e", "hbar", "c", "eps0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise NonPositiveInput(f"{name} must be strictly positive, got {v!r}")
        if not math.isfinite(self.C):
            raise NonPositiveInput("C must be finite")
        if self.m_N == self.m_e:
            raise DegenerateMasses("m_N equals m_e: mu_star is undefined")
        if self.m_N < self.m_e:
            raise NonPositiveInput("m_N must exceed m_e")
        object.__setattr__(self, "B0", _vec3(self.B0, "B0"))
        object.__setattr__(self, "Q0", _vec3(self.Q0, "Q0"))
        object.__setattr__(
            self, "alpha_fs", self.e**2 / (4.0 * math.pi * self.eps0 * self.hbar * self.c)
        )

    # derived masses
    @property
    def M(self) -> float:
        return self.m_N + self.m_e

    @property
    def mu(self) -> float:
        return self.m_N * self.m_e / (self.m_N + self.m_e)

    @property
    def mu_star(self) -> float:
        return self.m_N * self.m_e / (self.m_N - self.m_e)

    # frequencies
    @property
    def omega(self) -> np.ndarray:
        return np.array([self.omega_x, self.omega_y, self.omega_z])

    @property
    def omega_sum(self) -> float:
        return self.omega_x + self.omega_y + self.omega_z

    @property
    def omega_0(self) -> float:
        """Mean oscillator frequency."""
        return self.omega_sum / 3.0

    @property
    def omega_prod(self) -> float:
        return self.omega_x * self.omega_y * self.omega_z

    @property
    def E0(self) -> float:
        """Unperturbed ground-state energy of the oscillator."""
        return 0.5 * self.hbar * self.omega_sum

    @property
    def B0_vec(self) -> np.ndarray:
        return np.array(self.B0)

    @property
    def Q0_vec(self) -> np.ndarray:
        return np.array(self.Q0)

    @property
    def B0_norm(self) -> float:
        return float(np.linalg.norm(self.B0))

    def replace(self, **changes: Any) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def with_omegas(self, omega) -> "ModelParams":
        wx, wy, wz = _vec3(omega, "omega")
        return self.replace(omega_x=wx, omega_y=wy, omega_z=wz)

    def with_dimensionless(self, curlyC: float | None = None, curlyB0=None) -> "ModelParams":
        """Return a copy whose C and/or B0 realise the given dimensionless values."""
        changes: dict[str, Any] = {}
        if curlyC is not None:
            changes["C"] = curlyC / _curly_c_per_c(self)
        if curlyB0 is not None:
            changes["B0"] = tuple(np.asarray(curlyB0, dtype=float) / _curly_b_per_b(self))
        return self.replace(**changes)

    def to_si(self) -> dict[str, Any]:
        """Raw SI inputs that rebuild these parameters through ``derive_params``."""
        return {
            "m_N": to_si("mass", self.m_N),
            "m_e": to_si("mass", self.m_e),
            "omega": [to_si("frequency", w) for w in self.omega],
            "C": to_si("chiral_coupling", self.C),
            "B0": [float(b) for b in to_si("magnetic_field", self.B0_vec)],
            "Q0": [float(q) for q in to_si("momentum", self.Q0_vec)],
        }


def _curly_c_per_c(p: ModelParams) -> float:
    return math.sqrt(p.hbar) / ((2.0 * p.mu) ** 1.5 * p.omega_sum * math.sqrt(p.omega_prod))


def _curly_b_per_b(p: ModelParams) -> np.ndarray:
    w = p.omega
    pair = np.array([w[1] * w[2], w[2] * w[0], w[0] * w[1]])
    return p.e / (4.0 * p.mu_star * np.sqrt(pair))


_RAW_KEYS = {"m_N", "m_e", "omega", "omega_x", "omega_y", "omega_z", "C", "B0", "Q0"}


def derive_params(raw: Mapping[str, Any], units: str = "internal") -> ModelParams:
    """Build ``ModelParams`` from raw inputs given in internal or SI units.

    Frequencies may be given either as ``omega`` (three values) or as
    ``omega_x``/``omega_y``/``omega_z``. In SI mode masses are in kg,
    frequencies in rad/s, C in J/m^3, fields in T and momenta in kg m/s.
    """
    unknown = set(raw) - _RAW_KEYS
    if unknown:
        raise NonPositiveInput(f"unrecognised parameter(s): {sorted(unknown)}")
    if "omega" in raw:
        omega = list(raw["omega"])
    else:
        try:
            omega = [raw["omega_x"], raw["omega_y"], raw["omega_z"]]
        except KeyError as exc:
            raise NonPositiveInput(f"missing frequency {exc.args[0]}") from None
    if "m_N" not in raw:
        raise NonPositiveInput("missing nucleus mass m_N")
    vals = {
        "m_N": float(raw["m_N"]),
        "m_e": float(raw.get("m_e", SI_SCALE["mass"] if units == "si" else 1.0)),
        "omega": np.asarray(omega, dtype=float),
        "C": float(raw.get("C", 0.0)),
        "B0": np.asarray(raw.get("B0", (0.0, 0.0, 0.0)), dtype=float),
        "Q0": np.asarray(raw.get("Q0", (0.0, 0.0, 0.0)), dtype=float),
    }
    if units == "si":
        vals["m_N"] = from_si("mass", vals["m_N"])
        vals["m_e"] = from_si("mass", vals["m_e"])
        vals["omega"] = from_si("frequency", vals["omega"])
        vals["C"] = from_si("chiral_coupling", vals["C"])
        vals["B0"] = from_si("magnetic_field", vals["B0"])
        vals["Q0"] = from_si("momentum", vals["Q0"])
    elif units != "internal":
        raise NonPositiveInput(f"unknown unit system {units!r}")
    wx, wy, wz = _vec3(vals["omega"], "omega")
    return ModelParams(
        m_N=vals["m_N"],
        m_e=vals["m_e"],
        omega_x=wx,
        omega_y=wy,
        omega_z=wz,
        C=vals["C"],
        B0=_vec3(vals["B0"], "B0"),
        Q0=_vec3(vals["Q0"], "Q0"),
    )


@dataclass(frozen=True)
class AnisotropySet:
    eta: np.ndarray
    curlyC: float
    curlyB0: np.ndarray
    M_xyz: float
    N_xyz: float

    def eta_of(self, i: str, j: str) -> float:
        return float(self.eta[AXES.index(i), AXES.index(j)])


def eta_matrix(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    return (w[:, None] - w[None, :]) / (w[:, None] + w[None, :])


def m_xyz(eta: np.ndarray) -> float:
    x, y, z = 0, 1, 2
    return float(eta[z, y] * eta[y, x] * eta[x, z])


def n_xyz(eta: np.ndarray) -> float:
    x, y, z = 0, 1, 2
    return float(eta[y, x] * eta[y, z] + eta[z, x] * eta[z, y] + eta[x, y] * eta[x, z])


def anisotropy(p: ModelParams) -> AnisotropySet:
    eta = eta_matrix(p.omega)
    return AnisotropySet(
        eta=eta,
        curlyC=p.C * _curly_c_per_c(p),
        curlyB0=p.B0_vec * _curly_b_per_b(p),
        M_xyz=m_xyz(eta),
        N_xyz=n_xyz(eta),
    )


def default_params(omega_0: float = 1e-4, eta: float = 1e-2, curlyC: float = 1e-3,
                   curlyB: float = 1e-3, axis: int = 2, m_N: float = M_PROTON_OVER_ME) -> ModelParams:
    """Representative molecule with anisotropies of order ``eta``.

    The frequencies are ``omega_0 * (1 - eta, 1, 1 + 1.3 eta)`` rescaled to the
    requested mean, so all three pairwise anisotropies are nonzero.
    """
    w = np.array([1.0 - eta, 1.0, 1.0 + 1.3 * eta])
    w *= omega_0 / w.mean()
    p = ModelParams(m_N=m_N, omega_x=w[0], omega_y=w[1], omega_z=w[2])
    b = np.zeros(3)
    b[axis] = curlyB
    return p.with_dimensionless(curlyC=curlyC, curlyB0=b)
