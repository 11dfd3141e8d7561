"""Command-line front end: config validation, single runs, sweeps and the self-test.

All data files are written in internal units (hbar = c = m_e = eps0 = 1).
Run metadata goes into a ``provenance.json`` sidecar so that the CSV itself
is reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

from . import energy, fock, qed, semiclassical
from .errors import CasimirError, InvariantViolation, ParseError, RangeError, UnknownField
from .params import ModelParams, default_params, derive_params, from_si

PIPELINES = ("semiclassical", "qed-analytic", "qed-fock", "energy")
SWEEP_PARAMS = ("B0", "B0_x", "B0_y", "B0_z", "Q0_x", "Q0_y", "Q0_z", "C", "curlyC", "omega_0", "m_N")
MOLECULE_KEYS = {"m_N", "m_e", "omega", "omega_x", "omega_y", "omega_z", "C", "B0", "Q0",
                 "curlyC", "curlyB0"}

_DEFAULTS: dict[str, Any] = {
    "units": "internal",
    "molecule": None,
    "n_max": 10,
    "quadrature": {"eps_ladder": list(semiclassical.QuadratureSpec().eps_ladder), "rel_tol": 1e-5},
    "k_quadrature": {"n_panels": 59, "order": 24, "dispersion": "full", "k_max": None},
    "energy": {"n_steps": 10_000},
    "perp_form": "bracket",
    "pipelines": ["semiclassical", "qed-analytic", "energy"],
    "sweep": None,
    "output": {"dir": "out", "csv": "results.csv"},
}

_SUBKEYS = {
    "quadrature": {"eps_ladder", "rel_tol"},
    "k_quadrature": {"n_panels", "order", "dispersion", "k_max"},
    "energy": {"n_steps"},
    "sweep": {"param", "from", "to", "steps"},
    "output": {"dir", "csv"},
}

VEC = ("x", "y", "z")
CONSISTENCY_KEYS = ("combined_vs_par_plus_bracket", "combined_vs_par_plus_approx",
                    "optical_vs_combined", "optical_vs_par_plus_approx", "optical_vs_par_plus_bracket",
                    "fock_vs_bracket", "fock_vs_approx")


def _vec_cols(name: str) -> list[str]:
    return [f"{name}_{a}" for a in VEC]


COLUMNS = (
    ["sweep_param", "sweep_value", "n_max", "eps_ladder", "sc_rel_tol", "k_panels", "k_order",
     "dispersion", "perp_form", "n_steps"]
    + _vec_cols("P_perp") + _vec_cols("P_par") + _vec_cols("P_total") + _vec_cols("P_sc")
    + _vec_cols("P_perp_fock") + _vec_cols("P_kin") + _vec_cols("P_abr") + _vec_cols("K")
    + ["K_residual", "Delta_E_kin", "W_B0", "E_lamb_par", "E_lamb_perp", "E_diamag", "energy_residual"]
    + [f"res_{k}" for k in CONSISTENCY_KEYS]
)


# --- configuration -----------------------------------------------------------


def _merge(section: str, given: Any) -> Any:
    default = _DEFAULTS[section]
    if isinstance(default, dict) or section in _SUBKEYS:
        if given is None:
            return None if default is None else dict(default)
        if not isinstance(given, dict):
            raise ParseError(f"section {section!r} must be an object")
        for key in given:
            if key not in _SUBKEYS[section]:
                raise UnknownField(f"{section}.{key}")
        out = dict(default or {})
        out.update(given)
        return out
    return default if given is None else given


def _finite(name: str, v: Any) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise RangeError(f"{name} must be a number, got {v!r}") from None
    if not math.isfinite(x):
        raise RangeError(f"{name} must be finite")
    return x


@dataclass(frozen=True)
class RunConfig:
    units: str = "internal"
    molecule: dict | None = None
    n_max: int = 10
    quadrature: dict = field(default_factory=lambda: dict(_DEFAULTS["quadrature"]))
    k_quadrature: dict = field(default_factory=lambda: dict(_DEFAULTS["k_quadrature"]))
    energy: dict = field(default_factory=lambda: dict(_DEFAULTS["energy"]))
    perp_form: str = "bracket"
    pipelines: tuple = ("semiclassical", "qed-analytic", "energy")
    sweep: dict | None = None
    output: dict = field(default_factory=lambda: dict(_DEFAULTS["output"]))

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ParseError("config root must be a JSON object")
        for key in raw:
            if key not in _DEFAULTS:
                raise UnknownField(key)
        vals = {k: _merge(k, raw.get(k)) for k in _DEFAULTS}
        if vals["units"] not in ("internal", "si"):
            raise RangeError(f"units must be 'internal' or 'si', got {vals['units']!r}")
        mol = vals["molecule"]
        if mol is not None:
            if not isinstance(mol, dict):
                raise ParseError("molecule must be an object")
            for key in mol:
                if key not in MOLECULE_KEYS:
                    raise UnknownField(f"molecule.{key}")
            for key in ("m_N", "m_e", "omega_x", "omega_y", "omega_z"):
                if key in mol and _finite(f"molecule.{key}", mol[key]) <= 0:
                    raise RangeError(f"molecule.{key} must be positive, got {mol[key]!r}")
            if "omega" in mol:
                om = mol["omega"]
                if not isinstance(om, list) or len(om) != 3:
                    raise RangeError("molecule.omega must list three frequencies")
                if any(_finite("molecule.omega", w) <= 0 for w in om):
                    raise RangeError("molecule.omega entries must be positive")
        n_max = vals["n_max"]
        if not isinstance(n_max, int) or isinstance(n_max, bool) or not 0 <= n_max <= fock.N_MAX_LIMIT:
            raise RangeError(f"n_max must be an integer in [0, {fock.N_MAX_LIMIT}], got {n_max!r}")
        quad = vals["quadrature"]
        ladder = quad["eps_ladder"]
        if not isinstance(ladder, list) or len(ladder) < 2:
            raise RangeError("quadrature.eps_ladder must list at least two values")
        ladder = [_finite("quadrature.eps_ladder", e) for e in ladder]
        if any(b >= a for a, b in zip(ladder, ladder[1:])) or ladder[-1] < 1e-8:
            raise RangeError("quadrature.eps_ladder must decrease strictly and stay >= 1e-8")
        quad["eps_ladder"] = ladder
        if _finite("quadrature.rel_tol", quad["rel_tol"]) <= 0:
            raise RangeError("quadrature.rel_tol must be positive")
        kq = vals["k_quadrature"]
        for key in ("n_panels", "order"):
            if not isinstance(kq[key], int) or kq[key] < 2:
                raise RangeError(f"k_quadrature.{key} must be an integer >= 2")
        if kq["dispersion"] not in ("full", "nr"):
            raise RangeError("k_quadrature.dispersion must be 'full' or 'nr'")
        if kq["k_max"] is not None and _finite("k_quadrature.k_max", kq["k_max"]) <= 0:
            raise RangeError("k_quadrature.k_max must be positive")
        en = vals["energy"]
        if not isinstance(en["n_steps"], int) or en["n_steps"] < 2:
            raise RangeError("energy.n_steps must be an integer >= 2")
        if vals["perp_form"] not in ("bracket", "approx"):
            raise RangeError("perp_form must be 'bracket' or 'approx'")
        pipes = vals["pipelines"]
        if not isinstance(pipes, list) or not pipes:
            raise RangeError("pipelines must be a non-empty list")
        for pipe in pipes:
            if pipe not in PIPELINES:
                raise RangeError(f"unknown pipeline {pipe!r}; choose from {PIPELINES}")
        if vals["sweep"] is not None:
            _check_sweep(vals["sweep"])
        return cls(units=vals["units"], molecule=mol, n_max=n_max, quadrature=quad, k_quadrature=kq,
                   energy=en, perp_form=vals["perp_form"],
                   pipelines=tuple(p for p in PIPELINES if p in pipes),
                   sweep=vals["sweep"], output=vals["output"])

    def to_dict(self) -> dict:
        return {
            "units": self.units,
            "molecule": self.molecule,
            "n_max": self.n_max,
            "quadrature": self.quadrature,
            "k_quadrature": self.k_quadrature,
            "energy": self.energy,
            "perp_form": self.perp_form,
            "pipelines": list(self.pipelines),
            "sweep": self.sweep,
            "output": self.output,
        }

    def params(self) -> ModelParams:
        if self.molecule is None:
            return default_params()
        mol = dict(self.molecule)
        curly_c = mol.pop("curlyC", None)
        curly_b = mol.pop("curlyB0", None)
        p = derive_params(mol, self.units)
        if curly_c is not None or curly_b is not None:
            p = p.with_dimensionless(curly_c, curly_b)
        return p


def _check_sweep(sw: dict) -> None:
    missing = {"param", "from", "to", "steps"} - set(sw)
    if missing:
        raise ParseError(f"sweep is missing {sorted(missing)}")
    if sw["param"] not in SWEEP_PARAMS:
        raise RangeError(f"cannot sweep {sw['param']!r}; choose from {SWEEP_PARAMS}")
    lo, hi = _finite("sweep.from", sw["from"]), _finite("sweep.to", sw["to"])
    steps = sw["steps"]
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise RangeError("sweep.steps must be a positive integer")
    if steps > 1 and not lo < hi:
        raise RangeError("sweep range must be ordered: from < to")


def validate_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg} at line {exc.lineno}") from None
    return RunConfig.from_dict(raw)


# --- evaluation ----------------------------------------------------------------


def apply_sweep(p: ModelParams, name: str, value: float, units: str = "internal") -> ModelParams:
    def conv(kind):
        return float(from_si(kind, value)) if units == "si" else float(value)

    if name in ("B0_x", "B0_y", "B0_z", "Q0_x", "Q0_y", "Q0_z"):
        kind = "magnetic_field" if name.startswith("B") else "momentum"
        attr = name[:2]
        vec = list(getattr(p, attr))
        vec[VEC.index(name[-1])] = conv(kind)
        return p.replace(**{attr: tuple(vec)})
    if name == "B0":
        n = p.B0_norm
        d = p.B0_vec / n if n else np.array([0.0, 0.0, 1.0])
        return p.replace(B0=tuple(conv("magnetic_field") * d))
    if name == "C":
        return p.replace(C=conv("chiral_coupling"))
    if name == "curlyC":
        return p.with_dimensionless(curlyC=float(value))
    if name == "omega_0":
        return p.with_omegas(p.omega * conv("frequency") / p.omega_0)
    if name == "m_N":
        return p.replace(m_N=conv("mass"))
    raise RangeError(f"cannot sweep {name!r}")


def _fmt(x) -> str:
    return "%.17g" % x


def compute_row(cfg_dict: dict, param: str | None, value: float | None) -> list[str]:
    cfg = RunConfig.from_dict(cfg_dict)
    p = cfg.params()
    if param is not None:
        p = apply_sweep(p, param, value, cfg.units)
    row: dict[str, str] = {c: "" for c in COLUMNS}
    kq_cfg = cfg.k_quadrature
    row.update({
        "sweep_param": param or "",
        "sweep_value": "" if value is None else _fmt(value),
        "n_max": str(cfg.n_max),
        "eps_ladder": " ".join(_fmt(e) for e in cfg.quadrature["eps_ladder"]),
        "sc_rel_tol": _fmt(cfg.quadrature["rel_tol"]),
        "k_panels": str(kq_cfg["n_panels"]),
        "k_order": str(kq_cfg["order"]),
        "dispersion": kq_cfg["dispersion"],
        "perp_form": cfg.perp_form,
        "n_steps": str(cfg.energy["n_steps"]),
    })

    def put(name, vec):
        for a, v in zip(VEC, vec):
            row[f"{name}_{a}"] = _fmt(v)

    if "semiclassical" in cfg.pipelines:
        spec = semiclassical.QuadratureSpec(eps_ladder=tuple(cfg.quadrature["eps_ladder"]),
                                            rel_tol=cfg.quadrature["rel_tol"])
        put("P_sc", semiclassical.sc_momentum_numeric(p, spec) if p.C and p.B0_norm else np.zeros(3))
    fock_vec = None
    if "qed-fock" in cfg.pipelines:
        kq = qed.KQuadrature(n_panels=kq_cfg["n_panels"], order=kq_cfg["order"],
                             dispersion=kq_cfg["dispersion"], k_max=kq_cfg["k_max"])
        fock_vec = qed.p_perp_fock_rot(p, fock.build_basis(cfg.n_max), kq)
        put("P_perp_fock", fock_vec)
    if "qed-analytic" in cfg.pipelines:
        rep = qed.p_cas_total(p, cfg.perp_form)
        put("P_perp", rep.P_perp)
        put("P_par", rep.P_par)
        put("P_total", rep.P_total)
        put("P_kin", rep.P_kin)
        put("P_abr", rep.P_abr)
        put("K", rep.K)
        resid = float(np.abs(rep.K_residual).max())
        scale = max(float(np.abs(rep.K).max()), float(np.abs(rep.P_total).max()))
        if resid > 4 * np.finfo(float).eps * scale:
            raise InvariantViolation(f"pseudo-momentum not conserved: residual {resid:.3e}")
        row["K_residual"] = _fmt(resid)
        cons = qed.consistency_matrix(p, fock_vec)
        for k in CONSISTENCY_KEYS:
            if k in cons:
                row[f"res_{k}"] = _fmt(cons[k])
    if "energy" in cfg.pipelines:
        led = energy.energy_ledger(p, cfg.energy["n_steps"], cfg.perp_form)
        row.update({
            "Delta_E_kin": _fmt(led.Delta_E_kin),
            "W_B0": _fmt(led.W_B0),
            "E_lamb_par": _fmt(led.E_lamb_par),
            "E_lamb_perp": _fmt(led.E_lamb_perp),
            "E_diamag": _fmt(led.E_diamag),
            "energy_residual": _fmt(led.balance_residual),
        })
    return [row[c] for c in COLUMNS]


def _sweep_values(lo: float, hi: float, steps: int) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, steps)]


def _rows_to_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def sweep_csv(cfg: RunConfig, param: str, lo: float, hi: float, steps: int, jobs: int = 1) -> str:
    _check_sweep({"param": param, "from": lo, "to": hi, "steps": steps})
    values = _sweep_values(lo, hi, steps)
    d = cfg.to_dict()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(compute_row, [d] * steps, [param] * steps, values))
    else:
        rows = [compute_row(d, param, v) for v in values]
    return _rows_to_csv(rows)


def compute_csv(cfg: RunConfig) -> str:
    return _rows_to_csv([compute_row(cfg.to_dict(), None, None)])


def provenance(cfg: RunConfig, command: str, extra: dict | None = None) -> str:
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    info = {
        "package": "mchcasimir",
        "distribution_version": version,
        "command": command,
        "units": "internal (hbar = c = m_e = eps0 = 1)",
        "config": cfg.to_dict(),
        "columns": COLUMNS,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    if extra:
        info.update(extra)
    return json.dumps(info, indent=2, sort_keys=True) + "\n"


def _write_outputs(out_dir: Path, csv_name: str, text: str, prov: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / csv_name, "w", newline="") as fh:
        fh.write(text)
    (out_dir / "provenance.json").write_text(prov)


def selftest_lines(name_filter: str | None = None, exclude=()) -> list[str]:
    from .acceptance import run_checks

    return [r.line() for r in run_checks(name_filter, exclude)]


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mchcasimir",
                                 description="Casimir momentum of a chiral molecule in a magnetic field")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compute", help="evaluate one parameter point")
    c.add_argument("--config", required=True)
    c.add_argument("--out", help="output directory (defaults to output.dir of the config)")
    s = sub.add_parser("sweep", help="scan one parameter")
    s.add_argument("--config", required=True)
    s.add_argument("--param")
    s.add_argument("--from", dest="lo", type=float)
    s.add_argument("--to", dest="hi", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--out", help="output directory; the CSV goes to stdout when omitted")
    s.add_argument("--jobs", type=int, default=1)
    v = sub.add_parser("validate", help="check a config and print it with defaults applied")
    v.add_argument("--config", required=True)
    t = sub.add_parser("selftest", help="run the acceptance checks")
    t.add_argument("--filter", dest="name_filter")
    return ap


def _main(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        lines = selftest_lines(args.name_filter)
        for line in lines:
            print(line)
        return 0 if all(line.startswith("PASS") for line in lines) else 1
    cfg = validate_config(args.config)
    if args.command == "validate":
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return 0
    if args.command == "compute":
        out = Path(args.out or cfg.output["dir"])
        _write_outputs(out, cfg.output["csv"], compute_csv(cfg), provenance(cfg, "compute"))
        return 0
    sw = dict(cfg.sweep or {})
    for key, val in (("param", args.param), ("from", args.lo), ("to", args.hi), ("steps", args.steps)):
        if val is not None:
            sw[key] = val
    _check_sweep(sw)
    if args.jobs < 1:
        raise RangeError("--jobs must be positive")
    text = sweep_csv(cfg, sw["param"], float(sw["from"]), float(sw["to"]), sw["steps"], args.jobs)
    if args.out:
        _write_outputs(Path(args.out), cfg.output["csv"], text, provenance(cfg, "sweep", {"sweep": sw}))
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _main(args)
    except CasimirError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
