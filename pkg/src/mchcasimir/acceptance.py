"""Acceptance checks, one per criterion, shared by the test suite and ``selftest``.

Each check returns a ``CheckResult``; its ``line()`` is deterministic (no
timings, no paths), so repeated runs print identical text.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import energy, fock, perturbation, qed, semiclassical
from .params import default_params

RUNTIME_LIMIT = 60.0


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number}] {self.name}: {self.detail}"


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb else float(np.linalg.norm(a))


def check_state_oracle() -> CheckResult:
    p = default_params()
    basis = fock.build_basis(8)
    t0 = time.perf_counter()
    worst = 0.0
    for axis in range(3):
        num = perturbation.numeric_coefficient_blocks(p, basis, axis, step=1e-3)
        for block, coeffs in perturbation.analytic_terms(p, axis).items():
            for st, ref in coeffs.items():
                got = num[block][basis.index(st)]
                worst = max(worst, abs(got - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed <= RUNTIME_LIMIT
    return CheckResult(1, "perturbed-state oracle", ok,
                       f"max relative coefficient error {worst:.2e} (limit 1e-4, n_max=8, step=1e-3)")


def check_semiclassical_closed() -> CheckResult:
    p = default_params()
    t0 = time.perf_counter()
    closed = semiclassical.sc_momentum_closed(p)
    errs = []
    for ladder in (semiclassical.QuadratureSpec().eps_ladder, semiclassical.ALT_LADDER):
        num = semiclassical.sc_momentum_numeric(p, semiclassical.QuadratureSpec(eps_ladder=ladder))
        errs.append(_rel(num, closed))
    fp = semiclassical.sc_momentum_finite_part(p)
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-3 and elapsed <= RUNTIME_LIMIT
    return CheckResult(2, "semiclassical closed form", ok,
                       f"relative error vs closed form {errs[0]:.4e} / {errs[1]:.4e} for the two eps "
                       f"ladders (limit 1e-3); numeric/closed ratio {num[2] / closed[2]:.6f}; "
                       f"finite-part/closed ratio {fp[2] / closed[2]:.6f}")


def check_kernel_integrals() -> CheckResult:
    ws = (1e-3, 1e-4, 1e-5)
    errs = []
    for w in ws:
        a = qed.KernelArgs(E1=-w, E2=-2 * w)
        num, log = qed.kernel_integral_numeric(a), qed.kernel_integral_log(a)
        errs.append(abs(num - log) / abs(log))
    slope = float(np.polyfit(np.log(ws), np.log(errs), 1)[0])
    within = all(e <= 5 * w for e, w in zip(errs, ws))
    ok = within and abs(slope - 1) <= 0.2
    shown = ", ".join(f"{e:.3e}" for e in errs)
    return CheckResult(3, "kernel integrals", ok,
                       f"relative errors [{shown}] at hbar*omega0/mc^2 = 1e-3, 1e-4, 1e-5 "
                       f"(limit 5x each); log-log slope {slope:.3f} (target 1 +- 0.2)")


RATIONAL_SETS = ((Fraction(0), Fraction(1), Fraction(3)),
                 (Fraction(-1), Fraction(0), Fraction(13, 10)),
                 (Fraction(2), Fraction(-5), Fraction(7)))


def check_longitudinal_average() -> CheckResult:
    eta = 1e-2
    p = default_params(eta=eta).replace(B0=(0.3e-6, -0.5e-6, 0.8e-6))
    quad = qed.p_par_rot_quadrature(p)
    closed = qed.p_par_rot(p)
    rel = _rel(quad, closed)
    worst = 0.0
    for d in RATIONAL_SETS:
        c = qed.par_trace_series(d, order=4)
        worst = max(worst, float(abs(c[1])), float(abs(c[2])))
    ok = rel <= 5 * eta and worst <= 1e-12
    return CheckResult(4, "longitudinal rotational average", ok,
                       f"quadrature vs closed relative difference {rel:.2e} (limit {5 * eta:g}); "
                       f"largest exact O(eta) / O(eta^2) trace coefficient {worst:g}")


def check_transverse_cross() -> CheckResult:
    p = default_params()
    v = qed.p_perp_fock_rot(p, fock.build_basis(10))
    br = qed.p_perp_rot(p, "bracket")
    ap = qed.p_perp_rot(p, "approx")
    r_br, r_ap = v[2] / br[2], v[2] / ap[2]
    rel = _rel(v, br)
    supports = [name for name, r in (("bracket", r_br), ("-1.06/144", r_ap)) if abs(r - 1) <= 0.02]
    verdict = "supports " + " and ".join(supports) if supports else "supports neither printed constant"
    return CheckResult(5, "transverse cross-validation", rel <= 0.02,
                       f"Fock/bracket ratio {r_br:.4e}, Fock/approx ratio {r_ap:.4e} "
                       f"(limit 2% vs bracket, n_max=10); printed constants differ by "
                       f"{qed.P_PERP_BRACKET / qed.P_PERP_APPROX:.2f}x; verdict: {verdict}")


def check_scaling_law() -> CheckResult:
    ws = np.logspace(-5, -3, 9)
    ratios = []
    for w in ws:
        p = default_params(omega_0=float(w))
        ratios.append(np.linalg.norm(qed.p_perp_rot(p)) / np.linalg.norm(semiclassical.sc_momentum_closed(p)))
    slope = float(np.polyfit(np.log(1 / ws), np.log(ratios), 1)[0])
    return CheckResult(6, "scaling law", abs(slope - 2) <= 0.05,
                       f"fitted exponent {slope:.4f} over omega0 in [1e-5, 1e-3] mc^2/hbar (target 2 +- 0.05)")


def energy_cases(n: int = 100, seed: int = 20240607):
    """Fixed-seed grid of (Q0, B0 vector) cases around the default molecule."""
    rng = np.random.default_rng(seed)
    base = default_params()
    kappa = np.linalg.norm(energy.total_momentum(base, 1.0))
    cases = []
    for _ in range(n):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        B = base.B0_norm * 10 ** rng.uniform(-1, 1)
        q = rng.normal(size=3)
        q *= kappa * B * 10 ** rng.uniform(-2, 2) / np.linalg.norm(q)
        cases.append(base.replace(B0=tuple(B * d), Q0=tuple(q)))
    return cases


def check_energy_balance() -> CheckResult:
    fails = 0
    worst = 0.0
    for p in energy_cases():
        w = energy.magnetization_work(p.B0_norm, p.Q0_vec, p, n_steps=10_000)
        d = energy.delta_e_kin(p.B0_norm, p.Q0_vec, p)
        r = abs(w - d) / abs(d)
        worst = max(worst, r)
        fails += r > 1e-7
    return CheckResult(7, "energy balance", fails == 0,
                       f"{fails} of 100 cases above 1e-7; worst relative difference {worst:.2e}")


def symmetry_checks() -> dict[str, bool]:
    p = default_params().replace(B0=(0.2e-6, -0.4e-6, 0.9e-6), Q0=(1e-9, 0.0, -2e-9))
    iso = p.with_omegas([p.omega_0] * 3)
    pC, pB = p.replace(C=-p.C), p.replace(B0=tuple(-p.B0_vec))
    small = fock.build_basis(4)
    kq = qed.KQuadrature(n_panels=30, order=16, check_order=12)
    forms = {
        "perp_rot": lambda q: qed.p_perp_rot(q),
        "par_rot": qed.p_par_rot,
        "par_fixed": qed.p_par_fixed,
        "sc_closed": semiclassical.sc_momentum_closed,
        "total_closed": qed.p_total_closed,
        "optical": qed.p_cas_optical,
    }
    out = {}
    for name, f in forms.items():
        ref = f(p)
        scale = np.linalg.norm(ref)
        out[f"{name} odd in C"] = np.linalg.norm(f(pC) + ref) <= 1e-14 * scale
        out[f"{name} odd in B0"] = np.linalg.norm(f(pB) + ref) <= 1e-14 * scale
        out[f"{name} zero when isotropic"] = np.linalg.norm(f(iso)) <= 1e-14 * scale
    fk = qed.transverse_momentum(p, small, kq)
    fk_scale = np.linalg.norm(fk)
    out["fock transverse odd in C"] = np.linalg.norm(qed.transverse_momentum(pC, small, kq) + fk) <= 1e-6 * fk_scale
    # B0 -> -B0 with C fixed: the O(C B) part flips, the O(C) and O(B) parts vanish
    out["fock transverse odd in B0"] = np.linalg.norm(qed.transverse_momentum(pB, small, kq) + fk) <= 1e-6 * fk_scale
    # the O(C B) tensor trace, against the anisotropic one on the same grid
    tr_aniso = qed.p_perp_tensor(p, small, kq).trace_over_3()
    tr_iso = qed.p_perp_tensor(iso, small, kq).trace_over_3()
    out["fock transverse zero when isotropic"] = abs(tr_iso) <= 1e-3 * abs(tr_aniso)
    # longitudinal part in the equal-mass limit (exact equality is not a valid parameter set)
    ref = np.linalg.norm(qed.p_par_rot(p))
    near = p.replace(m_N=p.m_e * (1 + 1e-9))
    out["par_rot vanishes as m_N -> m_e"] = np.linalg.norm(qed.p_par_rot(near)) <= 1e-8 * ref
    out["par_fixed vanishes as m_N -> m_e"] = (np.linalg.norm(qed.p_par_fixed(near))
                                               <= 1e-8 * np.linalg.norm(qed.p_par_fixed(p)))
    length = math.sqrt(p.hbar / (p.mu * p.omega_0))
    r_an = perturbation.position_expectation_to_order(p)
    H = fock.hamiltonian(fock.build_basis(6), p)
    r_num = perturbation.position_expectation(
        perturbation.ground_state_numeric(H, fock.build_basis(6), p.hbar * p.omega_0), p)
    out["<r> = 0 analytic state"] = np.linalg.norm(r_an) <= 1e-12 * length
    out["<r> = 0 numeric state"] = np.linalg.norm(r_num) <= 1e-10 * length
    rep = qed.p_cas_total(p)
    out["P_Abr = 0"] = np.linalg.norm(rep.P_abr) == 0.0
    scale = max(np.abs(rep.K).max(), np.abs(rep.P_total).max())
    out["K = P_kin + P_total + P_Abr"] = np.abs(rep.K_residual).max() <= 4 * np.finfo(float).eps * scale
    rest = qed.p_cas_total(p.replace(Q0=(0.0, 0.0, 0.0)))
    out["P_kin = -P_total from rest"] = bool(np.all(rest.P_kin == -rest.P_total))
    return {k: bool(v) for k, v in out.items()}


def check_symmetry() -> CheckResult:
    res = symmetry_checks()
    bad = [k for k, v in res.items() if not v]
    detail = f"{len(res) - len(bad)} of {len(res)} symmetry checks hold"
    if bad:
        detail += "; failing: " + "; ".join(bad)
    return CheckResult(8, "symmetry suite", not bad, detail)


def check_determinism() -> CheckResult:
    from . import cli

    # the Fock cross-validation is left out of the repeated selftest to keep runtime bounded
    first = cli.selftest_lines(exclude=(5, 9))
    second = cli.selftest_lines(exclude=(5, 9))
    cfg = cli.RunConfig.from_dict({"pipelines": ["semiclassical", "qed-analytic", "energy"]})
    a = cli.sweep_csv(cfg, "B0_z", 1e-7, 1e-6, 5)
    b = cli.sweep_csv(cfg, "B0_z", 1e-7, 1e-6, 5)
    ok = first == second and a == b
    return CheckResult(9, "determinism", ok,
                       f"selftest repeat identical: {first == second}; sweep CSV repeat identical: {a == b}")


CHECKS: tuple[tuple[int, str, Callable[[], CheckResult]], ...] = (
    (1, "state_oracle", check_state_oracle),
    (2, "semiclassical_closed", check_semiclassical_closed),
    (3, "kernel_integrals", check_kernel_integrals),
    (4, "longitudinal_average", check_longitudinal_average),
    (5, "transverse_cross", check_transverse_cross),
    (6, "scaling_law", check_scaling_law),
    (7, "energy_balance", check_energy_balance),
    (8, "symmetry", check_symmetry),
    (9, "determinism", check_determinism),
)


def run_checks(name_filter: str | None = None, exclude=()) -> list[CheckResult]:
    out = []
    for number, key, fn in CHECKS:
        if number in exclude:
            continue
        if name_filter and name_filter not in key and name_filter != str(number):
            continue
        out.append(fn())
    return out
