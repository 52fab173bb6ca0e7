"""Oracle cross-checks run by ``wiretap-exp verify``.

Each check compares a closed form against an independent computation and
reports the observed gap next to its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exponents as ex
from . import type_oracle as to
from .ensemble_sim import exhaustive_ensemble_mean
from .prob_core import JointXZ, WiretapInstance, conditional_kl, mutual_information


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    gap: float
    tolerance: float
    detail: str = ""


def _result(name, gap, tol, detail="") -> CheckResult:
    return CheckResult(name, bool(gap <= tol), float(gap), tol, detail)


def check_origin_slope(instance: WiretapInstance, step: float = 1e-5) -> CheckResult:
    """``F0(0) = 0`` and the central difference at 0 equals ``I(X;Z)``."""
    f = lambda lam: ex.f0(instance.p_x, instance.w, lam)
    if f(0.0) != 0.0:
        return CheckResult("f0_origin_slope", False, abs(f(0.0)), 0.0, "F0(0) != 0")
    slope = (f(step) - f(-step)) / (2 * step)
    return _result("f0_origin_slope", abs(slope - mutual_information(instance.p_x, instance.w)), 1e-6)


def check_zero_threshold(instance: WiretapInstance) -> CheckResult:
    mi = mutual_information(instance.p_x, instance.w)
    below = ex.secrecy_exponent(instance.p_x, instance.w, max(mi - 0.01, 0.0)).value
    above = ex.secrecy_exponent(instance.p_x, instance.w, mi + 0.05).value
    ok = below <= ex.ZERO_EXP_TOL and above > 1e-4
    return CheckResult("zero_threshold", ok, below, ex.ZERO_EXP_TOL, f"E_s above threshold = {above:.3g}")


def check_min_form(instance: WiretapInstance, rates, resolution: int | None = None) -> CheckResult:
    k = instance.w.output_size
    if resolution is None:
        resolution = {2: 400, 3: 60}.get(k, 12)
    gap = 0.0
    for r in rates:
        a = ex.secrecy_exponent(instance.p_x, instance.w, r).value
        b = ex.secrecy_exponent_min_form(instance.p_x, instance.w, r, resolution).value
        gap = max(gap, abs(a - b))
    return _result("min_form_equivalence", gap, 1e-3, f"grid resolution {resolution}")


def eb_levels(joint: JointXZ, p, count: int = 7) -> np.ndarray:
    """Evenly spaced levels inside the reachable range of ``A(P; Q)``."""
    lo, hi = ex.slope_range(joint, p)
    if hi - lo <= 1e-12:
        return np.array([lo])
    t = np.linspace(0.05, 0.95, count)
    return lo + t * (hi - lo)


def check_eb_duality(instance: WiretapInstance, p=None, count: int = 7, resolution: int = 200) -> CheckResult:
    """Closed form versus grid minimum; also requires the grid never to undercut it."""
    joint = instance.joint
    p = joint.p_z.probs if p is None else p
    if joint.x_size * joint.z_size > 9:
        return CheckResult("eb_duality", True, 0.0, 0.0, "skipped: alphabets too large")
    if joint.x_size * joint.z_size > 4:
        resolution = min(resolution, 30)
    gap, tol = 0.0, 1e-3
    for a in eb_levels(joint, p, count):
        closed = ex.eb_closed_form(joint, p, float(a))
        oracle = to.eb_bruteforce(joint, p, float(a), resolution, closed.arg_lambda)
        tol = max(tol, oracle.slack)
        # The grid is a subset of the feasible set, so it may not undercut the closed form.
        gap = max(gap, abs(closed.value - oracle.value), closed.value - oracle.grid_value)
    return _result("eb_duality", gap, tol, f"{count} levels, grid resolution {resolution}")


def check_eb_at_center(instance: WiretapInstance, p=None) -> CheckResult:
    joint = instance.joint
    p = joint.p_z.probs if p is None else np.asarray(p)
    a_star = conditional_kl(joint.post, np.tile(joint.p_x.probs, (joint.z_size, 1)), p)
    return _result("eb_equality_at_center", abs(ex.eb_closed_form(joint, p, a_star).value - a_star), 1e-9)


def _convexity_gap(fn, rng, lo, hi, probes) -> float:
    worst = 0.0
    for _ in range(probes):
        l1, l2 = np.sort(rng.uniform(lo, hi, 2))
        t = rng.uniform()
        mid = fn(t * l1 + (1 - t) * l2)
        worst = max(worst, mid - (t * fn(l1) + (1 - t) * fn(l2)))
    return worst


def check_convexity(instance: WiretapInstance, probes: int = 200, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    joint = instance.joint
    p = rng.dirichlet(np.ones(joint.z_size))
    g1 = _convexity_gap(lambda lam: ex.f0(instance.p_x, instance.w, lam), rng, -1.0, 2.0, probes)
    g2 = _convexity_gap(lambda lam: ex.g0(joint, p, lam), rng, -5.0, 5.0, probes)
    return _result("convexity", max(g1, g2, 0.0), 1e-10, f"{probes} probes each for F0 and G0")


def check_et_reconciliation(instance: WiretapInstance, rates, n_laws: int = 3, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    joint = instance.joint
    laws = [joint.p_z.probs] + [rng.dirichlet(np.ones(joint.z_size)) for _ in range(n_laws - 1)]
    gap, both_positive = 0.0, 0
    for p in laws:
        for r in rates:
            t = ex.et(joint, p, r, check=False).value
            pair = ex.e1_e2(joint, p, r)
            m = min(pair.e1.value, pair.e2.value)
            if math.isfinite(m):
                gap = max(gap, abs(m - t))
            if pair.e2.value > 1e-9 and pair.e2bar.value > 1e-9:
                both_positive += 1
    return CheckResult("et_reconciliation", gap <= 1e-9 and both_positive == 0, gap, 1e-9,
                       f"{both_positive} cases with both E2 and E2bar positive")


def _exhaustive_params(instance: WiretapInstance, fast: bool) -> tuple[int, int]:
    k = instance.p_x.alphabet_size
    n = 3 if fast else 4
    while n > 1 and k ** (n * 2) > 2**16:
        n -= 1
    return n, 2


def check_ensemble_mean(instance: WiretapInstance, fast: bool = True) -> CheckResult:
    n, mp = _exhaustive_params(instance, fast)
    res = exhaustive_ensemble_mean(instance, n, mp)
    return _result("ensemble_mean_exactness", res.details["mean_output_gap"], 1e-12, f"n={n}, M'={mp}")


def check_type_decomposition(instance: WiretapInstance, fast: bool = True) -> CheckResult:
    n, mp = _exhaustive_params(instance, fast)
    direct = exhaustive_ensemble_mean(instance, n, mp).estimate
    by_type = to.type_decomposition(instance.joint, n, mp)
    return _result("type_decomposition", abs(direct - by_type), 1e-10, f"n={n}, M'={mp}, E[D]={direct:.6g}")


def check_gallager(instance: WiretapInstance) -> CheckResult:
    e00 = ex.gallager_e0(instance.p_x, instance.v, 0.0)
    above = ex.gallager_er(instance.p_x, instance.v, mutual_information(instance.p_x, instance.v) + 1e-3).value
    return _result("gallager", max(abs(e00), above), 0.0)


def run_all(instance: WiretapInstance, level: str = "fast") -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    fast = level == "fast"
    mi = mutual_information(instance.p_x, instance.w)
    rates = [mi + d for d in ((0.02, 0.2) if fast else (0.01, 0.05, 0.1, 0.3, 0.6))] + [max(mi - 0.05, 0.0)]
    return [
        check_origin_slope(instance),
        check_zero_threshold(instance),
        check_min_form(instance, rates),
        check_eb_duality(instance, count=3 if fast else 7),
        check_eb_at_center(instance),
        check_convexity(instance, probes=100 if fast else 1000),
        check_et_reconciliation(instance, rates, n_laws=2 if fast else 5),
        check_ensemble_mean(instance, fast),
        check_type_decomposition(instance, fast),
        check_gallager(instance),
    ]
