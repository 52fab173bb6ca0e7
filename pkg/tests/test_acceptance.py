"""Acceptance suite: one printed PASS/FAIL line per criterion.

Each test prints its verdict (observed gap, tolerance, wall time) straight to
the terminal so the lines survive pytest's output capture.
"""

import math
import time

import numpy as np
import pytest

from conftest import bsc_instance, random_instance
from wiretap_exponents import checks
from wiretap_exponents import exponents as ex
from wiretap_exponents.ensemble_sim import empirical_exponent, exhaustive_ensemble_mean
from wiretap_exponents.prob_core import Channel, Distribution, WiretapInstance, conditional_kl, mutual_information
from wiretap_exponents.type_oracle import type_decomposition

SEED = 20240611


def report(capsys, number, title, ok, detail, elapsed, limit):
    ok = ok and elapsed < limit
    with capsys.disabled():
        print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}; {elapsed:.2f}s (limit {limit}s)")
    return ok


def fifty_instances():
    rng = np.random.default_rng(SEED)
    return [random_instance(rng, 4, 4) for _ in range(50)]


def test_01_origin_slope(capsys):
    t0 = time.perf_counter()
    worst, exact_zero = 0.0, True
    h = 1e-5
    for inst in fifty_instances():
        f = lambda lam: ex.f0(inst.p_x, inst.w, lam)
        exact_zero &= f(0.0) == 0.0
        slope = (f(h) - f(-h)) / (2 * h)
        worst = max(worst, abs(slope - mutual_information(inst.p_x, inst.w)))
    ok = exact_zero and worst <= 1e-6
    assert report(capsys, 1, "F0(0)=0 and F0'(0)=I(X;Z), 50 instances", ok,
                  f"F0(0)==0: {exact_zero}, max slope gap {worst:.2e} (tol 1e-6)", time.perf_counter() - t0, 5)


def test_02_zero_threshold(capsys):
    t0 = time.perf_counter()
    worst_below, min_above = 0.0, math.inf
    for inst in fifty_instances():
        mi = mutual_information(inst.p_x, inst.w)
        worst_below = max(worst_below, ex.secrecy_exponent(inst.p_x, inst.w, mi - 0.01).value)
        min_above = min(min_above, ex.secrecy_exponent(inst.p_x, inst.w, mi + 0.05).value)
    ok = worst_below <= 1e-9 and min_above > 1e-4
    assert report(capsys, 2, "E_s zero below I(X;Z), positive above, 50 instances", ok,
                  f"max E_s below {worst_below:.2e} (tol 1e-9), min E_s above {min_above:.2e} (> 1e-4)",
                  time.perf_counter() - t0, 5)


def test_03_min_form_equivalence(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(10):
        inst = random_instance(rng, 4, 2, z_size=2)
        mi = mutual_information(inst.p_x, inst.w)
        for r in (0.5 * mi, mi + 0.02, mi + 0.1, mi + 0.3, mi + 0.8):
            a = ex.secrecy_exponent(inst.p_x, inst.w, r).value
            # Grid only: the analytic minimizer is deliberately left out.
            b = ex.secrecy_exponent_min_form(inst.p_x, inst.w, r, 400, include_analytic=False).value
            worst = max(worst, abs(a - b))
    assert report(capsys, 3, "max form = min form at grid resolution 400, 10 x 5", worst <= 1e-3,
                  f"max gap {worst:.2e} (tol 1e-3)", time.perf_counter() - t0, 60)


def test_04_eb_duality(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    duality_ok, worst_gap, worst_center = True, 0.0, 0.0
    for _ in range(10):
        inst = random_instance(rng, 2, 2, x_size=2, z_size=2)
        res = checks.check_eb_duality(inst, count=7, resolution=200)
        duality_ok &= res.passed
        worst_gap = max(worst_gap, res.gap)
        joint = inst.joint
        p = joint.p_z.probs
        a_star = conditional_kl(joint.post, np.tile(joint.p_x.probs, (2, 1)), p)
        worst_center = max(worst_center, abs(ex.eb_closed_form(joint, p, a_star).value - a_star))
    ok = duality_ok and worst_center <= 1e-9
    assert report(capsys, 4, "E_b closed form vs brute force, 10 instances x 7 levels", ok,
                  f"max gap {worst_gap:.2e} (tol max(1e-3, slack)), |E_b(a*)-a*| {worst_center:.2e} (tol 1e-9)",
                  time.perf_counter() - t0, 120)


def test_05_et_reconciliation(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 5)
    worst, both = 0.0, 0
    for _ in range(10):
        inst = random_instance(rng, 4, 4)
        joint = inst.joint
        mi = mutual_information(inst.p_x, inst.w)
        laws = [joint.p_z.probs] + [rng.dirichlet(np.ones(joint.z_size)) for _ in range(4)]
        for p in laws:
            for r in (0.0, 0.5 * mi, mi + 0.05, mi + 0.3, mi + 1.0):
                t = ex.et(joint, p, r, check=False).value
                pair = ex.e1_e2(joint, p, r)
                m = min(pair.e1.value, pair.e2.value)
                worst = max(worst, abs(m - t))
                both += pair.e2.value > 1e-9 and pair.e2bar.value > 1e-9
    ok = worst <= 1e-9 and both == 0
    assert report(capsys, 5, "E_t = min(E1, E2), 10 x 5 x 5", ok,
                  f"max gap {worst:.2e} (tol 1e-9), cases with E2 and E2bar both positive: {both}",
                  time.perf_counter() - t0, 30)


def binary_cases():
    rng = np.random.default_rng(SEED + 6)
    return [bsc_instance()] + [random_instance(rng, 2, 2, x_size=2, z_size=2) for _ in range(2)]


def test_06_ensemble_mean_exactness(capsys):
    t0 = time.perf_counter()
    worst = max(exhaustive_ensemble_mean(inst, 4, 2).details["mean_output_gap"] for inst in binary_cases())
    assert report(capsys, 6, "E[P_Z|W] = P_Z^n entrywise, n=4, M'=2", worst <= 1e-12,
                  f"max entry gap {worst:.2e} (tol 1e-12)", time.perf_counter() - t0, 30)


def test_07_type_decomposition(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for inst in binary_cases():
        direct = exhaustive_ensemble_mean(inst, 4, 2).estimate
        worst = max(worst, abs(direct - type_decomposition(inst.joint, 4, 2)))
    assert report(capsys, 7, "type decomposition = exhaustive E[D], n=4, M'=2", worst <= 1e-10,
                  f"max gap {worst:.2e} (tol 1e-10)", time.perf_counter() - t0, 60)


def test_08_convexity(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 8)
    worst = -math.inf
    for _ in range(1000):
        inst = random_instance(rng, 4, 4)
        p = rng.dirichlet(np.ones(inst.w.output_size))
        l1, l2 = np.sort(rng.uniform(-3.0, 3.0, 2))
        t = rng.uniform()
        mid = t * l1 + (1 - t) * l2
        f = lambda lam: ex.f0(inst.p_x, inst.w, lam)
        g = lambda lam: ex.g0(inst.joint, p, lam)
        worst = max(worst, f(mid) - t * f(l1) - (1 - t) * f(l2), g(mid) - t * g(l1) - (1 - t) * g(l2))
    assert report(capsys, 8, "F0 and G0 convex in lambda, 1000 probes", worst <= 1e-10,
                  f"max violation {worst:.2e} (tol 1e-10)", time.perf_counter() - t0, 5)


def test_09_gallager(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 9)
    zero_ok, above_ok = True, True
    for _ in range(20):
        inst = random_instance(rng, 4, 4)
        zero_ok &= ex.gallager_e0(inst.p_x, inst.v, 0.0) == 0.0
        above_ok &= ex.gallager_er(inst.p_x, inst.v, mutual_information(inst.p_x, inst.v) + 1e-3).value == 0.0
    bsc_gap = abs(ex.gallager_e0(Distribution.uniform(2), Channel.bsc(0.1), 1.0) + math.log(0.8))
    ok = zero_ok and above_ok and bsc_gap <= 1e-9
    assert report(capsys, 9, "Gallager E0(0)=0, E_r=0 above I(X;Y), BSC E0(1)", ok,
                  f"E0(0)==0: {zero_ok}, E_r zero above capacity: {above_ok}, BSC gap {bsc_gap:.2e} (tol 1e-9)",
                  time.perf_counter() - t0, 2)


def test_10_decay_trend(capsys):
    t0 = time.perf_counter()
    inst = WiretapInstance(Distribution.uniform(2), Channel.bsc(0.1), Channel.bsc(0.1), 0.0, 0.8)
    ns = [4, 6, 8, 10, 12]
    pts = empirical_exponent(inst, ns, 10_000, seed=0xC0FFEE, m_prime_cap=64, workers=4)
    es = ex.secrecy_exponent(inst.p_x, inst.w, 0.8).value
    e = np.array([p.exponent for p in pts])
    slope = float(np.polyfit(ns, e, 1)[0]) if np.all(np.isfinite(e)) else math.nan
    positive = bool(np.all(e > 0))
    in_band = 0.3 * es <= e[-1] <= 1.5 * es
    ok = positive and slope >= 0 and in_band
    seq = ", ".join(f"{v:.4f}" for v in e)
    assert report(capsys, 10, "empirical exponent trend, BSC(0.1), R'=0.8, M'<=64", ok,
                  f"e_n = [{seq}], positive {positive}, slope {slope:.4f} (>= 0), "
                  f"final {e[-1]:.4f} in [{0.3 * es:.4f}, {1.5 * es:.4f}]: {in_band}",
                  time.perf_counter() - t0, 600)
