"""Secrecy, type-conditional and random-coding exponents.

All exponents are in nats. The one-dimensional optimizations are over concave
objectives (the log-moment functions below are convex in their parameter), so
golden-section search with explicit endpoint evaluation is exact up to the
argument tolerance.

Two pieces of vocabulary used throughout:

``g0``
    ``sum_z P(z) ln sum_x P_{X|Z}(x|z) exp(lam * iota(x,z))`` where
    ``iota(x,z) = ln W(z|x)/P_Z(z)`` is the information density. Pairs with
    ``P_{X|Z}(x|z) = 0`` are dropped for every ``lam``.
``f0``
    ``ln sum_z P_Z(z) sum_x P_{X|Z}(x|z) exp(lam * iota(x,z))``.

For one-sided duals over an unbounded parameter range (``lam >= 0``,
``lam <= 1``, ``rho`` real) the search starts on ``[-rho_max, rho_max]``.
Whether the true supremum is ``+inf`` is decided analytically from the
asymptotic slopes of ``g0``. When it is finite but the optimum sits on a
clamp, that side is widened (up to ``RHO_LIMIT``); an optimum still on the
clamp after that is returned with ``clamped=True`` and is only a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .optimize import INV_PHI, INV_PHI2, TIE_TOL, golden_max
from .prob_core import (
    Channel,
    Distribution,
    JointXZ,
    WiretapInstance,
    conditional_kl,
    kl_divergence,
    mutual_information,
    output_marginal,
)

RHO_MAX = 50.0
# A clamped optimum triggers an eightfold widening of that side, up to this limit.
RHO_LIMIT = 1e7
ZERO_EXP_TOL = 1e-9
# Slack when comparing a level or rate against the asymptotic slope range of g0.
SLOPE_TOL = 1e-12
CLAMP_TOL = 1e-6

INF = float("inf")


@dataclass(frozen=True)
class ExponentResult:
    """Outcome of a one-dimensional exponent optimization.

    ``boundary_hit`` is set when the optimizer ended on an endpoint of its
    search interval; ``clamped`` additionally marks that endpoint as an
    artificial ``rho_max`` clamp, in which case ``value`` is a lower bound.
    """

    value: float
    arg_lambda: float | None = None
    boundary_hit: bool = False
    clamped: bool = False
    interval: tuple[float, float] | None = None
    argmin: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _p_vec(joint: JointXZ, p) -> np.ndarray:
    p = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    if p.shape != (joint.z_size,):
        raise ValueError(f"P must live on the Z alphabet of size {joint.z_size}")
    return p


def _log_terms(joint: JointXZ) -> tuple[np.ndarray, np.ndarray]:
    """``ln P_{X|Z}`` and ``iota`` with dropped pairs set to ``-inf`` / ``0``."""
    with np.errstate(divide="ignore"):
        lp = np.log(joint.post)
    dens = np.where(np.isfinite(lp), joint.info_density, 0.0)
    return lp, dens


def g0_rows(joint: JointXZ, lam) -> np.ndarray:
    """Per-symbol log-moments ``ln sum_x P_{X|Z}(x|z)^(1+lam) P_X(x)^(-lam)``.

    ``lam`` may be an array; the result has shape ``lam.shape + (|Z|,)``.
    """
    lam = np.asarray(lam, dtype=float)
    lp, dens = _log_terms(joint)
    terms = lp + lam[..., None, None] * dens
    out = logsumexp(terms, axis=-1)
    return np.where(lam[..., None] == 0.0, 0.0, out)


def g0(joint: JointXZ, p, lam: float) -> float:
    """``G0(P_{X,Z}, P, lam) = sum_z P(z) ln sum_x P_{X|Z}^(1+lam) P_X^(-lam)``."""
    if lam == 0.0:
        return 0.0
    return float(g0_rows(joint, lam) @ _p_vec(joint, p))


def f0(p_x: Distribution, w: Channel, lam: float) -> float:
    """``F0(P_X, W, lam) = ln sum_z P_Z(z) sum_x P_{X|Z}^(1+lam) P_X^(-lam)``."""
    return _f0_joint(JointXZ.from_channel(p_x, w), lam)


def _f0_joint(joint: JointXZ, lam: float) -> float:
    if lam == 0.0:
        return 0.0
    rows = g0_rows(joint, lam)
    return float(logsumexp(rows + np.log(joint.p_z.probs)))


def slope_range(joint: JointXZ, p) -> tuple[float, float]:
    """Limits of ``d/dlam g0`` as ``lam -> -inf`` and ``lam -> +inf``.

    These bound the finite levels ``A(P; Q)`` reachable by some ``Q``.
    """
    p = _p_vec(joint, p)
    lp, dens = _log_terms(joint)
    support = np.isfinite(lp)
    hi = np.where(support, dens, -np.inf).max(axis=1)
    lo = np.where(support, dens, np.inf).min(axis=1)
    keep = p > 0
    return float(p[keep] @ lo[keep]), float(p[keep] @ hi[keep])


def _maximize(obj, lo: float, hi: float, clamp_lo: bool, clamp_hi: bool, anchor: float | None = 0.0):
    """Golden search plus an anchor point that wins exact ties."""
    x, v, at_end = golden_max(obj, lo, hi)
    if anchor is not None and lo <= anchor <= hi and anchor != x:
        va = obj(anchor)
        if va >= v - TIE_TOL:
            x, v, at_end = anchor, va, anchor in (lo, hi)
    clamped = (clamp_lo and abs(x - lo) <= CLAMP_TOL) or (clamp_hi and abs(x - hi) <= CLAMP_TOL)
    return ExponentResult(
        value=float(v),
        arg_lambda=float(x),
        boundary_hit=bool(at_end or clamped),
        clamped=bool(clamped),
        interval=(lo, hi),
    )


def _maximize_widening(obj, lo: float, hi: float, clamp_lo: bool, clamp_hi: bool) -> ExponentResult:
    """``_maximize`` on a clamped range, widening a clamp the optimum sits on.

    Only called when the supremum is known to be finite, so the optimum
    leaves the clamp once the range covers it (unless it exceeds RHO_LIMIT).
    """
    while True:
        res = _maximize(obj, lo, hi, clamp_lo, clamp_hi)
        if not res.clamped:
            return res
        grow_lo = clamp_lo and abs(res.arg_lambda - lo) <= CLAMP_TOL and lo > -RHO_LIMIT
        grow_hi = clamp_hi and abs(res.arg_lambda - hi) <= CLAMP_TOL and hi < RHO_LIMIT
        if not (grow_lo or grow_hi):
            return res
        lo = max(8.0 * lo, -RHO_LIMIT) if grow_lo else lo
        hi = min(8.0 * hi, RHO_LIMIT) if grow_hi else hi


def _infinite(lo: float, hi: float, at: float) -> ExponentResult:
    return ExponentResult(value=INF, arg_lambda=at, boundary_hit=True, clamped=True, interval=(lo, hi))


def secrecy_exponent(p_x: Distribution, w: Channel, rate_prime: float) -> ExponentResult:
    """``E_s = max_{0<=lam<=1} lam R' - F0(lam)``.

    Exactly zero (at ``lam = 0``) whenever ``R' <= I(X;Z)``.
    """
    return _secrecy_joint(JointXZ.from_channel(p_x, w), rate_prime)


def joint_mutual_information(joint: JointXZ) -> float:
    """``I(X;Z)`` read off a cached joint law."""
    m = joint.matrix.T > 0
    return float(max(0.0, np.sum(joint.matrix.T[m] * joint.info_density[m])))


def _secrecy_joint(joint: JointXZ, rate_prime: float) -> ExponentResult:
    mi = joint_mutual_information(joint)
    if rate_prime <= mi:
        return ExponentResult(0.0, 0.0, True, False, (0.0, 1.0))
    res = _maximize(lambda lam: lam * rate_prime - _f0_joint(joint, lam), 0.0, 1.0, False, False)
    return ExponentResult(max(res.value, 0.0), res.arg_lambda, res.boundary_hit, False, (0.0, 1.0))


def a_value(joint: JointXZ, p, q) -> float:
    """``A(P; Q) = D(Q||P_X|P) - D(Q||P_{X|Z}|P)``; ``-inf`` off the posterior support.

    ``q`` is a ``|Z| x |X|`` stochastic matrix (row ``z`` is ``Q(.|z)``).
    """
    p = _p_vec(joint, p)
    q = q.matrix if isinstance(q, Channel) else np.asarray(q, dtype=float)
    ref_x = np.tile(joint.p_x.probs, (joint.z_size, 1))
    d_post = conditional_kl(q, joint.post, p)
    if math.isinf(d_post):
        return -INF
    return conditional_kl(q, ref_x, p) - d_post


def tilted_posterior(joint: JointXZ, rho: float) -> np.ndarray:
    """``Q(x|z) ∝ P_{X|Z}(x|z) exp(rho iota(x,z))``, the minimizer behind ``E_b``."""
    lp, dens = _log_terms(joint)
    t = lp + rho * dens
    return np.exp(t - logsumexp(t, axis=1, keepdims=True))


def eb_closed_form(joint: JointXZ, p, a: float, rho_max: float = RHO_MAX) -> ExponentResult:
    """``E_b(a) = a + sup_rho {rho a - G0(rho)}``.

    ``+inf`` when ``a`` lies outside the closed range of levels ``A(P; Q)``.
    """
    p = _p_vec(joint, p)
    s_lo, s_hi = slope_range(joint, p)
    if a > s_hi + SLOPE_TOL or a < s_lo - SLOPE_TOL:
        return _infinite(-rho_max, rho_max, rho_max if a > s_hi else -rho_max)
    rows = lambda r: float(g0_rows(joint, r) @ p) if r != 0.0 else 0.0
    res = _maximize_widening(lambda r: r * a - rows(r), -rho_max, rho_max, True, True)
    return ExponentResult(a + max(res.value, 0.0), res.arg_lambda, res.boundary_hit, res.clamped, res.interval)


@dataclass(frozen=True)
class TypeExponents:
    e1: ExponentResult
    e2: ExponentResult
    e2bar: ExponentResult


def _dual(joint, p, rate_prime, lo, hi, clamp_lo, clamp_hi, s_lo, s_hi):
    # lam * R' - G0 grows without bound toward +inf iff R' > s_hi, toward -inf iff R' < s_lo.
    if clamp_hi and rate_prime > s_hi + SLOPE_TOL:
        return _infinite(lo, hi, hi)
    if clamp_lo and rate_prime < s_lo - SLOPE_TOL:
        return _infinite(lo, hi, lo)
    obj = lambda lam: lam * rate_prime - (float(g0_rows(joint, lam) @ p) if lam != 0.0 else 0.0)
    return _maximize_widening(obj, lo, hi, clamp_lo, clamp_hi)


def e1_e2(joint: JointXZ, p, rate_prime: float, rho_max: float = RHO_MAX) -> TypeExponents:
    """``E1 = max_{lam<=1}``, ``E2 = max_{lam>=0}``, ``E2bar = max_{lam<=0}`` of ``lam R' - G0``.

    ``E2bar`` is the dual of ``min_{a<=R'} E_b(a) - a``.
    """
    p = _p_vec(joint, p)
    s_lo, s_hi = slope_range(joint, p)
    args = (s_lo, s_hi)
    return TypeExponents(
        e1=_dual(joint, p, rate_prime, -rho_max, 1.0, True, False, *args),
        e2=_dual(joint, p, rate_prime, 0.0, rho_max, False, True, *args),
        e2bar=_dual(joint, p, rate_prime, -rho_max, 0.0, True, False, *args),
    )


def et(joint: JointXZ, p, rate_prime: float, check: bool = True) -> ExponentResult:
    """``E_t(P_{X,Z}, R', P) = max_{0<=lam<=1} lam R' - G0(P, lam)``.

    With ``check`` the result is compared with ``min(E1, E2)``.
    """
    p = _p_vec(joint, p)
    res = _maximize(
        lambda lam: lam * rate_prime - (float(g0_rows(joint, lam) @ p) if lam != 0.0 else 0.0),
        0.0,
        1.0,
        False,
        False,
    )
    if check:
        pair = e1_e2(joint, p, rate_prime)
        other = min(pair.e1.value, pair.e2.value)
        if math.isfinite(other) and not pair.e1.clamped and not pair.e2.clamped:
            if abs(other - res.value) > 1e-9:
                raise ArithmeticError(f"E_t={res.value!r} disagrees with min(E1, E2)={other!r}")
    return res


def et_batch(joint: JointXZ, ps: np.ndarray, rate_prime: float, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``E_t`` for a stack of output laws ``ps`` (shape ``(B, |Z|)``).

    Runs one golden-section search per row in lock-step. Returns
    ``(values, arg_lambdas)``.
    """
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    B = ps.shape[0]

    def obj(lam):
        return lam * rate_prime - np.einsum("bz,bz->b", g0_rows(joint, lam), ps)

    a = np.zeros(B)
    b = np.ones(B)
    h = 1.0
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = obj(c), obj(d)
    for _ in range(int(math.ceil(math.log(tol) / math.log(INV_PHI)))):
        left = fc >= fd
        h *= INV_PHI
        na = np.where(left, a, c)
        nb = np.where(left, d, b)
        nc = np.where(left, na + INV_PHI2 * h, d)
        nd = np.where(left, c, na + INV_PHI * h)
        nfc = np.where(left, np.nan, fd)
        nfd = np.where(left, fc, np.nan)
        fresh = obj(np.where(left, nc, nd))
        nfc = np.where(left, fresh, nfc)
        nfd = np.where(left, nfd, fresh)
        a, b, c, d, fc, fd = na, nb, nc, nd, nfc, nfd
    x_in = np.where(fc >= fd, c, d)
    f_in = np.maximum(fc, fd)
    f0v, f1v = np.zeros(B), obj(np.ones(B))
    vals = np.stack([f_in, f0v, f1v])
    args = np.stack([x_in, np.zeros(B), np.ones(B)])
    # Endpoints win ties.
    best = np.where(f_in > np.maximum(f0v, f1v) + TIE_TOL, 0, np.where(f1v > f0v, 2, 1))
    idx = np.arange(B)
    return vals[best, idx], args[best, idx]


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the ``k``-simplex with coordinates in ``(1/resolution) Z``."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    from .type_oracle import compositions

    return compositions(resolution, k) / resolution


def optimal_output_law(joint: JointXZ, lam: float) -> np.ndarray:
    """``P(z) ∝ P_Z(z) sum_x P_{X|Z}^(1+lam) P_X^(-lam)``, the minimizing law for fixed ``lam``."""
    t = g0_rows(joint, lam) + np.log(joint.p_z.probs)
    return np.exp(t - logsumexp(t))


def secrecy_exponent_min_form(
    p_x: Distribution,
    w: Channel,
    rate_prime: float,
    grid_resolution: int,
    include_analytic: bool = True,
) -> ExponentResult:
    """``min_P D(P||P_Z) + E_t(P_{X,Z}, R', P)`` over a simplex grid on Z.

    With ``include_analytic`` the optimal law at the max-form's ``lam`` is
    added to the grid. ``argmin`` holds the minimizing ``P`` and
    ``arg_lambda`` the inner maximizer there.
    """
    if grid_resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    joint = JointXZ.from_channel(p_x, w)
    grid = simplex_grid(joint.z_size, grid_resolution)
    if include_analytic:
        lam = _secrecy_joint(joint, rate_prime).arg_lambda
        grid = np.vstack([grid, optimal_output_law(joint, lam)])
    vals, args = et_batch(joint, grid, rate_prime)
    divs = np.array([kl_divergence(row, joint.p_z.probs) for row in grid])
    total = divs + vals
    i = int(np.argmin(total))
    return ExponentResult(
        value=float(max(total[i], 0.0)),
        arg_lambda=float(args[i]),
        boundary_hit=bool(args[i] in (0.0, 1.0)),
        interval=(0.0, 1.0),
        argmin=grid[i].copy(),
    )


def gallager_e0(p_x: Distribution, v: Channel, rho: float) -> float:
    """``E0(rho) = -ln sum_y [sum_x P_X(x) V(y|x)^(1/(1+rho))]^(1+rho)``."""
    if rho == 0.0:
        return 0.0
    with np.errstate(divide="ignore"):
        lv = np.log(v.matrix)
    inner = logsumexp(np.log(p_x.probs)[:, None] + lv / (1.0 + rho), axis=0)
    return float(-logsumexp((1.0 + rho) * inner))


def gallager_er(p_x: Distribution, v: Channel, rate: float) -> ExponentResult:
    """``E_r(rate) = max_{0<=rho<=1} E0(rho) - rho * rate``; zero at or above ``I(X;Y)``."""
    if rate >= mutual_information(p_x, v):
        return ExponentResult(0.0, 0.0, True, False, (0.0, 1.0))
    res = _maximize(lambda r: gallager_e0(p_x, v, r) - r * rate, 0.0, 1.0, False, False)
    return ExponentResult(max(res.value, 0.0), res.arg_lambda, res.boundary_hit, False, (0.0, 1.0))


def corollary_exponent_pair(instance: WiretapInstance) -> tuple[ExponentResult, ExponentResult]:
    """``(E_r(P_X, V, R + R'), E_s(P_X, W, R'))``."""
    rel = gallager_er(instance.p_x, instance.v, instance.rate + instance.rate_prime)
    sec = secrecy_exponent(instance.p_x, instance.w, instance.rate_prime)
    return rel, sec


@dataclass(frozen=True)
class ExponentCurve:
    """Exponent values over an increasing sweep of rates."""

    rates: tuple[float, ...]
    results: tuple[ExponentResult, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ValueError("rates must be strictly increasing")

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.results])


def secrecy_sweep(p_x: Distribution, w: Channel, rates: Sequence[float]) -> ExponentCurve:
    """Evaluate ``E_s`` at each rate; points are independent of each other."""
    joint = JointXZ.from_channel(p_x, w)
    rates = tuple(float(r) for r in rates)
    return ExponentCurve(rates, tuple(_secrecy_joint(joint, r) for r in rates), {"exponent": "E_s"})
