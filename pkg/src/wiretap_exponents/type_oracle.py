"""Method-of-types enumeration and brute-force oracles.

These routines compute, by exhaustive counting at small blocklength, the
quantities that :mod:`wiretap_exponents.exponents` evaluates in closed form:
shell probabilities, the levels ``A(P; Q)`` that classify shells, the exact
moment ``E[U ln U]`` of the normalized output likelihood, and the constrained
divergence minimum ``E_b``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .prob_core import Distribution, JointXZ, WiretapInstance, kl_divergence

TYPE_CAP = 10**6
LEVEL_MERGE_TOL = 1e-12


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured size limit."""


def n_compositions(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def compositions(n: int, k: int, cap: int = TYPE_CAP) -> np.ndarray:
    """All ways to write ``n`` as an ordered sum of ``k`` non-negative integers.

    Rows are ordered with the first coordinate descending, e.g.
    ``(2, 0), (1, 1), (0, 2)``.
    """
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    count = n_compositions(n, k)
    if count > cap:
        raise CapExceeded(f"{count} compositions of {n} into {k} parts exceeds cap {cap}")
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    out = np.empty((count, k), dtype=np.int64)
    # Stars and bars: bar positions among n + k - 1 slots.
    for i, bars in enumerate(itertools.combinations(range(n + k - 1), k - 1)):
        prev = -1
        for j, b in enumerate(bars):
            out[i, j] = b - prev - 1
            prev = b
        out[i, k - 1] = n + k - 2 - prev
    return out[::-1].copy()


@dataclass(frozen=True)
class NType:
    """Counts of each symbol in a length-``n`` sequence."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    @property
    def distribution(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n

    @property
    def log_class_size(self) -> float:
        """``ln |T_P|``, the number of sequences with these counts."""
        c = np.array(self.counts)
        return float(gammaln(self.n + 1) - gammaln(c + 1).sum())

    @classmethod
    def of(cls, seq, alphabet_size: int) -> "NType":
        return cls(tuple(int(c) for c in np.bincount(np.asarray(seq, dtype=int), minlength=alphabet_size)))

    def representative(self) -> np.ndarray:
        """The lexicographically first sequence of this type."""
        return np.repeat(np.arange(len(self.counts)), self.counts)


def enumerate_n_types(n: int, alphabet_size: int, cap: int = TYPE_CAP) -> list[NType]:
    """Every ``n``-type on an alphabet of the given size."""
    if n < 1:
        raise ValueError("blocklength must be positive")
    return [NType(tuple(int(v) for v in row)) for row in compositions(n, alphabet_size, cap)]


def conditional_types(z_type: NType, x_size: int, cap: int = TYPE_CAP) -> np.ndarray:
    """All joint count matrices ``K[z, x]`` with row sums ``z_type.counts``.

    ``K / n_z`` row-wise is a conditional type ``Q(x|z)``. Returns an array of
    shape ``(count, |Z|, |X|)``.
    """
    per_row = [compositions(c, x_size, cap) for c in z_type.counts]
    total = math.prod(len(r) for r in per_row)
    if total > cap:
        raise CapExceeded(f"{total} conditional types exceeds cap {cap}")
    grids = np.meshgrid(*[np.arange(len(r)) for r in per_row], indexing="ij")
    idx = [g.ravel() for g in grids]
    return np.stack([per_row[z][idx[z]] for z in range(len(per_row))], axis=1)


def _check_counts(z_type: NType, counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[0] != len(z_type.counts):
        raise ValueError("conditional type has the wrong shape")
    if np.any(counts < 0) or not np.array_equal(counts.sum(axis=1), np.array(z_type.counts)):
        raise ValueError("conditional type is inconsistent with the z-type")
    return counts


def shell_log_prob(p_x: Distribution, z_type: NType, counts) -> float:
    """``ln P_X^n(T_Q(z))`` for ``z`` of type ``z_type``.

    ``counts[z, x]`` is the number of positions where ``z`` holds ``z`` and
    the shell's sequences hold ``x``.
    """
    counts = _check_counts(z_type, counts)
    with np.errstate(divide="ignore"):
        lp = np.log(p_x.probs)
    log_mult = gammaln(np.array(z_type.counts) + 1).sum() - gammaln(counts + 1).sum()
    charged = counts > 0
    return float(log_mult + np.sum(counts[charged] * np.broadcast_to(lp, counts.shape)[charged]))


def _a_level(joint: JointXZ, z_type: NType, counts: np.ndarray) -> float:
    """``D(Q||P_X|P) - D(Q||P_{X|Z}|P)`` evaluated term by term."""
    n = z_type.n
    total_x = 0.0
    total_post = 0.0
    for z, nz in enumerate(z_type.counts):
        if nz == 0:
            continue
        q = counts[z] / nz
        d_post = kl_divergence(q, joint.post[z])
        if math.isinf(d_post):
            return -math.inf
        total_x += nz / n * kl_divergence(q, joint.p_x.probs)
        total_post += nz / n * d_post
    return total_x - total_post


@dataclass
class Level:
    a: float
    log_p: float
    members: list[np.ndarray] = field(default_factory=list, repr=False)


@dataclass
class ALevelSet:
    """Conditional types of a fixed z-type grouped by their level ``A``.

    ``levels`` holds the finite levels in increasing order. Shells with
    ``A = -inf`` (some position where ``W(z|x) = 0``) are pooled in
    ``neg_inf_log_p`` and ``neg_inf_members``.
    """

    z_type: NType
    levels: list[Level]
    neg_inf_log_p: float = -math.inf
    neg_inf_members: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def total_prob(self) -> float:
        lps = [lv.log_p for lv in self.levels] + [self.neg_inf_log_p]
        return float(np.exp(np.logaddexp.reduce(lps)))

    @property
    def a_values(self) -> np.ndarray:
        return np.array([lv.a for lv in self.levels])

    @property
    def probs(self) -> np.ndarray:
        return np.exp([lv.log_p for lv in self.levels])


def a_level_set(joint: JointXZ, z_type: NType, cap: int = TYPE_CAP) -> ALevelSet:
    """Group every conditional type of ``z_type`` by its level and sum shell probabilities."""
    if len(z_type.counts) != joint.z_size:
        raise ValueError("z-type alphabet does not match the channel output")
    finite: list[tuple[float, float, np.ndarray]] = []
    neg_lp: list[float] = []
    neg_members = []
    for counts in conditional_types(z_type, joint.x_size, cap):
        a = _a_level(joint, z_type, counts)
        lp = shell_log_prob(joint.p_x, z_type, counts)
        if a == -math.inf:
            neg_lp.append(lp)
            neg_members.append(counts)
        else:
            finite.append((a, lp, counts))
    finite.sort(key=lambda t: t[0])
    levels: list[Level] = []
    for a, lp, counts in finite:
        if levels and abs(a - levels[-1].a) <= LEVEL_MERGE_TOL:
            lv = levels[-1]
            lv.log_p = float(np.logaddexp(lv.log_p, lp))
            lv.members.append(counts)
        else:
            levels.append(Level(a, lp, [counts]))
    neg = float(np.logaddexp.reduce(neg_lp)) if neg_lp else -math.inf
    return ALevelSet(z_type, levels, neg, neg_members)


def exact_un_log_moment(
    instance: WiretapInstance | JointXZ,
    n: int,
    m_prime: int,
    z_type: NType,
    cap: int = TYPE_CAP,
) -> float:
    """Exact ``E[U_n ln U_n]`` for any ``z`` of type ``z_type``.

    ``U_n = (1/M') sum_a N_a exp(n a)`` with ``(N_a)`` multinomial over the
    levels (plus the ``-inf`` pool, which contributes nothing). The sum runs
    over every outcome of the multinomial.
    """
    joint = instance.joint if isinstance(instance, WiretapInstance) else instance
    if z_type.n != n:
        raise ValueError("z-type blocklength differs from n")
    if m_prime < 1:
        raise ValueError("M' must be at least 1")
    lset = a_level_set(joint, z_type, cap)
    weights = [math.exp(n * lv.a) for lv in lset.levels]
    log_p = [lv.log_p for lv in lset.levels]
    if lset.neg_inf_log_p > -math.inf:
        weights.append(0.0)
        log_p.append(lset.neg_inf_log_p)
    weights = np.array(weights)
    log_p = np.array(log_p)
    outcomes = compositions(m_prime, len(weights), cap)
    log_prob = gammaln(m_prime + 1) - gammaln(outcomes + 1).sum(axis=1) + outcomes @ log_p
    u = outcomes @ weights / m_prime
    with np.errstate(divide="ignore", invalid="ignore"):
        ulogu = np.where(u > 0, u * np.log(u), 0.0)
    return float(np.sum(np.exp(log_prob) * ulogu))


def type_decomposition(joint: JointXZ, n: int, m_prime: int, cap: int = TYPE_CAP) -> float:
    """``sum_P P_Z^n(T_P) E[U_n ln U_n]``, the ensemble mean divergence assembled by type."""
    log_pz = np.log(joint.p_z.probs)
    total = 0.0
    for t in enumerate_n_types(n, joint.z_size, cap):
        log_mass = t.log_class_size + float(np.dot(t.counts, log_pz))
        total += math.exp(log_mass) * exact_un_log_moment(joint, n, m_prime, t, cap)
    return total


class InfeasibleLevel(ValueError):
    """No stochastic matrix reaches the requested level."""


@dataclass(frozen=True)
class EbOracleResult:
    """``value`` is the best candidate; ``grid_value`` excludes the analytic one.

    ``slack`` is ``|A(Q) - a|`` at the minimizer.
    """

    value: float
    grid_value: float
    slack: float
    q: np.ndarray = field(repr=False)
    n_candidates: int = 0


def _row_divergences(q_rows: np.ndarray, p_x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(q_rows > 0, q_rows * np.log(q_rows / p_x), 0.0)
    return t.sum(axis=-1)


def _contract(grid: np.ndarray, center: np.ndarray | None, scale: float) -> np.ndarray:
    """Shrink a simplex grid toward ``center``; convex combinations stay on the simplex."""
    if center is None:
        return grid
    return center + scale * (grid - center)


def eb_bruteforce(
    joint: JointXZ,
    p,
    a: float,
    grid_resolution: int = 200,
    analytic_rho: float | None = None,
    max_entries: int = 9,
    cap: int = 2 * 10**6,
    zoom_rounds: int = 4,
) -> EbOracleResult:
    """``min D(Q||P_X|P)`` over stochastic ``Q`` with ``A(P; Q) = a``, by grid search.

    Every row with ``P(z) > 0`` is gridded on the simplex of the posterior's
    support except for one pivot row, whose smallest- and largest-density
    coordinates are solved from the linear constraint exactly. After the
    first pass, ``zoom_rounds`` further passes contract the grid toward the
    best point found so far (the problem is convex, so this converges to the
    constrained minimum). ``analytic_rho`` adds the tilted posterior at that
    parameter as one more candidate when it is feasible.
    """
    p = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    if joint.x_size * joint.z_size > max_entries:
        raise CapExceeded(f"|X||Z| = {joint.x_size * joint.z_size} exceeds {max_entries}")
    px = joint.p_x.probs
    active = [z for z in range(joint.z_size) if p[z] > 0]
    supports = [np.flatnonzero(joint.post[z] > 0) for z in range(joint.z_size)]
    dens = joint.info_density

    spreads = {z: p[z] * np.ptp(dens[z, supports[z]]) for z in active}
    pivot = max(active, key=lambda z: spreads[z]) if spreads and max(spreads.values()) > 0 else None
    others = [z for z in active if z != pivot]
    base = {z: compositions(grid_resolution, supports[z].size, cap) / grid_resolution for z in others}
    if pivot is not None:
        order = supports[pivot][np.argsort(dens[pivot, supports[pivot]], kind="stable")]
        free, lo_x, hi_x = order[1:-1], order[0], order[-1]
        # Coordinates: the free entries, then the combined mass m of the two solved ones.
        pivot_base = compositions(grid_resolution, free.size + 1, cap) / grid_resolution

    shrink = min(0.5, 4.0 / grid_resolution)
    centers = {z: None for z in others}
    pivot_center = None
    best_value, q_best, n_first = math.inf, None, 0
    for rnd in range(zoom_rounds + 1):
        scale = shrink**rnd
        row_cands = []
        for z in others:
            sup = supports[z]
            g = _contract(base[z], centers[z], scale)
            q = np.zeros((g.shape[0], joint.x_size))
            q[:, sup] = g
            row_cands.append((z, q, p[z] * (g @ dens[z, sup]), p[z] * _row_divergences(q, px)))
        n_comb = math.prod(c[1].shape[0] for c in row_cands) if row_cands else 1
        if n_comb > cap:
            raise CapExceeded(f"{n_comb} grid combinations exceeds cap {cap}")
        idx = np.meshgrid(*[np.arange(c[1].shape[0]) for c in row_cands], indexing="ij") if row_cands else []
        idx = [i.ravel() for i in idx]
        a_rest = sum((c[2][i] for c, i in zip(row_cands, idx)), np.zeros(n_comb))
        d_rest = sum((c[3][i] for c, i in zip(row_cands, idx)), np.zeros(n_comb))

        if pivot is None:
            feasible = np.abs(a_rest - a) <= 1e-9
            if not feasible.any():
                if rnd == 0:
                    raise InfeasibleLevel(f"level {a} is not reachable")
                break
            bi = int(np.argmin(np.where(feasible, d_rest, np.inf)))
            value = float(d_rest[bi])
            pivot_row = None
        else:
            pg = _contract(pivot_base, pivot_center, scale)
            m = pg[:, -1]
            a_free = pg[:, :-1] @ dens[pivot, free] if free.size else np.zeros(len(pg))
            if n_comb * len(pg) > cap:
                raise CapExceeded(f"{n_comb * len(pg)} grid combinations exceeds cap {cap}")
            target = (a - a_rest)[:, None] / p[pivot] - a_free[None, :]
            d_lo, d_hi = dens[pivot, lo_x], dens[pivot, hi_x]
            q_hi = (target - m[None, :] * d_lo) / (d_hi - d_lo)
            ok = (q_hi >= -1e-12) & (q_hi <= m[None, :] + 1e-12)
            if not ok.any():
                if rnd == 0:
                    raise InfeasibleLevel(f"level {a} is not reachable")
                break
            q_hi = np.clip(q_hi, 0.0, m[None, :])
            qrow = np.zeros(q_hi.shape + (joint.x_size,))
            qrow[..., free] = pg[None, :, :-1]
            qrow[..., lo_x] = m[None, :] - q_hi
            qrow[..., hi_x] = q_hi
            total = np.where(ok, d_rest[:, None] + p[pivot] * _row_divergences(qrow, px), np.inf)
            bi, bj = np.unravel_index(int(np.argmin(total)), total.shape)
            value = float(total[bi, bj])
            pivot_row = qrow[bi, bj]
            pivot_center = pg[bj]
        if rnd == 0:
            n_first = n_comb
        if value <= best_value:
            best_value = value
            q_best = np.zeros((joint.z_size, joint.x_size))
            q_best[:] = px
            for c, i in zip(row_cands, idx):
                q_best[c[0]] = c[1][i[bi]]
            if pivot_row is not None:
                q_best[pivot] = pivot_row
        for c, i in zip(row_cands, idx):
            centers[c[0]] = c[1][i[bi]][supports[c[0]]]
    grid_value = best_value

    from .exponents import a_value, tilted_posterior

    value = grid_value
    if analytic_rho is not None and math.isfinite(analytic_rho):
        qa = tilted_posterior(joint, analytic_rho)
        if abs(a_value(joint, p, qa) - a) <= 1e-9:
            d_an = float(np.sum(p[active] * _row_divergences(qa[active], px)))
            if d_an < value:
                value, q_best = d_an, qa
    slack = abs(a_value(joint, p, q_best) - a)
    return EbOracleResult(value=value, grid_value=grid_value, slack=float(slack), q=q_best, n_candidates=n_first)
