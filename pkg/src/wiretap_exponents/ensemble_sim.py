"""Seeded simulation of the sub-codebook wire-tap construction.

Each message ``w`` owns ``M'`` codewords drawn i.i.d. from ``P_X^n``; the
encoder sends one of them uniformly at random. This module computes the
resulting eavesdropper output law exactly over ``Z^n`` and its divergence from
``P_Z^n``, averages that over the random-code ensemble (Monte Carlo or
exhaustively), and estimates Bob's ML decoding error.

Randomness
----------
Codewords of message ``w`` in replicate ``r`` come from a Philox stream keyed
by ``SeedSequence(seed, spawn_key=(r, w, 0))``; symbol ``(w', i)`` is the
``w' * n + i``-th uniform of that stream, mapped through the inverse CDF of
``P_X``. Decoder trials use the key ``(r, 0, 1)``. Results therefore depend
only on ``(seed, replicate index)`` and never on evaluation order or worker
count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .prob_core import Channel, Distribution, WiretapInstance, kl_divergence

GENERATOR_ID = "philox4x64/seedseq(seed;replicate,message,purpose)/inverse-cdf"
OUTPUT_CAP = 2**20
CODEBOOK_CAP = 2**20
WORD_CAP = 10**7

_CODEWORDS = 0
_TRIALS = 1


def count_for_rate(n: int, rate: float) -> int:
    """``ceil(exp(n * rate))`` with a guard against round-off just above an integer."""
    return max(1, math.ceil(math.exp(n * rate) - 1e-9))


def _stream(seed: int, replicate: int, message: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(replicate), int(message), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def _inverse_cdf(p_x: Distribution, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p_x.probs)
    return np.minimum(np.searchsorted(cdf, u, side="right"), p_x.alphabet_size - 1).astype(np.int64)


@dataclass(frozen=True)
class Codebook:
    """``words[w, w', i]``: symbol ``i`` of codeword ``w'`` of message ``w``."""

    words: np.ndarray = field(repr=False)
    p_x: Distribution
    seed: int
    replicate: int = 0
    generator_id: str = GENERATOR_ID

    @property
    def n(self) -> int:
        return self.words.shape[2]

    @property
    def m(self) -> int:
        return self.words.shape[0]

    @property
    def m_prime(self) -> int:
        return self.words.shape[1]

    def regenerate(self) -> "Codebook":
        return sample_codebook_counts(self.p_x, self.n, self.m, self.m_prime, self.seed, self.replicate)


def _message_words(p_x: Distribution, n: int, m_prime: int, seed: int, replicate: int, message: int) -> np.ndarray:
    u = _stream(seed, replicate, message, _CODEWORDS).random(m_prime * n)
    return _inverse_cdf(p_x, u).reshape(m_prime, n)


def sample_codebook_counts(
    p_x: Distribution, n: int, m: int, m_prime: int, seed: int, replicate: int = 0, messages=None
) -> Codebook:
    """Draw an ``m x m_prime`` codebook of length-``n`` words.

    ``messages`` restricts sampling to a subset of message indices (the
    returned array then has one slab per listed message); the words of each
    message do not depend on which others are drawn.
    """
    if n < 1 or m < 1 or m_prime < 1:
        raise ValueError("n, M and M' must be positive")
    messages = range(m) if messages is None else messages
    if len(messages) * m_prime * n > WORD_CAP:
        raise MemoryError(f"codebook of {len(messages)}x{m_prime}x{n} symbols exceeds cap")
    words = np.stack([_message_words(p_x, n, m_prime, seed, replicate, w) for w in messages])
    return Codebook(words=words, p_x=p_x, seed=int(seed), replicate=int(replicate))


def sample_codebook(instance: WiretapInstance, n: int, seed: int, replicate: int = 0) -> Codebook:
    """Codebook with ``M = ceil(exp(nR))`` and ``M' = ceil(exp(nR'))``."""
    return sample_codebook_counts(
        instance.p_x, n, count_for_rate(n, instance.rate), count_for_rate(n, instance.rate_prime), seed, replicate
    )


@lru_cache(maxsize=32)
def all_sequences(alphabet_size: int, n: int) -> np.ndarray:
    """Every length-``n`` sequence in lexicographic order (first symbol most significant)."""
    if alphabet_size**n > OUTPUT_CAP:
        raise MemoryError(f"{alphabet_size}^{n} sequences exceeds cap {OUTPUT_CAP}")
    seqs = np.array(list(itertools.product(range(alphabet_size), repeat=n)), dtype=np.int64).reshape(-1, n)
    seqs.setflags(write=False)
    return seqs


def _outer_log_lik(log_rows: np.ndarray) -> np.ndarray:
    """``log_rows[j, i, z]`` summed over ``i`` for every ``z^n``: shape ``(J, |Z|^n)``."""
    acc = np.zeros((log_rows.shape[0], 1))
    for i in range(log_rows.shape[1]):
        acc = (acc[:, :, None] + log_rows[:, i, None, :]).reshape(acc.shape[0], -1)
    return acc


def _log_w(w: Channel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(w.matrix)


def log_product_law(p: Distribution, n: int) -> np.ndarray:
    """``ln P^n(z)`` over all of ``Z^n``."""
    if p.alphabet_size**n > OUTPUT_CAP:
        raise MemoryError("output space exceeds cap")
    with np.errstate(divide="ignore"):
        lp = np.log(p.probs)
    return _outer_log_lik(np.broadcast_to(lp, (1, n, p.alphabet_size)))[0]


def _log_output(words: np.ndarray, w: Channel) -> np.ndarray:
    """``ln (1/M') sum_w' W^n(z | x_w')`` for the rows of ``words``."""
    n = words.shape[1]
    if w.output_size**n > OUTPUT_CAP:
        raise MemoryError(f"|Z|^n = {w.output_size ** n} exceeds cap {OUTPUT_CAP}")
    lw = _log_w(w)
    ll = _outer_log_lik(lw[words])
    return logsumexp(ll, axis=0) - math.log(words.shape[0])


def conditional_output_distribution(codebook: Codebook, w: Channel, message: int = 0) -> np.ndarray:
    """``P_{Z|W}(z|w) = (1/M') sum_w' W^n(z|X_{w,w'})`` over ``Z^n`` in lexicographic order."""
    return np.exp(_log_output(codebook.words[message], w))


def _divergence_from_log(log_p: np.ndarray, log_q: np.ndarray) -> float:
    p = np.exp(log_p)
    mask = p > 0
    return float(max(0.0, np.sum(p[mask] * (log_p[mask] - log_q[mask]))))


def leakage_divergence(codebook: Codebook, w: Channel, message: int = 0) -> float:
    """``D(P_{Z|W=w} || P_Z^n)`` by exact summation over ``Z^n``."""
    p_z = Distribution(codebook.p_x.probs @ w.matrix)
    words = codebook.words[message]
    return _divergence_from_log(_log_output(words, w), log_product_law(p_z, words.shape[1]))


@dataclass(frozen=True)
class SimResult:
    estimate: float
    std_error: float
    replicates: int
    seed: int | None
    exact: bool = False
    generator_id: str = GENERATOR_ID
    details: dict = field(default_factory=dict, compare=False, repr=False)


def _replicate_divergences(
    p_x: Distribution, w: Channel, n: int, m_prime: int, seed: int, indices, log_pzn: np.ndarray
) -> np.ndarray:
    lw = _log_w(w)
    out = np.empty(len(indices))
    for j, r in enumerate(indices):
        words = _message_words(p_x, n, m_prime, seed, r, 0)
        ll = _outer_log_lik(lw[words])
        out[j] = _divergence_from_log(logsumexp(ll, axis=0) - math.log(m_prime), log_pzn)
    return out


def divergence_samples(
    instance: WiretapInstance, n: int, replicates: int, seed: int, m_prime: int | None = None, workers: int = 1
) -> np.ndarray:
    """``D(P_{Z|W=1} || P_Z^n)`` for each replicate codebook, in replicate order."""
    m_prime = count_for_rate(n, instance.rate_prime) if m_prime is None else int(m_prime)
    log_pzn = log_product_law(instance.p_z, n)
    idx = np.arange(replicates)
    if workers <= 1:
        return _replicate_divergences(instance.p_x, instance.w, n, m_prime, seed, idx, log_pzn)
    chunks = np.array_split(idx, workers * 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(lambda c: _replicate_divergences(instance.p_x, instance.w, n, m_prime, seed, c, log_pzn), chunks)
        )
    return np.concatenate(parts)


def _summarize(samples: np.ndarray, seed: int, **details) -> SimResult:
    r = samples.size
    mean = float(np.sum(samples) / r)
    se = float(np.std(samples, ddof=1) / math.sqrt(r)) if r > 1 else float("nan")
    return SimResult(mean, se, r, seed, False, details=details)


def ensemble_mean_divergence(
    instance: WiretapInstance, n: int, replicates: int, seed: int, m_prime: int | None = None, workers: int = 1
) -> SimResult:
    """Monte Carlo mean of the leakage divergence of message 1 over random codebooks."""
    m_prime = count_for_rate(n, instance.rate_prime) if m_prime is None else int(m_prime)
    samples = divergence_samples(instance, n, replicates, seed, m_prime, workers)
    return _summarize(samples, seed, n=n, m_prime=m_prime)


def exhaustive_ensemble_mean(instance: WiretapInstance, n: int, m_prime: int, cap: int = CODEBOOK_CAP) -> SimResult:
    """Exact ensemble mean of ``D(P_{Z|W} || P_Z^n)`` over every codebook of one message.

    Also checks that the ensemble average of ``P_{Z|W}(.|w)`` is ``P_Z^n``;
    the largest entrywise gap is in ``details["mean_output_gap"]``.
    """
    k = instance.p_x.alphabet_size
    n_words = k**n
    total = n_words**m_prime
    if total > cap:
        raise MemoryError(f"{total} codebooks exceeds cap {cap}")
    seqs = all_sequences(k, n)
    lw = _log_w(instance.w)
    lik = np.exp(_outer_log_lik(lw[seqs]))  # (|X|^n, |Z|^n)
    with np.errstate(divide="ignore"):
        log_px = np.log(instance.p_x.probs)
    log_pxn = log_px[seqs].sum(axis=1)
    log_pzn = log_product_law(instance.p_z, n)

    mean_div = 0.0
    mean_out = np.zeros(lik.shape[1])
    chunk = max(1, 2**16 // lik.shape[1])
    books = itertools.product(range(n_words), repeat=m_prime)
    while True:
        block = np.array(list(itertools.islice(books, chunk)), dtype=np.int64).reshape(-1, m_prime)
        if block.size == 0:
            break
        weight = np.exp(log_pxn[block].sum(axis=1))
        out = lik[block].mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(out > 0, out * (np.log(out) - log_pzn), 0.0)
        mean_div += float(weight @ terms.sum(axis=1))
        mean_out += weight @ out
    gap = float(np.max(np.abs(mean_out - np.exp(log_pzn))))
    return SimResult(mean_div, 0.0, int(total), None, True, details={"mean_output_gap": gap, "n": n, "m_prime": m_prime})


@dataclass(frozen=True)
class EmpiricalPoint:
    n: int
    m_prime: int
    estimate: float
    std_error: float
    exponent: float
    exponent_std_error: float

    @property
    def defined(self) -> bool:
        return math.isfinite(self.exponent)


def empirical_exponent(
    instance: WiretapInstance,
    n_list,
    replicates: int,
    seed: int,
    m_prime_cap: int | None = None,
    m_prime: int | None = None,
    workers: int = 1,
) -> list[EmpiricalPoint]:
    """``-(1/n) ln E[D]`` from Monte Carlo estimates at each blocklength.

    ``M'`` is ``ceil(exp(n R'))`` (optionally capped) unless given explicitly.
    A non-positive estimate yields an undefined point marked ``+inf``.
    """
    points = []
    for n in n_list:
        mp = m_prime if m_prime is not None else count_for_rate(n, instance.rate_prime)
        if m_prime_cap is not None:
            mp = min(mp, m_prime_cap)
        res = ensemble_mean_divergence(instance, n, replicates, seed, mp, workers)
        if res.estimate > 0:
            e = -math.log(res.estimate) / n
            se = res.std_error / (n * res.estimate)
        else:
            e, se = float("inf"), float("nan")
        points.append(EmpiricalPoint(n, mp, res.estimate, res.std_error, e, se))
    return points


@dataclass(frozen=True)
class LeakageResult:
    mutual_information: float
    average_divergence: float
    divergences: np.ndarray = field(repr=False)
    direct_mutual_information: float = float("nan")

    @property
    def gap(self) -> float:
        return self.average_divergence - self.mutual_information


def exact_leakage_mutual_information(codebook: Codebook, w: Channel, p_w=None) -> LeakageResult:
    """``I(W;Z) = D(P_{Z|W} || P_Z^n | P_W) - D(P_Z || P_Z^n)`` computed exactly.

    ``direct_mutual_information`` recomputes ``sum_w P_W(w) D(P_{Z|W=w} || P_Z)``
    as a cross-check.
    """
    m = codebook.m
    p_w = np.full(m, 1.0 / m) if p_w is None else np.asarray(p_w, dtype=float)
    if p_w.shape != (m,) or abs(p_w.sum() - 1) > 1e-12:
        raise ValueError("P_W must be a distribution over the codebook's messages")
    p_z = Distribution(codebook.p_x.probs @ w.matrix)
    log_pzn = log_product_law(p_z, codebook.n)
    log_out = np.stack([_log_output(codebook.words[j], w) for j in range(m)])
    divs = np.array([_divergence_from_log(lo, log_pzn) for lo in log_out])
    mix = np.exp(log_out).T @ p_w
    with np.errstate(divide="ignore"):
        log_mix = np.log(mix)
    avg = float(p_w @ divs)
    mi = avg - _divergence_from_log(log_mix, log_pzn)
    direct = float(sum(p_w[j] * _divergence_from_log(log_out[j], log_mix) for j in range(m) if p_w[j] > 0))
    return LeakageResult(max(mi, 0.0), avg, divs, direct)


@dataclass(frozen=True)
class Expurgation:
    kept: np.ndarray
    good_error: np.ndarray
    good_divergence: np.ndarray


def expurgate(error_probs, divergences, m: int) -> Expurgation:
    """Select ``m`` of ``2m`` messages good for both error and leakage.

    A message is good for a quantity when it is at most four times the
    average over all ``2m`` messages; at least ``3m/2`` messages pass each
    test, so ``m`` pass both.
    """
    e = np.asarray(error_probs, dtype=float)
    d = np.asarray(divergences, dtype=float)
    if e.shape != (2 * m,) or d.shape != (2 * m,):
        raise ValueError("need per-message values for 2M messages")
    good_e = np.flatnonzero(e <= 4 * e.mean())
    good_d = np.flatnonzero(d <= 4 * d.mean())
    both = np.intersect1d(good_e, good_d)
    if both.size < m:
        raise ArithmeticError("fewer than M messages survive; averages are inconsistent")
    return Expurgation(both[:m], good_e, good_d)


def error_probability_mc(
    instance: WiretapInstance,
    n: int,
    replicates: int,
    seed: int,
    m: int | None = None,
    m_prime: int | None = None,
) -> SimResult:
    """Monte Carlo ``Pr[W_hat != W]`` under joint ML decoding of ``(w, w')`` over ``V``.

    Each replicate draws a fresh codebook, a uniform ``(w, w')``, and Bob's
    channel output; ties are broken uniformly from the trial stream.
    """
    m = count_for_rate(n, instance.rate) if m is None else int(m)
    m_prime = count_for_rate(n, instance.rate_prime) if m_prime is None else int(m_prime)
    lv = _log_w(instance.v)
    cdf_v = np.cumsum(instance.v.matrix, axis=1)
    errors = np.empty(replicates)
    for r in range(replicates):
        words = sample_codebook_counts(instance.p_x, n, m, m_prime, seed, r).words.reshape(m * m_prime, n)
        rng = _stream(seed, r, 0, _TRIALS)
        sent = int(rng.integers(m * m_prime))
        u = rng.random(n)
        x = words[sent]
        y = np.minimum((u[:, None] >= cdf_v[x]).sum(axis=1), instance.v.output_size - 1)
        ll = lv[words, y[None, :]].sum(axis=1)
        best = np.flatnonzero(ll == ll.max())
        decoded = int(best[rng.integers(best.size)]) if best.size > 1 else int(best[0])
        errors[r] = float(decoded // m_prime != sent // m_prime)
    p = float(errors.mean())
    return SimResult(p, math.sqrt(p * (1 - p) / replicates), replicates, seed, False, details={"n": n, "m": m, "m_prime": m_prime})


def kl_to_product(p: np.ndarray, p_z: Distribution, n: int) -> float:
    """``D(p || P_Z^n)`` for an explicit law over ``Z^n``; used by cross-checks."""
    return kl_divergence(p, np.exp(log_product_law(p_z, n)))
