"""Finite-alphabet probability primitives.

Everything here works in natural-log units (nats). Distributions and channels
are small immutable wrappers around numpy arrays that validate on construction;
operations are plain functions.

Conventions
-----------
* ``0 * ln 0 = 0`` and ``0 * ln(0/0) = 0``.
* Entries with magnitude at most :data:`ZERO_TOL` are treated as exact zeros.
* Channels may contain zero entries. An input distribution and the output
  marginal it induces through the eavesdropper channel must have full support;
  :class:`WiretapInstance` rejects anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ZERO_TOL = 1e-15
SUM_TOL = 1e-12


class ProbabilityError(ValueError):
    """Raised when an array is not a valid distribution or channel."""


def _as_prob_vector(values, tol: float) -> np.ndarray:
    p = np.array(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ProbabilityError(f"expected a non-empty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ProbabilityError("probabilities must be finite")
    if np.any(p < -ZERO_TOL):
        raise ProbabilityError(f"negative probability {p.min():.3g}")
    p[np.abs(p) <= ZERO_TOL] = 0.0
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise ProbabilityError(f"probabilities sum to {total!r}, not 1")
    return p


@dataclass(frozen=True)
class Distribution:
    """A point on the probability simplex of a finite alphabet."""

    probs: np.ndarray

    def __init__(self, probs, tol: float = SUM_TOL):
        p = _as_prob_vector(probs, tol)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights) -> "Distribution":
        """Build from non-negative weights by exact renormalization."""
        w = np.array(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise ProbabilityError("weights must be non-negative with positive sum")
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        return cls(np.full(k, 1.0 / k))

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @property
    def full_support(self) -> bool:
        return bool(np.all(self.probs > ZERO_TOL))

    def __len__(self) -> int:
        return self.alphabet_size

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class Channel:
    """A row-stochastic matrix; row ``x`` is the output law given input ``x``."""

    matrix: np.ndarray

    def __init__(self, matrix, tol: float = SUM_TOL):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ProbabilityError(f"expected a non-empty matrix, got shape {m.shape}")
        rows = [_as_prob_vector(row, tol) for row in m]
        m = np.vstack(rows)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        """Binary symmetric channel with crossover probability ``p``."""
        return cls([[1.0 - p, p], [p, 1.0 - p]])

    @classmethod
    def identity(cls, k: int) -> "Channel":
        return cls(np.eye(k))

    @classmethod
    def replicate(cls, dist: Distribution, n_inputs: int) -> "Channel":
        """Rank-one channel whose every row equals ``dist``."""
        return cls(np.tile(dist.probs, (n_inputs, 1)))

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> list[Distribution]:
        return [Distribution(r) for r in self.matrix]

    def __eq__(self, other) -> bool:
        return isinstance(other, Channel) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())


def _check_dims(p_x: Distribution, ch: Channel) -> None:
    if p_x.alphabet_size != ch.input_size:
        raise ProbabilityError(
            f"distribution has {p_x.alphabet_size} symbols but channel expects {ch.input_size}"
        )


def output_marginal(p_x: Distribution, ch: Channel) -> Distribution:
    """Return the output law ``sum_x P_X(x) ch(.|x)``."""
    _check_dims(p_x, ch)
    out = p_x.probs @ ch.matrix
    return Distribution(out / out.sum())


@dataclass(frozen=True)
class JointXZ:
    """Joint law of input and eavesdropper output, ``P_X(x) W(z|x)``.

    Caches both marginals, the posterior ``P_{X|Z}`` (stored as a
    ``|Z| x |X|`` array, row ``z`` is ``P_{X|Z}(.|z)``) and the information
    density ``ln W(z|x)/P_Z(z)`` as a ``|Z| x |X|`` array with ``-inf`` where
    ``W(z|x) = 0``.
    """

    matrix: np.ndarray
    p_x: Distribution
    p_z: Distribution
    post: np.ndarray = field(repr=False)
    info_density: np.ndarray = field(repr=False)

    @classmethod
    def from_channel(cls, p_x: Distribution, w: Channel) -> "JointXZ":
        _check_dims(p_x, w)
        if not p_x.full_support:
            raise ProbabilityError("input distribution must have full support")
        joint = p_x.probs[:, None] * w.matrix
        p_z = output_marginal(p_x, w)
        if not p_z.full_support:
            raise ProbabilityError("output marginal must have full support")
        post = (joint / p_z.probs[None, :]).T
        post = post / post.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore"):
            dens = np.log(w.matrix.T) - np.log(p_z.probs)[:, None]
        for a in (joint, post, dens):
            a.setflags(write=False)
        return cls(matrix=joint, p_x=p_x, p_z=p_z, post=post, info_density=dens)

    @property
    def posterior_channel(self) -> Channel:
        return Channel(self.post)

    @property
    def x_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def z_size(self) -> int:
        return self.matrix.shape[1]


def posterior(joint: JointXZ) -> Channel:
    """Return ``P_{X|Z}`` as a channel from Z to X."""
    return joint.posterior_channel


def kl_divergence(p: Distribution | np.ndarray, q: Distribution | np.ndarray) -> float:
    """``D(p||q)`` in nats; ``inf`` when ``p`` charges a ``q``-null symbol."""
    p = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, Distribution) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ProbabilityError("alphabets differ")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(max(0.0, np.sum(p[mask] * np.log(p[mask] / q[mask]))))


def conditional_kl(q: Channel | np.ndarray, ref: Channel | np.ndarray, p: Distribution | np.ndarray) -> float:
    """``sum_z P(z) D(Q(.|z) || ref(.|z))``.

    Rows of ``q`` and ``ref`` are indexed by the conditioning symbol. Rows with
    ``P(z) = 0`` are skipped.
    """
    q = q.matrix if isinstance(q, Channel) else np.asarray(q, dtype=float)
    ref = ref.matrix if isinstance(ref, Channel) else np.asarray(ref, dtype=float)
    p = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    if q.shape != ref.shape or q.shape[0] != p.size:
        raise ProbabilityError("incompatible dimensions")
    total = 0.0
    for z in np.flatnonzero(p > 0):
        d = kl_divergence(q[z], ref[z])
        if np.isinf(d):
            return float("inf")
        total += p[z] * d
    return float(total)


def mutual_information(p_x: Distribution, ch: Channel) -> float:
    """``I(X;Z)`` in nats for input law ``p_x`` through ``ch``."""
    _check_dims(p_x, ch)
    p_z = p_x.probs @ ch.matrix
    total = 0.0
    for x, px in enumerate(p_x.probs):
        if px > 0:
            total += px * kl_divergence(ch.matrix[x], p_z)
    return float(total)


def sequence_log_prob(p: Distribution, seq: Sequence[int]) -> float:
    """``ln P^n(seq)``; ``-inf`` if any symbol has zero mass."""
    s = np.asarray(seq, dtype=int)
    if s.size == 0:
        return 0.0
    if s.min() < 0 or s.max() >= p.alphabet_size:
        raise ProbabilityError("symbol outside the alphabet")
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(p.probs[s])))


def compose_prefix(p_v: Distribution, prefix: Channel, ch: Channel) -> tuple[Distribution, Channel]:
    """Push an auxiliary input through a prefix channel ``P_{X|V}``.

    Returns the induced input law ``P_X`` and the effective channel from V,
    so every exponent routine applies with V as the new input.
    """
    _check_dims(p_v, prefix)
    if prefix.output_size != ch.input_size:
        raise ProbabilityError("prefix output alphabet does not match channel input")
    eff = prefix.matrix @ ch.matrix
    eff = eff / eff.sum(axis=1, keepdims=True)
    return output_marginal(p_v, prefix), Channel(eff)


@dataclass(frozen=True)
class WiretapInstance:
    """Input law, main channel ``V``, eavesdropper channel ``W`` and rates (nats)."""

    p_x: Distribution
    v: Channel
    w: Channel
    rate: float = 0.0
    rate_prime: float = 0.0

    def __post_init__(self):
        _check_dims(self.p_x, self.v)
        _check_dims(self.p_x, self.w)
        if not self.p_x.full_support:
            raise ProbabilityError("input distribution must have full support")
        if not output_marginal(self.p_x, self.w).full_support:
            raise ProbabilityError("eavesdropper output marginal must have full support")
        if self.rate < 0 or self.rate_prime < 0:
            raise ProbabilityError("rates must be non-negative")

    @property
    def joint(self) -> JointXZ:
        return JointXZ.from_channel(self.p_x, self.w)

    @property
    def p_z(self) -> Distribution:
        return output_marginal(self.p_x, self.w)
