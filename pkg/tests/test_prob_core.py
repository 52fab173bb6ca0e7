import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wiretap_exponents.prob_core import (
    Channel,
    Distribution,
    JointXZ,
    ProbabilityError,
    WiretapInstance,
    compose_prefix,
    conditional_kl,
    kl_divergence,
    mutual_information,
    output_marginal,
    posterior,
    sequence_log_prob,
)


def simplex(k_min=2, k_max=4):
    return st.integers(k_min, k_max).flatmap(
        lambda k: st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k).map(lambda w: np.array(w) / sum(w))
    )


def channels(k_in, k_out):
    return st.lists(
        st.lists(st.floats(0.05, 1.0), min_size=k_out, max_size=k_out).map(lambda w: np.array(w) / sum(w)),
        min_size=k_in,
        max_size=k_in,
    ).map(np.array)


# Validation


def test_distribution_rejects_bad_input():
    with pytest.raises(ProbabilityError):
        Distribution([0.5, 0.6])
    with pytest.raises(ProbabilityError):
        Distribution([1.2, -0.2])
    with pytest.raises(ProbabilityError):
        Distribution([])
    with pytest.raises(ProbabilityError):
        Channel([[0.5, 0.5], [0.9, 0.2]])


def test_distribution_is_immutable():
    d = Distribution([0.25, 0.75])
    with pytest.raises(ValueError):
        d.probs[0] = 0.5


def test_normalized_and_uniform():
    assert Distribution.normalized([1, 3]) == Distribution([0.25, 0.75])
    assert np.allclose(Distribution.uniform(4).probs, 0.25)


# output_marginal


def test_output_marginal_examples():
    assert np.allclose(output_marginal(Distribution.uniform(2), Channel.bsc(0.1)).probs, [0.5, 0.5])
    d = Distribution([0.75, 0.25])
    assert np.allclose(output_marginal(d, Channel.identity(2)).probs, [0.75, 0.25])
    assert np.allclose(output_marginal(d, Channel.bsc(0.1)).probs, [0.70, 0.30], atol=1e-15)


# posterior


def test_posterior_examples():
    row = Distribution([0.2, 0.5, 0.3])
    px = Distribution([0.6, 0.4])
    post = posterior(JointXZ.from_channel(px, Channel.replicate(row, 2)))
    assert np.allclose(post.matrix, np.tile(px.probs, (3, 1)))
    px3 = Distribution([0.2, 0.3, 0.5])
    assert np.allclose(posterior(JointXZ.from_channel(px3, Channel.identity(3))).matrix, np.eye(3))
    bsc = posterior(JointXZ.from_channel(Distribution.uniform(2), Channel.bsc(0.1))).matrix
    assert np.allclose(bsc, [[0.9, 0.1], [0.1, 0.9]])


def test_joint_rejects_zero_output_mass():
    with pytest.raises(ProbabilityError):
        JointXZ.from_channel(Distribution.uniform(2), Channel([[1.0, 0.0], [1.0, 0.0]]))


# mutual_information


def test_mutual_information_examples():
    row = Distribution([0.4, 0.6])
    assert mutual_information(Distribution.uniform(2), Channel.replicate(row, 2)) == 0.0
    for k in (2, 3, 5):
        assert mutual_information(Distribution.uniform(k), Channel.identity(k)) == pytest.approx(math.log(k), abs=1e-14)
    mi = mutual_information(Distribution.uniform(2), Channel.bsc(0.1))
    assert mi == pytest.approx(0.368074, abs=1e-5)
    assert mi == pytest.approx(math.log(2) - oracles.binary_entropy(0.1), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_mutual_information_matches_loop_oracle(data):
    px = data.draw(simplex())
    w = data.draw(channels(px.size, data.draw(st.integers(2, 4))))
    got = mutual_information(Distribution(px), Channel(w))
    assert got == pytest.approx(oracles.mutual_info(px.tolist(), w.tolist()), abs=1e-13)
    assert got >= 0


# kl_divergence


def test_kl_support_violation_and_zero():
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_kl_nonnegative_and_matches_loop(data):
    p = data.draw(simplex(3, 3))
    q = data.draw(simplex(3, 3))
    d = kl_divergence(p, q)
    assert d >= 0
    assert d == pytest.approx(oracles.kl(p.tolist(), q.tolist()), abs=1e-13)


# conditional_kl


def test_conditional_kl_examples():
    q = np.array([[0.2, 0.8], [0.6, 0.4]])
    assert conditional_kl(q, q, [0.3, 0.7]) == 0.0
    ref = np.array([[0.5, 0.5], [0.1, 0.9]])
    assert conditional_kl(q, ref, [0.0, 1.0]) == pytest.approx(kl_divergence(q[1], ref[1]), abs=1e-15)


def test_conditional_kl_of_posterior_is_mutual_information(rng):
    for _ in range(20):
        kx, kz = rng.integers(2, 5, size=2)
        px = Distribution(rng.dirichlet(np.ones(kx)))
        w = Channel(rng.dirichlet(np.ones(kz), size=kx))
        j = JointXZ.from_channel(px, w)
        val = conditional_kl(j.post, np.tile(px.probs, (kz, 1)), j.p_z)
        assert val == pytest.approx(mutual_information(px, w), abs=1e-13)


# sequence_log_prob


def test_sequence_log_prob_examples():
    assert sequence_log_prob(Distribution([0.7, 0.3]), []) == 0.0
    assert sequence_log_prob(Distribution.uniform(2), [0, 1, 1, 0, 1]) == pytest.approx(-5 * math.log(2))
    assert sequence_log_prob(Distribution([0.7, 0.3]), [0, 1, 0]) == pytest.approx(math.log(0.7 * 0.3 * 0.7), abs=1e-15)
    assert sequence_log_prob(Distribution([1.0, 0.0]), [0, 1]) == -math.inf
    with pytest.raises(ProbabilityError):
        sequence_log_prob(Distribution.uniform(2), [2])


# compose_prefix


def test_compose_prefix_examples():
    pv = Distribution([0.4, 0.6])
    ch = Channel([[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]])
    px, eff = compose_prefix(pv, Channel.identity(2), ch)
    assert px == pv and np.allclose(eff.matrix, ch.matrix)

    flat = Channel([[0.3, 0.7], [0.3, 0.7]])
    _, eff = compose_prefix(pv, flat, ch)
    assert np.allclose(eff.matrix[0], eff.matrix[1])

    _, eff = compose_prefix(Distribution.uniform(2), Channel.bsc(0.2), Channel.bsc(0.1))
    assert np.allclose(eff.matrix, Channel.bsc(0.26).matrix, atol=1e-15)


def test_compose_prefix_dimension_mismatch():
    with pytest.raises(ProbabilityError):
        compose_prefix(Distribution.uniform(2), Channel.identity(2), Channel.identity(3))


# WiretapInstance


def test_instance_validation():
    with pytest.raises(ProbabilityError):
        WiretapInstance(Distribution([1.0, 0.0]), Channel.bsc(0.1), Channel.bsc(0.1))
    with pytest.raises(ProbabilityError):
        WiretapInstance(Distribution.uniform(2), Channel.bsc(0.1), Channel.bsc(0.1), rate=-0.1)
    inst = WiretapInstance(Distribution.uniform(2), Channel.bsc(0.1), Channel.bsc(0.2), 0.1, 0.3)
    assert np.allclose(inst.p_z.probs, [0.5, 0.5])
