import math

import numpy as np
import pytest

from ncelm import negsampling
from ncelm.checks import finite_diff_gradient
from ncelm.model import Z_FIXED_ONE, init_params, unnorm
from ncelm.nce import NceConfig, ProxyBatch, mc_grad, mc_loss
from ncelm.negsampling import ns_grad, ns_loss, ns_posterior_true
from ncelm.noise import uniform, NoiseDistribution, _build
from ncelm.seeding import STREAM_DATA, derive_rng


def random_setup(n_words=4, seed=0):
    params = init_params(n_words, 3, seed=seed, z_mode=Z_FIXED_ONE)
    rng = derive_rng(seed, STREAM_DATA)
    params.target_emb[:] = rng.normal(0, 1, params.target_emb.shape)
    params.context_emb[:] = rng.normal(0, 1, params.context_emb.shape)
    params.bias[:] = rng.normal(0, 0.5, n_words)
    return params, rng


def test_posterior_is_u_over_one_plus_u():
    params, _ = random_setup()
    for c in range(5):
        for w in range(4):
            u = unnorm(params, w, c)
            assert ns_posterior_true(params, w, c) == pytest.approx(u / (1 + u), rel=1e-12)


def test_loss_hand_computed_single_example():
    params, _ = random_setup()
    batch = ProxyBatch(
        contexts=np.array([1]), true_words=np.array([2]), noise_words=np.array([[0, 3]])
    )
    pt = ns_posterior_true(params, 2, 1)
    pn0 = ns_posterior_true(params, 0, 1)
    pn3 = ns_posterior_true(params, 3, 1)
    expected = math.log(pt) + math.log(1 - pn0) + math.log(1 - pn3)
    assert ns_loss(params, batch) == pytest.approx(expected, rel=1e-12)


def test_grad_matches_finite_differences():
    params, rng = random_setup(seed=3)
    batch = ProxyBatch(
        contexts=rng.integers(0, 5, 25),
        true_words=rng.integers(0, 4, 25),
        noise_words=rng.integers(0, 4, (25, 2)),
    )
    analytic = ns_grad(params, batch).to_vector()
    fd = finite_diff_gradient(lambda p: ns_loss(p, batch), params).to_vector()
    assert np.max(np.abs(analytic - fd)) < 1e-7
    assert np.all(ns_grad(params, batch).log_zc == 0)


def test_matches_nce_exactly_when_k_equals_vocab_uniform():
    # k * q(w) = |V| * (1/|V|) = 1 makes the two classifier logits coincide.
    V = 6
    params, rng = random_setup(n_words=V, seed=4)
    batch = ProxyBatch(
        contexts=rng.integers(0, V + 1, 40),
        true_words=rng.integers(0, V, 40),
        noise_words=rng.integers(0, V, (40, V)),
    )
    cfg = NceConfig(k=V, z_mode=Z_FIXED_ONE, q=uniform(V))
    assert ns_loss(params, batch) == pytest.approx(mc_loss(params, batch, cfg), abs=1e-12)
    dg = ns_grad(params, batch).to_vector() - mc_grad(params, batch, cfg).to_vector()
    assert np.max(np.abs(dg)) < 1e-12


def test_differs_from_nce_when_q_not_uniform_or_k_wrong():
    V = 6
    params, rng = random_setup(n_words=V, seed=5)
    batch = ProxyBatch(
        contexts=rng.integers(0, V + 1, 40),
        true_words=rng.integers(0, V, 40),
        noise_words=rng.integers(0, V, (40, V)),
    )
    skew = np.arange(1.0, V + 1.0)
    cfg_skew = NceConfig(k=V, z_mode=Z_FIXED_ONE, q=_build(skew / skew.sum(), "unigram"))
    assert abs(ns_loss(params, batch) - mc_loss(params, batch, cfg_skew)) > 1e-3
    batch5 = ProxyBatch(
        contexts=batch.contexts, true_words=batch.true_words, noise_words=batch.noise_words[:, : V - 1]
    )
    cfg_short = NceConfig(k=V - 1, z_mode=Z_FIXED_ONE, q=uniform(V))
    assert abs(ns_loss(params, batch5) - mc_loss(params, batch5, cfg_short)) > 1e-3


def test_loss_stays_finite_at_extreme_scores():
    params, rng = random_setup(seed=6)
    params.target_emb *= 100.0
    batch = ProxyBatch(
        contexts=rng.integers(0, 5, 10),
        true_words=rng.integers(0, 4, 10),
        noise_words=rng.integers(0, 4, (10, 2)),
    )
    assert np.isfinite(ns_loss(params, batch))
    assert np.all(np.isfinite(ns_grad(params, batch).to_vector()))
