import math

import numpy as np
import pytest

from ncelm import model
from ncelm.checks import finite_diff_gradient
from ncelm.corpus import build_vocab
from ncelm.model import (
    Z_EXACT,
    Z_FIXED_ONE,
    Z_LEARNED_ZC,
    apply_gradient,
    grad_log_likelihood,
    init_params,
    load_model,
    log_likelihood,
    log_partition,
    log_partitions,
    log_softmax_matrix,
    normalization_stats,
    partition,
    save_model,
    score,
    score_matrix,
    scores_for_context,
    set_log_zc_to_partition,
    softmax_prob,
    softmax_row,
    unnorm,
    unnorm_adjusted,
    zero_gradient,
)


def tiny_params():
    """|V|=3, d=2 model with hand-enterable numbers."""
    p = init_params(3, 2, seed=0, z_mode=Z_EXACT)
    p.target_emb[:] = [[0.1, 0.2], [0.0, -0.3], [0.5, 0.1]]
    p.context_emb[:] = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [-1.0, 0.2]]
    p.bias[:] = [0.0, 0.1, -0.2]
    return p


def test_score_and_unnorm_hand_values():
    p = tiny_params()
    # s(w=2, c=0) = 0.5*1.0 + 0.1*0.0 + bias -0.2
    assert score(p, 2, 0) == pytest.approx(0.3)
    assert unnorm(p, 2, 0) == pytest.approx(math.exp(0.3))
    # context 3 is the sentence-start row
    assert score(p, 0, 3) == pytest.approx(0.1 * -1.0 + 0.2 * 0.2 + 0.0)


def test_scores_matrix_matches_scalar_path():
    p = tiny_params()
    mat = score_matrix(p, np.arange(4))
    for c in range(4):
        assert np.allclose(mat[c], scores_for_context(p, c))
        for w in range(3):
            assert mat[c, w] == pytest.approx(score(p, w, c))


def test_partition_is_plain_exp_sum():
    p = tiny_params()
    for c in range(4):
        direct = sum(math.exp(score(p, w, c)) for w in range(3))
        assert partition(p, c) == pytest.approx(direct, rel=1e-12)
        assert log_partition(p, c) == pytest.approx(math.log(direct), rel=1e-12)
    assert np.allclose(log_partitions(p, np.arange(4)),
                       [log_partition(p, c) for c in range(4)])


def test_log_partition_survives_huge_scores():
    p = tiny_params()
    p.bias[:] = [800.0, 0.0, -800.0]
    lz = log_partition(p, 0)
    assert np.isfinite(lz)
    assert lz == pytest.approx(800.0 + score(p, 0, 0) - p.bias[0], abs=1e-6)


def test_softmax_rows_normalize():
    p = tiny_params()
    for c in range(4):
        row = softmax_row(p, c)
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(row > 0)
        for w in range(3):
            assert softmax_prob(p, w, c) == pytest.approx(unnorm(p, w, c) / partition(p, c))
    logmat = log_softmax_matrix(p, np.arange(4))
    assert np.allclose(np.exp(logmat).sum(axis=1), 1.0, atol=1e-12)


def test_log_likelihood_hand_value():
    p = tiny_params()
    pairs = np.array([[0, 1], [3, 2]])
    expected = math.log(softmax_prob(p, 1, 0)) + math.log(softmax_prob(p, 2, 3))
    assert log_likelihood(p, pairs) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        log_likelihood(p, np.empty((0, 2), dtype=np.int64))


def test_grad_log_likelihood_matches_finite_differences():
    p = init_params(5, 3, seed=2, z_mode=Z_EXACT)
    rng = np.random.default_rng(0)
    pairs = np.stack([rng.integers(0, 6, 30), rng.integers(0, 5, 30)], axis=1)
    analytic = grad_log_likelihood(p, pairs)
    fd = finite_diff_gradient(lambda q: log_likelihood(q, pairs), p)
    for name in ("target_emb", "context_emb", "bias"):
        assert np.allclose(getattr(analytic, name), getattr(fd, name), atol=1e-7)
    assert np.all(analytic.log_zc == 0)


def test_saturated_model_has_zero_gradient():
    # One active context; bias holding the empirical log-probabilities is a
    # stationary point of the likelihood.
    counts = np.array([6, 3, 1])
    pairs = np.repeat([[3, 0], [3, 1], [3, 2]], counts, axis=0)
    p = init_params(3, 2, seed=0, z_mode=Z_EXACT)
    p.target_emb[:] = 0.0
    p.context_emb[:] = 0.0
    p.bias[:] = np.log(counts / counts.sum())
    g = grad_log_likelihood(p, pairs)
    assert np.max(np.abs(g.to_vector())) < 1e-12


def test_init_params_is_seeded_and_validated():
    a = init_params(4, 3, seed=7)
    b = init_params(4, 3, seed=7)
    c = init_params(4, 3, seed=8)
    assert np.array_equal(a.target_emb, b.target_emb)
    assert not np.array_equal(a.target_emb, c.target_emb)
    assert a.context_emb.shape == (5, 3)
    assert np.all(a.log_zc == 0) and np.all(a.bias == 0)
    with pytest.raises(ValueError):
        init_params(4, 3, seed=0, z_mode="bogus")


def test_apply_gradient_freezes_log_zc_unless_learned():
    for z_mode, moves in ((Z_LEARNED_ZC, True), (Z_FIXED_ONE, False), (Z_EXACT, False)):
        p = init_params(3, 2, seed=1, z_mode=z_mode)
        g = zero_gradient(p)
        g.log_zc[:] = 1.0
        g.bias[:] = 1.0
        apply_gradient(p, g, 0.5)
        assert np.all(p.bias == 0.5)
        assert np.all(p.log_zc == (0.5 if moves else 0.0))


def test_set_log_zc_to_partition_normalizes_adjusted_scores():
    p = init_params(5, 3, seed=3, z_mode=Z_LEARNED_ZC)
    p.target_emb *= 4.0
    set_log_zc_to_partition(p)
    for c in range(6):
        total = sum(unnorm_adjusted(p, w, c) for w in range(5))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_normalization_stats_summary():
    p = tiny_params()
    stats = normalization_stats(p, np.arange(4))
    lz = [log_partition(p, c) for c in range(4)]
    assert stats["min"] == pytest.approx(min(lz))
    assert stats["max"] == pytest.approx(max(lz))
    assert stats["median"] == pytest.approx(float(np.median(lz)))


def test_model_file_round_trip_is_bit_faithful(tmp_path):
    vocab = build_vocab(["alpha", "beta", "gamma"])
    p = init_params(3, 2, seed=5, z_mode=Z_LEARNED_ZC)
    p.log_zc[:] = np.pi * np.arange(4)
    path = tmp_path / "m.model"
    save_model(path, p, vocab)
    back, back_vocab = load_model(path)
    assert back_vocab.words == vocab.words
    assert back.z_mode == Z_LEARNED_ZC
    for name in ("target_emb", "context_emb", "bias", "log_zc"):
        assert np.array_equal(getattr(back, name), getattr(p, name))


def test_load_model_rejects_corrupt_files(tmp_path):
    vocab = build_vocab(["a", "b"])
    p = init_params(2, 2, seed=0)
    path = tmp_path / "m.model"
    save_model(path, p, vocab)
    text = path.read_text()
    bad = tmp_path / "bad.model"
    bad.write_text("nope" + text)
    with pytest.raises(ValueError):
        load_model(bad)
    truncated = tmp_path / "short.model"
    truncated.write_text("\n".join(text.splitlines()[:-2]) + "\n")
    with pytest.raises(ValueError):
        load_model(truncated)
