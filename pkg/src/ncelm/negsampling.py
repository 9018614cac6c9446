"""Negative sampling: the classifier variant that drops the k*q(w) term.

The posterior of being a true sample becomes u / (u + 1), a plain logistic
sigmoid of the score, with no reference to the noise distribution, the noise
count, or any per-context normalizer. With k equal to the vocabulary size and
uniform noise, k*q(w) is 1 and this coincides with the NCE classifier; in
every other regime the posterior is inconsistent with the normalized model,
so the fitted weights are not maximum-likelihood estimates of it. Both facts
are exercised by the verification suite.

Deliberately implemented from its own definitions rather than by delegating
to the NCE kernels, so agreement between the two modules is evidence, not
tautology.
"""

from __future__ import annotations

import numpy as np

from .model import Gradient, ModelParams
from .nce import as_batch


def ns_posterior_true(params: ModelParams, word_id: int, context_id: int) -> float:
    """sigma(score): probability the sample is true. Normalizer modes are
    irrelevant here and ignored."""
    s = params.target_emb[word_id] @ params.context_emb[context_id] + params.bias[word_id]
    return float(np.exp(-np.logaddexp(0.0, -s)))


def ns_loss(params: ModelParams, examples) -> float:
    """Two-class log-likelihood with the sigmoid-of-score posterior."""
    batch = as_batch(examples)
    s_true = _scores(params, batch.contexts, batch.true_words)
    s_noise = _scores(params, batch.contexts, batch.noise_words)
    return float(-np.logaddexp(0.0, -s_true).sum() - np.logaddexp(0.0, s_noise).sum())


def ns_grad(params: ModelParams, examples) -> Gradient:
    """Exact gradient of :func:`ns_loss`; the log_zc block is always zero."""
    batch = as_batch(examples)
    s_true = _scores(params, batch.contexts, batch.true_words)
    s_noise = _scores(params, batch.contexts, batch.noise_words)
    coef_true = np.exp(-np.logaddexp(0.0, s_true))  # 1 - sigma(s)
    coef_noise = -np.exp(-np.logaddexp(0.0, -s_noise))  # -sigma(s)
    n_words = params.n_words
    ctx_all = np.concatenate([batch.contexts, np.repeat(batch.contexts, batch.k)])
    word_all = np.concatenate([batch.true_words, batch.noise_words.ravel()])
    coef_all = np.concatenate([coef_true, coef_noise.ravel()])
    residual = np.bincount(
        ctx_all * n_words + word_all, weights=coef_all, minlength=params.n_contexts * n_words
    ).reshape(params.n_contexts, n_words)
    return Gradient(
        target_emb=residual.T @ params.context_emb,
        context_emb=residual @ params.target_emb,
        bias=residual.sum(axis=0),
        log_zc=np.zeros_like(params.log_zc),
    )


def _scores(params: ModelParams, contexts: np.ndarray, words: np.ndarray) -> np.ndarray:
    ctx_vecs = params.context_emb[contexts]
    if words.ndim == 2:
        s = (params.target_emb[words] * ctx_vecs[:, None, :]).sum(axis=-1)
    else:
        s = (params.target_emb[words] * ctx_vecs).sum(axis=-1)
    return s + params.bias[words]
