"""Log-bilinear scorer, exact partition function, and the softmax oracle.

The scorer is ``s(w, c) = target_emb[w] . context_emb[c] + bias[w]``: the
smallest differentiable form whose parameters are shared across the exact
softmax objective and the sampling-based estimators layered on top.
``exp(s)`` is the unnormalized weight; dividing by the per-context partition
function ``Z(c)`` yields the normalized model. Everything here is computed
exactly (full-vocabulary sums with max-shifted reductions), which is what
makes this module usable as the oracle the estimators are judged against.

A model optionally carries one free log-normalizer per context (``log_zc``):
either unused (exact softmax), learned as a stand-in for ``log Z(c)``, or
pinned to zero so the classifier must self-normalize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary, build_vocab
from .seeding import STREAM_INIT, derive_rng

Z_EXACT = "exact"
Z_LEARNED_ZC = "learned_zc"
Z_FIXED_ONE = "fixed_one"
Z_MODES = (Z_EXACT, Z_LEARNED_ZC, Z_FIXED_ONE)

PARAM_BLOCKS = ("target_emb", "context_emb", "bias", "log_zc")


@dataclass
class ModelParams:
    """All trainable state. Context row ``n_words`` belongs to ``<s>``."""

    target_emb: np.ndarray  # (n_words, dim)
    context_emb: np.ndarray  # (n_words + 1, dim)
    bias: np.ndarray  # (n_words,)
    log_zc: np.ndarray  # (n_words + 1,)
    z_mode: str

    @property
    def n_words(self) -> int:
        return self.target_emb.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.context_emb.shape[0]

    @property
    def dim(self) -> int:
        return self.target_emb.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(
            target_emb=self.target_emb.copy(),
            context_emb=self.context_emb.copy(),
            bias=self.bias.copy(),
            log_zc=self.log_zc.copy(),
            z_mode=self.z_mode,
        )


@dataclass
class Gradient:
    """Partial derivatives, shape-matched to a ModelParams."""

    target_emb: np.ndarray
    context_emb: np.ndarray
    bias: np.ndarray
    log_zc: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.target_emb.ravel(), self.context_emb.ravel(), self.bias, self.log_zc]
        )

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_vector()))


def zero_gradient(params: ModelParams) -> Gradient:
    return Gradient(
        target_emb=np.zeros_like(params.target_emb),
        context_emb=np.zeros_like(params.context_emb),
        bias=np.zeros_like(params.bias),
        log_zc=np.zeros_like(params.log_zc),
    )


def init_params(n_words: int, dim: int, seed: int, z_mode: str = Z_EXACT) -> ModelParams:
    """Seeded init: embeddings uniform in [-0.1, 0.1], bias and log_zc zero."""
    if z_mode not in Z_MODES:
        raise ValueError(f"unknown z_mode {z_mode!r}")
    rng = derive_rng(seed, STREAM_INIT)
    return ModelParams(
        target_emb=rng.uniform(-0.1, 0.1, size=(n_words, dim)),
        context_emb=rng.uniform(-0.1, 0.1, size=(n_words + 1, dim)),
        bias=np.zeros(n_words),
        log_zc=np.zeros(n_words + 1),
        z_mode=z_mode,
    )


def apply_gradient(params: ModelParams, grad: Gradient, scale: float) -> None:
    """In-place ascent step ``params += scale * grad``.

    The per-context normalizers move only in learned mode; in the other modes
    they are frozen at their current values (zero for fixed-one models).
    """
    params.target_emb += scale * grad.target_emb
    params.context_emb += scale * grad.context_emb
    params.bias += scale * grad.bias
    if params.z_mode == Z_LEARNED_ZC:
        params.log_zc += scale * grad.log_zc


def params_finite(params: ModelParams) -> bool:
    return (
        bool(np.all(np.isfinite(params.target_emb)))
        and bool(np.all(np.isfinite(params.context_emb)))
        and bool(np.all(np.isfinite(params.bias)))
        and bool(np.all(np.isfinite(params.log_zc)))
    )


# ---------------------------------------------------------------------------
# Scoring and exact probabilities
# ---------------------------------------------------------------------------

def score(params: ModelParams, word_id: int, context_id: int) -> float:
    return float(
        params.target_emb[word_id] @ params.context_emb[context_id] + params.bias[word_id]
    )


def unnorm(params: ModelParams, word_id: int, context_id: int) -> float:
    """exp(score): the unnormalized weight of ``word`` after ``context``."""
    return float(np.exp(score(params, word_id, context_id)))


def unnorm_adjusted(params: ModelParams, word_id: int, context_id: int) -> float:
    """exp(score - log_zc[context]): weight divided by the learned normalizer."""
    return float(np.exp(score(params, word_id, context_id) - params.log_zc[context_id]))


def scores_for_context(params: ModelParams, context_id: int) -> np.ndarray:
    """Score of every vocabulary word after one context, shape (n_words,)."""
    return params.target_emb @ params.context_emb[context_id] + params.bias


def score_matrix(params: ModelParams, context_ids: np.ndarray) -> np.ndarray:
    """Scores for a batch of contexts, shape (len(context_ids), n_words)."""
    return params.context_emb[context_ids] @ params.target_emb.T + params.bias


def log_partition(params: ModelParams, context_id: int) -> float:
    """log Z(c) via a max-shifted reduction, safe for extreme scores."""
    s = scores_for_context(params, context_id)
    m = s.max()
    return float(m + np.log(np.exp(s - m).sum()))


def log_partitions(params: ModelParams, context_ids: np.ndarray) -> np.ndarray:
    s = score_matrix(params, np.asarray(context_ids))
    m = s.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(s - m).sum(axis=1, keepdims=True)))[:, 0]


def partition(params: ModelParams, context_id: int) -> float:
    return float(np.exp(log_partition(params, context_id)))


def softmax_from_scores(scores: np.ndarray) -> np.ndarray:
    """Shift-invariant softmax over the last axis."""
    e = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def softmax_row(params: ModelParams, context_id: int) -> np.ndarray:
    """Normalized distribution over words for one context."""
    return softmax_from_scores(scores_for_context(params, context_id))


def softmax_prob(params: ModelParams, word_id: int, context_id: int) -> float:
    return float(softmax_row(params, context_id)[word_id])


def log_softmax_matrix(params: ModelParams, context_ids: np.ndarray) -> np.ndarray:
    s = score_matrix(params, np.asarray(context_ids))
    m = s.max(axis=1, keepdims=True)
    return s - m - np.log(np.exp(s - m).sum(axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# Exact maximum-likelihood oracle
# ---------------------------------------------------------------------------

def pair_count_matrix(pairs: np.ndarray, n_words: int) -> np.ndarray:
    """Multiset of (context, word) pairs as a dense count matrix."""
    pairs = np.asarray(pairs, dtype=np.int64)
    flat = pairs[:, 0] * n_words + pairs[:, 1]
    counts = np.bincount(flat, minlength=(n_words + 1) * n_words)
    return counts.reshape(n_words + 1, n_words).astype(np.float64)


def log_likelihood(params: ModelParams, pairs: np.ndarray) -> float:
    """Total log probability of the pairs under the exact softmax model."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.shape[0] == 0:
        raise ValueError("log_likelihood needs at least one pair")
    counts = pair_count_matrix(pairs, params.n_words)
    active = np.flatnonzero(counts.sum(axis=1) > 0)
    logp = log_softmax_matrix(params, active)
    return float((counts[active] * logp).sum())


def grad_log_likelihood(params: ModelParams, pairs: np.ndarray) -> Gradient:
    """Exact gradient of :func:`log_likelihood`.

    Per pair the score of the observed word goes up and the expected score
    under the model distribution comes down; accumulated over the multiset
    this reduces to the residual counts ``N(c, .) - n_c * p(. | c)``.
    """
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.shape[0] == 0:
        raise ValueError("grad_log_likelihood needs at least one pair")
    counts = pair_count_matrix(pairs, params.n_words)
    n_c = counts.sum(axis=1)
    active = np.flatnonzero(n_c > 0)
    probs = softmax_from_scores(score_matrix(params, active))
    residual = np.zeros_like(counts)
    residual[active] = counts[active] - n_c[active, None] * probs
    return Gradient(
        target_emb=residual.T @ params.context_emb,
        context_emb=residual @ params.target_emb,
        bias=residual.sum(axis=0),
        log_zc=np.zeros_like(params.log_zc),
    )


def normalization_stats(params: ModelParams, context_ids) -> dict[str, float]:
    """Order statistics of log Z over a set of contexts."""
    context_ids = np.asarray(list(context_ids), dtype=np.int64)
    if context_ids.size == 0:
        raise ValueError("normalization_stats needs at least one context")
    lz = log_partitions(params, context_ids)
    return {"min": float(lz.min()), "median": float(np.median(lz)), "max": float(lz.max())}


def set_log_zc_to_partition(params: ModelParams) -> None:
    """Pin each context normalizer to its exact log partition value.

    After this call the adjusted weight ``exp(s - log_zc)`` equals the
    normalized model probability, the regime the learned normalizers are
    meant to approximate.
    """
    params.log_zc[:] = log_partitions(params, np.arange(params.n_contexts))


# ---------------------------------------------------------------------------
# Model file format
# ---------------------------------------------------------------------------

def save_model(path, params: ModelParams, vocab: Vocabulary) -> None:
    """Versioned text dump; floats carry 17 significant digits and round-trip
    bit-faithfully."""
    if len(vocab) != params.n_words:
        raise ValueError("vocabulary size does not match model size")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"lblm v1 {params.n_words} {params.dim} {params.z_mode}\n")
        for word in vocab.words:
            fh.write(word + "\n")
        _write_block(fh, "target_emb", params.target_emb)
        _write_block(fh, "context_emb", params.context_emb)
        _write_block(fh, "bias", params.bias[None, :])
        _write_block(fh, "log_zc", params.log_zc[None, :])


def load_model(path) -> tuple[ModelParams, Vocabulary]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split()
    if len(header) != 5 or header[0] != "lblm" or header[1] != "v1":
        raise ValueError(f"bad model header: {lines[0]!r}")
    n_words, dim, z_mode = int(header[2]), int(header[3]), header[4]
    if z_mode not in Z_MODES:
        raise ValueError(f"unknown z_mode {z_mode!r} in model file")
    vocab = build_vocab(lines[1 : 1 + n_words])
    pos = 1 + n_words
    blocks = {}
    expected = {
        "target_emb": (n_words, dim),
        "context_emb": (n_words + 1, dim),
        "bias": (1, n_words),
        "log_zc": (1, n_words + 1),
    }
    for name in PARAM_BLOCKS:
        rows, cols = expected[name]
        if pos + 1 + rows > len(lines):
            raise ValueError(f"model file truncated inside block {name!r}")
        if lines[pos] != name:
            raise ValueError(f"expected block {name!r}, found {lines[pos]!r}")
        data = np.array(
            [[float(x) for x in lines[pos + 1 + r].split()] for r in range(rows)]
        )
        if data.shape != (rows, cols):
            raise ValueError(f"block {name!r} has shape {data.shape}, expected {(rows, cols)}")
        blocks[name] = data
        pos += 1 + rows
    params = ModelParams(
        target_emb=blocks["target_emb"],
        context_emb=blocks["context_emb"],
        bias=blocks["bias"][0],
        log_zc=blocks["log_zc"][0],
        z_mode=z_mode,
    )
    return params, vocab


def _write_block(fh, name: str, data: np.ndarray) -> None:
    fh.write(name + "\n")
    for row in data:
        fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
