"""Corpus ingestion, bigram statistics, and synthetic data generation.

The model predicts each token from the single previous token, so the corpus
reduces to a multiset of (context, word) pairs. A reserved ``<s>`` token acts
as the context of the first token in a stream; it is a valid context but never
a predicted word, and occupies context id ``|V|`` (one past the last word id).

Empirical distributions are exact ratios of integer counts, which keeps them
usable as oracles for the estimators built on top of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import STREAM_DATA, derive_rng

BOS_TOKEN = "<s>"


@dataclass(frozen=True)
class Vocabulary:
    """Bidirectional word/id map with dense 0-based ids."""

    words: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.words)

    def id_of(self, word: str) -> int:
        return self.index[word]

    def word_of(self, word_id: int) -> str:
        return self.words[word_id]

    @property
    def bos_context(self) -> int:
        """Context id of the begin-of-sequence marker."""
        return len(self.words)

    def context_token(self, context_id: int) -> str:
        return BOS_TOKEN if context_id == self.bos_context else self.words[context_id]


@dataclass(frozen=True)
class CorpusStats:
    """Exact bigram and unigram counts for one token stream.

    ``bigram_counts`` has one row per context (the last row is ``<s>``) and one
    column per word. Rows sum to ``context_counts``; unigram counts sum to
    ``total_tokens``.
    """

    bigram_counts: np.ndarray  # (n_words + 1, n_words), int64
    context_counts: np.ndarray  # (n_words + 1,), int64
    unigram_counts: np.ndarray  # (n_words,), int64
    total_tokens: int

    @property
    def n_words(self) -> int:
        return self.bigram_counts.shape[1]

    def seen_contexts(self) -> np.ndarray:
        """Ids of contexts that occur at least once."""
        return np.flatnonzero(self.context_counts > 0)


@dataclass(frozen=True)
class GroundTruthTable:
    """Known generating distribution for synthetic experiments.

    ``cond[c]`` is the conditional distribution over words given context word
    ``c``; ``context_marginal`` is the distribution over contexts.
    """

    cond: np.ndarray  # (n_words, n_words), rows sum to 1
    context_marginal: np.ndarray  # (n_words,), sums to 1

    @property
    def n_words(self) -> int:
        return self.cond.shape[0]

    def validate(self) -> None:
        if np.any(self.cond < 0) or np.any(self.context_marginal < 0):
            raise ValueError("ground truth has negative probabilities")
        if not np.allclose(self.cond.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("ground truth conditional rows must sum to 1")
        if not np.isclose(self.context_marginal.sum(), 1.0, atol=1e-12, rtol=0):
            raise ValueError("ground truth context marginal must sum to 1")


def build_vocab(tokens) -> Vocabulary:
    """Assign dense ids to distinct tokens in first-occurrence order."""
    index: dict[str, int] = {}
    for tok in tokens:
        if tok == BOS_TOKEN:
            raise ValueError(f"token {BOS_TOKEN!r} is reserved for the sequence start")
        if tok not in index:
            index[tok] = len(index)
    if len(index) < 2:
        raise ValueError(f"degenerate vocabulary: need >= 2 distinct tokens, got {len(index)}")
    return Vocabulary(words=tuple(index), index=index)


def pairs_from_tokens(tokens, vocab: Vocabulary) -> np.ndarray:
    """Map a token stream to its (context_id, word_id) pairs, ``<s>`` first.

    Raises on the first token missing from ``vocab``, naming its position.
    """
    ids = np.empty(len(tokens), dtype=np.int64)
    for pos, tok in enumerate(tokens):
        wid = vocab.index.get(tok)
        if wid is None:
            raise ValueError(f"unknown token {tok!r} at position {pos}")
        ids[pos] = wid
    if ids.size == 0:
        raise ValueError("empty token stream")
    pairs = np.empty((ids.size, 2), dtype=np.int64)
    pairs[0, 0] = vocab.bos_context
    pairs[1:, 0] = ids[:-1]
    pairs[:, 1] = ids
    return pairs


def stats_from_pairs(pairs: np.ndarray, n_words: int) -> CorpusStats:
    """Tally a (context, word) pair multiset into exact count tables."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise ValueError("pairs must be a nonempty (n, 2) array")
    n_contexts = n_words + 1
    flat = pairs[:, 0] * n_words + pairs[:, 1]
    bigram = np.bincount(flat, minlength=n_contexts * n_words).reshape(n_contexts, n_words)
    unigram = np.bincount(pairs[:, 1], minlength=n_words)
    return CorpusStats(
        bigram_counts=bigram,
        context_counts=bigram.sum(axis=1),
        unigram_counts=unigram,
        total_tokens=int(pairs.shape[0]),
    )


def extract_stats(tokens, vocab: Vocabulary) -> CorpusStats:
    """Count consecutive-pair bigrams and unigrams over a token stream."""
    return stats_from_pairs(pairs_from_tokens(tokens, vocab), len(vocab))


def empirical_conditional(stats: CorpusStats, context_id: int, word_id: int) -> float:
    """p̃(word | context) as an exact count ratio."""
    n_c = stats.context_counts[context_id]
    if n_c == 0:
        raise ValueError(f"unseen context id {context_id}")
    return stats.bigram_counts[context_id, word_id] / n_c


def empirical_context_marginal(stats: CorpusStats, context_id: int) -> float:
    """p̃(context): share of pairs whose context is ``context_id``."""
    return stats.context_counts[context_id] / stats.total_tokens


def generate_synthetic_corpus(truth: GroundTruthTable, n_tokens: int, seed: int) -> np.ndarray:
    """Draw ``n_tokens`` independent (context, word) pairs from the truth.

    Contexts come from ``context_marginal`` and words from the matching
    conditional row, so tallied pairs converge to the truth tables.
    """
    if n_tokens < 1:
        raise ValueError("n_tokens must be >= 1")
    rng = derive_rng(seed, STREAM_DATA)
    contexts = _sample_rows(truth.context_marginal[None, :], np.zeros(n_tokens, dtype=np.int64), rng)
    words = _sample_rows(truth.cond, contexts, rng)
    pairs = np.empty((n_tokens, 2), dtype=np.int64)
    pairs[:, 0] = contexts
    pairs[:, 1] = words
    return pairs


def generate_synthetic_stream(truth: GroundTruthTable, n_tokens: int, seed: int) -> np.ndarray:
    """Generate a token-id chain whose consecutive pairs follow the truth.

    The first token comes from ``context_marginal``; each later token is drawn
    conditional on its predecessor. When the marginal is the stationary
    distribution of ``cond`` (as :func:`make_zipf_truth` arranges), the chain's
    unigram frequencies also converge to the marginal, so the flat-file corpus
    format stays faithful to the truth.
    """
    if n_tokens < 1:
        raise ValueError("n_tokens must be >= 1")
    rng = derive_rng(seed, STREAM_DATA)
    out = np.empty(n_tokens, dtype=np.int64)
    # Inverse-CDF draws, one token at a time: the chain is inherently serial.
    cdf = np.cumsum(truth.cond, axis=1)
    cdf[:, -1] = 1.0
    out[0] = np.searchsorted(np.cumsum(truth.context_marginal), rng.random(), side="right")
    u = rng.random(n_tokens - 1)
    for i in range(1, n_tokens):
        out[i] = np.searchsorted(cdf[out[i - 1]], u[i - 1], side="right")
    return out


def _sample_rows(table: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized inverse-CDF sampling, one draw per entry of ``rows``."""
    cdf = np.cumsum(table, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(rows.shape[0])
    picked = cdf[rows]
    return (u[:, None] > picked).sum(axis=1).astype(np.int64)


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary row vector of a strictly positive transition matrix."""
    vals, vecs = np.linalg.eig(transition.T)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.real(vecs[:, idx])
    pi = np.abs(pi)
    return pi / pi.sum()


def make_zipf_truth(n_words: int, zipf_s: float, seed: int) -> GroundTruthTable:
    """Build a skewed synthetic truth with Zipf-shaped conditional rows.

    Each row holds probabilities proportional to ``rank**-zipf_s``, assigned to
    words through an independent seeded permutation per context, so every word
    is common after some contexts and rare after others. The context marginal
    is the stationary distribution of the resulting transition matrix, which
    makes chain-generated corpora and pair-sampled corpora agree.
    """
    if n_words < 2:
        raise ValueError("n_words must be >= 2")
    rng = derive_rng(seed, STREAM_DATA, 1)
    ranks = np.arange(1, n_words + 1, dtype=np.float64)
    shape = ranks ** (-zipf_s)
    shape /= shape.sum()
    cond = np.empty((n_words, n_words))
    for c in range(n_words):
        cond[c, rng.permutation(n_words)] = shape
    truth = GroundTruthTable(cond=cond, context_marginal=stationary_distribution(cond))
    truth.validate()
    return truth


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_corpus_tokens(path) -> list[str]:
    """Whitespace-split tokens of a text corpus, all lines concatenated."""
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().split()


def write_corpus_tokens(path, tokens) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(tokens))
        fh.write("\n")


def write_vocab(path, vocab: Vocabulary) -> None:
    """One token per line; the line number is the id."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in vocab.words:
            fh.write(word + "\n")


def read_vocab(path) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as fh:
        words = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    return build_vocab(words)


def write_truth(path, truth: GroundTruthTable, vocab: Vocabulary) -> None:
    """Versioned text format: header, vocab line, marginal line, cond rows."""
    n = truth.n_words
    if len(vocab) != n:
        raise ValueError("vocabulary size does not match truth size")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"gt v1 {n}\n")
        fh.write(" ".join(vocab.words) + "\n")
        fh.write("marginal " + _fmt_row(truth.context_marginal) + "\n")
        for c in range(n):
            fh.write(_fmt_row(truth.cond[c]) + "\n")


def read_truth(path) -> tuple[GroundTruthTable, Vocabulary]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    header = lines[0].split()
    if len(header) != 3 or header[0] != "gt" or header[1] != "v1":
        raise ValueError(f"bad ground-truth header: {lines[0]!r}")
    n = int(header[2])
    vocab = build_vocab(lines[1].split())
    if len(vocab) != n:
        raise ValueError("ground-truth vocabulary line does not match header size")
    marg_fields = lines[2].split()
    if marg_fields[0] != "marginal" or len(marg_fields) != n + 1:
        raise ValueError("bad ground-truth marginal line")
    marginal = np.array([float(x) for x in marg_fields[1:]])
    cond = np.array([[float(x) for x in lines[3 + c].split()] for c in range(n)])
    truth = GroundTruthTable(cond=cond, context_marginal=marginal)
    truth.validate()
    return truth, vocab


def _fmt_row(values: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in values)
