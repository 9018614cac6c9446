"""Seeded stochastic gradient ascent over the three objectives.

Plain SGD, no momentum or adaptivity: the point of the artifact is comparing
objectives, so the optimizer is kept identical across them. Each epoch
shuffles the pair multiset with a seeded permutation and, for the sampled
objectives, draws a fresh noise matrix from an epoch-derived stream, so runs
are bit-reproducible while noise is still resampled every pass.

Batch updates use the mean gradient over the batch, which keeps the learning
rate comparable across batch sizes.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import nce, negsampling, noise
from .corpus import GroundTruthTable, Vocabulary, stats_from_pairs
from .model import (
    ModelParams,
    Z_EXACT,
    Z_FIXED_ONE,
    Z_LEARNED_ZC,
    apply_gradient,
    grad_log_likelihood,
    init_params,
    log_likelihood,
    log_partitions,
    log_softmax_matrix,
    params_finite,
    save_model,
)
from .seeding import STREAM_NOISE, STREAM_SHUFFLE, derive_rng

OBJ_MLE = "mle_exact"
OBJ_NCE = "nce"
OBJ_NS = "ns"
OBJECTIVES = (OBJ_MLE, OBJ_NCE, OBJ_NS)


class TrainingDiverged(RuntimeError):
    """Raised when any parameter goes non-finite; names the epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    objective: str
    k: int = 5
    z_mode: str = Z_FIXED_ONE  # NCE only; NS freezes normalizers, MLE ignores them
    noise: str = "uniform"
    learning_rate: float = 0.5
    lr_decay: float = 0.98
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    eval_every: int = 10
    dim: int = 16

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.epochs < 1 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("epochs, batch_size, and eval_every must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class MetricsRow:
    epoch: int
    cross_entropy: float  # nats/token under the exact softmax
    kl_truth: float | None  # mean over contexts; None without a ground truth
    median_abs_log_z: float  # over contexts seen in the training data
    objective: float  # mean per-example value of the configured objective
    seconds: float  # wall-clock since training started


@dataclass(frozen=True)
class SweepRow:
    k: int
    final_kl: float
    final_ce: float
    median_abs_log_z: float


def train(
    config: TrainConfig,
    pairs: np.ndarray,
    n_words: int,
    truth: GroundTruthTable | None = None,
    vocab: Vocabulary | None = None,
    checkpoint_prefix: str | None = None,
    n_threads: int = 1,
) -> tuple[ModelParams, list[MetricsRow]]:
    """Run gradient ascent and return final parameters plus metric history.

    Metrics are recorded every ``eval_every`` epochs and at the final epoch;
    checkpoints (needing ``vocab``) are written at the same epochs. Fully
    deterministic given the config when ``n_threads == 1``; with more threads
    shard gradients are still reduced in a fixed order.
    """
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.shape[0] == 0:
        raise ValueError("training needs at least one pair")
    if checkpoint_prefix is not None and vocab is None:
        raise ValueError("checkpoints need a vocabulary")
    stats = stats_from_pairs(pairs, n_words)
    params = init_params(n_words, config.dim, config.seed, z_mode=_params_z_mode(config))
    cfg = None
    q = None
    if config.objective in (OBJ_NCE, OBJ_NS):
        q = noise.parse_noise_spec(config.noise, stats, n_words)
        if config.objective == OBJ_NCE:
            cfg = nce.NceConfig(k=config.k, z_mode=config.z_mode, q=q)

    n = pairs.shape[0]
    seen = stats.seen_contexts()
    history: list[MetricsRow] = []
    start = time.perf_counter()
    pool = ThreadPoolExecutor(max_workers=n_threads) if n_threads > 1 else None
    try:
        for epoch in range(1, config.epochs + 1):
            lr = config.learning_rate * config.lr_decay ** (epoch - 1)
            perm = derive_rng(config.seed, STREAM_SHUFFLE, epoch).permutation(n)
            noise_words = None
            if config.objective in (OBJ_NCE, OBJ_NS):
                noise_rng = derive_rng(config.seed, STREAM_NOISE, epoch)
                noise_words = noise.sample_array(q, (n, config.k), noise_rng)
            for lo in range(0, n, config.batch_size):
                idx = perm[lo : lo + config.batch_size]
                grad = _batch_gradient(params, pairs, noise_words, idx, config, cfg, pool, n_threads)
                apply_gradient(params, grad, lr / idx.size)
                if not params_finite(params):
                    raise TrainingDiverged(f"training diverged at epoch {epoch}", epoch)
            if epoch % config.eval_every == 0 or epoch == config.epochs:
                row = _metrics(params, pairs, stats, seen, truth, config, cfg, noise_words, epoch, start)
                history.append(row)
                if checkpoint_prefix is not None:
                    save_model(f"{checkpoint_prefix}.ep{epoch}.model", params, vocab)
    finally:
        if pool is not None:
            pool.shutdown()
    return params, history


def sweep_k(
    base: TrainConfig,
    ks: list[int],
    pairs: np.ndarray,
    n_words: int,
    truth: GroundTruthTable,
) -> list[SweepRow]:
    """One training run per k, all other settings and seeds identical."""
    if not ks:
        raise ValueError("ks must be nonempty")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("ks must be sorted ascending")
    rows = []
    for k in ks:
        try:
            _, history = train(replace(base, k=k), pairs, n_words, truth=truth)
        except TrainingDiverged as exc:
            raise TrainingDiverged(f"k={k}: {exc}", exc.epoch) from exc
        last = history[-1]
        rows.append(
            SweepRow(
                k=k,
                final_kl=last.kl_truth,
                final_ce=last.cross_entropy,
                median_abs_log_z=last.median_abs_log_z,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Internals
# ---------------------------------------------------------------------------

def _params_z_mode(config: TrainConfig) -> str:
    if config.objective == OBJ_MLE:
        return Z_EXACT
    if config.objective == OBJ_NS:
        # Normalizer parameters have no meaning under negative sampling;
        # freezing them keeps the NCE equivalence checks well-posed.
        return Z_FIXED_ONE
    if config.z_mode not in (Z_LEARNED_ZC, Z_FIXED_ONE):
        raise ValueError(f"NCE z_mode must be learned_zc or fixed_one, got {config.z_mode!r}")
    return config.z_mode


def _batch_gradient(params, pairs, noise_words, idx, config, cfg, pool, n_threads):
    if pool is None:
        return _shard_gradient(params, pairs, noise_words, idx, config, cfg)
    shards = np.array_split(idx, n_threads)
    futures = [
        pool.submit(_shard_gradient, params, pairs, noise_words, shard, config, cfg)
        for shard in shards
        if shard.size
    ]
    grads = [f.result() for f in futures]  # fixed reduction order
    total = grads[0]
    for g in grads[1:]:
        total.target_emb += g.target_emb
        total.context_emb += g.context_emb
        total.bias += g.bias
        total.log_zc += g.log_zc
    return total


def _shard_gradient(params, pairs, noise_words, idx, config, cfg):
    if config.objective == OBJ_MLE:
        return grad_log_likelihood(params, pairs[idx])
    batch = nce.ProxyBatch(
        contexts=pairs[idx, 0], true_words=pairs[idx, 1], noise_words=noise_words[idx]
    )
    if config.objective == OBJ_NCE:
        return nce.mc_grad(params, batch, cfg)
    return negsampling.ns_grad(params, batch)


def _metrics(params, pairs, stats, seen, truth, config, cfg, noise_words, epoch, start):
    n = pairs.shape[0]
    ce = -log_likelihood(params, pairs) / n
    kl = None if truth is None else kl_truth_model(truth, params)
    med_z = float(np.median(np.abs(log_partitions(params, seen))))
    if config.objective == OBJ_MLE:
        obj = -ce
    else:
        batch = nce.ProxyBatch(contexts=pairs[:, 0], true_words=pairs[:, 1], noise_words=noise_words)
        if config.objective == OBJ_NCE:
            obj = nce.mc_loss(params, batch, cfg) / n
        else:
            obj = negsampling.ns_loss(params, batch) / n
    return MetricsRow(
        epoch=epoch,
        cross_entropy=float(ce),
        kl_truth=kl,
        median_abs_log_z=med_z,
        objective=float(obj),
        seconds=time.perf_counter() - start,
    )


def kl_truth_rows(truth: GroundTruthTable, params: ModelParams) -> np.ndarray:
    """KL(truth row || model row) for each word context, in nats."""
    contexts = np.arange(truth.n_words)
    logp = log_softmax_matrix(params, contexts)
    t = truth.cond
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(t > 0, t * (np.log(t) - logp), 0.0)
    return terms.sum(axis=1)


def kl_truth_model(truth: GroundTruthTable, params: ModelParams) -> float:
    """Unweighted mean of kl_truth_rows."""
    return float(kl_truth_rows(truth, params).mean())


def cross_entropy(params: ModelParams, pairs: np.ndarray) -> float:
    """Mean negative log probability per pair under the exact softmax."""
    pairs = np.asarray(pairs, dtype=np.int64)
    return -log_likelihood(params, pairs) / pairs.shape[0]


# ---------------------------------------------------------------------------
# Metrics file format
# ---------------------------------------------------------------------------

METRICS_HEADER = "epoch,cross_entropy,kl_truth,median_abs_log_z,objective,seconds"


def write_metrics_csv(rows: list[MetricsRow], path) -> None:
    """Stable CSV of the metric history, 9 significant digits.

    ``kl_truth`` is left empty when no ground truth was supplied. The
    ``seconds`` column is written as 0: output files are part of the
    deterministic byte-for-byte reproducibility contract, and wall-clock
    time is not reproducible. Measured timings live on the in-memory rows.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(METRICS_HEADER + "\n")
        for row in rows:
            kl = "" if row.kl_truth is None else f"{row.kl_truth:.9g}"
            fh.write(
                f"{row.epoch},{row.cross_entropy:.9g},{kl},"
                f"{row.median_abs_log_z:.9g},{row.objective:.9g},0\n"
            )
