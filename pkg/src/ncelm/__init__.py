"""Bigram log-bilinear language model with exact MLE, NCE, and negative sampling.

A deliberately small, fully seeded laboratory: the vocabulary is tiny enough
that the exact softmax is always available as an oracle, so the sampled
objectives can be checked against ground truth rather than trusted.
"""

__version__ = "0.1.0"

from .corpus import (
    BOS_TOKEN,
    CorpusStats,
    GroundTruthTable,
    Vocabulary,
    build_vocab,
    extract_stats,
    generate_synthetic_corpus,
    generate_synthetic_stream,
    make_zipf_truth,
    pairs_from_tokens,
    stats_from_pairs,
)
from .model import (
    Gradient,
    ModelParams,
    Z_EXACT,
    Z_FIXED_ONE,
    Z_LEARNED_ZC,
    init_params,
    load_model,
    log_likelihood,
    grad_log_likelihood,
    save_model,
    softmax_row,
)
from .nce import NceConfig, ProxyBatch, ProxyExample
from .noise import NoiseDistribution, parse_noise_spec
from .trainer import (
    MetricsRow,
    SweepRow,
    TrainConfig,
    TrainingDiverged,
    kl_truth_model,
    sweep_k,
    train,
)

__all__ = [
    "BOS_TOKEN",
    "CorpusStats",
    "Gradient",
    "GroundTruthTable",
    "MetricsRow",
    "ModelParams",
    "NceConfig",
    "NoiseDistribution",
    "ProxyBatch",
    "ProxyExample",
    "SweepRow",
    "TrainConfig",
    "TrainingDiverged",
    "Vocabulary",
    "Z_EXACT",
    "Z_FIXED_ONE",
    "Z_LEARNED_ZC",
    "build_vocab",
    "extract_stats",
    "generate_synthetic_corpus",
    "generate_synthetic_stream",
    "grad_log_likelihood",
    "init_params",
    "kl_truth_model",
    "load_model",
    "log_likelihood",
    "make_zipf_truth",
    "pairs_from_tokens",
    "parse_noise_spec",
    "save_model",
    "softmax_row",
    "stats_from_pairs",
    "sweep_k",
    "train",
    "__version__",
]
