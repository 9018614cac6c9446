"""Command-line front end: data generation, training, evaluation, checks.

Exit codes are a stable scripting contract:
  0 success, 1 verification failure, 2 usage or I/O error, 3 divergence.

Every command that writes an output file also writes ``<out>.config`` echoing
the resolved flag values and tool version, so any artifact can be regenerated
from its sidecar alone. Numeric results meant for downstream analysis go to
CSV files, never to parsed stdout text.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .checks import GRADCHECK_SUITES, run_equiv_check, run_gradcheck
from .corpus import (
    build_vocab,
    generate_synthetic_stream,
    make_zipf_truth,
    pairs_from_tokens,
    read_corpus_tokens,
    read_truth,
    stats_from_pairs,
    write_corpus_tokens,
    write_truth,
)
from .model import Z_FIXED_ONE, Z_LEARNED_ZC, load_model, normalization_stats, save_model
from .trainer import (
    OBJ_MLE,
    OBJ_NCE,
    OBJ_NS,
    TrainConfig,
    TrainingDiverged,
    cross_entropy,
    kl_truth_rows,
    sweep_k,
    train,
    write_metrics_csv,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

_OBJECTIVES = {"mle": OBJ_MLE, "nce": OBJ_NCE, "ns": OBJ_NS}
_Z_MODES = {
    "learned_zc": Z_LEARNED_ZC,
    "fixed_one": Z_FIXED_ONE,
    "learned": Z_LEARNED_ZC,
    "fixed": Z_FIXED_ONE,
}

SWEEP_HEADER = "k,seed,final_kl,final_ce,median_abs_log_z"


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncelm",
        description="Bigram log-bilinear language model: exact MLE, "
        "noise contrastive estimation, and negative sampling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic corpus and its ground truth")
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--zipf-s", type=float, default=1.2, help="rank-frequency exponent")
    p.add_argument("--tokens", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train one model and write metrics + model files")
    _add_data_flags(p, truth_required=False)
    p.add_argument("--objective", type=str.lower, choices=sorted(_OBJECTIVES), required=True)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", action="store_true",
                   help="also write <out>.ep<N>.model at each metrics epoch")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="model file; metrics go to <out>.metrics.csv")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="report cross-entropy, KL to truth, normalizer spread")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--truth")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="train once per (k, seed) and tabulate final metrics")
    _add_data_flags(p, truth_required=True)
    p.add_argument("--objective", type=str.lower, choices=("nce", "ns"), default="nce")
    _add_train_flags(p)
    p.add_argument("--ks", required=True, help="comma list of positive k values, ascending")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds, base-seed upward")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gradcheck", help="finite-difference check of every gradient")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--which", choices=GRADCHECK_SUITES + ("all",), default="all")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("equiv-check", help="NS vs NCE agreement at k = vocab size")
    p.add_argument("--vocab-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--force-k", type=int, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_equiv_check)
    return parser


def _add_data_flags(p, truth_required: bool) -> None:
    p.add_argument("--corpus", required=True)
    p.add_argument("--truth", required=truth_required)


def _add_train_flags(p) -> None:
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--z-mode", type=str.lower, choices=sorted(_Z_MODES), default="fixed_one")
    p.add_argument("--noise", default="uniform",
                   help="uniform | unigram | flattened:<alpha>")
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--lr-decay", type=float, default=0.98)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--dim", type=int, default=16)


# ---------------------------------------------------------------------------
# Command bodies
# ---------------------------------------------------------------------------

def _cmd_gen_data(args) -> int:
    if args.vocab_size < 2:
        print("error: --vocab-size must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    if args.tokens < 1:
        print("error: --tokens must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    truth = make_zipf_truth(args.vocab_size, args.zipf_s, args.seed)
    vocab = build_vocab(f"w{i}" for i in range(args.vocab_size))
    ids = generate_synthetic_stream(truth, args.tokens, args.seed)
    write_corpus_tokens(args.out_prefix + ".txt", (vocab.word_of(i) for i in ids))
    write_truth(args.out_prefix + ".truth", truth, vocab)
    _write_config(args.out_prefix, args)
    print(f"wrote {args.out_prefix}.txt and {args.out_prefix}.truth")
    return EXIT_OK


def _load_training_data(args):
    tokens = read_corpus_tokens(args.corpus)
    if args.truth:
        truth, vocab = read_truth(args.truth)
    else:
        truth, vocab = None, build_vocab(tokens)
    return pairs_from_tokens(tokens, vocab), len(vocab), truth, vocab


def _train_config(args, objective: str, seed: int) -> TrainConfig:
    z_mode = _Z_MODES[args.z_mode]
    if objective == OBJ_NS and z_mode == Z_LEARNED_ZC:
        print(
            "warning: negative sampling has no learnable normalizer; "
            "z is frozen at 1",
            file=sys.stderr,
        )
    return TrainConfig(
        objective=objective,
        k=args.k,
        z_mode=Z_FIXED_ONE if objective == OBJ_NS else z_mode,
        noise=args.noise,
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=seed,
        eval_every=args.eval_every,
        dim=args.dim,
    )


def _cmd_train(args) -> int:
    pairs, n_words, truth, vocab = _load_training_data(args)
    config = _train_config(args, _OBJECTIVES[args.objective], args.seed)
    prefix = args.out if args.checkpoint_every else None
    params, history = train(
        config, pairs, n_words,
        truth=truth, vocab=vocab, checkpoint_prefix=prefix, n_threads=args.threads,
    )
    save_model(args.out, params, vocab)
    write_metrics_csv(history, args.out + ".metrics.csv")
    _write_config(args.out, args)
    last = history[-1]
    print(f"final epoch {last.epoch} cross_entropy {last.cross_entropy:.9g}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    params, vocab = load_model(args.model)
    tokens = read_corpus_tokens(args.corpus)
    try:
        pairs = pairs_from_tokens(tokens, vocab)
    except ValueError as exc:
        print(f"error: corpus does not match model vocabulary: {exc}", file=sys.stderr)
        return EXIT_USAGE
    stats = stats_from_pairs(pairs, len(vocab))
    zstats = normalization_stats(params, stats.seen_contexts())
    print(f"cross_entropy {cross_entropy(params, pairs):.9g}")
    print(f"log_z min {zstats['min']:.9g} median {zstats['median']:.9g} max {zstats['max']:.9g}")
    if args.truth:
        truth, tvocab = read_truth(args.truth)
        if tvocab.words != vocab.words:
            print("error: ground-truth vocabulary does not match model", file=sys.stderr)
            return EXIT_USAGE
        rows = kl_truth_rows(truth, params)
        for c, kl in enumerate(rows):
            print(f"kl {vocab.word_of(c)} {kl:.9g}")
        print(f"kl_mean {rows.mean():.9g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        ks = [int(x) for x in args.ks.split(",") if x]
    except ValueError:
        print(f"error: bad --ks value {args.ks!r}", file=sys.stderr)
        return EXIT_USAGE
    if not ks or any(k < 1 for k in ks):
        print("error: --ks must be a comma list of positive integers", file=sys.stderr)
        return EXIT_USAGE
    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    pairs, n_words, truth, _ = _load_training_data(args)
    _write_config(args.out, args)
    # Rows are flushed as they finish so a diverging run leaves partial results.
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(SWEEP_HEADER + "\n")
        fh.flush()
        for offset in range(args.seeds):
            seed = args.seed + offset
            base = _train_config(args, _OBJECTIVES[args.objective], seed)
            try:
                for row in sweep_k(base, ks, pairs, n_words, truth):
                    fh.write(
                        f"{row.k},{seed},{row.final_kl:.9g},"
                        f"{row.final_ce:.9g},{row.median_abs_log_z:.9g}\n"
                    )
                    fh.flush()
            except TrainingDiverged as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_DIVERGED
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    result = run_gradcheck(which=args.which, seed=args.seed, corrupt=args.corrupt)
    print(result.report())
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


def _cmd_equiv_check(args) -> int:
    if args.vocab_size < 2:
        print("error: --vocab-size must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    result = run_equiv_check(
        vocab_size=args.vocab_size, seed=args.seed, force_k=args.force_k
    )
    print(result.report())
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


def _write_config(out_base: str, args) -> None:
    """Sidecar listing all resolved flag values, one per line, sorted."""
    skip = {"func", "command"}
    with open(out_base + ".config", "w", encoding="utf-8") as fh:
        fh.write(f"command = {args.command}\n")
        fh.write(f"version = {__version__}\n")
        for name in sorted(vars(args)):
            if name in skip:
                continue
            fh.write(f"{name.replace('_', '-')} = {getattr(args, name)}\n")


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
