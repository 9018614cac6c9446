"""Self-contained verification suites: finite differences and NS/NCE agreement.

Both checks ship in the library (and are exposed as CLI commands) so the
core derivative and equivalence claims can be demonstrated from an installed
build, not only from the test tree. Each returns a small result object with
a preformatted report; callers decide how to surface it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nce, negsampling
from .corpus import stats_from_pairs
from .model import (
    PARAM_BLOCKS,
    Z_EXACT,
    Z_FIXED_ONE,
    Z_LEARNED_ZC,
    Gradient,
    ModelParams,
    grad_log_likelihood,
    init_params,
    log_likelihood,
    zero_gradient,
)
from .noise import uniform
from .seeding import STREAM_DATA, derive_rng

GRADCHECK_SUITES = ("mle", "nce-mc", "nce-exact", "ns")

# Fixed desk-scale geometry for the finite-difference suites.
_GC_VOCAB = 12
_GC_DIM = 4
_GC_K = 3
_GC_MODELS = 5
_GC_PAIRS = 40


@dataclass
class CheckResult:
    ok: bool
    lines: list[str] = field(default_factory=list)

    def report(self) -> str:
        return "\n".join(self.lines)


def finite_diff_gradient(loss_fn, params: ModelParams, step: float = 1e-5) -> Gradient:
    """Central-difference gradient of loss_fn over every parameter block.

    Mutates and restores params coordinate by coordinate; loss_fn must read
    the live arrays (no caching).
    """
    grad = zero_gradient(params)
    for name in PARAM_BLOCKS:
        arr = getattr(params, name)
        out = getattr(grad, name)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + step
            hi = loss_fn(params)
            arr[ix] = orig - step
            lo = loss_fn(params)
            arr[ix] = orig
            out[ix] = (hi - lo) / (2.0 * step)
    return grad


def _block_errors(analytic: Gradient, fd: Gradient) -> dict[str, tuple[float, tuple]]:
    """Worst error per block as (error, coordinate index).

    Error is |analytic - fd| / max(1, |analytic| + |fd|): relative for large
    coordinates, absolute near zero, so flat directions cannot inflate it.
    """
    worst = {}
    for name in PARAM_BLOCKS:
        a = getattr(analytic, name)
        f = getattr(fd, name)
        err = np.abs(a - f) / np.maximum(1.0, np.abs(a) + np.abs(f))
        flat = int(np.argmax(err))
        ix = np.unravel_index(flat, err.shape) if err.ndim > 1 else (flat,)
        worst[name] = (float(err.flat[flat]), ix)
    return worst


def run_gradcheck(
    which: str = "all",
    seed: int = 0,
    step: float = 1e-5,
    tol: float = 1e-5,
    corrupt: bool = False,
) -> CheckResult:
    """Finite-difference check of every analytic gradient implementation.

    which selects one of mle | nce-mc | nce-exact | ns, or "all". Each suite
    runs 5 random models; sampled-objective suites cover both normalizer
    treatments. The corrupt flag deliberately damages one analytic
    coordinate, as a negative control that the comparison can fail.
    """
    if which != "all" and which not in GRADCHECK_SUITES:
        raise ValueError(f"unknown gradcheck suite {which!r}")
    suites = GRADCHECK_SUITES if which == "all" else (which,)
    result = CheckResult(ok=True)
    for label in suites:
        for z_mode in _suite_z_modes(label):
            worst = {name: (0.0, ()) for name in PARAM_BLOCKS}
            for i in range(_GC_MODELS):
                analytic, fd = _one_gradcheck(label, z_mode, seed, i, step)
                if corrupt:
                    analytic.target_emb[0, 0] += 1.0
                for name, (err, ix) in _block_errors(analytic, fd).items():
                    if err > worst[name][0]:
                        worst[name] = (err, ix)
            tag = label if z_mode is None else f"{label}/{z_mode}"
            for name in PARAM_BLOCKS:
                err, ix = worst[name]
                line = f"gradcheck {tag} {name} worst_err {err:.3e}"
                if err > tol:
                    line += f" FAIL at {name}{list(ix)}"
                    result.ok = False
                result.lines.append(line)
    result.lines.append(
        "gradcheck PASS" if result.ok else f"gradcheck FAIL (tolerance {tol:g})"
    )
    return result


def _suite_z_modes(label: str):
    if label == "nce-mc" or label == "nce-exact":
        return (Z_LEARNED_ZC, Z_FIXED_ONE)
    return (None,)


def _one_gradcheck(label, z_mode, seed, i, step):
    rng = derive_rng(seed, STREAM_DATA, i)
    params = init_params(_GC_VOCAB, _GC_DIM, seed + i, z_mode=z_mode or Z_EXACT)
    if z_mode == Z_LEARNED_ZC:
        params.log_zc[:] = rng.normal(0.0, 0.5, params.n_contexts)
    # Contexts include the sentence-start id so its embedding row is covered.
    contexts = rng.integers(0, _GC_VOCAB + 1, _GC_PAIRS)
    words = rng.integers(0, _GC_VOCAB, _GC_PAIRS)
    pairs = np.stack([contexts, words], axis=1)
    if label == "mle":
        return grad_log_likelihood(params, pairs), finite_diff_gradient(
            lambda p: log_likelihood(p, pairs), params, step
        )
    if label == "ns":
        batch = nce.ProxyBatch(
            contexts=contexts,
            true_words=words,
            noise_words=rng.integers(0, _GC_VOCAB, (_GC_PAIRS, _GC_K)),
        )
        return negsampling.ns_grad(params, batch), finite_diff_gradient(
            lambda p: negsampling.ns_loss(p, batch), params, step
        )
    cfg = nce.NceConfig(k=_GC_K, z_mode=z_mode, q=uniform(_GC_VOCAB))
    if label == "nce-mc":
        batch = nce.ProxyBatch(
            contexts=contexts,
            true_words=words,
            noise_words=rng.integers(0, _GC_VOCAB, (_GC_PAIRS, _GC_K)),
        )
        return nce.mc_grad(params, batch, cfg), finite_diff_gradient(
            lambda p: nce.mc_loss(p, batch, cfg), params, step
        )
    # nce-exact: the analysis-form gradient against the full-expectation loss.
    stats = stats_from_pairs(pairs, _GC_VOCAB)
    return nce.exact_grad_analysis(params, stats, cfg), finite_diff_gradient(
        lambda p: nce.exact_loss(p, pairs, cfg), params, step
    )


def run_equiv_check(
    vocab_size: int = 8,
    seed: int = 1,
    n_draws: int = 20,
    tol: float = 1e-10,
    force_k: int | None = None,
) -> CheckResult:
    """Agreement of NS with NCE at k = |V| under uniform noise.

    Draws random (model, batch) pairs and compares losses and full gradient
    vectors computed by the two independent implementations. force_k
    overrides k away from |V|, as a negative control: the identity needs
    k * q(w) = 1 exactly.
    """
    if vocab_size < 2:
        raise ValueError("vocab_size must be >= 2")
    k = vocab_size if force_k is None else force_k
    q = uniform(vocab_size)
    cfg = nce.NceConfig(k=k, z_mode=Z_FIXED_ONE, q=q)
    max_dloss = 0.0
    max_dgrad = 0.0
    for i in range(n_draws):
        rng = derive_rng(seed, STREAM_DATA, i)
        params = init_params(vocab_size, 4, seed + i, z_mode=Z_FIXED_ONE)
        n = 30
        batch = nce.ProxyBatch(
            contexts=rng.integers(0, vocab_size + 1, n),
            true_words=rng.integers(0, vocab_size, n),
            noise_words=rng.integers(0, vocab_size, (n, k)),
        )
        dloss = abs(nce.mc_loss(params, batch, cfg) - negsampling.ns_loss(params, batch))
        dgrad = np.max(
            np.abs(
                nce.mc_grad(params, batch, cfg).to_vector()
                - negsampling.ns_grad(params, batch).to_vector()
            )
        )
        max_dloss = max(max_dloss, float(dloss))
        max_dgrad = max(max_dgrad, float(dgrad))
    ok = max_dloss <= tol and max_dgrad <= tol
    lines = [
        f"equiv-check k={k} |V|={vocab_size} draws={n_draws}",
        f"max |dloss| {max_dloss:.3e}",
        f"max |dgrad| {max_dgrad:.3e}",
        "equiv-check PASS" if ok else f"equiv-check FAIL (tolerance {tol:g})",
    ]
    return CheckResult(ok=ok, lines=lines)
