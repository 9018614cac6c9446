"""Noise distributions and constant-time sampling.

Contrastive training needs a stream of "noise" words drawn from a known
distribution q. Three families are supported, all derived from corpus counts:

  uniform         every word equally likely
  unigram         proportional to corpus frequency
  flattened:a     unigram raised to the power a (0 < a <= 1), which lifts
                  the tail; a = 0.75 is the usual compromise

Draws use the alias method: two precomputed tables turn each sample into one
uniform draw plus one coin flip, so cost is O(1) per word no matter how
skewed q is. The tables are audited two ways below: structurally (the
induced probabilities must reproduce q to machine precision) and
statistically (observed frequencies over 200000 draws must sit within a few
standard errors of q).
"""

import numpy as np

from ncelm.corpus import generate_synthetic_corpus, make_zipf_truth, stats_from_pairs
from ncelm.noise import flattened, induced_probs, sample_array, uniform, unigram
from ncelm.seeding import STREAM_NOISE, derive_rng

VOCAB = 8
truth = make_zipf_truth(VOCAB, 1.4, 2)
pairs = generate_synthetic_corpus(truth, 30000, 2)
stats = stats_from_pairs(pairs, VOCAB)

q_uni = uniform(VOCAB)
q_freq = unigram(stats)
q_flat = flattened(stats, 0.75)

print("noise probabilities per word id:")
print("%4s %10s %10s %10s %14s" % ("id", "count", "uniform", "unigram", "flattened:0.75"))
for w in range(VOCAB):
    print("%4d %10d %10.5f %10.5f %14.5f"
          % (w, stats.unigram_counts[w], q_uni.probs[w], q_freq.probs[w], q_flat.probs[w]))
print()

# Flattening compresses the dynamic range of q.
for name, q in (("uniform", q_uni), ("unigram", q_freq), ("flattened", q_flat)):
    ratio = q.probs.max() / q.probs.min()
    print("%-10s max/min probability ratio %8.2f" % (name, ratio))
print()

# Structural audit: push every (uniform cell, coin outcome) pair through the
# alias tables and accumulate the exact probability of landing on each word.
err = np.abs(induced_probs(q_flat) - q_flat.probs).max()
print("alias tables reproduce q exactly: max abs deviation %.2e" % err)

# Statistical audit: frequencies from seeded draws against q, in units of
# the binomial standard error.
n = 200000
draws = sample_array(q_flat, (n,), derive_rng(0, STREAM_NOISE))
freq = np.bincount(draws, minlength=VOCAB) / n
se = np.sqrt(q_flat.probs * (1 - q_flat.probs) / n)
print()
print("%4s %10s %10s %8s" % ("id", "expected", "observed", "z"))
for w in range(VOCAB):
    z = (freq[w] - q_flat.probs[w]) / se[w]
    print("%4d %10.5f %10.5f %8.2f" % (w, q_flat.probs[w], freq[w], z))
print()
print("largest |z| over %d draws: %.2f standard errors"
      % (n, np.abs((freq - q_flat.probs) / se).max()))
