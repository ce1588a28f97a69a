"""Domino tilings of the Aztec diamond: sampling, particles and fluctuations.

A uniformly random tiling (q = 1) is drawn by domino shuffling.  Reading the
tiling along diagonal slices gives interlacing particle configurations, i.e.
a Markov chain of signatures of growing length.  Power sums of these
signatures have Gaussian fluctuations; we compare a small Monte Carlo run
with the exact limit covariance.
"""
from fractions import Fraction

import numpy as np

from schurclt.asymcov import aztec_cov
from schurclt.gffmaps import aztec_model, trace_level_curve
from schurclt.moments import power_sum
from schurclt.samplers import aztec_to_signatures, estimate_covariance, run_replicas, sample_aztec

N, R, seed = 24, 400, 1

d = sample_aztec(N, 1, seed=seed)
print(f"one tiling of order {N}: {d.horizontal_count()} horizontal dominoes out of {N * (N + 1)}")
sl = aztec_to_signatures(d)
print("slice t = 4 before/after the Bernoulli step:", sl.before[4], sl.after[4])

# observables: p_k / N^k at the middle slice
ks = [1, 2]


def obs(g):
    s = aztec_to_signatures(sample_aztec(N, 1, rng=g))
    return [power_sum(s.before[N // 2], k) / N**k for k in ks]


vals = np.array(run_replicas(obs, R, seed))
cov, se = estimate_covariance(vals)
half = Fraction(1, 2)
print(f"\nMonte Carlo with {R} replicas vs limit at a = 1/2")
for i, k1 in enumerate(ks):
    for j, k2 in enumerate(ks):
        lim = float(aztec_cov(1, half, half, k1, k2))
        print(f"  cov(p{k1}, p{k2}): {cov[i, j]:.4f} +- {se[i, j]:.4f}   limit {lim:.4f}")

# the liquid region is the inscribed circle; its level curves map to rays in H
curve = trace_level_curve(aztec_model(1.0), 0.5, n=8)
print("\nlevel curve eta = 1/2 in the upper half-plane:")
print(np.round(curve.z, 4))
