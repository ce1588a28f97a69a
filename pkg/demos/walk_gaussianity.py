"""Noncolliding Bernoulli walks: exact fourth moments approach Wick's rule.

Starting from the packed configuration, N particles jump right with
probability 1/2 per step subject to never colliding.  After N steps the
centered power sums are asymptotically jointly Gaussian, so every centered
fourth moment approaches the sum over pairings of covariances.  All numbers
below are exact rationals computed from the Schur generating function.
"""
from fractions import Fraction

from schurclt.measures import StepFunction, build_chain, walk_chain
from schurclt.moments import centered_joint_moment, exact_covariance
from schurclt.symcore import packed

step = StepFunction.bernoulli(Fraction(1, 2))
for N in (2, 3, 4, 5):
    ch = build_chain(walk_chain(packed(N), step, N))
    obs = [(N, 1), (N, 1), (N, 2), (N, 2)]
    sc = [Fraction(N) ** k for _, k in obs]
    m4 = centered_joint_moment(ch, obs) / (sc[0] * sc[1] * sc[2] * sc[3])

    def C(i, j):
        return exact_covariance(ch, obs[i], obs[j]) / (sc[i] * sc[j])

    wick = C(0, 1) * C(2, 3) + C(0, 2) * C(1, 3) + C(0, 3) * C(1, 2)
    print(f"N={N}: E[c1 c1 c2 c2] = {float(m4):.5f}   pairings = {float(wick):.5f}   gap = {float(abs(m4 - wick)):.5f}")
