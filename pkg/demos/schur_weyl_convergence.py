"""Schur-Weyl measures: exact finite-N covariances against the contour limit.

The Schur-Weyl measure on signatures of length N with n boxes is the law of the
highest weight of an irreducible component of (C^N)^{tensor n}, picked with
probability proportional to the dimension it occupies.
With n = c N^2 the normalized power sums p_k / N^k have Gaussian fluctuations
whose covariance is a double contour integral.  The script prints the exact
covariances next to that limit.
"""
from schurclt.asymcov import schur_weyl_cov
from schurclt.measures import ChainSpec, build_chain, schur_weyl_measure
from schurclt.moments import exact_covariance, exact_mean

c = 1
print("limit covariances, c = 1")
for k1, k2 in [(1, 1), (1, 2), (2, 2), (2, 3)]:
    print(f"  cov(p{k1}, p{k2}) -> {schur_weyl_cov(c, k1, k2)}")

# p_1 is the number of boxes plus a constant: deterministic at every N
print("\nexact cov(p2, p2) / N^4 with n = N^2")
lim = schur_weyl_cov(c, 2, 2)
for N in (2, 3, 4, 5, 6, 7):
    ch = build_chain(ChainSpec(schur_weyl_measure(N, N * N), []))
    v = exact_covariance(ch, (0, 2), (0, 2)) / N**4
    m = exact_mean(ch, 0, 1)
    print(f"  N={N}:  {float(v):.6f}   gap {float(abs(v - lim)):.6f}   E p1 = {m}")

# the gap shrinks like 1/N
