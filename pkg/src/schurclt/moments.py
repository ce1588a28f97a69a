"""Exact finite-N moments of shifted power sums on signature chains.

Three routes are provided.

* ``exact_joint_moment`` (public): Schur functions are eigenfunctions of the
  operators D_k = V^{-1} (sum_i (x_i d/dx_i)^k) V with eigenvalue p_k, so the moment is
  computed by pulling eigenvalue products back through the kernels.
* ``direct_joint_moment``: plain summation over the explicit joint law.
* ``symbolic_joint_moment``: applies the differential operators literally to the
  Schur generating functions as sparse polynomials (tiny chains only).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Sequence, Tuple

from .measures import BuiltChain, SignatureMeasure
from .symcore import (
    Signature,
    SparsePolynomial,
    as_signature,
    schur_dimension,
    schur_to_polynomial,
    vandermonde,
    _check_symbolic,
)
from .freeprob import TruncatedSeries, series_one_plus_u_power


def power_sum(lam, k: int) -> int:
    """p_k = sum_i (lam_i + N - i)^k."""
    if k < 1:
        raise ValueError("power must be >= 1")
    return sum(l**k for l in as_signature(lam).shifted())


@dataclass(frozen=True)
class MomentRequest:
    """Product of p_k at the given chain levels, optionally divided by N_level^k."""

    terms: Tuple[Tuple[int, int], ...]
    normalized: bool = False

    def __init__(self, terms, normalized: bool = False):
        terms = tuple((int(l), int(k)) for l, k in terms)
        for _, k in terms:
            if k < 1:
                raise ValueError("powers must be >= 1")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "normalized", normalized)

    def by_level(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for l, k in self.terms:
            out.setdefault(l, []).append(k)
        return out


class TruncatedMoment(NamedTuple):
    value: Fraction
    error_bound: Fraction


def _level_factor(lam: Signature, ks: Sequence[int]) -> int:
    v = 1
    for k in ks:
        v *= power_sum(lam, k)
    return v


def _normalizer(chain: BuiltChain, req: MomentRequest) -> Fraction:
    if not req.normalized:
        return Fraction(1)
    d = 1
    for l, k in req.terms:
        d *= chain.levels[l].length ** k
    return Fraction(1, d)


def _validate(chain: BuiltChain, req: MomentRequest):
    for l, _ in req.terms:
        if not 0 <= l < len(chain.levels):
            raise ValueError(f"level {l} outside chain with {len(chain.levels)} levels")


def _propagate(chain: BuiltChain, req: MomentRequest):
    """Pull h_L = prod p back to the top: h_i = (prod_i p) * K_i h_{i+1}."""
    by = req.by_level()
    last = max(by) if by else 0
    h: Dict[Signature, Fraction] = {}
    # support of each level (the marginals) is where we need h
    lvl = last
    h = {lam: Fraction(_level_factor(lam, by.get(lvl, ()))) for lam in chain.levels[lvl].atoms}
    for lvl in range(last - 1, -1, -1):
        K = chain.kernels[lvl]
        ks = by.get(lvl, ())
        nh = {}
        for lam in chain.levels[lvl].atoms:
            row = K.row(lam)
            s = sum((p * h.get(mu, 0) for mu, p in row.atoms.items()), Fraction(0))
            if s:
                nh[lam] = s * _level_factor(lam, ks)
        h = nh
    return sum((w * h.get(lam, 0) for lam, w in chain.levels[0].atoms.items()), Fraction(0))


def _envelope(chain: BuiltChain, req: MomentRequest) -> Fraction:
    """Crude envelope: twice the largest |integrand| over the materialized supports."""
    by = req.by_level()
    env = Fraction(1)
    for lvl, ks in by.items():
        env *= max((abs(_level_factor(lam, ks)) for lam in chain.levels[lvl].atoms), default=0)
    return 2 * env


def exact_joint_moment(chain: BuiltChain, req: MomentRequest):
    """E[prod_j p_{k_j}(level_j)], exact.

    Returns a ``Fraction`` for exact chains and a :class:`TruncatedMoment` when some
    kernel was truncated; the bound is total truncated mass times a crude envelope
    (twice the largest integrand value seen on the retained support).
    """
    _validate(chain, req)
    val = _propagate(chain, req) * _normalizer(chain, req)
    if chain.is_exact():
        return val
    eps = max(m.truncation_mass for m in chain.levels)
    return TruncatedMoment(val, eps * _envelope(chain, req) * _normalizer(chain, req))


def _value(x):
    return x.value if isinstance(x, TruncatedMoment) else x


def direct_joint_moment(chain: BuiltChain, req: MomentRequest, max_paths: int = 2_000_000) -> Fraction:
    """Same expectation by summing over every path of the joint law."""
    _validate(chain, req)
    by = req.by_level()
    last = max(by) if by else 0
    # truncate the chain at the deepest requested level
    law = {(lam,): w for lam, w in chain.spec.terminal.atoms.items()}
    for K in chain.kernels[:last]:
        nxt = {}
        for path, w in law.items():
            for mu, p in K.row(path[-1]).atoms.items():
                nxt[path + (mu,)] = w * p
        law = nxt
        if len(law) > max_paths:
            from .symcore import BudgetError

            raise BudgetError(f"joint law exceeds {max_paths} paths")
    tot = Fraction(0)
    for path, w in law.items():
        v = 1
        for lvl, ks in by.items():
            v *= _level_factor(path[lvl], ks)
        tot += w * v
    return tot * _normalizer(chain, req)


def exact_covariance(chain: BuiltChain, a: Tuple[int, int], b: Tuple[int, int], normalized: bool = False):
    """cov(p_{k1} at level l1, p_{k2} at level l2)."""
    exy = exact_joint_moment(chain, MomentRequest([a, b], normalized))
    ex = exact_joint_moment(chain, MomentRequest([a], normalized))
    ey = exact_joint_moment(chain, MomentRequest([b], normalized))
    if any(isinstance(x, TruncatedMoment) for x in (exy, ex, ey)):
        v = _value(exy) - _value(ex) * _value(ey)
        bound = sum((x.error_bound for x in (exy, ex, ey) if isinstance(x, TruncatedMoment)), Fraction(0))
        return TruncatedMoment(v, 3 * bound)
    return exy - ex * ey


def exact_mean(chain: BuiltChain, level: int, k: int, normalized: bool = False):
    return exact_joint_moment(chain, MomentRequest([(level, k)], normalized))


def centered_joint_moment(chain: BuiltChain, pairs: Sequence[Tuple[int, int]]) -> Fraction:
    """E[prod (X_j - E X_j)] for X_j = p_{k_j} at level l_j, via inclusion-exclusion."""
    import itertools

    n = len(pairs)
    means = [_value(exact_joint_moment(chain, MomentRequest([p]))) for p in pairs]
    tot = Fraction(0)
    for r in range(n + 1):
        for S in itertools.combinations(range(n), r):
            rest = [i for i in range(n) if i not in S]
            m = _value(exact_joint_moment(chain, MomentRequest([pairs[i] for i in S]))) if S else Fraction(1)
            c = 1
            for i in rest:
                c *= -means[i]
            tot += m * c
    return tot


# ---------------------------------------------------------------------------
# literal operator route


def apply_euler_power(P: SparsePolynomial, m: int) -> SparsePolynomial:
    """sum_i (x_i d/dx_i)^m P."""
    out = SparsePolynomial(P.n)
    for i in range(P.n):
        Q = P
        for _ in range(m):
            Q = Q.euler(i)
        out = out + Q
    return out


def apply_D(S: SparsePolynomial, m: int) -> SparsePolynomial:
    """D_m S = V^{-1} sum_i (x_i d_i)^m (V S), with exact division."""
    V = vandermonde(S.n)
    return apply_euler_power(V * S, m).divide_exact(V)


def verify_eigenrelation(m: int, lam) -> bool:
    """Check D_m s_lam = p_m(lam) s_lam as an exact polynomial identity."""
    lam = as_signature(lam)
    _check_symbolic(len(lam), sum(abs(x) for x in lam), "verify_eigenrelation")
    s = schur_to_polynomial(lam)
    try:
        lhs = apply_D(s, m)
    except ValueError:
        return False
    return lhs == s * power_sum(lam, m)


def sgf_polynomial(rho: SignatureMeasure) -> SparsePolynomial:
    """Schur generating function sum rho(lam) s_lam / s_lam(1^N) as a Laurent polynomial."""
    if not rho.is_exact():
        raise ValueError("truncated measure has no finite generating function")
    out = SparsePolynomial(rho.length)
    for lam, w in rho.atoms.items():
        out = out + schur_to_polynomial(lam) * Fraction(w, schur_dimension(lam))
    return out


def symbolic_joint_moment(chain: BuiltChain, req: MomentRequest) -> Fraction:
    """Literal operator route: apply D at the top, then restrict/multiply, and repeat.

    Only exact chains with Bernoulli or explicit steps and few variables qualify.
    """
    _validate(chain, req)
    by = req.by_level()
    last = max(by) if by else 0
    S = sgf_polynomial(chain.spec.terminal)
    n = chain.spec.terminal.length
    for lvl in range(0, last + 1):
        for k in by.get(lvl, ()):
            S = apply_D(S, k)
        if lvl == last:
            break
        step = chain.spec.steps[lvl]
        if step.kind in ("projection", "combined"):
            S = S.substitute_ones(step.target_length)
            n = step.target_length
        if step.kind in ("multiplication", "combined"):
            S = S * step.g.polynomial(n)
    return S.at_ones() * _normalizer(chain, req)


# ---------------------------------------------------------------------------
# law of large numbers


def lln_moment(F: TruncatedSeries, k: int):
    """Limit k-th moment (1/(k+1)) [z^{-1}] (1/z + 1 + (1+z)F(1+z))^{k+1} / (1+z)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    need = k + 2
    if F.prec < need - 1:
        raise ValueError(f"series order {F.prec} too small; need at least {need - 1}")
    P = F.prec + 1
    Fz = TruncatedSeries(F.coeffs, F.val, F.prec, 0)
    f = TruncatedSeries([1, 1], -1, P, 0) + Fz * series_one_plus_u_power(1, P)
    integrand = f ** (k + 1) * series_one_plus_u_power(-1, P)
    c = integrand[-1]
    return c / (k + 1) if not isinstance(c, (int, Fraction)) else Fraction(c) / (k + 1)
