"""Exact symmetric-function engine.

Signatures, Schur evaluation (Jacobi--Trudi), dimensions, skew dimensions,
Littlewood--Richardson expansion and a sparse exact Laurent polynomial type
used for small symbolic checks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, prod
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Exponent = Tuple[int, ...]


class BudgetError(RuntimeError):
    """Raised when an exact computation would exceed the configured size limits."""


@dataclass
class SymbolicLimits:
    """Size limits for expanded polynomial work (variables, boxes)."""

    variables: int = 5
    boxes: int = 12


LIMITS = SymbolicLimits()


def _check_symbolic(n: int, boxes: int = 0, what: str = "symbolic expansion"):
    if n > LIMITS.variables:
        raise BudgetError(f"{what}: {n} variables exceeds limit {LIMITS.variables}")
    if boxes > LIMITS.boxes:
        raise BudgetError(f"{what}: {boxes} boxes exceeds limit {LIMITS.boxes}")


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True, order=True)
class Signature:
    """Weakly decreasing integer vector (lambda_1 >= ... >= lambda_N)."""

    parts: Tuple[int, ...]

    def __init__(self, parts: Iterable[int]):
        p = tuple(int(v) for v in parts)
        for i in range(len(p) - 1):
            if p[i] < p[i + 1]:
                raise ValueError(f"signature must be weakly decreasing: {p}")
        object.__setattr__(self, "parts", p)

    @property
    def length(self) -> int:
        return len(self.parts)

    N = length

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self):
        return f"Signature({list(self.parts)})"

    @property
    def size(self) -> int:
        """|lambda| = sum of parts."""
        return sum(self.parts)

    def shifted(self) -> Tuple[int, ...]:
        """Particle coordinates lambda_i + N - i (strictly decreasing)."""
        n = len(self.parts)
        return tuple(v + n - 1 - i for i, v in enumerate(self.parts))

    def shift(self, c: int) -> "Signature":
        return Signature(v + c for v in self.parts)

    @classmethod
    def from_shifted(cls, coords: Iterable[int]) -> "Signature":
        l = sorted((int(v) for v in coords), reverse=True)
        n = len(l)
        return cls(v - (n - 1 - i) for i, v in enumerate(l))

    def interlaces(self, other: "Signature") -> bool:
        """True if self (length N-1) interlaces other (length N): self < other."""
        if len(other) != len(self) + 1:
            return False
        return all(other[i + 1] <= self[i] <= other[i] for i in range(len(self)))


def as_signature(x) -> Signature:
    return x if isinstance(x, Signature) else Signature(x)


def packed(n: int) -> Signature:
    return Signature((0,) * n)


# ---------------------------------------------------------------------------
# exact linear algebra


def det_exact(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign = 1
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        p = m[c][c]
        d *= p
        for r in range(c + 1, n):
            f = m[r][c]
            if f:
                f = f / p
                row_r, row_c = m[r], m[c]
                for j in range(c + 1, n):
                    row_r[j] -= f * row_c[j]
    return sign * d


def complete_homogeneous(x: Sequence, kmax: int) -> list:
    """h_0..h_kmax evaluated at the point x (exact when x is rational)."""
    h = [Fraction(1)] + [Fraction(0)] * kmax
    for xi in x:
        xi = Fraction(xi)
        for k in range(1, kmax + 1):
            h[k] = h[k] + xi * h[k - 1]
    return h


def _jacobi_trudi(lam: Sequence[int], mu: Sequence[int], h) -> Fraction:
    """det[h_{lam_i - mu_j - i + j}] for partitions lam, mu (mu padded)."""
    n = len(lam)
    mu = list(mu) + [0] * (n - len(mu))

    def H(r):
        return h(r) if r >= 0 else 0

    return det_exact([[H(lam[i] - mu[j] - i + j) for j in range(n)] for i in range(n)])


# ---------------------------------------------------------------------------
# Schur functions


def schur_evaluate(lam, x: Sequence) -> Fraction:
    """s_lambda(x_1..x_N) exactly; safe for repeated coordinates."""
    lam = as_signature(lam)
    if len(x) != len(lam):
        raise ValueError("point length must equal signature length")
    if len(lam) == 0:
        return Fraction(1)
    x = [Fraction(v) for v in x]
    c = max(0, -lam[-1])
    if c and any(v == 0 for v in x):
        raise ValueError("zero coordinate with negative parts")
    part = [v + c for v in lam if v + c > 0]
    if part:
        hv = complete_homogeneous(x, part[0] + len(part))
        val = _jacobi_trudi(part, [], lambda r: hv[r])
    else:
        val = Fraction(1)
    if c:
        val /= prod(x) ** c
    return val


def schur_dimension(lam) -> int:
    """s_lambda(1^N) via the Weyl product over shifted coordinates."""
    l = as_signature(lam).shifted()
    n = len(l)
    num = 1
    den = 1
    for i in range(n):
        for j in range(i + 1, n):
            num *= l[i] - l[j]
            den *= j - i
    return num // den


def skew_dimension(lam, mu, k: int) -> int:
    """s_{lambda/mu}(1^k), lambda of length m >= n = length of mu."""
    lam, mu = as_signature(lam), as_signature(mu)
    if k < 0:
        raise ValueError("k must be nonnegative")
    m, n = len(lam), len(mu)
    if n > m:
        raise ValueError("mu longer than lambda")
    if m == 0:
        return 1
    low = min([lam[-1]] + ([mu[-1]] if n else []))
    c = max(0, -low)
    L = [v + c for v in lam]
    M = [v + c for v in mu] + [0] * (m - n)
    if any(M[i] > L[i] for i in range(m)):
        return 0

    def h(r):
        if k == 0:
            return 1 if r == 0 else 0
        return comb(r + k - 1, r)

    return int(_jacobi_trudi(L, M, h))


def interlacing_below(lam) -> Iterable[Signature]:
    """All mu of length N-1 with mu < lam."""
    lam = as_signature(lam)
    ranges = [range(lam[i + 1], lam[i] + 1) for i in range(len(lam) - 1)]
    for mu in itertools.product(*ranges):
        yield Signature(mu)


# ---------------------------------------------------------------------------
# sparse Laurent polynomials


class SparsePolynomial:
    """Exact multivariate Laurent polynomial {exponent tuple: Fraction}."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exponent, object] | None = None):
        self.n = n
        t: Dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError("exponent length mismatch")
                c = Fraction(c)
                if c:
                    t[tuple(e)] = t.get(tuple(e), 0) + c
            t = {e: c for e, c in t.items() if c}
        self.terms = t

    # constructors
    @classmethod
    def constant(cls, c, n: int) -> "SparsePolynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, i: int, n: int) -> "SparsePolynomial":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @classmethod
    def monomial(cls, e: Sequence[int], c=1) -> "SparsePolynomial":
        return cls(len(e), {tuple(e): c})

    # arithmetic
    def _coerce(self, other) -> "SparsePolynomial":
        if isinstance(other, SparsePolynomial):
            if other.n != self.n:
                raise ValueError("variable count mismatch")
            return other
        return SparsePolynomial.constant(other, self.n)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = t.get(e, 0) + c
            if v:
                t[e] = v
            else:
                t.pop(e, None)
        out = SparsePolynomial(self.n)
        out.terms = t
        return out

    __radd__ = __add__

    def __neg__(self):
        out = SparsePolynomial(self.n)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePolynomial):
            c = Fraction(other)
            out = SparsePolynomial(self.n)
            if c:
                out.terms = {e: v * c for e, v in self.terms.items()}
            return out
        other = self._coerce(other)
        t: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        out = SparsePolynomial(self.n)
        out.terms = {e: c for e, c in t.items() if c}
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = SparsePolynomial.constant(1, self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, SparsePolynomial):
            return self.n == other.n and self.terms == other.terms
        return self == SparsePolynomial.constant(other, self.n)

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            mono = "*".join(f"x{i + 1}^{a}" if a != 1 else f"x{i + 1}" for i, a in enumerate(e) if a)
            parts.append(f"{self.terms[e]}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    # calculus
    def euler(self, i: int) -> "SparsePolynomial":
        """x_i d/dx_i."""
        out = SparsePolynomial(self.n)
        out.terms = {e: c * e[i] for e, c in self.terms.items() if e[i]}
        return out

    def derivative(self, i: int) -> "SparsePolynomial":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return SparsePolynomial(self.n, t)

    def evaluate(self, x: Sequence) -> Fraction:
        if len(x) != self.n:
            raise ValueError("point length mismatch")
        x = [Fraction(v) for v in x]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for xi, a in zip(x, e):
                if a:
                    if xi == 0 and a < 0:
                        raise ZeroDivisionError("Laurent term at zero coordinate")
                    term *= xi ** a
            total += term
        return total

    def at_ones(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))

    def substitute_ones(self, keep: int) -> "SparsePolynomial":
        """Set x_{keep+1..n} = 1, returning a polynomial in the first `keep` variables."""
        t: Dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[:keep]
            t[k] = t.get(k, 0) + c
        return SparsePolynomial(keep, t)

    def leading(self) -> Tuple[Exponent, Fraction]:
        e = max(self.terms)
        return e, self.terms[e]

    def divide_exact(self, d: "SparsePolynomial") -> "SparsePolynomial":
        """Quotient q with self = q*d; raises ValueError if d does not divide self."""
        d = self._coerce(d)
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return SparsePolynomial(self.n)
        # exponents of q lie in [min_p - min_d, max_p - max_d] (Newton polytopes)
        lo = [min(e[i] for e in self.terms) - min(e[i] for e in d.terms) for i in range(self.n)]
        hi = [max(e[i] for e in self.terms) - max(e[i] for e in d.terms) for i in range(self.n)]
        de, dc = d.leading()
        r = SparsePolynomial(self.n)
        r.terms = dict(self.terms)
        q: Dict[Exponent, Fraction] = {}
        while r.terms:
            re, rc = r.leading()
            qe = tuple(a - b for a, b in zip(re, de))
            if any(qe[i] < lo[i] or qe[i] > hi[i] for i in range(self.n)):
                raise ValueError("polynomial division is not exact")
            qc = rc / dc
            q[qe] = qc
            r = r - SparsePolynomial.monomial(qe, qc) * d
        return SparsePolynomial(self.n, q)


def vandermonde(n: int) -> SparsePolynomial:
    """prod_{i<j}(x_i - x_j), expanded."""
    _check_symbolic(n, what="vandermonde")
    return _alternant(tuple(range(n - 1, -1, -1)))


def _alternant(l: Tuple[int, ...]) -> SparsePolynomial:
    n = len(l)
    t = {}
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        e = [0] * n
        for i, p in enumerate(perm):
            e[p] = l[i]
        t[tuple(e)] = (-1) ** inv
    return SparsePolynomial(n, t)


@lru_cache(maxsize=4096)
def _schur_poly_cached(parts: Tuple[int, ...]) -> SparsePolynomial:
    n = len(parts)
    if n == 0:
        return SparsePolynomial.constant(1, 0)
    c = max(0, -parts[-1])
    lam = Signature(v + c for v in parts)
    num = _alternant(lam.shifted())
    s = num.divide_exact(_alternant(tuple(range(n - 1, -1, -1))))
    if c:
        s = s * SparsePolynomial.monomial((-c,) * n)
    return s


def schur_to_polynomial(lam) -> SparsePolynomial:
    """Expanded s_lambda as a ratio of alternants (Laurent when parts < 0)."""
    lam = as_signature(lam)
    c = max(0, -lam[-1]) if len(lam) else 0
    _check_symbolic(len(lam), lam.size + c * len(lam), "schur_to_polynomial")
    return _schur_poly_cached(lam.parts)


# ---------------------------------------------------------------------------
# Littlewood-Richardson


def _lr_elimination(lam: Signature, mu: Signature) -> Dict[Signature, int]:
    prod_poly = _schur_poly_cached(lam.parts) * _schur_poly_cached(mu.parts)
    out: Dict[Signature, int] = {}
    rem = prod_poly
    while not rem.is_zero():
        e, c = rem.leading()  # lex-leading exponent of a symmetric polynomial is dominant
        eta = Signature(e)
        if c.denominator != 1 or c < 0:
            raise ArithmeticError("non-integral Schur coefficient")
        out[eta] = int(c)
        rem = rem - _schur_poly_cached(eta.parts) * c
    return out


def _lr_lrcalc(lam: Signature, mu: Signature) -> Dict[Signature, int]:
    import lrcalc

    n = len(lam)
    c1 = -lam[-1]
    c2 = -mu[-1]
    p1 = [v + c1 for v in lam if v + c1 > 0]
    p2 = [v + c2 for v in mu if v + c2 > 0]
    res = lrcalc.mult(p1, p2, n)
    out = {}
    for part, c in res.items():
        eta = list(part) + [0] * (n - len(part))
        out[Signature(v - c1 - c2 for v in eta)] = int(c)
    return out


def lr_expand(lam, mu, N: int | None = None, method: str = "auto") -> Dict[Signature, int]:
    """Littlewood-Richardson expansion s_lam * s_mu = sum_eta c_eta s_eta in N variables.

    method: "elimination" (monomial expansion + Schur-basis elimination, budgeted),
    "lrcalc" (combinatorial rule from the lrcalc library), or "auto".
    """
    lam, mu = as_signature(lam), as_signature(mu)
    n = len(lam)
    if N is not None and (N != n or len(mu) != N):
        raise ValueError("signatures must both have length N")
    if len(mu) != n:
        raise ValueError("signatures must have equal length")
    if n == 0:
        return {Signature(()): 1}
    boxes = (lam.size - n * lam[-1]) + (mu.size - n * mu[-1])
    if method == "auto":
        method = "elimination" if (n <= LIMITS.variables and boxes <= LIMITS.boxes) else "lrcalc"
    if method == "elimination":
        _check_symbolic(n, boxes, "lr_expand")
        return _lr_elimination(lam, mu)
    if method == "lrcalc":
        return _lr_lrcalc(lam, mu)
    raise ValueError(f"unknown method {method!r}")
