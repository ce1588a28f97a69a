"""Truncated series and free-probability transforms.

A :class:`TruncatedSeries` stores coefficients of ``u**e`` for ``val <= e < prec``;
everything at exponent ``prec`` and beyond is unknown.  The tag ``center`` records
what ``u`` means: ``0`` (u = z), ``1`` (u = x - 1) or ``"inf"`` (u = 1/z).
Coefficients may be exact ``Fraction`` values or floats; arithmetic is generic.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, List, Optional, Sequence, Tuple

from .symcore import Signature, as_signature, schur_dimension, schur_evaluate

DEFAULT_ORDER = 16


class CancellationError(ArithmeticError):
    """A singular term that should cancel exactly did not."""


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def _zero_like(c):
    return Fraction(0) if _is_exact(c) else 0.0


class TruncatedSeries:
    __slots__ = ("coeffs", "val", "prec", "center")

    def __init__(self, coeffs: Sequence, val: int = 0, prec: Optional[int] = None, center=0):
        cs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        if prec is None:
            prec = val + len(cs)
        cs = cs[: max(prec - val, 0)]
        # strip exact leading zeros
        while cs and _is_exact(cs[0]) and cs[0] == 0:
            cs.pop(0)
            val += 1
        if val > prec:
            val = prec
        cs += [Fraction(0)] * (prec - val - len(cs))
        self.coeffs = cs
        self.val = val
        self.prec = prec
        self.center = center

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c, prec: int, center=0) -> "TruncatedSeries":
        return cls([c], 0, prec, center)

    @classmethod
    def variable(cls, prec: int, center=0) -> "TruncatedSeries":
        return cls([1], 1, prec, center)

    @classmethod
    def monomial(cls, c, e: int, prec: int, center=0) -> "TruncatedSeries":
        return cls([c], e, prec, center)

    @classmethod
    def zero(cls, prec: int, center=0) -> "TruncatedSeries":
        return cls([], prec, prec, center)

    @classmethod
    def geometric(cls, a, prec: int, center=0) -> "TruncatedSeries":
        """1/(1 - a u)."""
        a = Fraction(a) if isinstance(a, int) else a
        return cls([a**k for k in range(prec)], 0, prec, center)

    # basic protocol -----------------------------------------------------
    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c != 0:
                terms.append(f"{c}*u^{self.val + i}")
            if len(terms) >= 8:
                terms.append("...")
                break
        body = " + ".join(terms) if terms else "0"
        return f"TruncatedSeries[{self.center}]({body} + O(u^{self.prec}))"

    def __getitem__(self, e: int):
        if e >= self.prec:
            raise IndexError(f"coefficient u^{e} is beyond the known precision u^{self.prec}")
        if e < self.val:
            return _zero_like(self.coeffs[0]) if self.coeffs else Fraction(0)
        return self.coeffs[e - self.val]

    coefficient = __getitem__

    def get(self, e: int, default=Fraction(0)):
        if e < self.val or e >= self.prec:
            return default
        return self.coeffs[e - self.val]

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def to_float(self) -> "TruncatedSeries":
        return TruncatedSeries([complex(c) if isinstance(c, complex) else float(c) for c in self.coeffs], self.val, self.prec, self.center)

    def truncate(self, prec: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs, self.val, min(prec, self.prec), self.center)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by u**k."""
        return TruncatedSeries(self.coeffs, self.val + k, self.prec + k, self.center)

    def _check(self, other):
        if isinstance(other, TruncatedSeries) and other.center != self.center:
            raise ValueError(f"series centers differ ({self.center} vs {other.center})")

    def __add__(self, other):
        if isinstance(other, Number):
            if other == 0:
                return self
            if self.prec <= 0:
                return self
            other = TruncatedSeries.constant(other, self.prec, self.center)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        val = min(self.val, other.val)
        prec = min(self.prec, other.prec)
        cs = [self.get(e) + other.get(e) for e in range(val, prec)]
        return TruncatedSeries(cs, val, prec, self.center)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.val, self.prec, self.center)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return TruncatedSeries([c * other for c in self.coeffs], self.val, self.prec, self.center)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        val = self.val + other.val
        prec = min(self.val + other.prec, other.val + self.prec)
        n = prec - val
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * max(n, 0)
        for i in range(min(len(a), n)):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(min(len(b), n - i)):
                out[i + j] += ai * b[j]
        return TruncatedSeries(out, val, prec, self.center)

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        if not self.coeffs or self.coeffs[0] == 0:
            raise ZeroDivisionError("series with vanishing leading coefficient")
        a = self.coeffs
        n = len(a)
        inv0 = 1 / a[0] if not _is_exact(a[0]) else Fraction(1) / a[0]
        b = [inv0]
        for k in range(1, n):
            s = sum((a[j] * b[k - j] for j in range(1, k + 1)), Fraction(0))
            b.append(-s * inv0)
        # (u^v A)^{-1} = u^{-v} A^{-1}; relative precision n
        return TruncatedSeries(b, -self.val, -self.val + n, self.center)

    def __truediv__(self, other):
        if isinstance(other, Number):
            inv = Fraction(1, 1) / other if _is_exact(other) else 1 / other
            return self * inv
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return TruncatedSeries([1], 0, self.prec - self.val, self.center)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus -------------------------------------------------------------
    def derivative(self) -> "TruncatedSeries":
        cs = [(self.val + i) * c for i, c in enumerate(self.coeffs)]
        return TruncatedSeries(cs, self.val - 1, self.prec - 1, self.center)

    def integral(self) -> "TruncatedSeries":
        """Antiderivative with zero constant term; needs no u^-1 term."""
        if self.get(-1) != 0:
            raise ValueError("series has a u^-1 term; antiderivative is not a series")
        cs = []
        val = self.val + 1
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            if e == -1:
                cs.append(_zero_like(c))
            else:
                cs.append(c / (e + 1) if not _is_exact(c) else Fraction(c) / (e + 1))
        return TruncatedSeries(cs, val, self.prec + 1, self.center)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner(u)) where inner has positive valuation."""
        if inner.val < 1:
            raise ValueError("inner series must have positive valuation")
        v = inner.val
        body = self.shift(-self.val)
        cap = v * (body.prec - body.val)
        if not body.coeffs:
            return TruncatedSeries.zero(v * self.prec, inner.center)
        acc = TruncatedSeries([body.coeffs[-1]], 0, cap, inner.center)
        for c in reversed(body.coeffs[:-1]):
            acc = acc * inner + c
        acc = acc.truncate(cap)
        if self.val:
            acc = acc * inner**self.val
        return acc

    def exp(self) -> "TruncatedSeries":
        if self.val < 1:
            raise ValueError("exp needs a series with zero constant term")
        out = TruncatedSeries.constant(1, self.prec, self.center)
        term = TruncatedSeries.constant(1, self.prec, self.center)
        for k in range(1, self.prec + 1):
            term = term * self / k
            if term.val >= self.prec:
                break
            out = out + term
        return out

    def log1p(self) -> "TruncatedSeries":
        """log(1 + self) for a series with positive valuation."""
        if self.val < 1:
            raise ValueError("log1p needs positive valuation")
        out = TruncatedSeries.zero(self.prec, self.center)
        term = TruncatedSeries.constant(1, self.prec, self.center)
        for k in range(1, self.prec + 1):
            term = term * self
            if term.val >= self.prec:
                break
            out = out + term * (Fraction((-1) ** (k + 1), k))
        return out

    def log(self) -> "TruncatedSeries":
        """log of a series with val 0 and constant term 1."""
        if self.val != 0 or self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        return (self - 1).log1p() if (self - 1).val >= 1 else TruncatedSeries.zero(self.prec, self.center)

    def evaluate(self, x):
        """Numeric value of the truncated sum at u = x."""
        s = 0
        for i, c in enumerate(self.coeffs):
            s += (float(c) if _is_exact(c) else c) * x ** (self.val + i)
        return s

    def max_abs_diff(self, other: "TruncatedSeries") -> float:
        lo, hi = min(self.val, other.val), min(self.prec, other.prec)
        return max((abs(complex(self.get(e)) - complex(other.get(e))) for e in range(lo, hi)), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.center != other.center or self.prec != other.prec:
            return False
        return all(self.get(e) == other.get(e) for e in range(min(self.val, other.val), self.prec))

    __hash__ = None


def series_one_plus_u_power(p, prec: int, center=0) -> TruncatedSeries:
    """(1 + u)^p for integer p."""
    base = TruncatedSeries([1, 1], 0, prec, center)
    return base**p


def log1p_series(prec: int, center=0) -> TruncatedSeries:
    """log(1 + u)."""
    return TruncatedSeries([Fraction((-1) ** (k + 1), k) for k in range(1, prec)], 1, prec, center)


# ---------------------------------------------------------------------------
# measures on R


@dataclass
class CompactMeasure:
    """Finite measure with compact support: atoms or piecewise-constant density."""

    kind: str
    atoms: List[Tuple[object, object]] = field(default_factory=list)
    pieces: List[Tuple[Tuple[object, object], object]] = field(default_factory=list)
    quantized: bool = False

    def __post_init__(self):
        if self.kind not in ("atomic", "density"):
            raise ValueError("kind must be 'atomic' or 'density'")
        for _, w in self.atoms:
            if w < 0:
                raise ValueError("negative atom weight")
        for (a, b), h in self.pieces:
            if h < 0 or b < a:
                raise ValueError("invalid density piece")
            if self.quantized and h > 1:
                raise ValueError("quantized measure needs density <= 1")

    @classmethod
    def atomic(cls, atoms) -> "CompactMeasure":
        return cls("atomic", atoms=[(x, w) for x, w in atoms])

    @classmethod
    def dirac(cls, a=0) -> "CompactMeasure":
        return cls.atomic([(a, Fraction(1))])

    @classmethod
    def density(cls, pieces, quantized: bool = False) -> "CompactMeasure":
        return cls("density", pieces=[((a, b), h) for (a, b), h in pieces], quantized=quantized)

    @classmethod
    def uniform(cls, a=0, b=1) -> "CompactMeasure":
        a, b = Fraction(a), Fraction(b)
        return cls.density([((a, b), 1 / (b - a))], quantized=(b - a) >= 1)

    @property
    def mass(self):
        return self.moment(0)

    def moment(self, k: int):
        if self.kind == "atomic":
            return sum((w * x**k for x, w in self.atoms), Fraction(0))
        tot = Fraction(0)
        for (a, b), h in self.pieces:
            tot += h * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
        return tot

    def moments(self, K: int) -> list:
        return [self.moment(k) for k in range(K)]

    def support(self) -> Tuple[float, float]:
        if self.kind == "atomic":
            xs = [float(x) for x, _ in self.atoms]
        else:
            xs = [float(v) for (a, b), _ in self.pieces for v in (a, b)]
        return min(xs), max(xs)

    def cauchy(self, z: complex) -> complex:
        """C(z) = int dm(x)/(z - x) evaluated in closed form."""
        if self.kind == "atomic":
            return sum(float(w) / (z - float(x)) for x, w in self.atoms)
        s = 0j
        for (a, b), h in self.pieces:
            s += float(h) * (cmath.log(z - float(a)) - cmath.log(z - float(b)))
        return s

    def cauchy_derivative(self, z: complex) -> complex:
        """C'(z) in closed form."""
        if self.kind == "atomic":
            return -sum(float(w) / (z - float(x)) ** 2 for x, w in self.atoms)
        s = 0j
        for (a, b), h in self.pieces:
            s += float(h) * (1 / (z - float(a)) - 1 / (z - float(b)))
        return s

    def to_json(self) -> str:
        def enc(v):
            return [v.numerator, v.denominator] if isinstance(v, Fraction) else v

        if self.kind == "atomic":
            body = {"type": "atomic", "atoms": [[enc(x), enc(w)] for x, w in self.atoms]}
        else:
            body = {"type": "density", "pieces": [[enc(a), enc(b), enc(h)] for (a, b), h in self.pieces]}
        m = self.mass
        body["mass"] = enc(m)
        return json.dumps(body)

    @classmethod
    def from_json(cls, text) -> "CompactMeasure":
        d = json.loads(text) if isinstance(text, str) else text

        def dec(v):
            return Fraction(v[0], v[1]) if isinstance(v, list) else (Fraction(v) if isinstance(v, (int, str)) else v)

        if d["type"] == "atomic":
            return cls.atomic([(dec(x), dec(w)) for x, w in d["atoms"]])
        return cls.density([((dec(a), dec(b)), dec(h)) for a, b, h in d["pieces"]])


ZERO_MEASURE = CompactMeasure.atomic([])


@dataclass
class LimitSextuple:
    A_plus: CompactMeasure = ZERO_MEASURE
    A_minus: CompactMeasure = ZERO_MEASURE
    B_plus: CompactMeasure = ZERO_MEASURE
    B_minus: CompactMeasure = ZERO_MEASURE
    gamma_plus: object = Fraction(0)
    gamma_minus: object = Fraction(0)

    def __post_init__(self):
        for m in (self.B_plus, self.B_minus):
            if m.kind == "atomic" and m.atoms or m.kind == "density" and m.pieces:
                lo, hi = m.support()
                if lo < 0 or hi > 1:
                    raise ValueError("B-measures must live on [0, 1]")
        if self.gamma_plus < 0 or self.gamma_minus < 0:
            raise ValueError("gamma parameters must be nonnegative")


def empirical_measure(lam) -> CompactMeasure:
    lam = as_signature(lam)
    N = len(lam)
    if N < 1:
        raise ValueError("empty signature")
    w = Fraction(1, N)
    return CompactMeasure.atomic([(Fraction(l, N), w) for l in lam.shifted()])


# ---------------------------------------------------------------------------
# transforms


def cauchy_transform(m: CompactMeasure, M: int = DEFAULT_ORDER) -> TruncatedSeries:
    """sum_k m_k u^{k+1} with u = 1/z, terms up to u^M."""
    return TruncatedSeries(m.moments(M), 1, M + 1, "inf")


def _lagrange_reversion(phi: TruncatedSeries) -> TruncatedSeries:
    """psi with phi(psi(t)) = t, for phi = phi_1 u + ... (phi_1 != 0)."""
    if phi.val != 1:
        raise ValueError("reversion needs valuation exactly 1")
    P = phi.prec  # coefficients of psi known for t^1..t^{P-1}
    W = phi.shift(-1).inverse()  # u / phi(u), val 0
    out = []
    pw = TruncatedSeries([1], 0, W.prec, phi.center)
    for n in range(1, P):
        pw = pw * W
        c = pw.get(n - 1)
        out.append(c / n if not _is_exact(c) else Fraction(c) / n)
    return TruncatedSeries(out, 1, P, 0)


def invert_series(s: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse between the two normal forms.

    A series at infinity ``u + a_1 u^2 + ...`` (u = 1/z) inverts to a Laurent series
    ``1/t + b_0 + b_1 t + ...`` at 0, and vice versa.
    """
    if s.center == "inf":
        if s.val != 1:
            raise ValueError("series at infinity must start with 1/z")
        psi = _lagrange_reversion(s)
        return psi.inverse()
    if s.val != -1:
        raise ValueError("series at 0 must start with 1/z")
    inv = s.inverse()  # val 1
    psi = _lagrange_reversion(TruncatedSeries(inv.coeffs, inv.val, inv.prec, "inf"))
    return TruncatedSeries(psi.coeffs, psi.val, psi.prec, "inf")


def compose_normal_forms(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """outer(inner(t)) where outer and inner are in opposite normal forms.

    For outer at infinity and inner a Laurent series at 0, substitute u = 1/inner.
    For outer at 0 and inner at infinity, substitute the series inner itself and
    return 1/result so that both round trips read as the identity ``u``.
    """
    if outer.center == "inf":
        v = inner.inverse()
        return TruncatedSeries(outer.coeffs, outer.val, outer.prec, 0).compose(TruncatedSeries(v.coeffs, v.val, v.prec, 0))
    x = TruncatedSeries(inner.coeffs, inner.val, inner.prec, 0)
    return outer.compose(x).inverse()


def r_transform(m: CompactMeasure, M: int = DEFAULT_ORDER) -> TruncatedSeries:
    """R(t) = C^{-1}(t) - 1/t, terms t^0 .. t^{M-1}."""
    K = invert_series(cauchy_transform(m, M + 1))
    R = K - TruncatedSeries.monomial(1, -1, K.prec, 0)
    if R.get(-1) != 0 and abs(complex(R.get(-1))) > 1e-12:
        raise CancellationError("measure is not a probability measure")
    return TruncatedSeries([R.get(e) for e in range(0, M)], 0, M, 0)


def h_prime(m: CompactMeasure, M: int = DEFAULT_ORDER, tol: float = 1e-9) -> TruncatedSeries:
    """H'(1+z) = K(log(1+z))/(1+z) - 1/z as a Taylor series in z, terms z^0..z^{M-1}."""
    R = r_transform(m, M + 2)
    L = log1p_series(M + 3)  # log(1+z), val 1
    Kl = L.inverse() + R.compose(L)
    h = Kl * series_one_plus_u_power(-1, M + 3) - TruncatedSeries.monomial(1, -1, M + 3)
    res = h.get(-1)
    if res != 0 and (_is_exact(res) or abs(res) > tol):
        raise CancellationError(f"1/z terms did not cancel (residual {res})")
    return TruncatedSeries([h.get(e) for e in range(0, M)], 0, M, 1)


def phi_series(F: TruncatedSeries) -> TruncatedSeries:
    """(1+z) F(1+z)."""
    return TruncatedSeries(F.coeffs, F.val, F.prec, 0) * series_one_plus_u_power(1, F.prec)


def H_function(m: CompactMeasure, x: complex, M: int = 40) -> complex:
    """H(x) = int_0^{ln x} R + ln(ln x/(x-1)), principal branch, x near 1."""
    R = r_transform(m, M)
    lx = cmath.log(x)
    integral = R.integral().evaluate(lx)
    if abs(x - 1) < 1e-300:
        return 0.0
    corr = cmath.log(lx / (x - 1)) if x != 1 else 0.0
    v = integral + corr
    return v.real if isinstance(x, (int, float, Fraction)) and abs(v.imag) < 1e-14 else v


def H_from_h_prime(m: CompactMeasure, x, M: int = 40):
    """The same function as the definite integral of h_prime along [1, x]."""
    hp = h_prime(m, M)
    return hp.integral().evaluate(complex(x) - 1 if isinstance(x, complex) else float(x) - 1)


def voiculescu_F(J: LimitSextuple, M: int = DEFAULT_ORDER) -> TruncatedSeries:
    """F_J(1+t) as a Taylor series in t; the 1/t^2 and 1/t terms cancel exactly."""
    P = M + 3
    t = TruncatedSeries.variable(P, 0)
    one_plus_t = t + 1
    inv_t2 = TruncatedSeries.monomial(1, -2, P, 0)
    inv_t = TruncatedSeries.monomial(1, -1, P, 0)
    inv_t1pt = inv_t * one_plus_t.inverse()

    def C_at(mu: CompactMeasure, u: TruncatedSeries) -> TruncatedSeries:
        # C_mu evaluated at z = 1/u
        c = cauchy_transform(mu, P + 2)
        return TruncatedSeries(c.coeffs, c.val, c.prec, 0).compose(u)

    total = TruncatedSeries.zero(P, 0)
    terms = [
        (inv_t2 * C_at(J.A_plus, t)) - inv_t * J.A_plus.mass,
        (inv_t2 * C_at(J.B_plus, -t)) + inv_t * J.B_plus.mass,
        -(inv_t2 * C_at(J.A_minus, -t * one_plus_t.inverse())) - inv_t1pt * J.A_minus.mass,
        -(inv_t2 * C_at(J.B_minus, t * one_plus_t.inverse())) + inv_t1pt * J.B_minus.mass,
    ]
    for term in terms:
        total = total + term
    total = total + J.gamma_plus - series_one_plus_u_power(-2, P) * J.gamma_minus
    for e in (-2, -1):
        r = total.get(e)
        if r != 0 and (_is_exact(r) or abs(r) > 1e-12):
            raise CancellationError(f"t^{e} term did not cancel ({r})")
    return TruncatedSeries([total.get(e) for e in range(0, M)], 0, M, 1)


# ---------------------------------------------------------------------------
# Schur-function asymptotics


def schur_ratio_one_variable(lam, x) -> Fraction:
    """s_lam(x, 1^{N-1}) / s_lam(1^N) exactly, for rational x != 1."""
    lam = as_signature(lam)
    N = len(lam)
    x = Fraction(x)
    if N == 1:
        return x ** lam[0]
    if x == 1:
        return Fraction(1)
    l = lam.shifted()
    tot = Fraction(0)
    for i in range(N):
        den = 1
        for j in range(N):
            if j != i:
                den *= l[i] - l[j]
        tot += x ** l[i] / den
    return tot * math.factorial(N - 1) / (x - 1) ** (N - 1)


def _log_fraction(q: Fraction) -> float:
    if q <= 0:
        raise ValueError("logarithm of a nonpositive value")
    return math.log(q.numerator) - math.log(q.denominator)


def check_character_asymptotics(family: Callable[[int], Signature], m: CompactMeasure, x, N: int, M: int = 40):
    """(finite-N value, limit value, gap) for (1/N) log(s(x,1^{N-1})/s(1^N)) against H_m(x)."""
    lam = as_signature(family(N))
    if len(lam) != N:
        raise ValueError("family(N) must have length N")
    finite = _log_fraction(schur_ratio_one_variable(lam, x)) / N
    limit = H_function(m, float(x), M)
    limit = float(limit.real) if isinstance(limit, complex) else float(limit)
    return finite, limit, abs(finite - limit)


def second_order_limit(m: CompactMeasure, x1: float, x2: float, M: int = 30, h: float = 1e-3) -> float:
    """d1 d2 log(1 - (x1-1)(x2-1)(x1 H'(x1) - x2 H'(x2))/(x1 - x2)) by central differences."""
    hp = h_prime(m, M)

    def phi(x):
        return x * hp.evaluate(x - 1)

    def L(a, b):
        return math.log(1 - (a - 1) * (b - 1) * (phi(a) - phi(b)) / (a - b))

    return (L(x1 + h, x2 + h) - L(x1 + h, x2 - h) - L(x1 - h, x2 + h) + L(x1 - h, x2 - h)) / (4 * h * h)


def check_character_asymptotics_2(family, m: CompactMeasure, x1, x2, N: int, h=Fraction(1, 50), M: int = 30):
    """Finite-N mixed second derivative of log s(x1,x2,1^{N-2})/s(1^N) against its limit."""
    lam = as_signature(family(N))
    x1, x2, h = Fraction(x1), Fraction(x2), Fraction(h)
    d = schur_dimension(lam)

    def L(a, b):
        return _log_fraction(schur_evaluate(lam, [a, b] + [Fraction(1)] * (N - 2)) / d)

    finite = (L(x1 + h, x2 + h) - L(x1 + h, x2 - h) - L(x1 - h, x2 + h) + L(x1 - h, x2 - h)) / float(4 * h * h)
    limit = second_order_limit(m, float(x1), float(x2), M, float(h))
    return finite, limit, abs(finite - limit)
