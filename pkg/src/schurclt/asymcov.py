"""Limit covariances of shifted power sums by double-contour coefficient extraction.

Every covariance here has the form

    (2 pi i)^{-2} oint_{|z|=e} oint_{|w|=2e} f(z)^{k1} g(w)^{k2} Q(z, w) dz dw,

with f, g Laurent series with a simple pole at 0 and Q = G(z, w) + 1/(z - w)^2,
G analytic.  With |z| < |w| the singular part expands as sum_n (n+1) z^n w^{-n-2},
so the integral reduces to finitely many Laurent coefficients.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Callable, Optional, Sequence

import numpy as np

from .freeprob import (
    CompactMeasure,
    TruncatedSeries,
    h_prime,
    log1p_series,
    r_transform,
    series_one_plus_u_power,
)

MAX_POWER = 8


class OrderError(ValueError):
    """A series was too short for the requested extraction."""


def _exact(c) -> bool:
    return isinstance(c, (int, Fraction))


# ---------------------------------------------------------------------------
# two-variable kernels


class Series2:
    """Truncated bivariate Taylor series sum_{i,j<K} c[i][j] z^i w^j."""

    __slots__ = ("c", "K")

    def __init__(self, coeffs):
        self.c = [list(row) for row in coeffs]
        self.K = len(self.c)

    @classmethod
    def zero(cls, K: int) -> "Series2":
        return cls([[Fraction(0)] * K for _ in range(K)])

    @classmethod
    def constant(cls, v, K: int) -> "Series2":
        s = cls.zero(K)
        if K:
            s.c[0][0] = v
        return s

    def __getitem__(self, ij):
        i, j = ij
        if i >= self.K or j >= self.K:
            raise OrderError(f"kernel coefficient ({i},{j}) beyond order {self.K}")
        return self.c[i][j]

    def __add__(self, other: "Series2") -> "Series2":
        K = min(self.K, other.K)
        return Series2([[self.c[i][j] + other.c[i][j] for j in range(K)] for i in range(K)])

    def __neg__(self):
        return Series2([[-v for v in row] for row in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return Series2([[v * s for v in row] for row in self.c])

    __rmul__ = __mul__

    def transpose(self) -> "Series2":
        return Series2([[self.c[j][i] for j in range(self.K)] for i in range(self.K)])

    def is_symmetric(self, tol=0.0) -> bool:
        return all(abs(self.c[i][j] - self.c[j][i]) <= tol for i in range(self.K) for j in range(self.K))

    def evaluate(self, z, w):
        """Numeric value on numpy arrays z, w (broadcast)."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        wp = [w**j for j in range(self.K)]
        zi = np.ones_like(z)
        for i in range(self.K):
            row = np.zeros_like(out)
            for j in range(self.K):
                v = self.c[i][j]
                if v != 0:
                    row = row + complex(v) * wp[j]
            out = out + zi * row
            zi = zi * z
        return out


def _mul2(a, b, K):
    out = [[0] * K for _ in range(K)]
    for i in range(K):
        for j in range(K):
            x = a[i][j]
            if x == 0:
                continue
            for p in range(K - i):
                bp = b[p]
                for q in range(K - j):
                    if bp[q] != 0:
                        out[i + p][j + q] += x * bp[q]
    return out


def log_kernel(phi: TruncatedSeries, K: int) -> Series2:
    """d_z d_w log(1 - z w (phi(z) - phi(w))/(z - w)), coefficients below z^K w^K.

    phi is a Taylor series at 0 with at least K+1 known coefficients.
    """
    L = K + 1
    if phi.prec < L:
        raise OrderError(f"phi needs {L} coefficients, has {phi.prec}")
    p = [phi.get(n) for n in range(L)]
    zero = Fraction(0) if all(_exact(v) for v in p) else 0.0
    # X = z w D(z,w), D_{ab} = phi_{a+b+1}
    X = [[zero] * (L + 1) for _ in range(L + 1)]
    for a in range(L):
        for b in range(L - a):
            n = a + b + 1
            if n < L and a + 1 <= L and b + 1 <= L:
                X[a + 1][b + 1] = p[n]
    M = L + 1
    # log(1 - X) = -sum X^m / m; X^m lives at i, j >= m
    logm = [[zero] * M for _ in range(M)]
    Xm = [[(Fraction(1) if (i == 0 and j == 0) else zero) if _exact(zero) else (1.0 if i == j == 0 else 0.0) for j in range(M)] for i in range(M)]
    for m in range(1, M):
        Xm = _mul2(Xm, X, M)
        for i in range(M):
            for j in range(M):
                if Xm[i][j] != 0:
                    logm[i][j] -= Xm[i][j] / m if not _exact(Xm[i][j]) else Fraction(Xm[i][j]) / m
    return Series2([[(i + 1) * (j + 1) * logm[i + 1][j + 1] for j in range(K)] for i in range(K)])


# ---------------------------------------------------------------------------
# coefficient extraction


def double_contour(f: TruncatedSeries, k1: int, g: TruncatedSeries, k2: int, G: Optional[Series2] = None, singular: bool = True):
    """Extract the double contour integral with |z| < |w|.

    f, g: Laurent series at 0 with valuation >= -1.  G: analytic part of the kernel
    (None for zero).  ``singular`` adds the 1/(z - w)^2 part.
    """
    if k1 < 1 or k2 < 1:
        raise ValueError("powers must be >= 1")
    if f.val < -1 or g.val < -1:
        raise ValueError("integrands may have at most a simple pole")
    need_g = k1 + 1 if singular else 0
    if g.prec - g.val < max(need_g + 1, k2 + 1) or f.prec - f.val < k1 + 1:
        raise OrderError(f"series order too small: need f to z^{k1}, g to w^{max(k1, k2)}")
    A = f**k1
    B = g**k2
    total = Fraction(0)
    if singular:
        for n in range(k1):
            a = A.get(-n - 1)
            if a == 0:
                continue
            if n + 1 >= B.prec:
                raise OrderError(f"need g^{k2} to w^{n + 1}")
            total += (n + 1) * a * B.get(n + 1)
    if G is not None:
        if G.K < max(k1, k2):
            raise OrderError(f"kernel order {G.K} below max(k1, k2) = {max(k1, k2)}")
        for i in range(k1):
            a = A.get(-i - 1)
            if a == 0:
                continue
            for j in range(k2):
                b = B.get(-j - 1)
                if b != 0:
                    total += G[i, j] * a * b
    return total


def double_contour_quadrature(
    f: Callable, k1: int, g: Callable, k2: int, G: Optional[Callable] = None, singular: bool = True,
    eps: float = 0.01, nodes: int = 512,
) -> complex:
    """Same integral on circles |z| = eps, |w| = 2 eps by the trapezoid rule."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    z = eps * np.exp(1j * th)
    w = 2 * eps * np.exp(1j * th)
    A = np.asarray(f(z)) ** k1 * z
    B = np.asarray(g(w)) ** k2 * w
    Z, W = np.meshgrid(z, w, indexing="ij")
    Q = np.zeros(Z.shape, dtype=complex)
    if singular:
        Q += 1.0 / (Z - W) ** 2
    if G is not None:
        Q += G(Z, W)
    val = (A[:, None] * B[None, :] * Q).mean()
    return complex(val)


# ---------------------------------------------------------------------------
# integrand builders


def _order_for(k1, k2, order=None):
    return max(order or 0, max(k1, k2) + 4)


def _as_F(F, P: int) -> TruncatedSeries:
    """Coerce F (None, number, or series in z = x - 1) to a series with P terms."""
    if F is None:
        return TruncatedSeries.zero(P, 0)
    if isinstance(F, Number):
        return TruncatedSeries.constant(F, P, 0)
    if F.prec < P:
        raise OrderError(f"F has {F.prec} coefficients, need {P}")
    return TruncatedSeries(F.coeffs, F.val, P, 0)


def f_series(F, a=1, P: int = 12) -> TruncatedSeries:
    """1/z + 1 + (1+z) F(1+z)/a."""
    Fz = _as_F(F, P)
    base = TruncatedSeries([1, 1], -1, P, 0)
    if isinstance(a, Number) and a == 1:
        return base + Fz * series_one_plus_u_power(1, P)
    inv_a = Fraction(1) / a if _exact(a) else 1.0 / a
    return base + Fz * series_one_plus_u_power(1, P) * inv_a


def _as_G(G, K: int) -> Optional[Series2]:
    if G is None:
        return None
    if isinstance(G, Number):
        return Series2.constant(G, K)
    return G


def _check_k(*ks):
    for k in ks:
        if not 1 <= k <= MAX_POWER:
            raise ValueError(f"power {k} outside 1..{MAX_POWER}")


def clt_cov_one_level(F, G, k1: int, k2: int, order: Optional[int] = None):
    _check_k(k1, k2)
    P = _order_for(k1, k2, order)
    f = f_series(F, 1, P)
    return double_contour(f, k1, f, k2, _as_G(G, P))


def clt_cov_projections(F, G, a1, a2, k1: int, k2: int, order: Optional[int] = None):
    """Levels of relative sizes a1 <= a2: z carries level a1, Q is the top-level kernel."""
    _check_k(k1, k2)
    if not 0 < a1 <= a2 <= 1:
        raise ValueError("need 0 < a1 <= a2 <= 1")
    P = _order_for(k1, k2, order)
    f = f_series(F, a1, P)
    g = f_series(F, a2, P)
    return a1**k1 * a2**k2 * double_contour(f, k1, g, k2, _as_G(G, P))


def clt_cov_multiplication(F1, F2, G2, k1: int, k2: int, order: Optional[int] = None):
    """F1 belongs to the later time (z); F2 and G2 to the earlier time (w)."""
    _check_k(k1, k2)
    P = _order_for(k1, k2, order)
    return double_contour(f_series(F1, 1, P), k1, f_series(F2, 1, P), k2, _as_G(G2, P))


def clt_cov_combined(F1, F2, G2, a1, a2, k1: int, k2: int, order: Optional[int] = None):
    """General time-space chain.

    F_t is the first-order limit of the level-t generating function normalized by
    that level's own length; G2 and the 1/(z-w)^2 term come from level t2.
    """
    _check_k(k1, k2)
    if not 0 < a1 <= a2 <= 1:
        raise ValueError("need 0 < a1 <= a2 <= 1")
    P = _order_for(k1, k2, order)
    return a1**k1 * a2**k2 * double_contour(f_series(F1, 1, P), k1, f_series(F2, 1, P), k2, _as_G(G2, P))


def cov_matrix(fn: Callable[[int, int], object], ks: Sequence[int] = (1, 2, 3)) -> np.ndarray:
    return np.array([[float(fn(a, b)) for b in ks] for a in ks])


# ---------------------------------------------------------------------------
# applications


def character_kernel(m: CompactMeasure, K: int) -> Series2:
    """G(1+z,1+w) for a fixed-signature sequence with limit shape m."""
    hp = h_prime(m, K + 2)
    phi = TruncatedSeries(hp.coeffs, hp.val, hp.prec, 0) * series_one_plus_u_power(1, hp.prec)
    return log_kernel(phi, K)


def tensor_Q(m1: CompactMeasure, m2: CompactMeasure, order: int = 12) -> Series2:
    """Analytic part of the tensor-product kernel (the 1/(z-w)^2 is added separately)."""
    return character_kernel(m1, order) + character_kernel(m2, order)


def tensor_F(m1: CompactMeasure, m2: CompactMeasure, order: int = 12) -> TruncatedSeries:
    a = h_prime(m1, order)
    b = h_prime(m2, order)
    return a + b


def tensor_cov(m1: CompactMeasure, m2: CompactMeasure, k1: int, k2: int, order: Optional[int] = None):
    P = _order_for(k1, k2, order)
    return clt_cov_one_level(tensor_F(m1, m2, P + 2), tensor_Q(m1, m2, P), k1, k2, P)


def schur_weyl_cov(c, k1: int, k2: int):
    if c <= 0:
        raise ValueError("c must be positive")
    return clt_cov_one_level(c, -c, k1, k2)


def restriction_cov(m: CompactMeasure, a, k1: int, k2: int, a2=None, order: Optional[int] = None):
    """Covariance for restrictions of a fixed signature to relative sizes a (z) and a2 (w)."""
    a2 = a if a2 is None else a2
    P = _order_for(k1, k2, order)
    return clt_cov_projections(h_prime(m, P + 2), character_kernel(m, P), a, a2, k1, k2, P)


def aztec_beta(q):
    return Fraction(q) / (1 + Fraction(q)) if _exact(q) else q / (1 + q)


def aztec_f(q, a, P: int) -> TruncatedSeries:
    """1/z + 1 + (1+z)(1-a) beta / (a (1 + beta z)) as a Laurent series."""
    b = aztec_beta(q)
    geo = TruncatedSeries.geometric(-b, P, 0)
    base = TruncatedSeries([1, 1], -1, P, 0)
    if a == 1:
        return base
    coef = (1 - a) * b / a
    return base + geo * series_one_plus_u_power(1, P) * coef


def aztec_cov(q, a1, a2, k1: int, k2: int):
    """Aztec diamond, levels of relative sizes a1 <= a2 (before the Bernoulli step)."""
    _check_k(k1, k2)
    if not 0 < a1 <= a2 <= 1:
        raise ValueError("need 0 < a1 <= a2 <= 1")
    P = max(k1, k2) + 4
    return a1**k1 * a2**k2 * double_contour(aztec_f(q, a1, P), k1, aztec_f(q, a2, P), k2)


def aztec_F(q, a, M: int = 12) -> TruncatedSeries:
    """F_t(1+z) from the level generating function prod (1 - b + b x_i)^{N - t}, t = aN.

    (1/t) d/dz log (1 + b z)^{N-t} = ((1-a)/a) d/dz log(1 + b z).
    """
    b = aztec_beta(q)
    L = log1p_series(M + 2).compose(TruncatedSeries([b], 1, M + 2, 0))
    return TruncatedSeries((L.derivative() * ((1 - a) / a)).coeffs, 0, M, 1)


# ---------------------------------------------------------------------------
# random-matrix degeneration


def scale_measure(m: CompactMeasure, s) -> CompactMeasure:
    """Push-forward under x -> s x."""
    if m.kind == "atomic":
        return CompactMeasure.atomic([(x * s, w) for x, w in m.atoms])
    return CompactMeasure.density([((a * s, b * s), h / s) for (a, b), h in m.pieces])


def degeneration_sides(mh1: CompactMeasure, mh2: CompactMeasure, k: int, l: int, delta, order: Optional[int] = None):
    """(tensor side, matrix side) of the small-delta degeneration.

    Tensor side: delta^{k+l} times the tensor covariance of the measures mh_i / delta.
    Matrix side: the extraction with S(z) = 1/z + R_1(z) + R_2(z) and kernel
    d_z d_w (L_1 + L_2 - L_{1+2}), L_X = log(1 - z w (X(z) - X(w))/(z - w)).
    """
    P = _order_for(k, l, order)
    inv = Fraction(1) / delta if _exact(delta) else 1.0 / delta
    lhs = delta ** (k + l) * tensor_cov(scale_measure(mh1, inv), scale_measure(mh2, inv), k, l, P)
    R1 = r_transform(mh1, P + 2)
    R2 = r_transform(mh2, P + 2)
    S = TruncatedSeries.monomial(1, -1, P + 2, 0) + R1 + R2
    G = log_kernel(R1, P) + log_kernel(R2, P) - log_kernel(R1 + R2, P)
    rhs = double_contour(S, k, S, l, G, singular=False)
    return lhs, rhs


def matrix_degeneration_gap(mh1: CompactMeasure, mh2: CompactMeasure, k: int, l: int, delta, order: Optional[int] = None) -> float:
    lhs, rhs = degeneration_sides(mh1, mh2, k, l, delta, order)
    return abs(float(lhs) - float(rhs))
