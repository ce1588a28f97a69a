"""Maps from liquid regions to the upper half-plane, and GFF covariance predictions.

Each model map sends a point z of the upper half-plane H to macroscopic
coordinates (y, eta): y is the rescaled particle position and eta the rescaled
level (number of particles / N).  The inverse solves for the unique root in H,
returning ``None`` in the frozen region.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .freeprob import CompactMeasure, TruncatedSeries


class MapError(ArithmeticError):
    """Root finding or map evaluation failed; carries diagnostics."""


class EmptyCurveError(ValueError):
    """The requested level is frozen: no point of H maps to it."""


@dataclass(frozen=True)
class HalfPlanePoint:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not z.imag > 0:
            raise ValueError(f"{z} is not in the upper half-plane")
        object.__setattr__(self, "z", z)

    def __complex__(self):
        return self.z


def _z(p) -> complex:
    return p.z if isinstance(p, HalfPlanePoint) else complex(p)


# ---------------------------------------------------------------------------
# lozenge tilings


def _exp_cauchy(m: CompactMeasure, z: complex) -> complex:
    return cmath.exp(m.cauchy(z))


def tiling_map(m: CompactMeasure, z) -> Tuple[float, float]:
    """(y, eta) for a point of H, given the limit measure of the top row."""
    z = _z(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    zb = z.conjugate()
    e, eb = _exp_cauchy(m, z), _exp_cauchy(m, zb)
    den = e - eb
    if abs(den) < 1e-300 or not (math.isfinite(abs(e)) and math.isfinite(abs(eb))):
        raise MapError(f"tiling map not evaluable at z={z}")
    y = z + (z - zb) * (eb - 1) * e / den
    eta = 1 + (z - zb) * (eb - 1) * (e - 1) / den
    if abs(y.imag) > 1e-8 * (1 + abs(y)) or abs(eta.imag) > 1e-8 * (1 + abs(eta)):
        raise MapError(f"non-real output at z={z}: y={y}, eta={eta}")
    return y.real, eta.real


def _tiling_residual(m, y, eta):
    def F(z):
        return z + (1 - eta) / (cmath.exp(-m.cauchy(z)) - 1) - y

    def dF(z):
        e = cmath.exp(-m.cauchy(z))
        return 1 + (1 - eta) * e * m.cauchy_derivative(z) / (e - 1) ** 2

    return F, dF


def _newton(F, dF, z0, tol=1e-13, maxit=100) -> Optional[complex]:
    """Damped Newton kept inside H; returns the last iterate or None."""
    z = z0
    try:
        r = F(z)
    except (ZeroDivisionError, OverflowError, ValueError):
        return None
    for _ in range(maxit):
        if abs(r) < tol:
            return z
        try:
            step = r / dF(z)
        except (ZeroDivisionError, OverflowError, ValueError):
            return None
        t = 1.0
        while t > 1e-6:
            zn = z - t * step
            if zn.imag > 0:
                try:
                    rn = F(zn)
                except (ZeroDivisionError, OverflowError, ValueError):
                    rn = None
                if rn is not None and abs(rn) < abs(r):
                    break
            t /= 2
        else:
            return z
        z, r = zn, rn
    return z


def _starts(lo: float, hi: float):
    yield 1j + 0.5 * (lo + hi)
    w = max(hi - lo, 1.0)
    for s in (0.5, 0.1, 2.0, 0.02):
        for x in np.linspace(lo - 0.25 * w, hi + 0.25 * w, 9):
            yield complex(x, s * w)


def _certified(F, z, y_scale, im_floor=1e-12) -> bool:
    try:
        return z is not None and z.imag > im_floor and abs(F(z)) < 1e-10 * max(1.0, y_scale)
    except (ZeroDivisionError, OverflowError, ValueError):
        return False


def tiling_inverse(m: CompactMeasure, y: float, eta: float) -> Optional[HalfPlanePoint]:
    """The root in H of z + (1 - eta)/(exp(-C(z)) - 1) = y, or None if frozen."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if eta == 1:
        # the top row is deterministic: the equation reduces to z = y
        return None
    F, dF = _tiling_residual(m, y, eta)
    lo, hi = m.support()
    for z0 in _starts(lo, hi):
        z = _newton(F, dF, z0)
        if _certified(F, z, abs(y)):
            yy, ee = tiling_map(m, z)
            if abs(yy - y) < 1e-8 * max(1, abs(y)) and abs(ee - eta) < 1e-8:
                return HalfPlanePoint(z)
    return None


def hexagon_measure() -> CompactMeasure:
    """Density one on [0, 1/2] and [1, 3/2]: the top row of a hexagon."""
    from fractions import Fraction as Fr

    return CompactMeasure.density([((Fr(0), Fr(1, 2)), Fr(1)), ((Fr(1), Fr(3, 2)), Fr(1))], quantized=True)


# ---------------------------------------------------------------------------
# Aztec diamond


def _aztec_coeffs(q, y, eta):
    return (q - y * q, eta * q + eta + q - y * (1 + q), eta * (1 + q))


def aztec_map(q: float, y: float, eta: float) -> Optional[HalfPlanePoint]:
    """Root in H of z^2 (q - yq) + z (eta q + eta + q - y(1+q)) + eta (1+q) = 0."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    a, b, c = _aztec_coeffs(q, y, eta)
    disc = b * b - 4 * a * c
    if disc >= 0 or a == 0:
        return None
    z = complex(-b, math.sqrt(-disc)) / (2 * a)
    if z.imag <= 0:
        z = z.conjugate()
    return HalfPlanePoint(z)


def aztec_ellipse(q, y, eta):
    """((y - eta)^2/q + (y + eta - 1)^2)(1 + q) - 1; negative inside the ellipse."""
    return ((y - eta) ** 2 / q + (y + eta - 1) ** 2) * (1 + q) - 1


def aztec_forward(q: float, z) -> Tuple[float, float]:
    """(y, eta) with z as the H-root; the quadratic is linear in (y, eta)."""
    z = _z(z)
    # y (q z^2 + (1+q) z) - eta (1+q)(z+1) = q z^2 + q z
    A = q * z * z + (1 + q) * z
    B = -(1 + q) * (z + 1)
    R = q * z * z + q * z
    M = np.array([[A.real, B.real], [A.imag, B.imag]])
    y, eta = np.linalg.solve(M, [R.real, R.imag])
    return float(y), float(eta)


# ---------------------------------------------------------------------------
# extreme characters


def _poly(F: TruncatedSeries) -> np.ndarray:
    """Coefficients of F(1+z) as a polynomial in z, lowest degree first."""
    if F.center != 0 and F.center != 1:
        raise ValueError("F must be a power series")
    if F.val < 0:
        raise ValueError("F must be analytic at 0")
    c = np.zeros(F.prec, dtype=complex)
    for e in range(F.val, F.prec):
        c[e] = complex(F.get(e))
    return c


def extreme_forward(F: TruncatedSeries, z) -> Tuple[float, float]:
    """(y, eta) solving 1/z + 1 + (1+z)F(1+z)/eta = y/eta with z as the root."""
    z = _z(z)
    c = _poly(F)
    g = (1 + z) * np.polyval(c[::-1], z)
    inv = 1 / z
    eta = -g.imag / inv.imag
    y = (g + eta * (inv + 1)).real
    return float(y), float(eta)


def extreme_map(F: TruncatedSeries, y: float, eta: float, radius: Optional[float] = None) -> Optional[HalfPlanePoint]:
    """Root in H of 1/z + 1 + (1+z)F(1+z)/eta = y/eta.

    F is used as the polynomial given by its retained coefficients; roots outside
    ``radius`` (the trusted disc, default: no limit) are discarded.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    c = _poly(F)
    # eta + (eta - y) z + z (1+z) F(z) = 0
    P = np.zeros(len(c) + 2, dtype=complex)
    P[0] += eta
    P[1] += eta - y
    P[1 : len(c) + 1] += c
    P[2 : len(c) + 2] += c
    P = np.trim_zeros(P, "b")
    if len(P) < 2:
        return None
    roots = np.roots(P[::-1])

    def res(z):
        return 1 / z + 1 + (1 + z) * np.polyval(c[::-1], z) / eta - y / eta

    def dres(z):
        p = np.polyval(c[::-1], z)
        dp = np.polyval(np.polyder(c[::-1]), z) if len(c) > 1 else 0
        return -1 / z**2 + (p + (1 + z) * dp) / eta

    good = []
    for z0 in roots:
        z = _newton(res, dres, complex(z0.real, abs(z0.imag)) if z0.imag != 0 else z0 + 1e-9j)
        if _certified(res, z, abs(y / eta)) and (radius is None or abs(z) < radius):
            good.append(z)
    if not good:
        return None
    return HalfPlanePoint(min(good, key=abs))


# ---------------------------------------------------------------------------
# model descriptors


@dataclass
class ModelMap:
    """Forward and inverse map of one model, plus a y-window that contains the liquid region."""

    forward: Callable[[complex], Tuple[float, float]]
    inverse: Callable[[float, float], Optional[HalfPlanePoint]]
    y_range: Tuple[float, float]
    name: str = ""


def tiling_model(m: CompactMeasure) -> ModelMap:
    lo, hi = m.support()
    pad = 0.1 * (hi - lo)
    return ModelMap(lambda z: tiling_map(m, z), lambda y, e: tiling_inverse(m, y, e), (lo - pad, hi + pad), "tiling")


def aztec_model(q: float) -> ModelMap:
    return ModelMap(lambda z: aztec_forward(q, z), lambda y, e: aztec_map(q, y, e), (-0.5, 1.5), "aztec")


def extreme_model(F: TruncatedSeries, y_range=(-1.0, 10.0)) -> ModelMap:
    return ModelMap(lambda z: extreme_forward(F, z), lambda y, e: extreme_map(F, y, e), y_range, "extreme")


# ---------------------------------------------------------------------------
# level curves


@dataclass
class LevelCurve:
    """Polyline {z in H : eta(z) = eta} parametrized by increasing y."""

    eta: float
    points: List[HalfPlanePoint]
    ys: np.ndarray
    tolerance: float
    bracket: Tuple[float, float] = (0.0, 0.0)  # y-widths of the endpoint brackets
    residual: float = 0.0  # max |eta(z) - eta| over vertices

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points])

    @property
    def closed(self) -> bool:
        """Both ends reach the boundary of H (the real axis or infinity), so the
        curve and its mirror image close up on the Riemann sphere."""
        zs = self.z
        # Cayley transform to the unit disc; the boundary of H is the unit circle
        c = np.abs((zs - 1j) / (zs + 1j))
        return bool(1 - c[0] < 0.05 and 1 - c[-1] < 0.05 and self.ys[0] < self.ys[-1])

    def max_error(self) -> float:
        return max(self.residual, *self.bracket)

    def check(self, model: Optional[ModelMap] = None) -> bool:
        if np.any(np.diff(self.ys) <= 0):
            return False
        if model is None:
            return True
        return all(abs(model.forward(p)[1] - self.eta) < self.tolerance for p in self.points)

    def to_csv(self, path_or_file, model: Optional[ModelMap] = None):
        rows = []
        for p, y in zip(self.points, self.ys):
            rows.append((p.z.real, p.z.imag, y, self.eta))
        return write_points_csv(rows, path_or_file)


def write_points_csv(rows, path_or_file):
    """rows of (re_z, im_z, y, eta)."""
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["re_z", "im_z", "y", "eta"])
        for r in rows:
            w.writerow([f"{float(v):.17g}" for v in r])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def _bisect(inside, a, b, tol):
    """inside(a) != inside(b); shrink [a, b] to width < tol."""
    ia = inside(a)
    while abs(b - a) > tol:
        c = 0.5 * (a + b)
        if inside(c) == ia:
            a = c
        else:
            b = c
    return a, b


def liquid_interval(model: ModelMap, eta: float, tol: float = 1e-10, scan: int = 401):
    """The y-interval at level eta where the inverse map has a root; brackets of width < tol."""
    lo, hi = model.y_range
    ys = np.linspace(lo, hi, scan)
    ok = [model.inverse(y, eta) is not None for y in ys]
    idx = [i for i, v in enumerate(ok) if v]
    if not idx:
        raise EmptyCurveError(f"no liquid region at eta={eta}")
    i0, i1 = idx[0], idx[-1]
    if any(not ok[i] for i in range(i0, i1 + 1)):
        raise MapError(f"liquid region at eta={eta} is not an interval")

    def inside(y):
        return model.inverse(y, eta) is not None

    if i0 == 0 or i1 == scan - 1:
        raise MapError("liquid region reaches the scan window; widen y_range")
    la, lb = _bisect(inside, ys[i0 - 1], ys[i0], tol)
    ra, rb = _bisect(inside, ys[i1], ys[i1 + 1], tol)
    return (lb, ra), (abs(lb - la), abs(rb - ra))


def trace_level_curve(model: ModelMap, eta: float, tolerance: float = 1e-8, n: int = 200) -> LevelCurve:
    """Trace the level curve with n vertices at Chebyshev-spaced y values."""
    (a, b), br = liquid_interval(model, eta, tol=tolerance)
    th = (np.arange(n) + 0.5) * math.pi / n
    ys = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(th)
    pts = []
    for y in ys:
        p = model.inverse(float(y), eta)
        if p is None:
            raise MapError(f"curve resolution failure at y={y}, eta={eta}")
        pts.append(p)
    res = max(abs(model.forward(p)[1] - eta) for p in pts)
    return LevelCurve(eta, pts, ys, tolerance, br, res)


# ---------------------------------------------------------------------------
# Gaussian free field


def gff_kernel(z, w) -> float:
    """-(1/2 pi) log |(z - w)/(z - conj w)|."""
    z, w = _z(z), _z(w)
    if z.imag <= 0 or w.imag <= 0:
        raise ValueError("points must lie in the upper half-plane")
    if z == w:
        raise ValueError("coincident points")
    return -math.log(abs((z - w) / (z - w.conjugate()))) / (2 * math.pi)


def gff_gram(points, eps: Optional[float] = None) -> np.ndarray:
    """Covariance matrix of the field averaged over circles of radius eps.

    Off-diagonal entries equal the point kernel (the kernel is harmonic in each
    argument away from the diagonal); the diagonal is -(1/2 pi) log(eps / (2 Im z)).
    Requires disjoint circles inside H.  Default eps: a third of the smallest gap.
    """
    zs = np.array([_z(p) for p in points])
    n = len(zs)
    d = np.abs(zs[:, None] - zs[None, :]) + np.diag(np.full(n, np.inf))
    if eps is None:
        eps = min(float(d.min()) / 3, float(zs.imag.min()) / 2) if n > 1 else float(zs.imag.min()) / 2
    if (n > 1 and 2 * eps >= d.min()) or eps >= zs.imag.min():
        raise ValueError("circles must be disjoint and inside the upper half-plane")
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = gff_kernel(zs[i], zs[j]) if i != j else -math.log(eps / (2 * zs[i].imag)) / (2 * math.pi)
    return G


def _gff_sum(z1, y1, w1, k1, z2, y2, w2, k2):
    Z = z1[:, None]
    W = z2[None, :]
    K = -np.log(np.abs((Z - W) / (Z - np.conj(W)))) / (2 * math.pi)
    return float(((w1 * y1**k1)[:, None] * K * (w2 * y2**k2)[None, :]).sum())


def _nodes(model, eta, n, shift, interval):
    """Trapezoid rule in theta for y = c - h cos(theta); shift=0.5 gives midpoints."""
    a, b = interval
    j = np.arange(n) + shift
    th = j * math.pi / n
    keep = (th > 0) & (th < math.pi)
    th = th[keep]
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    ys = c - h * np.cos(th)
    wts = h * np.sin(th) * math.pi / n
    zs = np.empty(len(ys), dtype=complex)
    for i, y in enumerate(ys):
        p = model.inverse(float(y), eta)
        if p is None:
            # within roundoff of the edge, where the kernel vanishes
            zs[i] = complex(y, 1e-300)
            wts[i] = 0.0
        else:
            zs[i] = p.z
    return ys, wts, zs


@dataclass
class GFFResult:
    value: float
    richardson_gap: float
    nodes: int


def gff_moment_cov_detail(model: ModelMap, eta1, k1: int, eta2, k2: int, n: int = 100, rtol: float = 1e-5) -> GFFResult:
    """Limit covariance of the centered moments int y^k (H - E H) dy at two levels.

    Computed as (1/pi) times the double integral of y^k1 y'^k2 G(z(y), w(y'))
    over the two level curves, parametrized by y.  The two grids are offset so
    that no node pair coincides on the diagonal; n is doubled until two
    successive Richardson values agree to rtol.
    """
    if k1 < 0 or k2 < 0:
        raise ValueError("moment orders must be nonnegative")
    if eta1 > eta2:
        eta1, k1, eta2, k2 = eta2, k2, eta1, k1
    try:
        I1, _ = liquid_interval(model, eta1, tol=1e-12)
        I2, _ = liquid_interval(model, eta2, tol=1e-12)
    except EmptyCurveError:
        # a frozen level is deterministic in the limit
        return GFFResult(0.0, 0.0, 0)
    vals, rich = [], []
    for _ in range(7):
        a = _nodes(model, eta1, n, 0.5, I1)
        b = _nodes(model, eta2, n, 0.0, I2)
        vals.append(_gff_sum(a[2], a[0], a[1], k1, b[2], b[0], b[1], k2) / math.pi)
        if len(vals) >= 2:
            # the log singularity on the diagonal leaves an O(1/n) term
            rich.append(2 * vals[-1] - vals[-2])
        if len(rich) >= 2:
            gap = abs(rich[-1] - rich[-2])
            if gap <= rtol * max(abs(rich[-1]), 1e-300) or gap < 1e-14:
                return GFFResult(rich[-1], gap, n)
        n *= 2
    raise MapError(f"quadrature did not settle: Richardson values {rich[-3:]}")


def gff_moment_cov(m: CompactMeasure, eta1, k1: int, eta2, k2: int, **kw) -> float:
    """Tiling-model GFF covariance of the moments of order k1 and k2 at levels eta1, eta2."""
    return gff_moment_cov_detail(tiling_model(m), eta1, k1, eta2, k2, **kw).value
