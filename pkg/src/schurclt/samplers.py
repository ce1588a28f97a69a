"""Exact samplers for the application models and replica statistics.

Seeding: a run with integer ``seed`` and ``R`` replicas gives replica ``r`` the
generator ``numpy.random.default_rng(SeedSequence(seed).spawn(R)[r])``; replica streams
are therefore independent of the thread count and of the order of evaluation.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .measures import StepFunction, multiplication_kernel
from .moments import power_sum
from .symcore import Signature, as_signature


def make_rng(seed=None, rng: Optional[np.random.Generator] = None) -> np.random.Generator:
    if rng is not None:
        return rng
    return np.random.default_rng(seed)


def replica_rngs(seed: int, R: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(R)]


def run_replicas(fn: Callable[[np.random.Generator], object], R: int, seed: int, threads: int = 1) -> list:
    """Apply fn to R independent generators; output order is replica order."""
    if R < 1:
        raise ValueError("need at least one replica")
    rngs = replica_rngs(seed, R)
    if threads <= 1:
        return [fn(g) for g in rngs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, rngs))


# ---------------------------------------------------------------------------
# interlacing arrays


@dataclass
class InterlacingArray:
    """Signatures indexed by level key (length for tilings, time for walks)."""

    levels: Dict[int, Signature]
    N: int
    timed: bool = False

    def __getitem__(self, key) -> Signature:
        return self.levels[key]

    def level(self, n: int) -> Signature:
        if n not in self.levels:
            raise KeyError(f"level {n} not present")
        return self.levels[n]

    def check(self) -> bool:
        """Interlacing between consecutive lengths (tiling arrays only)."""
        if self.timed:
            return True
        keys = sorted(self.levels)
        for a, b in zip(keys, keys[1:]):
            if b == a + 1 and not self.levels[a].interlaces(self.levels[b]):
                return False
        return True

    def to_json(self) -> str:
        return json.dumps({"N": self.N, "timed": self.timed, "levels": [[k, list(v.parts)] for k, v in sorted(self.levels.items())]})

    @classmethod
    def from_json(cls, text: str) -> "InterlacingArray":
        d = json.loads(text)
        return cls({k: Signature(p) for k, p in d["levels"]}, d["N"], d.get("timed", False))


# ---------------------------------------------------------------------------
# uniform Gelfand-Tsetlin paths


def _branch_down(l: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Shifted coordinates of mu < lam with P(mu) proportional to dim(mu).

    The roots y_1 > ... > y_{n-1} of sum_j w_j/(l_j - x) with Dirichlet(1,...,1)
    weights have density proportional to the Vandermonde V(y) on the interlacing
    chamber; the Vandermonde integrated over a unit cell equals V(floor y), so
    floor(y) has the required law.  Only signs at integers are needed.
    """
    n = len(l)
    w = rng.standard_exponential(n)
    lf = l.astype(float)
    lo = l[1:].copy()  # secular function is -inf just above l_{i+1}
    hi = l[:-1].copy()  # +inf just below l_i
    while True:
        act = hi - lo > 1
        if not act.any():
            break
        # inactive rows get a non-integer dummy point so no pole is hit
        mid = (lo + hi) // 2
        x = np.where(act, mid, lo + 0.5).astype(float)
        s = (w[None, :] / (lf[None, :] - x[:, None])).sum(axis=1)
        neg = s < 0
        lo = np.where(act & neg, mid, lo)
        hi = np.where(act & ~neg, mid, hi)
    return lo


def sample_trapezoid_path(lam, seed=None, rng: Optional[np.random.Generator] = None) -> InterlacingArray:
    """Uniform random interlacing array with top row lam (top-down branching)."""
    lam = as_signature(lam)
    g = make_rng(seed, rng)
    N = len(lam)
    levels = {N: lam}
    l = np.array(lam.shifted(), dtype=np.int64)
    for n in range(N - 1, 0, -1):
        l = _branch_down(l, g)
        levels[n] = Signature.from_shifted(l.tolist())
    return InterlacingArray(levels, N)


# ---------------------------------------------------------------------------
# Aztec diamond


@dataclass
class DominoConfiguration:
    """Tiling of the order-n Aztec diamond.

    Cells are unit squares (x, y) with |x + 1/2| + |y + 1/2| <= n, stored with
    offset ``n``.  ``H[x, y]`` marks a horizontal domino on (x, y), (x+1, y);
    ``V[x, y]`` a vertical domino on (x, y), (x, y+1).  Types: horizontal is N when
    x + y + n is even and S otherwise; vertical is E when even and W otherwise.
    """

    n: int
    H: np.ndarray
    V: np.ndarray

    @property
    def offset(self) -> int:
        return self.n

    def dominoes(self) -> List[Tuple[str, Tuple[int, int], str]]:
        out = []
        o = self.n
        for arr, kind in ((self.H, "H"), (self.V, "V")):
            for i, j in zip(*np.nonzero(arr)):
                x, y = int(i) - o, int(j) - o
                even = (x + y + self.n) % 2 == 0
                t = ("N" if even else "S") if kind == "H" else ("E" if even else "W")
                out.append((kind, (x, y), t))
        return sorted(out)

    def horizontal_count(self) -> int:
        return int(self.H.sum())

    def is_tiling(self) -> bool:
        n, o = self.n, self.n
        size = 2 * n + 1
        cover = np.zeros((size, size), dtype=int)
        cover[:-1, :] += self.H[:-1, :]
        cover[1:, :] += self.H[:-1, :]
        cover[:, :-1] += self.V[:, :-1]
        cover[:, 1:] += self.V[:, :-1]
        if self.H[-1, :].any() or self.V[:, -1].any():
            return False
        xs = np.arange(size) - o
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        inside = (np.abs(X + 0.5) + np.abs(Y + 0.5)) <= n
        return bool(np.all(cover[inside] == 1) and np.all(cover[~inside] == 0))

    def key(self) -> tuple:
        return tuple(self.dominoes())

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "dominoes": [[k, list(c), t] for k, c, t in self.dominoes()]})


def _shift(a: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """out[x + dx, y + dy] = a[x, y]; vacated entries are False."""
    out = np.zeros_like(a)
    sx = slice(max(dx, 0), a.shape[0] + min(dx, 0))
    sy = slice(max(dy, 0), a.shape[1] + min(dy, 0))
    tx = slice(max(-dx, 0), a.shape[0] + min(-dx, 0))
    ty = slice(max(-dy, 0), a.shape[1] + min(-dy, 0))
    out[sx, sy] = a[tx, ty]
    return out


def sample_aztec(N: int, q=1, seed=None, rng: Optional[np.random.Generator] = None) -> DominoConfiguration:
    """q-biased domino shuffling: P(tiling) proportional to q^{#horizontal/2}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    q = float(q)
    if q <= 0:
        raise ValueError("q must be positive")
    p_h = q / (1 + q)
    g = make_rng(seed, rng)
    o = N + 1
    size = 2 * N + 3
    idx = np.arange(size) - o
    X, Y = np.meshgrid(idx, idx, indexing="ij")
    H = np.zeros((size, size), dtype=bool)
    V = np.zeros((size, size), dtype=bool)
    for n in range(0, N):
        even = (X + Y + n) % 2 == 0
        # destruction of colliding pairs
        hp = H & even & _shift(H, 0, -1)
        H &= ~(hp | _shift(hp, 0, 1))
        vp = V & even & _shift(V, -1, 0)
        V &= ~(vp | _shift(vp, 1, 0))
        # sliding
        H = _shift(H & even, 0, 1) | _shift(H & ~even, 0, -1)
        V = _shift(V & even, 1, 0) | _shift(V & ~even, -1, 0)
        m = n + 1
        occ = H | _shift(H, 1, 0) | V | _shift(V, 0, 1)
        inside = (np.abs(X + 0.5) + np.abs(Y + 0.5)) <= m
        free = inside & ~occ
        win = (X + Y + m) % 2 == 1
        win &= free & _shift(free, -1, 0) & _shift(free, 0, -1) & _shift(free, -1, -1)
        # empty windows along a diagonal alternate: the lowest of a run is a block
        blocks = np.zeros_like(win)
        for i in range(size):
            prev = np.zeros(size, dtype=bool)
            if i > 0:
                prev[1:] = blocks[i - 1, :-1]
            blocks[i] = win[i] & ~prev
        coins = g.random(int(blocks.sum())) < p_h
        bx, by = np.nonzero(blocks)
        hb, vb = (bx[coins], by[coins]), (bx[~coins], by[~coins])
        H[hb] = True
        H[hb[0], hb[1] + 1] = True
        V[vb] = True
        V[vb[0] + 1, vb[1]] = True
    # crop to offset N
    return DominoConfiguration(N, H[1:-1, 1:-1].copy(), V[1:-1, 1:-1].copy())


@dataclass
class AztecSlices:
    """Particle slices of a tiling.

    ``before[t]`` is the length-t signature read from the gray cells (the level
    before the Bernoulli step of the chain); ``after[t]`` is read from the white
    cells (after that step).  ``before[N]`` is always (0^N).
    """

    n: int
    before: Dict[int, Signature]
    after: Dict[int, Signature]

    def path(self) -> Tuple[Signature, ...]:
        """Chain order: before_N, after_N, before_{N-1}, ..., after_1."""
        out = []
        for t in range(self.n, 0, -1):
            out.extend([self.before[t], self.after[t]])
        return tuple(out)


def _slices(cs: np.ndarray, ys: np.ndarray, line_of: Callable[[int], int], base_of: Callable[[int], int], n: int) -> Dict[int, Signature]:
    out = {}
    order = np.lexsort((-ys, cs))
    cs, ys = cs[order], ys[order]
    for t in range(1, n + 1):
        c = line_of(t)
        sel = ys[cs == c]
        if len(sel) != t:
            raise ValueError(f"slice {t} has {len(sel)} particles, expected {t}")
        pos = sel - base_of(c)
        out[t] = Signature([int(pos[i]) - (t - 1 - i) for i in range(t)])
    return out


def aztec_to_signatures(d: DominoConfiguration) -> AztecSlices:
    n, o = d.n, d.offset
    hx, hy = np.nonzero(d.H)
    vx, vy = np.nonzero(d.V)
    hx, hy, vx, vy = hx - o, hy - o, vx - o, vy - o
    hsel = (hx + hy + n) % 2 == 0  # N type
    vsel = (vx + vy + n) % 2 == 0  # E type
    wx = np.concatenate([hx[hsel], vx[vsel]])
    wy = np.concatenate([hy[hsel], vy[vsel]])
    gx = np.concatenate([hx[hsel] + 1, vx[vsel]])
    gy = np.concatenate([hy[hsel], vy[vsel] + 1])
    after = _slices(wx + wy, wy, lambda t: 2 * t - n - 2, lambda c: (c - n) // 2, n)
    before = _slices(gx + gy, gy, lambda t: 2 * t - n - 1, lambda c: (c + 1 - n) // 2, n)
    return AztecSlices(n, before, after)


# ---------------------------------------------------------------------------
# noncolliding walks


class _RowSampler:
    def __init__(self, kernel):
        self.kernel = kernel
        self.cache: Dict[Signature, Tuple[list, np.ndarray, float]] = {}

    def draw(self, lam: Signature, g: np.random.Generator) -> Signature:
        ent = self.cache.get(lam)
        if ent is None:
            row = self.kernel.row(lam)
            sigs = sorted(row.atoms, reverse=True)
            cum = np.cumsum([float(row.atoms[s]) for s in sigs])
            ent = (sigs, cum, float(row.truncation_mass))
            self.cache[lam] = ent
        sigs, cum, _ = ent
        u = g.random() * cum[-1]  # condition on the retained mass
        return sigs[min(int(np.searchsorted(cum, u, side="right")), len(sigs) - 1)]


WALK_MAX_N = 6


def sample_walks(lam0, step: StepFunction, times: Sequence[int], seed=None, rng=None, sampler: Optional[_RowSampler] = None) -> InterlacingArray:
    """Record the walk at the given step counts (applications of ``step``)."""
    lam0 = as_signature(lam0)
    if len(lam0) > WALK_MAX_N:
        from .symcore import BudgetError

        raise BudgetError(f"walk sampler limited to N <= {WALK_MAX_N}")
    times = sorted(int(t) for t in times)
    g = make_rng(seed, rng)
    if sampler is None:
        sampler = _RowSampler(multiplication_kernel(len(lam0), step))
    cur = lam0
    out = {}
    t = 0
    for target in times:
        while t < target:
            cur = sampler.draw(cur, g)
            t += 1
        out[target] = cur
    return InterlacingArray(out, len(lam0), timed=True)


def walk_sampler(N: int, step: StepFunction) -> _RowSampler:
    """Reusable row cache for repeated calls to :func:`sample_walks`."""
    return _RowSampler(multiplication_kernel(N, step))


# ---------------------------------------------------------------------------
# heights


def _level_of(arr: InterlacingArray, eta) -> int:
    n = int(np.floor(float(eta) * arr.N + 1e-12)) if not isinstance(eta, Fraction) else (eta * arr.N).__floor__()
    if n not in arr.levels:
        raise KeyError(f"level {n} missing from array")
    return n


def height_function(arr: InterlacingArray, y, eta) -> int:
    """#{i : lam_i + n - i >= N y} at level n = floor(N eta)."""
    n = _level_of(arr, eta)
    thr = Fraction(y) * arr.N if not isinstance(y, float) else y * arr.N
    return sum(1 for l in arr.levels[n].shifted() if l >= thr)


def height_moment(arr: InterlacingArray, eta, k: int) -> Fraction:
    """int_0^inf y^k H(y, eta) dy = p_{k+1} / ((k+1) N^{k+1})."""
    n = _level_of(arr, eta)
    return Fraction(power_sum(arr.levels[n], k + 1), (k + 1) * arr.N ** (k + 1))


# ---------------------------------------------------------------------------
# statistics


@dataclass
class ReplicaStats:
    values: np.ndarray  # replicas x observables
    names: List[str]
    seed: Optional[int] = None

    @property
    def replicas(self) -> int:
        return self.values.shape[0]

    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def stderr(self) -> np.ndarray:
        return self.values.std(axis=0, ddof=1) / np.sqrt(self.replicas)


def estimate_covariance(values, min_replicas: int = 100):
    """Unbiased sample covariance and jackknife standard errors.

    values: array (R, m).  Returns (cov, se), both m x m.
    """
    x = np.asarray(values, dtype=float)
    R = x.shape[0]
    # shift by one observation so constant columns give exact zeros
    if R:
        x = x - x[0]
    if R < min_replicas:
        raise ValueError(f"need at least {min_replicas} replicas, got {R}")
    cov = np.cov(x, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])
    # leave-one-out covariances in closed form
    c = x - x.mean(axis=0)
    S = c.T @ c
    outer = c[:, :, None] * c[:, None, :]
    loo = (S[None] - outer * R / (R - 1)) / (R - 2)
    jm = loo.mean(axis=0)
    se = np.sqrt((R - 1) / R * ((loo - jm) ** 2).sum(axis=0))
    return cov, se
