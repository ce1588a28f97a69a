"""Measures on signatures, transition kernels and Markov-chain constructions.

All weights are exact ``Fraction`` values.  Kernels with infinite Schur support
(geometric and Poisson steps) are truncated once a row reaches mass ``1 - eps``;
the missing mass is stored on the resulting measure as ``truncation_mass``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from decimal import Decimal, localcontext, ROUND_FLOOR
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .symcore import (
    BudgetError,
    Signature,
    as_signature,
    lr_expand,
    packed,
    schur_dimension,
    skew_dimension,
)

DEFAULT_EPS = Fraction(1, 10**12)


# ---------------------------------------------------------------------------
# measures


class SignatureMeasure:
    """Finitely supported measure on signatures of a fixed length.

    Weights plus ``truncation_mass`` sum to exactly 1.
    """

    __slots__ = ("length", "atoms", "truncation_mass")

    def __init__(self, length: int, atoms: Mapping, truncation_mass=None, check: bool = True):
        self.length = int(length)
        a: Dict[Signature, Fraction] = {}
        for lam, w in atoms.items():
            lam = as_signature(lam)
            w = Fraction(w)
            if w == 0:
                continue
            a[lam] = a.get(lam, 0) + w
        self.atoms = a
        total = sum(a.values(), Fraction(0))
        if truncation_mass is None:
            truncation_mass = 1 - total
        self.truncation_mass = Fraction(truncation_mass)
        if check:
            for lam, w in a.items():
                if len(lam) != self.length:
                    raise ValueError(f"atom {lam} has wrong length (expected {self.length})")
                if w < 0:
                    raise ValueError(f"negative weight at {lam}")
            if self.truncation_mass < 0:
                raise ValueError("weights exceed total mass 1")
            if total + self.truncation_mass != 1:
                raise ValueError("weights and truncation mass do not sum to 1")

    def __repr__(self):
        body = ", ".join(f"{list(k.parts)}: {v}" for k, v in sorted(self.atoms.items(), reverse=True)[:8])
        more = " ..." if len(self.atoms) > 8 else ""
        return f"SignatureMeasure(N={self.length}, {{{body}{more}}}, eps={self.truncation_mass})"

    def __getitem__(self, lam) -> Fraction:
        return self.atoms.get(as_signature(lam), Fraction(0))

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        return (
            isinstance(other, SignatureMeasure)
            and self.length == other.length
            and self.atoms == other.atoms
            and self.truncation_mass == other.truncation_mass
        )

    def items(self):
        return self.atoms.items()

    def support(self) -> List[Signature]:
        return sorted(self.atoms, reverse=True)

    @property
    def mass(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))

    def is_exact(self) -> bool:
        return self.truncation_mass == 0

    def expectation(self, fn: Callable[[Signature], object]) -> Fraction:
        return sum((w * fn(lam) for lam, w in self.atoms.items()), Fraction(0))

    def as_dict(self) -> Dict[Tuple[int, ...], Fraction]:
        return {k.parts: v for k, v in self.atoms.items()}

    # JSON: {length, atoms: [[parts], num, den], truncation_mass}
    def to_json(self) -> str:
        atoms = [[list(k.parts), v.numerator, v.denominator] for k, v in sorted(self.atoms.items(), reverse=True)]
        tm = self.truncation_mass
        return json.dumps(
            {"length": self.length, "atoms": atoms, "truncation_mass": [tm.numerator, tm.denominator]}
        )

    @classmethod
    def from_json(cls, text: str) -> "SignatureMeasure":
        d = json.loads(text) if isinstance(text, str) else text
        tm = d.get("truncation_mass", 0)
        if isinstance(tm, list):
            tm = Fraction(tm[0], tm[1])
        atoms = {Signature(p): Fraction(n, m) for p, n, m in d["atoms"]}
        return cls(d["length"], atoms, Fraction(tm))


def delta_measure(lam) -> SignatureMeasure:
    lam = as_signature(lam)
    return SignatureMeasure(len(lam), {lam: 1})


def _mix(weighted_rows: Iterable[Tuple[Fraction, SignatureMeasure]], length: int) -> SignatureMeasure:
    acc: Dict[Signature, Fraction] = {}
    lost = Fraction(0)
    for w, row in weighted_rows:
        for mu, p in row.atoms.items():
            acc[mu] = acc.get(mu, 0) + w * p
        lost += w * row.truncation_mass
    return SignatureMeasure(length, acc, None, check=False)


# ---------------------------------------------------------------------------
# kernels


class TransitionKernel:
    """Row-stochastic kernel GT_m -> GT_n with rows built lazily and cached."""

    def __init__(self, source_length: int, target_length: int, row_fn: Callable[[Signature], SignatureMeasure], name: str = ""):
        self.source_length = source_length
        self.target_length = target_length
        self._row_fn = row_fn
        self._rows: Dict[Signature, SignatureMeasure] = {}
        self.name = name

    def __repr__(self):
        return f"TransitionKernel({self.name or 'custom'}: {self.source_length}->{self.target_length})"

    def row(self, lam) -> SignatureMeasure:
        lam = as_signature(lam)
        r = self._rows.get(lam)
        if r is None:
            if len(lam) != self.source_length:
                raise ValueError(f"row source {lam} has wrong length")
            r = self._row_fn(lam)
            self._rows[lam] = r
        return r

    @property
    def rows(self) -> Dict[Signature, SignatureMeasure]:
        """Rows materialized so far."""
        return dict(self._rows)

    def push(self, rho: SignatureMeasure) -> SignatureMeasure:
        """The image measure sum_lam rho(lam) K(lam, .)."""
        if rho.length != self.source_length:
            raise ValueError("measure length does not match kernel source")
        out = _mix(((w, self.row(lam)) for lam, w in rho.atoms.items()), self.target_length)
        return out

    def then(self, other: "TransitionKernel") -> "TransitionKernel":
        """Composition: first self, then other."""
        if other.source_length != self.target_length:
            raise ValueError("kernel lengths do not compose")

        def row(lam):
            return other.push(self.row(lam))

        return TransitionKernel(self.source_length, other.target_length, row, f"{self.name}*{other.name}")


# ---------------------------------------------------------------------------
# projection


def projection_row(lam: Signature, n: int) -> SignatureMeasure:
    """pr_{m->n}(lam -> mu) = skew_dim(lam, mu, m-n) dim(mu) / dim(lam)."""
    m = len(lam)
    k = m - n
    if k == 0:
        return SignatureMeasure(n, {lam: 1})
    d = schur_dimension(lam)
    # mu_i in [lam_{i+k}, lam_i]
    ranges = [range(lam[i + k], lam[i] + 1) for i in range(n)]
    atoms = {}
    for mu in itertools.product(*ranges):
        if any(mu[i] < mu[i + 1] for i in range(n - 1)):
            continue
        mu = Signature(mu)
        s = skew_dimension(lam, mu, k)
        if s:
            atoms[mu] = Fraction(s * schur_dimension(mu), d)
    return SignatureMeasure(n, atoms)


def projection_kernel(m: int, n: int) -> TransitionKernel:
    if n > m or n < 0:
        raise ValueError("projection target must not exceed source length")
    return TransitionKernel(m, n, lambda lam: projection_row(lam, n), f"pr{m}->{n}")


def project_measure(rho: SignatureMeasure, n: int) -> SignatureMeasure:
    if n > rho.length:
        raise ValueError("projection target must not exceed source length")
    if n == rho.length:
        return rho
    return projection_kernel(rho.length, n).push(rho)


# ---------------------------------------------------------------------------
# multiplication steps


@dataclass(frozen=True)
class StepFunction:
    """Schur generating function g used as a multiplication step.

    kind: 'bernoulli' (beta, t), 'geometric' (alpha, t, eps),
    'poisson' (gamma, time, eps), 'explicit' (measure).
    """

    kind: str
    beta: Fraction = Fraction(0)
    alpha: Fraction = Fraction(0)
    gamma: Fraction = Fraction(0)
    t: int = 1
    time: Fraction = Fraction(0)
    eps: Fraction = DEFAULT_EPS
    measure: Optional[SignatureMeasure] = None

    @classmethod
    def bernoulli(cls, beta, t: int = 1) -> "StepFunction":
        beta = Fraction(beta)
        if not 0 <= beta <= 1:
            raise ValueError("bernoulli step needs 0 <= beta <= 1")
        return cls("bernoulli", beta=beta, t=int(t))

    @classmethod
    def geometric(cls, alpha, t: int = 1, eps=DEFAULT_EPS) -> "StepFunction":
        alpha = Fraction(alpha)
        if not 0 <= alpha < 1:
            raise ValueError("geometric step needs 0 <= alpha < 1")
        return cls("geometric", alpha=alpha, t=int(t), eps=Fraction(eps))

    @classmethod
    def poisson(cls, gamma, time, eps=DEFAULT_EPS) -> "StepFunction":
        gamma, time = Fraction(gamma), Fraction(time)
        if gamma < 0 or time < 0:
            raise ValueError("poisson step needs gamma, time >= 0")
        return cls("poisson", gamma=gamma, time=time, eps=Fraction(eps))

    @classmethod
    def explicit(cls, measure: SignatureMeasure) -> "StepFunction":
        return cls("explicit", measure=measure)

    @classmethod
    def single_box(cls, N: int) -> "StepFunction":
        """g = (x_1 + ... + x_N)/N, the SGF of delta_{(1,0,...,0)}."""
        return cls.explicit(delta_measure((1,) + (0,) * (N - 1)))

    def is_exact(self) -> bool:
        return self.kind in ("bernoulli", "explicit") or (self.kind == "geometric" and self.alpha == 0)

    def polynomial(self, N: int):
        """g as a SparsePolynomial in N variables (exact kinds only)."""
        from .symcore import SparsePolynomial, schur_to_polynomial

        if self.kind == "bernoulli":
            g = SparsePolynomial.constant(1, N)
            for i in range(N):
                g = g * (SparsePolynomial.variable(i, N) * self.beta + (1 - self.beta))
            return g ** self.t
        if self.kind == "explicit":
            g = SparsePolynomial(N)
            for eta, w in self.measure.atoms.items():
                g = g + schur_to_polynomial(eta) * Fraction(w, schur_dimension(eta))
            return g
        raise ValueError(f"{self.kind} step is not a polynomial")


def _bernoulli_factor_row(lam: Signature, beta: Fraction) -> Dict[Signature, Fraction]:
    n = len(lam)
    d = schur_dimension(lam)
    out = {}
    for e in itertools.product((0, 1), repeat=n):
        mu = tuple(a + b for a, b in zip(lam, e))
        if any(mu[i] < mu[i + 1] for i in range(n - 1)):
            continue
        j = sum(e)
        mu = Signature(mu)
        out[mu] = beta**j * (1 - beta) ** (n - j) * Fraction(schur_dimension(mu), d)
    return out


def _horizontal_strips(lam: Signature, j: int):
    """mu with mu/lam a horizontal strip of size j (mu_1 >= lam_1 >= mu_2 >= ...)."""
    n = len(lam)

    def rec(i, left, acc):
        if i == n:
            if left == 0:
                yield Signature(acc)
            return
        hi = lam[i] + left if i == 0 else min(lam[i - 1], lam[i] + left)
        for v in range(lam[i], hi + 1):
            yield from rec(i + 1, left - (v - lam[i]), acc + [v])

    yield from rec(0, j, [])


def _geometric_factor_row(lam: Signature, alpha: Fraction, eps: Fraction) -> Tuple[Dict[Signature, Fraction], Fraction]:
    n = len(lam)
    d = schur_dimension(lam)
    base = (1 - alpha) ** n
    out = {}
    mass = Fraction(0)
    j = 0
    while True:
        for mu in _horizontal_strips(lam, j):
            w = base * alpha**j * Fraction(schur_dimension(mu), d)
            out[mu] = w
            mass += w
        if 1 - mass <= eps or alpha == 0:
            break
        j += 1
        if j > 10_000:
            raise BudgetError("geometric truncation did not reach the requested mass")
    return out, 1 - mass


def _exp_neg_lower(x: Fraction, digits: int = 60) -> Fraction:
    """A rational lower bound for exp(-x), accurate to ~10^-digits."""
    with localcontext() as ctx:
        ctx.prec = digits + 10
        v = (-(Decimal(x.numerator) / Decimal(x.denominator))).exp()
        q = v.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_FLOOR)
    return Fraction(q) - Fraction(1, 10**digits)


def _poisson_row(lam: Signature, gamma: Fraction, time: Fraction, eps: Fraction) -> Tuple[Dict[Signature, Fraction], Fraction]:
    n = len(lam)
    d = schur_dimension(lam)
    x = gamma * time
    pref = _exp_neg_lower(n * x)
    out: Dict[Signature, Fraction] = {}
    mass = Fraction(0)
    layer = {lam: 1}  # number of box-adding paths lam -> mu
    k = 0
    while True:
        c = pref * x**k / factorial(k)
        for mu, paths in layer.items():
            w = c * paths * Fraction(schur_dimension(mu), d)
            out[mu] = out.get(mu, 0) + w
            mass += w
        if 1 - mass <= eps or x == 0:
            break
        nxt: Dict[Signature, int] = {}
        for mu, paths in layer.items():
            for i in range(n):
                if i == 0 or mu[i - 1] > mu[i]:
                    nu = list(mu.parts)
                    nu[i] += 1
                    nu = Signature(nu)
                    nxt[nu] = nxt.get(nu, 0) + paths
        layer = nxt
        k += 1
        if len(layer) > 2_000_000:
            raise BudgetError("poisson kernel row too large")
    return out, 1 - mass


def _explicit_row(lam: Signature, nu: SignatureMeasure) -> Dict[Signature, Fraction]:
    d = schur_dimension(lam)
    out: Dict[Signature, Fraction] = {}
    for eta, w in nu.atoms.items():
        de = schur_dimension(eta)
        for mu, c in lr_expand(lam, eta).items():
            out[mu] = out.get(mu, 0) + w * c * Fraction(schur_dimension(mu), d * de)
    for mu, v in out.items():
        if v < 0:
            raise ValueError(f"negative transition coefficient at {mu}")
    return out


def multiplication_row(lam: Signature, g: StepFunction) -> SignatureMeasure:
    """Row st_g(lam -> .) of the multiplication kernel."""
    n = len(lam)
    if g.kind == "bernoulli":
        cur = {lam: Fraction(1)}
        for _ in range(g.t):
            nxt: Dict[Signature, Fraction] = {}
            for a, w in cur.items():
                for mu, p in _bernoulli_factor_row(a, g.beta).items():
                    nxt[mu] = nxt.get(mu, 0) + w * p
            cur = nxt
        return SignatureMeasure(n, cur)
    if g.kind == "geometric":
        cur = {lam: Fraction(1)}
        lost = Fraction(0)
        per = g.eps / max(g.t, 1)
        for _ in range(g.t):
            nxt = {}
            for a, w in cur.items():
                row, tail = _geometric_factor_row(a, g.alpha, per)
                lost += w * tail
                for mu, p in row.items():
                    nxt[mu] = nxt.get(mu, 0) + w * p
            cur = nxt
        return SignatureMeasure(n, cur)
    if g.kind == "poisson":
        row, _ = _poisson_row(lam, g.gamma, g.time, g.eps)
        return SignatureMeasure(n, row)
    if g.kind == "explicit":
        if g.measure.length != n:
            raise ValueError("explicit step has wrong length")
        return SignatureMeasure(n, _explicit_row(lam, g.measure))
    raise ValueError(f"unknown step kind {g.kind!r}")


def multiplication_kernel(N: int, g: StepFunction) -> TransitionKernel:
    return TransitionKernel(N, N, lambda lam: multiplication_row(lam, g), f"st[{g.kind}]")


def multiply_measure(rho: SignatureMeasure, g: StepFunction) -> SignatureMeasure:
    out = multiplication_kernel(rho.length, g).push(rho)
    return SignatureMeasure(out.length, out.atoms, 1 - out.mass)


# ---------------------------------------------------------------------------
# application measures


def tensor_measure(lam1, lam2, method: str = "auto") -> SignatureMeasure:
    """rho(eta) = c^{lam1 lam2}_eta dim(eta) / (dim lam1 dim lam2)."""
    lam1, lam2 = as_signature(lam1), as_signature(lam2)
    if len(lam1) != len(lam2):
        raise ValueError("tensor factors must have equal length")
    den = schur_dimension(lam1) * schur_dimension(lam2)
    coeffs = lr_expand(lam1, lam2, method=method)
    return SignatureMeasure(len(lam1), {eta: Fraction(c * schur_dimension(eta), den) for eta, c in coeffs.items()})


SCHUR_WEYL_MAX_BOXES = 200


def schur_weyl_measure(N: int, n: int) -> SignatureMeasure:
    """Decomposition measure of (C^N)^{tensor n}, via n single-box Pieri steps."""
    if n > SCHUR_WEYL_MAX_BOXES:
        raise BudgetError(f"schur_weyl_measure: n={n} exceeds {SCHUR_WEYL_MAX_BOXES} boxes")
    mult: Dict[Tuple[int, ...], int] = {(0,) * N: 1}
    for _ in range(n):
        nxt: Dict[Tuple[int, ...], int] = {}
        for lam, c in mult.items():
            for i in range(N):
                if i == 0 or lam[i - 1] > lam[i]:
                    mu = lam[:i] + (lam[i] + 1,) + lam[i + 1:]
                    nxt[mu] = nxt.get(mu, 0) + c
        mult = nxt
    total = N**n
    return SignatureMeasure(N, {Signature(l): Fraction(c * schur_dimension(l), total) for l, c in mult.items()})


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Step:
    """One chain step; kind is 'projection', 'multiplication' or 'combined'."""

    kind: str
    target_length: int
    g: Optional[StepFunction] = None

    @classmethod
    def projection(cls, n: int) -> "Step":
        return cls("projection", n)

    @classmethod
    def multiplication(cls, g: StepFunction, N: int) -> "Step":
        return cls("multiplication", N, g)

    @classmethod
    def combined(cls, n: int, g: StepFunction) -> "Step":
        return cls("combined", n, g)


@dataclass
class ChainSpec:
    """Terminal (top) measure plus the ordered steps taking level j to level j+1.

    Level 0 carries the terminal measure; each step moves one level down.
    """

    terminal: SignatureMeasure
    steps: List[Step] = field(default_factory=list)

    def lengths(self) -> List[int]:
        out = [self.terminal.length]
        for s in self.steps:
            out.append(s.target_length)
        return out

    def validate(self):
        cur = self.terminal.length
        for i, s in enumerate(self.steps):
            if s.kind == "projection" and s.target_length > cur:
                raise ValueError(f"step {i}: projection must not increase length")
            if s.kind == "multiplication" and s.target_length != cur:
                raise ValueError(f"step {i}: multiplication keeps the length")
            if s.kind == "combined" and s.target_length > cur:
                raise ValueError(f"step {i}: combined step must not increase length")
            if s.kind not in ("projection", "multiplication", "combined"):
                raise ValueError(f"step {i}: unknown kind {s.kind!r}")
            if s.kind != "projection" and s.g is None:
                raise ValueError(f"step {i}: missing step function")
            cur = s.target_length


def step_kernel(source_length: int, step: Step) -> TransitionKernel:
    if step.kind == "projection":
        return projection_kernel(source_length, step.target_length)
    if step.kind == "multiplication":
        return multiplication_kernel(source_length, step.g)
    pk = projection_kernel(source_length, step.target_length)
    return pk.then(multiplication_kernel(step.target_length, step.g))


@dataclass
class BuiltChain:
    spec: ChainSpec
    kernels: List[TransitionKernel]
    levels: List[SignatureMeasure]

    @property
    def lengths(self) -> List[int]:
        return [m.length for m in self.levels]

    def __len__(self):
        return len(self.levels)

    def is_exact(self) -> bool:
        return all(m.truncation_mass == 0 for m in self.levels)

    def joint_law(self, max_paths: int = 2_000_000) -> Dict[Tuple[Signature, ...], Fraction]:
        """Explicit joint law over all levels (paths from the top)."""
        law = {(lam,): w for lam, w in self.spec.terminal.atoms.items()}
        for K in self.kernels:
            nxt = {}
            for path, w in law.items():
                for mu, p in K.row(path[-1]).atoms.items():
                    nxt[path + (mu,)] = w * p
            law = nxt
            if len(law) > max_paths:
                raise BudgetError(f"joint law exceeds {max_paths} paths")
        return law


def build_chain(spec: ChainSpec) -> BuiltChain:
    spec.validate()
    kernels = []
    levels = [spec.terminal]
    cur = spec.terminal.length
    for s in spec.steps:
        K = step_kernel(cur, s)
        kernels.append(K)
        pushed = K.push(levels[-1])
        levels.append(SignatureMeasure(pushed.length, pushed.atoms, 1 - pushed.mass))
        cur = s.target_length
    return BuiltChain(spec, kernels, levels)


AZTEC_JOINT_MAX_N = 6


def aztec_chain(N: int, q) -> ChainSpec:
    """Interleaved chain lam^(N)=0^N, kappa, pr, kappa, ..., kappa with beta = q/(1+q).

    Levels 2j and 2j+1 (j = 0..N-1) hold the signatures of length N-j before and
    after the kappa step; see :func:`aztec_level`.
    """
    q = Fraction(q)
    if q <= 0:
        raise ValueError("q must be positive")
    beta = q / (1 + q)
    steps: List[Step] = []
    for t in range(N, 0, -1):
        steps.append(Step.multiplication(StepFunction.bernoulli(beta), t))
        if t > 1:
            steps.append(Step.projection(t - 1))
    return ChainSpec(delta_measure(packed(N)), steps)


def aztec_level(N: int, t: int, after_kappa: bool = False) -> int:
    """Level index in :func:`aztec_chain` of the length-t signature."""
    if not 1 <= t <= N:
        raise ValueError("t out of range")
    return 2 * (N - t) + (1 if after_kappa else 0)


def trapezoid_chain(lam, lengths: Sequence[int]) -> ChainSpec:
    """Projection chain from delta_lam through the given decreasing lengths."""
    lam = as_signature(lam)
    return ChainSpec(delta_measure(lam), [Step.projection(n) for n in lengths])


def walk_chain(lam0, g: StepFunction, steps: int) -> ChainSpec:
    """Multiplication chain from delta_lam0 with `steps` repetitions of g."""
    lam0 = as_signature(lam0)
    N = len(lam0)
    return ChainSpec(delta_measure(lam0), [Step.multiplication(g, N) for _ in range(steps)])
