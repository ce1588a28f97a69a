import cmath
import math
import random
from fractions import Fraction

import pytest

from schurclt.freeprob import (
    CancellationError,
    CompactMeasure,
    H_from_h_prime,
    H_function,
    LimitSextuple,
    TruncatedSeries,
    cauchy_transform,
    check_character_asymptotics,
    check_character_asymptotics_2,
    compose_normal_forms,
    empirical_measure,
    h_prime,
    invert_series,
    r_transform,
    voiculescu_F,
)
from schurclt.symcore import Signature

F = Fraction


def U(coeffs, val, prec, center="inf"):
    return TruncatedSeries(coeffs, val, prec, center)


class TestSeries:
    def test_product_order(self):
        a = TruncatedSeries([1, 2, 3], 0, 3)
        b = TruncatedSeries([1, -1, 5], 0, 3)
        c = a * b
        assert c.prec == 3 and [c[e] for e in range(3)] == [1, 1, 6]

    def test_beyond_order_raises(self):
        with pytest.raises(IndexError):
            TruncatedSeries([1, 2], 0, 2)[2]

    def test_inverse_and_exp_log(self):
        s = TruncatedSeries([1, F(1, 3), F(-2, 7)], 0, 8)
        assert (s * s.inverse()) == TruncatedSeries.constant(1, 8)
        x = TruncatedSeries([0, F(1, 2), F(1, 5)], 0, 8)
        assert x.exp().log() == x

    def test_compose_geometric(self):
        # 1/(1-u) at u = t/(1+t) gives 1 + t
        t = TruncatedSeries.variable(6)
        inner = t * (t + 1).inverse()
        out = TruncatedSeries.geometric(1, 6).compose(inner)
        assert out == t + 1


class TestMeasures:
    def test_empirical(self):
        m = empirical_measure(Signature([0, 0]))
        assert sorted(m.atoms) == [(0, F(1, 2)), (F(1, 2), F(1, 2))]

    def test_empirical_packed_moments(self):
        m = empirical_measure(Signature([0] * 100))
        for k in (1, 2, 3):
            assert abs(float(m.moment(k)) - 1 / (k + 1)) < 1.0 / 100

    def test_empirical_staircase(self):
        N = 5
        m = empirical_measure(Signature(range(N - 1, -1, -1)))
        assert sorted(x for x, _ in m.atoms) == [F(2 * j, N) for j in range(N)]

    def test_json_roundtrip(self):
        m = CompactMeasure.density([((F(0), F(1, 2)), F(1)), ((F(1), F(3, 2)), F(1))], quantized=True)
        back = CompactMeasure.from_json(m.to_json())
        assert back.moments(5) == m.moments(5)

    def test_quantized_check(self):
        with pytest.raises(ValueError):
            CompactMeasure.density([((F(0), F(1, 2)), F(2))], quantized=True)

    def test_cauchy_closed_form_vs_moments(self):
        m = CompactMeasure.uniform(0, 1)
        z = 3 + 1j
        series = sum(float(m.moment(k)) / z ** (k + 1) for k in range(60))
        assert abs(m.cauchy(z) - series) < 1e-12
        h = 1e-6
        assert abs(m.cauchy_derivative(z) - (m.cauchy(z + h) - m.cauchy(z - h)) / (2 * h)) < 1e-8


class TestTransforms:
    def test_cauchy(self):
        assert cauchy_transform(CompactMeasure.dirac(0), 6) == U([1], 1, 7)
        a = F(2, 3)
        assert cauchy_transform(CompactMeasure.dirac(a), 6) == U([a**k for k in range(6)], 1, 7)
        assert cauchy_transform(CompactMeasure.uniform(0, 1), 6) == U([F(1, k + 1) for k in range(6)], 1, 7)

    def test_invert_examples(self):
        s = TruncatedSeries([1], -1, 8, 0)
        inv = invert_series(s)
        assert inv.center == "inf" and inv.get(1) == 1
        assert all(inv.get(e) == 0 for e in range(2, inv.prec))
        a = F(5, 4)
        inv = invert_series(cauchy_transform(CompactMeasure.dirac(a), 8))
        assert inv.get(-1) == 1 and inv.get(0) == a
        assert all(inv.get(e) == 0 for e in range(1, inv.prec))

    def test_invert_roundtrip_random(self):
        rng = random.Random(3)
        for _ in range(5):
            cs = [F(1)] + [F(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(7)]
            s = U(cs, 1, 9)
            inv = invert_series(s)
            there = compose_normal_forms(s, inv)
            assert all(there.get(e) == (1 if e == 1 else 0) for e in range(there.val, there.prec))
            back = compose_normal_forms(inv, s)
            assert all(back.get(e) == (1 if e == 1 else 0) for e in range(back.val, back.prec))

    def test_invert_wrong_shape(self):
        with pytest.raises(ValueError):
            invert_series(U([1], 2, 6))

    def test_r_transform(self):
        for a in (F(0), F(3, 7), F(-2)):
            R = r_transform(CompactMeasure.dirac(a), 10)
            assert R.get(0) == a and all(R.get(e) == 0 for e in range(1, 10))
        R = r_transform(CompactMeasure.uniform(0, 1), 8)
        assert [R.get(e) for e in range(6)] == [F(1, 2), F(1, 12), 0, F(-1, 720), 0, F(1, 30240)]

    def test_h_prime_uniform_zero(self):
        hp = h_prime(CompactMeasure.uniform(0, 1), 10)
        assert all(hp.get(e) == 0 for e in range(10))

    def test_h_prime_dirac(self):
        a = F(1, 3)
        hp = h_prime(CompactMeasure.dirac(a), 12)
        assert hp.get(0) == a - F(1, 2)
        z = 1.1
        closed = (float(a) + 1 / math.log(z)) / z - 1 / (z - 1)
        assert abs(hp.evaluate(z - 1) - closed) < 1e-10

    def test_not_probability(self):
        with pytest.raises(CancellationError):
            r_transform(CompactMeasure.atomic([(F(0), F(1, 2))]), 6)

    def test_H_two_routes(self):
        m = CompactMeasure.uniform(0, 2)
        for x in (0.9, 1.1, 1.2):
            assert abs(H_function(m, x) - H_from_h_prime(m, x)) < 1e-9

    def test_H_continuity_on_disc(self):
        m = CompactMeasure.uniform(0, 2)
        vals = [H_function(m, 1 + 0.05 * cmath.exp(2j * math.pi * k / 16)) for k in range(16)]
        for a, b in zip(vals, vals[1:] + vals[:1]):
            assert abs(a - b) < 0.05


class TestVoiculescu:
    def test_zero(self):
        Fj = voiculescu_F(LimitSextuple(), 8)
        assert all(Fj.get(e) == 0 for e in range(8))

    def test_gamma_plus(self):
        Fj = voiculescu_F(LimitSextuple(gamma_plus=F(3, 2)), 8)
        assert Fj.get(0) == F(3, 2) and all(Fj.get(e) == 0 for e in range(1, 8))

    def test_gamma_minus(self):
        g = F(2)
        Fj = voiculescu_F(LimitSextuple(gamma_minus=g), 8)
        assert [Fj.get(e) for e in range(8)] == [-g * (-1) ** e * (e + 1) for e in range(8)]

    def test_measures_cancel(self):
        J = LimitSextuple(
            A_plus=CompactMeasure.atomic([(F(1, 2), F(1))]),
            B_minus=CompactMeasure.atomic([(F(1, 3), F(1, 2))]),
        )
        Fj = voiculescu_F(J, 8)
        assert Fj.prec == 8

    def test_b_support(self):
        with pytest.raises(ValueError):
            LimitSextuple(B_plus=CompactMeasure.atomic([(F(2), F(1))]))


class TestCharacterAsymptotics:
    def test_packed(self):
        fam = lambda N: Signature([0] * N)
        fin, lim, gap = check_character_asymptotics(fam, CompactMeasure.uniform(0, 1), F(11, 10), 20)
        assert fin == 0 and abs(lim) < 1e-12 and gap < 1e-12

    def test_staircase_gap_decreases(self):
        fam = lambda N: Signature(range(N, 0, -1))
        m = CompactMeasure.uniform(0, 2)
        g16 = check_character_asymptotics(fam, m, F(11, 10), 16)[2]
        g64 = check_character_asymptotics(fam, m, F(11, 10), 64)[2]
        assert g64 < g16

    def test_staircase_second_order_exact(self):
        # s_staircase = prod_{i<j} (x_i + x_j): the mixed derivative has no N dependence
        fam = lambda N: Signature(range(N - 1, -1, -1))
        gap = check_character_asymptotics_2(fam, CompactMeasure.uniform(0, 2), F(11, 10), F(9, 10), 8)[2]
        assert gap < 1e-9

    def test_second_order(self):
        fam = lambda N: Signature([N // 2] * (N // 2) + [0] * (N // 2))
        m = CompactMeasure.density([((F(0), F(1, 2)), F(1)), ((F(1), F(3, 2)), F(1))])
        gaps = [check_character_asymptotics_2(fam, m, F(11, 10), F(9, 10), N)[2] for N in (8, 16, 32)]
        assert gaps[0] > gaps[1] > gaps[2]
