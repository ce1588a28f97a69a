from fractions import Fraction

import numpy as np
import pytest

from schurclt.asymcov import (
    OrderError,
    Series2,
    aztec_F,
    aztec_cov,
    character_kernel,
    clt_cov_combined,
    clt_cov_multiplication,
    clt_cov_one_level,
    clt_cov_projections,
    cov_matrix,
    double_contour,
    double_contour_quadrature,
    matrix_degeneration_gap,
    restriction_cov,
    schur_weyl_cov,
    tensor_cov,
    tensor_Q,
)
from schurclt.freeprob import CompactMeasure, TruncatedSeries, h_prime
from schurclt.measures import ChainSpec, StepFunction, build_chain, schur_weyl_measure, walk_chain
from schurclt.moments import exact_covariance
from schurclt.symcore import packed

F = Fraction
P = 10


def L(cs, val=-1, prec=P):
    return TruncatedSeries(cs, val, prec, 0)


def hexagon():
    return CompactMeasure.density([((F(0), F(1, 2)), F(1)), ((F(1), F(3, 2)), F(1))], quantized=True)


class TestDoubleContour:
    def test_pole_only(self):
        f = L([1])
        assert double_contour(f, 1, f, 1) == 0

    def test_single_term(self):
        f = L([1, 0, 1])
        assert double_contour(f, 1, f, 1) == 1

    def test_analytic_part_cancels(self):
        c = F(3, 4)
        f = L([1, 1 + c, c])
        assert double_contour(f, 1, f, 1, Series2.constant(-c, 4)) == 0

    def test_order_error(self):
        with pytest.raises(OrderError):
            double_contour(L([1, 1], prec=1), 3, L([1, 1], prec=1), 3)

    @pytest.mark.parametrize("k1,k2", [(1, 1), (2, 1), (2, 3), (3, 3)])
    def test_quadrature_agrees(self, k1, k2):
        c = F(1, 3)
        f = L([1, 1, F(1, 2), F(1, 5)])
        g = L([1, F(2, 3), F(1, 7)])
        G = Series2.constant(c, 6)
        exact = double_contour(f, k1, g, k2, G)

        def fn(z):
            return 1 / z + 1 + z / 2 + z**2 / 5

        def gn(w):
            return 1 / w + 2 / 3 + w / 7

        num = double_contour_quadrature(fn, k1, gn, k2, lambda z, w: float(c) + 0 * z, eps=0.25)
        assert abs(num - float(exact)) < 1e-8


class TestCovarianceFormulas:
    def test_one_level_schur_weyl(self):
        for c in (F(1, 2), F(1), F(2)):
            assert clt_cov_one_level(c, -c, 1, 1) == 0

    def test_one_level_zero_data(self):
        # F = G = 0 is the limit of the packed (deterministic) signature
        assert clt_cov_one_level(0, 0, 1, 1) == 0
        assert clt_cov_one_level(0, 0, 2, 2) == 0

    def test_one_level_symmetry(self):
        Fs = L([F(1, 3), F(1, 5), F(-1, 7)], 0, 12)
        G = character_kernel(hexagon(), 8)
        for k1, k2 in [(1, 2), (2, 3), (1, 3)]:
            a = clt_cov_one_level(Fs, G, k1, k2)
            b = clt_cov_one_level(Fs, G, k2, k1)
            assert abs(float(a) - float(b)) < 1e-12

    def test_projections_reduce(self):
        m = hexagon()
        Fh, G = h_prime(m, 12), character_kernel(m, 8)
        for k1, k2 in [(1, 1), (1, 2), (2, 2)]:
            a = clt_cov_projections(Fh, G, 1, 1, k1, k2)
            assert abs(float(a) - float(clt_cov_one_level(Fh, G, k1, k2))) < 1e-12
        assert clt_cov_projections(0, 0, F(1, 2), F(1, 2), 1, 1) == 0

    def test_projections_order(self):
        with pytest.raises(ValueError):
            clt_cov_projections(0, 0, F(3, 4), F(1, 2), 1, 1)

    def test_multiplication_reduces(self):
        Fs = L([F(1, 2), F(-1, 4), F(1, 8)], 0, 12)
        for k1, k2 in [(1, 1), (2, 1), (2, 3)]:
            assert clt_cov_multiplication(Fs, Fs, None, k1, k2) == clt_cov_one_level(Fs, None, k1, k2)

    def test_poisson_walk_against_exact(self):
        # var p_1 / N^2 = gamma * tau exactly for Poisson walks from the packed start
        N, gamma, tau = 4, F(1), F(1, 2)
        ch = build_chain(walk_chain(packed(N), StepFunction.poisson(gamma, tau * N), 1))
        ex = exact_covariance(ch, (1, 1), (1, 1))
        lim = clt_cov_multiplication(gamma * tau, gamma * tau, None, 1, 1)
        assert lim == gamma * tau
        assert abs(float(ex.value) / N**2 - float(lim)) < 1e-8

    def test_combined_degenerations(self):
        m = hexagon()
        Fh, G = h_prime(m, 12), character_kernel(m, 8)
        a1, a2 = F(1, 3), F(1, 2)
        for k1, k2 in [(1, 1), (2, 1)]:
            # projections: F_t = H'/a_t
            v = clt_cov_combined(Fh * (1 / a1), Fh * (1 / a2), G, a1, a2, k1, k2)
            w = clt_cov_projections(Fh, G, a1, a2, k1, k2)
            assert abs(float(v) - float(w)) < 1e-12
        Fs = L([F(1, 2), F(1, 3)], 0, 12)
        Fs2 = L([F(1, 5), F(1, 7)], 0, 12)
        assert clt_cov_combined(Fs, Fs2, None, 1, 1, 2, 2) == clt_cov_multiplication(Fs, Fs2, None, 2, 2)

    def test_combined_order(self):
        with pytest.raises(ValueError):
            clt_cov_combined(0, 0, None, F(1, 2), F(1, 3), 1, 1)

    def test_power_cap(self):
        with pytest.raises(ValueError):
            clt_cov_one_level(0, 0, 9, 1)


class TestApplications:
    def test_tensor_Q_uniform(self):
        u = CompactMeasure.uniform(0, 1)
        Q = tensor_Q(u, u, 8)
        assert all(Q[i, j] == 0 for i in range(Q.K) for j in range(Q.K))

    def test_tensor_Q_symmetric(self):
        m = hexagon()
        assert tensor_Q(m, m, 6).is_symmetric(1e-12)

    def test_tensor_uniform(self):
        u = CompactMeasure.uniform(0, 1)
        assert tensor_cov(u, u, 1, 1) == 0

    def test_tensor_swap(self):
        m1, m2 = hexagon(), CompactMeasure.uniform(0, 2)
        for k1, k2 in [(1, 2), (2, 3)]:
            a = float(tensor_cov(m1, m2, k1, k2))
            b = float(tensor_cov(m2, m1, k2, k1))
            assert abs(a - b) < 1e-10

    def test_tensor_staircase_trend(self):
        from schurclt.measures import tensor_measure
        from schurclt.symcore import Signature

        u = CompactMeasure.uniform(0, 2)
        lim = float(tensor_cov(u, u, 2, 2))
        gaps = []
        for N in (2, 3, 4):
            st = Signature(range(N - 1, -1, -1))
            ch = build_chain(ChainSpec(tensor_measure(st, st), []))
            gaps.append(abs(float(exact_covariance(ch, (0, 2), (0, 2))) / N**4 - lim))
        assert gaps[0] > gaps[1] > gaps[2]

    def test_schur_weyl(self):
        for c in (F(1, 2), F(1), F(2)):
            assert schur_weyl_cov(c, 1, 1) == 0
        N = 6
        ch = build_chain(ChainSpec(schur_weyl_measure(N, N * N), []))
        ex = exact_covariance(ch, (0, 1), (0, 2)) / N**3
        lim = schur_weyl_cov(1, 1, 2)
        assert abs(ex - lim) <= abs(lim) * F(1, 5)

    def test_schur_weyl_small_c(self):
        for k1, k2 in [(1, 1), (2, 2), (2, 3)]:
            assert schur_weyl_cov(F(1, 10**12), k1, k2) - clt_cov_one_level(0, 0, k1, k2) < F(1, 10**10)

    def test_restriction_uniform(self):
        u = CompactMeasure.uniform(0, 1)
        assert restriction_cov(u, F(1, 2), 2, 2) == 0

    def test_restriction_symmetry(self):
        m = hexagon()
        a = float(restriction_cov(m, F(1, 2), 1, 2))
        b = float(restriction_cov(m, F(1, 2), 2, 1))
        assert abs(a - b) < 1e-12

    def test_restriction_top_level(self):
        m = hexagon()
        for k1, k2 in [(1, 1), (2, 2)]:
            assert abs(float(restriction_cov(m, 1, k1, k2))) < 1e-12

    def test_aztec(self):
        assert aztec_cov(1, F(1, 2), F(1, 2), 1, 1) == F(1, 16)
        for k in (1, 2, 3):
            assert aztec_cov(1, 1, 1, k, k) == 0
        # swap symmetry with ordering respected
        a = aztec_cov(2, F(1, 2), F(1, 2), 1, 2)
        b = aztec_cov(2, F(1, 2), F(1, 2), 2, 1)
        assert a == b

    def test_aztec_two_routes(self):
        for q in (F(1), F(2)):
            for a1, a2 in [(F(1, 2), F(1, 2)), (F(1, 3), F(3, 4))]:
                for k1, k2 in [(1, 1), (1, 2), (2, 2)]:
                    v = aztec_cov(q, a1, a2, k1, k2)
                    w = clt_cov_combined(aztec_F(q, a1), aztec_F(q, a2), None, a1, a2, k1, k2)
                    assert abs(float(v) - float(w)) < 1e-12

    def test_aztec_against_exact(self):
        from schurclt.measures import aztec_chain, aztec_level

        for N in (2, 4, 6):
            ch = build_chain(aztec_chain(N, 1))
            lv = aztec_level(N, N // 2)
            ex = exact_covariance(ch, (lv, 1), (lv, 1)) / N**2
            assert ex == aztec_cov(1, F(1, 2), F(1, 2), 1, 1)


class TestMatrices:
    @pytest.mark.parametrize(
        "fn",
        [
            lambda a, b: schur_weyl_cov(F(1, 2), a, b),
            lambda a, b: aztec_cov(1, F(1, 2), F(1, 2), a, b),
            lambda a, b: restriction_cov(hexagon(), F(1, 2), a, b),
            lambda a, b: tensor_cov(CompactMeasure.uniform(0, 2), CompactMeasure.uniform(0, 2), a, b),
        ],
    )
    def test_psd_and_symmetric(self, fn):
        M = cov_matrix(fn)
        assert np.allclose(M, M.T, atol=1e-8)
        assert np.linalg.eigvalsh(M).min() > -1e-8

    def test_ordering_swap(self):
        # swap small/large circle together with (k1, k2) and the kernel arguments
        m = hexagon()
        Fh, G = h_prime(m, 12), character_kernel(m, 8)
        for k1, k2 in [(1, 2), (2, 3)]:
            a = clt_cov_one_level(Fh, G, k1, k2)
            b = clt_cov_one_level(Fh, G.transpose(), k2, k1)
            assert abs(float(a) - float(b)) < 1e-12


class TestDegeneration:
    def test_dirac_rate(self):
        # matrix side vanishes; tensor side is delta^4 / 36
        d = CompactMeasure.dirac(0)
        for n in (8, 16, 32):
            assert abs(matrix_degeneration_gap(d, d, 2, 2, F(1, n)) - 1 / (36 * n**4)) < 1e-18

    def test_dirac_shift(self):
        d = CompactMeasure.dirac(F(1, 2))
        gaps = [matrix_degeneration_gap(d, d, 2, 2, F(1, n)) for n in (8, 16, 32)]
        assert gaps[0] >= gaps[1] >= gaps[2] and gaps[2] < 1e-2

    def test_bernoulli_atoms(self):
        b = CompactMeasure.atomic([(F(0), F(1, 2)), (F(1), F(1, 2))])
        assert matrix_degeneration_gap(b, b, 2, 2, F(1, 32)) < matrix_degeneration_gap(b, b, 2, 2, F(1, 8))
