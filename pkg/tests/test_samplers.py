from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from schurclt.measures import StepFunction, aztec_chain, build_chain, trapezoid_chain, walk_chain
from schurclt.moments import exact_mean, power_sum
from schurclt.samplers import (
    DominoConfiguration,
    InterlacingArray,
    aztec_to_signatures,
    estimate_covariance,
    height_function,
    height_moment,
    replica_rngs,
    run_replicas,
    sample_aztec,
    sample_trapezoid_path,
    sample_walks,
    walk_sampler,
)
from schurclt.symcore import BudgetError, Signature

F = Fraction


def frequency_ok(count, R, p):
    se = np.sqrt(p * (1 - p) / R)
    return abs(count / R - p) <= 3 * se


class TestTrapezoid:
    def test_packed_unique(self):
        arr = sample_trapezoid_path([0, 0, 0], seed=1)
        assert all(arr[n] == Signature([0] * n) for n in (1, 2, 3))

    def test_two_patterns(self):
        R = 10**4
        hits = sum(sample_trapezoid_path([1, 0], rng=g)[1] == Signature([1]) for g in replica_rngs(5, R))
        assert frequency_ok(hits, R, 0.5)

    def test_interlacing(self):
        for g in replica_rngs(2, 50):
            assert sample_trapezoid_path([3, 3, 1, 0, 0], rng=g).check()

    def test_hexagon_mean(self):
        M = 3
        lam = [M] * M + [0] * M
        ch = build_chain(trapezoid_chain(lam, [M]))
        exact = float(exact_mean(ch, 1, 1))
        vals = np.array([power_sum(sample_trapezoid_path(lam, rng=g)[M], 1) for g in replica_rngs(11, 4000)])
        assert abs(vals.mean() - exact) <= 3 * vals.std(ddof=1) / np.sqrt(len(vals))

    def test_determinism(self):
        a = sample_trapezoid_path([4, 2, 1, 0], seed=9)
        b = sample_trapezoid_path([4, 2, 1, 0], seed=9)
        assert a.levels == b.levels

    def test_json_roundtrip(self):
        a = sample_trapezoid_path([2, 1, 0], seed=3)
        assert InterlacingArray.from_json(a.to_json()).levels == a.levels


class TestAztec:
    def test_tiles(self):
        for N in (1, 2, 5, 12):
            for g in replica_rngs(N, 5):
                d = sample_aztec(N, 1, rng=g)
                assert d.is_tiling()
                s = aztec_to_signatures(d)
                assert all(len(s.before[t]) == t and len(s.after[t]) == t for t in range(1, N + 1))
                for t in range(1, N + 1):
                    step = np.subtract(s.after[t], s.before[t])
                    assert set(step) <= {0, 1}
                    if t > 1:
                        assert s.before[t - 1].interlaces(s.after[t])

    def test_n1_examples(self):
        seen = {}
        for g in replica_rngs(0, 40):
            d = sample_aztec(1, 1, rng=g)
            seen[d.horizontal_count()] = aztec_to_signatures(d).after[1]
        assert seen == {0: Signature([0]), 2: Signature([1])}

    def test_n1_frequency(self):
        R = 10**4
        h = sum(sample_aztec(1, 1, rng=g).horizontal_count() == 2 for g in replica_rngs(1, R))
        assert frequency_ok(h, R, 0.5)

    def test_n2_uniform(self):
        R = 8000
        c = Counter(sample_aztec(2, 1, rng=g).key() for g in replica_rngs(4, R))
        assert len(c) == 8
        assert stats.chisquare(list(c.values())).pvalue > 1e-3

    def test_q_bias(self):
        # weight q per horizontal pair: P(all horizontal) = q / (1 + q) at N = 1
        q, R = 3, 4000
        h = sum(sample_aztec(1, q, rng=g).horizontal_count() == 2 for g in replica_rngs(2, R))
        assert frequency_ok(h, R, 0.75)

    def test_slices_match_chain_law(self):
        law = build_chain(aztec_chain(2, 1)).joint_law()
        paths = {aztec_to_signatures(sample_aztec(2, 1, rng=g)).path() for g in replica_rngs(6, 400)}
        assert paths == set(law)

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_aztec(0)
        with pytest.raises(ValueError):
            sample_aztec(2, -1)

    def test_malformed(self):
        d = sample_aztec(2, 1, seed=0)
        bad = DominoConfiguration(2, np.zeros_like(d.H), d.V.copy())
        with pytest.raises(ValueError):
            aztec_to_signatures(bad)


class TestWalks:
    def test_binomial(self):
        beta, t, R = 0.3, 5, 10**4
        s = walk_sampler(1, StepFunction.bernoulli(F(3, 10)))
        xs = Counter(sample_walks([0], None, [t], rng=g, sampler=s)[t][0] for g in replica_rngs(3, R))
        exp = stats.binom(t, beta).pmf(np.arange(t + 1)) * R
        obs = [xs.get(k, 0) for k in range(t + 1)]
        assert stats.chisquare(obs, exp).pvalue > 1e-3

    def test_frozen(self):
        a = sample_walks([2, 1, 0], StepFunction.bernoulli(0), [1, 2, 3], seed=1)
        assert all(a[t] == Signature([2, 1, 0]) for t in (1, 2, 3))

    def test_mean_p2(self):
        step = StepFunction.bernoulli(F(1, 2))
        ch = build_chain(walk_chain([1, 0], step, 3))
        exact = float(exact_mean(ch, 3, 2))
        s = walk_sampler(2, step)
        vals = np.array([power_sum(sample_walks([1, 0], step, [3], rng=g, sampler=s)[3], 2) for g in replica_rngs(8, 4000)])
        assert abs(vals.mean() - exact) <= 3 * vals.std(ddof=1) / np.sqrt(len(vals))

    def test_budget(self):
        with pytest.raises(BudgetError):
            sample_walks([0] * 7, StepFunction.bernoulli(F(1, 2)), [1], seed=0)


class TestHeights:
    def test_packed(self):
        N = 5
        arr = sample_trapezoid_path([0] * N, seed=0)
        assert height_function(arr, 0, 1) == N and height_function(arr, -1, 1) == N
        assert height_function(arr, F(N, N) - F(1, 2 * N), 1) == 0
        assert height_moment(arr, 1, 0) == F(N - 1, 2)

    def test_monotone(self):
        arr = sample_trapezoid_path([4, 4, 2, 0, 0, 0], seed=2)
        hs = [height_function(arr, F(j, 12), F(1, 2)) for j in range(-2, 24)]
        assert all(a >= b for a, b in zip(hs, hs[1:]))

    def test_identity_on_samples(self):
        N = 6
        for g in replica_rngs(7, 20):
            arr = sample_trapezoid_path([3, 3, 3, 0, 0, 0], rng=g)
            for eta in (F(1, 2), F(5, 6), 1):
                n = int(eta * N)
                for k in range(4):
                    assert (k + 1) * N ** (k + 1) * height_moment(arr, eta, k) == power_sum(arr[n], k + 1)

    def test_missing_level(self):
        arr = sample_walks([1, 0], StepFunction.bernoulli(F(1, 2)), [2], seed=0)
        with pytest.raises(KeyError):
            height_function(arr, 0, F(1, 2))


class TestStatistics:
    def test_run_replicas_threads(self):
        f = lambda g: g.random()
        assert run_replicas(f, 30, 4) == run_replicas(f, 30, 4, threads=3)

    def test_deterministic_column(self):
        rng = np.random.default_rng(0)
        x = np.column_stack([np.full(200, 7.25), rng.normal(size=200)])
        cov, se = estimate_covariance(x)
        assert cov[0, 0] == 0 and cov[0, 1] == 0 and se[0, 0] == 0 and se[0, 1] == 0

    def test_copies(self):
        y = np.random.default_rng(1).normal(size=300)
        cov, se = estimate_covariance(np.column_stack([y, y]))
        assert cov[0, 0] == cov[1, 1] == cov[0, 1]
        assert se[0, 0] == se[1, 1]

    def test_unbiased(self):
        x = np.random.default_rng(2).normal(size=(150, 3))
        cov, _ = estimate_covariance(x)
        assert np.allclose(cov, np.cov(x, rowvar=False))

    def test_jackknife_scale(self):
        # SE of a variance estimate for N(0,1) is about sqrt(2/R)
        x = np.random.default_rng(3).normal(size=(4000, 1))
        _, se = estimate_covariance(x)
        assert abs(se[0, 0] - np.sqrt(2 / 4000)) < 0.004

    def test_min_replicas(self):
        with pytest.raises(ValueError):
            estimate_covariance(np.zeros((50, 2)))
