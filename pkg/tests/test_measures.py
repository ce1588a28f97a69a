from fractions import Fraction

import pytest

from schurclt.measures import (
    ChainSpec,
    SignatureMeasure,
    Step,
    StepFunction,
    aztec_chain,
    aztec_level,
    build_chain,
    delta_measure,
    multiplication_kernel,
    multiply_measure,
    project_measure,
    projection_kernel,
    schur_weyl_measure,
    step_kernel,
    tensor_measure,
    trapezoid_chain,
    walk_chain,
)
from schurclt.symcore import Signature, packed
from tests.test_symcore import small_signatures

F = Fraction
S = Signature


def test_delta_measure():
    assert delta_measure([0, 0]).as_dict() == {(0, 0): 1}
    assert delta_measure([3, 1]).as_dict() == {(3, 1): 1}
    assert delta_measure([3, 1]).mass == 1


def test_measure_validation():
    with pytest.raises(ValueError):
        SignatureMeasure(2, {S([1, 0]): F(1, 2)}, truncation_mass=0)
    with pytest.raises(ValueError):
        SignatureMeasure(2, {S([1]): 1})
    with pytest.raises(ValueError):
        SignatureMeasure(1, {S([1]): F(3, 2), S([0]): F(-1, 2)})


def test_json_roundtrip():
    rho = project_measure(delta_measure([2, 1, 0]), 2)
    assert SignatureMeasure.from_json(rho.to_json()) == rho
    g = multiply_measure(delta_measure([0]), StepFunction.geometric(F(1, 3)))
    back = SignatureMeasure.from_json(g.to_json())
    assert back == g and back.truncation_mass > 0


class TestProjection:
    def test_examples(self):
        assert project_measure(delta_measure([1, 0]), 1).as_dict() == {(1,): F(1, 2), (0,): F(1, 2)}
        assert project_measure(delta_measure([0, 0, 0]), 2).as_dict() == {(0, 0): 1}
        rho = tensor_measure([1, 0], [1, 0])
        assert project_measure(rho, 2) == rho

    def test_too_long(self):
        with pytest.raises(ValueError):
            project_measure(delta_measure([1, 0]), 3)

    def test_rows_stochastic(self):
        for lam in small_signatures(4, 4):
            for n in range(len(lam) + 1):
                row = projection_kernel(len(lam), n).row(lam)
                assert row.mass == 1 and row.is_exact()

    def test_coherence(self):
        for lam in small_signatures(4, 4):
            m = len(lam)
            for k in range(m + 1):
                for n in range(k + 1):
                    two = project_measure(project_measure(delta_measure(lam), k), n)
                    assert two == project_measure(delta_measure(lam), n)


class TestMultiplication:
    def test_bernoulli_one_particle(self):
        b = F(2, 7)
        out = multiply_measure(delta_measure([0]), StepFunction.bernoulli(b))
        assert out.as_dict() == {(1,): b, (0,): 1 - b}

    def test_explicit_identity(self):
        rho = delta_measure([0, 0])
        assert multiply_measure(rho, StepFunction.explicit(delta_measure([0, 0]))) == rho

    def test_geometric_one_particle(self):
        a = F(1, 3)
        out = multiply_measure(delta_measure([0]), StepFunction.geometric(a))
        assert 0 < out.truncation_mass <= F(1, 10**12)
        for (k,), w in out.as_dict().items():
            assert w == (1 - a) * a**k

    def test_poisson_truncation_recorded(self):
        out = multiply_measure(delta_measure([0, 0]), StepFunction.poisson(1, F(1, 2)))
        assert 0 < out.truncation_mass <= F(1, 10**12)

    def test_bernoulli_additive(self):
        b = F(1, 3)
        rho = delta_measure([1, 0, 0])
        one = multiply_measure(multiply_measure(rho, StepFunction.bernoulli(b, 1)), StepFunction.bernoulli(b, 2))
        assert one == multiply_measure(rho, StepFunction.bernoulli(b, 3))

    def test_rows_stochastic(self):
        for g in (StepFunction.bernoulli(F(1, 2)), StepFunction.single_box(3)):
            K = multiplication_kernel(3, g)
            for lam in [S([0, 0, 0]), S([2, 1, 0]), S([1, 1, -1])]:
                assert K.row(lam).mass == 1

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            StepFunction.bernoulli(F(3, 2))
        with pytest.raises(ValueError):
            StepFunction.geometric(1)


class TestTensorAndSchurWeyl:
    def test_tensor_examples(self):
        assert tensor_measure([3], [4]).as_dict() == {(7,): 1}
        assert tensor_measure([1, 0], [1, 0]).as_dict() == {(2, 0): F(3, 4), (1, 1): F(1, 4)}

    def test_tensor_symmetric(self):
        a, b = S([2, 1, 0]), S([1, 0, 0])
        assert tensor_measure(a, b) == tensor_measure(b, a)
        assert tensor_measure(a, b).mass == 1

    def test_schur_weyl_examples(self):
        assert schur_weyl_measure(2, 1).as_dict() == {(1, 0): 1}
        assert schur_weyl_measure(2, 2).as_dict() == {(2, 0): F(3, 4), (1, 1): F(1, 4)}
        assert schur_weyl_measure(1, 5).as_dict() == {(5,): 1}

    def test_schur_weyl_is_iterated_single_box(self):
        N, n = 3, 4
        rho = delta_measure(packed(N))
        for _ in range(n):
            rho = multiply_measure(rho, StepFunction.single_box(N))
        assert rho == schur_weyl_measure(N, n)


class TestChains:
    def test_single_level(self):
        rho = tensor_measure([1, 0], [1, 0])
        ch = build_chain(ChainSpec(rho, []))
        assert ch.levels == [rho]

    def test_projection_chain(self):
        ch = build_chain(trapezoid_chain([1, 0], [1]))
        assert ch.levels[1].as_dict() == {(1,): F(1, 2), (0,): F(1, 2)}

    def test_marginal_consistency(self):
        ch = build_chain(aztec_chain(3, 2))
        for i, K in enumerate(ch.kernels):
            assert K.push(ch.levels[i]) == ch.levels[i + 1]

    def test_combined_is_composition(self):
        g = StepFunction.bernoulli(F(1, 3))
        comb = step_kernel(3, Step.combined(2, g))
        seq = projection_kernel(3, 2).then(multiplication_kernel(2, g))
        for lam in [S([2, 1, 0]), S([1, 1, 0]), S([3, 0, 0])]:
            assert comb.row(lam) == seq.row(lam)

    def test_inconsistent_lengths(self):
        with pytest.raises(ValueError):
            build_chain(ChainSpec(delta_measure([1, 0]), [Step.projection(3)]))

    def test_aztec_small(self):
        ch = build_chain(aztec_chain(1, 1))
        assert ch.levels[1].as_dict() == {(1,): F(1, 2), (0,): F(1, 2)}
        q = F(3, 5)
        ch = build_chain(aztec_chain(1, q))
        assert ch.levels[1].as_dict() == {(1,): q / (1 + q), (0,): 1 / (1 + q)}
        ch = build_chain(aztec_chain(4, 1))
        assert all(m.mass == 1 for m in ch.levels)
        assert aztec_level(4, 4) == 0 and aztec_level(4, 1, after_kappa=True) == 7

    def test_joint_law(self):
        ch = build_chain(aztec_chain(2, 1))
        law = ch.joint_law()
        assert sum(law.values()) == 1
        # 2^{N(N+1)/2} = 8 tilings, each weight 1/8
        assert len(law) == 8 and set(law.values()) == {F(1, 8)}

    def test_walk_chain(self):
        ch = build_chain(walk_chain([0], StepFunction.bernoulli(F(1, 2)), 3))
        assert ch.levels[3].as_dict() == {(k,): F([1, 3, 3, 1][k], 8) for k in range(4)}
