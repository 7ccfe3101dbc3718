import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapregret import (
    ConfigurationError,
    DeviationWeights,
    MixedStrategy,
    apply_mixture,
    apply_mixture_sparse,
    apply_pair,
    evaluate_loss,
    loss_gradient,
    mixture_matrix,
    residual_l1,
)
from swapregret.deviations import CumulativeDeviationGradient
from swapregret.verify import random_deviation_weights


def _random_strategy(n, rng):
    return MixedStrategy.from_dense(rng.dirichlet(np.ones(n)))


class TestDeviationWeights:
    def test_simplex_validation(self):
        with pytest.raises(ConfigurationError):
            DeviationWeights(3, {(0, 1): 0.5})
        with pytest.raises(ConfigurationError):
            DeviationWeights(3, {(0, 1): 0.5, (1, 2): 0.5, (2, 0): 0.5})
        with pytest.raises(ConfigurationError):
            DeviationWeights(3, {(0, 3): 1.0})
        with pytest.raises(ConfigurationError):
            DeviationWeights(3, {(0, 1): 1.5, (1, 2): -0.5})

    def test_sparsity(self):
        alpha = DeviationWeights(4, {(0, 1): 0.25, (2, 3): 0.75})
        assert alpha.sparsity == 2


class TestApplyPair:
    def test_moves_full_point_mass(self):
        x = MixedStrategy.point_mass(0, 3)
        y = apply_pair(0, 1, x)
        np.testing.assert_allclose(y.to_dense(), [0.0, 1.0, 0.0])

    def test_uniform_case_analysis(self):
        x = MixedStrategy.uniform(4)
        y = apply_pair(1, 2, x)
        np.testing.assert_allclose(y.to_dense(), [0.25, 0.0, 0.5, 0.25])

    def test_diagonal_is_identity(self):
        rng = np.random.default_rng(0)
        x = _random_strategy(5, rng)
        y = apply_pair(3, 3, x)
        np.testing.assert_array_equal(y.to_dense(), x.to_dense())

    def test_preserves_tail_representation(self):
        x = MixedStrategy(100, {4: 0.5}, tail_value=0.5 / 99)
        y = apply_pair(4, 11, x)
        assert y.tail_value == x.tail_value
        assert y.coordinate(4) == 0.0
        assert y.coordinate(11) == pytest.approx(0.5 + 0.5 / 99)
        assert y.support_size <= x.support_size + 2

    def test_out_of_range(self):
        with pytest.raises(ConfigurationError):
            apply_pair(0, 5, MixedStrategy.uniform(3))


class TestApplyMixture:
    def test_singleton_mixture_equals_apply_pair(self):
        rng = np.random.default_rng(1)
        x = _random_strategy(4, rng)
        alpha = DeviationWeights.point_mass(1, 2, 4)
        np.testing.assert_allclose(
            apply_mixture(alpha, x), apply_pair(1, 2, x).to_dense(), atol=1e-15
        )

    def test_two_pair_hand_example(self):
        # Half weight on each direction of the swap between the two actions.
        alpha = DeviationWeights(2, {(0, 1): 0.5, (1, 0): 0.5})
        x = MixedStrategy.from_dense([0.4, 0.6])
        result = apply_mixture(alpha, x)
        np.testing.assert_allclose(result, [0.5, 0.5], atol=1e-12)
        # Cross-check against the explicit 2x2 matrices of both swaps.
        dense = 0.5 * np.array([[0.0, 0.0], [1.0, 1.0]]) + 0.5 * np.array(
            [[1.0, 1.0], [0.0, 0.0]]
        )
        np.testing.assert_allclose(result, dense @ x.to_dense(), atol=1e-12)

    def test_uniform_mixture_matches_dense_matrix(self):
        n = 2
        weights = {(i, k): 0.25 for i in range(n) for k in range(n)}
        alpha = DeviationWeights(n, weights)
        rng = np.random.default_rng(3)
        x = _random_strategy(n, rng)
        np.testing.assert_allclose(
            apply_mixture(alpha, x), mixture_matrix(alpha) @ x.to_dense(), atol=1e-12
        )

    @given(st.integers(0, 5000))
    @settings(max_examples=100, deadline=None)
    def test_output_stays_on_the_simplex(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        k = int(rng.integers(1, min(20, n * (n - 1)) + 1))
        alpha = random_deviation_weights(n, k, rng)
        x = _random_strategy(n, rng)
        out = apply_mixture(alpha, x)
        assert np.all(out >= -1e-12)
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    def test_matches_matrix_application_on_random_instances(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = int(rng.integers(2, 101))
            k = int(rng.integers(1, 21))
            alpha = random_deviation_weights(n, min(k, n * (n - 1)), rng)
            x = _random_strategy(n, rng)
            np.testing.assert_allclose(
                apply_mixture(alpha, x), mixture_matrix(alpha) @ x.to_dense(), atol=1e-12
            )

    def test_sparse_variant_agrees_and_keeps_tail(self):
        rng = np.random.default_rng(4)
        alpha = random_deviation_weights(200, 5, rng)
        x = MixedStrategy(200, {0: 0.3}, tail_value=0.7 / 199)
        sparse = apply_mixture_sparse(alpha, x)
        np.testing.assert_allclose(sparse.to_dense(), apply_mixture(alpha, x), atol=1e-14)
        assert sparse.tail_value == x.tail_value

    def test_residual_l1_matches_dense_difference(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            alpha = random_deviation_weights(50, 8, rng)
            x = _random_strategy(50, rng)
            dense = np.abs(apply_mixture(alpha, x) - x.to_dense()).sum()
            assert residual_l1(alpha, x) == pytest.approx(dense, abs=1e-12)


class TestMixtureMatrix:
    def test_point_mass_matrix(self):
        alpha = DeviationWeights.point_mass(0, 1, 2)
        np.testing.assert_allclose(mixture_matrix(alpha), [[0.0, 0.0], [1.0, 1.0]])

    def test_diagonal_mass_is_identity(self):
        alpha = DeviationWeights(3, {(0, 0): 0.4, (2, 2): 0.6})
        np.testing.assert_allclose(mixture_matrix(alpha), np.eye(3))

    def test_columns_sum_to_one(self):
        rng = np.random.default_rng(8)
        alpha = random_deviation_weights(50, 12, rng)
        mat = mixture_matrix(alpha)
        np.testing.assert_allclose(mat.sum(axis=0), np.ones(50), atol=1e-12)

    def test_rows_off_support_are_identity_rows(self):
        alpha = DeviationWeights(6, {(1, 3): 0.5, (3, 1): 0.5})
        mat = mixture_matrix(alpha)
        for i in (0, 2, 4, 5):
            np.testing.assert_array_equal(mat[i], np.eye(6)[i])


class TestLossGradient:
    def test_constant_payoffs_kill_all_pair_terms(self):
        x = MixedStrategy.from_dense([0.2, 0.3, 0.5])
        grad = loss_gradient(x, np.full(3, 0.7))
        for i in range(3):
            for k in range(3):
                assert grad.pair_term(i, k) == pytest.approx(0.0)

    def test_single_round_hand_example(self):
        x = MixedStrategy.point_mass(0, 2)
        grad = loss_gradient(x, np.array([0.0, 1.0]))
        assert grad.pair_term(0, 1) == pytest.approx(1.0)
        assert grad.pair_term(1, 0) == pytest.approx(0.0)

    def test_entries_bounded_by_one(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            x = _random_strategy(n, rng)
            grad = loss_gradient(x, rng.random(n))
            assert np.abs(grad.dense()).max() <= 1.0 + 1e-12

    def test_gradient_reconstructs_deviated_payoff(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(2, 10))
            x = _random_strategy(n, rng)
            r = rng.random(n)
            alpha = random_deviation_weights(n, min(4, n * (n - 1)), rng)
            via_gradient = evaluate_loss(alpha, x, r)
            direct = float(apply_mixture(alpha, x) @ r)
            assert via_gradient == pytest.approx(direct, abs=1e-12)

    def test_rejects_out_of_range_payoffs(self):
        x = MixedStrategy.uniform(2)
        with pytest.raises(ConfigurationError):
            loss_gradient(x, np.array([0.5, 1.5]))


class TestEvaluateLoss:
    def test_identity_mixture_returns_realized_payoff(self):
        rng = np.random.default_rng(13)
        x = _random_strategy(4, rng)
        r = rng.random(4)
        alpha = DeviationWeights(4, {(i, i): 0.25 for i in range(4)})
        assert evaluate_loss(alpha, x, r) == pytest.approx(float(x.to_dense() @ r))

    def test_point_mass_mixture_matches_single_swap(self):
        rng = np.random.default_rng(14)
        x = _random_strategy(5, rng)
        r = rng.random(5)
        alpha = DeviationWeights.point_mass(2, 4, 5)
        assert evaluate_loss(alpha, x, r) == pytest.approx(
            float(apply_pair(2, 4, x).to_dense() @ r)
        )

    def test_linearity_in_the_weights(self):
        rng = np.random.default_rng(15)
        n = 5
        x = _random_strategy(n, rng)
        r = rng.random(n)
        alpha = random_deviation_weights(n, 4, rng)
        beta = random_deviation_weights(n, 4, rng)
        lam = 0.3
        blended = {}
        for (i, k), w in alpha.pairs():
            blended[(i, k)] = blended.get((i, k), 0.0) + lam * w
        for (i, k), w in beta.pairs():
            blended[(i, k)] = blended.get((i, k), 0.0) + (1 - lam) * w
        mix = DeviationWeights(n, blended)
        expected = lam * evaluate_loss(alpha, x, r) + (1 - lam) * evaluate_loss(beta, x, r)
        assert evaluate_loss(mix, x, r) == pytest.approx(expected, abs=1e-12)

    def test_value_in_unit_interval(self):
        rng = np.random.default_rng(16)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            x = _random_strategy(n, rng)
            r = rng.random(n)
            alpha = random_deviation_weights(n, min(3, n * (n - 1)), rng)
            value = evaluate_loss(alpha, x, r)
            assert -1e-12 <= value <= 1.0 + 1e-12


class TestCumulativeGradient:
    def test_factored_totals_match_bruteforce(self):
        rng = np.random.default_rng(17)
        n = 7
        acc = CumulativeDeviationGradient(n)
        brute = np.zeros((n, n))
        base = 0.0
        for _ in range(25):
            # Mix of sparse tail strategies and dense strategies.
            if rng.random() < 0.5:
                x = MixedStrategy(n, {int(rng.integers(n)): 0.4}, tail_value=0.6 / (n - 1))
            else:
                x = _random_strategy(n, rng)
            r = rng.random(n)
            grad = loss_gradient(x, r)
            acc.add(grad)
            xd = x.to_dense()
            brute += np.outer(xd, r) - np.outer(xd * r, np.ones(n))
            base += float(xd @ r)
        np.testing.assert_allclose(acc.pair_totals(), brute, atol=1e-12)
        assert acc.base_total == pytest.approx(base, abs=1e-12)
        assert acc.max_pair_total() == pytest.approx(brute.max(), abs=1e-12)
        for i in range(n):
            for k in range(n):
                assert acc.pair_total(i, k) == pytest.approx(brute[i, k], abs=1e-12)
                assert acc.entry(i, k) == pytest.approx(base + brute[i, k], abs=1e-12)

    def test_entries_grow_at_most_one_per_round(self):
        rng = np.random.default_rng(18)
        n = 5
        acc = CumulativeDeviationGradient(n)
        for t in range(1, 30):
            x = _random_strategy(n, rng)
            acc.add(loss_gradient(x, rng.random(n)))
            assert np.abs(acc.vertex_totals()).max() <= t + 1e-9
