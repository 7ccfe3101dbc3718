import numpy as np
import pytest

from swapregret import (
    ConfigurationError,
    DeviationWeights,
    MixedStrategy,
    apply_mixture,
    build_restricted_residual,
    extract_support,
    fixed_point,
    mixture_matrix,
    power_iteration_oracle,
    residual_l1,
    solve_l1,
)
from swapregret.verify import random_deviation_weights


class TestExtractSupport:
    def test_direct_definition(self):
        alpha = DeviationWeights(6, {(1, 2): 0.5, (3, 4): 0.5})
        np.testing.assert_array_equal(extract_support(alpha), [1, 2, 3, 4])

    def test_diagonal_pairs_contribute_nothing(self):
        alpha = DeviationWeights(6, {(0, 0): 0.3, (5, 5): 0.7})
        assert extract_support(alpha).size == 0

    def test_support_bound_twice_sparsity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(1, 21))
            alpha = random_deviation_weights(100, k, rng)
            assert extract_support(alpha).size <= 2 * k


class TestRestrictedResidual:
    def test_point_mass_rows(self):
        alpha = DeviationWeights.point_mass(0, 1, 4)
        program = build_restricted_residual(alpha)
        np.testing.assert_array_equal(program.support, [0, 1])
        np.testing.assert_allclose(program.residual, [[-1.0, 0.0], [1.0, 0.0]])

    def test_diagonal_gives_empty_program(self):
        alpha = DeviationWeights(4, {(2, 2): 1.0})
        program = build_restricted_residual(alpha)
        assert program.support.size == 0
        assert program.residual.shape == (0, 0)

    def test_matches_dense_restriction(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            alpha = random_deviation_weights(100, 10, rng)
            program = build_restricted_residual(alpha)
            dense = mixture_matrix(alpha) - np.eye(100)
            restriction = dense[np.ix_(program.support, program.support)]
            np.testing.assert_allclose(program.residual, restriction, atol=1e-12)

    def test_off_support_rows_and_columns_vanish(self):
        rng = np.random.default_rng(2)
        alpha = random_deviation_weights(30, 4, rng)
        support = extract_support(alpha)
        dense = mixture_matrix(alpha) - np.eye(30)
        mask = np.ones(30, dtype=bool)
        mask[support] = False
        assert np.abs(dense[mask]).max() == 0.0
        assert np.abs(dense[:, mask]).max() == 0.0


class TestSolveL1:
    def test_point_mass_program_reaches_zero(self):
        alpha = DeviationWeights.point_mass(0, 1, 4)
        program = build_restricted_residual(alpha)
        x_hat, objective = solve_l1(program)
        assert objective == pytest.approx(0.0, abs=1e-12)
        assert x_hat[0] == pytest.approx(0.0, abs=1e-12)

    def test_empty_program(self):
        alpha = DeviationWeights(4, {(1, 1): 1.0})
        x_hat, objective = solve_l1(build_restricted_residual(alpha))
        assert x_hat.size == 0
        assert objective == 0.0

    def test_full_support_balances_the_swap(self):
        # Both directions weighted equally over a two-action game: the block
        # is doubly stochastic and the equal-mass point is stationary.
        alpha = DeviationWeights(2, {(0, 1): 0.5, (1, 0): 0.5})
        program = build_restricted_residual(alpha)
        assert program.require_full_mass
        x_hat, objective = solve_l1(program)
        assert objective == pytest.approx(0.0, abs=1e-12)
        assert x_hat.sum() == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(x_hat, [0.5, 0.5], atol=1e-9)

    def test_asymmetric_full_support_stationary_distribution(self):
        alpha = DeviationWeights(2, {(0, 1): 0.8, (1, 0): 0.2})
        x_hat, objective = solve_l1(build_restricted_residual(alpha))
        assert objective == pytest.approx(0.0, abs=1e-10)
        # Stationary distribution of the induced chain: (0.2, 0.8).
        np.testing.assert_allclose(x_hat, [0.2, 0.8], atol=1e-9)


class TestFixedPoint:
    def test_diagonal_only_returns_uniform(self):
        alpha = DeviationWeights(8, {(3, 3): 1.0})
        x = fixed_point(alpha, 1e-6)
        np.testing.assert_allclose(x.to_dense(), np.full(8, 1 / 8))

    def test_point_mass_swap_zeroes_the_source(self):
        alpha = DeviationWeights.point_mass(0, 1, 4)
        x = fixed_point(alpha, 1e-6)
        assert x.coordinate(0) == pytest.approx(0.0, abs=1e-12)
        assert residual_l1(alpha, x) == pytest.approx(0.0, abs=1e-12)

    def test_residual_meets_epsilon_on_random_instances(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(5, 200))
            k = int(rng.integers(1, 21))
            alpha = random_deviation_weights(n, k, rng)
            x = fixed_point(alpha, 1e-6)
            assert residual_l1(alpha, x) <= 1e-6

    def test_large_generated_scale(self):
        rng = np.random.default_rng(4)
        alpha = random_deviation_weights(10_000, 20, rng)
        x = fixed_point(alpha, 1e-6)
        assert residual_l1(alpha, x) <= 1e-6
        assert x.support_size <= 40
        # Coordinate queries stay cheap: off-support reads hit the tail.
        assert x.coordinate(9_999) == x.tail_value or 9_999 in x.support

    def test_full_residual_equals_restricted_objective(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(10, 201))
            alpha = random_deviation_weights(n, 8, rng)
            x = fixed_point(alpha, 1e-6)
            program = build_restricted_residual(alpha)
            x_support = np.array([x.coordinate(int(i)) for i in program.support])
            restricted = float(np.abs(program.residual @ x_support).sum())
            dense = float(np.abs(apply_mixture(alpha, x) - x.to_dense()).sum())
            assert dense == pytest.approx(restricted, abs=1e-12)

    def test_output_is_valid_strategy(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            alpha = random_deviation_weights(50, 10, rng)
            x = fixed_point(alpha, 1e-6)
            dense = x.to_dense()
            assert np.all(dense >= 0)
            assert dense.sum() == pytest.approx(1.0, abs=1e-9)

    def test_degenerate_full_support_has_unit_mass_on_support(self):
        alpha = DeviationWeights(3, {(0, 1): 0.4, (1, 2): 0.3, (2, 0): 0.3})
        assert extract_support(alpha).size == 3
        x = fixed_point(alpha, 1e-9)
        assert x.tail_value == 0.0
        assert sum(x.support.values()) == pytest.approx(1.0, abs=1e-9)
        assert residual_l1(alpha, x) <= 1e-9

    def test_invalid_epsilon(self):
        with pytest.raises(ConfigurationError):
            fixed_point(DeviationWeights.point_mass(0, 1, 3), 0.0)


class TestPowerIterationOracle:
    def test_balanced_swap_converges_to_equal_mass(self):
        alpha = DeviationWeights(4, {(0, 1): 0.5, (1, 0): 0.5})
        support, x, residual = power_iteration_oracle(alpha, 200)
        np.testing.assert_array_equal(support, [0, 1])
        assert residual < 1e-10
        np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-8)

    def test_absorbing_swap_drains_the_source(self):
        alpha = DeviationWeights.point_mass(0, 1, 4)
        _, x, residual = power_iteration_oracle(alpha, 200)
        assert residual < 1e-12
        np.testing.assert_allclose(x, [0.0, 1.0], atol=1e-12)

    def test_lp_never_beaten_by_more_than_epsilon(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(5, 80))
            alpha = random_deviation_weights(n, int(rng.integers(1, 10)), rng)
            x = fixed_point(alpha, 1e-6)
            _, _, oracle_residual = power_iteration_oracle(alpha, 2000)
            assert residual_l1(alpha, x) <= oracle_residual + 1e-6

    def test_empty_support(self):
        alpha = DeviationWeights(4, {(0, 0): 1.0})
        support, x, residual = power_iteration_oracle(alpha, 10)
        assert support.size == 0
        assert residual == 0.0
