"""Domain-type validation and invariants."""

import numpy as np
import pytest

from seqot import (
    CostKind,
    CostMatrix,
    DiscreteDistribution,
    SolverConfig,
    SolverReport,
    SolverStatus,
    TransportPlan,
    uniform_weights,
    validate_distribution,
)


class TestValidateDistribution:
    def test_singleton(self):
        dist = validate_distribution([(1.0, 0.0)], [1.0])
        assert dist.size == 1 and dist.dimension == 2
        np.testing.assert_allclose(dist.weights, [1.0])

    def test_uniform_pair(self):
        dist = validate_distribution([(1, 0), (0, 1)], [0.5, 0.5])
        np.testing.assert_allclose(dist.weights.sum(), 1.0, atol=1e-12)

    def test_weight_sum_violation(self):
        with pytest.raises(ValueError, match="sum to 1"):
            validate_distribution([(1, 0)], [0.5])

    def test_renormalizes_within_band(self):
        dist = validate_distribution([(1, 0), (0, 1)], [0.5 + 4e-7, 0.5])
        assert abs(dist.weights.sum() - 1.0) <= 1e-9

    def test_negative_weight(self):
        with pytest.raises(ValueError, match="negative"):
            validate_distribution([(1, 0), (0, 1)], [1.5, -0.5])

    def test_empty_support(self):
        with pytest.raises(ValueError):
            validate_distribution(np.empty((0, 2)), [])

    def test_count_mismatch(self):
        with pytest.raises(ValueError, match="point count"):
            validate_distribution([(1, 0), (0, 1), (1, 1)], [0.5, 0.5])

    def test_non_finite_point(self):
        with pytest.raises(ValueError, match="non-finite"):
            validate_distribution([(np.nan, 0.0)], [1.0])

    def test_roundtrip(self, rng):
        """Every constructed distribution passes its own validation again."""
        for _ in range(20):
            n = rng.integers(1, 9)
            pts = rng.normal(size=(n, 3))
            w = rng.uniform(0.1, 1.0, size=n)
            dist = validate_distribution(pts, w / w.sum())
            again = validate_distribution(dist.points, dist.weights)
            np.testing.assert_allclose(again.weights, dist.weights, rtol=1e-12)

    def test_immutability(self):
        dist = validate_distribution([(1, 0), (0, 1)], [0.5, 0.5])
        with pytest.raises(ValueError):
            dist.points[0, 0] = 99.0


class TestUniformWeights:
    def test_single(self):
        np.testing.assert_array_equal(uniform_weights(1), [1.0])

    def test_four(self):
        np.testing.assert_array_equal(uniform_weights(4), [0.25] * 4)

    def test_three_sums_to_one(self):
        assert abs(uniform_weights(3).sum() - 1.0) <= 1e-12

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            uniform_weights(0)


class TestCostMatrix:
    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            CostMatrix(values=[[-0.1]], cost_kind=CostKind.EUCLIDEAN)

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="non-finite"):
            CostMatrix(values=[[np.nan]], cost_kind=CostKind.EUCLIDEAN)

    def test_cosine_range(self):
        with pytest.raises(ValueError, match="cosine"):
            CostMatrix(values=[[2.5]], cost_kind=CostKind.COSINE)
        # 2.5 is fine for other kinds
        CostMatrix(values=[[2.5]], cost_kind=CostKind.SQUARED_EUCLIDEAN)


class TestTransportPlan:
    def test_marginal_feasibility_is_enforced(self):
        with pytest.raises(ValueError, match="infeasible"):
            TransportPlan(
                matrix=[[1.0, 0.0], [0.0, 0.0]],
                row_marginal=[0.5, 0.5],
                col_marginal=[0.5, 0.5],
            )

    def test_tiny_negative_clamped(self):
        plan = TransportPlan(
            matrix=[[0.5, -1e-13], [0.0, 0.5]],
            row_marginal=[0.5, 0.5],
            col_marginal=[0.5, 0.5],
        )
        assert plan.matrix[0, 1] == 0.0

    def test_large_negative_rejected(self):
        with pytest.raises(ValueError, match="below"):
            TransportPlan(
                matrix=[[0.5, -1e-6], [0.0, 0.5]],
                row_marginal=[0.5, 0.5],
                col_marginal=[0.5, 0.5],
            )


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.beta == 0.5
        assert cfg.inner_k == 1
        assert cfg.outer_iters == 2000

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"beta": 0.0},
            {"beta": -1.0},
            {"epsilon": 0.0},
            {"tolerance": 0.0},
            {"outer_iters": 0},
            {"inner_k": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestSolverReport:
    def test_failure_withholds_values(self):
        report = SolverReport(
            status=SolverStatus.NUMERICAL_FAILURE,
            distance=None,
            plan=None,
            iterations_used=3,
            converged=False,
            marginal_residual=float("inf"),
        )
        assert report.failed
        with pytest.raises(ValueError, match="withhold"):
            SolverReport(
                status=SolverStatus.NUMERICAL_FAILURE,
                distance=1.0,
                plan=None,
                iterations_used=3,
                converged=False,
                marginal_residual=float("inf"),
            )

    def test_ok_requires_values(self):
        with pytest.raises(ValueError, match="requires"):
            SolverReport(
                status=SolverStatus.OK,
                distance=None,
                plan=None,
                iterations_used=3,
                converged=True,
                marginal_residual=0.0,
            )
