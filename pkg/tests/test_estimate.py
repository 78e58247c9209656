import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from m4extremes import (
    ArgumentError,
    CapacityError,
    EstimationError,
    FieldSample,
    LatticePoint,
    Region,
    UniformScores,
    estimate_contagion,
    estimate_contagion_region,
    estimate_extremal_coefficient,
    estimate_stability,
    monte_carlo_study,
    neighbors,
    rank_transform,
    scores_from_matrix,
    simulate_m4,
    substream,
)
from conftest import STUDY_SEED

P = LatticePoint
A2 = Region([P(0, 0), P(1, 0)])
A3 = Region([P(0, 0), P(1, 0), P(2, 0)])


def sample_of(columns) -> FieldSample:
    values = np.array(columns, dtype=float).T
    points = tuple(P(i, 0) for i in range(values.shape[1]))
    return FieldSample(points, values)


class TestRankTransform:
    def test_single_replicate(self):
        scores = rank_transform(sample_of([[3.0]]))
        assert scores.scores.tolist() == [[0.5]]

    def test_simple_column(self):
        scores = rank_transform(sample_of([[3.0, 1.0, 2.0]]))
        assert scores.scores[:, 0].tolist() == [0.75, 0.25, 0.5]
        assert scores.rank_counts[:, 0].tolist() == [3, 1, 2]

    def test_ties_share_maximal_count(self):
        scores = rank_transform(sample_of([[5.0, 5.0]]))
        assert scores.rank_counts[:, 0].tolist() == [2, 2]
        assert scores.scores[:, 0].tolist() == [2 / 3, 2 / 3]

    @given(
        st.lists(
            st.integers(min_value=0, max_value=9), min_size=1, max_size=40
        )
    )
    def test_scores_properties(self, raw):
        col = [float(v) + 1.0 for v in raw]
        n = len(col)
        scores = rank_transform(sample_of([col]))
        s = scores.scores[:, 0]
        allowed = {k / (n + 1) for k in range(1, n + 1)}
        assert set(s.tolist()) <= allowed
        # monotone: larger values never get smaller scores; ties tied
        for i in range(n):
            for j in range(n):
                if col[i] < col[j]:
                    assert s[i] < s[j]
                elif col[i] == col[j]:
                    assert s[i] == s[j]

    def test_rank_invariance_under_monotone_transform(self, one_pattern_spec):
        sample = simulate_m4(one_pattern_spec, Region([P(3, 3), P(4, 3), P(2, 3)]), 300, 5)
        transformed = FieldSample(
            sample.locations,
            np.column_stack(
                [
                    np.log1p(sample.values[:, 0]),
                    sample.values[:, 1] ** 3,
                    sample.values[:, 2] + 17.0,
                ]
            ),
        )
        a = rank_transform(sample)
        b = rank_transform(transformed)
        assert np.array_equal(a.rank_counts, b.rank_counts)


class TestExtremalCoefficientEstimate:
    def test_identical_columns_give_one(self):
        scores = rank_transform(sample_of([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]))
        est = estimate_extremal_coefficient(scores, A2)
        assert est.value == 1.0
        assert est.as_fraction() == 1
        assert not est.out_of_range

    def test_antithetic_pair_reaches_two(self):
        scores = rank_transform(sample_of([[1.0, 2.0], [2.0, 1.0]]))
        est = estimate_extremal_coefficient(scores, A2)
        # max counts are (2, 2): mean max score 2/3, ratio 2
        assert est.value == 2.0
        assert not est.out_of_range

    def test_out_of_range_flag(self):
        scores = rank_transform(
            sample_of([[1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0]])
        )
        est = estimate_extremal_coefficient(scores, A2)
        assert est.as_fraction() == F(14, 6)
        assert est.value > 2
        assert est.out_of_range  # unclamped, flagged

    def test_range_of_mean_max(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(2, 30))
            cols = rng.uniform(1, 9, size=(2, n)).tolist()
            scores = rank_transform(sample_of(cols))
            est = estimate_extremal_coefficient(scores, A2)
            mean_max = F(est.numerator, est.numerator + est.denominator)
            assert F(1, n + 1) <= mean_max <= F(n, n + 1)

    def test_internal_guard_on_saturated_counts(self):
        doctored = UniformScores((P(0, 0),), np.array([[3], [3]]))
        with pytest.raises(EstimationError):
            estimate_extremal_coefficient(doctored, Region([P(0, 0)]))

    def test_needs_two_replicates(self):
        scores = rank_transform(sample_of([[1.0], [2.0]]))
        with pytest.raises(ArgumentError):
            estimate_extremal_coefficient(scores, A2)

    def test_monte_carlo_recovers_pair_coefficient(self, one_pattern_spec):
        sample = simulate_m4(one_pattern_spec, Region([P(3, 3), P(4, 3)]), 1000, STUDY_SEED)
        est = estimate_extremal_coefficient(
            rank_transform(sample), Region([P(3, 3), P(4, 3)])
        )
        assert est.value == pytest.approx(31 / 20, abs=0.1)


class TestPluginIndices:
    def test_identical_columns_degenerate_exactly(self):
        scores = rank_transform(
            sample_of([[1.0, 5.0, 2.0], [1.0, 5.0, 2.0], [1.0, 5.0, 2.0]])
        )
        region = Region([P(1, 0), P(2, 0)])
        assert estimate_contagion(scores, region, P(0, 0)) == 2.0
        assert estimate_stability(scores, region, P(0, 0)) == 0.0

    def test_estimator_identity_exact(self, one_pattern_spec, site, ring):
        sample = simulate_m4(one_pattern_spec, Region([site]).union(ring), 250, 8)
        scores = rank_transform(sample)
        pair_sum = sum(
            estimate_extremal_coefficient(scores, Region([site, j])).as_fraction()
            for j in ring
        )
        joint = estimate_extremal_coefficient(
            scores, Region([site]).union(ring)
        ).as_fraction()
        ci_frac = 2 * len(ring) - pair_sum
        si_frac = (pair_sum - len(ring)) / joint
        # the identity holds exactly in rational arithmetic
        assert si_frac * joint + ci_frac == len(ring)
        # and the float API agrees with the rational values
        assert estimate_contagion(scores, ring, site) == float(ci_frac)
        assert estimate_stability(scores, ring, site) == float(si_frac)

    def test_stability_warns_on_small_joint(self):
        # rank counts from rank_transform always give joint estimates >= 1;
        # a sub-1 joint can only come from doctored scores, and is flagged
        doctored = UniformScores((P(0, 0), P(1, 0)), np.array([[1, 1], [1, 1]]))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            estimate_stability(doctored, Region([P(1, 0)]), P(0, 0))
        assert any(issubclass(w.category, RuntimeWarning) for w in caught)

    def test_region_form_matches_site_form_for_singleton(self, one_pattern_spec, site, ring):
        sample = simulate_m4(one_pattern_spec, Region([site]).union(ring), 200, 2)
        scores = rank_transform(sample)
        small = Region([P(4, 3), P(2, 3)])
        direct = estimate_contagion(scores, small, site)
        via_region = estimate_contagion_region(scores, small, Region([site]))
        assert via_region == pytest.approx(direct, rel=1e-12)

    def test_region_form_capacity(self):
        points = tuple(P(i, 0) for i in range(21))
        scores = rank_transform(
            FieldSample(points, np.random.default_rng(0).uniform(1, 2, (3, 21)))
        )
        with pytest.raises(CapacityError):
            estimate_contagion_region(scores, Region([points[0]]), Region(points))


class TestMonteCarloStudy:
    def test_invariants_on_small_study(self, one_pattern_spec, site):
        region = Region([P(4, 3), P(2, 3)])
        ci, si = monte_carlo_study(one_pattern_spec, region, site, 3, 10, 123)
        for result in (ci, si):
            assert result.replications == 3
            assert result.sample_size == 10
            assert result.seed == 123
            assert result.mse >= 0
            assert (result.mean_estimate - result.true_value) ** 2 <= result.mse + 1e-12
        assert ci.index_name == "CI" and si.index_name == "SI"
        assert ci.true_value == pytest.approx(2 * 2 - 2 * (31 / 20))

    def test_deterministic(self, one_pattern_spec, site):
        region = Region([P(4, 3)])
        a = monte_carlo_study(one_pattern_spec, region, site, 3, 20, 9)
        b = monte_carlo_study(one_pattern_spec, region, site, 3, 20, 9)
        assert a == b

    def test_rejects_single_replication(self, one_pattern_spec, site, ring):
        with pytest.raises(ArgumentError):
            monte_carlo_study(one_pattern_spec, ring, site, 1, 10, 1)

    def test_consistency_trend_smoke(self, one_pattern_spec, site, ring):
        # error shrinks with sample size (full check in the acceptance suite)
        small_ci, _ = monte_carlo_study(one_pattern_spec, ring, site, 10, 100, STUDY_SEED)
        large_ci, _ = monte_carlo_study(one_pattern_spec, ring, site, 10, 4000, STUDY_SEED)
        assert large_ci.mse < small_ci.mse

    def test_study_result_serialization(self, one_pattern_spec, site):
        ci, _ = monte_carlo_study(one_pattern_spec, Region([P(4, 3)]), site, 2, 10, 5)
        doc = ci.to_json_dict()
        assert doc["index"] == "CI"
        assert doc["seed"] == 5
        row = ci.csv_row()
        assert row[0] == "CI" and row[4] == 2 and row[5] == 10


def test_substream_used_per_replication(one_pattern_spec, site):
    # replication r of a study draws from substream(seed, r): rebuilding one
    # replication by hand reproduces its estimate
    region = Region([P(4, 3), P(2, 3)])
    ci, _ = monte_carlo_study(one_pattern_spec, region, site, 2, 50, 77)
    locations = Region([site]).union(region)
    estimates = []
    for r in range(2):
        sample = simulate_m4(one_pattern_spec, locations, 50, substream(77, r))
        estimates.append(estimate_contagion(rank_transform(sample), region, site))
    assert ci.mean_estimate == pytest.approx(np.mean(estimates), rel=1e-15)


def test_scores_from_matrix_validates():
    with pytest.raises(ArgumentError):
        scores_from_matrix(np.zeros((0, 2)), (P(0, 0), P(1, 0)))
    with pytest.raises(ArgumentError):
        scores_from_matrix(np.zeros(3), (P(0, 0),))
