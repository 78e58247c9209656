"""Rank-based estimation of extremal coefficients and derived indices.

The rank transform uses the modified empirical CDF with denominator n+1 and
ties counted by "less than or equal", so every score is k/(n+1) for an
integer k.  All estimators are rational functions of those integer rank
counts and are computed in exact integer/Fraction arithmetic before being
floated, which makes degenerate cases (identical columns) and the index
identities exact rather than approximate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .dependence import (
    SUBSET_ENUMERATION_CAP,
    _alternating_sum,
    contagion_index,
    stability_index,
)
from .errors import ArgumentError, CapacityError, EstimationError
from .lattice import LatticePoint, Region
from .rng import substream
from .simulate import FieldSample, simulate_m4


@dataclass(frozen=True, eq=False)
class UniformScores:
    """Rank scores of a sample: values k/(n+1) in (0,1), one column per location.

    `rank_counts` keeps the integer numerators k; estimators use them to
    stay exact.
    """

    locations: tuple[LatticePoint, ...]
    rank_counts: np.ndarray  # (n, k) int64: count of column values <= this one
    scores: np.ndarray = None  # type: ignore[assignment]  # filled in __post_init__

    def __post_init__(self) -> None:
        counts = np.asarray(self.rank_counts)
        if counts.ndim != 2 or counts.shape[1] != len(self.locations):
            raise ArgumentError("rank counts shape does not match locations")
        scores = counts / (counts.shape[0] + 1)
        scores.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "rank_counts", counts)
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return int(self.rank_counts.shape[0])

    def column_index(self, point: LatticePoint) -> int:
        try:
            return self.locations.index(point)
        except ValueError:
            raise ArgumentError(f"location {point} not in scores") from None


def scores_from_matrix(
    values: np.ndarray, locations: Sequence[LatticePoint]
) -> UniformScores:
    """Column-wise modified-ECDF rank transform of a replicates-by-locations matrix."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ArgumentError("expected a 2-d matrix")
    n, k = values.shape
    if n < 1:
        raise ArgumentError("need at least one replicate")
    counts = np.empty((n, k), dtype=np.int64)
    for c in range(k):
        col = values[:, c]
        counts[:, c] = np.searchsorted(np.sort(col), col, side="right")
    return UniformScores(tuple(locations), counts)


def rank_transform(sample: FieldSample) -> UniformScores:
    """Modified-ECDF scores of a field sample; ties share the maximal count."""
    return scores_from_matrix(sample.values, sample.locations)


@dataclass(frozen=True)
class ExtremalCoefficientEstimate:
    """Max-mean ratio estimate of an extremal coefficient.

    `value` = numerator/denominator, unclamped; `out_of_range` flags values
    outside the feasible interval [1, region size].
    """

    value: float
    numerator: int
    denominator: int
    region_size: int

    @property
    def out_of_range(self) -> bool:
        frac = self.as_fraction()
        return not (1 <= frac <= self.region_size)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


def _region_columns(scores: UniformScores, region: Region) -> list[int]:
    if not len(region):
        raise ArgumentError("region must contain at least one point")
    return [scores.column_index(p) for p in region]


def _epsilon_hat_fraction(scores: UniformScores, region: Region) -> Fraction:
    cols = _region_columns(scores, region)
    n = scores.n
    if n < 2:
        raise ArgumentError("need at least two replicates to estimate")
    max_counts = scores.rank_counts[:, cols].max(axis=1)
    numerator = int(max_counts.sum())  # sum of per-replicate max scores, times n+1
    total = n * (n + 1)
    if numerator >= total:
        raise EstimationError(
            "mean of maximal scores reached 1; impossible for modified-ECDF ranks"
        )
    return Fraction(numerator, total - numerator)


def estimate_extremal_coefficient(
    scores: UniformScores, region: Region
) -> ExtremalCoefficientEstimate:
    """Estimate the region's extremal coefficient as m/(1-m), where m is the
    sample mean of the per-replicate maximum rank score over the region."""
    frac = _epsilon_hat_fraction(scores, region)
    return ExtremalCoefficientEstimate(
        value=float(frac),
        numerator=frac.numerator,
        denominator=frac.denominator,
        region_size=len(region),
    )


def estimate_contagion(
    scores: UniformScores, region: Region, site: LatticePoint
) -> float:
    """Plug-in contagion index: 2|region| minus the summed pairwise estimates."""
    if not len(region):
        raise ArgumentError("region must contain at least one point")
    total = Fraction(0)
    for j in region:
        total += _epsilon_hat_fraction(scores, Region((site, j)))
    return float(2 * len(region) - total)


def estimate_stability(
    scores: UniformScores, region: Region, site: LatticePoint
) -> float:
    """Plug-in stability index from pairwise and joint coefficient estimates."""
    pair_sum = Fraction(0)
    for j in region:
        pair_sum += _epsilon_hat_fraction(scores, Region((site, j)))
    joint = _epsilon_hat_fraction(scores, Region((site,)).union(region))
    if joint < 1 - Fraction(1, 10**9):
        warnings.warn(
            f"joint coefficient estimate {float(joint):.6f} is below 1; "
            "the stability estimate may be unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    return float((pair_sum - len(region)) / joint)


def estimate_contagion_region(
    scores: UniformScores, region: Region, given: Region
) -> float:
    """Plug-in region-to-region contagion index.

    Mirrors the exact reduction (inclusion-exclusion over coefficient
    estimates).  No external benchmark exists for this quantity; it is
    provided for exploratory use under the same size cap as the exact path.
    """
    if not len(region) or not len(given):
        raise ArgumentError("regions must be non-empty")
    if len(given) > SUBSET_ENUMERATION_CAP:
        raise CapacityError(
            f"conditioning region has {len(given)} points; capped at "
            f"{SUBSET_ENUMERATION_CAP}"
        )
    cache: dict[frozenset, Fraction] = {}

    def eps_of(combo: tuple[LatticePoint, ...]) -> Fraction:
        key = frozenset(combo)
        value = cache.get(key)
        if value is None:
            value = _epsilon_hat_fraction(scores, Region(combo))
            cache[key] = value
        return value

    given_points = given.points
    numerator = Fraction(0)
    for j in region:
        for size in range(1, len(given_points) + 1):
            sign = 1 if size % 2 == 1 else -1
            for combo in combinations(given_points, size):
                joint = combo if j in combo else combo + (j,)
                numerator += sign * _alternating_sum(eps_of, joint)
    return float(numerator / eps_of(given_points))


@dataclass(frozen=True)
class StudyResult:
    """Monte Carlo summary for one index."""

    index_name: str
    true_value: float
    mean_estimate: float
    mse: float
    replications: int
    sample_size: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "index": self.index_name,
            "true_value": self.true_value,
            "mean_estimate": self.mean_estimate,
            "mse": self.mse,
            "replications": self.replications,
            "sample_size": self.sample_size,
            "seed": self.seed,
        }

    def csv_row(self) -> list:
        return [
            self.index_name,
            repr(self.true_value),
            repr(self.mean_estimate),
            repr(self.mse),
            self.replications,
            self.sample_size,
            self.seed,
        ]


def monte_carlo_study(
    spec,
    region: Region,
    site: LatticePoint,
    replications: int,
    sample_size: int,
    seed: int,
) -> tuple[StudyResult, StudyResult]:
    """Repeatedly simulate, rank, and estimate both indices.

    Replication r simulates `sample_size` independent fields from substream
    (seed, r), so the study is reproducible and replications could run in
    parallel.  MSE is computed against the exact index values.
    """
    if replications < 2:
        raise ArgumentError("need at least two replications")
    locations = Region((site,)).union(region)
    true_ci = float(contagion_index(spec, region, site))
    true_si = float(stability_index(spec, region, site))
    ci_estimates = np.empty(replications)
    si_estimates = np.empty(replications)
    for r in range(replications):
        sample = simulate_m4(spec, locations, sample_size, substream(seed, r))
        scores = rank_transform(sample)
        ci_estimates[r] = estimate_contagion(scores, region, site)
        si_estimates[r] = estimate_stability(scores, region, site)
    ci_result = StudyResult(
        "CI",
        true_ci,
        float(ci_estimates.mean()),
        float(np.mean((ci_estimates - true_ci) ** 2)),
        replications,
        sample_size,
        seed,
    )
    si_result = StudyResult(
        "SI",
        true_si,
        float(si_estimates.mean()),
        float(np.mean((si_estimates - true_si) ** 2)),
        replications,
        sample_size,
        seed,
    )
    return ci_result, si_result
