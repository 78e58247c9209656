"""Closed-form extremal dependence indices for moving-pattern fields.

Every index here reduces to extremal coefficients of finite point sets,
which for these fields are lag-wise maxima of per-location weights.  With
rational weights all results are exact :class:`fractions.Fraction` values;
with float weights, alternating sums run in a fixed subset-size order with
compensated accumulation so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .errors import ArgumentError, CapacityError, DegenerateConditioningError
from .lattice import LatticePoint, Region, neighbors
from .patterns import M4Spec, Weight

# Hard cap on the point sets fed to subset enumeration (2**20 subsets).
SUBSET_ENUMERATION_CAP = 20

DEGENERATE_RATE = 1e-12


def _ksum(terms: Iterable[Weight]) -> Weight:
    """Compensated (Kahan) sum; exact when all terms are rational."""
    total: Weight = Fraction(0)
    comp: Weight = Fraction(0)
    for term in terms:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def exponent_value(spec: M4Spec, region: Region, scales: Sequence[Weight]) -> Weight:
    """Exponent function of the field restricted to `region`, at `scales`.

    Equals the sum over (pattern, lag) of the largest weight-to-scale ratio
    across the region; homogeneous of degree -1 in the scales.
    """
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    if len(scales) != len(points):
        raise ArgumentError(
            f"got {len(scales)} scales for {len(points)} region points"
        )
    if any(s <= 0 for s in scales):
        raise ArgumentError("scales must be strictly positive")
    matrices = [spec.patterns_at(p) for p in points]
    return _ksum(
        max(matrices[j][li][gi] / scales[j] for j in range(len(points)))
        for li in range(spec.n_patterns)
        for gi in range(spec.lag_count)
    )


def extremal_coefficient(spec: M4Spec, region: Region) -> Weight:
    """Effective number of independent sites in `region` (in [1, |region|])."""
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    matrices = [spec.patterns_at(p) for p in points]
    return _ksum(
        max(m[li][gi] for m in matrices)
        for li in range(spec.n_patterns)
        for gi in range(spec.lag_count)
    )


def extremal_coefficient_matrix(
    spec: M4Spec, site: LatticePoint
) -> tuple[tuple[Weight, ...], ...]:
    """Pairwise extremal coefficients of `site` with its eight neighbors.

    Returned in compass layout (north up, east right); the center entry is
    the singleton coefficient of `site` itself.
    """
    ring = neighbors(site).points
    e = [extremal_coefficient(spec, Region((site, p))) for p in ring]
    center = extremal_coefficient(spec, Region((site,)))
    # ring order is E, NE, N, NW, W, SW, S, SE
    return (
        (e[3], e[2], e[1]),
        (e[4], center, e[0]),
        (e[5], e[6], e[7]),
    )


def pairwise_tail_dependence(
    spec: M4Spec, i: LatticePoint, j: LatticePoint
) -> Weight:
    """Limiting conditional probability that j exceeds a high quantile given i does."""
    return 2 - extremal_coefficient(spec, Region((i, j)))


def _capped_points(region: Region, what: str) -> tuple[LatticePoint, ...]:
    if len(region) > SUBSET_ENUMERATION_CAP:
        raise CapacityError(
            f"{what} has {len(region)} points; subset enumeration is capped "
            f"at {SUBSET_ENUMERATION_CAP}"
        )
    return region.points


def _alternating_sum(
    eps_of: Callable[[tuple[LatticePoint, ...]], Weight],
    points: tuple[LatticePoint, ...],
) -> Weight:
    """Inclusion-exclusion sum of extremal coefficients over all non-empty subsets.

    This is the rate, relative to 1-u, of the event that every point in
    `points` exceeds the u-quantile as u -> 1.  Terms are accumulated by
    subset size, smallest first, to pin down rounding in float mode.
    """

    def terms() -> Iterable[Weight]:
        for size in range(1, len(points) + 1):
            sign = 1 if size % 2 == 1 else -1
            for combo in combinations(points, size):
                yield sign * eps_of(combo)

    return _ksum(terms())


def _cached_eps(spec: M4Spec) -> Callable[[tuple[LatticePoint, ...]], Weight]:
    cache: dict[frozenset, Weight] = {}

    def eps_of(combo: tuple[LatticePoint, ...]) -> Weight:
        key = frozenset(combo)
        value = cache.get(key)
        if value is None:
            value = extremal_coefficient(spec, Region(combo))
            cache[key] = value
        return value

    return eps_of


def multivariate_tail_dependence(
    spec: M4Spec, target: Region, given: Region
) -> Weight:
    """Limiting probability that all of `target` exceed a high quantile,
    conditional on all of `given` exceeding it.

    Evaluated through inclusion-exclusion over extremal coefficients; a
    conditioning set whose joint exceedance rate vanishes (e.g. independent
    sites) raises :class:`DegenerateConditioningError`.
    """
    if not len(target) or not len(given):
        raise ArgumentError("target and conditioning regions must be non-empty")
    union = _capped_points(target.union(given), "target/conditioning union")
    eps_of = _cached_eps(spec)
    numerator = _alternating_sum(eps_of, union)
    denominator = _alternating_sum(eps_of, given.points)
    if denominator <= DEGENERATE_RATE:
        raise DegenerateConditioningError(
            f"joint exceedance rate of the conditioning region is {denominator}; "
            "the conditional tail dependence is undefined"
        )
    return numerator / denominator


def contagion_index(spec: M4Spec, region: Region, site: LatticePoint) -> Weight:
    """Limiting expected number of region exceedances given `site` exceeds.

    Ranges from 0 (independence) to |region| (total dependence); `site`
    need not belong to the region.
    """
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    pair_sum = _ksum(
        extremal_coefficient(spec, Region((site, j))) for j in points
    )
    return 2 * len(points) - pair_sum


def contagion_index_region(spec: M4Spec, region: Region, given: Region) -> Weight:
    """Limiting expected number of region exceedances given at least one
    exceedance in the conditioning region `given`."""
    if not len(region) or not len(given):
        raise ArgumentError("regions must be non-empty")
    given_points = _capped_points(given, "conditioning region")
    eps_of = _cached_eps(spec)

    def per_target_terms(j: LatticePoint) -> Iterable[Weight]:
        for size in range(1, len(given_points) + 1):
            sign = 1 if size % 2 == 1 else -1
            for combo in combinations(given_points, size):
                joint = combo if j in combo else combo + (j,)
                yield sign * _alternating_sum(eps_of, joint)

    numerator = _ksum(
        _ksum(per_target_terms(j)) for j in region.points
    )
    return numerator / eps_of(given_points)


def fragility_index(spec: M4Spec, region: Region) -> Weight:
    """Expected number of exceedances in `region` given at least one; 1 means
    the system of sites is stable, larger values mean fragile."""
    return contagion_index_region(spec, region, region)


def stability_index(spec: M4Spec, region: Region, site: LatticePoint) -> Weight:
    """Limiting expected number of threshold crossings in `region` relative
    to `site` (site below, region site above), normalized by the rate of
    any exceedance among {site} and the region."""
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    pair_sum = _ksum(
        extremal_coefficient(spec, Region((site, j))) for j in points
    )
    joint = extremal_coefficient(spec, Region((site,)).union(region))
    return (pair_sum - len(points)) / joint


def stability_bounds(
    spec: M4Spec, region: Region, site: LatticePoint
) -> tuple[Weight, Weight]:
    """Sharp sandwich for the stability index from pairwise coefficients only."""
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    pair_eps = [extremal_coefficient(spec, Region((site, j))) for j in points]
    numerator = _ksum(pair_eps) - len(points)
    return numerator / (len(points) + 1), numerator / max(pair_eps)


@dataclass(frozen=True)
class DependenceSummary:
    """All dependence indices of one (region, site) configuration."""

    site: LatticePoint
    region: Region
    pairwise_extremal: tuple[tuple[LatticePoint, Weight], ...]
    joint_extremal: Weight
    contagion: Weight
    stability: Weight
    stability_lower: Weight
    stability_upper: Weight

    def to_json_dict(self) -> dict:
        def num(value: Weight) -> float:
            return float(value)

        def exact(value: Weight) -> str | None:
            return str(value) if isinstance(value, Fraction) else None

        return {
            "site": str(self.site),
            "region": [str(p) for p in self.region],
            "pairwise_extremal_coefficients": [
                {"point": str(p), "value": num(v), "exact": exact(v)}
                for p, v in self.pairwise_extremal
            ],
            "joint_extremal_coefficient": {
                "value": num(self.joint_extremal),
                "exact": exact(self.joint_extremal),
            },
            "contagion_index": {
                "value": num(self.contagion),
                "exact": exact(self.contagion),
            },
            "stability_index": {
                "value": num(self.stability),
                "exact": exact(self.stability),
            },
            "stability_bounds": {
                "lower": num(self.stability_lower),
                "upper": num(self.stability_upper),
            },
        }


def summarize(spec: M4Spec, region: Region, site: LatticePoint) -> DependenceSummary:
    """Bundle every index of the (region, site) configuration consistently.

    The contagion and stability values are derived from one set of pairwise
    coefficients, so the summary satisfies the exact index identities."""
    points = region.points
    if not points:
        raise ArgumentError("region must contain at least one point")
    pairwise = tuple(
        (j, extremal_coefficient(spec, Region((site, j)))) for j in points
    )
    pair_sum = _ksum(v for _, v in pairwise)
    joint = extremal_coefficient(spec, Region((site,)).union(region))
    numerator = pair_sum - len(points)
    return DependenceSummary(
        site=site,
        region=region,
        pairwise_extremal=pairwise,
        joint_extremal=joint,
        contagion=2 * len(points) - pair_sum,
        stability=numerator / joint,
        stability_lower=numerator / (len(points) + 1),
        stability_upper=numerator / max(v for _, v in pairwise),
    )
