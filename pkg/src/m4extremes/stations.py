"""Station-data ingestion and index estimation for annual-maxima records.

The CSV layout is one row per year: first column `year`, remaining columns
one station each (header row carries the station names).  Station
coordinates live in an optional metadata CSV `station,x,y` and are
display-only; the estimators are rank-based, so any strictly increasing
per-station transform of the data (including a marginal Frechet transform)
leaves every estimate unchanged.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, UnknownStationError
from .estimate import (
    estimate_contagion,
    estimate_extremal_coefficient,
    estimate_stability,
    scores_from_matrix,
)
from .lattice import LatticePoint, Region
from .simulate import FieldSample

_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


@dataclass(frozen=True)
class Station:
    name: str
    x: float | None = None
    y: float | None = None


@dataclass(frozen=True, eq=False)
class StationDataset:
    """Annual maxima for a set of stations; rows are years (treated as
    independent replicates), columns are stations."""

    stations: tuple[Station, ...]
    years: tuple[int, ...]
    maxima: np.ndarray
    dropped_years: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        maxima = np.asarray(self.maxima, dtype=np.float64)
        maxima.setflags(write=False)
        object.__setattr__(self, "maxima", maxima)

    @property
    def n(self) -> int:
        return len(self.years)

    @property
    def station_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.stations)

    def column(self, name: str) -> int:
        try:
            return self.station_names.index(name)
        except ValueError:
            raise UnknownStationError(name) from None


def _read_metadata(path: str | Path) -> dict[str, tuple[float, float]]:
    coords: dict[str, tuple[float, float]] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["station", "x", "y"]:
            raise ParseError(f"{path}: expected header station,x,y")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            try:
                coords[row[0].strip()] = (float(row[1]), float(row[2]))
            except (IndexError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed row: {exc}") from exc
    return coords


def ingest_stations(
    csv_path: str | Path,
    *,
    missing: str = "error",
    metadata_path: str | Path | None = None,
) -> StationDataset:
    """Parse and validate a station CSV.

    `missing` selects the policy for empty/NA cells: "error" rejects the
    file (default), "drop-year" removes the affected rows.  Non-numeric or
    non-positive maxima always fail, naming the offending cell.
    """
    if missing not in ("error", "drop-year"):
        raise ParseError(f"unknown missing-value policy {missing!r}")
    try:
        fh = open(csv_path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot read {csv_path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0].strip().lower() != "year":
            raise ParseError(f"{csv_path}: first header column must be 'year'")
        names = [h.strip() for h in header[1:]]
        if not names:
            raise ParseError(f"{csv_path}: no station columns")
        if len(set(names)) != len(names):
            raise ParseError(f"{csv_path}: duplicate station names in header")
        years: list[int] = []
        kept_rows: list[list[float]] = []
        dropped: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{csv_path}:{lineno}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                year = int(row[0])
            except ValueError as exc:
                raise ParseError(
                    f"{csv_path}:{lineno}: year {row[0]!r} is not an integer"
                ) from exc
            cells: list[float] = []
            row_missing = False
            for name, raw in zip(names, row[1:]):
                token = raw.strip()
                if token.lower() in _MISSING_TOKENS:
                    if missing == "error":
                        raise ParseError(
                            f"{csv_path}: missing value for year {year}, "
                            f"station {name!r} (use --missing drop-year to skip)"
                        )
                    row_missing = True
                    continue
                try:
                    value = float(token)
                except ValueError as exc:
                    raise ParseError(
                        f"{csv_path}: year {year}, station {name!r}: "
                        f"{token!r} is not a number"
                    ) from exc
                if not math.isfinite(value) or value <= 0:
                    raise ParseError(
                        f"{csv_path}: year {year}, station {name!r}: "
                        f"maxima must be positive and finite, got {token}"
                    )
                cells.append(value)
            if row_missing:
                dropped.append(year)
                continue
            years.append(year)
            kept_rows.append(cells)
    if not kept_rows:
        raise ParseError(f"{csv_path}: no usable year rows")
    coords = _read_metadata(metadata_path) if metadata_path is not None else {}
    stations = tuple(
        Station(name, *(coords.get(name) or (None, None))) for name in names
    )
    return StationDataset(
        stations=stations,
        years=tuple(years),
        maxima=np.array(kept_rows),
        dropped_years=tuple(dropped),
    )


@dataclass(frozen=True)
class StationIndicesReport:
    """Estimated indices from a conditioning station to a region of stations."""

    conditioning: str
    region: tuple[str, ...]
    n: int
    contagion: float
    stability: float
    pairwise: tuple[tuple[str, float, bool], ...]  # (station, estimate, out_of_range)
    joint: float

    def to_json_dict(self) -> dict:
        return {
            "conditioning": self.conditioning,
            "region": list(self.region),
            "n": self.n,
            "contagion_index_estimate": self.contagion,
            "stability_index_estimate": self.stability,
            "pairwise_extremal_estimates": [
                {"station": s, "value": v, "out_of_range": flag}
                for s, v, flag in self.pairwise
            ],
            "joint_extremal_estimate": self.joint,
        }


def station_indices(
    dataset: StationDataset,
    conditioning: str,
    region_names: list[str] | tuple[str, ...],
) -> StationIndicesReport:
    """Estimate contagion/stability from a conditioning station to a region.

    Stations play the role of lattice locations; their coordinates are not
    used in any computation.
    """
    if not region_names:
        raise UnknownStationError("region must name at least one station")
    cond_col = dataset.column(conditioning)
    region_cols = [dataset.column(name) for name in region_names]
    # one synthetic lattice point per involved station, in column order
    involved = [cond_col] + [c for c in region_cols if c != cond_col]
    points = {col: LatticePoint(i, 0) for i, col in enumerate(involved)}
    matrix = dataset.maxima[:, involved]
    scores = scores_from_matrix(matrix, [points[c] for c in involved])
    site = points[cond_col]
    region = Region(points[c] for c in region_cols)
    pairwise = []
    for name, col in zip(region_names, region_cols):
        est = estimate_extremal_coefficient(scores, Region((site, points[col])))
        pairwise.append((name, est.value, est.out_of_range))
    joint = estimate_extremal_coefficient(scores, Region((site,)).union(region))
    return StationIndicesReport(
        conditioning=conditioning,
        region=tuple(region_names),
        n=dataset.n,
        contagion=estimate_contagion(scores, region, site),
        stability=estimate_stability(scores, region, site),
        pairwise=tuple(pairwise),
        joint=joint.value,
    )


def field_sample_to_station_csv(
    sample: FieldSample,
    path: str | Path,
    *,
    names: list[str] | None = None,
    start_year: int = 1,
) -> list[str]:
    """Export a simulated sample in the station CSV schema (years = replicates).

    Returns the station names used for the columns.
    """
    if names is None:
        names = [f"s{p.x}_{p.y}" for p in sample.locations]
    if len(names) != len(sample.locations):
        raise ParseError("one name per location is required")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year"] + list(names))
        for r in range(sample.n_replicates):
            writer.writerow(
                [start_year + r] + [repr(float(v)) for v in sample.values[r]]
            )
    return list(names)
