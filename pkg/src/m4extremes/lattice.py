"""Integer-lattice primitives: points, finite regions, rectangular windows."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ArgumentError


@dataclass(frozen=True, order=True)
class LatticePoint:
    """A point of the two-dimensional integer lattice.

    Ordering is lexicographic in (x, y), which gives a total order and makes
    sorted iterations deterministic.
    """

    x: int
    y: int

    def translated(self, dx: int, dy: int) -> "LatticePoint":
        return LatticePoint(self.x + dx, self.y + dy)

    def __str__(self) -> str:
        return f"({self.x},{self.y})"


class Region:
    """A finite, duplicate-free, order-preserving set of lattice points.

    Iteration follows insertion order so downstream reductions are
    deterministic; equality and hashing ignore order (regions are sets).
    A region may be empty as a container, but index computations reject
    empty regions at call time.
    """

    __slots__ = ("_points", "_members")

    def __init__(self, points: Iterable[LatticePoint] = ()):
        ordered = tuple(dict.fromkeys(points))
        object.__setattr__(self, "_points", ordered)
        object.__setattr__(self, "_members", frozenset(ordered))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Region is immutable")

    @classmethod
    def of(cls, *points: LatticePoint) -> "Region":
        return cls(points)

    @property
    def points(self) -> tuple[LatticePoint, ...]:
        return self._points

    def union(self, other: "Region | Iterable[LatticePoint]") -> "Region":
        extra = other.points if isinstance(other, Region) else tuple(other)
        return Region(self._points + extra)

    def with_point(self, point: LatticePoint) -> "Region":
        return Region(self._points + (point,))

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self._points)

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, point: object) -> bool:
        return point in self._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        inner = ", ".join(str(p) for p in self._points)
        return f"Region({inner})"


# Ring of the eight surrounding sites, counter-clockwise starting east.
_NEIGHBOR_OFFSETS = (
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
)


def neighbors(site: LatticePoint) -> Region:
    """The eight sites surrounding `site`, counter-clockwise from the east."""
    return Region(site.translated(dx, dy) for dx, dy in _NEIGHBOR_OFFSETS)


@dataclass(frozen=True)
class LatticeRect:
    """A closed, axis-aligned rectangle of lattice points."""

    x_min: int
    x_max: int
    y_min: int
    y_max: int

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ArgumentError(
                f"degenerate rectangle [{self.x_min},{self.x_max}]x"
                f"[{self.y_min},{self.y_max}]"
            )

    def __contains__(self, point: object) -> bool:
        if not isinstance(point, LatticePoint):
            return False
        return (
            self.x_min <= point.x <= self.x_max
            and self.y_min <= point.y <= self.y_max
        )

    @property
    def size(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)

    def points(self) -> Iterator[LatticePoint]:
        """All points, row-major (y ascending, then x ascending)."""
        for y in range(self.y_min, self.y_max + 1):
            for x in range(self.x_min, self.x_max + 1):
                yield LatticePoint(x, y)
