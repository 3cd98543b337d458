"""Hypergrid geometry: points, axis-parallel lines, and prefix slices.

Coordinates are 1-based throughout, so a side-length-``n`` grid in ``d``
dimensions is the set of integer tuples with every entry in ``[1, n]``.
Points are plain tuples; all iteration orders are lexicographic, which keeps
seeded experiments replayable bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

GridPoint = tuple[int, ...]

# Construction refuses grids whose point count does not fit a 64-bit count.
_MAX_POINTS = 2**63 - 1


@dataclass(frozen=True)
class HypergridDomain:
    """The lattice ``[n]^d``."""

    n: int
    d: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.n**self.d > _MAX_POINTS:
            raise ValueError(f"point count {self.n}**{self.d} exceeds the 64-bit cap")

    @property
    def size(self) -> int:
        return self.n**self.d

    def contains(self, point: GridPoint) -> bool:
        return len(point) == self.d and all(1 <= c <= self.n for c in point)

    def require(self, point: GridPoint) -> None:
        if not self.contains(point):
            raise ValueError(f"point {point} not in [{self.n}]^{self.d}")

    def points(self) -> Iterator[GridPoint]:
        """All points in lexicographic (row-major) order."""
        return itertools.product(range(1, self.n + 1), repeat=self.d)

    def point_index(self, point: GridPoint) -> int:
        """Row-major index of ``point``; the last coordinate varies fastest."""
        idx = 0
        for c in point:
            idx = idx * self.n + (c - 1)
        return idx

    def point_at(self, index: int) -> GridPoint:
        coords = []
        for _ in range(self.d):
            coords.append(index % self.n + 1)
            index //= self.n
        return tuple(reversed(coords))


@dataclass(frozen=True)
class AxisLine:
    """The ``n`` points that agree on every coordinate except ``dim``.

    ``anchor`` holds the d-1 fixed coordinates in dimension order, skipping
    ``dim`` (1-based).
    """

    domain: HypergridDomain
    dim: int
    anchor: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= self.domain.d:
            raise ValueError(f"dimension {self.dim} out of range for d={self.domain.d}")
        if len(self.anchor) != self.domain.d - 1:
            raise ValueError(
                f"anchor must fix {self.domain.d - 1} coordinates, got {len(self.anchor)}"
            )
        for c in self.anchor:
            if not 1 <= c <= self.domain.n:
                raise ValueError(f"anchor coordinate {c} outside [1, {self.domain.n}]")

    def point_at(self, j: int) -> GridPoint:
        """The line's point with moving coordinate ``j``."""
        if not 1 <= j <= self.domain.n:
            raise ValueError(f"position {j} outside [1, {self.domain.n}]")
        k = self.dim - 1
        return self.anchor[:k] + (j,) + self.anchor[k:]

    def points(self) -> tuple[GridPoint, ...]:
        return tuple(self.point_at(j) for j in range(1, self.domain.n + 1))


def iter_lines(domain: HypergridDomain, dim: int) -> Iterator[AxisLine]:
    """All ``n^(d-1)`` lines along ``dim``, lexicographic on anchors.

    The lines are pairwise disjoint and cover the grid.
    """
    if not 1 <= dim <= domain.d:
        raise ValueError(f"dimension {dim} out of range for d={domain.d}")
    for anchor in itertools.product(range(1, domain.n + 1), repeat=domain.d - 1):
        yield AxisLine(domain, dim, anchor)


def all_lines(domain: HypergridDomain) -> Iterator[AxisLine]:
    """Every axis-parallel line of the grid, dimension by dimension."""
    for dim in range(1, domain.d + 1):
        yield from iter_lines(domain, dim)


def line_count(domain: HypergridDomain) -> int:
    return domain.d * domain.n ** (domain.d - 1)


def slice_points(domain: HypergridDomain, prefix: tuple[int, ...]) -> tuple[GridPoint, ...]:
    """The sub-hypergrid whose first ``len(prefix)`` coordinates are fixed.

    The empty prefix yields the whole grid; slices with distinct prefixes of
    the same length partition it.
    """
    i = len(prefix)
    if i > domain.d:
        raise ValueError(f"prefix length {i} exceeds dimension {domain.d}")
    for c in prefix:
        if not 1 <= c <= domain.n:
            raise ValueError(f"prefix coordinate {c} outside [1, {domain.n}]")
    tail = itertools.product(range(1, domain.n + 1), repeat=domain.d - i)
    return tuple(prefix + rest for rest in tail)
