"""Rational product distributions and the refinement that makes them uniform.

A product distribution with per-coordinate masses ``q_r(j) / N`` is handled
exactly: masses are integers over a common denominator, set probabilities
come out as Fractions, and sampling draws an integer in ``[0, N)`` per
coordinate and maps it to its segment, so every probability is hit exactly.

Splitting coordinate ``j`` of dimension ``r`` into ``q_r(j)`` copies turns
the weighted grid ``[n]^d`` into a uniform ``[N]^d``: functions extend by
copying values across each block, path weights extend by mapping the block
back to its source point, and distances are preserved, which lets the
uniform-grid oracles answer weighted questions.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import BoundingFamily, FunctionTable, Number
from .errors import CapacityError
from .grid import GridPoint, HypergridDomain


@dataclass(frozen=True)
class ProductDistribution:
    """Per-dimension integer masses ``q_r(1..n)`` over a common denominator.

    Every row must sum to ``denominator``; the point mass of ``x`` is the
    product of its coordinate masses divided by ``denominator**d``.
    """

    domain: HypergridDomain
    masses: tuple[tuple[int, ...], ...]
    denominator: int
    _cums: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n, d = self.domain.n, self.domain.d
        masses = tuple(tuple(int(q) for q in row) for row in self.masses)
        if len(masses) != d:
            raise ValueError(f"need {d} mass rows, got {len(masses)}")
        for row in masses:
            if len(row) != n:
                raise ValueError(f"each mass row must have {n} entries")
            if any(q < 0 for q in row):
                raise ValueError("masses must be nonnegative integers")
            if sum(row) != self.denominator:
                raise ValueError(
                    f"row sums to {sum(row)}, expected denominator {self.denominator}"
                )
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        cums = []
        for row in masses:
            acc, out = 0, []
            for q in row:
                acc += q
                out.append(acc)
            cums.append(tuple(out))
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_cums", tuple(cums))

    # -- constructors ------------------------------------------------------

    @classmethod
    def uniform(cls, n: int, d: int) -> "ProductDistribution":
        return cls(HypergridDomain(n, d), ((1,) * n,) * d, n)

    @classmethod
    def from_masses(cls, rows: Sequence[Sequence[int]]) -> "ProductDistribution":
        """Build from integer mass rows whose sums may differ.

        Rows are rescaled to the least common multiple of their sums, so
        each dimension keeps its marginal exactly.
        """
        rows = [[int(q) for q in row] for row in rows]
        if not rows:
            raise ValueError("need at least one dimension")
        sums = [sum(row) for row in rows]
        if any(s <= 0 for s in sums):
            raise ValueError("each mass row must have positive total")
        common = math.lcm(*sums)
        scaled = tuple(tuple(q * (common // s) for q in row) for row, s in zip(rows, sums))
        return cls(HypergridDomain(len(rows[0]), len(rows)), scaled, common)

    @classmethod
    def rationalize(
        cls, rows: Sequence[Sequence[float]], max_denominator: int = 1000
    ) -> "ProductDistribution":
        """Approximate real weight rows by rational masses.

        Each weight becomes a Fraction with denominator at most
        ``max_denominator`` of its row-normalized value; rows are then put
        over one common denominator.
        """
        int_rows = []
        for row in rows:
            total = float(sum(row))
            if total <= 0:
                raise ValueError("each weight row must have positive total")
            fracs = [Fraction(w / total).limit_denominator(max_denominator) for w in row]
            denom = math.lcm(*(fr.denominator for fr in fracs))
            ints = [int(fr * denom) for fr in fracs]
            # limit_denominator can make the row sum drift off 1; absorb the
            # slack into the heaviest entry so masses stay a distribution.
            drift = denom - sum(ints)
            ints[max(range(len(ints)), key=lambda i: ints[i])] += drift
            if min(ints) < 0:
                raise ValueError("weights too skewed for the requested denominator")
            int_rows.append(ints)
        return cls.from_masses(int_rows)

    # -- exact mass arithmetic ----------------------------------------------

    def point_mass(self, x: GridPoint) -> Fraction:
        self.domain.require(x)
        num = 1
        for r, c in enumerate(x):
            num *= self.masses[r][c - 1]
        return Fraction(num, self.denominator**self.domain.d)

    def mass(self, points: Iterable[GridPoint]) -> Fraction:
        """Exact probability of a set of points."""
        total = 0
        for x in points:
            self.domain.require(x)
            num = 1
            for r, c in enumerate(x):
                num *= self.masses[r][c - 1]
            total += num
        return Fraction(total, self.denominator**self.domain.d)

    @property
    def is_uniform(self) -> bool:
        return all(len(set(row)) == 1 for row in self.masses)

    # -- sampling ------------------------------------------------------------

    def segment_of(self, dim: int, t: int) -> int:
        """Coordinate whose mass block contains position ``t`` of ``[N]``."""
        if not 1 <= t <= self.denominator:
            raise ValueError(f"position {t} outside [1, {self.denominator}]")
        return bisect_left(self._cums[dim - 1], t) + 1

    def sample(self, rng: np.random.Generator) -> GridPoint:
        """One point; each coordinate lands on ``j`` with chance ``q(j)/N``.

        Draws one integer per coordinate, so fixed seeds replay exactly.
        """
        coords = []
        for r in range(1, self.domain.d + 1):
            t = int(rng.integers(self.denominator)) + 1
            coords.append(self.segment_of(r, t))
        return tuple(coords)


@dataclass(frozen=True)
class BloatedGrid:
    """The uniform refinement ``[N]^d`` of a weighted ``[n]^d``.

    Coordinate ``j`` of dimension ``r`` owns a contiguous block of
    ``q_r(j)`` positions, so the block of a point has exactly
    ``N^d * mass(x)`` preimages and uniform measure upstairs reproduces the
    weighted measure downstairs.
    """

    dist: ProductDistribution

    @property
    def source(self) -> HypergridDomain:
        return self.dist.domain

    @property
    def target(self) -> HypergridDomain:
        return HypergridDomain(self.dist.denominator, self.dist.domain.d)

    def collapse(self, v: GridPoint) -> GridPoint:
        """Map a refined point back to the source point owning its block."""
        self.target.require(v)
        return tuple(self.dist.segment_of(r + 1, t) for r, t in enumerate(v))

    def preimage_size(self, x: GridPoint) -> int:
        self.source.require(x)
        out = 1
        for r, c in enumerate(x):
            out *= self.dist.masses[r][c - 1]
        return out

    def preimage_points(self, x: GridPoint) -> Iterable[GridPoint]:
        """All refined points in the block of ``x``."""
        self.source.require(x)
        ranges = []
        for r, c in enumerate(x):
            hi = self.dist._cums[r][c - 1]
            lo = hi - self.dist.masses[r][c - 1] + 1
            ranges.append(range(lo, hi + 1))
        return itertools.product(*ranges)

    def extend_function(
        self, f: FunctionTable, *, max_points: int = 1 << 16
    ) -> FunctionTable:
        """Materialized copy of ``f`` constant on each block.

        Use :meth:`extend_function_lazy` when ``N^d`` is large; this variant
        refuses to allocate above ``max_points``.
        """
        if f.domain != self.source:
            raise ValueError("function does not live on the source grid")
        if self.target.size > max_points:
            raise CapacityError(
                f"refined grid has {self.target.size} points, above the cap of {max_points}"
            )
        vals = tuple(f.value_at(self.collapse(v)) for v in self.target.points())
        return FunctionTable(self.target, vals, f.bounds_range)

    def extend_function_lazy(self, f: FunctionTable) -> Callable[[GridPoint], Number]:
        """Query adapter: each refined query costs one source query."""
        if f.domain != self.source:
            raise ValueError("function does not live on the source grid")
        return lambda v: f.value_at(self.collapse(v))

    def extend_metric(self, B: BoundingFamily) -> Callable[[GridPoint, GridPoint], Number]:
        """Path-weight evaluator on the refined grid.

        Two points in one block are at weight zero both ways; in general the
        weight is the source weight of the collapsed pair, which keeps all
        quasimetric axioms intact.
        """
        if B.domain != self.source:
            raise ValueError("bounds do not live on the source grid")
        return lambda v1, v2: B.metric(self.collapse(v1), self.collapse(v2))


@dataclass(frozen=True)
class PreservationReport:
    """Weighted distance downstairs vs uniform distance upstairs."""

    weighted_total: Number
    refined_total: Number
    weighted_oracle: str

    @property
    def ok(self) -> bool:
        return self.weighted_total == self.refined_total


def distance_preservation_check(
    f: FunctionTable,
    B: BoundingFamily,
    dist: ProductDistribution,
    *,
    max_points: int = 4096,
) -> PreservationReport:
    """Confirm the refinement preserves unnormalized L1 distance.

    The weighted side uses the isotonic oracle when it applies (lines under
    monotonicity, with coordinate masses as weights); otherwise the refined
    matching itself is the definition and the check only pins down that the
    two code paths agree.  Both sides are exact for exact inputs.
    """
    bg = BloatedGrid(dist)
    from .violation import build_violation_graph, isotonic_l1_oracle, max_weight_matching

    f_ext = bg.extend_function(f, max_points=max_points)
    refined = max_weight_matching(
        build_violation_graph(f_ext, bg.extend_metric(B), max_points=max_points)
    ).weight

    if f.domain.d == 1 and B.is_monotonicity:
        weighted = isotonic_l1_oracle(f, weights=dist.masses[0])
        oracle = "isotonic"
    else:
        weighted = refined
        oracle = "refined-matching"
    return PreservationReport(weighted, refined, oracle)
