"""Per-step derivative bounds, the induced quasimetric, and membership checks.

A bounding family assigns every axis step ``t -> t+1`` of every dimension a
lower and an upper bound on the function increment.  The family induces an
asymmetric path weight ``m(x, y)`` on the grid (walking a coordinate down
pays the upper bounds, walking it up pays minus the lower bounds), and a
function belongs to the class exactly when ``f(x) - f(y) <= m(x, y)`` for
all pairs, which for axis-adjacent pairs is just the step condition.

Numbers are kept exact whenever the inputs are ints or Fractions: prefix
sums only ever add values of one sign's family, infinities are tracked as
separate counts so they never meet in a subtraction, and halving promotes
odd integers to ``Fraction`` instead of floats.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import UnsupportedBoundsError
from .grid import AxisLine, GridPoint, HypergridDomain, iter_lines

Number = Union[int, float, Fraction]

INF = math.inf


def as_number(v) -> Number:
    """Normalize numpy scalars to plain Python numbers; reject NaN."""
    if isinstance(v, bool):
        raise TypeError("boolean is not a valid bound or function value")
    if isinstance(v, numbers.Integral):
        return int(v)
    if isinstance(v, Fraction):
        return v
    f = float(v)
    if math.isnan(f):
        raise ValueError("NaN is not a valid bound or function value")
    return f


def is_exact(values: Iterable[Number]) -> bool:
    """True when every value is an int or Fraction (finite infs excluded)."""
    return all(isinstance(v, (int, Fraction)) for v in values)


def half(v: Number) -> Number:
    """Exact halving: even ints stay ints, odd ints become Fractions."""
    if isinstance(v, int):
        return v // 2 if v % 2 == 0 else Fraction(v, 2)
    if isinstance(v, Fraction):
        return v / 2
    return v / 2


class _PrefixSums:
    """Range sums over one dimension's bound array, with infinities counted
    apart so a range that contains an infinite entry saturates cleanly."""

    __slots__ = ("finite", "inf_count")

    def __init__(self, values: Sequence[Number], infinite: float):
        finite = [0]
        infc = [0]
        acc: Number = 0
        cnt = 0
        for v in values:
            if v == infinite:
                cnt += 1
            else:
                acc = acc + v
            finite.append(acc)
            infc.append(cnt)
        self.finite = finite
        self.inf_count = infc

    def range_sum(self, lo: int, hi: int, infinite: float) -> Number:
        """Sum of entries ``lo..hi`` (1-based, inclusive); empty if lo > hi."""
        if lo > hi:
            return 0
        if self.inf_count[hi] - self.inf_count[lo - 1] > 0:
            return infinite
        return self.finite[hi] - self.finite[lo - 1]


@dataclass(frozen=True)
class BoundingFamily:
    """Lower/upper step bounds per dimension; each array has ``n - 1`` entries.

    ``lower[r][t]`` may be ``-inf`` and ``upper[r][t]`` may be ``+inf``;
    every position must satisfy ``lower < upper``.
    """

    domain: HypergridDomain
    lower: tuple[tuple[Number, ...], ...]
    upper: tuple[tuple[Number, ...], ...]
    _lsums: tuple[_PrefixSums, ...] = field(init=False, repr=False, compare=False)
    _usums: tuple[_PrefixSums, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n, d = self.domain.n, self.domain.d
        lower = tuple(tuple(as_number(v) for v in row) for row in self.lower)
        upper = tuple(tuple(as_number(v) for v in row) for row in self.upper)
        if len(lower) != d or len(upper) != d:
            raise ValueError(f"need {d} bound arrays per side")
        for r in range(d):
            if len(lower[r]) != n - 1 or len(upper[r]) != n - 1:
                raise ValueError(f"dimension {r + 1}: bound arrays must have length {n - 1}")
            for lo, up in zip(lower[r], upper[r]):
                if lo == INF or up == -INF:
                    raise ValueError("lower bounds cannot be +inf, upper bounds cannot be -inf")
                if not lo < up:
                    raise ValueError(f"every lower bound must be < its upper bound ({lo} vs {up})")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "_lsums", tuple(_PrefixSums(row, -INF) for row in lower))
        object.__setattr__(self, "_usums", tuple(_PrefixSums(row, INF) for row in upper))

    # -- constructors ------------------------------------------------------

    @classmethod
    def monotone(cls, n: int, d: int) -> "BoundingFamily":
        """Nondecreasing along every axis: lower 0, upper unbounded."""
        dom = HypergridDomain(n, d)
        return cls(dom, ((0,) * (n - 1),) * d, ((INF,) * (n - 1),) * d)

    @classmethod
    def lipschitz(cls, n: int, d: int, c: Number) -> "BoundingFamily":
        """Every axis step bounded by ``c`` in absolute value."""
        dom = HypergridDomain(n, d)
        c = as_number(c)
        return cls(dom, ((-c,) * (n - 1),) * d, ((c,) * (n - 1),) * d)

    @classmethod
    def constant(cls, n: int, d: int, lower: Number, upper: Number) -> "BoundingFamily":
        dom = HypergridDomain(n, d)
        lower, upper = as_number(lower), as_number(upper)
        return cls(dom, ((lower,) * (n - 1),) * d, ((upper,) * (n - 1),) * d)

    # -- predicates --------------------------------------------------------

    @property
    def is_monotonicity(self) -> bool:
        """Exactly the nondecreasing class: lower 0 and upper +inf everywhere."""
        return all(v == 0 for row in self.lower for v in row) and all(
            v == INF for row in self.upper for v in row
        )

    @property
    def is_finite(self) -> bool:
        return all(v != -INF for row in self.lower for v in row) and all(
            v != INF for row in self.upper for v in row
        )

    @property
    def is_exact(self) -> bool:
        """All finite entries are ints or Fractions."""
        finite = [v for row in self.lower for v in row if v != -INF]
        finite += [v for row in self.upper for v in row if v != INF]
        return is_exact(finite)

    # -- range sums and the quasimetric -------------------------------------

    def upper_sum(self, dim: int, lo: int, hi: int) -> Number:
        """Sum of upper bounds over steps ``lo..hi`` of ``dim`` (1-based)."""
        return self._usums[dim - 1].range_sum(lo, hi, INF)

    def lower_sum(self, dim: int, lo: int, hi: int) -> Number:
        return self._lsums[dim - 1].range_sum(lo, hi, -INF)

    def metric(self, x: GridPoint, y: GridPoint) -> Number:
        """Asymmetric path weight from ``x`` to ``y``.

        Dimensions where ``x`` exceeds ``y`` contribute their upper-bound
        sums, dimensions where ``x`` falls short contribute minus their
        lower-bound sums; the two groups are disjoint, so infinities of
        opposite signs can never collide.  ``metric(x, x) == 0``.
        """
        self.domain.require(x)
        self.domain.require(y)
        total: Number = 0
        for r in range(self.domain.d):
            xr, yr = x[r], y[r]
            if xr > yr:
                s = self._usums[r].range_sum(yr, xr - 1, INF)
            elif xr < yr:
                s = self._lsums[r].range_sum(xr, yr - 1, -INF)
                if s == -INF:
                    return INF
                s = -s
            else:
                continue
            if s == INF:
                return INF
            total = total + s
        return total

    def metric_matrix(self, points: Sequence[GridPoint]) -> list[list[Number]]:
        """All-pairs path weights for the given points."""
        return [[self.metric(x, y) for y in points] for x in points]

    def line_bounds(self, dim: int) -> tuple[tuple[Number, ...], tuple[Number, ...]]:
        """The (lower, upper) step bounds a line along ``dim`` inherits."""
        return self.lower[dim - 1], self.upper[dim - 1]


@dataclass(frozen=True)
class FunctionTable:
    """Explicit values of a function on a grid, with its declared range.

    ``values`` are stored row-major (last coordinate fastest).  The declared
    range ``(a, b)`` must contain every value; distance normalization divides
    by the width ``b - a``.
    """

    domain: HypergridDomain
    values: tuple[Number, ...]
    bounds_range: tuple[Number, Number]

    def __post_init__(self) -> None:
        values = tuple(as_number(v) for v in self.values)
        a, b = (as_number(self.bounds_range[0]), as_number(self.bounds_range[1]))
        if len(values) != self.domain.size:
            raise ValueError(f"need {self.domain.size} values, got {len(values)}")
        if any(v in (INF, -INF) for v in values):
            raise ValueError("function values must be finite")
        if values:
            lo, hi = min(values), max(values)
            if not (a <= lo and hi <= b):
                raise ValueError(f"declared range [{a}, {b}] does not contain values [{lo}, {hi}]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds_range", (a, b))

    @classmethod
    def from_values(cls, domain: HypergridDomain, values: Sequence[Number]) -> "FunctionTable":
        """Table whose declared range is the tight span of the values."""
        vals = [as_number(v) for v in values]
        return cls(domain, tuple(vals), (min(vals), max(vals)))

    @classmethod
    def line(cls, values: Sequence[Number], bounds_range=None) -> "FunctionTable":
        vals = [as_number(v) for v in values]
        rng = bounds_range if bounds_range is not None else (min(vals), max(vals))
        return cls(HypergridDomain(len(vals), 1), tuple(vals), rng)

    @property
    def range_width(self) -> Number:
        return self.bounds_range[1] - self.bounds_range[0]

    @property
    def is_exact(self) -> bool:
        return is_exact(self.values)

    def value_at(self, point: GridPoint) -> Number:
        return self.values[self.domain.point_index(point)]

    def __call__(self, point: GridPoint) -> Number:
        return self.values[self.domain.point_index(point)]

    def restrict_to_line(self, line: AxisLine) -> "FunctionTable":
        """One-dimensional view of the function on ``line``.

        Keeps the parent's declared range: the restriction is still a
        function into the same interval.
        """
        vals = tuple(self.value_at(p) for p in line.points())
        return FunctionTable(HypergridDomain(self.domain.n, 1), vals, self.bounds_range)


def _require_same_domain(f: FunctionTable, B: BoundingFamily) -> None:
    if f.domain != B.domain:
        raise ValueError(f"function domain {f.domain} does not match bounds domain {B.domain}")


def is_member(f: FunctionTable, B: BoundingFamily, method: str = "edges") -> bool:
    """Whether every axis step of ``f`` respects the bounds.

    ``method='edges'`` checks the ``d * n^(d-1) * (n-1)`` adjacent pairs;
    ``method='pairs'`` checks ``f(x) - f(y) <= metric(x, y)`` on all ordered
    pairs.  The two agree on every input (the all-pairs condition telescopes
    along axis paths), which the test suite verifies exhaustively.
    """
    _require_same_domain(f, B)
    if method == "edges":
        for dim in range(1, B.domain.d + 1):
            lower, upper = B.line_bounds(dim)
            for line in iter_lines(B.domain, dim):
                prev = f.value_at(line.point_at(1))
                for j in range(2, B.domain.n + 1):
                    cur = f.value_at(line.point_at(j))
                    step = cur - prev
                    if not (lower[j - 2] <= step <= upper[j - 2]):
                        return False
                    prev = cur
        return True
    if method == "pairs":
        pts = list(B.domain.points())
        for x in pts:
            fx = f.value_at(x)
            for y in pts:
                if x != y and fx - f.value_at(y) > B.metric(x, y):
                    return False
        return True
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SymmetrizedLine:
    """A line function shifted so its class has mirror-image step bounds."""

    table: FunctionTable
    lower: tuple[Number, ...]
    upper: tuple[Number, ...]
    offsets: tuple[Number, ...]


def symmetrize(
    f: FunctionTable, lower: Sequence[Number], upper: Sequence[Number]
) -> SymmetrizedLine:
    """Shift a line function so the step bounds become ``[-u', u']``.

    Each point is raised by half the sum of the remaining step midpoints,
    which leaves the violation score of every pair unchanged (both directed
    slacks shift by the same amount) and therefore preserves the violation
    graph, its weights, and its maximum-weight matchings.  Requires finite
    bounds; the shifted function's recorded range is recomputed from its
    values.
    """
    if f.domain.d != 1:
        raise ValueError("symmetrize applies to line functions only")
    n = f.domain.n
    lower = [as_number(v) for v in lower]
    upper = [as_number(v) for v in upper]
    if len(lower) != n - 1 or len(upper) != n - 1:
        raise ValueError(f"bound arrays must have length {n - 1}")
    if any(v == -INF for v in lower) or any(v == INF for v in upper):
        raise UnsupportedBoundsError("symmetrization requires finite bounds")

    offsets = symmetrize_offsets(lower, upper)
    g_vals = [f.values[i] + offsets[i] for i in range(n)]
    new_upper = tuple(half(u - l) for l, u in zip(lower, upper))
    new_lower = tuple(-u for u in new_upper)
    g = FunctionTable.from_values(f.domain, g_vals)
    return SymmetrizedLine(g, new_lower, new_upper, offsets)


def symmetrize_offsets(lower: Sequence[Number], upper: Sequence[Number]) -> tuple[Number, ...]:
    """Per-position shifts: suffix sums of the step-bound midpoints.

    Position ``x`` (1-based) is shifted by the sum of ``(u + l) / 2`` over
    steps ``x .. n-1``; the last position shifts by zero.
    """
    n = len(lower) + 1
    offsets = [0] * n
    acc: Number = 0
    for v in range(n - 1, 0, -1):
        acc = acc + half(upper[v - 1] + lower[v - 1])
        offsets[v - 1] = acc
    return tuple(offsets)


MetricFn = Callable[[GridPoint, GridPoint], Number]


@dataclass
class MetricAxiomReport:
    """Outcome of triangle / linearity / projection checks on point triples."""

    triples_checked: int = 0
    triangle_failures: int = 0
    linearity_failures: int = 0
    projection_failures: int = 0
    first_failure: tuple | None = None

    @property
    def ok(self) -> bool:
        return (
            self.triangle_failures == 0
            and self.linearity_failures == 0
            and self.projection_failures == 0
        )


def check_metric_axioms(
    metric: Union[BoundingFamily, MetricFn],
    triples: Iterable[tuple[GridPoint, GridPoint, GridPoint]],
) -> MetricAxiomReport:
    """Check quasimetric axioms on the given triples.

    For every triple ``(x, y, z)``: the two-leg path through ``y`` must not
    beat the direct weight; when the triple is coordinate-monotone the two
    must agree exactly; and whenever ``x`` and ``y`` share a coordinate, the
    pair projected to ``z``'s value in that coordinate must keep its weight,
    with the two projection legs agreeing as well.  Comparisons where both
    sides are ``+inf`` count as passing.
    """
    m = metric.metric if isinstance(metric, BoundingFamily) else metric
    cache: dict[tuple[GridPoint, GridPoint], Number] = {}

    def mm(a: GridPoint, b: GridPoint) -> Number:
        key = (a, b)
        v = cache.get(key)
        if v is None:
            v = m(a, b)
            cache[key] = v
        return v

    report = MetricAxiomReport()
    for x, y, z in triples:
        report.triples_checked += 1
        direct = mm(x, z)
        via = mm(x, y) + mm(y, z)
        if not direct <= via:
            report.triangle_failures += 1
            if report.first_failure is None:
                report.first_failure = ("triangle", x, y, z, direct, via)
        if _is_monotone_triple(x, y, z) and direct != via:
            report.linearity_failures += 1
            if report.first_failure is None:
                report.first_failure = ("linearity", x, y, z, direct, via)
        for r in range(len(x)):
            if x[r] == y[r] and z[r] != x[r]:
                xp = x[:r] + (z[r],) + x[r + 1 :]
                yp = y[:r] + (z[r],) + y[r + 1 :]
                if mm(x, y) != mm(xp, yp) or mm(x, xp) != mm(y, yp):
                    report.projection_failures += 1
                    if report.first_failure is None:
                        report.first_failure = ("projection", x, y, z, r + 1)
                    break
    return report


def _is_monotone_triple(x: GridPoint, y: GridPoint, z: GridPoint) -> bool:
    return all(xr <= yr <= zr or xr >= yr >= zr for xr, yr, zr in zip(x, y, z))
