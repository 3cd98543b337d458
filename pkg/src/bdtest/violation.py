"""Violated pairs, exact maximum-weight matching, and L1 distance oracles.

A pair ``(x, y)`` is violated when one of its two directed slacks
``f(x) - f(y) - m(x, y)`` is positive; the violation score is the larger
slack.  The total weight of a maximum-weight matching in the graph of
violated pairs equals the unnormalized L1 distance from the bounded-step
class, which is what makes desk-scale exact verification possible: the
matching is computable, and for monotonicity on a line an independent
isotonic-regression oracle must produce the same number.

All lemma-level quantities here are unnormalized sums; dividing by the
range width and the point count happens only in :func:`l1_distance`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import networkx as nx

from .bounds import BoundingFamily, FunctionTable, Number, is_exact, is_member
from .errors import CapacityError, DegenerateRangeError, PreconditionError
from .grid import GridPoint, HypergridDomain, all_lines, iter_lines

MetricLike = Union[BoundingFamily, Callable[[GridPoint, GridPoint], Number]]

# Pair scans are quadratic in the point count; keep them desk-scale.
DEFAULT_SCAN_CAP = 4096
# Hard ceiling for the subset dynamic program (2^V states).
DP_CAP = 24
# Below this the DP is cheap enough to prefer over the general solver.
DP_AUTO_MAX = 14


def _metric_fn(metric: MetricLike) -> Callable[[GridPoint, GridPoint], Number]:
    return metric.metric if isinstance(metric, BoundingFamily) else metric


def violation_score(f: FunctionTable, metric: MetricLike, x: GridPoint, y: GridPoint) -> Number:
    """Larger of the two directed slacks of the pair; positive iff violated.

    When one direction exceeds its path weight, the (quasimetric) triangle
    inequality through ``m(x, x) = 0`` forces the other direction strictly
    negative, so the max picks out exactly the offending slack.  A positive
    score is always finite: a violated direction has finite path weight.
    """
    if x == y:
        raise ValueError("violation score requires two distinct points")
    m = _metric_fn(metric)
    fx, fy = f.value_at(x), f.value_at(y)
    return max(fx - fy - m(x, y), fy - fx - m(y, x))


@dataclass(frozen=True)
class ViolationGraph:
    """All violated pairs of a function, weighted by their scores.

    ``edges`` hold ``(x, y, score)`` with ``x`` lexicographically before
    ``y``; every score is strictly positive and finite.
    """

    domain: HypergridDomain
    edges: tuple[tuple[GridPoint, GridPoint, Number], ...]

    @property
    def support(self) -> tuple[GridPoint, ...]:
        """Vertices incident to at least one violated pair, in lex order."""
        seen = set()
        for x, y, _ in self.edges:
            seen.add(x)
            seen.add(y)
        return tuple(sorted(seen))

    @property
    def is_empty(self) -> bool:
        return not self.edges


def build_violation_graph(
    f: FunctionTable, metric: MetricLike, max_points: int = DEFAULT_SCAN_CAP
) -> ViolationGraph:
    """Scan all point pairs and collect the violated ones.

    The graph is empty exactly when the function belongs to the class.
    Raises :class:`CapacityError` when the quadratic scan would exceed
    ``max_points`` grid points.
    """
    if f.domain.size > max_points:
        raise CapacityError(
            f"violation scan over {f.domain.size} points exceeds the cap of {max_points}"
        )
    m = _metric_fn(metric)
    if isinstance(metric, BoundingFamily) and f.domain != metric.domain:
        raise ValueError("function and bounds live on different domains")
    pts = list(f.domain.points())
    vals = [f.value_at(p) for p in pts]
    edges = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            x, y = pts[i], pts[j]
            score = max(vals[i] - vals[j] - m(x, y), vals[j] - vals[i] - m(y, x))
            if score > 0:
                if score == math.inf:
                    raise AssertionError(f"infinite violation score for pair {x}, {y}")
                edges.append((x, y, score))
    return ViolationGraph(f.domain, tuple(edges))


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint violated pairs and its total score."""

    edges: tuple[tuple[GridPoint, GridPoint, Number], ...]
    weight: Number

    def __post_init__(self) -> None:
        seen = set()
        for x, y, _ in self.edges:
            if x in seen or y in seen:
                raise ValueError("matching edges must be vertex-disjoint")
            seen.add(x)
            seen.add(y)

    @property
    def size(self) -> int:
        return len(self.edges)


def max_weight_matching(graph: ViolationGraph, method: str = "auto") -> Matching:
    """Exact maximum-weight matching, fewest edges among ties.

    ``method='dp'`` runs a subset dynamic program over the non-isolated
    vertices (exact for any number type, capped at 24 vertices).
    ``method='blossom'`` delegates to networkx's general-graph solver; for
    int/Fraction weights a lexicographic rescaling makes the fewest-edges
    tie-break exact there too, while float weights get whatever optimum the
    solver returns.  ``method='auto'`` picks the DP for small supports and
    the general solver beyond.
    """
    support = graph.support
    if method == "auto":
        method = "dp" if len(support) <= DP_AUTO_MAX else "blossom"
    if method == "dp":
        return _matching_dp(graph, support)
    if method == "blossom":
        return _matching_blossom(graph, support)
    raise ValueError(f"unknown matching method {method!r}")


def matching_weight(f: FunctionTable, metric: MetricLike, method: str = "auto") -> Number:
    """Unnormalized L1 distance: the weight of the best matching."""
    return max_weight_matching(build_violation_graph(f, metric), method=method).weight


def _matching_dp(graph: ViolationGraph, support: Sequence[GridPoint]) -> Matching:
    nv = len(support)
    if nv > DP_CAP:
        raise CapacityError(f"subset DP supports at most {DP_CAP} vertices, graph has {nv}")
    if nv == 0:
        return Matching((), 0)
    index = {p: i for i, p in enumerate(support)}
    adj: list[list[tuple[int, Number]]] = [[] for _ in range(nv)]
    for x, y, w in graph.edges:
        i, j = index[x], index[y]
        adj[i].append((j, w))
        adj[j].append((i, w))

    size = 1 << nv
    # dp holds (weight, -edge_count); lexicographic max gives the
    # fewest-edges tie-break for free.
    dp: list[tuple[Number, int]] = [(0, 0)] * size
    choice: list[int] = [-1] * size
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << low)
        best = dp[rest]
        best_j = -1
        for j, w in adj[low]:
            bit = 1 << j
            if mask & bit:
                base = dp[rest ^ bit]
                cand = (base[0] + w, base[1] - 1)
                if cand > best:
                    best = cand
                    best_j = j
        dp[mask] = best
        choice[mask] = best_j

    edges = []
    weights: dict[tuple[int, int], Number] = {}
    for x, y, w in graph.edges:
        i, j = index[x], index[y]
        weights[(min(i, j), max(i, j))] = w
    mask = size - 1
    while mask:
        low = (mask & -mask).bit_length() - 1
        j = choice[mask]
        if j < 0:
            mask ^= 1 << low
        else:
            a, b = min(low, j), max(low, j)
            edges.append((support[a], support[b], weights[(a, b)]))
            mask ^= (1 << low) | (1 << j)
    edges.sort()
    return Matching(tuple(edges), dp[size - 1][0])


def _matching_blossom(graph: ViolationGraph, support: Sequence[GridPoint]) -> Matching:
    if not graph.edges:
        return Matching((), 0)
    weights = [w for _, _, w in graph.edges]
    exact = is_exact(weights)
    if exact:
        denom = math.lcm(*(w.denominator if isinstance(w, Fraction) else 1 for w in weights))
        ints = [int(w * denom) for w in weights]
        # Lexicographic objective: maximize total weight, then prefer fewer
        # edges.  Scaling by more than the largest possible matching size
        # makes one combined integer objective do both.
        scale = len(support) + 1
        solver_w = [w * scale - 1 for w in ints]
    else:
        solver_w = weights
    g = nx.Graph()
    g.add_nodes_from(support)
    for (x, y, _), w in zip(graph.edges, solver_w):
        g.add_edge(x, y, weight=w)
    mate = nx.max_weight_matching(g, maxcardinality=False)
    lookup = {(x, y): w for x, y, w in graph.edges}
    edges = []
    total: Number = 0
    for a, b in mate:
        key = (a, b) if (a, b) in lookup else (b, a)
        w = lookup[key]
        edges.append((key[0], key[1], w))
        total = total + w
    edges.sort()
    return Matching(tuple(edges), total)


def isotonic_l1_oracle(f: FunctionTable, weights: Sequence[Number] | None = None) -> Number:
    """Exact weighted L1 cost of the best nondecreasing fit on a line.

    Dynamic program over candidate output values restricted to the multiset
    of ``f``'s own values, which always contains an optimal weighted-L1
    isotonic fit.  Serves as the independent cross-check for the
    matching-based distance under monotonicity: both must produce the same
    unnormalized total.
    """
    if f.domain.d != 1:
        raise ValueError("isotonic oracle applies to line functions only")
    n = f.domain.n
    vals = list(f.values)
    w = [1] * n if weights is None else [v for v in weights]
    if len(w) != n:
        raise ValueError(f"need {n} weights, got {len(w)}")
    cand = sorted(set(vals))
    prev = [w[0] * abs(vals[0] - c) for c in cand]
    for k in range(1, len(cand)):
        if prev[k - 1] < prev[k]:
            prev[k] = prev[k - 1]
    for i in range(1, n):
        cur = [w[i] * abs(vals[i] - c) + prev[k] for k, c in enumerate(cand)]
        for k in range(1, len(cand)):
            if cur[k - 1] < cur[k]:
                cur[k] = cur[k - 1]
        prev = cur
    return prev[-1]


def l1_distance(
    f: FunctionTable,
    B: BoundingFamily,
    dist=None,
    *,
    max_points: int = DEFAULT_SCAN_CAP,
    method: str = "auto",
) -> Number:
    """Normalized L1 distance of ``f`` from the class of ``B``.

    Uniform weighting: matching weight over ``range_width * n^d``.  Under a
    rational product distribution the computation moves to the refined grid
    whose uniform distance equals the weighted one, so the same matching
    oracle applies; the refined grid must fit ``max_points``.  Exact inputs
    produce an exact Fraction.
    """
    r = f.range_width
    if r == 0:
        if is_member(f, B):
            return 0
        raise DegenerateRangeError("function has zero declared range width but is not in the class")
    if dist is None:
        if f.domain.size > max_points:
            raise CapacityError(f"{f.domain.size} points exceed the scan cap {max_points}")
        return _normalize(matching_weight(f, B, method=method), r, f.domain.size)
    from .distributions import BloatedGrid

    bg = BloatedGrid(dist)
    if bg.target.size > max_points:
        raise CapacityError(
            f"refined grid has {bg.target.size} points, above the cap of {max_points}"
        )
    f_ext = bg.extend_function(f, max_points=max_points)
    weight = max_weight_matching(
        build_violation_graph(f_ext, bg.extend_metric(B), max_points=max_points), method=method
    ).weight
    return _normalize(weight, r, bg.target.size)


def _normalize(weight: Number, r: Number, count: int) -> Number:
    if isinstance(weight, (int, Fraction)) and isinstance(r, (int, Fraction)):
        return Fraction(weight) / (Fraction(r) * count)
    return weight / (r * count)


@dataclass(frozen=True)
class DimensionReductionReport:
    """Line-wise matching totals against half the full-grid total."""

    line_total: Number
    full_weight: Number
    ok: bool

    @property
    def margin(self) -> Number:
        return self.line_total - self.full_weight / 2


def dimension_reduction_check(
    f: FunctionTable, B: BoundingFamily, *, method: str = "auto"
) -> DimensionReductionReport:
    """Verify that line restrictions carry at least half the violation mass.

    Sums the exact matching weight over every axis-parallel line and
    compares against half the full-grid matching weight; both sides are
    unnormalized.
    """
    if f.domain != B.domain:
        raise ValueError("function and bounds live on different domains")
    total: Number = 0
    line_domain = HypergridDomain(f.domain.n, 1)
    for line in all_lines(f.domain):
        lower, upper = B.line_bounds(line.dim)
        line_B = BoundingFamily(line_domain, (lower,), (upper,))
        total = total + matching_weight(f.restrict_to_line(line), line_B, method=method)
    full = matching_weight(f, B, method=method)
    ok = 2 * total >= full
    return DimensionReductionReport(total, full, ok)


@dataclass(frozen=True)
class CrossPairReport:
    """Matching weight with and without pairs straddling one dimension."""

    dim: int
    unrestricted_weight: Number
    restricted_weight: Number

    @property
    def ok(self) -> bool:
        return self.restricted_weight == self.unrestricted_weight


def no_cross_pair_check(
    f: FunctionTable, B: BoundingFamily, dim: int, *, method: str = "auto"
) -> CrossPairReport:
    """Check that forbidding pairs split across ``dim`` costs no weight.

    Requires (and verifies) that no pair along a ``dim``-line is violated;
    under that hypothesis some maximum-weight matching avoids pairs whose
    ``dim`` coordinates differ, so the restricted optimum must match the
    unrestricted one.
    """
    if not 1 <= dim <= f.domain.d:
        raise ValueError(f"dimension {dim} out of range")
    line_domain = HypergridDomain(f.domain.n, 1)
    lower, upper = B.line_bounds(dim)
    line_B = BoundingFamily(line_domain, (lower,), (upper,))
    for line in iter_lines(f.domain, dim):
        if not build_violation_graph(f.restrict_to_line(line), line_B).is_empty:
            raise PreconditionError(f"function has violations along dimension-{dim} lines")
    graph = build_violation_graph(f, B)
    unrestricted = max_weight_matching(graph, method=method).weight
    kept = tuple(e for e in graph.edges if e[0][dim - 1] == e[1][dim - 1])
    restricted = max_weight_matching(ViolationGraph(f.domain, kept), method=method).weight
    return CrossPairReport(dim, unrestricted, restricted)
