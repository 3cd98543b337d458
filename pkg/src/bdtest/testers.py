"""Randomized one-sided testers for bounded-step function classes.

The single-line tester shifts the class to mirror-image step bounds
(offsets computed from the bounds alone, so no extra queries), samples one
pair from the set of candidate pairs whose gap can still host a violation,
and rejects only on a positive violation score.  Members are therefore
never rejected; far functions are caught with probability at least
``eps / (4C)`` per shot, where ``C`` is the ratio of the largest to the
smallest shifted step bound.

Grid testers repeat the line test on uniformly random axis-parallel lines.
Under a rational product distribution the same loop runs conceptually on
the uniform refinement of the grid: lines are drawn by weighting anchors
with their coordinate masses and pairs by the mass product of their
endpoints, while each refined query still costs one real query.  With
uniform masses the two code paths consume identical random draws, so the
weighted tester with a trivial distribution reproduces the uniform tester
verdict for verdict.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from .bounds import (
    BoundingFamily,
    FunctionTable,
    Number,
    as_number,
    half,
    symmetrize_offsets,
)
from .distributions import ProductDistribution
from .errors import UnsupportedBoundsError
from .grid import GridPoint

INF = math.inf

# Relative slack for violation checks on floating-point inputs; exact
# (int/Fraction) scores are compared against zero outright.
FLOAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TesterConfig:
    """Knobs shared by the grid testers.

    ``trials`` overrides the default iteration count; ``confidence`` is the
    target rejection probability for far inputs that the default count is
    calibrated for.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    epsilon: float
    p: int = 1
    trials: int | None = None
    seed: int = 0
    confidence: float = 2 / 3

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.p not in (1, 2):
            raise ValueError(f"p must be 1 or 2, got {self.p}")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials override must be positive")
        if not 0 < self.confidence < 1:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one tester run; rejections always carry a witness pair."""

    decision: str
    witness: tuple[GridPoint, GridPoint] | None
    witness_score: Number | None
    queries_used: int
    iterations: int

    def __post_init__(self) -> None:
        if self.decision not in ("accept", "reject"):
            raise ValueError(f"decision must be accept or reject, got {self.decision!r}")
        if self.decision == "reject" and self.witness is None:
            raise ValueError("a rejection must carry a witness pair")

    @property
    def rejected(self) -> bool:
        return self.decision == "reject"


def default_iterations(epsilon: float, d: int, C: float, confidence: float = 2 / 3) -> int:
    """Iteration count meeting ``confidence`` rejection for far inputs.

    One iteration rejects an ``epsilon``-far function with probability at
    least ``epsilon / (8 d C)`` (half the per-line bound, through the
    line-restriction argument), so ``ceil(8 C d ln(1/(1-confidence)) /
    epsilon)`` pushes the overall rejection probability to ``confidence``;
    the default 2/3 gives the ``ln 3`` budget.
    """
    return math.ceil(8 * float(C) * d * math.log(1 / (1 - confidence)) / epsilon)


def bound_ratio(B: BoundingFamily) -> Number:
    """Ratio of the largest to the smallest shifted step bound across dims."""
    shifted = [half(u - l) for dim in range(1, B.domain.d + 1)
               for l, u in zip(*B.line_bounds(dim))]
    if not shifted:
        return 1
    if any(v == INF for v in shifted):
        raise UnsupportedBoundsError("bound ratio requires finite step bounds")
    u_max, u_min = max(shifted), min(shifted)
    if _exactish(u_max, u_min):
        return Fraction(u_max) / Fraction(u_min)
    return float(u_max) / float(u_min)


class LinePairSet:
    """Candidate pairs ``x < y`` on a line with gap at most ``r / u_min``.

    Pairs are weighted by the product of their endpoint masses (all-ones
    masses make the set uniform).  Sampling draws a single integer and
    decodes it against per-start cumulative weights, so the set is never
    materialized.
    """

    def __init__(self, n: int, gmax: int, masses: Sequence[int] | None = None):
        if n < 1:
            raise ValueError("line length must be positive")
        self.n = n
        self.gmax = max(0, min(n - 1, gmax))
        self.masses = tuple(int(q) for q in masses) if masses is not None else (1,) * n
        if len(self.masses) != n:
            raise ValueError(f"need {n} masses, got {len(self.masses)}")
        starts = []
        acc = 0
        for s in range(1, n + 1):
            hi = min(n, s + self.gmax)
            row = 0
            if self.masses[s - 1] > 0:
                for t in range(s + 1, hi + 1):
                    row += self.masses[s - 1] * self.masses[t - 1]
            acc += row
            starts.append(acc)
        self._start_cum = starts
        self.total_weight = acc

    @classmethod
    def from_radius(
        cls, n: int, r: Number, u_min: Number, masses: Sequence[int] | None = None
    ) -> "LinePairSet":
        """Pair set for range width ``r`` and smallest shifted bound ``u_min``."""
        if u_min == INF or u_min <= 0:
            raise UnsupportedBoundsError(
                f"pair set needs a positive finite minimum upper bound, got {u_min}"
            )
        if r < 0:
            raise ValueError(f"range width must be nonnegative, got {r}")
        ratio = Fraction(r) / Fraction(u_min) if _exactish(r, u_min) else r / u_min
        return cls(n, math.floor(ratio), masses)

    @property
    def size(self) -> int:
        """Number of distinct pairs (ignoring masses)."""
        return sum(max(0, min(self.n, s + self.gmax) - s) for s in range(1, self.n + 1))

    @property
    def is_empty(self) -> bool:
        return self.total_weight == 0

    def decode(self, k: int) -> tuple[int, int]:
        """Pair at cumulative-weight position ``k`` in ``[0, total_weight)``."""
        if not 0 <= k < self.total_weight:
            raise ValueError(f"index {k} outside [0, {self.total_weight})")
        s = bisect_right(self._start_cum, k) + 1
        rem = k - (self._start_cum[s - 2] if s >= 2 else 0)
        ws = self.masses[s - 1]
        for t in range(s + 1, min(self.n, s + self.gmax) + 1):
            block = ws * self.masses[t - 1]
            if rem < block:
                return s, t
            rem -= block
        raise AssertionError("cumulative weights out of sync")

    def sample(self, rng: np.random.Generator) -> tuple[int, int]:
        """One pair, chosen with probability proportional to its weight."""
        if self.is_empty:
            raise ValueError("cannot sample from an empty pair set")
        return self.decode(int(rng.integers(self.total_weight)))

    def pairs(self):
        for s in range(1, self.n + 1):
            if self.masses[s - 1] == 0:
                continue
            for t in range(s + 1, min(self.n, s + self.gmax) + 1):
                if self.masses[t - 1] > 0:
                    yield s, t

    def __contains__(self, pair: tuple[int, int]) -> bool:
        s, t = pair
        return (
            1 <= s < t <= self.n
            and t - s <= self.gmax
            and self.masses[s - 1] > 0
            and self.masses[t - 1] > 0
        )


def _exactish(*vals: Number) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in vals)


def line_pair_set(n: int, r: Number, u_min: Number) -> LinePairSet:
    """Uniform candidate-pair set for a line; see :class:`LinePairSet`."""
    return LinePairSet.from_radius(n, r, u_min)


LineAccess = Union[FunctionTable, Callable[[int], Number]]
GridAccess = Union[FunctionTable, Callable[[GridPoint], Number]]


class _LinePlan:
    """Per-dimension precomputation: offsets, shifted bounds, pair sampler."""

    def __init__(
        self,
        lower: Sequence[Number],
        upper: Sequence[Number],
        r: Number,
        masses: Sequence[int] | None,
    ):
        lower = [as_number(v) for v in lower]
        upper = [as_number(v) for v in upper]
        if any(v == -INF for v in lower) or any(v == INF for v in upper):
            raise UnsupportedBoundsError("grid testers require finite step bounds")
        self.offsets = symmetrize_offsets(lower, upper)
        self.shifted = [half(u - l) for l, u in zip(lower, upper)]
        self.u_min = min(self.shifted) if self.shifted else 1
        self.u_max = max(self.shifted) if self.shifted else 1
        prefix: list[Number] = [0]
        acc: Number = 0
        for u in self.shifted:
            acc = acc + u
            prefix.append(acc)
        self._prefix = prefix
        n = len(lower) + 1
        self.pair_set = LinePairSet.from_radius(n, r, self.u_min, masses)

    def gap_weight(self, s: int, t: int) -> Number:
        """Sum of shifted bounds over steps ``s .. t-1``."""
        return self._prefix[t - 1] - self._prefix[s - 1]

    def score(self, vs: Number, vt: Number, s: int, t: int) -> Number:
        """Violation score of positions ``s < t`` given their raw values."""
        gs = vs + self.offsets[s - 1]
        gt = vt + self.offsets[t - 1]
        diff = gs - gt
        if diff < 0:
            diff = -diff
        return diff - self.gap_weight(s, t)


def _is_violation(score: Number, scale: float) -> bool:
    if isinstance(score, (int, Fraction)):
        return score > 0
    return score > FLOAT_TOLERANCE * scale


def _line_access(f: LineAccess, n: int | None, value_range) -> tuple[Callable, int, tuple]:
    if isinstance(f, FunctionTable):
        if f.domain.d != 1:
            raise ValueError("line tester needs a one-dimensional function")
        return (lambda j: f.values[j - 1]), f.domain.n, f.bounds_range
    if n is None or value_range is None:
        raise ValueError("callable access requires explicit n and value_range")
    return f, n, (as_number(value_range[0]), as_number(value_range[1]))


class LineTesterPlan:
    """Reusable one-shot line tester with all precomputation done once.

    Building the shifted bounds and the candidate pair set costs
    ``O(n * gap)``; each :meth:`run` afterwards costs one integer draw, two
    point queries, and an O(1) score, which is what makes mass single-shot
    estimation cheap.
    """

    def __init__(
        self,
        lower: Sequence[Number],
        upper: Sequence[Number],
        *,
        value_range: tuple[Number, Number],
        masses: Sequence[int] | None = None,
    ):
        a, b = as_number(value_range[0]), as_number(value_range[1])
        self.n = len(lower) + 1
        self.value_range = (a, b)
        self._plan = _LinePlan(lower, upper, b - a, masses)
        self._scale = max(1.0, abs(float(a)), abs(float(b)))

    @property
    def pair_set(self) -> LinePairSet:
        return self._plan.pair_set

    def run(self, f: LineAccess, rng: np.random.Generator | int | None = None) -> Verdict:
        access, length, _ = _line_access(f, self.n, self.value_range)
        if length != self.n:
            raise ValueError(f"plan built for n={self.n}, function has n={length}")
        rng = _as_rng(rng)
        if self._plan.pair_set.is_empty:
            return Verdict("accept", None, None, 0, 1)
        s, t = self._plan.pair_set.sample(rng)
        vs, vt = access(s), access(t)
        score = self._plan.score(vs, vt, s, t)
        if _is_violation(score, self._scale):
            return Verdict("reject", ((s,), (t,)), score, 2, 1)
        return Verdict("accept", None, None, 2, 1)


def line_tester(
    f: LineAccess,
    lower: Sequence[Number],
    upper: Sequence[Number],
    rng: np.random.Generator | int | None = None,
    *,
    n: int | None = None,
    value_range: tuple[Number, Number] | None = None,
) -> Verdict:
    """One-shot tester for a line function under finite step bounds.

    Queries exactly one sampled pair (2 point queries), so a member is never
    rejected and an ``eps``-far function is rejected with probability at
    least ``eps / (4C)``.  The candidate-pair radius uses the declared range
    width of the unshifted function; an empty candidate set accepts without
    querying.  For repeated runs on one instance build a
    :class:`LineTesterPlan` once instead.
    """
    _, _, rng_range = _line_access(f, n, value_range)
    plan = LineTesterPlan(lower, upper, value_range=rng_range)
    return plan.run(f, rng)


def _as_rng(rng: np.random.Generator | int | None, seed: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng(seed)
    return np.random.default_rng(rng)


def _grid_access(f: GridAccess, B: BoundingFamily) -> Callable[[GridPoint], Number]:
    if isinstance(f, FunctionTable):
        if f.domain != B.domain:
            raise ValueError("function and bounds live on different domains")
        return f.value_at
    return f


def _run_grid_tester(
    f: GridAccess,
    B: BoundingFamily,
    dist: ProductDistribution | None,
    epsilon: float,
    trials: int | None,
    rng: np.random.Generator,
    value_range: tuple[Number, Number] | None,
    confidence: float = 2 / 3,
) -> Verdict:
    if dist is not None and dist.domain != B.domain:
        raise ValueError("distribution and bounds live on different domains")
    access = _grid_access(f, B)
    if isinstance(f, FunctionTable):
        a, b = f.bounds_range
    elif value_range is not None:
        a, b = as_number(value_range[0]), as_number(value_range[1])
    else:
        raise ValueError("callable access requires an explicit value_range")
    n, d = B.domain.n, B.domain.d
    r = b - a
    scale = max(1.0, abs(float(a)), abs(float(b)))

    plans = []
    for dim in range(1, d + 1):
        lower, upper = B.line_bounds(dim)
        masses = dist.masses[dim - 1] if dist is not None else None
        plans.append(_LinePlan(lower, upper, r, masses))
    u_max = max(p.u_max for p in plans)
    u_min = min(p.u_min for p in plans)
    C = float(u_max) / float(u_min)
    t = trials if trials is not None else default_iterations(epsilon, d, C, confidence)

    # All randomness is drawn up front as integers, one block per stream:
    # the draw sequence is then a pure function of (seed, t, shapes), and a
    # trivial distribution consumes exactly the same draws as the uniform
    # tester, making the two replay identically under one seed.
    marginal_n = dist.denominator if dist is not None else n
    dim_draws = rng.integers(0, d, size=t)
    anchor_draws = [rng.integers(0, marginal_n, size=t) for _ in range(d)]
    pair_draws = [
        rng.integers(0, p.pair_set.total_weight, size=t) if not p.pair_set.is_empty else None
        for p in plans
    ]

    queries = 0
    for i in range(t):
        dim = int(dim_draws[i]) + 1
        plan = plans[dim - 1]
        if pair_draws[dim - 1] is None:
            continue
        s, tt = plan.pair_set.decode(int(pair_draws[dim - 1][i]))
        coords = []
        for j in range(1, d + 1):
            if j == dim:
                coords.append(0)
            elif dist is None:
                coords.append(int(anchor_draws[j - 1][i]) + 1)
            else:
                coords.append(dist.segment_of(j, int(anchor_draws[j - 1][i]) + 1))
        coords[dim - 1] = s
        p1 = tuple(coords)
        coords[dim - 1] = tt
        p2 = tuple(coords)
        v1, v2 = access(p1), access(p2)
        queries += 2
        score = plan.score(v1, v2, s, tt)
        if _is_violation(score, scale):
            return Verdict("reject", (p1, p2), score, queries, i + 1)
    return Verdict("accept", None, None, queries, t)


def hypergrid_tester(
    f: GridAccess,
    B: BoundingFamily,
    cfg: TesterConfig,
    rng: np.random.Generator | int | None = None,
    *,
    value_range: tuple[Number, Number] | None = None,
) -> Verdict:
    """Repeatedly test a uniformly random axis-parallel line.

    Runs ``cfg.trials`` iterations when overridden, otherwise the default
    count from :func:`default_iterations`; rejects as soon as any sampled
    pair is violated.  Uses exactly two point queries per iteration.
    """
    rng = _as_rng(rng, cfg.seed)
    return _run_grid_tester(f, B, None, cfg.epsilon, cfg.trials, rng, value_range, cfg.confidence)


def product_tester(
    f: GridAccess,
    B: BoundingFamily,
    dist: ProductDistribution,
    cfg: TesterConfig,
    rng: np.random.Generator | int | None = None,
    *,
    value_range: tuple[Number, Number] | None = None,
) -> Verdict:
    """Grid tester under a rational product distribution.

    Equivalent to running the uniform tester on the refined grid where the
    distribution becomes uniform: anchors are drawn by coordinate mass and
    candidate pairs by endpoint mass product, restricted to pairs whose
    source coordinates differ by at most the candidate radius (pairs inside
    one refined block can never be violated and are skipped outright).
    Every refined query translates to a single real query.
    """
    rng = _as_rng(rng, cfg.seed)
    return _run_grid_tester(f, B, dist, cfg.epsilon, cfg.trials, rng, value_range, cfg.confidence)


def l2_tester(
    f: GridAccess,
    B: BoundingFamily,
    cfg: TesterConfig,
    rng: np.random.Generator | int | None = None,
    *,
    dist: ProductDistribution | None = None,
    value_range: tuple[Number, Number] | None = None,
) -> Verdict:
    """L2-proximity tester: runs the L1 machinery at budget ``epsilon**2``.

    A function that is ``eps``-far in L2 is at least ``eps**2``-far in L1,
    so the squared budget carries the one-sided guarantee over.
    """
    rng = _as_rng(rng, cfg.seed)
    inner = cfg.epsilon**2
    return _run_grid_tester(f, B, dist, inner, cfg.trials, rng, value_range, cfg.confidence)


def monotonicity_pair_tester(
    f: LineAccess,
    rng: np.random.Generator | int | None = None,
    *,
    n: int | None = None,
) -> Verdict:
    """Dyadic-gap pair check against the nondecreasing class on a line.

    Draws a gap ``2^k`` (``k`` uniform over the powers that fit) and a
    uniform valid start, then rejects iff the pair decreases.  Complete by
    construction; soundness is only measured empirically, with no claimed
    constant.
    """
    if isinstance(f, FunctionTable):
        if f.domain.d != 1:
            raise ValueError("pair tester needs a one-dimensional function")
        access, length = (lambda j: f.values[j - 1]), f.domain.n
    else:
        if n is None:
            raise ValueError("callable access requires an explicit n")
        access, length = f, n
    if length < 2:
        return Verdict("accept", None, None, 0, 1)
    rng = _as_rng(rng)
    kmax = int(math.floor(math.log2(length - 1)))
    k = int(rng.integers(kmax + 1))
    gap = 1 << k
    s = int(rng.integers(1, length - gap + 1))
    t = s + gap
    vs, vt = access(s), access(t)
    diff = vs - vt
    scale = max(1.0, abs(float(vs)), abs(float(vt)))
    if _is_violation(diff, scale):
        return Verdict("reject", ((s,), (t,)), diff, 2, 1)
    return Verdict("accept", None, None, 2, 1)
