"""Text formats for functions, bound families, and distributions.

All three formats are whitespace-separated and 1-based-coordinate friendly:

* function file: header ``n d a b``, then ``n^d`` values row-major
  (last coordinate fastest);
* bounds file: for each dimension a line of ``n - 1`` lower bounds followed
  by a line of ``n - 1`` upper bounds (no header; the shape is inferred);
  the tokens ``inf`` / ``-inf`` are allowed;
* distribution file: header ``n d N``, then ``d`` lines of ``n`` integer
  masses, each line summing to ``N``.

Integer-looking tokens are parsed as ints so exact arithmetic survives a
round-trip through disk.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Union

from .bounds import BoundingFamily, FunctionTable, Number
from .distributions import ProductDistribution
from .grid import HypergridDomain

PathLike = Union[str, Path]


def parse_number(token: str) -> Number:
    low = token.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    if low in ("-inf", "-infinity"):
        return -math.inf
    try:
        return int(token)
    except ValueError:
        pass
    if "/" in token:
        return Fraction(token)
    return float(token)


def format_number(v: Number) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return repr(v) if isinstance(v, float) else str(v)


def _tokens(path: PathLike) -> list[list[str]]:
    lines = Path(path).read_text().splitlines()
    return [line.split() for line in lines if line.strip() and not line.lstrip().startswith("#")]


def read_function(path: PathLike) -> FunctionTable:
    rows = _tokens(path)
    if not rows or len(rows[0]) != 4:
        raise ValueError(f"{path}: expected header 'n d a b'")
    n, d = int(rows[0][0]), int(rows[0][1])
    a, b = parse_number(rows[0][2]), parse_number(rows[0][3])
    values = [parse_number(tok) for row in rows[1:] for tok in row]
    domain = HypergridDomain(n, d)
    if len(values) != domain.size:
        raise ValueError(f"{path}: expected {domain.size} values, found {len(values)}")
    return FunctionTable(domain, tuple(values), (a, b))


def write_function(path: PathLike, f: FunctionTable) -> None:
    a, b = f.bounds_range
    out = [f"{f.domain.n} {f.domain.d} {format_number(a)} {format_number(b)}"]
    n = f.domain.n
    for start in range(0, len(f.values), n):
        out.append(" ".join(format_number(v) for v in f.values[start : start + n]))
    Path(path).write_text("\n".join(out) + "\n")


def read_bounds(path: PathLike) -> BoundingFamily:
    """Read a bounds file: alternating lower/upper lines, one pair per dim.

    The side length and dimension come from the line count and width, so
    grids need ``n >= 2`` to be representable.
    """
    body = _tokens(path)
    if not body or len(body) % 2 != 0:
        raise ValueError(f"{path}: expected an even number of bound lines")
    d = len(body) // 2
    n = len(body[0]) + 1
    if n < 2:
        raise ValueError(f"{path}: bound lines must carry at least one value")
    lower, upper = [], []
    for r in range(d):
        lo = [parse_number(tok) for tok in body[2 * r]]
        up = [parse_number(tok) for tok in body[2 * r + 1]]
        if len(lo) != n - 1 or len(up) != n - 1:
            raise ValueError(f"{path}: dimension {r + 1} lines must have {n - 1} entries")
        lower.append(tuple(lo))
        upper.append(tuple(up))
    return BoundingFamily(HypergridDomain(n, d), tuple(lower), tuple(upper))


def write_bounds(path: PathLike, B: BoundingFamily) -> None:
    if B.domain.n < 2:
        raise ValueError("bounds files need a side length of at least 2")
    out = []
    for r in range(B.domain.d):
        out.append(" ".join(format_number(v) for v in B.lower[r]))
        out.append(" ".join(format_number(v) for v in B.upper[r]))
    Path(path).write_text("\n".join(out) + "\n")


def read_distribution(path: PathLike) -> ProductDistribution:
    rows = _tokens(path)
    if not rows or len(rows[0]) != 3:
        raise ValueError(f"{path}: expected header 'n d N'")
    n, d, denom = int(rows[0][0]), int(rows[0][1]), int(rows[0][2])
    body = rows[1:]
    if len(body) != d:
        raise ValueError(f"{path}: expected {d} mass lines, found {len(body)}")
    masses = []
    for row in body:
        if len(row) != n:
            raise ValueError(f"{path}: each mass line must have {n} entries")
        masses.append(tuple(int(tok) for tok in row))
    return ProductDistribution(HypergridDomain(n, d), tuple(masses), denom)


def write_distribution(path: PathLike, dist: ProductDistribution) -> None:
    out = [f"{dist.domain.n} {dist.domain.d} {dist.denominator}"]
    for row in dist.masses:
        out.append(" ".join(str(q) for q in row))
    Path(path).write_text("\n".join(out) + "\n")
