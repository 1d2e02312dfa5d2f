"""Exact spacetime geometry and the shared fixed-point clock.

Coordinates and times supplied by scenarios are exact rationals. Everything the
simulator schedules is an integer count of 2**-P time units ("fixed time"), and
every travel time in the project comes from :func:`distance`, so an honest
party's expected arrival time and the engine's delivery time are equal
bit-for-bit.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import NamedTuple

logger = logging.getLogger(__name__)

P = 96
SCALE = 1 << P


class DimensionError(ValueError):
    """Points of different dimension were combined."""


class GeometryError(ValueError):
    """A placement or region cannot support the requested protocol."""


def rational(value):
    """Coerce an int, Fraction, decimal string or "p/q" string to a Fraction.

    Floats are accepted through their shortest repr, so 0.1 becomes 1/10.
    """

    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def spatial(coords):
    """Tuple of Fractions for a spatial point (or the spatial part of one)."""

    if isinstance(coords, SpacetimePoint):
        return coords.L
    if isinstance(coords, (int, Fraction, str, float)) and not isinstance(coords, bool):
        return (rational(coords),)
    return tuple(rational(c) for c in coords)


@dataclass(frozen=True, order=True)
class SpacetimePoint:
    """A point (L, t): spatial coordinates plus a time."""

    L: tuple
    t: Fraction

    def __post_init__(self):
        object.__setattr__(self, "L", spatial(self.L))
        object.__setattr__(self, "t", rational(self.t))
        if not 1 <= len(self.L) <= 3:
            raise DimensionError(f"dimension must be 1, 2 or 3, got {len(self.L)}")

    @property
    def d(self):
        return len(self.L)

    @property
    def fixed_t(self):
        return to_fixed(self.t)

    def __repr__(self):
        coords = ", ".join(str(c) for c in self.L)
        return f"<SpacetimePoint ({coords}) @ {self.t}>"


class TravelTime(NamedTuple):
    """Fixed-point travel time and whether the distance was rational."""

    value: int
    exact: bool


def to_fixed(value):
    """Round a rational time to fixed units, ties to even."""

    return round(rational(value) * SCALE)


def from_fixed(value):
    return Fraction(value, SCALE)


def format_fixed(value):
    """Exact decimal rendering of a fixed time (2**-96 has a finite expansion)."""

    sign = "-" if value < 0 else ""
    whole, rem = divmod(abs(value), SCALE)
    if not rem:
        return f"{sign}{whole}"
    digits = str(rem * 5 ** P).rjust(P, "0").rstrip("0")
    return f"{sign}{whole}.{digits}"


def parse_fixed(text):
    """Inverse of :func:`format_fixed`."""

    return to_fixed(Fraction(text))


@lru_cache(maxsize=65536)
def _distance(a, b):
    squared = sum((x - y) ** 2 for x, y in zip(a, b))
    num, den = squared.numerator, squared.denominator
    root_num, root_den = isqrt(num), isqrt(den)
    if root_num * root_num == num and root_den * root_den == den:
        return TravelTime(to_fixed(Fraction(root_num, root_den)), True)
    return TravelTime(_fixed_sqrt(num, den), False)


def _fixed_sqrt(num, den):
    """sqrt(num/den) in fixed units, rounded to nearest."""

    # floor(sqrt(floor(x))) == floor(sqrt(x)); an irrational root is never a tie
    scaled = num << (2 * P)
    value = isqrt(scaled // den)
    if 4 * scaled >= den * (2 * value + 1) ** 2:
        value += 1
    return value


def rational_sqrt(q):
    """(root, exact): the exact root of a square rational, else the fixed-point one."""

    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    num, den = q.numerator, q.denominator
    root_num, root_den = isqrt(num), isqrt(den)
    if root_num * root_num == num and root_den * root_den == den:
        return Fraction(root_num, root_den), True
    return from_fixed(_fixed_sqrt(num, den)), False


def distance(a, b):
    """Euclidean distance between two spatial points as a TravelTime."""

    a, b = spatial(a), spatial(b)
    if len(a) != len(b):
        raise DimensionError(f"cannot measure {len(a)}-d against {len(b)}-d point")
    if a > b:
        a, b = b, a
    return _distance(a, b)


def arrival_time(send_time, origin, target):
    """Fixed time at which a signal sent at ``send_time`` reaches ``target``."""

    return send_time + distance(origin, target).value


def max_travel_time(points, others):
    """Largest fixed travel time between any point of ``points`` and ``others``."""

    return max(
        (distance(a, b).value for a in points for b in others),
        default=0,
    )


def solve_linear(columns, rhs):
    """Exact solution of sum(x_j * columns[j]) = rhs, or None.

    None when the columns are linearly dependent or the system is inconsistent.
    """

    dim, width = len(rhs), len(columns)
    rows = [[col[i] for col in columns] + [rhs[i]] for i in range(dim)]
    rank = 0
    for col in range(width):
        pivot = next((i for i in range(rank, dim) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        rows[rank] = [x / lead for x in rows[rank]]
        for i in range(dim):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    if any(rows[i][width] != 0 for i in range(rank, dim)):
        return None
    return [rows[i][width] for i in range(width)]


def barycentric(p, simplex):
    """Barycentric coordinates of p with respect to affinely independent vertices.

    Returns None when the vertices are dependent or p is outside their affine
    span.
    """

    p = spatial(p)
    verts = [spatial(v) for v in simplex]
    for v in verts:
        if len(v) != len(p):
            raise DimensionError("simplex and point dimensions differ")
    origin = verts[0]
    columns = [[x - o for x, o in zip(v, origin)] for v in verts[1:]]
    rhs = [x - o for x, o in zip(p, origin)]
    if not columns:
        return [Fraction(1)] if p == origin else None
    coeffs = solve_linear(columns, rhs)
    if coeffs is None:
        return None
    return [1 - sum(coeffs)] + coeffs


def in_convex_hull(p, vertices):
    """True iff p is a convex combination of the vertices (boundary included).

    By Caratheodory it suffices to search simplices of at most d+1 vertices.
    """

    p = spatial(p)
    points = sorted({spatial(v) for v in vertices})
    if not points:
        raise GeometryError("convex hull of no vertices")
    for v in points:
        if len(v) != len(p):
            raise DimensionError("hull vertices and point dimensions differ")
    if p in points:
        return True
    for size in range(2, min(len(points), len(p) + 1) + 1):
        for simplex in itertools.combinations(points, size):
            coords = barycentric(p, simplex)
            if coords is not None and all(c >= 0 for c in coords):
                return True
    return False


def enclosing_simplex(S, margin):
    """d+1 vertices whose hull contains the spatial projection of S.

    The bounding box of S is grown by ``margin`` and cut by the simplex
    {x >= lo, sum(x - lo) <= d * side}, which leaves at least ``margin`` of
    slack to every face.
    """

    margin = rational(margin)
    points = [spatial(s) for s in S]
    if not points:
        raise GeometryError("cannot enclose an empty set")
    if margin <= 0:
        raise GeometryError("margin must be positive")
    dim = len(points[0])
    if any(len(p) != dim for p in points):
        raise DimensionError("points of S have mixed dimensions")

    lo = [min(p[i] for p in points) - margin for i in range(dim)]
    hi = [max(p[i] for p in points) + margin for i in range(dim)]
    side = max(h - l for h, l in zip(hi, lo))
    vertices = [tuple(lo)]
    for axis in range(dim):
        vertex = list(lo)
        vertex[axis] += dim * side
        vertices.append(tuple(vertex))
    return vertices
