"""Segmented quadratic models built from sampled points.

Each segment is the parabola through three consecutive samples, optionally
averaged 50/50 with a secant line through two of those samples.  Segments
chain over shared endpoint nodes (nodes 0-1-2, 2-3-4, ...) into a piecewise
function covering the full sampled domain.

Three blend variants are supported:

* ``PURE_LAGRANGE``  -- the unblended parabola through all three nodes.
* ``ENDPOINT_SECANT`` -- average with the chord through the outer nodes;
  every segment still passes through both of its endpoints, so adjacent
  segments meet continuously.
* ``TRAILING_SECANT``   -- average with the chord through the last two nodes;
  the segment passes through its second and third nodes but generally not
  its first, so knots may jump.  Kept selectable for comparison studies.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateNodes,
    EvenSeries,
    NonFiniteSample,
    NonMonotonicX,
    NoRootInRange,
    OutOfDomain,
    TooFewPoints,
    TooManyNodes,
)

#: |a| at or below LINEAR_TOL * max(1, |b|, |c|) classifies a segment as a line.
LINEAR_TOL = 1e-12

#: Node cap for dense interpolation; conditioning degrades quickly above this.
MAX_GENERAL_NODES = 12


class BlendMode(enum.Enum):
    """How a segment's parabola is combined with a secant line."""

    PURE_LAGRANGE = "pure-lagrange"
    TRAILING_SECANT = "trailing-secant"
    ENDPOINT_SECANT = "endpoint-secant"


class Concavity(enum.Enum):
    UPWARD = "upward"
    DOWNWARD = "downward"
    LINEAR = "linear"


@dataclass(frozen=True)
class SamplePoint:
    """One (x, y) measurement: x is the input value, y the observed output
    (a function value, or CPU seconds when produced by the profiler)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonFiniteSample(f"non-finite sample ({self.x}, {self.y})")


@dataclass(frozen=True)
class SampleSeries:
    """Ordered samples with strictly increasing x.

    Length and parity are *not* checked here: a series read from disk may
    be any length, and the odd-length >= 3 requirement is enforced where it
    matters, in :func:`build_piecewise`.
    """

    points: tuple[SamplePoint, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        xs = [p.x for p in self.points]
        for left, right in zip(xs, xs[1:]):
            if right <= left:
                raise NonMonotonicX(
                    f"x values must strictly increase (got {left} then {right})"
                )

    @classmethod
    def from_arrays(cls, xs: Sequence[float], ys: Sequence[float], label: str = "") -> "SampleSeries":
        if len(xs) != len(ys):
            raise ValueError("x and y lengths differ")
        return cls(tuple(SamplePoint(float(x), float(y)) for x, y in zip(xs, ys)), label)

    @property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def ys(self) -> np.ndarray:
        return np.array([p.y for p in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class LinearFn:
    """A line y = slope * x + intercept."""

    slope: float
    intercept: float

    def value(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class QuadraticSegment:
    """One parabola a*x**2 + b*x + c valid on [lo, hi].

    ``node_xs`` records the three sample x values the segment was built
    from; ``lo`` and ``hi`` are the first and third of them.
    """

    a: float
    b: float
    c: float
    lo: float
    hi: float
    node_xs: tuple[float, float, float]
    mode: BlendMode

    def value(self, x: float) -> float:
        return (self.a * x + self.b) * x + self.c

    def derivative(self, x: float) -> float:
        return 2.0 * self.a * x + self.b

    def integral(self, u: float, v: float) -> float:
        """Exact integral of the parabola from u to v."""
        anti = lambda t: ((self.a / 3.0 * t + self.b / 2.0) * t + self.c) * t
        return anti(v) - anti(u)

    def average(self) -> float:
        """Mean value of the segment over its own bounds."""
        return self.integral(self.lo, self.hi) / (self.hi - self.lo)

    def concavity(self) -> Concavity:
        tol = LINEAR_TOL * max(1.0, abs(self.b), abs(self.c))
        if self.a > tol:
            return Concavity.UPWARD
        if self.a < -tol:
            return Concavity.DOWNWARD
        return Concavity.LINEAR

    def representative_input(self) -> float:
        """The in-segment x whose value equals the segment average.

        For (near-)linear segments the average sits at the midpoint.  For a
        genuine parabola the quadratic formula gives two candidates; the
        smaller root inside (lo, hi) is returned.
        """
        avg = self.average()
        if self.concavity() is Concavity.LINEAR:
            return 0.5 * (self.lo + self.hi)
        disc = self.b * self.b - 4.0 * self.a * (self.c - avg)
        if disc < 0.0:
            disc = 0.0  # roundoff: the average is always attained
        root = math.sqrt(disc)
        candidates = sorted(((-self.b - root) / (2.0 * self.a), (-self.b + root) / (2.0 * self.a)))
        for delta in candidates:
            if self.lo < delta < self.hi:
                return delta
        raise NoRootInRange(
            f"no root of the average equation inside ({self.lo}, {self.hi})"
        )


def secant_line(p: SamplePoint, q: SamplePoint) -> LinearFn:
    """Line through two samples; rejects a shared x."""
    if p.x == q.x:
        raise DegenerateNodes(f"secant nodes share x = {p.x}")
    slope = (q.y - p.y) / (q.x - p.x)
    return LinearFn(slope, q.y - slope * q.x)


def lagrange_quadratic(p0: SamplePoint, p1: SamplePoint, p2: SamplePoint) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of the parabola through three samples.

    Degenerates to a line (a == 0) when the points are collinear.
    """
    x0, x1, x2 = p0.x, p1.x, p2.x
    if x0 == x1 or x0 == x2 or x1 == x2:
        raise DegenerateNodes(f"repeated node x in ({x0}, {x1}, {x2})")
    a = b = c = 0.0
    for (xj, yj, xu, xv) in (
        (x0, p0.y, x1, x2),
        (x1, p1.y, x0, x2),
        (x2, p2.y, x0, x1),
    ):
        d = (xj - xu) * (xj - xv)
        # y_j * (x - x_u)(x - x_v) / d  expanded into monomials
        a += yj / d
        b += yj * -(xu + xv) / d
        c += yj * (xu * xv) / d
    return a, b, c


def lagrange_general(series: SampleSeries) -> np.ndarray:
    """Dense interpolation through every point of ``series``.

    Returns ascending monomial coefficients ``coeffs`` (``coeffs[k]``
    multiplies ``x**k``) of the unique polynomial of degree < n through all
    n points.  Capped at ``MAX_GENERAL_NODES`` points; beyond that the
    monomial expansion is too ill-conditioned to be honest.
    """
    n = len(series)
    if n == 0:
        raise TooFewPoints("empty series")
    if n > MAX_GENERAL_NODES:
        raise TooManyNodes(f"{n} nodes exceeds the cap of {MAX_GENERAL_NODES}")
    xs = series.xs
    ys = series.ys
    coeffs = np.zeros(n)
    for j in range(n):
        basis = np.array([1.0])
        denom = 1.0
        for m in range(n):
            if m == j:
                continue
            # multiply by (x - x_m), ascending coefficient order
            basis = np.convolve(basis, np.array([-xs[m], 1.0]))
            denom *= xs[j] - xs[m]
        coeffs[: len(basis)] += ys[j] / denom * basis
    return coeffs


def build_segment(p0: SamplePoint, p1: SamplePoint, p2: SamplePoint, mode: BlendMode) -> QuadraticSegment:
    """Blend the 3-point parabola with the mode's secant into one segment.

    The blended coefficients are the plain average of the parabola and the
    line, so the result is still a quadratic on [p0.x, p2.x].
    """
    if not (p0.x < p1.x < p2.x):
        raise DegenerateNodes(
            f"nodes must strictly increase (got {p0.x}, {p1.x}, {p2.x})"
        )
    a, b, c = lagrange_quadratic(p0, p1, p2)
    if mode is not BlendMode.PURE_LAGRANGE:
        chord = secant_line(p1, p2) if mode is BlendMode.TRAILING_SECANT else secant_line(p0, p2)
        a = 0.5 * a
        b = 0.5 * (b + chord.slope)
        c = 0.5 * (c + chord.intercept)
    return QuadraticSegment(a, b, c, p0.x, p2.x, (p0.x, p1.x, p2.x), mode)


def build_piecewise(series: SampleSeries, mode: BlendMode, drop_last: bool = False) -> "PiecewisePoly":
    """Chain segments over consecutive node triples 0-1-2, 2-3-4, ...

    Needs an odd number of points (2m+1 points give m segments); pass
    ``drop_last=True`` to silently discard the final point of an
    even-length series instead of raising.
    """
    points = series.points
    if len(points) % 2 == 0:
        if not drop_last:
            raise EvenSeries(
                f"series has {len(points)} points; need an odd count >= 3"
            )
        points = points[:-1]
    if len(points) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(points)}")
    segments = tuple(
        build_segment(points[i], points[i + 1], points[i + 2], mode)
        for i in range(0, len(points) - 2, 2)
    )
    return PiecewisePoly(segments, mode)


@dataclass(frozen=True)
class PiecewisePoly:
    """Contiguous quadratic segments; segment i ends where i+1 begins.

    Evaluation at a shared knot uses the left segment.  In the
    ENDPOINT_SECANT and PURE_LAGRANGE modes both sides agree there anyway;
    in TRAILING_SECANT mode the left-owner rule keeps evaluation deterministic
    across the jump.
    """

    segments: tuple[QuadraticSegment, ...]
    mode: BlendMode

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise TooFewPoints("piecewise model needs at least one segment")
        for left, right in zip(self.segments, self.segments[1:]):
            if left.hi != right.lo:
                raise NonMonotonicX(
                    f"segment domains must be contiguous ({left.hi} != {right.lo})"
                )

    @property
    def domain(self) -> tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    @property
    def knots(self) -> tuple[float, ...]:
        """Interior transition points between adjacent segments."""
        return tuple(seg.hi for seg in self.segments[:-1])

    def _segment_index(self, x: float) -> int:
        lo, hi = self.domain
        if not (lo <= x <= hi):
            raise OutOfDomain(f"x = {x} outside [{lo}, {hi}]")
        # bisect on segment upper bounds: at a shared knot the left segment
        # (whose hi equals x) wins.
        his = [seg.hi for seg in self.segments]
        return min(bisect_left(his, x), len(his) - 1)

    def segment_at(self, x: float) -> QuadraticSegment:
        return self.segments[self._segment_index(x)]

    def evaluate(self, x: float) -> float:
        return self.segment_at(x).value(x)

    def derivative_at(self, x: float) -> tuple[float, float]:
        """One-sided derivatives (left, right) at x.

        Inside a segment both sides agree; at a knot they come from the two
        adjacent segments and may differ, so callers must not assume
        differentiability there.
        """
        i = self._segment_index(x)
        left = right = self.segments[i].derivative(x)
        if i + 1 < len(self.segments) and x == self.segments[i].hi:
            right = self.segments[i + 1].derivative(x)
        return left, right

    def integral(self, a: float, b: float) -> float:
        """Exact integral over [a, b] via per-segment antiderivatives."""
        lo, hi = self.domain
        if a > b:
            raise OutOfDomain(f"inverted bounds [{a}, {b}]")
        if a < lo or b > hi:
            raise OutOfDomain(f"[{a}, {b}] outside [{lo}, {hi}]")
        total = 0.0
        for seg in self.segments:
            u = max(a, seg.lo)
            v = min(b, seg.hi)
            if u < v:
                total += seg.integral(u, v)
        return total


def self_similar_next(seg: QuadraticSegment) -> tuple[float, float, float]:
    """Predicted coefficients of the next segment under node doubling for
    base-2 logarithmic data: (a/4, b/2, c+1)."""
    return seg.a / 4.0, seg.b / 2.0, seg.c + 1.0


def nodes_from_bounds(bounds: Sequence[float]) -> list[float]:
    """Expand segment bounds into node positions with arithmetic midpoints.

    ``[b0, b1, b2]`` becomes ``[b0, (b0+b1)/2, b1, (b1+b2)/2, b2]``: one
    interior node per segment, endpoints shared.
    """
    bounds = [float(b) for b in bounds]
    if len(bounds) < 2:
        raise TooFewPoints("need at least two bounds")
    for left, right in zip(bounds, bounds[1:]):
        if right <= left:
            raise NonMonotonicX("bounds must strictly increase")
    xs: list[float] = [bounds[0]]
    for left, right in zip(bounds, bounds[1:]):
        xs.append(0.5 * (left + right))
        xs.append(right)
    return xs


def sample_function(fn, xs: Sequence[float], label: str = "") -> SampleSeries:
    """Evaluate ``fn`` at the given x positions and wrap as a series."""
    return SampleSeries.from_arrays(list(xs), [float(fn(float(x))) for x in xs], label)
