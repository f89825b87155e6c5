"""Univariate polygonal curves and unions of closed intervals.

A curve is stored by the ordered values of its vertices. Only the sequence of
extrema matters for the Fréchet distance, so every `Curve` holds the canonical
representative of its class: no repeated consecutive values, and every interior
vertex is a strict local extremum.
"""

import logging
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from fresco.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)


def _between(x: float, a: float, b: float) -> bool:
    """Whether x lies in the closed interval spanned by a and b."""
    return min(a, b) <= x <= max(a, b)


def _reduce(values: Iterable[float]) -> List[float]:
    """Collapse repeated values and non-extremal interior vertices."""
    stack: List[float] = []
    for v in values:
        if stack and v == stack[-1]:
            continue
        while len(stack) >= 2 and _between(stack[-1], stack[-2], v):
            stack.pop()
        if stack and v == stack[-1]:
            continue
        stack.append(v)
    return stack


class Curve:
    """A normalized univariate polygonal curve.

    Attributes:
        values: tuple of float, vertex values in curve order.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float]) -> None:
        """Initializes the curve from values that are already normalized.

        Use `normalize` (or `Curve.from_values`) for raw measurements.

        Args:
            values: sequence of float, alternating vertex values.

        Raises:
            InvalidInputError: if values are empty, non-finite or not normalized.
        """
        values = tuple(float(v) for v in values)
        if not values:
            raise InvalidInputError("A curve needs at least one vertex.")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(f"Non-finite vertex value in {values}.")
        if list(values) != _reduce(values):
            raise InvalidInputError(
                f"Values {values} are not normalized; use normalize() first."
            )
        self._values = values

    @classmethod
    def from_values(cls, raw: Iterable[float]) -> "Curve":
        """Normalize raw measurements into a curve."""
        return normalize(raw)

    @classmethod
    def _trusted(cls, values: Sequence[float]) -> "Curve":
        curve = object.__new__(cls)
        curve._values = tuple(float(v) for v in values)
        return curve

    @property
    def values(self) -> Tuple[float, ...]:
        return self._values

    @property
    def first(self) -> float:
        return self._values[0]

    @property
    def last(self) -> float:
        return self._values[-1]

    @property
    def complexity(self) -> int:
        """Number of vertices."""
        return len(self._values)

    @property
    def is_monotone(self) -> bool:
        return len(self._values) <= 2

    @property
    def value_range(self) -> Tuple[float, float]:
        return min(self._values), max(self._values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self._values, dtype=float)

    def subcurve(self, start: int, stop: int) -> "Curve":
        """Curve through the vertices start..stop (inclusive), normalized."""
        if not 0 <= start <= stop < len(self._values):
            raise InvalidInputError(
                f"Vertex range [{start}, {stop}] outside curve of {len(self)} vertices."
            )
        return normalize(self._values[start : stop + 1])

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> Iterator[float]:
        return iter(self._values)

    def __getitem__(self, index):
        return self._values[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Curve):
            return NotImplemented
        return self._values == other._values

    def __hash__(self) -> int:
        return hash(self._values)

    def __repr__(self) -> str:
        return f"Curve({', '.join(repr(v) for v in self._values)})"

    def __str__(self) -> str:
        return f"Curve with {len(self)} vertices: {list(self._values)}"


def normalize(raw: Iterable[float]) -> Curve:
    """Canonical representative of a raw polyline.

    Drops every vertex equal to its predecessor and every interior vertex in the
    closed range of its neighbours until the remaining vertices alternate.

    Args:
        raw: iterable of float, measurements in order.

    Returns:
        Curve at Fréchet distance 0 from the raw polyline.

    Raises:
        InvalidInputError: if raw is empty or holds a non-finite value.
    """
    values = np.asarray(list(raw), dtype=float)
    if values.size == 0:
        raise InvalidInputError("Cannot normalize an empty sequence.")
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise InvalidInputError(f"Non-finite value at position {bad}.")
    return Curve._trusted(_reduce(values.tolist()))


def concat(a: Curve, b: Curve) -> Curve:
    """Concatenate two curves sharing the joint vertex.

    Raises:
        InvalidInputError: if the last vertex of a differs from the first of b.
    """
    if a.last != b.first:
        raise InvalidInputError(
            f"Cannot concatenate: {a.last} (end of first) != "
            f"{b.first} (start of second)."
        )
    return normalize(a.values + b.values[1:])


class IntervalUnion:
    """Union of disjoint closed intervals, sorted and merged.

    Attributes:
        intervals: tuple of (lo, hi) pairs with lo <= hi.
        measure: float, total length.
    """

    def __init__(self, intervals: Iterable[Tuple[float, float]] = ()) -> None:
        """Initializes the union, merging overlapping or touching intervals.

        Args:
            intervals: iterable of (lo, hi) pairs.

        Raises:
            InvalidInputError: if an interval has lo > hi.
        """
        pairs = sorted((float(lo), float(hi)) for lo, hi in intervals)
        merged: List[List[float]] = []
        for lo, hi in pairs:
            if lo > hi:
                raise InvalidInputError(f"Empty interval [{lo}, {hi}].")
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self.intervals = tuple((lo, hi) for lo, hi in merged)

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(self.intervals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return self.intervals == other.intervals

    def __repr__(self) -> str:
        return f"IntervalUnion({list(self.intervals)})"


def union_of_ranges(centers_radii: Iterable[Tuple[float, float]]) -> IntervalUnion:
    """Union of the closed ranges [c - r, c + r].

    Args:
        centers_radii: iterable of (center, radius) pairs.

    Returns:
        IntervalUnion of all ranges.

    Raises:
        InvalidInputError: if a radius is negative.
    """
    intervals = []
    for center, radius in centers_radii:
        if radius < 0:
            raise InvalidInputError(f"Negative radius {radius} around {center}.")
        intervals.append((center - radius, center + radius))
    return IntervalUnion(intervals)


def discretize(u: IntervalUnion, beta: float, rtol: float = 1e-9) -> np.ndarray:
    """Grid of resolution beta over every interval of u, endpoints included.

    Args:
        u: IntervalUnion to discretize.
        beta: float, grid step.
        rtol: float, grid points closer than rtol * beta to an interval's upper
            end are replaced by that end.

    Returns:
        Sorted array of unique grid values.

    Raises:
        InvalidInputError: if beta is not positive.
    """
    if not beta > 0:
        raise InvalidInputError(f"Grid resolution must be positive, got {beta}.")
    pieces = []
    for lo, hi in u:
        steps = int(np.floor((hi - lo) / beta))
        grid = lo + beta * np.arange(steps + 1)
        grid = grid[grid < hi - rtol * beta]
        pieces.append(np.append(grid, hi))
    if not pieces:
        return np.empty(0)
    return np.unique(np.concatenate(pieces))

