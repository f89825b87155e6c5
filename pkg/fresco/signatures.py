"""Signatures of univariate curves and minimum-error simplification.

A delta-signature keeps the vertices of a curve that remain significant at
scale delta: the retained extrema alternate, every retained edge is longer
than 2 * delta (longer than delta for the first and last edge), and the
discarded stretches never move against the edge direction by more than
2 * delta. Increasing delta only ever removes vertices, so all signatures of a
curve nest into a single hierarchy recorded by `VertexPermutation`.
"""

import heapq
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fresco.curves import Curve
from fresco.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

SEPARATOR = None

NON_DEGENERACY = "non-degeneracy"
DIRECTION_PRESERVING = "direction-preserving"
MINIMUM_EDGE_LENGTH = "minimum-edge-length"
RANGE = "range"
LOCATION = "location"


def _between(x: float, a: float, b: float) -> bool:
    return min(a, b) <= x <= max(a, b)


def signature_indices(tau: Curve, delta: float) -> List[int]:
    """Vertex indices of the delta-signature of tau, in one linear pass.

    Args:
        tau: Curve.
        delta: float, positive scale.

    Returns:
        Increasing list of vertex indices, always holding the first and last.

    Raises:
        InvalidInputError: if delta is not positive.
    """
    if not delta > 0:
        raise InvalidInputError(f"Signature scale must be positive, got {delta}.")
    values = tau.values
    m = len(values)
    if m == 1:
        return [0]

    start = values[0]
    b = 1
    while b < m and abs(values[b] - start) <= delta:
        b += 1
    if b == m:
        return [0, m - 1]

    indices = [0]
    for i in range(b + 1, m):
        if _between(values[b], values[indices[-1]], values[i]):
            b = i
        elif abs(values[i] - values[b]) > 2 * delta:
            indices.append(b)
            b = i
    if abs(values[b] - values[-1]) > delta:
        indices.append(b)
    if indices[-1] != m - 1:
        indices.append(m - 1)
    return indices


def delta_signature(tau: Curve, delta: float) -> Curve:
    """The delta-signature of tau as a curve.

    Args:
        tau: Curve.
        delta: float, positive scale.

    Returns:
        Curve whose vertices are a subsequence of tau's, endpoints included.
    """
    indices = signature_indices(tau, delta)
    values = [tau.values[i] for i in indices]
    if len(values) == 2 and values[0] == values[1]:
        # closed curve inside [tau(0) - delta, tau(0) + delta]
        return Curve._trusted(values[:1])
    return Curve._trusted(values)


class SignatureReport:
    """Outcome of checking a curve against the signature conditions.

    Attributes:
        violations: list of (condition, location) pairs; location is the
            signature edge (or vertex) index the condition failed at.
    """

    def __init__(self, violations: Optional[List[Tuple[str, int]]] = None) -> None:
        self.violations = list(violations or [])

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> List[str]:
        return sorted({condition for condition, _ in self.violations})

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return f"SignatureReport(ok={self.ok}, violations={self.violations})"


def _locate(sigma: Sequence[float], tau: Sequence[float]) -> Optional[List[int]]:
    """Indices of sigma's vertices in tau: first and last pinned, rest greedy."""
    m = len(tau)
    if len(sigma) == 1:
        if tau[0] == sigma[0] and tau[-1] == sigma[0]:
            return [0, m - 1] if m > 1 else [0]
        return None
    if sigma[0] != tau[0] or sigma[-1] != tau[-1]:
        return None
    indices = [0]
    position = 1
    for value in sigma[1:-1]:
        while position < m - 1 and tau[position] != value:
            position += 1
        if position >= m - 1:
            return None
        indices.append(position)
        position += 1
    indices.append(m - 1)
    return indices


def _max_reversal(values: np.ndarray, upward: bool) -> float:
    """Largest move against the given direction between an earlier and a later value."""
    if len(values) < 2:
        return 0.0
    if upward:
        return float(np.max(np.maximum.accumulate(values) - values))
    return float(np.max(values - np.minimum.accumulate(values)))


def validate_signature(sigma: Curve, tau: Curve, delta: float) -> SignatureReport:
    """Check that sigma is a delta-signature of tau.

    Every condition is checked directly against tau's vertices between the
    located signature vertices; a two-vertex signature is exempt from the
    minimum-edge-length condition.

    Args:
        sigma: Curve, proposed signature.
        tau: Curve.
        delta: float, positive scale.

    Returns:
        SignatureReport listing every violated condition.
    """
    values = tau.as_array()
    indices = _locate(sigma.values, tau.values)
    if indices is None:
        return SignatureReport([(LOCATION, 0)])
    if len(indices) == 1:
        return SignatureReport()

    sig = values[indices]
    ell = len(indices)
    violations: List[Tuple[str, int]] = []

    for j in range(1, ell - 1):
        if _between(sig[j], sig[j - 1], sig[j + 1]):
            violations.append((NON_DEGENERACY, j))

    for e in range(ell - 1):
        start, stop = indices[e], indices[e + 1]
        segment = values[start : stop + 1]
        low, high = sig[e], sig[e + 1]
        if low != high and _max_reversal(segment, high > low) > 2 * delta:
            violations.append((DIRECTION_PRESERVING, e))

        length = abs(high - low)
        if ell > 2:
            is_end_edge = e in (0, ell - 2)
            if length <= (delta if is_end_edge else 2 * delta):
                violations.append((MINIMUM_EDGE_LENGTH, e))

        allowed = (segment >= min(low, high)) & (segment <= max(low, high))
        if e == 0:
            allowed |= np.abs(segment - low) <= delta
        if e == ell - 2:
            allowed |= np.abs(segment - high) <= delta
        if not np.all(allowed):
            violations.append((RANGE, e))

    return SignatureReport(violations)


class VertexPermutation:
    """Canonical ordering of a curve's vertices by the scale they vanish at.

    `entries` lists separators (None) and vertex indices. The vertex indices
    after the i-th separator, sorted, form the signature valid for
    delta in [thresholds[i], thresholds[i + 1]). The last separator is
    followed by the two endpoints.

    Attributes:
        source: Curve the permutation was built from.
        entries: tuple of int or None.
        thresholds: tuple of float, one per separator, starting at 0.
    """

    def __init__(
        self,
        source: Curve,
        entries: Sequence[Optional[int]],
        thresholds: Sequence[float],
    ) -> None:
        self.source = source
        self.entries = tuple(entries)
        self.thresholds = tuple(float(t) for t in thresholds)
        self._levels = self._split_levels()

    def _split_levels(self) -> List[Tuple[int, ...]]:
        separators = [i for i, e in enumerate(self.entries) if e is SEPARATOR]
        if len(separators) != len(self.thresholds):
            raise InvalidInputError("Need exactly one threshold per separator.")
        return [
            tuple(sorted(e for e in self.entries[pos:] if e is not SEPARATOR))
            for pos in separators
        ]

    @property
    def levels(self) -> List[Tuple[int, ...]]:
        """Vertex index sets of every signature level, finest first."""
        return list(self._levels)

    @property
    def sizes(self) -> List[int]:
        return [len(level) for level in self._levels]

    def level_at(self, delta: float) -> int:
        """Index of the level whose threshold range contains delta."""
        if delta < 0:
            raise InvalidInputError(f"Scale must be non-negative, got {delta}.")
        return int(np.searchsorted(self.thresholds, delta, side="right")) - 1

    def _curve(self, indices: Sequence[int]) -> Curve:
        return Curve._trusted([self.source.values[i] for i in indices])

    def signature_at(self, delta: float) -> Curve:
        """Canonical signature for scale delta."""
        return self._curve(self._levels[self.level_at(delta)])

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return (
            f"VertexPermutation(levels={len(self._levels)}, "
            f"sizes={self.sizes}, thresholds={list(self.thresholds)})"
        )


def build_vertex_permutation(tau: Curve) -> VertexPermutation:
    """Record the order in which repeated shortest-edge contraction removes vertices.

    Edges touching the first or last vertex weigh their full length, interior
    edges half their length. Contracting an edge that touches an endpoint
    drops only its interior vertex, an interior edge drops both vertices.
    All disjoint edges of the current minimum weight are contracted together,
    and contractions of equal weight share one level.

    Args:
        tau: Curve with at least two vertices.

    Returns:
        VertexPermutation of tau.

    Raises:
        InvalidInputError: if tau has a single vertex.
    """
    values = tau.values
    m = len(values)
    if m < 2:
        raise InvalidInputError("A vertex permutation needs at least two vertices.")
    last = m - 1
    prev = list(range(-1, m - 1))
    succ = list(range(1, m + 1))
    alive = [True] * m

    def weight(a: int, b: int) -> float:
        gap = abs(values[b] - values[a])
        return gap if a == 0 or b == last else gap / 2

    def valid(a: int, b: int) -> bool:
        return alive[a] and alive[b] and succ[a] == b

    heap = [(weight(i, i + 1), i, i + 1) for i in range(m - 1)]
    heapq.heapify(heap)

    entries: List[Optional[int]] = [SEPARATOR]
    thresholds = [0.0]
    level_weight: Optional[float] = None
    interior = m - 2

    while interior > 0:
        while not valid(heap[0][1], heap[0][2]):
            heapq.heappop(heap)
        w = heap[0][0]
        batch = []
        while heap and heap[0][0] == w:
            _, a, b = heapq.heappop(heap)
            if valid(a, b):
                batch.append((a, b))
        batch.sort()

        if level_weight is not None and w > level_weight:
            entries.append(SEPARATOR)
            thresholds.append(level_weight)
        level_weight = w if level_weight is None else max(level_weight, w)

        for a, b in batch:
            # an earlier contraction in this batch may have consumed a or b
            if not valid(a, b):
                continue
            removed = [v for v in (a, b) if v not in (0, last)]
            left, right = prev[removed[0]], succ[removed[-1]]
            for v in removed:
                alive[v] = False
                entries.append(v)
            interior -= len(removed)
            succ[left], prev[right] = right, left
            heapq.heappush(heap, (weight(left, right), left, right))

    if level_weight is not None:
        entries.append(SEPARATOR)
        thresholds.append(level_weight)
    entries.extend([0, last])
    return VertexPermutation(tau, entries, thresholds)


def extract_signature(perm: VertexPermutation, ell: int) -> Curve:
    """Canonical signature with the largest vertex count not above ell.

    Takes the last ell vertex references; unless they start right after a
    separator, drops references up to the next separator.

    Args:
        perm: VertexPermutation.
        ell: int, vertex budget, at least 2.

    Returns:
        Curve with vertices in curve order.

    Raises:
        InvalidInputError: if ell < 2.
    """
    if ell < 2:
        raise InvalidInputError(f"Signature size must be at least 2, got {ell}.")
    positions = [i for i, e in enumerate(perm.entries) if e is not SEPARATOR]
    start = positions[-min(ell, len(positions))]
    if perm.entries[start - 1] is not SEPARATOR:
        start = perm.entries.index(SEPARATOR, start) + 1
    indices = sorted(e for e in perm.entries[start:] if e is not SEPARATOR)
    return perm._curve(indices)


def simplify(tau: Curve, ell: int) -> Curve:
    """Curve of at most ell vertices within twice the optimal Fréchet error of tau.

    Args:
        tau: Curve.
        ell: int, vertex budget, at least 2.

    Returns:
        Curve with at most ell vertices.

    Raises:
        InvalidInputError: if ell < 2.
    """
    if ell < 2:
        raise InvalidInputError(f"Simplification size must be at least 2, got {ell}.")
    if len(tau) <= ell:
        return tau
    return extract_signature(build_vertex_permutation(tau), ell)
