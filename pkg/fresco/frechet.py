"""Exact continuous Fréchet distance between univariate curves.

The decision procedure propagates reachability through the free-space cell
grid. Positions on a cell boundary are measured in value units along the edge
(distance travelled from the edge's first vertex), so boundary comparisons are
plain sums and differences of vertex values.

The exact distance is the smallest critical value accepted by the decision
procedure. In one dimension the critical values are 0, every vertex-to-vertex
gap |u - v| between the curves, and every half gap |u - u'| / 2 within a curve.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from fresco import config
from fresco.curves import Curve
from fresco.utils.errors import InvalidInputError
from fresco.utils.utils import parallel_map

logger = logging.getLogger(__name__)

TOLERANCE = config.get("frechet").get("tolerance")
BATCH_ROWS = config.get("frechet").get("batch_rows")


def _tolerance(*value_sets) -> float:
    scale = 1.0
    for values in value_sets:
        if len(values):
            scale = max(scale, float(np.max(np.abs(values))))
    return TOLERANCE * scale


def _free(v: float, s0: float, s1: float, delta: float) -> Tuple[float, float]:
    """Stretch of edge s0 -> s1 within delta of v, as positions along the edge."""
    if s1 > s0:
        lo, hi = v - delta - s0, v + delta - s0
    else:
        lo, hi = s0 - v - delta, s0 - v + delta
    return max(lo, 0.0), min(hi, abs(s1 - s0))


def _free_many(v, s0, s1, delta) -> Tuple[np.ndarray, np.ndarray]:
    up = s1 > s0
    lo = np.where(up, v - delta - s0, s0 - v - delta)
    hi = np.where(up, v + delta - s0, s0 - v + delta)
    return np.maximum(lo, 0.0), np.minimum(hi, np.abs(s1 - s0))


def decide(a: Curve, b: Curve, delta: float) -> bool:
    """Whether the Fréchet distance between a and b is at most delta.

    Args:
        a: Curve.
        b: Curve.
        delta: float, non-negative threshold.

    Returns:
        True iff d_F(a, b) <= delta.

    Raises:
        InvalidInputError: if delta is negative.
    """
    if delta < 0:
        raise InvalidInputError(f"Threshold must be non-negative, got {delta}.")
    A, B = a.values, b.values
    tol = _tolerance(A, B)
    limit = delta + tol
    if abs(A[0] - B[0]) > limit or abs(A[-1] - B[-1]) > limit:
        return False
    if len(A) == 1:
        return all(abs(A[0] - v) <= limit for v in B)
    if len(B) == 1:
        return all(abs(B[0] - v) <= limit for v in A)

    p, q = len(A), len(B)
    inf = math.inf
    # left[j]: lowest reachable position on B edge j at the current A vertex
    left = [inf] * (q - 1)
    left[0] = 0.0
    for i in range(p - 1):
        bottom = inf
        for j in range(q - 1):
            l_in, b_in = left[j], bottom
            if i == p - 2 and j == q - 2:
                return l_in < inf or b_in < inf
            lo, hi = _free(A[i + 1], B[j], B[j + 1], delta)
            if b_in < inf:
                r = lo
            else:
                r = max(lo, l_in)
            left[j] = r if r <= hi + tol else inf
            lo, hi = _free(B[j + 1], A[i], A[i + 1], delta)
            if l_in < inf:
                t = lo
            else:
                t = max(lo, b_in)
            bottom = t if t <= hi + tol else inf
    return False


def decide_many(
    candidates: np.ndarray, curve: Curve, delta: Union[float, np.ndarray]
) -> np.ndarray:
    """Vectorised `decide` for many equal-length curves against one curve.

    Args:
        candidates: array of shape (N, p), one normalized curve per row.
        curve: Curve to compare against.
        delta: float or array of shape (N,), per-row thresholds.

    Returns:
        Boolean array of shape (N,).
    """
    C = np.asarray(candidates, dtype=float)
    n_rows, p = C.shape
    if n_rows == 0:
        return np.zeros(0, dtype=bool)
    B = curve.as_array()
    q = len(B)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (n_rows,))
    tol = _tolerance(C.ravel(), B)
    limit = delta + tol
    ok = (np.abs(C[:, 0] - B[0]) <= limit) & (np.abs(C[:, -1] - B[-1]) <= limit)
    if p == 1:
        return ok & (np.abs(C[:, :1] - B[None, :]) <= limit[:, None]).all(axis=1)
    if q == 1:
        return ok & (np.abs(C - B[0]) <= limit[:, None]).all(axis=1)

    left = np.full((q - 1, n_rows), np.inf)
    left[0] = 0.0
    for i in range(p - 1):
        a0, a1 = C[:, i], C[:, i + 1]
        bottom = np.full(n_rows, np.inf)
        for j in range(q - 1):
            l_in, b_in = left[j].copy(), bottom
            if i == p - 2 and j == q - 2:
                return ok & (np.isfinite(l_in) | np.isfinite(b_in))
            lo, hi = _free_many(a1, B[j], B[j + 1], delta)
            r = np.where(np.isfinite(b_in), lo, np.maximum(lo, l_in))
            left[j] = np.where(r <= hi + tol, r, np.inf)
            lo, hi = _free_many(B[j + 1], a0, a1, delta)
            t = np.where(np.isfinite(l_in), lo, np.maximum(lo, b_in))
            bottom = np.where(t <= hi + tol, t, np.inf)
    return np.zeros(n_rows, dtype=bool)


def monotone_distance(a: Curve, b: Curve) -> float:
    """Distance between two monotone curves: the larger endpoint gap.

    Raises:
        InvalidInputError: if either curve has more than two vertices.
    """
    if not (a.is_monotone and b.is_monotone):
        raise InvalidInputError(
            "monotone_distance needs curves with at most 2 vertices."
        )
    return max(abs(a.first - b.first), abs(a.last - b.last))


def lower_bound(a: Curve, b: Curve) -> float:
    """Endpoint and value-range gaps, each a lower bound on d_F(a, b)."""
    (a_min, a_max), (b_min, b_max) = a.value_range, b.value_range
    return max(
        abs(a.first - b.first),
        abs(a.last - b.last),
        abs(a_max - b_max),
        abs(a_min - b_min),
    )


def largest_reversals(curve: Curve) -> Tuple[float, float]:
    """Largest fall and largest rise from an earlier to a later vertex."""
    values = curve.as_array()
    fall = float(np.max(np.maximum.accumulate(values) - values))
    rise = float(np.max(values - np.minimum.accumulate(values)))
    return fall, rise


def lower_bounds_many(candidates: np.ndarray, curve: Curve) -> np.ndarray:
    """Row-wise `lower_bound` of equal-length candidates against one curve.

    Two-vertex candidates also get half the curve's largest move against the
    candidate's direction.
    """
    C = np.asarray(candidates, dtype=float)
    b_min, b_max = curve.value_range
    bounds = np.maximum.reduce(
        [
            np.abs(C[:, 0] - curve.first),
            np.abs(C[:, -1] - curve.last),
            np.abs(C.max(axis=1) - b_max),
            np.abs(C.min(axis=1) - b_min),
        ]
    )
    if C.shape[1] == 2:
        fall, rise = largest_reversals(curve)
        bounds = np.maximum(bounds, np.where(C[:, 1] > C[:, 0], fall, rise) / 2)
    return bounds


def _half_gaps(values: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(values), 1)
    return np.abs(values[i] - values[j]) / 2


def critical_values(a: Curve, b: Curve) -> np.ndarray:
    """Sorted unique candidate values for d_F(a, b)."""
    A, B = a.as_array(), b.as_array()
    pairs = np.abs(A[:, None] - B[None, :]).ravel()
    return np.unique(np.concatenate([[0.0], pairs, _half_gaps(A), _half_gaps(B)]))


def distance(a: Curve, b: Curve) -> float:
    """Exact Fréchet distance between two curves.

    Args:
        a: Curve.
        b: Curve.

    Returns:
        float, the smallest critical value accepted by `decide`.
    """
    if a.is_monotone and b.is_monotone:
        return monotone_distance(a, b)
    if len(a) == 1 or len(b) == 1:
        point, other = (a, b) if len(a) == 1 else (b, a)
        return float(max(abs(point.first - v) for v in other))
    values = critical_values(a, b)
    lo = int(np.searchsorted(values, lower_bound(a, b), side="left"))
    hi = len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if decide(a, b, float(values[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(values[lo])


def distance_many(candidates: np.ndarray, curve: Curve) -> np.ndarray:
    """Exact distances from many equal-length curves to one curve.

    Each row runs its own bisection over its critical values; rows are
    processed in blocks to bound memory.

    Args:
        candidates: array of shape (N, p), one normalized curve per row.
        curve: Curve to compare against.

    Returns:
        Array of shape (N,) of distances.
    """
    C = np.asarray(candidates, dtype=float)
    n_rows, p = C.shape
    if n_rows == 0:
        return np.zeros(0)
    B = curve.as_array()
    q = len(B)
    if p <= 2 and q <= 2:
        return np.maximum(np.abs(C[:, 0] - B[0]), np.abs(C[:, -1] - B[-1]))
    if q == 1:
        return np.abs(C - B[0]).max(axis=1)
    if p == 1:
        return np.abs(C[:, :1] - B[None, :]).max(axis=1)

    half_b = _half_gaps(B)
    ia, ja = np.triu_indices(p, 1)
    width = 1 + p * q + len(ia) + len(half_b)
    block = max(1, BATCH_ROWS // width)
    out = np.empty(n_rows)
    for start in range(0, n_rows, block):
        rows = C[start : start + block]
        n = len(rows)
        values = np.concatenate(
            [
                np.zeros((n, 1)),
                np.abs(rows[:, :, None] - B[None, None, :]).reshape(n, -1),
                np.abs(rows[:, ia] - rows[:, ja]) / 2,
                np.broadcast_to(half_b, (n, len(half_b))),
            ],
            axis=1,
        )
        values.sort(axis=1)
        bound = lower_bounds_many(rows, curve)
        lo = np.argmax(values >= bound[:, None], axis=1)
        hi = np.full(n, width - 1)
        while True:
            active = np.flatnonzero(lo < hi)
            if not active.size:
                break
            mid = (lo[active] + hi[active]) // 2
            ok = decide_many(rows[active], curve, values[active, mid])
            hi[active] = np.where(ok, mid, hi[active])
            lo[active] = np.where(ok, lo[active], mid + 1)
        out[start : start + n] = values[np.arange(n), lo]
    return out


def distance_matrix(
    rows: Sequence[Curve],
    columns: Optional[Sequence[Curve]] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Pairwise exact distances, shape (len(rows), len(columns)).

    With `columns` omitted the matrix is symmetric over `rows` and only the
    upper triangle is computed.
    """
    symmetric = columns is None
    columns = rows if symmetric else columns

    def _row(i: int) -> np.ndarray:
        start = i + 1 if symmetric else 0
        out = np.zeros(len(columns))
        for j in range(start, len(columns)):
            out[j] = distance(rows[i], columns[j])
        return out

    matrix = np.array(parallel_map(_row, range(len(rows)), threads)).reshape(
        len(rows), len(columns)
    )
    if symmetric:
        matrix = np.triu(matrix, 1)
        matrix = matrix + matrix.T
    return matrix
