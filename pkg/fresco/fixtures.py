"""Curve families with known distances and clustering costs.

Includes the isometric embedding of l-infinity point sets into curves, the
two constructions showing that curves have unbounded doubling dimension, and
planted clustering instances with a certified cost bound.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fresco import config
from fresco.curves import Curve, normalize
from fresco.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

FIXTURES = config.get("fixtures")


def linf_offsets(d: int, bound: float) -> np.ndarray:
    """The alternating translation (6 * bound, -6 * bound, ...) of length d."""
    return 6 * bound * np.where(np.arange(d) % 2 == 0, 1.0, -1.0)


def embed_linf(
    points: Sequence[Sequence[float]], bound: Optional[float] = None
) -> List[Curve]:
    """Curves whose Fréchet distances equal the l-infinity distances of the points.

    Each point w maps to the curve with vertices w_j + T_j, where T alternates
    between 6 * bound and -6 * bound. The gaps of at least 10 * bound between
    consecutive vertices force every matching to pair vertices index by index.

    Args:
        points: sequence of d-dimensional vectors, d >= 2.
        bound: float or None, l-infinity bound on all points; defaults to the
            largest norm among them. Fix it up front when embedding in batches.

    Returns:
        List of Curve, one per point.

    Raises:
        InvalidInputError: if d < 2, a coordinate is not finite, or a point
            exceeds the bound.
    """
    W = np.asarray(points, dtype=float)
    if W.ndim != 2 or W.shape[1] < 2:
        raise InvalidInputError("Points need at least two coordinates each.")
    if not np.all(np.isfinite(W)):
        raise InvalidInputError("Point coordinates must be finite.")
    largest = float(np.abs(W).max()) if W.size else 0.0
    if bound is None:
        bound = largest
    elif largest > bound:
        raise InvalidInputError(f"Point norm {largest} exceeds the bound {bound}.")
    offsets = linf_offsets(W.shape[1], bound)
    return [normalize(w + offsets) for w in W]


def unembed(curve: Curve, d: int, bound: float) -> np.ndarray:
    """Recover the point behind a curve produced by `embed_linf`."""
    if len(curve) != d:
        raise InvalidInputError(f"Curve has {len(curve)} vertices, expected {d}.")
    return curve.as_array() - linf_offsets(d, bound)


def doubling_unbounded_fixture(d: int) -> Tuple[List[Curve], Curve]:
    """2^d + 1 curves pairwise at distance 1/4 inside a ball of radius 1/8.

    Args:
        d: int, at least 1.

    Returns:
        Tuple of the curves (0, i, i - 1/2, 2^d + 2) for i = 1..2^d + 1 and
        the center of the ball.
    """
    if d < 1:
        raise InvalidInputError(f"d must be at least 1, got {d}.")
    count = 2**d + 1
    end = 2**d + 2
    curves = [Curve([0.0, i, i - 0.5, end]) for i in range(1, count + 1)]
    middle = [v for i in range(1, count + 1) for v in (i - 0.125, i - 0.375)]
    return curves, Curve([0.0] + middle + [end])


def doubling_bounded_fixture(d: int, ell: int) -> List[Curve]:
    """2^d + 1 curves of at most ell vertices inside a ball of radius 1/4.

    The ball is centered at (0, s * (2^d + 2)) with s = (ell - 2) // 2, and
    every curve is its own 1/8-signature.

    Raises:
        InvalidInputError: if d < 1 or ell <= 3.
    """
    if d < 1:
        raise InvalidInputError(f"d must be at least 1, got {d}.")
    if ell <= 3:
        raise InvalidInputError(f"ell must exceed 3, got {ell}.")
    s = (ell - 2) // 2
    curves = []
    for i in range(1, 2**d + 2):
        base = s * (i - 1)
        middle = [v for j in range(1, s + 1) for v in (base + j, base + j - 0.5)]
        curves.append(Curve([0.0] + middle + [float(s * (2**d + 2))]))
    return curves


def _random_center(
    rng: np.random.Generator, ell: int, offset: float, separation: float
) -> Curve:
    direction = rng.choice([-1.0, 1.0])
    values = [offset + rng.uniform(0, separation)]
    for _ in range(ell - 1):
        values.append(values[-1] + direction * rng.uniform(separation, 2 * separation))
        direction = -direction
    return Curve(values)


def _insert_wiggles(
    rng: np.random.Generator, values: List[float], pairs: int, radius: float
) -> List[float]:
    """Add vertex pairs inside edges, each moving back by at most 2 * radius."""
    edges = len(values) - 1
    per_edge = np.bincount(rng.integers(0, edges, size=pairs), minlength=edges)
    out = [values[0]]
    for e, count in enumerate(per_edge):
        u, w = values[e], values[e + 1]
        sign = 1.0 if w > u else -1.0
        starts = np.sort(rng.uniform(0, abs(w - u) - 2 * radius, size=count))
        for x, back in zip(starts, rng.uniform(0, 2 * radius, size=count)):
            peak = u + sign * (2 * radius + x)
            out.extend([peak, peak - sign * back])
        out.append(w)
    return out


def planted_instance(
    k: int,
    ell: int,
    n: int,
    m: int,
    radius: Optional[float] = None,
    separation: Optional[float] = None,
    seed: Optional[int] = None,
) -> Tuple[List[Curve], List[Curve], float]:
    """Inputs scattered around k random centers within a known radius.

    Each center has ell vertices with consecutive gaps in (separation,
    2 * separation]. Each input copies a center, moves every vertex by at most
    radius and may gain vertex pairs that step back along an edge by at most
    2 * radius, so it stays within radius of its center.

    Args:
        k: int, number of centers.
        ell: int, vertices per center, at least 2.
        n: int, number of inputs; every center gets one when n >= k.
        m: int, maximum input complexity, at least ell.
        radius: float, perturbation bound; defaults to the fixtures config.
        separation: float, minimum edge length of the centers, above
            8 * radius; defaults to the fixtures config.
        seed: int or None, generator seed; defaults to the fixtures config.

    Returns:
        Tuple of inputs, centers and the bound radius on the (k, ell)-center
        cost (n * radius bounds the median cost).

    Raises:
        InvalidInputError: on infeasible parameters.
    """
    radius = FIXTURES.get("radius") if radius is None else float(radius)
    separation = FIXTURES.get("separation") if separation is None else float(separation)
    seed = FIXTURES.get("seed") if seed is None else seed
    if k < 1 or n < 1:
        raise InvalidInputError(f"Need k >= 1 and n >= 1, got k={k}, n={n}.")
    if ell < 2 or m < ell:
        raise InvalidInputError(f"Need 2 <= ell <= m, got ell={ell}, m={m}.")
    if radius < 0 or not separation > 8 * radius:
        raise InvalidInputError(
            f"Need radius >= 0 and separation > 8 * radius, got {radius}, {separation}."
        )

    rng = np.random.default_rng(seed)
    stride = (2 * ell + 2) * separation
    centers = [_random_center(rng, ell, j * stride, separation) for j in range(k)]
    owners = rng.permutation(np.arange(n) % k)
    inputs = []
    for owner in owners:
        noise = rng.uniform(-radius, radius, size=ell)
        values = list(centers[owner].as_array() + noise)
        values = _insert_wiggles(rng, values, (m - ell) // 2, radius)
        inputs.append(normalize(values))
    logger.debug(f"Planted {n} inputs around {k} centers with radius {radius}")
    return inputs, centers, radius
