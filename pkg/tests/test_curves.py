import numpy as np
import pytest

from fresco.curves import (
    Curve,
    IntervalUnion,
    concat,
    discretize,
    normalize,
    union_of_ranges,
)
from fresco.utils.errors import InvalidInputError

from tests.conftest import random_curve


def test_normalize_drops_repeats_and_monotone_interior():
    assert normalize([0, 0, 1, 1, 2]).values == (0.0, 2.0)
    assert normalize([0, 1, 0.5, 2]).values == (0.0, 1.0, 0.5, 2.0)
    assert normalize([3, 3, 3]).values == (3.0,)


def test_normalize_collapses_plateaus_inside_a_run():
    assert normalize([0, 2, 2, 1, 1, 3]).values == (0.0, 2.0, 1.0, 3.0)
    assert normalize([0, 1, 2, 1.5, 1.5, 3]).values == (0.0, 2.0, 1.5, 3.0)


def test_normalize_rejects_empty_and_non_finite():
    with pytest.raises(InvalidInputError):
        normalize([])
    with pytest.raises(InvalidInputError, match="position 1"):
        normalize([0.0, np.nan, 1.0])
    with pytest.raises(InvalidInputError):
        normalize([0.0, np.inf])


def test_normalize_is_idempotent_and_alternating(rng):
    for _ in range(200):
        raw = rng.integers(-5, 6, size=int(rng.integers(1, 30)))
        curve = normalize(raw)
        assert normalize(curve.values) == curve
        v = curve.as_array()
        steps = np.sign(np.diff(v))
        assert np.all(steps != 0)
        assert np.all(steps[1:] == -steps[:-1])


def test_curve_constructor_requires_normalized_values():
    with pytest.raises(InvalidInputError, match="not normalized"):
        Curve([0, 1, 2])
    with pytest.raises(InvalidInputError):
        Curve([])
    curve = Curve([0, 2, 1])
    assert curve.complexity == 3
    assert curve.value_range == (0.0, 2.0)
    assert not curve.is_monotone
    assert Curve([1]).is_monotone


def test_curve_equality_and_hash():
    assert Curve([0, 1]) == normalize([0, 0.5, 1])
    assert len({Curve([0, 1]), normalize([0, 1, 1])}) == 1
    assert Curve([0, 1]) != Curve([1, 0])


def test_subcurve_normalizes_the_slice():
    curve = Curve([0, 4, 1, 3, 2])
    assert curve.subcurve(1, 3).values == (4.0, 1.0, 3.0)
    assert curve.subcurve(2, 2).values == (1.0,)
    with pytest.raises(InvalidInputError):
        curve.subcurve(3, 5)


def test_concat_requires_shared_endpoint():
    assert concat(Curve([0, 2]), Curve([2, 1])).values == (0.0, 2.0, 1.0)
    assert concat(Curve([0, 1]), Curve([1, 2])).values == (0.0, 2.0)
    with pytest.raises(InvalidInputError):
        concat(Curve([0, 1]), Curve([2, 3]))


def test_union_of_ranges_merges_overlaps():
    union = union_of_ranges([(0, 1), (1.5, 1), (10, 0)])
    assert union.intervals == ((-1.0, 2.5), (10.0, 10.0))
    assert union.measure == pytest.approx(3.5)
    assert union.contains(10.0)
    assert not union.contains(5.0)


def test_union_of_ranges_rejects_negative_radius():
    with pytest.raises(InvalidInputError):
        union_of_ranges([(0, -1)])


def test_interval_union_touching_intervals_merge():
    assert IntervalUnion([(0, 1), (1, 2)]).intervals == ((0.0, 2.0),)
    assert IntervalUnion([(0, 1)]).union(IntervalUnion([(3, 4)])).measure == 2.0


def test_discretize_includes_endpoints_and_step():
    grid = discretize(IntervalUnion([(0, 1)]), 0.25)
    np.testing.assert_allclose(grid, [0, 0.25, 0.5, 0.75, 1.0])
    grid = discretize(IntervalUnion([(0, 1), (5, 5)]), 0.4)
    np.testing.assert_allclose(grid, [0, 0.4, 0.8, 1.0, 5.0])


def test_discretize_covers_every_point_within_beta(rng):
    for _ in range(50):
        centers = rng.uniform(-50, 50, size=5)
        union = union_of_ranges((c, rng.uniform(0, 3)) for c in centers)
        beta = rng.uniform(0.05, 1.0)
        grid = discretize(union, beta)
        for lo, hi in union:
            probes = rng.uniform(lo, hi, size=20) if hi > lo else np.array([lo])
            gaps = np.abs(probes[:, None] - grid[None, :]).min(axis=1)
            assert np.all(gaps <= beta / 2 + 1e-9)
        assert all(union.contains(g) for g in grid)


def test_discretize_rejects_non_positive_step():
    with pytest.raises(InvalidInputError):
        discretize(IntervalUnion([(0, 1)]), 0.0)


def test_random_curve_helper_is_normalized(rng):
    for _ in range(20):
        curve = random_curve(rng)
        assert Curve(curve.values) == curve
