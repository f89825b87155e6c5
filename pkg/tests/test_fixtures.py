import itertools

import numpy as np
import pytest

from fresco.center import cost_inf
from fresco.curves import Curve
from fresco.fixtures import (
    doubling_bounded_fixture,
    doubling_unbounded_fixture,
    embed_linf,
    linf_offsets,
    planted_instance,
    unembed,
)
from fresco.frechet import distance
from fresco.signatures import delta_signature
from fresco.utils.errors import InvalidInputError


def test_linf_offsets():
    assert list(linf_offsets(4, 1.5)) == [9.0, -9.0, 9.0, -9.0]


def test_embed_linf_examples():
    a, b = embed_linf([[1, 2], [3, -1]])
    assert a == Curve([19, -16])
    assert b == Curve([21, -19])
    assert distance(a, b) == 3.0
    assert distance(a, a) == 0.0

    a, b = embed_linf([[0, 0, 0], [1, -2, 3]])
    assert a == Curve([18, -18, 18])
    assert distance(a, b) == 3.0


def test_embedding_is_an_isometry(rng):
    for _ in range(500):
        d = int(rng.integers(2, 6))
        points = rng.uniform(-100, 100, size=(2, d))
        a, b = embed_linf(points, bound=100.0)
        expected = float(np.max(np.abs(points[0] - points[1])))
        assert distance(a, b) == pytest.approx(expected, abs=1e-9)


def test_unembed_recovers_the_point():
    points = np.array([[1.5, -2.0, 0.25], [0.0, 3.0, -1.0]])
    for point, curve in zip(points, embed_linf(points, bound=3.0)):
        np.testing.assert_allclose(unembed(curve, 3, 3.0), point)
    with pytest.raises(InvalidInputError):
        unembed(Curve([0, 1]), 3, 3.0)


def test_embed_linf_rejects_bad_points():
    with pytest.raises(InvalidInputError):
        embed_linf([[1.0], [2.0]])
    with pytest.raises(InvalidInputError):
        embed_linf([[1.0, np.nan]])
    with pytest.raises(InvalidInputError):
        embed_linf([[1.0, 5.0]], bound=2.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_doubling_unbounded_fixture(d):
    curves, center = doubling_unbounded_fixture(d)
    assert len(curves) == 2**d + 1
    for a, b in itertools.combinations(curves, 2):
        assert distance(a, b) == pytest.approx(0.25)
    for curve in curves:
        assert distance(curve, center) <= 0.125 + 1e-12


def test_doubling_unbounded_fixture_curves():
    curves, _ = doubling_unbounded_fixture(1)
    assert curves == [
        Curve([0, 1, 0.5, 4]),
        Curve([0, 2, 1.5, 4]),
        Curve([0, 3, 2.5, 4]),
    ]
    with pytest.raises(InvalidInputError):
        doubling_unbounded_fixture(0)


@pytest.mark.parametrize("d, ell", [(1, 4), (2, 4), (2, 6), (3, 7)])
def test_doubling_bounded_fixture(d, ell):
    curves = doubling_bounded_fixture(d, ell)
    s = (ell - 2) // 2
    center = Curve([0, s * (2**d + 2)])
    assert len(curves) == 2**d + 1
    for curve in curves:
        assert len(curve) <= ell
        assert distance(curve, center) <= 0.25 + 1e-12
        assert delta_signature(curve, 0.125) == curve


def test_doubling_bounded_fixture_curves():
    assert doubling_bounded_fixture(1, 4) == [
        Curve([0, 1, 0.5, 4]),
        Curve([0, 2, 1.5, 4]),
        Curve([0, 3, 2.5, 4]),
    ]
    with pytest.raises(InvalidInputError):
        doubling_bounded_fixture(1, 3)


def test_planted_instance_without_noise_reproduces_centers():
    inputs, centers, bound = planted_instance(
        2, 3, 6, 3, radius=0.0, separation=5.0, seed=1
    )
    assert bound == 0.0
    assert all(curve in centers for curve in inputs)
    assert cost_inf(inputs, centers)[0] == 0.0


def test_planted_instance_small_radius():
    inputs, centers, bound = planted_instance(
        1, 2, 5, 2, radius=0.1, separation=5.0, seed=2
    )
    assert len(inputs) == 5 and len(centers) == 1
    assert cost_inf(inputs, centers)[0] <= 0.1 + 1e-12


def test_planted_instance_groups_are_separated():
    inputs, centers, _ = planted_instance(
        2, 3, 12, 7, radius=0.5, separation=10.0, seed=3
    )
    assert distance(*centers) > 4
    for curve in inputs:
        close = [distance(curve, c) <= 0.5 + 1e-12 for c in centers]
        assert sum(close) == 1
        assert len(curve) <= 7


def test_planted_instance_always_meets_its_bound():
    for seed in range(20):
        inputs, centers, bound = planted_instance(
            3, 4, 15, 10, radius=0.3, separation=3.0, seed=seed
        )
        assert cost_inf(inputs, centers)[0] <= bound + 1e-12
        assert all(len(c) == 4 for c in centers)


def test_planted_instance_uses_configured_defaults():
    first = planted_instance(1, 2, 4, 4)
    second = planted_instance(1, 2, 4, 4)
    assert first[2] == 0.5
    assert first[0] == second[0]


@pytest.mark.parametrize(
    "args",
    [
        (0, 2, 5, 4, 0.5, 5.0),
        (1, 1, 5, 4, 0.5, 5.0),
        (1, 3, 5, 2, 0.5, 5.0),
        (1, 2, 5, 4, 1.0, 8.0),
        (1, 2, 5, 4, -1.0, 8.0),
    ],
)
def test_planted_instance_rejects_infeasible_parameters(args):
    with pytest.raises(InvalidInputError):
        planted_instance(*args)
