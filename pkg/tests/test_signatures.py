import itertools

import numpy as np
import pytest

from fresco.curves import Curve, normalize
from fresco.frechet import distance
from fresco.signatures import (
    DIRECTION_PRESERVING,
    LOCATION,
    MINIMUM_EDGE_LENGTH,
    NON_DEGENERACY,
    SEPARATOR,
    build_vertex_permutation,
    delta_signature,
    extract_signature,
    signature_indices,
    simplify,
    validate_signature,
)
from fresco.utils.errors import InvalidInputError

from tests.conftest import random_curve


def test_delta_signature_examples():
    assert delta_signature(Curve([0, 0.5, 0.2, 0.6]), 2) == Curve([0, 0.6])
    assert delta_signature(Curve([0, 1, 0.5, 2]), 0.3) == Curve([0, 2])
    assert delta_signature(Curve([0, 1, 0.5, 2]), 0.2) == Curve([0, 1, 0.5, 2])


def test_delta_signature_of_short_curves():
    assert delta_signature(Curve([3.0]), 1.0) == Curve([3.0])
    assert delta_signature(Curve([0, 5]), 1.0) == Curve([0, 5])
    assert delta_signature(Curve([0, 5]), 10.0) == Curve([0, 5])
    assert delta_signature(Curve([0, 1, 0]), 2.0) == Curve([0.0])


def test_delta_signature_rejects_non_positive_scale():
    with pytest.raises(InvalidInputError):
        delta_signature(Curve([0, 1]), 0.0)
    with pytest.raises(InvalidInputError):
        signature_indices(Curve([0, 1]), -1.0)


def test_validate_signature_examples():
    tau = Curve([0, 1, 0.5, 2])
    assert validate_signature(Curve([0, 2]), tau, 0.3).ok
    report = validate_signature(Curve([0, 2]), tau, 0.2)
    assert not report.ok
    assert DIRECTION_PRESERVING in report.conditions()
    assert validate_signature(tau, tau, 0.2)


def test_validate_signature_reports_each_condition():
    tau = Curve([0, 10, 4, 9])
    report = validate_signature(tau, tau, 3.5)
    assert MINIMUM_EDGE_LENGTH in report.conditions()
    assert (MINIMUM_EDGE_LENGTH, 1) in report.violations

    assert validate_signature(Curve([0, 5]), tau, 1.0).violations == [(LOCATION, 0)]

    wiggle = Curve([0, 10, 9, 12, 1, 20])
    report = validate_signature(Curve([0, 12, 9, 20]), wiggle, 0.4)
    assert report.violations == [(LOCATION, 0)]
    report = validate_signature(Curve([0, 10, 1, 20]), wiggle, 0.4)
    assert DIRECTION_PRESERVING in report.conditions()
    report = validate_signature(Curve._trusted([0, 9, 12, 20]), wiggle, 0.1)
    assert (NON_DEGENERACY, 1) in report.violations
    assert (NON_DEGENERACY, 2) in report.violations


def test_trivial_two_vertex_signature_is_accepted():
    tau = Curve([0, 0.5, 0.2, 0.6])
    assert validate_signature(delta_signature(tau, 2), tau, 2).ok


def test_random_signatures_are_valid_and_close(rng):
    for _ in range(1000):
        tau = random_curve(rng, max_vertices=50)
        delta = float(rng.uniform(0.01, 60))
        sigma = delta_signature(tau, delta)
        report = validate_signature(sigma, tau, delta)
        assert report.ok, (tau, delta, report)
        assert sigma.first == tau.first and sigma.last == tau.last
        assert distance(sigma, tau) <= delta + 1e-9


def test_signatures_nest_as_delta_grows(rng):
    for _ in range(100):
        tau = random_curve(rng, max_vertices=30)
        previous = set(range(len(tau)))
        for delta in np.sort(rng.uniform(0.01, 80, size=8)):
            indices = set(signature_indices(tau, float(delta)))
            assert indices <= previous
            previous = indices


def test_close_curves_need_nearly_as_many_vertices(rng):
    for _ in range(200):
        tau = random_curve(rng, max_vertices=20)
        delta = float(rng.uniform(0.5, 20))
        size = len(delta_signature(tau, delta))
        pi = normalize(tau.as_array() + rng.uniform(-delta, delta, size=len(tau)))
        assert distance(pi, tau) <= delta + 1e-9
        assert len(pi) >= size - 2


def test_removing_a_vertex_far_from_the_signature_keeps_the_distance(rng):
    checked = 0
    for _ in range(400):
        tau = random_curve(rng, max_vertices=20)
        if len(tau) < 3:
            continue
        delta = float(rng.uniform(1, 15))
        sigma = delta_signature(tau, delta)
        last = len(sigma) - 1
        widths = [(4 if j in (0, last) else 1) * delta for j in range(len(sigma))]
        ranges = [(v - w, v + w) for v, w in zip(sigma, widths)]
        pi = tau.as_array() + rng.uniform(-delta, delta, size=len(tau))
        for i in range(1, len(pi) - 1):
            if any(lo <= pi[i] <= hi for lo, hi in ranges):
                continue
            shortened = normalize(np.delete(pi, i))
            assert distance(tau, shortened) <= delta + 1e-9
            checked += 1
    assert checked > 0


def test_vertex_permutation_examples():
    perm = build_vertex_permutation(Curve([0, 10, 4, 9]))
    assert perm.entries == (SEPARATOR, 1, 2, SEPARATOR, 0, 3)
    assert perm.thresholds == (0.0, 3.0)
    assert perm.levels == [(0, 1, 2, 3), (0, 3)]
    assert perm.sizes == [4, 2]
    assert perm.signature_at(2.99) == Curve([0, 10, 4, 9])
    assert perm.signature_at(3.0) == Curve([0, 9])

    perm = build_vertex_permutation(Curve([0, 5]))
    assert perm.entries == (SEPARATOR, 0, 1)
    assert perm.thresholds == (0.0,)


def test_vertex_permutation_threshold_matches_one_pass_signature():
    tau = Curve([0, 1, 0.5, 2])
    perm = build_vertex_permutation(tau)
    assert perm.thresholds == (0.0, 0.25)
    assert perm.level_at(0.25) == 1
    assert perm.signature_at(0.25) == delta_signature(tau, 0.25) == Curve([0, 2])
    assert perm.signature_at(0.249) == delta_signature(tau, 0.249) == tau


def test_vertex_permutation_rejects_single_vertex():
    with pytest.raises(InvalidInputError):
        build_vertex_permutation(Curve([1.0]))


def test_permutation_levels_match_one_pass_signatures(rng):
    for _ in range(300):
        tau = random_curve(rng, max_vertices=25)
        if len(tau) < 2:
            continue
        perm = build_vertex_permutation(tau)
        levels = perm.levels
        assert levels[-1] == (0, len(tau) - 1)
        vertices = sorted(e for e in perm.entries if e is not SEPARATOR)
        assert vertices == list(range(len(tau)))
        for finer, coarser in zip(levels, levels[1:]):
            assert set(coarser) < set(finer)
        bounds = list(perm.thresholds) + [2 * perm.thresholds[-1] + 1]
        for i, level in enumerate(levels):
            lo, hi = bounds[i], bounds[i + 1]
            for u in (0.05, 0.5, 0.95):
                delta = lo + u * (hi - lo)
                assert tuple(signature_indices(tau, delta)) == level, (tau, delta)


def test_extract_signature_examples():
    perm = build_vertex_permutation(Curve([0, 10, 4, 9]))
    assert extract_signature(perm, 4) == Curve([0, 10, 4, 9])
    assert extract_signature(perm, 3) == Curve([0, 9])
    assert extract_signature(perm, 2) == Curve([0, 9])
    assert extract_signature(perm, 10) == Curve([0, 10, 4, 9])
    with pytest.raises(InvalidInputError):
        extract_signature(perm, 1)


def test_extract_signature_picks_the_largest_level_within_budget(rng):
    for _ in range(200):
        tau = random_curve(rng, max_vertices=25)
        if len(tau) < 2:
            continue
        perm = build_vertex_permutation(tau)
        ell = int(rng.integers(2, len(tau) + 2))
        extracted = extract_signature(perm, ell)
        expected = max(size for size in perm.sizes if size <= ell)
        assert len(extracted) == expected


def _best_error(tau: Curve, size: int, grid: np.ndarray) -> float:
    return min(
        distance(tau, normalize(values))
        for values in itertools.product(grid, repeat=size)
    )


def test_simplify_examples():
    tau = Curve([0, 10, 4, 9])
    assert simplify(tau, 4) == tau
    assert distance(tau, simplify(tau, 4)) == 0.0

    two = simplify(tau, 2)
    assert two == Curve([0, 9])
    assert distance(tau, two) == pytest.approx(3.0)
    assert distance(tau, two) <= 2 * _best_error(tau, 2, np.arange(-2, 12.5, 0.5))

    three = simplify(tau, 3)
    assert three == Curve([0, 9])
    assert distance(tau, three) <= 2 * _best_error(tau, 3, np.arange(-1, 12, 1.0))


def test_simplify_rejects_small_budget():
    with pytest.raises(InvalidInputError):
        simplify(Curve([0, 1]), 1)


def test_simplify_error_is_within_twice_the_signature_scale(rng):
    for _ in range(200):
        tau = random_curve(rng, max_vertices=25)
        if len(tau) < 3:
            continue
        ell = int(rng.integers(2, len(tau)))
        simplified = simplify(tau, ell)
        assert len(simplified) <= ell
        perm = build_vertex_permutation(tau)
        level = perm.sizes.index(len(simplified))
        assert distance(tau, simplified) <= perm.thresholds[level] + 1e-9


@pytest.mark.slow
def test_delta_signature_on_a_long_random_walk():
    rng = np.random.default_rng(7)
    tau = normalize(np.cumsum(rng.normal(size=1_000_000)))
    sigma = delta_signature(tau, 25.0)
    assert sigma.first == tau.first and sigma.last == tau.last
    assert 2 <= len(sigma) < len(tau)
