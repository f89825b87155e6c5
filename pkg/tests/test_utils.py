import json

import numpy as np
import pytest

from fresco.center import ClusteringSolution, Guarantee
from fresco.curves import Curve
from fresco.summary import solution_report, strip_volatile, to_json
from fresco.utils.errors import (
    CandidateLimitError,
    FrescoError,
    InvalidInputError,
    InvariantViolationError,
)
from fresco.utils.utils import format_number, parallel_map, resolve_threads


def test_format_number():
    assert format_number(2.0) == "2.0"
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(-3) == "-3.0"
    assert format_number(1e300) == "1.0000000000000001e+300"
    assert format_number(0.5, digits=3) == "0.5"


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("FRESCO_THREADS", raising=False)
    assert resolve_threads() == 1
    assert resolve_threads(4) == 4
    assert resolve_threads(0) == 1
    monkeypatch.setenv("FRESCO_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("FRESCO_THREADS", "many")
    assert resolve_threads() == 1


@pytest.mark.parametrize("threads", [1, 4])
def test_parallel_map_preserves_order(threads):
    squares = [x * x for x in range(10)]
    assert parallel_map(lambda x: x * x, range(10), threads) == squares
    assert parallel_map(abs, [], threads) == []


def test_error_exit_codes():
    assert InvalidInputError("bad").exit_code == 1
    assert CandidateLimitError(10, 5).exit_code == 2
    assert InvariantViolationError("broken").exit_code == 3
    assert isinstance(InvalidInputError("bad"), ValueError)
    assert issubclass(CandidateLimitError, FrescoError)
    assert "10" in str(CandidateLimitError(10, 5))


def test_to_json_uses_fixed_precision():
    text = to_json(
        {"cost": 0.1, "k": np.int64(2), "centers": [[0.0, 9.0]], "seed": None}
    )
    assert text == (
        "{\n"
        '  "cost": 0.10000000000000001,\n'
        '  "k": 2,\n'
        '  "centers": [\n'
        "    [0.0, 9.0]\n"
        "  ],\n"
        '  "seed": null\n'
        "}\n"
    )
    assert json.loads(text)["cost"] == 0.1


def test_to_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        to_json({"value": object()})


def test_solution_report():
    P = [Curve([0, 5]), Curve([0, 9])]
    guarantee = Guarantee("median", 1.5, "one-median", epsilon=0.5, lam=0.2, seed=3)
    solution = ClusteringSolution.evaluate(P, [Curve([0, 9])], guarantee)
    report = solution_report(solution, ["a", "b"], 1, 2, runtime_ms=12.5)
    assert list(report) == [
        "algorithm",
        "objective",
        "k",
        "ell",
        "epsilon",
        "lambda",
        "seed",
        "cost",
        "guarantee_factor",
        "centers",
        "assignment",
        "runtime_ms",
    ]
    assert report["seed"] == 3
    assert report["cost"] == 4.0
    assert report["assignment"] == {"a": 0, "b": 0}
    assert report["centers"] == [[0.0, 9.0]]
    assert "runtime_ms" not in strip_volatile(report)
    assert json.loads(to_json(report))["guarantee_factor"] == 1.5
