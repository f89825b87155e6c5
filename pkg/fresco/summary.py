"""Machine-readable reports of clustering runs and other results."""

import json
from typing import Any, Dict, Optional, Sequence

import numpy as np

from fresco.center import ClusteringSolution
from fresco.curves import Curve
from fresco.utils.utils import format_number

# Report fields excluded from byte-for-byte determinism checks.
VOLATILE_FIELDS = ("runtime_ms",)


def _encode(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, Curve):
        value = list(value.values)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(key))}: {_encode(item, indent, level + 1)}"
            for key, item in value.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{end}}}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in value):
            return "[" + ", ".join(_encode(v, indent, level) for v in value) + "]"
        items = [f"{pad}{_encode(item, indent, level + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + f"\n{end}]" if items else "[]"
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def to_json(report: Dict[str, Any], indent: int = 2) -> str:
    """Serialize a report with every float at the configured significant digits."""
    return _encode(report, indent, 0) + "\n"


def solution_report(
    solution: ClusteringSolution,
    ids: Sequence[str],
    k: int,
    ell: int,
    seed: Optional[int] = None,
    runtime_ms: Optional[float] = None,
) -> Dict[str, Any]:
    """Report of a clustering run.

    Args:
        solution: ClusteringSolution.
        ids: sequence of str, input ids in input order.
        k: int, requested number of centers.
        ell: int, maximum center complexity.
        seed: int or None, seed the run used.
        runtime_ms: float or None, wall time of the run.

    Returns:
        dict with algorithm, objective, k, ell, epsilon, lambda, seed, cost,
        guarantee_factor, centers, assignment (id to center index) and
        runtime_ms.
    """
    guarantee = solution.guarantee
    return {
        "algorithm": guarantee.algorithm,
        "objective": guarantee.objective,
        "k": k,
        "ell": ell,
        "epsilon": guarantee.epsilon,
        "lambda": guarantee.lam,
        "seed": seed if seed is not None else guarantee.seed,
        "cost": solution.cost,
        "guarantee_factor": guarantee.factor,
        "centers": [list(c.values) for c in solution.centers],
        "assignment": dict(zip(ids, solution.assignment)),
        "runtime_ms": runtime_ms,
    }


def strip_volatile(report: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of a report without the fields that vary between identical runs."""
    return {key: value for key, value in report.items() if key not in VOLATILE_FIELDS}
