"""(k, l)-center clustering of curves under the Fréchet distance.

Centers are restricted to at most ``ell`` vertices. `constant_factor_center`
runs farthest-first traversal over simplified inputs; `refine_center` then
binary-searches the optimal radius, at each probe enumerating center curves
whose vertices lie on a grid around the inputs' signature vertices.
"""

import logging
import math
from functools import partial
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from fresco import config
from fresco.curves import Curve, IntervalUnion, discretize, union_of_ranges
from fresco.frechet import (
    decide_many,
    distance,
    distance_matrix,
    lower_bounds_many,
)
from fresco.signatures import delta_signature, simplify
from fresco.utils.errors import (
    CandidateLimitError,
    InvalidInputError,
    InvariantViolationError,
)
from fresco.utils.utils import parallel_map

logger = logging.getLogger(__name__)

MAX_CANDIDATES = config.get("candidates").get("max_candidates")
BATCH_ROWS = config.get("frechet").get("batch_rows")
TOLERANCE = config.get("frechet").get("tolerance")


class Guarantee:
    """Approximation guarantee a solution was produced under.

    Attributes:
        objective: str, "center" or "median".
        factor: float, approximation factor bound.
        algorithm: str, name of the producing algorithm.
        epsilon: float or None.
        lam: float or None, per-repeat failure probability of sampling algorithms.
        seed: int or None.
    """

    def __init__(
        self,
        objective: str,
        factor: float,
        algorithm: str,
        epsilon: Optional[float] = None,
        lam: Optional[float] = None,
        seed: Optional[int] = None,
    ) -> None:
        if objective not in ("center", "median"):
            raise InvalidInputError(f"Unknown objective {objective!r}.")
        self.objective = objective
        self.factor = float(factor)
        self.algorithm = algorithm
        self.epsilon = epsilon
        self.lam = lam
        self.seed = seed

    def __repr__(self) -> str:
        return (
            f"Guarantee({self.objective!r}, factor={self.factor}, "
            f"algorithm={self.algorithm!r}, epsilon={self.epsilon}, "
            f"lam={self.lam}, seed={self.seed})"
        )


class ClusteringSolution:
    """Centers, assignment and cost of a clustering.

    Attributes:
        centers: tuple of Curve.
        assignment: tuple of int, center index per input.
        cost: float, objective value.
        guarantee: Guarantee.
    """

    def __init__(
        self,
        centers: Sequence[Curve],
        assignment: Sequence[int],
        cost: float,
        guarantee: Guarantee,
    ) -> None:
        self.centers = tuple(centers)
        self.assignment = tuple(int(a) for a in assignment)
        self.cost = float(cost)
        self.guarantee = guarantee

    @classmethod
    def evaluate(
        cls,
        P: Sequence[Curve],
        centers: Sequence[Curve],
        guarantee: Guarantee,
        threads: Optional[int] = None,
    ) -> "ClusteringSolution":
        """Build a solution by assigning every input to its nearest center."""
        cost, assignment = _objective(P, centers, guarantee.objective, threads)
        return cls(centers, assignment, cost, guarantee)

    def check(
        self, P: Sequence[Curve], ell: Optional[int] = None, atol: float = 1e-9
    ) -> None:
        """Recompute the objective and verify the stored cost and center sizes.

        Raises:
            InvariantViolationError: if the cost or a center size is inconsistent.
        """
        cost, _ = _objective(P, self.centers, self.guarantee.objective)
        if abs(cost - self.cost) > atol * max(1.0, abs(cost)):
            raise InvariantViolationError(
                f"Stored cost {self.cost} differs from recomputed cost {cost}."
            )
        if ell is not None and any(len(c) > ell for c in self.centers):
            raise InvariantViolationError(f"A center has more than {ell} vertices.")

    def __repr__(self) -> str:
        return (
            f"ClusteringSolution(k={len(self.centers)}, cost={self.cost}, "
            f"guarantee={self.guarantee})"
        )


def _objective(
    P: Sequence[Curve],
    centers: Sequence[Curve],
    objective: str,
    threads: Optional[int] = None,
) -> Tuple[float, List[int]]:
    if not P or not centers:
        raise InvalidInputError("Need at least one input and one center.")
    distances = distance_matrix(P, centers, threads)
    assignment = np.argmin(distances, axis=1)
    nearest = distances[np.arange(len(P)), assignment]
    cost = float(nearest.max()) if objective == "center" else float(nearest.sum())
    return cost, assignment.tolist()


def cost_inf(
    P: Sequence[Curve], C: Sequence[Curve], threads: Optional[int] = None
) -> Tuple[float, List[int]]:
    """Largest distance from an input to its nearest center, with the assignment."""
    return _objective(P, C, "center", threads)


def gonzalez(
    curves: Sequence[Curve], k: int, threads: Optional[int] = None
) -> List[int]:
    """Farthest-first traversal from index 0.

    Args:
        curves: sequence of Curve.
        k: int, number of indices to pick.
        threads: int or None, worker cap.

    Returns:
        List of k distinct indices.

    Raises:
        InvalidInputError: if k is not in [1, len(curves)].
    """
    if not 1 <= k <= len(curves):
        raise InvalidInputError(f"k={k} must lie in [1, {len(curves)}].")
    chosen = [0]
    nearest = distance_matrix([curves[0]], curves, threads)[0]
    while len(chosen) < k:
        masked = nearest.copy()
        masked[chosen] = -1.0
        nxt = int(np.argmax(masked))
        chosen.append(nxt)
        to_next = distance_matrix([curves[nxt]], curves, threads)[0]
        nearest = np.minimum(nearest, to_next)
    return chosen


def count_alternating(choices: Sequence[np.ndarray]) -> int:
    """Number of strictly alternating sequences with position p taken from choices[p].

    Every entry of `choices` must be sorted and free of duplicates.
    """
    values = np.asarray(choices[0], dtype=float)
    flat = np.ones(len(values), dtype=object)
    up = np.zeros(len(values), dtype=object)
    down = np.zeros(len(values), dtype=object)
    for nxt in choices[1:]:
        nxt = np.asarray(nxt, dtype=float)
        rising = np.concatenate([[0], np.cumsum(flat + down)]).astype(object)
        falling = np.concatenate([[0], np.cumsum(flat + up)]).astype(object)
        below = np.searchsorted(values, nxt, side="left")
        above = np.searchsorted(values, nxt, side="right")
        up, down = rising[below], falling[-1] - falling[above]
        flat = np.zeros(len(nxt), dtype=object)
        values = nxt
    return int(sum(flat) + sum(up) + sum(down))


def _extend(
    rows: np.ndarray, steps: np.ndarray, values: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Append every value that continues the alternation of each row."""
    last = rows[:, -1]
    below = np.searchsorted(values, last, side="left")
    above = np.searchsorted(values, last, side="right")
    parts, part_steps = [], []
    for counts, base, step in (
        (np.where(steps >= 0, below, 0), np.zeros_like(below), -1),
        (np.where(steps <= 0, len(values) - above, 0), above, 1),
    ):
        total = int(counts.sum())
        if not total:
            continue
        owner = np.repeat(np.arange(len(rows)), counts)
        offset = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        parts.append(np.column_stack([rows[owner], values[base[owner] + offset]]))
        part_steps.append(np.full(total, step))
    if not parts:
        return np.empty((0, rows.shape[1] + 1)), np.empty(0, dtype=int)
    return np.concatenate(parts), np.concatenate(part_steps)


def _grow(
    rows: np.ndarray, steps: np.ndarray, rest: Sequence[np.ndarray], block: int
) -> Iterator[np.ndarray]:
    if not rest:
        yield rows
        return
    values = rest[0]
    chunk = max(1, block // max(1, len(values)))
    for start in range(0, len(rows), chunk):
        new_rows, new_steps = _extend(
            rows[start : start + chunk], steps[start : start + chunk], values
        )
        if len(new_rows):
            yield from _grow(new_rows, new_steps, rest[1:], block)


def alternating_sequences(
    choices: Sequence[np.ndarray], block: int = BATCH_ROWS
) -> Iterator[np.ndarray]:
    """Yield blocks of strictly alternating sequences, position p from choices[p].

    Args:
        choices: sequence of sorted unique value arrays, one per position.
        block: int, approximate number of rows per yielded block.

    Yields:
        Arrays of shape (rows, len(choices)).
    """
    choices = [np.asarray(c, dtype=float) for c in choices]
    first = choices[0].reshape(-1, 1)
    if not len(first):
        return
    yield from _grow(first, np.zeros(len(first), dtype=int), choices[1:], block)


class CandidateSet:
    """All normalized curves with 2..ell vertices drawn from a value grid.

    The set is represented by its grid and enumerated lazily.

    Attributes:
        grid: sorted array of candidate vertex values.
        ell: int, maximum number of vertices.
        union: IntervalUnion the grid was drawn from.
        infeasible: bool, set when generation rejected the scale; the set is
            then empty.
    """

    def __init__(
        self,
        grid: np.ndarray,
        ell: int,
        union: Optional[IntervalUnion] = None,
        infeasible: bool = False,
    ) -> None:
        if ell < 2:
            raise InvalidInputError(f"Candidate curves need ell >= 2, got {ell}.")
        self.grid = np.unique(np.asarray(grid, dtype=float))
        self.ell = int(ell)
        self.union = union if union is not None else IntervalUnion()
        self.infeasible = bool(infeasible)
        if self.infeasible and self.grid.size:
            raise InvalidInputError("An infeasible candidate set must be empty.")

    @classmethod
    def rejected(cls, ell: int, union: IntervalUnion) -> "CandidateSet":
        return cls(np.empty(0), ell, union, infeasible=True)

    @property
    def size(self) -> int:
        """Number of candidate curves."""
        return sum(
            count_alternating([self.grid] * length)
            for length in range(2, self.ell + 1)
        )

    def blocks(self, block: int = BATCH_ROWS) -> Iterator[np.ndarray]:
        """Candidate curves as value arrays, shortest first."""
        for length in range(2, self.ell + 1):
            yield from alternating_sequences([self.grid] * length, block)

    def contains(self, curve: Curve, atol: float = 1e-9) -> bool:
        if not 2 <= len(curve) <= self.ell or not self.grid.size:
            return False
        pos = np.clip(np.searchsorted(self.grid, curve.values), 1, len(self.grid) - 1)
        gaps = np.minimum(
            np.abs(self.grid[pos] - curve.values),
            np.abs(self.grid[pos - 1] - curve.values),
        )
        return bool(np.all(gaps <= atol))

    def __iter__(self) -> Iterator[Curve]:
        for rows in self.blocks():
            for row in rows:
                yield Curve._trusted(row)

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return bool(self.grid.size) and not self.infeasible

    def __repr__(self) -> str:
        return (
            f"CandidateSet(grid={len(self.grid)} values, ell={self.ell}, "
            f"infeasible={self.infeasible})"
        )


def generate_center_candidates(
    P: Sequence[Curve], alpha: float, beta: float, k: int, ell: int
) -> CandidateSet:
    """Candidate centers from a grid around the inputs' alpha-signature vertices.

    Args:
        P: sequence of Curve, the inputs.
        alpha: float, scale of the signatures and ranges.
        beta: float, grid resolution.
        k: int, number of centers.
        ell: int, maximum center complexity.

    Returns:
        CandidateSet, flagged infeasible when the union of ranges is longer
        than 24 * alpha * k * ell.

    Raises:
        InvalidInputError: if alpha or beta is not positive.
    """
    if not (alpha > 0 and beta > 0):
        raise InvalidInputError(f"alpha={alpha} and beta={beta} must be positive.")
    vertices = [v for tau in P for v in delta_signature(tau, alpha)]
    union = union_of_ranges((v, 4 * alpha) for v in vertices)
    limit = 24 * alpha * k * ell
    if union.measure > limit:
        logger.debug(f"Range union measure {union.measure:.6g} exceeds {limit:.6g}")
        return CandidateSet.rejected(ell, union)
    return CandidateSet(discretize(union, beta), ell, union)


def _range_mask(
    grid: np.ndarray, tau: Curve, threshold: float, tol: float
) -> np.ndarray:
    """Grid values within the signature ranges of tau at the given threshold."""
    if threshold > 0:
        sig = delta_signature(tau, threshold).values
    else:
        sig = tau.values
    radii = np.full(len(sig), threshold)
    radii[0] = radii[-1] = 4 * threshold
    gaps = np.abs(grid[:, None] - np.asarray(sig)[None, :])
    return np.any(gaps <= radii[None, :] + tol, axis=1)


def _hits_signature(
    rows: np.ndarray, sig: np.ndarray, threshold: float, tol: float
) -> np.ndarray:
    """Whether each row visits the ranges around sig's vertices in order."""
    matched = np.zeros(len(rows), dtype=int)
    s = len(sig)
    for pos in range(rows.shape[1]):
        column = rows[:, pos]
        for _ in range(s):
            open_ = matched < s
            hit = open_ & (
                np.abs(column - sig[np.minimum(matched, s - 1)]) <= threshold + tol
            )
            if not hit.any():
                break
            matched += hit
    return matched == s


class _CoverageIndex:
    """Coverage patterns seen so far, each with its first candidate."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.weights = [1 << i for i in range(n)]
        self.patterns: Dict[int, np.ndarray] = {}
        self.evaluated = 0

    def add(self, rows: np.ndarray, coverage: np.ndarray) -> None:
        self.evaluated += len(rows)
        useful = np.flatnonzero(coverage.any(axis=1))
        if not useful.size:
            return
        unique, first = np.unique(coverage[useful], axis=0, return_index=True)
        in_order = sorted(zip(unique.tolist(), first), key=lambda x: x[1])
        for pattern_row, index in in_order:
            key = sum(w for w, bit in zip(self.weights, pattern_row) if bit)
            if key not in self.patterns:
                self.patterns[key] = rows[useful[index]].copy()

    def maximal(self) -> List[Tuple[int, np.ndarray]]:
        """Patterns not strictly contained in another, widest first."""
        keys = sorted(self.patterns, key=lambda p: (-bin(p).count("1"), p))
        kept: List[int] = []
        for key in keys:
            if not any(key & other == key for other in kept):
                kept.append(key)
        return [(key, self.patterns[key]) for key in kept]


def _exact_cover(patterns: Sequence[int], full: int, k: int) -> Optional[List[int]]:
    """Indices of at most k patterns whose union is `full`, or None."""
    failed = set()

    def search(covered: int, depth: int, chosen: List[int]) -> Optional[List[int]]:
        if covered == full:
            return chosen
        if depth == k or (covered, depth) in failed:
            return None
        missing = (full & ~covered) & -(full & ~covered)
        for index, pattern in enumerate(patterns):
            if pattern & missing:
                found = search(covered | pattern, depth + 1, chosen + [index])
                if found is not None:
                    return found
        failed.add((covered, depth))
        return None

    return search(0, 0, [])


def evaluate_cover(
    P: Sequence[Curve],
    gamma: CandidateSet,
    k: int,
    threshold: float,
    max_candidates: Optional[int] = None,
    threads: Optional[int] = None,
) -> Optional[ClusteringSolution]:
    """Find at most k candidates whose threshold-balls cover every input.

    Candidates are enumerated per first vertex. For a first vertex f only
    inputs starting within the threshold of f can be covered, and interior
    vertices are taken from the grid values inside those inputs' signature
    ranges: any vertex outside all of them can be removed without uncovering
    an input, so no coverage pattern is lost. Coverage is established by cheap
    necessary tests followed by the exact decision procedure.

    Args:
        P: sequence of Curve, the inputs.
        gamma: CandidateSet.
        k: int, number of centers.
        threshold: float, covering radius.
        max_candidates: int or None, cap on enumerated curves.
        threads: int or None, worker cap.

    Returns:
        ClusteringSolution covering P within threshold, or None.

    Raises:
        CandidateLimitError: if the enumeration exceeds max_candidates.
    """
    if not gamma:
        return None
    if max_candidates is None:
        max_candidates = MAX_CANDIDATES
    n = len(P)
    grid = gamma.grid
    tol = TOLERANCE * max(1.0, float(np.max(np.abs(grid))))
    limit = threshold + tol
    firsts = np.array([tau.first for tau in P])
    lasts = np.array([tau.last for tau in P])
    first_ok = np.abs(grid[:, None] - firsts[None, :]) <= limit
    last_ok = np.abs(grid[:, None] - lasts[None, :]) <= limit
    in_range = np.column_stack([_range_mask(grid, tau, threshold, tol) for tau in P])
    sigs = [
        delta_signature(tau, threshold).as_array() if threshold > 0 else tau.as_array()
        for tau in P
    ]

    plans = []
    for f_index in np.flatnonzero(first_ok.any(axis=1)):
        members = np.flatnonzero(first_ok[f_index])
        last_values = grid[last_ok[:, members].any(axis=1)]
        if not last_values.size:
            continue
        interior = grid[in_range[:, members].any(axis=1)]
        head = grid[f_index : f_index + 1]
        choices_by_length = [[head, last_values]] + [
            [head] + [interior] * (length - 2) + [last_values]
            for length in range(3, gamma.ell + 1)
        ]
        plans.append((members, choices_by_length))
    total = sum(count_alternating(c) for _, cs in plans for c in cs)
    if total > max_candidates:
        raise CandidateLimitError(total, max_candidates)
    logger.debug(f"Evaluating {total} candidates at threshold {threshold:.6g}")

    index = _CoverageIndex(n)
    constants = grid[(first_ok & last_ok).any(axis=1)]
    if constants.size:
        rows = constants.reshape(-1, 1)
        coverage = np.zeros((len(rows), n), dtype=bool)
        for i, tau in enumerate(P):
            coverage[:, i] = decide_many(rows, tau, threshold)
        index.add(rows, coverage)

    for members, choices_by_length in plans:
        for choices in choices_by_length:
            for rows in alternating_sequences(choices):
                coverage = np.zeros((len(rows), n), dtype=bool)
                column = partial(_covers_input, rows, P, sigs, threshold, tol)
                for i, col in zip(members, parallel_map(column, members, threads)):
                    coverage[:, i] = col
                index.add(rows, coverage)

    maximal = index.maximal()
    chosen = _exact_cover([key for key, _ in maximal], (1 << n) - 1, k)
    if chosen is None:
        return None
    centers = [Curve._trusted(maximal[i][1]) for i in chosen]
    return ClusteringSolution.evaluate(
        P, centers, Guarantee("center", 1.0, "cover"), threads
    )


def _covers_input(
    rows: np.ndarray,
    P: Sequence[Curve],
    sigs: Sequence[np.ndarray],
    threshold: float,
    tol: float,
    i: int,
) -> np.ndarray:
    return _covers(rows, P[i], sigs[i], threshold, tol)


def _covers(
    rows: np.ndarray, tau: Curve, sig: np.ndarray, threshold: float, tol: float
) -> np.ndarray:
    limit = threshold + tol
    keep = np.abs(rows[:, -1] - tau.last) <= limit
    keep &= lower_bounds_many(rows, tau) <= limit
    candidates = np.flatnonzero(keep)
    if candidates.size:
        candidates = candidates[_hits_signature(rows[candidates], sig, threshold, tol)]
    if candidates.size:
        candidates = candidates[decide_many(rows[candidates], tau, threshold)]
    out = np.zeros(len(rows), dtype=bool)
    out[candidates] = True
    return out


def constant_factor_center(
    P: Sequence[Curve], k: int, ell: int, threads: Optional[int] = None
) -> Tuple[ClusteringSolution, Tuple[float, float]]:
    """8-approximation from farthest-first traversal over simplified inputs.

    Args:
        P: sequence of Curve, the inputs.
        k: int, number of centers.
        ell: int, maximum center complexity.
        threads: int or None, worker cap.

    Returns:
        Tuple of the solution and the interval (D / 8, D) containing the
        optimal radius, where D is the traversal radius over the
        simplifications plus the largest simplification error.
    """
    solution, bounds, _ = _constant_factor_center(P, k, ell, threads)
    return solution, bounds


def _constant_factor_center(
    P: Sequence[Curve], k: int, ell: int, threads: Optional[int] = None
) -> Tuple[ClusteringSolution, Tuple[float, float], List[float]]:
    """`constant_factor_center` plus the simplification error of every input."""
    if not 1 <= k <= len(P):
        raise InvalidInputError(f"k={k} must lie in [1, {len(P)}].")
    simplified = [simplify(tau, ell) for tau in P]
    errors = parallel_map(lambda pair: distance(*pair), zip(P, simplified), threads)
    chosen = gonzalez(simplified, k, threads)
    centers = [simplified[i] for i in chosen]
    radius, _ = cost_inf(simplified, centers, threads)
    bound = radius + max(errors)
    solution = ClusteringSolution.evaluate(
        P, centers, Guarantee("center", 8.0, "constant-factor"), threads
    )
    logger.info(f"Constant-factor center cost {solution.cost:.6g}, bound {bound:.6g}")
    return solution, (bound / 8, bound), errors


def refine_center(
    P: Sequence[Curve],
    k: int,
    ell: int,
    epsilon: float,
    max_candidates: Optional[int] = None,
    threads: Optional[int] = None,
) -> ClusteringSolution:
    """(1 + epsilon)-approximation by binary search over the optimal radius.

    Each probe alpha first asks for a cover at threshold alpha using the grid
    for alpha / (1 + epsilon / 2); success caps the optimum at the cover's
    cost. Otherwise a second cover at threshold (1 + epsilon) * alpha is
    attempted with the grid for alpha; failure proves the optimum exceeds
    alpha.

    Args:
        P: sequence of Curve, the inputs.
        k: int, number of centers.
        ell: int, maximum center complexity.
        epsilon: float, positive accuracy parameter.
        max_candidates: int or None, cap on enumerated candidate curves.
        threads: int or None, worker cap.

    Returns:
        ClusteringSolution; its guarantee factor is 1 + epsilon unless the
        probe budget ran out first, in which case it is the certified ratio.

    Raises:
        InvalidInputError: if epsilon is not positive.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}.")
    best, (lo, hi), errors = _constant_factor_center(P, k, ell, threads)
    if hi == 0:
        return ClusteringSolution(
            best.centers,
            best.assignment,
            best.cost,
            Guarantee("center", 1.0, "refine", epsilon=epsilon),
        )
    lo = max(lo, max(errors) / 2)
    hi = min(hi, best.cost)
    probes = math.ceil(math.log(8) / math.log1p(epsilon / 2))

    for probe in range(probes):
        if hi <= (1 + epsilon) * lo:
            break
        alpha = math.sqrt(lo * hi)
        alpha_1 = alpha / (1 + epsilon / 2)
        gamma = generate_center_candidates(P, alpha_1, epsilon / 2 * alpha_1, k, ell)
        found = evaluate_cover(P, gamma, k, alpha, max_candidates, threads)
        logger.debug(
            f"Probe {probe}: alpha={alpha:.6g} bracket=[{lo:.6g}, {hi:.6g}] "
            f"first run {'covered' if found else 'failed'}"
        )
        if found is not None:
            best = min(best, found, key=lambda s: s.cost)
            hi = min(hi, found.cost)
            continue
        lo = max(lo, alpha_1)
        gamma = generate_center_candidates(P, alpha, epsilon * alpha, k, ell)
        found = evaluate_cover(
            P, gamma, k, (1 + epsilon) * alpha, max_candidates, threads
        )
        if found is None:
            lo = max(lo, alpha)
            continue
        best = min(best, found, key=lambda s: s.cost)
        hi = min(hi, found.cost)
        if found.cost <= (1 + epsilon) * lo:
            break

    factor = max(1 + epsilon, best.cost / lo)
    logger.info(f"Refined center cost {best.cost:.6g} within factor {factor:.6g}")
    return ClusteringSolution(
        best.centers,
        best.assignment,
        best.cost,
        Guarantee("center", factor, "refine", epsilon=epsilon),
    )
