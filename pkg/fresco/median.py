"""(k, l)-median clustering of curves under the Fréchet distance.

A constant-factor solution comes from simplifying every input and solving
the discrete k-median over the simplifications. The (1 + epsilon) drivers
sample the inputs, build a candidate grid around the sample's signature
vertices and keep the candidate of least total distance to all inputs.

The sampling bound only holds with `median.parameters: theory`, whose grids
are large. The default practical grids are coarser, and solutions found with
them report the ratio of their cost to the constant-factor lower bound.
"""

import itertools
import logging
import math
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from fresco import config
from fresco.center import CandidateSet, ClusteringSolution, Guarantee
from fresco.curves import Curve, IntervalUnion, discretize, normalize, union_of_ranges
from fresco.frechet import distance, distance_many, distance_matrix, lower_bounds_many
from fresco.signatures import (
    build_vertex_permutation,
    delta_signature,
    extract_signature,
    simplify,
)
from fresco.utils.errors import CandidateLimitError, InvalidInputError
from fresco.utils.utils import parallel_map

logger = logging.getLogger(__name__)

MEDIAN = config.get("median")
MAX_CANDIDATES = config.get("candidates").get("max_candidates")
# candidates evaluated exactly per round of branch and bound
RANK_BATCH = 256


class SampleConfig:
    """Parameters of the sampling-based median drivers.

    Attributes:
        epsilon: float, accuracy parameter.
        lam: float, failure probability per repeat, in (0, 1].
        ell: int, maximum center complexity.
        seed: int, root of every random stream.
        repeats: int, independent samples drawn.
    """

    def __init__(
        self,
        epsilon: Optional[float] = None,
        lam: Optional[float] = None,
        ell: int = 2,
        seed: Optional[int] = None,
        repeats: Optional[int] = None,
    ) -> None:
        """Initializes the config, taking unset values from the median config.

        Raises:
            InvalidInputError: if a parameter is out of range.
        """
        self.epsilon = float(MEDIAN.get("epsilon") if epsilon is None else epsilon)
        self.lam = float(MEDIAN.get("lambda") if lam is None else lam)
        self.ell = int(ell)
        self.seed = int(MEDIAN.get("seed") if seed is None else seed)
        self.repeats = int(MEDIAN.get("repeats") if repeats is None else repeats)
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}.")
        if not 0 < self.lam <= 1:
            raise InvalidInputError(f"lambda must lie in (0, 1], got {self.lam}.")
        if self.ell < 2:
            raise InvalidInputError(f"ell must be at least 2, got {self.ell}.")
        if self.repeats < 1:
            raise InvalidInputError(f"repeats must be at least 1, got {self.repeats}.")

    @property
    def epsilon_prime(self) -> float:
        return self.epsilon / 4

    @property
    def lam_prime(self) -> float:
        return self.lam / 4

    def __repr__(self) -> str:
        return (
            f"SampleConfig(epsilon={self.epsilon}, lam={self.lam}, ell={self.ell}, "
            f"seed={self.seed}, repeats={self.repeats})"
        )


def sample_size(cfg: SampleConfig) -> int:
    """Sample size for one repeat, using natural logarithms.

    Args:
        cfg: SampleConfig.

    Returns:
        int, the larger of the shape bound and the cost-estimate bound at
        epsilon / 4 and lambda / 4.
    """
    eps, lam = cfg.epsilon_prime, cfg.lam_prime
    shape = math.ceil(8 * cfg.ell / eps * (math.log(1 / lam) + math.log(cfg.ell)))
    estimate = math.ceil(5 * math.log(1 / lam)) + 1
    return max(shape, estimate)


def cost_1(
    P: Sequence[Curve], C: Sequence[Curve], threads: Optional[int] = None
) -> Tuple[float, List[int]]:
    """Sum of distances from every input to its nearest center, with the assignment."""
    if not P or not C:
        raise InvalidInputError("Need at least one input and one center.")
    distances = distance_matrix(P, C, threads)
    assignment = np.argmin(distances, axis=1)
    return float(distances[np.arange(len(P)), assignment].sum()), assignment.tolist()


def _weighted_cost(D: np.ndarray, weights: np.ndarray, chosen: Sequence[int]) -> float:
    return float(weights @ D[:, list(chosen)].min(axis=1))


def _local_search(D: np.ndarray, weights: np.ndarray, k: int) -> List[int]:
    """Greedy start, then single swaps while one improves the cost."""
    n = len(D)
    chosen: List[int] = []
    for _ in range(k):
        rest = [j for j in range(n) if j not in chosen]
        chosen.append(min(rest, key=lambda j: _weighted_cost(D, weights, chosen + [j])))
    cost = _weighted_cost(D, weights, chosen)
    improved = True
    while improved:
        improved = False
        for pos, j in itertools.product(range(k), range(n)):
            if j in chosen:
                continue
            trial = chosen[:pos] + [j] + chosen[pos + 1 :]
            trial_cost = _weighted_cost(D, weights, trial)
            if trial_cost < cost * (1 - 1e-12):
                chosen, cost, improved = trial, trial_cost, True
    return sorted(chosen)


def discrete_kmedian(
    curves: Sequence[Curve],
    k: int,
    weights: Optional[Sequence[float]] = None,
    threads: Optional[int] = None,
) -> Tuple[List[int], int]:
    """k-median with centers restricted to the input curves.

    Small instances are solved exactly by enumerating every k-subset, larger
    ones by single-swap local search.

    Args:
        curves: sequence of Curve.
        k: int, number of centers.
        weights: sequence of float or None, multiplicity of each curve.
        threads: int or None, worker cap.

    Returns:
        Tuple of the sorted chosen indices and the approximation factor
        achieved: 1 for exact enumeration, 5 for local search.

    Raises:
        InvalidInputError: if k is not in [1, len(curves)].
    """
    n = len(curves)
    if not 1 <= k <= n:
        raise InvalidInputError(f"k={k} must lie in [1, {n}].")
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if k == n:
        return list(range(n)), 1
    D = distance_matrix(curves, threads=threads)
    if n <= MEDIAN.get("exact_max_n") and math.comb(n, k) <= MEDIAN.get(
        "exact_max_subsets"
    ):
        best = min(
            itertools.combinations(range(n), k),
            key=lambda subset: _weighted_cost(D, weights, subset),
        )
        return list(best), 1
    logger.info(f"Local search for discrete {k}-median over {n} curves")
    return _local_search(D, weights, k), 5


def _constant_factor(
    curves: Sequence[Curve],
    k: int,
    ell: int,
    weights: Optional[np.ndarray] = None,
    threads: Optional[int] = None,
) -> Tuple[List[Curve], float, float]:
    """Centers, the cost bound D_1 and the approximation factor it carries."""
    weights = np.ones(len(curves)) if weights is None else np.asarray(weights, float)
    simplified = [simplify(tau, ell) for tau in curves]
    errors = np.array(
        parallel_map(lambda pair: distance(*pair), zip(curves, simplified), threads)
    )
    chosen, discrete_factor = discrete_kmedian(simplified, k, weights, threads)
    centers = [simplified[i] for i in chosen]
    nearest = distance_matrix(simplified, centers, threads).min(axis=1)
    bound = float(weights @ nearest + weights @ errors)
    beta = 2 * discrete_factor
    return centers, bound, 2 + 3 * beta


def constant_factor_median(
    P: Sequence[Curve], k: int, ell: int, threads: Optional[int] = None
) -> Tuple[ClusteringSolution, Tuple[float, float]]:
    """Constant-factor (k, l)-median from simplification and discrete k-median.

    Args:
        P: sequence of Curve, the inputs.
        k: int, number of centers.
        ell: int, maximum center complexity.
        threads: int or None, worker cap.

    Returns:
        Tuple of the solution and the interval (D_1 / factor, D_1) holding the
        optimal cost, where D_1 is the discrete cost over the simplifications
        plus the total simplification error. The factor is 8 when the discrete
        problem was solved exactly and 32 otherwise.
    """
    if not 1 <= k <= len(P):
        raise InvalidInputError(f"k={k} must lie in [1, {len(P)}].")
    centers, bound, factor = _constant_factor(P, k, ell, threads=threads)
    solution = ClusteringSolution.evaluate(
        P, centers, Guarantee("median", factor, "constant-factor"), threads
    )
    logger.info(f"Constant-factor median cost {solution.cost:.6g}, bound {bound:.6g}")
    return solution, (bound / factor, bound)


def generate_median_candidates(
    S: Sequence[Curve], alpha: float, beta: float, ell: int
) -> CandidateSet:
    """Candidate medians from a grid around the sample's signature vertices.

    Every sample curve contributes the vertices of its largest canonical
    signature with at most ell + 3 vertices; the grid covers the ranges of
    radius 8 * alpha around them at resolution beta.

    Args:
        S: sequence of Curve, the sample.
        alpha: float, range scale.
        beta: float, grid resolution.
        ell: int, maximum candidate complexity.

    Returns:
        CandidateSet.

    Raises:
        InvalidInputError: if alpha or beta is not positive.
    """
    if not (alpha > 0 and beta > 0):
        raise InvalidInputError(f"alpha={alpha} and beta={beta} must be positive.")
    vertices = []
    for tau in dict.fromkeys(S):
        if len(tau) == 1:
            vertices.extend(tau.values)
        else:
            vertices.extend(extract_signature(build_vertex_permutation(tau), ell + 3))
    union = union_of_ranges((v, 8 * alpha) for v in vertices)
    return CandidateSet(discretize(union, beta), ell, union)


def median_parameters(
    cfg: SampleConfig, delta_min: float, delta_max: float, size: int
) -> Tuple[float, float]:
    """Range scale alpha and grid resolution beta for a sample of the given size.

    "theory" mode uses the constants of the sampling bound; "practical" mode
    scales both by the sample size instead, which keeps the grid small.
    """
    mode = MEDIAN.get("parameters")
    if mode == "theory":
        alpha = 6 * delta_max / cfg.epsilon_prime
        beta = cfg.epsilon_prime * cfg.lam_prime * delta_min / size
    elif mode == "practical":
        practical = MEDIAN.get("practical")
        alpha = practical.get("alpha_scale") * delta_max / size
        beta = practical.get("beta_scale") * cfg.epsilon * delta_min / size
    else:
        raise InvalidInputError(f"Unknown median parameter mode {mode!r}.")
    return alpha, beta


def _sample_candidates(
    P: Sequence[Curve],
    indices: np.ndarray,
    ell: int,
    cfg: SampleConfig,
    threads: Optional[int] = None,
) -> Tuple[Optional[CandidateSet], List[Curve], List[Curve], np.ndarray]:
    """Candidate set, extra candidates, distinct sample curves and their counts."""
    unique, counts = np.unique(indices, return_counts=True)
    sample = [P[i] for i in unique]
    centers, bound, factor = _constant_factor(sample, 1, ell, counts, threads)
    delta_max = bound
    delta_min = max(bound / factor, delta_max / MEDIAN.get("max_bound_ratio"))
    if delta_min == 0:
        logger.debug("Sample collapsed onto its constant-factor center")
        return None, centers, sample, counts
    alpha, beta = median_parameters(cfg, delta_min, delta_max, len(indices))
    gamma = generate_median_candidates(sample, alpha, beta, ell)
    logger.debug(
        f"Sample of {len(indices)} ({len(sample)} distinct): alpha={alpha:.6g} "
        f"beta={beta:.6g} grid={len(gamma.grid)}"
    )
    return gamma, centers, sample, counts


def _rank_candidates(
    curves: Sequence[Curve],
    weights: np.ndarray,
    gamma: Optional[CandidateSet],
    extra: Sequence[Curve],
    top: int,
    max_candidates: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[Tuple[float, Curve]]:
    """The `top` candidates of least weighted total distance, best first.

    Extra candidates are scored first. Grid candidates are then visited in
    blocks in order of their summed lower bounds, and exact distances are
    computed only while a lower bound can still beat the current cut-off.
    Ties keep the earlier candidate.

    Raises:
        CandidateLimitError: if gamma holds more than max_candidates curves.
    """
    if max_candidates is None:
        max_candidates = MAX_CANDIDATES
    ranked: List[Tuple[float, int, Curve]] = []
    counter = itertools.count()

    def cutoff() -> float:
        return ranked[-1][0] if len(ranked) >= top else math.inf

    def consider(cost: float, curve: Curve) -> None:
        if cost < cutoff():
            ranked.append((cost, next(counter), curve))
            ranked.sort(key=lambda entry: entry[:2])
            del ranked[top:]

    for curve in extra:
        cost = sum(w * distance(tau, curve) for w, tau in zip(weights, curves))
        consider(float(cost), curve)
    if gamma is None or not gamma:
        return [(cost, curve) for cost, _, curve in ranked]
    size = gamma.size
    if size > max_candidates:
        raise CandidateLimitError(size, max_candidates)
    logger.debug(f"Ranking {size} candidate medians over {len(curves)} curves")

    for rows in gamma.blocks():
        bounds = sum(
            w * lower_bounds_many(rows, tau) for w, tau in zip(weights, curves)
        )
        order = np.flatnonzero(bounds < cutoff())
        order = order[np.argsort(bounds[order], kind="stable")]
        for start in range(0, len(order), RANK_BATCH):
            batch = order[start : start + RANK_BATCH]
            batch = batch[bounds[batch] < cutoff()]
            if not batch.size:
                break
            columns = parallel_map(
                lambda tau, batch=batch: distance_many(rows[batch], tau),
                curves,
                threads,
            )
            costs = np.asarray(weights) @ np.array(columns)
            for index, cost in zip(batch, costs):
                consider(float(cost), Curve._trusted(rows[index]))
    return [(cost, curve) for cost, _, curve in ranked]


def _sampled_solution(
    P: Sequence[Curve],
    centers: Sequence[Curve],
    algorithm: str,
    cfg: SampleConfig,
    lower: float,
    threads: Optional[int] = None,
) -> ClusteringSolution:
    """Solution of a sampling driver with the factor it can actually claim.

    Only the theory parameters carry the 1 + epsilon bound. Either way the
    ratio of the cost to the constant-factor lower bound is certified, and
    the smaller of the two is reported.
    """
    cost, assignment = cost_1(P, centers, threads)
    certified = cost / lower if lower > 0 else 1.0
    if MEDIAN.get("parameters") == "theory":
        factor = min(1 + cfg.epsilon, certified)
    else:
        factor = certified
    guarantee = Guarantee("median", factor, algorithm, cfg.epsilon, cfg.lam, cfg.seed)
    return ClusteringSolution(centers, assignment, cost, guarantee)


def one_median(
    P: Sequence[Curve],
    ell: int,
    cfg: SampleConfig,
    max_candidates: Optional[int] = None,
    threads: Optional[int] = None,
) -> ClusteringSolution:
    """(1 + epsilon)-approximate (1, l)-median by sampling.

    Each repeat draws a uniform sample with replacement, builds the candidate
    grid for it and keeps the candidate of least cost over all of P; the
    sample's constant-factor center and the constant-factor solution over P
    always compete. Repeats draw from independent streams spawned from the
    seed; the earlier repeat wins ties.

    The guarantee factor is 1 + epsilon only under the theory parameters;
    otherwise it is the certified ratio of the cost to the constant-factor
    lower bound.

    Args:
        P: sequence of Curve, the inputs.
        ell: int, maximum center complexity.
        cfg: SampleConfig.
        max_candidates: int or None, cap on candidate curves per repeat.
        threads: int or None, worker cap.

    Returns:
        ClusteringSolution with a single center.

    Raises:
        InvalidInputError: if P is empty or ell < 2.
        CandidateLimitError: if a candidate set exceeds max_candidates.
    """
    if not P:
        raise InvalidInputError("Need at least one input curve.")
    if ell < 2:
        raise InvalidInputError(f"ell must be at least 2, got {ell}.")
    size = sample_size(cfg)
    weights = np.ones(len(P))
    fallback, (lower, _) = constant_factor_median(P, 1, ell, threads)
    best: Tuple[float, Curve] = (fallback.cost, fallback.centers[0])
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)
    for repeat, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        indices = rng.integers(0, len(P), size=size)
        gamma, extra, _, _ = _sample_candidates(P, indices, ell, cfg, threads)
        cost, center = _rank_candidates(
            P, weights, gamma, extra, 1, max_candidates, threads
        )[0]
        logger.debug(f"Repeat {repeat}: cost {cost:.6g}")
        if cost < best[0]:
            best = (cost, center)

    solution = _sampled_solution(P, [best[1]], "one-median", cfg, lower, threads)
    logger.info(f"1-median cost {solution.cost:.6g} after {cfg.repeats} repeat(s)")
    return solution


def _branches(
    P: Sequence[Curve],
    remaining: np.ndarray,
    centers: List[Curve],
    k: int,
    ell: int,
    cfg: SampleConfig,
    rng: np.random.Generator,
    max_candidates: Optional[int],
    threads: Optional[int],
) -> Iterator[List[Curve]]:
    """Center tuples from sampling the remaining inputs and pruning the closest half."""
    if len(centers) == k or not remaining.size:
        yield centers
        return
    indices = rng.choice(remaining, size=sample_size(cfg), replace=True)
    gamma, extra, sample, counts = _sample_candidates(P, indices, ell, cfg, threads)
    ranked = _rank_candidates(
        sample, counts, gamma, extra, MEDIAN.get("branching"), max_candidates, threads
    )
    for _, center in ranked:
        chosen = centers + [center]
        pending = [P[i] for i in remaining]
        nearest = distance_matrix(pending, chosen, threads).min(axis=1)
        order = np.argsort(nearest, kind="stable")
        keep = np.sort(remaining[order[(len(remaining) + 1) // 2 :]])
        yield from _branches(
            P, keep, chosen, k, ell, cfg, rng, max_candidates, threads
        )


def _recenter(
    P: Sequence[Curve],
    centers: Sequence[Curve],
    ell: int,
    cfg: SampleConfig,
    max_candidates: Optional[int],
    threads: Optional[int],
) -> List[Curve]:
    """Replace every center by the best candidate median of the inputs it serves."""
    _, assignment = cost_1(P, centers, threads)
    assignment = np.asarray(assignment)
    out = list(centers)
    for j, center in enumerate(centers):
        members = np.flatnonzero(assignment == j)
        if not members.size:
            continue
        gamma, extra, sample, counts = _sample_candidates(P, members, ell, cfg, threads)
        try:
            ranked = _rank_candidates(
                sample, counts, gamma, [center, *extra], 1, max_candidates, threads
            )
        except CandidateLimitError as exc:
            logger.warning(f"Keeping center {j}: {exc}")
            continue
        out[j] = ranked[0][1]
    return out


def k_median(
    P: Sequence[Curve],
    k: int,
    ell: int,
    cfg: SampleConfig,
    max_candidates: Optional[int] = None,
    threads: Optional[int] = None,
) -> ClusteringSolution:
    """(1 + epsilon)-approximate (k, l)-median with constant success probability.

    Builds centers one at a time: sample the inputs not yet pruned, take the
    best few candidate medians of the sample, and for each of them prune the
    half of the remaining inputs closest to the chosen centers before
    recursing. The best complete tuple by cost over P wins, with the
    constant-factor solution competing. Finally every center is replaced by
    the best candidate median of the inputs assigned to it, which never
    raises the cost.

    Args:
        P: sequence of Curve, the inputs.
        k: int, number of centers.
        ell: int, maximum center complexity.
        cfg: SampleConfig.
        max_candidates: int or None, cap on candidate curves per sample.
        threads: int or None, worker cap.

    Returns:
        ClusteringSolution with at most k centers, its guarantee factor chosen
        as in `one_median`.

    Raises:
        InvalidInputError: if k is not in [1, len(P)].
        CandidateLimitError: if a candidate set exceeds max_candidates.
    """
    if not 1 <= k <= len(P):
        raise InvalidInputError(f"k={k} must lie in [1, {len(P)}].")
    if k == 1:
        return one_median(P, ell, cfg, max_candidates, threads)

    fallback, (lower, _) = constant_factor_median(P, k, ell, threads)
    best: Tuple[float, Sequence[Curve]] = (fallback.cost, fallback.centers)
    everyone = np.arange(len(P))
    for stream in np.random.SeedSequence(cfg.seed).spawn(cfg.repeats):
        rng = np.random.default_rng(stream)
        for centers in _branches(
            P, everyone, [], k, ell, cfg, rng, max_candidates, threads
        ):
            cost, _ = cost_1(P, centers, threads)
            if cost < best[0]:
                best = (cost, centers)
    centers = _recenter(P, best[1], ell, cfg, max_candidates, threads)

    solution = _sampled_solution(P, centers, "k-median", cfg, lower, threads)
    logger.info(f"{k}-median cost {solution.cost:.6g}")
    return solution


def far_vertex_region(P: Sequence[Curve], pi: Curve, epsilon: float) -> IntervalUnion:
    """Region whose complement holds the vertices of pi that can be dropped.

    Inputs are ranked by their distance x_i to pi; every input with
    x_i <= 2 * x_1 / epsilon contributes ranges of radius 4 * x_i around the
    vertices of its x_i-signature. Dropping any vertices of pi outside the
    region raises its total distance to P by at most a factor 1 + epsilon.

    Args:
        P: sequence of Curve, the inputs.
        pi: Curve, a candidate median.
        epsilon: float, positive accuracy parameter.

    Returns:
        IntervalUnion.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}.")
    x = np.array([distance(tau, pi) for tau in P])
    cutoff = 2 * x.min() / epsilon
    ranges = []
    for tau, radius in zip(P, x):
        if radius > cutoff:
            continue
        sig = delta_signature(tau, radius) if radius > 0 else tau
        ranges.extend((v, 4 * radius) for v in sig)
    return union_of_ranges(ranges)


def omit_vertices(pi: Curve, region: IntervalUnion) -> Curve:
    """pi without its vertices outside region, renormalized.

    Raises:
        InvalidInputError: if no vertex of pi lies inside region.
    """
    kept = [v for v in pi if region.contains(v)]
    if not kept:
        raise InvalidInputError("Every vertex lies outside the region.")
    return normalize(kept)
