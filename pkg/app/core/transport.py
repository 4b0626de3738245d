"""
Exact Wasserstein distances between atomic measures and plan diagnostics.

The general solver is the network simplex of POT (``ot.emd``) on the dense
transportation problem with cost d^p; measures on a ray or interval also
have the quantile closed form.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import ot

from app.config.settings import settings
from app.core.exceptions import SolverError, TransportError
from app.core.measures import (
    AtomicMeasure,
    is_one_dimensional,
    measure_from_dict,
    points_close,
    push_forward,
    to_quantile,
)
from app.core.spaces import Point, SpaceDescriptor, fiber_projection

logger = logging.getLogger(__name__)

# Breakpoints of two quantile functions closer than this are the same level.
BREAKPOINT_SNAP = 1e-14


class PlanEntry(NamedTuple):
    source: int
    target: int
    mass: float


@dataclass(frozen=True)
class TransportPlan:
    """
    Sparse coupling between two atomic measures.

    ``cost`` is the p-th power total sum mass * d^p.
    """

    source: AtomicMeasure
    target: AtomicMeasure
    entries: Tuple[PlanEntry, ...]
    p: float
    cost: float

    @classmethod
    def from_entries(cls, source: AtomicMeasure, target: AtomicMeasure, entries: Sequence[Tuple[int, int, float]], p: float) -> "TransportPlan":
        """
        Build a plan from explicit entries, recomputing its cost.

        Raises:
            TransportError: If the marginals do not match the measures.
        """
        _check_exponent(p)
        _check_shared_space(source.space, source, target)
        cleaned = tuple(PlanEntry(int(i), int(j), float(m)) for i, j, m in entries if m > 0.0)
        for entry in cleaned:
            if not (0 <= entry.source < len(source) and 0 <= entry.target < len(target)):
                raise TransportError(f"Plan entry {entry} refers to a missing atom")
        plan = cls(source, target, cleaned, float(p), _plan_cost(source, target, cleaned, p))
        defect = plan.marginal_defect()
        if defect > settings.marginal_tolerance:
            raise TransportError(f"Plan marginals are off by {defect}")
        return plan

    @property
    def space(self) -> SpaceDescriptor:
        return self.source.space

    @property
    def wp(self) -> float:
        return self.cost ** (1.0 / self.p)

    def matrix(self) -> np.ndarray:
        gamma = np.zeros((len(self.source), len(self.target)))
        for i, j, mass in self.entries:
            gamma[i, j] += mass
        return gamma

    def marginal_defect(self) -> float:
        gamma = self.matrix()
        rows = np.abs(gamma.sum(axis=1) - self.source.weight_array)
        cols = np.abs(gamma.sum(axis=0) - self.target.weight_array)
        return float(max(rows.max(), cols.max()))

    def pair_distances(self) -> np.ndarray:
        return _pair_distances(self.source, self.target, self.entries)

    def recomputed_cost(self) -> float:
        return _plan_cost(self.source, self.target, self.entries, self.p)

    def support_pairs(self) -> List[Tuple[Point, Point, float]]:
        return [
            (self.source.points[i], self.target.points[j], mass) for i, j, mass in self.entries
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "cost": self.cost,
            "wp": self.wp,
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "entries": [
                {"source": i, "target": j, "mass": mass} for i, j, mass in self.entries
            ],
        }


def _pair_distances(source: AtomicMeasure, target: AtomicMeasure, entries: Sequence[PlanEntry]) -> np.ndarray:
    space = source.space
    return np.array(
        [space._distance(source.points[i], target.points[j]) for i, j, _ in entries], dtype=float
    )


def _plan_cost(source: AtomicMeasure, target: AtomicMeasure, entries: Sequence[PlanEntry], p: float) -> float:
    distances = _pair_distances(source, target, entries)
    return math.fsum(e.mass * d ** p for e, d in zip(entries, distances))


def plan_from_dict(data: Dict[str, Any]) -> TransportPlan:
    """
    Rebuild a plan from its JSON form; the cost is recomputed.

    Raises:
        TransportError: If entries are malformed or marginals do not match.
    """
    if not isinstance(data, dict):
        raise TransportError(f"Plan description must be an object, got {data!r}")
    try:
        source = measure_from_dict(data["source"])
        target = measure_from_dict(data["target"])
        entries = [(e["source"], e["target"], float(e["mass"])) for e in data["entries"]]
        p = float(data["p"])
    except (KeyError, TypeError) as e:
        raise TransportError(f"Malformed plan description: {e}") from e
    return TransportPlan.from_entries(source, target, entries, p)


def _check_exponent(p: float) -> None:
    if not (p >= 1.0 and math.isfinite(p)):
        raise TransportError(f"Wasserstein exponent must be a finite p >= 1, got {p}")


def _check_shared_space(space: SpaceDescriptor, mu: AtomicMeasure, nu: AtomicMeasure) -> None:
    if mu.space != space or nu.space != space:
        raise TransportError(
            f"Measures live on {mu.space.describe()} and {nu.space.describe()}, "
            f"expected {space.describe()}"
        )


def cost_matrix(space: SpaceDescriptor, mu: AtomicMeasure, nu: AtomicMeasure, p: float) -> np.ndarray:
    """Dense matrix of d(x_i, y_j)^p."""
    return space.pairwise(mu.points, nu.points) ** p


def solve_wp(space: SpaceDescriptor, mu: AtomicMeasure, nu: AtomicMeasure, p: Optional[float] = None) -> Tuple[float, TransportPlan]:
    """
    Exact p-Wasserstein distance and an optimal plan.

    Args:
        space: Common space of both measures.
        mu: Source measure.
        nu: Target measure.
        p: Exponent >= 1 (defaults to settings.default_p).

    Returns:
        Tuple of (W_p(mu, nu), optimal plan).

    Raises:
        TransportError: On mismatched spaces or an invalid exponent.
        SolverError: If the network simplex stops before optimality.
    """
    p = settings.default_p if p is None else float(p)
    _check_exponent(p)
    _check_shared_space(space, mu, nu)
    if mu.is_dirac and nu.is_dirac:
        d = space._distance(mu.points[0], nu.points[0])
        return d, TransportPlan(mu, nu, (PlanEntry(0, 0, 1.0),), p, d ** p)
    if mu.is_dirac or nu.is_dirac:
        # The only coupling is the product one.
        if mu.is_dirac:
            entries = [(0, j, w) for j, w in enumerate(nu.weights)]
        else:
            entries = [(i, 0, w) for i, w in enumerate(mu.weights)]
        plan = TransportPlan.from_entries(mu, nu, entries, p)
        return plan.wp, plan

    costs = cost_matrix(space, mu, nu, p)
    gamma, log = ot.emd(
        mu.weight_array, nu.weight_array, costs,
        numItermax=settings.emd_max_iterations, log=True,
    )
    if log.get("warning") is not None:
        raise SolverError(f"Network simplex did not converge: {log['warning']}")
    rows, cols = np.nonzero(gamma > 0.0)
    entries = [PlanEntry(int(i), int(j), float(gamma[i, j])) for i, j in zip(rows, cols)]
    plan = TransportPlan(mu, nu, tuple(entries), p, _plan_cost(mu, nu, entries, p))
    logger.debug(
        "Solved %dx%d transport problem on %s: cost %.12g",
        len(mu), len(nu), space.describe(), plan.cost,
    )
    return plan.wp, plan


def _check_one_dimensional(mu: AtomicMeasure, nu: AtomicMeasure) -> None:
    if mu.space != nu.space:
        raise TransportError("Measures must share a space")
    if not is_one_dimensional(mu.space):
        raise TransportError(f"Expected a ray or an interval, got {mu.space.describe()}")


def wp_1d(mu: AtomicMeasure, nu: AtomicMeasure, p: Optional[float] = None) -> float:
    """
    W_p on a ray or interval as the L^p distance of quantile functions.

    Raises:
        TransportError: For measures on other spaces.
    """
    p = settings.default_p if p is None else float(p)
    _check_exponent(p)
    _check_one_dimensional(mu, nu)
    return to_quantile(mu).lp_distance(to_quantile(nu), p)


def _merged_levels(first: Sequence[float], second: Sequence[float]) -> np.ndarray:
    levels = np.union1d(first, second)
    kept = [levels[0]]
    for level in levels[1:]:
        if level - kept[-1] <= BREAKPOINT_SNAP:
            kept[-1] = level
        else:
            kept.append(level)
    kept[-1] = 1.0
    return np.asarray(kept)


def monotone_plan(mu: AtomicMeasure, nu: AtomicMeasure, p: Optional[float] = None) -> TransportPlan:
    """
    The comonotone coupling of two 1-D measures, optimal for every p >= 1.

    Raises:
        TransportError: For measures on other spaces.
    """
    p = settings.default_p if p is None else float(p)
    _check_one_dimensional(mu, nu)
    source_order = np.argsort(mu.values(), kind="stable")
    target_order = np.argsort(nu.values(), kind="stable")
    source_levels = np.cumsum(mu.weight_array[source_order])
    target_levels = np.cumsum(nu.weight_array[target_order])
    levels = _merged_levels(source_levels, target_levels)
    masses = np.diff(levels, prepend=0.0)
    source_steps = np.minimum(np.searchsorted(source_levels, levels - BREAKPOINT_SNAP, side="left"), len(mu) - 1)
    target_steps = np.minimum(np.searchsorted(target_levels, levels - BREAKPOINT_SNAP, side="left"), len(nu) - 1)
    merged: Dict[Tuple[int, int], float] = {}
    for mass, s, t in zip(masses, source_steps, target_steps):
        key = (int(source_order[s]), int(target_order[t]))
        merged[key] = merged.get(key, 0.0) + float(mass)
    entries = [(i, j, m) for (i, j), m in merged.items()]
    return TransportPlan.from_entries(mu, nu, entries, p)


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of a cyclical monotonicity check; truthy when monotone."""

    monotone: bool
    cycle: Tuple[int, ...] = ()
    gain: float = 0.0

    def __bool__(self) -> bool:
        return self.monotone


def is_cyclically_monotone(plan: TransportPlan, max_cycle: Optional[int] = None) -> MonotonicityReport:
    """
    Check that no cyclic reassignment of at most ``max_cycle`` support pairs
    lowers the total cost.

    Reassigning x_i to y_j changes the cost by w(i, j) = c(x_i, y_j) - c(x_i, y_i),
    so a violation is a negative cycle of the complete digraph on the plan
    entries. Closed walks of at most ``max_cycle`` edges are found by min-plus
    products; a negative closed walk always contains a negative simple cycle.

    Args:
        plan: Plan to check.
        max_cycle: Longest cycle considered (defaults to settings.default_max_cycle).

    Returns:
        MonotonicityReport with the violating cycle (entry indices) if any.

    Raises:
        TransportError: If max_cycle exceeds settings.max_cycle_limit.
    """
    max_cycle = settings.default_max_cycle if max_cycle is None else int(max_cycle)
    if max_cycle > settings.max_cycle_limit:
        raise TransportError(
            f"max_cycle {max_cycle} exceeds the limit {settings.max_cycle_limit}"
        )
    n = len(plan.entries)
    if n < 2 or max_cycle < 2:
        return MonotonicityReport(True)
    xs = [plan.source.points[e.source] for e in plan.entries]
    ys = [plan.target.points[e.target] for e in plan.entries]
    costs = plan.space.pairwise(xs, ys) ** plan.p
    weights = costs - np.diag(costs)[:, None]
    slack = settings.monotonicity_slack * max(1.0, float(np.abs(costs).max()))

    walks = weights.copy()
    parents = [np.tile(np.arange(n)[:, None], (1, n))]
    for length in range(2, max_cycle + 1):
        extended = np.full((n, n), np.inf)
        parent = np.zeros((n, n), dtype=int)
        for u in range(n):
            candidate = walks[:, u:u + 1] + weights[u:u + 1, :]
            better = candidate < extended
            extended[better] = candidate[better]
            parent[better] = u
        walks = extended
        parents.append(parent)
        closed = np.diag(walks)
        start = int(np.argmin(closed))
        if closed[start] < -slack:
            walk = _trace_walk(parents, start, length)
            cycle, gain = _negative_simple_cycle(walk, weights, slack)
            logger.debug("Cyclical monotonicity violated by cycle %s (gain %.3g)", cycle, gain)
            return MonotonicityReport(False, cycle, gain)
    return MonotonicityReport(True)


def _trace_walk(parents: List[np.ndarray], start: int, length: int) -> List[int]:
    walk = [start]
    node = start
    for level in range(length - 1, -1, -1):
        node = int(parents[level][start, node])
        walk.append(node)
    walk.reverse()
    # drop self-loops
    return [v for k, v in enumerate(walk) if k == 0 or v != walk[k - 1]]


def _negative_simple_cycle(walk: List[int], weights: np.ndarray, slack: float) -> Tuple[Tuple[int, ...], float]:
    path: List[int] = []
    for node in walk:
        if node in path:
            position = path.index(node)
            cycle = path[position:]
            gain = _cycle_weight(cycle, weights)
            if gain < -slack:
                return tuple(cycle), gain
            del path[position + 1:]
        else:
            path.append(node)
    return tuple(path), _cycle_weight(path, weights)


def _cycle_weight(cycle: Sequence[int], weights: np.ndarray) -> float:
    return float(sum(weights[cycle[k], cycle[(k + 1) % len(cycle)]] for k in range(len(cycle))))


def adjacency_test(mu: AtomicMeasure, nu: AtomicMeasure) -> bool:
    """
    Decide whether two 1-D measures are adjacent.

    They are adjacent when their CDFs agree outside some [a, b) and are both
    constant on it, i.e. they differ only in the masses at a and b and
    neither charges the open gap (a, b).
    """
    _check_one_dimensional(mu, nu)
    support: List[Point] = []
    for point in list(mu.points) + list(nu.points):
        if not any(points_close(point, other) for other in support):
            support.append(point)
    tol = settings.marginal_tolerance
    differing = sorted(
        p.value for p in support if abs(mu.mass_at(p) - nu.mass_at(p)) > tol
    )
    if not differing:
        return True
    if len(differing) != 2:
        return False
    low, high = differing
    return not any(low < p.value < high for p in support)


def distance_to_fiber(space: SpaceDescriptor, mu: AtomicMeasure, t: float, p: Optional[float] = None, extension: Optional[Point] = None) -> Tuple[float, AtomicMeasure]:
    """
    Distance from mu to the measures on the fiber at level t.

    Args:
        space: Half-cylinder or suspension.
        mu: Measure on the space.
        t: Fiber level.
        p: Exponent >= 1.
        extension: Base point used for pole mass on a suspension.

    Returns:
        Tuple of (W_p(mu, T_t#mu), T_t#mu).
    """
    nu = push_forward(mu, lambda x: fiber_projection(space, t, x, extension))
    wp, _ = solve_wp(space, mu, nu, p)
    return wp, nu
