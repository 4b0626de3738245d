"""
Displacement interpolation and intermediate-point checks in Wasserstein space.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from app.config.settings import settings
from app.core.exceptions import ConstructionError, MeasureError, SpaceError
from app.core.measures import (
    AtomicMeasure,
    QuantileFunction,
    from_quantile,
    is_one_dimensional,
    mixture,
    to_quantile,
)
from app.core.spaces import GeodesicPath, Point, Ray, Scalar, SpaceDescriptor, geodesic
from app.core.transport import TransportPlan, monotone_plan, solve_wp, wp_1d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WassersteinPath:
    """
    A curve t -> mu_t obtained by moving every plan entry along its geodesic.

    The path keeps the plan that generated it; evaluation never re-solves.
    """

    plan: TransportPlan
    paths: Tuple[GeodesicPath, ...]
    t_min: float = 0.0
    t_max: float = 1.0

    @property
    def space(self) -> SpaceDescriptor:
        return self.plan.space

    @property
    def source(self) -> AtomicMeasure:
        return self.plan.source

    @property
    def target(self) -> AtomicMeasure:
        return self.plan.target

    @property
    def speed(self) -> float:
        return self.plan.wp

    def evaluate(self, t: float) -> AtomicMeasure:
        """
        The measure mu_t.

        Raises:
            SpaceError: If t is outside the path's domain.
            NotComputableError: If a finite-space geodesic has no point at t.
        """
        if not self.t_min <= t <= self.t_max:
            raise SpaceError(f"Parameter {t} is outside [{self.t_min}, {self.t_max}]")
        # stored plans may carry marginal drift up to settings.marginal_tolerance
        total = math.fsum(entry.mass for entry in self.plan.entries)
        atoms = [
            (path.point_at(t), entry.mass / total) for path, entry in zip(self.paths, self.plan.entries)
        ]
        return AtomicMeasure.from_atoms(self.space, atoms)

    def __call__(self, t: float) -> AtomicMeasure:
        return self.evaluate(t)

    def speed_defect(self, samples: Sequence[float]) -> float:
        """
        Largest |W_p(mu_s, mu_u) - |s - u| * speed| over all pairs of samples.

        Args:
            samples: Parameters inside the domain.

        Returns:
            The maximal deviation from constant speed.
        """
        measures = [self.evaluate(s) for s in samples]
        worst = 0.0
        for (s, mu_s), (u, mu_u) in itertools.combinations(zip(samples, measures), 2):
            wp, _ = solve_wp(self.space, mu_s, mu_u, self.plan.p)
            worst = max(worst, abs(wp - abs(s - u) * self.speed))
        return worst


def displacement_path(plan: TransportPlan, t_max: float = 1.0, pole_base: Optional[Point] = None) -> WassersteinPath:
    """
    Wrap a plan into a Wasserstein path on [0, t_max].

    Args:
        plan: Transport plan, optimal for the path to be a geodesic.
        t_max: End of the domain; values above 1 extend straight segments.
        pole_base: Meridian base used for pole-to-pole entries on a suspension.

    Returns:
        The WassersteinPath.

    Raises:
        NotComputableError: If some support pair has no computable geodesic.
    """
    if t_max < 1.0:
        raise SpaceError(f"Path domain must contain [0, 1], got t_max={t_max}")
    space = plan.space
    paths = tuple(
        geodesic(space, plan.source.points[e.source], plan.target.points[e.target], pole_base)
        for e in plan.entries
    )
    return WassersteinPath(plan, paths, 0.0, t_max)


def displacement_interpolate(plan: TransportPlan, t: float, pole_base: Optional[Point] = None) -> AtomicMeasure:
    """The measure at parameter t of the displacement interpolation of a plan."""
    return displacement_path(plan, max(1.0, t), pole_base).evaluate(t)


def verify_intermediate(mu: AtomicMeasure, nu: AtomicMeasure, m: AtomicMeasure, t: float, p: Optional[float] = None, tol: Optional[float] = None) -> bool:
    """
    Check that m lies in M^t(mu, nu) of the p-Wasserstein space.

    Args:
        mu: First endpoint.
        nu: Second endpoint.
        m: Candidate.
        t: Level in [0, 1].
        p: Exponent (defaults to settings.default_p).
        tol: Absolute tolerance (defaults to settings.midpoint_tolerance).

    Returns:
        True iff W_p(mu, m) = t W and W_p(m, nu) = (1 - t) W with W = W_p(mu, nu).
    """
    tol = settings.midpoint_tolerance if tol is None else tol
    space = mu.space
    total, _ = solve_wp(space, mu, nu, p)
    near, _ = solve_wp(space, mu, m, p)
    far, _ = solve_wp(space, m, nu, p)
    return abs(near - t * total) <= tol and abs(far - (1.0 - t) * total) <= tol


def verify_midpoint(mu: AtomicMeasure, nu: AtomicMeasure, m: AtomicMeasure, p: Optional[float] = None) -> bool:
    return verify_intermediate(mu, nu, m, 0.5, p)


def scan_intermediate_candidates(mu: AtomicMeasure, nu: AtomicMeasure, candidates: Iterable[AtomicMeasure], t: float = 0.5, p: Optional[float] = None) -> List[AtomicMeasure]:
    """Keep the candidates that pass verify_intermediate."""
    verified = []
    rejected = 0
    for candidate in candidates:
        if verify_intermediate(mu, nu, candidate, t, p):
            verified.append(candidate)
        else:
            rejected += 1
    logger.debug("Candidate scan at t=%s: %d verified, %d rejected", t, len(verified), rejected)
    return verified


def atomic_candidates(space: SpaceDescriptor, points: Sequence[Point], max_atoms: int = 2, weight_levels: Optional[Sequence[float]] = None) -> List[AtomicMeasure]:
    """
    All atomic measures with at most ``max_atoms`` atoms drawn from ``points``.

    Args:
        space: Space of the points.
        points: Candidate support points (distinct).
        max_atoms: Largest support size.
        weight_levels: Allowed atom weights; tuples of them summing to 1 are
            used. Defaults to quarters.

    Returns:
        The candidate measures, Diracs first.
    """
    levels = (0.25, 0.5, 0.75) if weight_levels is None else tuple(weight_levels)
    candidates: List[AtomicMeasure] = []
    for size in range(1, max_atoms + 1):
        if size == 1:
            weightings = [(1.0,)]
        else:
            weightings = [
                w for w in itertools.product(levels, repeat=size) if abs(math.fsum(w) - 1.0) <= 1e-12
            ]
        for support in itertools.combinations(points, size):
            for weights in weightings:
                candidates.append(AtomicMeasure(space, tuple(support), weights))
    return candidates


# ---------------------------------------------------------------------------
# W1 intermediate sets on the line
# ---------------------------------------------------------------------------

def _cdf_on(mu: AtomicMeasure, grid: np.ndarray) -> np.ndarray:
    values = mu.values()
    order = np.argsort(values, kind="stable")
    cumulative = np.concatenate([[0.0], np.cumsum(mu.weight_array[order])])
    return cumulative[np.searchsorted(values[order], grid, side="right")]


def _diameter_grid(mu: AtomicMeasure, nu: AtomicMeasure, samples: int, t: float) -> np.ndarray:
    support = np.union1d(mu.values(), nu.values())
    levels = sorted({t, 1.0 - t, 0.5} | {k / (samples + 1) for k in range(1, samples + 1)})
    extras = np.array([
        (1.0 - s) * a + s * b for a in mu.values() for b in nu.values() for s in levels
    ])
    extras = np.setdiff1d(extras, support)
    room = settings.diameter_grid_limit - support.size
    if extras.size > room:
        keep = np.unique(np.linspace(0, extras.size - 1, max(room, 0)).astype(int))
        extras = extras[keep] if room > 0 else extras[:0]
    return np.union1d(support, extras)


def _cdf_to_measure(space: SpaceDescriptor, grid: np.ndarray, cdf: np.ndarray) -> AtomicMeasure:
    masses = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
    masses = np.clip(masses, 0.0, None)
    masses /= masses.sum()
    return AtomicMeasure(space, tuple(Scalar(z) for z in grid), tuple(masses))


def intermediate_family_1d(mu: AtomicMeasure, nu: AtomicMeasure, samples: Optional[int] = None, t: float = 0.5) -> List[AtomicMeasure]:
    """
    Verified W1 t-intermediate measures of two 1-D measures.

    The family holds the quantile interpolation, the mixture (1-t)mu + t nu,
    and the extreme points of linear programs over CDFs sandwiched between
    F_mu and F_nu on a grid: each program pushes the CDF up before a switch
    cell and down after it (or the reverse).

    Args:
        mu: First measure (ray or interval).
        nu: Second measure.
        samples: Number of interior interpolation levels added to the grid.
        t: Level in (0, 1).

    Returns:
        Candidates that passed verify_intermediate with p = 1.
    """
    if not (is_one_dimensional(mu.space) and mu.space == nu.space):
        raise MeasureError("Intermediate families need two measures on one ray or interval")
    if not 0.0 < t < 1.0:
        raise MeasureError(f"Intermediate level {t} is outside (0, 1)")
    samples = settings.diameter_samples if samples is None else samples
    space = mu.space
    seeds = [
        from_quantile(space, to_quantile(mu).combine(to_quantile(nu), 1.0 - t, t)),
        mixture([(mu, 1.0 - t), (nu, t)]),
    ]
    grid = _diameter_grid(mu, nu, samples, t)
    cells = np.diff(grid)
    f_mu = _cdf_on(mu, grid[:-1])
    f_nu = _cdf_on(nu, grid[:-1])
    signs = np.sign(f_mu - f_nu)
    total = float(np.dot(cells, np.abs(f_mu - f_nu)))
    extremes: List[AtomicMeasure] = []
    if total > 0.0 and cells.size > 0:
        bounds = list(zip(np.minimum(f_mu, f_nu), np.maximum(f_mu, f_nu)))
        k = cells.size
        monotone = np.zeros((max(k - 1, 0), k))
        for row in range(k - 1):
            monotone[row, row] = 1.0
            monotone[row, row + 1] = -1.0
        equality = (signs * cells)[None, :]
        target = [float(np.dot(signs * cells, f_mu)) - t * total]
        switches = sorted({0} | {int(np.searchsorted(grid, z)) for z in np.union1d(mu.values(), nu.values())})
        for switch in switches:
            pattern = np.where(np.arange(k) < switch, 1.0, -1.0) * cells
            for direction in (-1.0, 1.0):
                result = linprog(
                    direction * pattern,
                    A_ub=monotone if k > 1 else None,
                    b_ub=np.zeros(k - 1) if k > 1 else None,
                    A_eq=equality,
                    b_eq=target,
                    bounds=bounds,
                    method="highs",
                )
                if result.status != 0:
                    logger.debug("CDF program at switch %d failed: %s", switch, result.message)
                    continue
                extremes.append(_cdf_to_measure(space, grid, np.clip(result.x, 0.0, 1.0)))
    verified: List[AtomicMeasure] = []
    for candidate in seeds + extremes:
        if any(candidate.approx_equal(other, weight_tol=1e-12) for other in verified):
            continue
        if verify_intermediate(mu, nu, candidate, t, p=1.0):
            verified.append(candidate)
        else:
            logger.warning("Rejected a W1 intermediate candidate with %d atoms", len(candidate))
    return verified


def midpoint_diameter_1d(mu: AtomicMeasure, nu: AtomicMeasure, samples: Optional[int] = None, t: float = 0.5) -> float:
    """
    Lower bound on diam M^t(mu, nu) in the W1 space of a ray or interval.

    For adjacent measures the bound equals 2 t (1 - t) W1(mu, nu), which is
    W1 / 2 at t = 1/2; for non-adjacent ones it is strictly larger.

    Args:
        mu: First measure.
        nu: Second measure.
        samples: Grid refinement (defaults to settings.diameter_samples).
        t: Level in (0, 1).

    Returns:
        The largest W1 distance between two verified family members.
    """
    family = intermediate_family_1d(mu, nu, samples, t)
    best = 0.0
    for first, second in itertools.combinations(family, 2):
        best = max(best, wp_1d(first, second, 1.0))
    return best


# ---------------------------------------------------------------------------
# Maximal rays
# ---------------------------------------------------------------------------

def positive_atoms(mu: AtomicMeasure) -> List[float]:
    return sorted(v for v in mu.values() if v != 0.0)


def sigma_ray_witness(mu: AtomicMeasure, m1: Optional[float] = None, p: Optional[float] = None) -> WassersteinPath:
    """
    A geodesic ray on [0, inf) through mu at t = 1 that does not start at delta_0.

    Quantile levels up to m1 stay put and the rest spreads out linearly from
    the value G(m1), so mu_0 collapses that upper part onto G(m1) > 0.

    Args:
        mu: Measure on the ray outside the family {(1 - l) delta_0 + l delta_x}.
        m1: Mass level; defaults to the cumulative mass through the first
            positive atom.
        p: Exponent of the underlying plan.

    Returns:
        The ray as a WassersteinPath with domain [0, inf).

    Raises:
        ConstructionError: If mu has at most one positive atom, or m1 does
            not split the positive part.
    """
    if not isinstance(mu.space, Ray):
        raise ConstructionError(f"Ray witnesses live on the ray, got {mu.space.describe()}")
    if len(positive_atoms(mu)) <= 1:
        raise ConstructionError("Measures with at most one positive atom admit no such ray")
    quantile = to_quantile(mu)
    if m1 is None:
        first = positive_atoms(mu)[0]
        m1 = quantile.breakpoints[quantile.values.index(first)]
    if not 0.0 < m1 < 1.0:
        raise ConstructionError(f"Mass level {m1} is outside (0, 1)")
    anchor = quantile(m1)
    if anchor <= 0.0 or quantile.values[-1] <= anchor:
        raise ConstructionError(f"Mass level {m1} does not split the positive part of the support")
    levels = np.union1d(quantile.breakpoints, [m1])
    start = QuantileFunction(tuple(levels), tuple(np.minimum(quantile._on(levels), anchor))).compressed()
    mu0 = from_quantile(mu.space, start)
    return displacement_path(monotone_plan(mu0, mu, p), t_max=math.inf)
