"""
Finitely supported probability measures and their 1-D quantile representation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.core.exceptions import MeasureError
from app.core.spaces import (
    Interval,
    Pair,
    Point,
    QProduct,
    Ray,
    Scalar,
    SpaceDescriptor,
    SuspPoint,
    Vector,
    space_from_dict,
)

logger = logging.getLogger(__name__)


def points_close(a: Point, b: Point, tol: Optional[float] = None) -> bool:
    """
    Compare two points of the same space up to a coordinate tolerance.

    Indices and poles compare exactly; continuous coordinates within ``tol``.
    """
    if a == b:
        return True
    tol = settings.point_tolerance if tol is None else tol
    if type(a) is not type(b):
        return False
    if isinstance(a, Scalar):
        return abs(a.value - b.value) <= tol
    if isinstance(a, Vector):
        return len(a.coords) == len(b.coords) and all(
            abs(x - y) <= tol for x, y in zip(a.coords, b.coords)
        )
    if isinstance(a, Pair):
        return points_close(a.left, b.left, tol) and points_close(a.right, b.right, tol)
    if isinstance(a, SuspPoint):
        if a.is_pole or b.is_pole:
            return False
        return abs(a.angle - b.angle) <= tol and points_close(a.base, b.base, tol)
    return False


def _is_discrete(point: Point) -> bool:
    if isinstance(point, Pair):
        return _is_discrete(point.left) and _is_discrete(point.right)
    if isinstance(point, SuspPoint):
        return point.is_pole
    return not isinstance(point, (Scalar, Vector))


@dataclass(frozen=True)
class AtomicMeasure:
    """
    A probability measure with finitely many atoms.

    Construction validates the points against the space, drops zero
    weights, merges duplicate atoms, and renormalizes by the total.
    """

    space: SpaceDescriptor
    points: Tuple[Point, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(self.points)
        weights = [float(w) for w in self.weights]
        if len(points) != len(weights):
            raise MeasureError("Atomic measure needs one weight per point")
        merged_points: List[Point] = []
        merged_weights: List[float] = []
        exact: Dict[Point, int] = {}
        for point, weight in zip(points, weights):
            if not math.isfinite(weight) or weight < 0.0:
                raise MeasureError(f"Atom weights must be finite and non-negative, got {weight}")
            if weight == 0.0:
                continue
            self.space.validate(point)
            slot = exact.get(point)
            if slot is None and not _is_discrete(point):
                slot = next(
                    (k for k, other in enumerate(merged_points) if points_close(point, other)),
                    None,
                )
            if slot is None:
                exact[point] = len(merged_points)
                merged_points.append(point)
                merged_weights.append(weight)
            else:
                logger.debug("Merging atom %r into %r", point, merged_points[slot])
                merged_weights[slot] += weight
        if not merged_points:
            raise MeasureError("Atomic measure needs at least one atom of positive weight")
        total = math.fsum(merged_weights)
        if abs(total - 1.0) > settings.weight_sum_tolerance:
            raise MeasureError(f"Atom weights sum to {total}, expected 1")
        object.__setattr__(self, "points", tuple(merged_points))
        object.__setattr__(self, "weights", tuple(w / total for w in merged_weights))

    @classmethod
    def from_atoms(cls, space: SpaceDescriptor, atoms: Iterable[Tuple[Point, float]]) -> "AtomicMeasure":
        atoms = list(atoms)
        return cls(space, tuple(p for p, _ in atoms), tuple(w for _, w in atoms))

    @property
    def atoms(self) -> List[Tuple[Point, float]]:
        return list(zip(self.points, self.weights))

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def is_dirac(self) -> bool:
        return len(self.points) == 1

    def __len__(self) -> int:
        return len(self.points)

    def mass_at(self, point: Point, tol: Optional[float] = None) -> float:
        return math.fsum(w for p, w in self.atoms if points_close(p, point, tol))

    def values(self) -> np.ndarray:
        """Scalar coordinates of the atoms of a 1-D measure."""
        if not all(isinstance(p, Scalar) for p in self.points):
            raise MeasureError("Only measures on a ray or an interval have scalar values")
        return np.array([p.value for p in self.points], dtype=float)

    def approx_equal(self, other: "AtomicMeasure", point_tol: Optional[float] = None, weight_tol: float = 1e-10) -> bool:
        """
        Atom-set equality within tolerance.

        Args:
            other: Measure to compare with.
            point_tol: Coordinate tolerance (defaults to settings.point_tolerance).
            weight_tol: Weight tolerance.

        Returns:
            True if both measures live on the same space and their atoms
            match one-to-one with close points and close weights.
        """
        if self.space != other.space or len(self) != len(other):
            return False
        unmatched = list(other.atoms)
        for point, weight in self.atoms:
            for k, (candidate, candidate_weight) in enumerate(unmatched):
                if points_close(point, candidate, point_tol) and abs(weight - candidate_weight) <= weight_tol:
                    del unmatched[k]
                    break
            else:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "space": self.space.to_dict(),
            "atoms": [
                {"point": self.space.point_to_json(p), "weight": w} for p, w in self.atoms
            ],
        }


def measure_from_dict(data: Dict[str, Any], space: Optional[SpaceDescriptor] = None) -> AtomicMeasure:
    """
    Build a measure from its JSON form.

    Args:
        data: Mapping with "atoms" and, unless ``space`` is given, "space".
        space: Space overriding the embedded description.

    Returns:
        The validated measure.

    Raises:
        MeasureError: If the atom list is malformed or weights do not sum to 1.
        SpaceError: If a point is not valid in the space.
    """
    if not isinstance(data, dict):
        raise MeasureError(f"Measure description must be an object, got {data!r}")
    if space is None:
        if "space" not in data:
            raise MeasureError("Measure description has no 'space'")
        space = space_from_dict(data["space"])
    raw_atoms = data.get("atoms")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        raise MeasureError("Measure description needs a non-empty 'atoms' list")
    try:
        atoms = [(space.point_from_json(a["point"]), float(a["weight"])) for a in raw_atoms]
    except (KeyError, TypeError) as e:
        raise MeasureError(f"Malformed atom entry: {e}") from e
    total = math.fsum(w for _, w in atoms)
    if not math.isfinite(total) or abs(total - 1.0) > settings.ingestion_weight_tolerance:
        raise MeasureError(f"Atom weights sum to {total}, expected 1")
    return AtomicMeasure.from_atoms(space, [(point, w / total) for point, w in atoms])


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def dirac(space: SpaceDescriptor, p: Point) -> AtomicMeasure:
    """The Dirac measure at p."""
    return AtomicMeasure(space, (p,), (1.0,))


def push_forward(mu: AtomicMeasure, f: Callable[[Point], Point], target_space: Optional[SpaceDescriptor] = None) -> AtomicMeasure:
    """
    Image measure f#mu.

    Args:
        mu: Source measure.
        f: Map defined on the support of mu.
        target_space: Space of the images; defaults to mu's space.

    Returns:
        The push-forward, with colliding images merged.

    Raises:
        SpaceError: If an image point is not valid in the target space.
    """
    target = mu.space if target_space is None else target_space
    return AtomicMeasure(target, tuple(f(p) for p in mu.points), mu.weights)


def mixture(parts: Sequence[Tuple[AtomicMeasure, float]]) -> AtomicMeasure:
    """
    Convex combination sum c_k mu_k.

    Args:
        parts: Pairs (measure, coefficient) on a common space.

    Returns:
        The mixture with duplicate atoms merged.

    Raises:
        MeasureError: On negative coefficients, coefficients not summing to 1,
            or mixed spaces.
    """
    if not parts:
        raise MeasureError("Mixture needs at least one part")
    space = parts[0][0].space
    for measure, coefficient in parts:
        if coefficient < 0.0:
            raise MeasureError(f"Mixture coefficient {coefficient} is negative")
        if measure.space != space:
            raise MeasureError("Mixture parts must share a space")
    total = math.fsum(c for _, c in parts)
    if abs(total - 1.0) > settings.mixture_tolerance:
        raise MeasureError(f"Mixture coefficients sum to {total}, expected 1")
    points: List[Point] = []
    weights: List[float] = []
    for measure, coefficient in parts:
        if coefficient == 0.0:
            continue
        points.extend(measure.points)
        weights.extend(coefficient / total * w for w in measure.weights)
    return AtomicMeasure(space, tuple(points), tuple(weights))


def restrict_normalized(mu: AtomicMeasure, region: Callable[[Point], bool]) -> Tuple[AtomicMeasure, float]:
    """
    Normalized restriction mu|region / mu(region) and the mass mu(region).

    Raises:
        MeasureError: If the region has zero mass.
    """
    kept = [(p, w) for p, w in mu.atoms if region(p)]
    mass = math.fsum(w for _, w in kept)
    if mass <= 0.0:
        raise MeasureError("Cannot normalize a restriction of zero mass")
    return AtomicMeasure.from_atoms(mu.space, [(p, w / mass) for p, w in kept]), mass


def _require_product(mu: AtomicMeasure) -> QProduct:
    if not isinstance(mu.space, QProduct):
        raise MeasureError(f"Expected a measure on a q-product, got {mu.space.describe()}")
    return mu.space


def marginals(mu: AtomicMeasure) -> Tuple[AtomicMeasure, AtomicMeasure]:
    """Coordinate push-forwards (p^X#mu, p^Y#mu) of a measure on a q-product."""
    space = _require_product(mu)
    left = push_forward(mu, lambda p: p.left, space.left)
    right = push_forward(mu, lambda p: p.right, space.right)
    return left, right


def product_measure(mu: AtomicMeasure, nu: AtomicMeasure, space: QProduct) -> AtomicMeasure:
    """The independent coupling mu x nu on a q-product of their spaces."""
    if mu.space != space.left or nu.space != space.right:
        raise MeasureError("Product factors must live on the factors of the product space")
    atoms = [
        (Pair(x, y), wx * wy) for x, wx in mu.atoms for y, wy in nu.atoms
    ]
    return AtomicMeasure.from_atoms(space, atoms)


def p_moment(mu: AtomicMeasure, base: Point, p: float) -> float:
    """The p-moment sum w d(base, x)^p."""
    mu.space.validate(base)
    distances = mu.space.pairwise([base], mu.points)[0]
    return float(np.dot(mu.weight_array, distances ** p))


def total_variation(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    """Total variation distance sup_A |mu(A) - nu(A)|."""
    if mu.space != nu.space:
        raise MeasureError("Total variation needs measures on a common space")
    differences: List[float] = []
    remaining = list(nu.atoms)
    for point, weight in mu.atoms:
        match = next(
            (k for k, (other, _) in enumerate(remaining) if points_close(point, other)),
            None,
        )
        if match is None:
            differences.append(weight)
        else:
            differences.append(abs(weight - remaining.pop(match)[1]))
    differences.extend(w for _, w in remaining)
    return 0.5 * math.fsum(differences)


# ---------------------------------------------------------------------------
# Quantile functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileFunction:
    """
    Left-continuous step function G^-1 on (0, 1].

    ``values[k]`` is taken on the interval (breakpoints[k-1], breakpoints[k]],
    with breakpoints[-1] = 0 implied.
    """

    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        breakpoints = np.asarray(self.breakpoints, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if breakpoints.size == 0 or breakpoints.shape != values.shape:
            raise MeasureError("Quantile function needs matching non-empty breakpoints and values")
        if breakpoints[0] <= 0.0 or np.any(np.diff(breakpoints) <= 0.0):
            raise MeasureError("Quantile breakpoints must increase within (0, 1]")
        if breakpoints[-1] != 1.0:
            raise MeasureError("Quantile function must end at breakpoint 1")
        if np.any(np.diff(values) < 0.0):
            raise MeasureError("Quantile values must be nondecreasing")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def __call__(self, m: float) -> float:
        if not 0.0 < m <= 1.0:
            raise MeasureError(f"Quantile level {m} is outside (0, 1]")
        k = int(np.searchsorted(self.breakpoints, m, side="left"))
        return self.values[min(k, len(self.values) - 1)]

    def _on(self, grid: np.ndarray) -> np.ndarray:
        indices = np.searchsorted(self.breakpoints, grid, side="left")
        return np.asarray(self.values)[np.minimum(indices, len(self.values) - 1)]

    def _merged(self, other: "QuantileFunction") -> Tuple[np.ndarray, np.ndarray]:
        grid = np.union1d(self.breakpoints, other.breakpoints)
        lengths = np.diff(grid, prepend=0.0)
        return grid, lengths

    def lp_cost(self, other: "QuantileFunction", p: float) -> float:
        """Integral of |G - H|^p over (0, 1], exact over merged breakpoints."""
        grid, lengths = self._merged(other)
        gaps = np.abs(self._on(grid) - other._on(grid))
        return float(np.dot(lengths, gaps ** p))

    def lp_distance(self, other: "QuantileFunction", p: float) -> float:
        return self.lp_cost(other, p) ** (1.0 / p)

    def combine(self, other: "QuantileFunction", a: float, b: float) -> "QuantileFunction":
        """The step function a*G + b*H for non-negative a, b."""
        if a < 0.0 or b < 0.0:
            raise MeasureError("Quantile combinations need non-negative coefficients")
        grid, _ = self._merged(other)
        values = a * self._on(grid) + b * other._on(grid)
        return QuantileFunction(tuple(grid), tuple(values)).compressed()

    def compressed(self) -> "QuantileFunction":
        """Drop breakpoints separating equal values."""
        keep = [
            k for k in range(len(self.values))
            if k == len(self.values) - 1 or self.values[k] != self.values[k + 1]
        ]
        return QuantileFunction(
            tuple(self.breakpoints[k] for k in keep), tuple(self.values[k] for k in keep)
        )


def is_one_dimensional(space: SpaceDescriptor) -> bool:
    return isinstance(space, (Ray, Interval))


def to_quantile(mu: AtomicMeasure) -> QuantileFunction:
    """
    Quantile function of a measure on a ray or an interval.

    Raises:
        MeasureError: For measures on other spaces.
    """
    if not is_one_dimensional(mu.space):
        raise MeasureError(f"Quantile functions need a 1-D space, got {mu.space.describe()}")
    values = mu.values()
    order = np.argsort(values, kind="stable")
    cumulative = np.minimum(np.cumsum(mu.weight_array[order]), 1.0)
    cumulative[-1] = 1.0
    # Atoms lighter than the spacing of floats near their level add no length.
    keep = np.concatenate(([True], np.diff(cumulative) > 0.0))
    if not keep.all():
        logger.debug("Dropping %d atoms below quantile resolution", int((~keep).sum()))
    return QuantileFunction(tuple(cumulative[keep]), tuple(values[order][keep]))


def from_quantile(space: SpaceDescriptor, quantile: QuantileFunction) -> AtomicMeasure:
    """
    Measure whose quantile function is ``quantile``.

    Raises:
        MeasureError: For non-1-D spaces.
        SpaceError: If a value lies outside the space.
    """
    if not is_one_dimensional(space):
        raise MeasureError(f"Quantile functions need a 1-D space, got {space.describe()}")
    weights = np.diff(np.asarray(quantile.breakpoints), prepend=0.0)
    return AtomicMeasure(space, tuple(Scalar(v) for v in quantile.values), tuple(weights))
