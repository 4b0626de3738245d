"""
Metric spaces, their points, and the geodesic structure the lab relies on.

Supported kinds are the ray [0, inf), closed intervals (including the whole
line), finite-dimensional Euclidean spaces, finite metric spaces given by a
distance matrix, q-products X x_q Y, and spherical suspensions Susp(X).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config.settings import settings
from app.core.exceptions import NotComputableError, SpaceError

logger = logging.getLogger(__name__)

# Angles computed as s * t may overshoot [0, pi] by a few ulps.
ANGLE_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scalar:
    """A coordinate on the ray or on an interval."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Vector:
    """A point of a Euclidean space."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class Index:
    """A point of a finite metric space, addressed by its row in the matrix."""

    i: int

    def __post_init__(self):
        object.__setattr__(self, "i", int(self.i))


@dataclass(frozen=True)
class Pair:
    """A point (left, right) of a q-product."""

    left: "Point"
    right: "Point"


@dataclass(frozen=True)
class SuspPoint:
    """
    A point [x, t] of a spherical suspension.

    Angles 0 and pi are the poles; they are stored without a base point so
    that equality and hashing ignore the collapsed coordinate.
    """

    base: Optional["Point"]
    angle: float

    def __post_init__(self):
        angle = float(self.angle)
        if not (-ANGLE_SLACK <= angle <= math.pi + ANGLE_SLACK):
            raise SpaceError(f"Suspension angle {angle} is outside [0, pi]")
        angle = min(max(angle, 0.0), math.pi)
        object.__setattr__(self, "angle", angle)
        if angle == 0.0 or angle == math.pi:
            object.__setattr__(self, "base", None)
        elif self.base is None:
            raise SpaceError("A suspension point off the poles needs a base point")

    @property
    def is_pole(self) -> bool:
        return self.base is None


Point = Union[Scalar, Vector, Index, Pair, SuspPoint]

POLE_ZERO = SuspPoint(None, 0.0)
POLE_PI = SuspPoint(None, math.pi)


# ---------------------------------------------------------------------------
# Space descriptors
# ---------------------------------------------------------------------------

class SpaceDescriptor:
    """
    Common interface of every supported metric space.

    Subclasses implement ``_distance`` (no validation), ``contains`` and the
    JSON codecs; the public ``distance`` validates both arguments first.
    """

    kind: str = ""

    def contains(self, point: Any) -> bool:
        raise NotImplementedError

    def _distance(self, a: Point, b: Point) -> float:
        raise NotImplementedError

    def _intermediate(self, a: Point, b: Point, t: float) -> List[Point]:
        raise NotImplementedError

    def reference_point(self) -> Point:
        raise NotImplementedError

    def points(self) -> Optional[List[Point]]:
        """Return the full point set when it is finite, otherwise None."""
        return None

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def point_to_json(self, point: Point) -> Any:
        raise NotImplementedError

    def point_from_json(self, data: Any) -> Point:
        raise NotImplementedError

    @cached_property
    def diameter(self) -> float:
        return self._compute_diameter()

    def _compute_diameter(self) -> float:
        raise NotImplementedError

    def validate(self, point: Any) -> None:
        """
        Ensure a point belongs to this space.

        Raises:
            SpaceError: If the point has the wrong kind or lies outside the space.
        """
        if not self.contains(point):
            raise SpaceError(f"Point {point!r} does not belong to {self.describe()}")

    def distance(self, a: Point, b: Point) -> float:
        self.validate(a)
        self.validate(b)
        return self._distance(a, b)

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        """Distance matrix between two point lists (no validation)."""
        return np.array(
            [[self._distance(x, y) for y in ys] for x in xs], dtype=float
        ).reshape(len(xs), len(ys))

    def describe(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Ray(SpaceDescriptor):
    """The half-line [0, inf) with the absolute-value metric."""

    kind = "ray"

    def contains(self, point: Any) -> bool:
        return isinstance(point, Scalar) and point.value >= 0.0 and math.isfinite(point.value)

    def _distance(self, a: Scalar, b: Scalar) -> float:
        return abs(a.value - b.value)

    def _intermediate(self, a: Scalar, b: Scalar, t: float) -> List[Point]:
        return [Scalar((1.0 - t) * a.value + t * b.value)]

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        left = np.array([x.value for x in xs], dtype=float)
        right = np.array([y.value for y in ys], dtype=float)
        return np.abs(left[:, None] - right[None, :])

    def reference_point(self) -> Point:
        return Scalar(0.0)

    def _compute_diameter(self) -> float:
        return math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind}

    def point_to_json(self, point: Scalar) -> Any:
        return point.value

    def point_from_json(self, data: Any) -> Point:
        return Scalar(_as_float(data))


@dataclass(frozen=True)
class Interval(SpaceDescriptor):
    """A closed interval [lower, upper]; infinite bounds give the real line."""

    lower: float
    upper: float
    kind = "interval"

    def __post_init__(self):
        if not self.lower < self.upper:
            raise SpaceError(f"Interval needs lower < upper, got [{self.lower}, {self.upper}]")

    def contains(self, point: Any) -> bool:
        return (
            isinstance(point, Scalar)
            and math.isfinite(point.value)
            and self.lower <= point.value <= self.upper
        )

    def _distance(self, a: Scalar, b: Scalar) -> float:
        return abs(a.value - b.value)

    def _intermediate(self, a: Scalar, b: Scalar, t: float) -> List[Point]:
        return [Scalar((1.0 - t) * a.value + t * b.value)]

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        left = np.array([x.value for x in xs], dtype=float)
        right = np.array([y.value for y in ys], dtype=float)
        return np.abs(left[:, None] - right[None, :])

    def reference_point(self) -> Point:
        if math.isfinite(self.lower):
            return Scalar(self.lower)
        return Scalar(min(max(0.0, self.lower), self.upper))

    def _compute_diameter(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "lower": self.lower if math.isfinite(self.lower) else None,
            "upper": self.upper if math.isfinite(self.upper) else None,
        }

    def point_to_json(self, point: Scalar) -> Any:
        return point.value

    def point_from_json(self, data: Any) -> Point:
        return Scalar(_as_float(data))

    def describe(self) -> str:
        return f"interval[{self.lower}, {self.upper}]"


LINE = Interval(-math.inf, math.inf)


@dataclass(frozen=True)
class Euclidean(SpaceDescriptor):
    """R^dim with the Euclidean norm."""

    dim: int
    kind = "euclidean"

    def __post_init__(self):
        if self.dim < 1:
            raise SpaceError("Euclidean dimension must be positive")

    def contains(self, point: Any) -> bool:
        return (
            isinstance(point, Vector)
            and len(point.coords) == self.dim
            and all(math.isfinite(c) for c in point.coords)
        )

    def _distance(self, a: Vector, b: Vector) -> float:
        return math.dist(a.coords, b.coords)

    def _intermediate(self, a: Vector, b: Vector, t: float) -> List[Point]:
        return [Vector((1.0 - t) * x + t * y for x, y in zip(a.coords, b.coords))]

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        left = np.array([x.coords for x in xs], dtype=float).reshape(len(xs), self.dim)
        right = np.array([y.coords for y in ys], dtype=float).reshape(len(ys), self.dim)
        return np.linalg.norm(left[:, None, :] - right[None, :, :], axis=-1)

    def reference_point(self) -> Point:
        return Vector((0.0,) * self.dim)

    def _compute_diameter(self) -> float:
        return math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "dim": self.dim}

    def point_to_json(self, point: Vector) -> Any:
        return list(point.coords)

    def point_from_json(self, data: Any) -> Point:
        if not isinstance(data, (list, tuple)):
            raise SpaceError(f"Euclidean point must be a list, got {data!r}")
        return Vector(_as_float(c) for c in data)

    def describe(self) -> str:
        return f"euclidean({self.dim})"


@dataclass(frozen=True)
class FiniteSpace(SpaceDescriptor):
    """
    A finite metric space given by its distance matrix.

    The matrix is validated once on construction: square, symmetric,
    zero on the diagonal, positive off it, and satisfying the triangle
    inequality up to ``settings.metric_tolerance``.
    """

    dist: Tuple[Tuple[float, ...], ...]
    kind = "finite"

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.dist)
        object.__setattr__(self, "dist", rows)
        matrix = np.array(rows, dtype=float)
        n = len(rows)
        if n == 0 or matrix.shape != (n, n):
            raise SpaceError("Finite space needs a non-empty square distance matrix")
        if not np.all(np.isfinite(matrix)):
            raise SpaceError("Finite distance matrix must be finite")
        tol = settings.metric_tolerance
        if np.any(np.diag(matrix) != 0.0):
            raise SpaceError("Finite distance matrix must have a zero diagonal")
        if np.any(np.abs(matrix - matrix.T) > tol):
            raise SpaceError("Finite distance matrix must be symmetric")
        off_diagonal = matrix[~np.eye(n, dtype=bool)]
        if np.any(off_diagonal <= 0.0):
            raise SpaceError("Distinct points of a finite space must be at positive distance")
        # violations[i, j, k] compares d(i, k) with d(i, j) + d(j, k)
        violations = matrix[:, None, :] - (matrix[:, :, None] + matrix[None, :, :])
        if np.any(violations > tol * max(1.0, float(matrix.max()))):
            raise SpaceError("Finite distance matrix violates the triangle inequality")

    @classmethod
    def from_coordinates(cls, coords: Sequence[float]) -> "FiniteSpace":
        """Finite subset of the line with the induced metric."""
        values = np.asarray(coords, dtype=float)
        return cls(tuple(map(tuple, np.abs(values[:, None] - values[None, :]))))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]]) -> "FiniteSpace":
        """Finite subset of a Euclidean space with the induced metric."""
        values = np.asarray(vectors, dtype=float)
        diff = values[:, None, :] - values[None, :, :]
        return cls(tuple(map(tuple, np.linalg.norm(diff, axis=-1))))

    @classmethod
    def cycle(cls, n: int, edge: float = 1.0) -> "FiniteSpace":
        """Graph metric of the n-cycle with edges of the given length."""
        if n < 3:
            raise SpaceError("A cycle needs at least three vertices")
        steps = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
        hops = np.minimum(steps, n - steps)
        return cls(tuple(map(tuple, hops * float(edge))))

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.dist, dtype=float)

    @property
    def size(self) -> int:
        return len(self.dist)

    def contains(self, point: Any) -> bool:
        return isinstance(point, Index) and 0 <= point.i < self.size

    def _distance(self, a: Index, b: Index) -> float:
        return self.dist[a.i][b.i]

    def _intermediate(self, a: Index, b: Index, t: float) -> List[Point]:
        total = self.matrix[a.i, b.i]
        slack = settings.betweenness_slack * max(1.0, total)
        near = np.abs(self.matrix[a.i] - t * total) <= slack
        far = np.abs(self.matrix[:, b.i] - (1.0 - t) * total) <= slack
        return [Index(int(i)) for i in np.flatnonzero(near & far)]

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        rows = np.array([x.i for x in xs], dtype=int)
        cols = np.array([y.i for y in ys], dtype=int)
        return self.matrix[np.ix_(rows, cols)]

    def points(self) -> Optional[List[Point]]:
        return [Index(i) for i in range(self.size)]

    def reference_point(self) -> Point:
        return Index(0)

    def _compute_diameter(self) -> float:
        return float(self.matrix.max())

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "dist": [list(row) for row in self.dist]}

    def point_to_json(self, point: Index) -> Any:
        return point.i

    def point_from_json(self, data: Any) -> Point:
        if isinstance(data, bool) or not isinstance(data, int):
            raise SpaceError(f"Finite-space point must be an integer index, got {data!r}")
        return Index(data)

    def describe(self) -> str:
        return f"finite({self.size})"


@dataclass(frozen=True)
class QProduct(SpaceDescriptor):
    """The product X x_q Y with metric (d_X^q + d_Y^q)^(1/q)."""

    left: SpaceDescriptor
    right: SpaceDescriptor
    q: float = 2.0
    kind = "qproduct"

    def __post_init__(self):
        if not (self.q > 1.0 and math.isfinite(self.q)):
            raise SpaceError(f"q-product needs a finite q > 1, got {self.q}")

    def contains(self, point: Any) -> bool:
        return (
            isinstance(point, Pair)
            and self.left.contains(point.left)
            and self.right.contains(point.right)
        )

    def _combine(self, dl, dr):
        if self.q == 2.0:
            return np.hypot(dl, dr)
        return (dl ** self.q + dr ** self.q) ** (1.0 / self.q)

    def _distance(self, a: Pair, b: Pair) -> float:
        return float(
            self._combine(
                self.left._distance(a.left, b.left),
                self.right._distance(a.right, b.right),
            )
        )

    def _intermediate(self, a: Pair, b: Pair, t: float) -> List[Point]:
        # Equality in the q-norm triangle inequality splits factorwise.
        lefts = _factor_intermediate(self.left, a.left, b.left, t)
        rights = _factor_intermediate(self.right, a.right, b.right, t)
        return [Pair(x, y) for x in lefts for y in rights]

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        dl = self.left.pairwise([x.left for x in xs], [y.left for y in ys])
        dr = self.right.pairwise([x.right for x in xs], [y.right for y in ys])
        return self._combine(dl, dr)

    def points(self) -> Optional[List[Point]]:
        lefts, rights = self.left.points(), self.right.points()
        if lefts is None or rights is None:
            return None
        return [Pair(x, y) for x in lefts for y in rights]

    def reference_point(self) -> Point:
        return Pair(self.left.reference_point(), self.right.reference_point())

    def _compute_diameter(self) -> float:
        return float(self._combine(self.left.diameter, self.right.diameter))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "q": self.q,
        }

    def point_to_json(self, point: Pair) -> Any:
        return [self.left.point_to_json(point.left), self.right.point_to_json(point.right)]

    def point_from_json(self, data: Any) -> Point:
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            raise SpaceError(f"q-product point must be a two-element list, got {data!r}")
        return Pair(self.left.point_from_json(data[0]), self.right.point_from_json(data[1]))

    def describe(self) -> str:
        return f"qproduct({self.left.describe()}, {self.right.describe()}, q={self.q})"


@dataclass(frozen=True)
class Suspension(SpaceDescriptor):
    """
    The spherical suspension Susp(X) = X x [0, pi] / ~ with metric

        cos d([x,t],[y,s]) = cos t cos s + sin t sin s cos(min(d(x,y), pi)).

    With ``strict`` set, a base of diameter >= pi/2 is rejected; otherwise
    it is accepted and ``diameter_warning`` is raised on the descriptor.
    """

    base: SpaceDescriptor
    strict: bool = False
    diameter_warning: bool = field(default=False, init=False, compare=False)
    kind = "suspension"

    def __post_init__(self):
        if isinstance(self.base, Suspension):
            logger.debug("Building an iterated suspension")
        if self.base.diameter >= math.pi / 2:
            if self.strict:
                raise SpaceError(
                    f"Suspension base diameter {self.base.diameter} is not below pi/2"
                )
            logger.warning(
                "Suspension base diameter %.6g is not below pi/2; "
                "rigidity constructions may not apply", self.base.diameter
            )
            object.__setattr__(self, "diameter_warning", True)

    def contains(self, point: Any) -> bool:
        if not isinstance(point, SuspPoint):
            return False
        return point.is_pole or self.base.contains(point.base)

    def _distance(self, a: SuspPoint, b: SuspPoint) -> float:
        if a.is_pole or b.is_pole or a.base == b.base:
            return abs(a.angle - b.angle)
        gap = min(self.base._distance(a.base, b.base), math.pi)
        weight = math.sin(a.angle) * math.sin(b.angle)
        # half-angle form of the cosine law, accurate near 0 and pi
        near = math.sin(abs(a.angle - b.angle) / 2.0) ** 2 + weight * math.sin(gap / 2.0) ** 2
        far = math.cos((a.angle + b.angle) / 2.0) ** 2 + weight * math.cos(gap / 2.0) ** 2
        return 2.0 * math.atan2(math.sqrt(near), math.sqrt(far))

    def pairwise(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        left = np.array([x.angle for x in xs], dtype=float)
        right = np.array([y.angle for y in ys], dtype=float)
        rows = [k for k, x in enumerate(xs) if not x.is_pole]
        cols = [k for k, y in enumerate(ys) if not y.is_pole]
        base = np.zeros((len(xs), len(ys)))
        if rows and cols:
            base[np.ix_(rows, cols)] = self.base.pairwise(
                [xs[k].base for k in rows], [ys[k].base for k in cols]
            )
        gap = np.minimum(base, math.pi)
        weight = np.sin(left)[:, None] * np.sin(right)[None, :]
        near = np.sin(np.abs(left[:, None] - right[None, :]) / 2.0) ** 2 + weight * np.sin(gap / 2.0) ** 2
        far = np.cos((left[:, None] + right[None, :]) / 2.0) ** 2 + weight * np.cos(gap / 2.0) ** 2
        # poles and shared bases reduce to the angle gap
        return np.where(
            base == 0.0,
            np.abs(left[:, None] - right[None, :]),
            2.0 * np.arctan2(np.sqrt(near), np.sqrt(far)),
        )

    def _intermediate(self, a: SuspPoint, b: SuspPoint, t: float) -> List[Point]:
        angle = (1.0 - t) * a.angle + t * b.angle
        if a.is_pole and b.is_pole:
            base_points = self.base.points()
            if base_points is None:
                raise NotComputableError(
                    "Pole-to-pole intermediate points need an enumerable base space"
                )
            return [SuspPoint(x, angle) for x in base_points]
        return [_suspension_geodesic(self, a, b).point_at(t)]

    def reference_point(self) -> Point:
        return POLE_ZERO

    def _compute_diameter(self) -> float:
        return math.pi

    def grid(self, angles: Sequence[float], base_points: Optional[Sequence[Point]] = None) -> List[SuspPoint]:
        """
        Points [x, t] for every base point x and angle t, poles listed once.

        Args:
            angles: Fiber angles in [0, pi].
            base_points: Base points to use; defaults to the base point set.

        Returns:
            Distinct suspension points in base-major order.
        """
        if base_points is None:
            base_points = self.base.points()
            if base_points is None:
                raise SpaceError("A suspension grid over a continuous base needs explicit base points")
        seen = set()
        result = []
        for x in base_points:
            for t in angles:
                point = SuspPoint(x, t)
                if point not in seen:
                    seen.add(point)
                    result.append(point)
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "base": self.base.to_dict(), "strict": self.strict}

    def point_to_json(self, point: SuspPoint) -> Any:
        if point.is_pole:
            return {"pole": "zero" if point.angle == 0.0 else "pi"}
        return {"base": self.base.point_to_json(point.base), "angle": point.angle}

    def point_from_json(self, data: Any) -> Point:
        if not isinstance(data, dict):
            raise SpaceError(f"Suspension point must be an object, got {data!r}")
        pole = data.get("pole")
        if pole is not None:
            if pole == "zero":
                return POLE_ZERO
            if pole == "pi":
                return POLE_PI
            raise SpaceError(f"Unknown pole tag {pole!r}")
        angle = _as_float(data.get("angle"))
        raw_base = data.get("base")
        base = None if raw_base is None else self.base.point_from_json(raw_base)
        return SuspPoint(base, angle)

    def describe(self) -> str:
        return f"suspension({self.base.describe()})"


def _as_float(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpaceError(f"Expected a number, got {value!r}")
    return float(value)


def _factor_intermediate(space: SpaceDescriptor, a: Point, b: Point, t: float) -> List[Point]:
    if a == b:
        return [a]
    return space._intermediate(a, b, t)


# ---------------------------------------------------------------------------
# Geodesic paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicPath:
    """
    A constant-speed geodesic s -> gamma_s with gamma_0 = start, gamma_1 = end.

    Subclasses differ only in how ``point_at`` evaluates the curve.
    """

    space: SpaceDescriptor
    start: Point
    end: Point

    @property
    def speed(self) -> float:
        return self.space._distance(self.start, self.end)

    def point_at(self, s: float) -> Point:
        raise NotImplementedError

    def __call__(self, s: float) -> Point:
        return self.point_at(s)


@dataclass(frozen=True)
class ConstantPath(GeodesicPath):
    def point_at(self, s: float) -> Point:
        return self.start


@dataclass(frozen=True)
class LinearSegment(GeodesicPath):
    """Straight segment on a ray, interval or Euclidean space."""

    def point_at(self, s: float) -> Point:
        if isinstance(self.start, Scalar):
            point: Point = Scalar((1.0 - s) * self.start.value + s * self.end.value)
        else:
            point = Vector(
                (1.0 - s) * x + s * y for x, y in zip(self.start.coords, self.end.coords)
            )
        if not 0.0 <= s <= 1.0:
            # Extensions beyond the endpoints must stay inside the space.
            self.space.validate(point)
        return point


@dataclass(frozen=True)
class MeridianSegment(GeodesicPath):
    """Arc of the meridian through ``base`` between two angles."""

    base: Point
    start_angle: float
    end_angle: float

    def point_at(self, s: float) -> Point:
        return SuspPoint(self.base, (1.0 - s) * self.start_angle + s * self.end_angle)


@dataclass(frozen=True)
class ProductSegment(GeodesicPath):
    left_path: GeodesicPath
    right_path: GeodesicPath

    def point_at(self, s: float) -> Point:
        return Pair(self.left_path.point_at(s), self.right_path.point_at(s))


@dataclass(frozen=True)
class FinitePath(GeodesicPath):
    """
    Discrete geodesic of a finite space: a betweenness chain with parameters.

    Only the listed parameters can be evaluated.
    """

    stops: Tuple[Tuple[float, Point], ...]

    def point_at(self, s: float) -> Point:
        for parameter, point in self.stops:
            if abs(parameter - s) <= settings.geodesic_tolerance:
                return point
        raise NotComputableError(
            f"Finite geodesic has no point at parameter {s}; "
            f"available: {[p for p, _ in self.stops]}"
        )


def geodesic(space: SpaceDescriptor, a: Point, b: Point, pole_base: Optional[Point] = None) -> GeodesicPath:
    """
    Build the deterministic geodesic joining two points.

    Args:
        space: Ambient space.
        a: Start point.
        b: End point.
        pole_base: Base point of the meridian used between the two poles of a
            suspension; defaults to the base space's reference point.

    Returns:
        A GeodesicPath evaluating to a at 0 and b at 1.

    Raises:
        NotComputableError: For suspension pairs that are neither pole-anchored
            nor on a common meridian.
    """
    space.validate(a)
    space.validate(b)
    return _geodesic(space, a, b, pole_base)


def _geodesic(space: SpaceDescriptor, a: Point, b: Point, pole_base: Optional[Point] = None) -> GeodesicPath:
    if a == b:
        return ConstantPath(space, a, b)
    if isinstance(space, (Ray, Interval, Euclidean)):
        return LinearSegment(space, a, b)
    if isinstance(space, QProduct):
        return ProductSegment(
            space, a, b,
            _geodesic(space.left, a.left, b.left),
            _geodesic(space.right, a.right, b.right),
        )
    if isinstance(space, Suspension):
        return _suspension_geodesic(space, a, b, pole_base)
    if isinstance(space, FiniteSpace):
        return _finite_geodesic(space, a, b)
    raise NotComputableError(f"No geodesic construction for {space.describe()}")


def _suspension_geodesic(space: Suspension, a: SuspPoint, b: SuspPoint, pole_base: Optional[Point] = None) -> GeodesicPath:
    if a == b:
        return ConstantPath(space, a, b)
    if a.is_pole and b.is_pole:
        base = pole_base if pole_base is not None else space.base.reference_point()
        space.base.validate(base)
    elif a.is_pole:
        base = b.base
    elif b.is_pole or a.base == b.base:
        base = a.base
    else:
        raise NotComputableError(
            "Suspension geodesics are computed only for pole-anchored or co-meridian pairs"
        )
    return MeridianSegment(space, a, b, base, a.angle, b.angle)


def _finite_geodesic(space: FiniteSpace, a: Index, b: Index) -> FinitePath:
    matrix = space.matrix
    total = matrix[a.i, b.i]
    slack = settings.betweenness_slack * max(1.0, total)
    candidates = []
    for z in range(space.size):
        if z in (a.i, b.i):
            continue
        if abs(matrix[a.i, z] + matrix[z, b.i] - total) <= slack:
            candidates.append((matrix[a.i, z] / total, z))
    stops: List[Tuple[float, Point]] = [(0.0, a)]
    last_parameter, last = 0.0, a.i
    for parameter, z in sorted(candidates):
        if parameter <= last_parameter:
            continue
        if abs(matrix[last, z] - (parameter - last_parameter) * total) <= slack:
            stops.append((parameter, Index(z)))
            last_parameter, last = parameter, z
    stops.append((1.0, b))
    return FinitePath(space, a, b, tuple(stops))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def distance(space: SpaceDescriptor, a: Point, b: Point) -> float:
    """
    Exact metric of a supported space.

    Args:
        space: Space descriptor.
        a: First point.
        b: Second point.

    Returns:
        The distance d(a, b).

    Raises:
        SpaceError: If either point does not belong to the space.
    """
    return space.distance(a, b)


def intermediate_points(space: SpaceDescriptor, a: Point, b: Point, t: float) -> List[Point]:
    """
    Compute M^t(a, b) = {z : d(a,z) = t d(a,b), d(z,b) = (1-t) d(a,b)}.

    Args:
        space: Space descriptor.
        a: First endpoint.
        b: Second endpoint, distinct from a.
        t: Level in (0, 1).

    Returns:
        The intermediate points. Closed form on rays, intervals, Euclidean
        spaces and suspension meridians; exhaustive scan on finite spaces;
        factorwise combination on q-products.

    Raises:
        SpaceError: If a == b, t is outside (0, 1), or a point is foreign.
        NotComputableError: For suspension pairs off a common meridian.
    """
    space.validate(a)
    space.validate(b)
    if a == b:
        raise SpaceError("Intermediate points need distinct endpoints")
    if not 0.0 < t < 1.0:
        raise SpaceError(f"Intermediate level {t} is outside (0, 1)")
    return space._intermediate(a, b, t)


def _require_suspension(space: SpaceDescriptor) -> Suspension:
    if not isinstance(space, Suspension):
        raise SpaceError(f"Expected a suspension, got {space.describe()}")
    return space


def scaling_map(space: SpaceDescriptor, s: float, p: Point, pole_base: Optional[Point] = None) -> Point:
    """
    The scaling L_s([x, t]) = [x, s t] of a suspension.

    Args:
        space: Suspension.
        s: Non-negative factor with s * t <= pi.
        p: Point to scale.
        pole_base: Base point used when scaling the pole pi by s < 1.

    Returns:
        The scaled point.
    """
    space = _require_suspension(space)
    space.validate(p)
    if s < 0.0:
        raise SpaceError(f"Scaling factor must be non-negative, got {s}")
    angle = s * p.angle
    if angle > math.pi + ANGLE_SLACK:
        raise SpaceError(f"Scaled angle {angle} exceeds pi")
    if not p.is_pole:
        return SuspPoint(p.base, angle)
    if angle == 0.0 or angle >= math.pi:
        return SuspPoint(None, min(angle, math.pi))
    base = pole_base if pole_base is not None else space.base.reference_point()
    space.base.validate(base)
    return SuspPoint(base, angle)


def cylinder_scaling_map(space: SpaceDescriptor, s: float, p: Point) -> Point:
    """The map (x, r) -> (x, s r) of the half-cylinder X x_q [0, inf)."""
    space = _require_cylinder(space)
    space.validate(p)
    if s < 0.0:
        raise SpaceError(f"Scaling factor must be non-negative, got {s}")
    return Pair(p.left, Scalar(s * p.right.value))


def _require_cylinder(space: SpaceDescriptor) -> QProduct:
    if not isinstance(space, QProduct) or not isinstance(space.right, (Ray, Interval)):
        raise SpaceError(f"Expected a q-product with a one-dimensional fiber, got {space.describe()}")
    return space


def fiber_projection(space: SpaceDescriptor, t: float, p: Point, extension: Optional[Point] = None) -> Point:
    """
    The fiber map T_t replacing the fiber coordinate of p by t.

    On a half-cylinder T_t((x, s)) = (x, t); on a suspension
    T_t([x, s]) = [x, t], and the poles go to [extension, t].

    Args:
        space: Half-cylinder (q-product with a ray or interval fiber) or suspension.
        t: Target fiber level.
        p: Point to project.
        extension: Base point assigned to the poles of a suspension;
            defaults to the base space's reference point.

    Returns:
        The projected point.

    Raises:
        SpaceError: If t is outside the fiber range or the space is unsupported.
    """
    if isinstance(space, Suspension):
        if not 0.0 <= t <= math.pi:
            raise SpaceError(f"Suspension fiber level {t} is outside [0, pi]")
        space.validate(p)
        if t == 0.0 or t == math.pi:
            return SuspPoint(None, t)
        if not p.is_pole:
            return SuspPoint(p.base, t)
        base = extension if extension is not None else space.base.reference_point()
        space.base.validate(base)
        return SuspPoint(base, t)
    space = _require_cylinder(space)
    level = Scalar(t)
    if not space.right.contains(level):
        raise SpaceError(f"Fiber level {t} is outside {space.right.describe()}")
    space.validate(p)
    return Pair(p.left, level)


def _require_narrow_base(space: Suspension) -> None:
    if space.base.diameter >= math.pi / 2:
        raise SpaceError("Meridian projection needs a base of diameter below pi/2")


def meridian_projection(space: SpaceDescriptor, y: Point, p: Point) -> Point:
    """
    Closest point of the half-meridian s -> [y, s pi/2] to p = [x, t].

    Args:
        space: Suspension over a base of diameter < pi/2.
        y: Base point of the meridian.
        p: Point with angle t in [0, pi/2].

    Returns:
        [y, atan(cos d(x,y) tan t)] for t < pi/2 and [y, pi/2] for t = pi/2.
    """
    space = _require_suspension(space)
    _require_narrow_base(space)
    space.base.validate(y)
    space.validate(p)
    if p.angle > math.pi / 2:
        raise SpaceError(f"Meridian projection needs t <= pi/2, got {p.angle}")
    if p.is_pole:
        return POLE_ZERO
    if p.angle == math.pi / 2:
        return SuspPoint(y, math.pi / 2)
    cos_d = math.cos(space.base._distance(p.base, y))
    return SuspPoint(y, math.atan(cos_d * math.tan(p.angle)))


def full_meridian_projection(space: SpaceDescriptor, y: Point, p: Point) -> Point:
    """Closest point of the whole meridian through y to p, for any angle."""
    space = _require_suspension(space)
    _require_narrow_base(space)
    space.base.validate(y)
    space.validate(p)
    if p.is_pole:
        return p
    cos_d = math.cos(space.base._distance(p.base, y))
    return SuspPoint(y, math.atan2(cos_d * math.sin(p.angle), math.cos(p.angle)))


def _require_finite(space: SpaceDescriptor) -> FiniteSpace:
    if not isinstance(space, FiniteSpace):
        raise SpaceError(f"Expected a finite space, got {space.describe()}")
    return space


def condition_a_check(space: SpaceDescriptor, targets: Sequence[Point]) -> Optional[Point]:
    """
    Find x_o with every target in J(x_o).

    J(x_o) holds the points y != x_o from which some geodesic passes through
    x_o and continues: there is z != x_o with d(y,z) = d(y,x_o) + d(x_o,z).

    Args:
        space: Finite space.
        targets: Points x_1, ..., x_n.

    Returns:
        The lowest-index qualifying x_o, or None.
    """
    space = _require_finite(space)
    for target in targets:
        space.validate(target)
    matrix = space.matrix
    slack = settings.betweenness_slack * max(1.0, space.diameter)
    for xo in range(space.size):
        if all(_extends_through(matrix, y.i, xo, slack) for y in targets):
            return Index(xo)
    return None


def _extends_through(matrix: np.ndarray, y: int, xo: int, slack: float) -> bool:
    if matrix[y, xo] <= slack:
        return False
    gaps = np.abs(matrix[y] - matrix[y, xo] - matrix[xo])
    gaps[xo] = math.inf
    return bool(np.any(gaps <= slack))


def condition_b_values(space: SpaceDescriptor, xo: Point, x_points: Sequence[Point], t_values: Sequence[float]) -> List[float]:
    """The products tan(t_j) cos(d(x_o, x_m)) in (t, x) order."""
    space = _require_finite(space)
    return [
        math.tan(t) * math.cos(space.distance(xo, x))
        for t in t_values
        for x in x_points
    ]


def condition_b_check(space: SpaceDescriptor, x_points: Sequence[Point], t_values: Sequence[float]) -> Optional[Point]:
    """
    Find x_o making all products tan(t_j) cos(d(x_o, x_m)) pairwise distinct.

    Args:
        space: Finite space.
        x_points: Pairwise distinct base points.
        t_values: Pairwise distinct angles in (0, pi/2) or (pi/2, pi).

    Returns:
        The lowest-index qualifying x_o, or None.

    Raises:
        SpaceError: On pi/2, out-of-range or repeated angles, or repeated points.
    """
    space = _require_finite(space)
    for t in t_values:
        if not 0.0 < t < math.pi:
            raise SpaceError(f"Condition B angle {t} is outside (0, pi)")
        if t == math.pi / 2:
            raise SpaceError("Condition B excludes the equator angle pi/2")
    if len(set(t_values)) != len(t_values):
        raise SpaceError("Condition B angles must be pairwise distinct")
    for x in x_points:
        space.validate(x)
    for i, x in enumerate(x_points):
        for other in x_points[i + 1:]:
            if space._distance(x, other) <= settings.point_tolerance:
                raise SpaceError(f"Condition B points must be distinct, got {x!r} twice")
    gap = settings.separation_tolerance
    for xo in space.points():
        values = np.sort(np.array(condition_b_values(space, xo, x_points, t_values)))
        if values.size < 2 or np.all(np.diff(values) > gap):
            return xo
    return None


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------

def _interval_from_dict(data: Dict[str, Any]) -> SpaceDescriptor:
    lower = data.get("lower")
    upper = data.get("upper")
    return Interval(
        -math.inf if lower is None else _as_float(lower),
        math.inf if upper is None else _as_float(upper),
    )


def _finite_from_dict(data: Dict[str, Any]) -> SpaceDescriptor:
    dist = data.get("dist")
    if not isinstance(dist, list) or not dist:
        raise SpaceError("Finite space needs a non-empty 'dist' matrix")
    if not isinstance(dist[0], list):
        n = int(data.get("n") or round(math.sqrt(len(dist))))
        if n * n != len(dist):
            raise SpaceError("Flat 'dist' must have n*n entries")
        dist = [dist[i * n:(i + 1) * n] for i in range(n)]
    return FiniteSpace(tuple(tuple(_as_float(v) for v in row) for row in dist))


_SPACE_BUILDERS: Dict[str, Callable[[Dict[str, Any]], SpaceDescriptor]] = {
    "ray": lambda data: Ray(),
    "interval": _interval_from_dict,
    "euclidean": lambda data: Euclidean(int(data["dim"])),
    "finite": _finite_from_dict,
    "qproduct": lambda data: QProduct(
        space_from_dict(data["left"]),
        space_from_dict(data["right"]),
        _as_float(data.get("q", 2.0)),
    ),
    "suspension": lambda data: Suspension(
        space_from_dict(data["base"]),
        bool(data.get("strict", settings.suspension_strict)),
    ),
}


def space_from_dict(data: Dict[str, Any]) -> SpaceDescriptor:
    """
    Build a space from its JSON form.

    Args:
        data: Mapping with a "kind" key and the kind's parameters.

    Returns:
        The space descriptor.

    Raises:
        SpaceError: For unknown kinds or malformed parameters.
    """
    if not isinstance(data, dict):
        raise SpaceError(f"Space description must be an object, got {data!r}")
    kind = data.get("kind")
    builder = _SPACE_BUILDERS.get(kind)
    if builder is None:
        raise SpaceError(f"Unknown space kind {kind!r}")
    try:
        return builder(data)
    except KeyError as e:
        raise SpaceError(f"Space of kind {kind!r} is missing parameter {e}") from e


def space_to_dict(space: SpaceDescriptor) -> Dict[str, Any]:
    return space.to_dict()


def point_to_json(space: SpaceDescriptor, point: Point) -> Any:
    space.validate(point)
    return space.point_to_json(point)


def point_from_json(space: SpaceDescriptor, data: Any) -> Point:
    point = space.point_from_json(data)
    space.validate(point)
    return point
