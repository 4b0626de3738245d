"""
Constructions and checks around isometric rigidity of Wasserstein spaces:
the two-atom families on the ray and the line, barycenter-based exotic maps,
Frechet functions, the half-cylinder branching instance, and the suspension
midpoint and projection experiments.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.core.exceptions import ConstructionError, SpaceError, UniqueMidpointError
from app.core.interpolation import (
    displacement_interpolate,
    midpoint_diameter_1d,
    verify_intermediate,
    verify_midpoint,
)
from app.core.measures import (
    AtomicMeasure,
    dirac,
    from_quantile,
    marginals,
    mixture,
    p_moment,
    push_forward,
    restrict_normalized,
    to_quantile,
    total_variation,
)
from app.core.spaces import (
    LINE,
    POLE_PI,
    POLE_ZERO,
    Euclidean,
    FiniteSpace,
    Pair,
    Point,
    QProduct,
    Ray,
    Scalar,
    SpaceDescriptor,
    SuspPoint,
    Suspension,
    Vector,
    condition_b_check,
    fiber_projection,
    full_meridian_projection,
    meridian_projection,
    scaling_map,
)
from app.core.transport import (
    TransportPlan,
    adjacency_test,
    is_cyclically_monotone,
    solve_wp,
    wp_1d,
)

logger = logging.getLogger(__name__)

RAY = Ray()


# ---------------------------------------------------------------------------
# Two-atom family on the ray
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaMeasure:
    """
    The measure (1 - lam) delta_0 + lam delta_x on the ray.

    Normalized members sit at W_p distance 1 from delta_0, i.e. lam = x^-p.
    """

    lam: float
    x: float
    p: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConstructionError(f"Mass {self.lam} is outside [0, 1]")
        if self.x < 0.0:
            raise ConstructionError(f"Atom position {self.x} is negative")

    @classmethod
    def normalized(cls, x: float, p: Optional[float] = None) -> "SigmaMeasure":
        p = settings.default_p if p is None else p
        if x < 1.0:
            raise ConstructionError(f"Normalized members need x >= 1, got {x}")
        return cls(x ** -p, x, p)

    @property
    def realization(self) -> AtomicMeasure:
        if self.lam == 0.0 or self.x == 0.0:
            return dirac(RAY, Scalar(0.0))
        return AtomicMeasure(RAY, (Scalar(0.0), Scalar(self.x)), (1.0 - self.lam, self.lam))

    @property
    def distance_to_origin(self) -> float:
        return self.lam ** (1.0 / self.p) * self.x


def sigma_member(mu: AtomicMeasure, p: Optional[float] = None) -> Optional[SigmaMeasure]:
    """Return mu as a SigmaMeasure when its support is {0, x} or {0}, else None."""
    if not isinstance(mu.space, Ray):
        return None
    p = settings.default_p if p is None else p
    # exact zero, not proximity
    positive = [(point.value, w) for point, w in mu.atoms if point.value != 0.0]
    if not positive:
        return SigmaMeasure(0.0, 0.0, p)
    if len(positive) > 1:
        return None
    x, lam = positive[0]
    return SigmaMeasure(min(lam, 1.0), x, p)


def _check_sigma_pair(x: float, y: float) -> None:
    if x < 1.0:
        raise ConstructionError(f"Closed forms need x >= 1, got {x}")
    if x > y:
        raise ConstructionError(f"Closed forms need x <= y, got x={x}, y={y}")


def sigma_distance(x: float, y: float, p: Optional[float] = None) -> float:
    """W_p between normalized members at x <= y, in closed form."""
    p = settings.default_p if p is None else p
    _check_sigma_pair(x, y)
    ratio = x / y
    return ((1.0 - ratio ** p) + (1.0 - ratio) ** p) ** (1.0 / p)


def sigma_distance_to_dirac1(x: float, p: Optional[float] = None) -> float:
    """W_p between the normalized member at x >= 1 and delta_1."""
    p = settings.default_p if p is None else p
    _check_sigma_pair(x, x)
    return ((1.0 - x ** -p) + (1.0 - 1.0 / x) ** p) ** (1.0 / p)


def dirac_zero_midpoint_witness(mu: AtomicMeasure, p: float = 1.0) -> Tuple[AtomicMeasure, bool]:
    """
    Pair mu with the measure of quantile 2 G_mu.

    mu is then a midpoint of delta_0 and that measure, which singles out
    delta_0 metrically on the ray.

    Returns:
        Tuple of (partner measure, midpoint verified).
    """
    if not isinstance(mu.space, Ray):
        raise ConstructionError(f"Expected a measure on the ray, got {mu.space.describe()}")
    quantile = to_quantile(mu)
    partner = from_quantile(mu.space, quantile.combine(quantile, 2.0, 0.0))
    origin = dirac(mu.space, Scalar(0.0))
    return partner, verify_midpoint(origin, partner, mu, p)


@dataclass(frozen=True)
class ClaimWitness:
    """Outcome of the unbounded-growth witness built from one family member."""

    mu_n: AtomicMeasure
    eta_prime: AtomicMeasure
    growth: float
    expected_growth: float
    adjacent: bool
    intermediate: bool
    eta_distance: float
    diameter_bound: float
    predicted_distance: float

    @property
    def passed(self) -> bool:
        tol = settings.midpoint_tolerance
        return (
            abs(self.growth - self.expected_growth) <= tol
            and self.adjacent
            and self.intermediate
            and abs(self.eta_distance - self.diameter_bound) <= tol
        )


def sigma_w1_claim_witness(eta: AtomicMeasure, n: int, samples: Optional[int] = None) -> ClaimWitness:
    """
    Build mu_n = (1 - lam) delta_0 + lam delta_{xn} and
    eta' = (1 - lam/n) delta_0 + (lam/n) delta_{xn} from eta = (1 - lam) delta_0 + lam delta_x.

    eta and eta' are both in M^{1/n}(delta_0, mu_n) and realize the diameter
    of that set, while W1(delta_0, mu_n) = lam x n grows with n.

    Raises:
        ConstructionError: If eta is not a two-atom family member other than
            delta_0, or n < 2.
    """
    member = sigma_member(eta, 1.0)
    if member is None:
        raise ConstructionError("The witness needs a measure (1 - lam) delta_0 + lam delta_x")
    if member.lam == 0.0:
        raise ConstructionError("The witness needs a measure other than delta_0")
    if n < 2:
        raise ConstructionError(f"The witness needs n >= 2, got {n}")
    lam, x = member.lam, member.x
    origin = dirac(RAY, Scalar(0.0))
    mu_n = SigmaMeasure(lam, x * n, 1.0).realization
    eta_prime = SigmaMeasure(lam / n, x * n, 1.0).realization
    t = 1.0 / n
    return ClaimWitness(
        mu_n=mu_n,
        eta_prime=eta_prime,
        growth=wp_1d(origin, mu_n, 1.0),
        expected_growth=lam * x * n,
        adjacent=adjacency_test(origin, mu_n),
        intermediate=verify_intermediate(origin, mu_n, eta, t, p=1.0),
        eta_distance=wp_1d(eta, eta_prime, 1.0),
        diameter_bound=midpoint_diameter_1d(origin, mu_n, samples, t),
        predicted_distance=2.0 * lam * x * (1.0 - t),
    )


# ---------------------------------------------------------------------------
# Two-atom chart of the line
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta2Chart:
    """
    The two-atom measure with barycenter x, variance sigma^2 and skew parameter p:
    weight e^-p / Z at x - sigma e^p and e^p / Z at x + sigma e^-p.
    """

    x: float
    sigma: float
    p_param: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ConstructionError(f"Chart spread must be non-negative, got {self.sigma}")

    @property
    def realization(self) -> AtomicMeasure:
        if self.sigma == 0.0:
            return dirac(LINE, Scalar(self.x))
        up, down = math.exp(self.p_param), math.exp(-self.p_param)
        total = up + down
        return AtomicMeasure(
            LINE,
            (Scalar(self.x - self.sigma * up), Scalar(self.x + self.sigma * down)),
            (down / total, up / total),
        )

    @property
    def barycenter(self) -> float:
        mu = self.realization
        return float(np.dot(mu.weight_array, mu.values()))

    @property
    def second_moment(self) -> float:
        mu = self.realization
        return float(np.dot(mu.weight_array, (mu.values() - self.x) ** 2))


@dataclass(frozen=True)
class Delta2Comparison:
    """Squared W2 between two charts by closed forms and by the solver."""

    corrected: float
    printed: float
    solver: float

    @property
    def corrected_matches(self) -> bool:
        return abs(self.corrected - self.solver) <= 1e-10 * max(1.0, self.solver)

    @property
    def discrepancy(self) -> bool:
        return abs(self.printed - self.solver) > 1e-10 * max(1.0, self.solver)


def delta2_closed_forms(c1: Delta2Chart, c2: Delta2Chart) -> Delta2Comparison:
    """
    Compare |x-y|^2 + s^2 + r^2 - 2 s r e^{-|p-q|}, its variant with
    e^{+|p-q|}, and the exact W2^2.
    """
    base = (c1.x - c2.x) ** 2 + c1.sigma ** 2 + c2.sigma ** 2
    gap = abs(c1.p_param - c2.p_param)
    cross = 2.0 * c1.sigma * c2.sigma
    wp, _ = solve_wp(LINE, c1.realization, c2.realization, 2.0)
    comparison = Delta2Comparison(
        corrected=base - cross * math.exp(-gap),
        printed=base - cross * math.exp(gap),
        solver=wp ** 2,
    )
    if comparison.discrepancy:
        logger.warning(
            "Chart formula with e^{+|p-q|} gives %.12g, exact W2^2 is %.12g",
            comparison.printed, comparison.solver,
        )
    return comparison


def delta2_distance(c1: Delta2Chart, c2: Delta2Chart) -> float:
    """W2 between two charts; the exact value, cross-checked by the closed form."""
    comparison = delta2_closed_forms(c1, c2)
    if not comparison.corrected_matches:
        logger.warning(
            "Chart closed form %.12g disagrees with exact W2^2 %.12g",
            comparison.corrected, comparison.solver,
        )
    return math.sqrt(comparison.solver)


# ---------------------------------------------------------------------------
# Barycenters and Frechet functions
# ---------------------------------------------------------------------------

def barycenter(mu: AtomicMeasure) -> Vector:
    """
    The weighted mean of a measure on a Euclidean space.

    Raises:
        SpaceError: For measures on other spaces.
    """
    if not isinstance(mu.space, Euclidean):
        raise SpaceError(f"Barycenters need a Euclidean space, got {mu.space.describe()}")
    if mu.is_dirac:
        return mu.points[0]
    coords = np.array([p.coords for p in mu.points], dtype=float)
    return Vector(np.average(coords, axis=0, weights=mu.weight_array))


def frechet_function(space: SpaceDescriptor, mu: AtomicMeasure, x: Point) -> float:
    """F_mu(x) = sum w d(x, x_i)^2."""
    if mu.space != space:
        raise SpaceError("Frechet functions need the measure's own space")
    return p_moment(mu, x, 2.0)


def frechet_mean_set(space: SpaceDescriptor, mu: AtomicMeasure, candidates: Sequence[Point]) -> List[Point]:
    """
    Minimizers of F_mu among the candidates.

    Raises:
        ConstructionError: If the candidate list is empty.
    """
    if not candidates:
        raise ConstructionError("Frechet mean search needs at least one candidate")
    values = np.array([frechet_function(space, mu, x) for x in candidates])
    lowest = float(values.min())
    slack = settings.frechet_tolerance * max(1.0, abs(lowest))
    return [x for x, value in zip(candidates, values) if value - lowest <= slack]


# ---------------------------------------------------------------------------
# Isometry candidates
# ---------------------------------------------------------------------------

def _hilbert_product(space: SpaceDescriptor) -> QProduct:
    if not (isinstance(space, QProduct) and isinstance(space.left, Euclidean) and space.q == 2.0):
        raise SpaceError(
            f"Exotic maps need a q=2 product with a Euclidean left factor, got {space.describe()}"
        )
    return space


def exotic_isometry(psi: np.ndarray, mu: AtomicMeasure) -> AtomicMeasure:
    """
    Rotate the Euclidean coordinates of mu about the barycenter of its
    Euclidean marginal: ((h, y), w) -> ((b + psi(h - b), y), w).

    Raises:
        SpaceError: If mu does not live on a Euclidean x_2 Y product.
        ConstructionError: If psi is not orthogonal of the right size.
    """
    space = _hilbert_product(mu.space)
    psi = np.asarray(psi, dtype=float)
    dim = space.left.dim
    if psi.shape != (dim, dim):
        raise ConstructionError(f"Expected a {dim}x{dim} matrix, got shape {psi.shape}")
    if np.max(np.abs(psi.T @ psi - np.eye(dim))) > settings.orthogonality_tolerance:
        raise ConstructionError("The linear map is not orthogonal")
    center = barycenter(marginals(mu)[0]).as_array()

    def rotate(point: Pair) -> Pair:
        h = point.left.as_array()
        return Pair(Vector(center + psi @ (h - center)), point.right)

    return push_forward(mu, rotate)


@dataclass(frozen=True)
class IsometryCandidate:
    """A map on measures to be tested for the isometry property."""

    name: str
    kind: str
    apply: Callable[[AtomicMeasure], AtomicMeasure] = field(compare=False)

    def __call__(self, mu: AtomicMeasure) -> AtomicMeasure:
        return self.apply(mu)

    @classmethod
    def push_forward(cls, name: str, base_map: Callable[[Point], Point]) -> "IsometryCandidate":
        return cls(name, "push_forward", lambda mu: push_forward(mu, base_map))

    @classmethod
    def exotic(cls, psi: np.ndarray, name: str = "exotic") -> "IsometryCandidate":
        matrix = np.asarray(psi, dtype=float)
        return cls(name, "exotic", lambda mu: exotic_isometry(matrix, mu))


def verify_isometry(candidate: IsometryCandidate, space: SpaceDescriptor, pairs: Sequence[Tuple[AtomicMeasure, AtomicMeasure]], p: Optional[float] = None) -> float:
    """Max |W_p(F mu, F nu) - W_p(mu, nu)| over the sample pairs."""
    worst = 0.0
    for mu, nu in pairs:
        before, _ = solve_wp(space, mu, nu, p)
        after, _ = solve_wp(space, candidate(mu), candidate(nu), p)
        worst = max(worst, abs(after - before))
    logger.debug("Isometry candidate %s: distortion %.3g over %d pairs", candidate.name, worst, len(pairs))
    return worst


# ---------------------------------------------------------------------------
# Half-cylinder
# ---------------------------------------------------------------------------

def _cylinder(space: SpaceDescriptor) -> QProduct:
    if not isinstance(space, QProduct) or not isinstance(space.right, Ray):
        raise SpaceError(f"Expected a half-cylinder X x_q [0, inf), got {space.describe()}")
    return space


def base_projection(mu: AtomicMeasure) -> AtomicMeasure:
    """(T_0)#mu read on the base X."""
    space = _cylinder(mu.space)
    return push_forward(mu, lambda point: point.left, space.left)


def cylinder_I_membership(mu: AtomicMeasure, nu: AtomicMeasure) -> bool:
    """
    Whether (T_0)#mu = nu, with nu a measure on the base.

    Raises:
        SpaceError: If nu does not live on the base of mu's half-cylinder.
    """
    space = _cylinder(mu.space)
    if nu.space != space.left:
        raise SpaceError("The base measure must live on the cylinder's base")
    return base_projection(mu).approx_equal(nu)


def lift_to_level(cylinder: QProduct, mu: AtomicMeasure, level: float) -> AtomicMeasure:
    """The measure mu on the base placed on the fiber level X x {level}."""
    return push_forward(mu, lambda x: Pair(x, Scalar(level)), cylinder)


def fiber_argmin_gap(space: SpaceDescriptor, mu: AtomicMeasure, t: float, fiber_measures: Sequence[AtomicMeasure], p: Optional[float] = None) -> float:
    """
    Smallest W_p(mu, nu') - W_p(mu, T_t#mu) over fiber measures nu'.

    A non-negative result confirms T_t#mu as the closest fiber measure.
    """
    projected = push_forward(mu, lambda x: fiber_projection(space, t, x))
    reference, _ = solve_wp(space, mu, projected, p)
    gap = math.inf
    for other in fiber_measures:
        wp, _ = solve_wp(space, mu, other, p)
        gap = min(gap, wp - reference)
    return gap


@dataclass(frozen=True)
class BranchingReport:
    diameter: float
    radius: float
    nu0: AtomicMeasure
    nu1: AtomicMeasure
    plan: TransportPlan
    midpoint: AtomicMeasure
    base_pushforward: AtomicMeasure
    total_variation: float
    crossing_cost: float
    vertical_cost: float
    endpoints_in_fiber: bool
    midpoint_verified: bool
    plan_monotone: bool

    @property
    def leaves_fiber(self) -> bool:
        return self.total_variation > settings.marginal_tolerance


def cylinder_branching_experiment(cylinder: SpaceDescriptor, mu: AtomicMeasure, p: Optional[float] = None) -> BranchingReport:
    """
    Show that the set of measures over mu in the half-cylinder is not geodesic.

    With D the diameter of supp(mu) and balls of radius D/4 around a farthest
    pair x, y, nu0 lifts the ball at x to height 2D, nu1 lifts the ball at y
    to 2D, and both lift the rest C to 4D. Both project to mu, but their
    optimal plan swaps mass across the base, so the midpoint does not.

    Args:
        cylinder: X x_q [0, inf).
        mu: Non-Dirac measure on X.
        p: Exponent.

    Returns:
        BranchingReport with the plan, midpoint and the costs compared.

    Raises:
        ConstructionError: If mu is a Dirac.
    """
    space = _cylinder(cylinder)
    p = settings.default_p if p is None else p
    if mu.space != space.left:
        raise SpaceError("The base measure must live on the cylinder's base")
    if mu.is_dirac:
        raise ConstructionError("The branching construction needs a measure with two atoms")
    support = list(mu.points)
    distances = space.left.pairwise(support, support)
    far = int(np.argmax(distances))
    x, y = support[far // len(support)], support[far % len(support)]
    diameter = float(distances.max())
    radius = diameter / 4.0

    def near(center: Point) -> Callable[[Point], bool]:
        return lambda z: space.left._distance(z, center) <= radius

    if math.fsum(w for z, w in mu.atoms if near(x)(z)) > math.fsum(w for z, w in mu.atoms if near(y)(z)):
        x, y = y, x
    levels0 = {}
    levels1 = {}
    for z in support:
        if near(x)(z):
            levels0[z], levels1[z] = 2.0 * diameter, 0.0
        elif near(y)(z):
            levels0[z], levels1[z] = 0.0, 2.0 * diameter
        else:
            levels0[z], levels1[z] = 4.0 * diameter, 4.0 * diameter
    nu0 = push_forward(mu, lambda z: Pair(z, Scalar(levels0[z])), space)
    nu1 = push_forward(mu, lambda z: Pair(z, Scalar(levels1[z])), space)
    _, plan = solve_wp(space, nu0, nu1, p)
    midpoint = displacement_interpolate(plan, 0.5)
    base = base_projection(midpoint)
    vertical = math.fsum(w * abs(levels0[z] - levels1[z]) ** p for z, w in mu.atoms)
    report = BranchingReport(
        diameter=diameter,
        radius=radius,
        nu0=nu0,
        nu1=nu1,
        plan=plan,
        midpoint=midpoint,
        base_pushforward=base,
        total_variation=total_variation(base, mu),
        crossing_cost=plan.cost,
        vertical_cost=vertical,
        endpoints_in_fiber=cylinder_I_membership(nu0, mu) and cylinder_I_membership(nu1, mu),
        midpoint_verified=verify_midpoint(nu0, nu1, midpoint, p),
        plan_monotone=bool(is_cyclically_monotone(plan)),
    )
    logger.debug(
        "Branching instance: optimal cost %.6g, vertical cost %.6g, TV %.6g",
        report.crossing_cost, report.vertical_cost, report.total_variation,
    )
    return report


# ---------------------------------------------------------------------------
# Suspension
# ---------------------------------------------------------------------------

def _suspension(space: SpaceDescriptor) -> Suspension:
    if not isinstance(space, Suspension):
        raise SpaceError(f"Expected a suspension, got {space.describe()}")
    return space


def pole_mixture(space: SpaceDescriptor, lam: float) -> AtomicMeasure:
    """(1 - lam) delta_0 + lam delta_pi on a suspension."""
    space = _suspension(space)
    if not 0.0 <= lam <= 1.0:
        raise ConstructionError(f"Pole mass {lam} is outside [0, 1]")
    return AtomicMeasure(space, (POLE_ZERO, POLE_PI), (1.0 - lam, lam))


def _fiber_angle(mu: AtomicMeasure) -> float:
    angles = {round(point.angle, 12) for point in mu.points}
    if any(point.is_pole for point in mu.points) or len(angles) != 1:
        raise ConstructionError("Expected a measure supported on a single fiber")
    return mu.points[0].angle


def _check_equator(mu: AtomicMeasure) -> None:
    if abs(_fiber_angle(mu) - math.pi / 2) > settings.point_tolerance:
        raise ConstructionError("Expected a measure supported on the equator")


def suspension_two_midpoints(space: SpaceDescriptor, nu: AtomicMeasure, lam: Optional[float] = None, split: Optional[Callable[[Point], bool]] = None) -> Tuple[AtomicMeasure, AtomicMeasure]:
    """
    Two midpoints between an equator measure nu and (1 - lam) delta_0 + lam delta_pi.

    The support splits into E and F (by default the first atom and the rest);
    lam = nu(F). The first midpoint scales E toward 0 and F toward pi; the
    second scales all of nu both ways.

    Args:
        space: Suspension.
        nu: Measure on the equator X x {pi/2}.
        lam: Pole mass; must equal nu(F) when nu has several atoms. For a
            Dirac it defaults to 1/2.
        split: Predicate selecting F on supp(nu).

    Returns:
        Tuple (m1, m2).

    Raises:
        UniqueMidpointError: If nu is a Dirac; the error carries the midpoint.
        ConstructionError: If nu is not an equator measure or lam != nu(F).
    """
    space = _suspension(space)
    _check_equator(nu)
    down = lambda point: scaling_map(space, 0.5, point)  # noqa: E731
    up = lambda point: scaling_map(space, 1.5, point)  # noqa: E731
    if nu.is_dirac:
        lam = 0.5 if lam is None else lam
        parts = [(push_forward(nu, down), 1.0 - lam), (push_forward(nu, up), lam)]
        unique = mixture([(m, c) for m, c in parts if c > 0.0])
        raise UniqueMidpointError("Dirac equator measures have a unique midpoint", unique)
    in_f = _split_predicate(nu, split)
    mass_f = equator_split_mass(nu, split)
    if lam is not None and abs(lam - mass_f) > settings.weight_sum_tolerance:
        raise ConstructionError(f"Pole mass {lam} does not match nu(F) = {mass_f}")
    lam = mass_f
    if lam <= settings.weight_sum_tolerance:
        scaled = push_forward(nu, down)
        return scaled, scaled
    if lam >= 1.0 - settings.weight_sum_tolerance:
        scaled = push_forward(nu, up)
        return scaled, scaled
    nu_e, _ = restrict_normalized(nu, lambda point: not in_f(point))
    nu_f, _ = restrict_normalized(nu, in_f)
    m1 = mixture([(push_forward(nu_e, down), 1.0 - lam), (push_forward(nu_f, up), lam)])
    m2 = mixture([(push_forward(nu, down), 1.0 - lam), (push_forward(nu, up), lam)])
    return m1, m2


def _split_predicate(nu: AtomicMeasure, split: Optional[Callable[[Point], bool]]) -> Callable[[Point], bool]:
    if split is not None:
        return split
    first = nu.points[0]
    return lambda point: point != first


def equator_split_mass(nu: AtomicMeasure, split: Optional[Callable[[Point], bool]] = None) -> float:
    """nu(F) for the split used by suspension_two_midpoints."""
    in_f = _split_predicate(nu, split)
    return math.fsum(w for point, w in nu.atoms if in_f(point))


def meridian_projection_pushforward(space: SpaceDescriptor, mu: AtomicMeasure, y: Point) -> AtomicMeasure:
    """
    Push a fiber measure at level 0 < t < pi/2 onto the half-meridian through y.

    Raises:
        ConstructionError: If mu is off a single fiber or t >= pi/2.
    """
    space = _suspension(space)
    t = _fiber_angle(mu)
    if not 0.0 < t < math.pi / 2:
        raise ConstructionError(f"Projection onto a meridian needs 0 < t < pi/2, got {t}")
    return push_forward(mu, lambda point: meridian_projection(space, y, point))


def projection_preserves_atom(space: SpaceDescriptor, mu: AtomicMeasure, y: Point) -> bool:
    """Whether proj#mu and mu give the same mass to the meridian point [y, t]."""
    projected = meridian_projection_pushforward(space, mu, y)
    on_meridian = SuspPoint(y, _fiber_angle(mu))
    return abs(projected.mass_at(on_meridian) - mu.mass_at(on_meridian)) <= settings.marginal_tolerance


@dataclass(frozen=True)
class SeparationReport:
    center: Optional[Point]
    first: Optional[AtomicMeasure]
    second: Optional[AtomicMeasure]

    @property
    def separated(self) -> bool:
        if self.first is None or self.second is None:
            return False
        return not self.first.approx_equal(self.second)


def condition_b_separation(space: SpaceDescriptor, mu_a: AtomicMeasure, mu_b: AtomicMeasure) -> SeparationReport:
    """
    Tell apart two measures on finitely many fibers by projecting both onto
    the meridian through a base point x_o making every tan(t) cos d(x_o, x)
    distinct.

    Returns:
        SeparationReport; center is None when no such x_o exists.
    """
    space = _suspension(space)
    if not isinstance(space.base, FiniteSpace):
        raise SpaceError("The separation experiment needs a finite base")
    points: List[Point] = []
    angles: List[float] = []
    for mu in (mu_a, mu_b):
        for point in mu.points:
            if point.is_pole:
                raise ConstructionError("The separation experiment needs measures off the poles")
            if point.base not in points:
                points.append(point.base)
            if point.angle not in angles:
                angles.append(point.angle)
    center = condition_b_check(space.base, points, angles)
    if center is None:
        return SeparationReport(None, None, None)
    project = lambda point: full_meridian_projection(space, center, point)  # noqa: E731
    return SeparationReport(center, push_forward(mu_a, project), push_forward(mu_b, project))


def pole_fiber_distances(space: SpaceDescriptor, lam: float, t: float, fiber_measures: Sequence[AtomicMeasure], p: Optional[float] = None) -> Tuple[float, List[float]]:
    """
    Distances from (1 - lam) delta_0 + lam delta_pi to measures on the fiber t.

    Every one of them equals ((1 - lam) t^p + lam (pi - t)^p)^(1/p).

    Returns:
        Tuple of (predicted distance, computed distances).
    """
    space = _suspension(space)
    p = settings.default_p if p is None else p
    poles = pole_mixture(space, lam).atoms
    source = AtomicMeasure.from_atoms(space, [(point, w) for point, w in poles if w > 0.0])
    distances = []
    for fiber in fiber_measures:
        if abs(_fiber_angle(fiber) - t) > settings.point_tolerance:
            raise ConstructionError(f"Measure is not supported on the fiber {t}")
        wp, _ = solve_wp(space, source, fiber, p)
        distances.append(wp)
    predicted = ((1.0 - lam) * t ** p + lam * (math.pi - t) ** p) ** (1.0 / p)
    return predicted, distances


def equator_pole_argmax(space: SpaceDescriptor, nu: AtomicMeasure, candidates: Sequence[AtomicMeasure], p: Optional[float] = None) -> List[AtomicMeasure]:
    """Candidates at maximal W_p distance from the equator measure nu."""
    space = _suspension(space)
    _check_equator(nu)
    distances = np.array([solve_wp(space, nu, c, p)[0] for c in candidates])
    if distances.size == 0:
        return []
    top = float(distances.max())
    return [c for c, d in zip(candidates, distances) if top - d <= settings.midpoint_tolerance]
