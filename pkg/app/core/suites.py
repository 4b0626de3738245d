"""
Verification suites and their machine-readable reports.

Each suite is a function registered under a name with ``@suite``. It
receives a SuiteContext holding the seeded generator and records assertions
on it; ``run_suite`` turns the recorded assertions into a RunReport.
"""
import itertools
import logging
import math
import os
import time
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from app.config.settings import settings
from app.core.exceptions import (
    ConstructionError,
    SpaceError,
    TransportError,
    UniqueMidpointError,
    UnknownSuiteError,
)
from app.core.interpolation import (
    atomic_candidates,
    midpoint_diameter_1d,
    scan_intermediate_candidates,
    sigma_ray_witness,
    verify_midpoint,
)
from app.core.measures import (
    AtomicMeasure,
    dirac,
    marginals,
    mixture,
)
from app.core.rigidity import (
    RAY,
    Delta2Chart,
    IsometryCandidate,
    SigmaMeasure,
    barycenter,
    condition_b_separation,
    cylinder_branching_experiment,
    cylinder_I_membership,
    delta2_closed_forms,
    delta2_distance,
    dirac_zero_midpoint_witness,
    equator_pole_argmax,
    exotic_isometry,
    fiber_argmin_gap,
    frechet_function,
    frechet_mean_set,
    lift_to_level,
    meridian_projection_pushforward,
    pole_fiber_distances,
    pole_mixture,
    projection_preserves_atom,
    sigma_distance,
    sigma_distance_to_dirac1,
    sigma_member,
    sigma_w1_claim_witness,
    suspension_two_midpoints,
    verify_isometry,
)
from app.core.spaces import (
    POLE_PI,
    POLE_ZERO,
    Euclidean,
    FiniteSpace,
    Index,
    Interval,
    Pair,
    QProduct,
    Ray,
    Scalar,
    SuspPoint,
    Suspension,
    Vector,
    condition_a_check,
    condition_b_check,
    meridian_projection,
)
from app.core.transport import (
    TransportPlan,
    adjacency_test,
    is_cyclically_monotone,
    monotone_plan,
    solve_wp,
    wp_1d,
)
from app.utils.file_utils import save_csv, save_text

logger = logging.getLogger(__name__)

Value = Union[bool, float, str]

REPORT_CSV_HEADER = ("suite", "seed", "id", "description", "expected", "actual", "tolerance", "passed")


class Assertion(BaseModel):
    """One recorded check of a suite."""

    id: str
    description: str
    expected: Optional[Value] = None
    actual: Optional[Value] = None
    tolerance: Optional[float] = None
    passed: bool


class RunReport(BaseModel):
    """
    Outcome of one suite run.

    The report passes iff every assertion passes. Wall time is measured on
    every run but serialized only when settings.report_include_timing is set,
    so same-seed reports are byte-identical.
    """

    suite: str
    seed: int
    assertions: List[Assertion] = Field(default_factory=list)
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> List[Assertion]:
        return [a for a in self.assertions if not a.passed]

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> str:
        exclude = None if settings.report_include_timing else {"wall_time"}
        return self.model_dump_json(indent=2, exclude=exclude) + "\n"

    def csv_rows(self) -> List[List[Any]]:
        return [
            [self.suite, self.seed, a.id, a.description, _cell(a.expected), _cell(a.actual), _cell(a.tolerance), a.passed]
            for a in self.assertions
        ]


def _cell(value: Any) -> Any:
    return "" if value is None else value


class SuiteContext:
    """Seeded generator plus the assertion log of a running suite."""

    def __init__(self, name: str, seed: int):
        self.name = name
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.assertions: List[Assertion] = []

    def _record(self, assertion: Assertion) -> bool:
        self.assertions.append(assertion)
        if not assertion.passed:
            logger.info("Suite %s: assertion %s failed", self.name, assertion.id)
        return assertion.passed

    def check(self, id: str, description: str, condition: bool) -> bool:
        condition = bool(condition)
        return self._record(Assertion(
            id=id, description=description, expected=True, actual=condition, passed=condition,
        ))

    def check_close(self, id: str, description: str, actual: float, expected: float, tol: float, relative: bool = False) -> bool:
        """
        Record |actual - expected| <= tol, scaled by max(1, |expected|) when relative.
        """
        actual, expected = float(actual), float(expected)
        error = abs(actual - expected)
        if relative:
            error /= max(1.0, abs(expected))
        return self._record(Assertion(
            id=id, description=description, expected=expected, actual=actual,
            tolerance=tol, passed=bool(error <= tol),
        ))

    def check_at_most(self, id: str, description: str, actual: float, bound: float) -> bool:
        actual = float(actual)
        return self._record(Assertion(
            id=id, description=description, expected=float(bound), actual=actual,
            passed=bool(actual <= bound),
        ))

    def check_at_least(self, id: str, description: str, actual: float, bound: float) -> bool:
        actual = float(actual)
        return self._record(Assertion(
            id=id, description=description, expected=float(bound), actual=actual,
            passed=bool(actual >= bound),
        ))

    def check_raises(self, id: str, description: str, error: type, action: Callable[[], Any]) -> bool:
        try:
            action()
        except error:
            raised = True
        else:
            raised = False
        return self._record(Assertion(
            id=id, description=description, expected=error.__name__,
            actual=error.__name__ if raised else "no error", passed=raised,
        ))

    def note(self, id: str, description: str, actual: Value) -> None:
        """Record an informational value that never fails the suite."""
        if isinstance(actual, (int, float)) and not isinstance(actual, bool):
            actual = float(actual)
        self._record(Assertion(id=id, description=description, actual=actual, passed=True))


SuiteFunction = Callable[[SuiteContext], None]

SUITES: Dict[str, SuiteFunction] = {}


def suite(name: str) -> Callable[[SuiteFunction], SuiteFunction]:
    """Register a suite function under ``name``."""
    def register(function: SuiteFunction) -> SuiteFunction:
        SUITES[name] = function
        return function
    return register


def suite_names() -> List[str]:
    return list(SUITES)


def _progress(iterable: Iterable, desc: str, total: Optional[int] = None) -> Iterable:
    return tqdm(iterable, desc=desc, total=total, leave=False, disable=not settings.show_progress)


def run_suite(name: str, seed: Optional[int] = None, output_path: Optional[str] = None, formats: Sequence[str] = ("json",)) -> RunReport:
    """
    Run a registered suite.

    Args:
        name: Suite name.
        seed: Generator seed (defaults to settings.default_seed).
        output_path: JSON file to write; a CSV is written next to it when
            "csv" is among the formats.
        formats: Report formats to write.

    Returns:
        The RunReport.

    Raises:
        UnknownSuiteError: If no suite has that name.
        OSError: If the report cannot be written.
    """
    function = SUITES.get(name)
    if function is None:
        raise UnknownSuiteError(f"Unknown suite {name!r}; available: {', '.join(SUITES)}")
    seed = settings.default_seed if seed is None else int(seed)
    logger.info("Running suite %s with seed %d", name, seed)
    context = SuiteContext(name, seed)
    started = time.perf_counter()
    function(context)
    report = RunReport(
        suite=name, seed=seed, assertions=context.assertions,
        wall_time=time.perf_counter() - started,
    )
    if output_path is not None:
        write_report(report, output_path, formats)
    return report


def write_report(report: RunReport, output_path: str, formats: Sequence[str] = ("json",)) -> List[str]:
    """
    Write a report as JSON and/or CSV.

    Returns:
        The paths written.
    """
    stem, _ = os.path.splitext(output_path)
    written = []
    if "json" in formats:
        written.append(save_text(report.to_json(), stem + ".json"))
    if "csv" in formats:
        written.append(save_csv(REPORT_CSV_HEADER, report.csv_rows(), stem + ".csv"))
    return written


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def _random_weights(rng: np.random.Generator, size: int) -> tuple:
    return tuple(rng.dirichlet(np.ones(size)))


def _random_ray_measure(rng: np.random.Generator, max_atoms: int, scale: float = 10.0) -> AtomicMeasure:
    size = int(rng.integers(1, max_atoms + 1))
    values = rng.uniform(0.0, scale, size)
    return AtomicMeasure(RAY, tuple(Scalar(v) for v in values), _random_weights(rng, size))


def _random_euclidean_measure(rng: np.random.Generator, space: Euclidean, max_atoms: int) -> AtomicMeasure:
    size = int(rng.integers(1, max_atoms + 1))
    points = tuple(Vector(rng.normal(size=space.dim)) for _ in range(size))
    return AtomicMeasure(space, points, _random_weights(rng, size))


def _random_product_measure(rng: np.random.Generator, space: QProduct, max_atoms: int) -> AtomicMeasure:
    size = int(rng.integers(1, max_atoms + 1))
    points = tuple(
        Pair(Vector(rng.normal(size=space.left.dim)), Index(int(rng.integers(space.right.size))))
        for _ in range(size)
    )
    return AtomicMeasure(space, points, _random_weights(rng, size))


def _three_point_space() -> FiniteSpace:
    return FiniteSpace(((0.0, 1.0, 1.5), (1.0, 0.0, 1.0), (1.5, 1.0, 0.0)))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

ORACLE_EXPONENTS = (1.0, 1.5, 2.0, 3.0)


@suite("oracle")
def oracle_suite(ctx: SuiteContext) -> None:
    """Network simplex against the quantile closed form on random ray pairs."""
    started = time.perf_counter()
    worst = {p: 0.0 for p in ORACLE_EXPONENTS}
    pairs = []
    for k in _progress(range(200), "oracle pairs"):
        p = ORACLE_EXPONENTS[k % len(ORACLE_EXPONENTS)]
        mu = _random_ray_measure(ctx.rng, 40)
        nu = _random_ray_measure(ctx.rng, 40)
        exact, _ = solve_wp(RAY, mu, nu, p)
        closed = wp_1d(mu, nu, p)
        worst[p] = max(worst[p], abs(exact - closed) / max(1.0, abs(closed)))
        pairs.append((mu, nu, p, exact))
    for p in ORACLE_EXPONENTS:
        ctx.check_at_most(
            f"wp-vs-quantile.p={p:g}",
            f"max relative gap between solve_wp and wp_1d over 50 pairs, p={p:g}",
            worst[p], 1e-9,
        )

    asymmetry = 0.0
    for mu, nu, p, exact in pairs[:20]:
        reverse, _ = solve_wp(RAY, nu, mu, p)
        asymmetry = max(asymmetry, abs(reverse - exact))
    ctx.check_at_most("symmetry", "max |W_p(mu, nu) - W_p(nu, mu)| over 20 pairs", asymmetry, 1e-12)

    violation = 0.0
    for _ in range(30):
        a, b, c = (_random_ray_measure(ctx.rng, 10) for _ in range(3))
        ab, _ = solve_wp(RAY, a, b, 2.0)
        bc, _ = solve_wp(RAY, b, c, 2.0)
        ac, _ = solve_wp(RAY, a, c, 2.0)
        violation = max(violation, ac - ab - bc)
    ctx.check_at_most("triangle", "max triangle-inequality excess over 30 triples, p=2", violation, 1e-10)

    isometric = True
    for _ in range(20):
        a, b = ctx.rng.uniform(0.0, 10.0, 2)
        wp, _ = solve_wp(RAY, dirac(RAY, Scalar(a)), dirac(RAY, Scalar(b)), 2.0)
        isometric = isometric and wp == abs(a - b)
    ctx.check("dirac-isometry", "W_p(delta_a, delta_b) == |a - b| exactly for 20 pairs", isometric)
    ctx.check("runtime", "the oracle checks finish within 30 seconds", time.perf_counter() - started < 30.0)


SIGMA_POSITIONS = (1.5, 2.0, 3.0, 5.0)
SIGMA_EXPONENTS = (1.0, 2.0, 3.0)


@suite("ray-formulas")
def ray_formulas_suite(ctx: SuiteContext) -> None:
    """Closed forms of the two-atom family on the ray, and the ray witnesses."""
    one = dirac(RAY, Scalar(1.0))
    origin = dirac(RAY, Scalar(0.0))
    for p in SIGMA_EXPONENTS:
        for x in SIGMA_POSITIONS:
            mu_x = SigmaMeasure.normalized(x, p).realization
            to_origin, _ = solve_wp(RAY, origin, mu_x, p)
            ctx.check_close(
                f"normalized.x={x:g}.p={p:g}", "W_p(delta_0, mu_x) = 1", to_origin, 1.0, 1e-10,
            )
            _, plan = solve_wp(RAY, one, mu_x, p)
            ctx.check_close(
                f"dirac1.x={x:g}.p={p:g}",
                "W_p^p(delta_1, mu_x) = (1 - x^-p) + (1 - 1/x)^p",
                plan.cost, (1.0 - x ** -p) + (1.0 - 1.0 / x) ** p, 1e-10,
            )
            ctx.check_close(
                f"dirac1-closed-form.x={x:g}.p={p:g}",
                "sigma_distance_to_dirac1 matches the solver",
                sigma_distance_to_dirac1(x, p), plan.wp, 1e-10,
            )
            squared = SigmaMeasure.normalized(x * x, p).realization
            left, _ = solve_wp(RAY, mu_x, one, p)
            right, _ = solve_wp(RAY, mu_x, squared, p)
            ctx.check_close(
                f"square-identity.x={x:g}.p={p:g}",
                "W_p(mu_x, delta_1) = W_p(mu_x, mu_{x^2})", left, right, 1e-10,
            )
        for x, y in itertools.combinations(SIGMA_POSITIONS, 2):
            mu_x = SigmaMeasure.normalized(x, p).realization
            mu_y = SigmaMeasure.normalized(y, p).realization
            wp, plan = solve_wp(RAY, mu_x, mu_y, p)
            ctx.check_close(
                f"pair.x={x:g}.y={y:g}.p={p:g}",
                "W_p^p(mu_x, mu_y) = (1 - x^p/y^p) + (1 - x/y)^p",
                plan.cost, (1.0 - x ** p / y ** p) + (1.0 - x / y) ** p, 1e-10,
            )
            ctx.check_close(
                f"pair-closed-form.x={x:g}.y={y:g}.p={p:g}",
                "sigma_distance matches the solver", sigma_distance(x, y, p), wp, 1e-10,
            )
    ctx.check_close("example.x=2.y=4.p=2", "sigma_distance(2, 4, 2) = 1", sigma_distance(2.0, 4.0, 2.0), 1.0, 1e-12)
    ctx.check_close("example.x=y", "sigma_distance(3, 3, 2) = 0", sigma_distance(3.0, 3.0, 2.0), 0.0, 1e-12)
    ctx.check_raises(
        "example.x>y", "sigma_distance rejects x > y", ConstructionError,
        lambda: sigma_distance(4.0, 2.0, 2.0),
    )

    mu = AtomicMeasure(RAY, (Scalar(1.0), Scalar(2.0)), (0.5, 0.5))
    ctx.check("sigma-member.outside", "1/2 delta_1 + 1/2 delta_2 is outside the family", sigma_member(mu) is None)
    ray = sigma_ray_witness(mu, p=2.0)
    ctx.check("ray-witness.through", "the ray passes through mu at t = 1", ray(1.0).approx_equal(mu))
    ctx.check("ray-witness.start", "the ray does not start at delta_0", not ray(0.0).approx_equal(origin))
    ctx.check_at_most(
        "ray-witness.speed", "constant speed on samples up to t = 3",
        ray.speed_defect([0.0, 0.5, 1.0, 2.0, 3.0]), settings.midpoint_tolerance,
    )
    ctx.check_raises(
        "ray-witness.family-member", "family members admit no such ray", ConstructionError,
        lambda: sigma_ray_witness(SigmaMeasure(0.5, 2.0).realization),
    )

    witness = AtomicMeasure(RAY, (Scalar(1.0), Scalar(3.0)), (0.5, 0.5))
    partner, verified = dirac_zero_midpoint_witness(witness)
    expected = AtomicMeasure(RAY, (Scalar(2.0), Scalar(6.0)), (0.5, 0.5))
    ctx.check("dirac-zero.partner", "the partner has quantile 2 G_mu", partner.approx_equal(expected))
    ctx.check("dirac-zero.midpoint", "mu is a W1 midpoint of delta_0 and its partner", verified)


@suite("delta2-chart")
def delta2_chart_suite(ctx: SuiteContext) -> None:
    """The two-atom chart of the line and its distance closed form."""
    reference = delta2_closed_forms(Delta2Chart(0.0, 1.0, 0.0), Delta2Chart(0.0, 1.0, math.log(2.0)))
    ctx.check_close("canonical.solver", "exact W2^2 between mu(0,1,0) and mu(0,1,ln 2)", reference.solver, 1.0, 1e-10)
    ctx.check("canonical.corrected", "the e^{-|p-q|} form matches the solver", reference.corrected_matches)
    ctx.check("canonical.discrepancy", "the e^{+|p-q|} form is flagged", reference.discrepancy)
    ctx.note("canonical.printed", "value of the e^{+|p-q|} form", reference.printed)

    same = Delta2Chart(0.5, 1.5, 0.3)
    ctx.check_close("identical", "distance of a chart to itself", delta2_distance(same, same), 0.0, 1e-12)
    spread = delta2_closed_forms(Delta2Chart(0.0, 1.0, 0.0), Delta2Chart(0.0, 2.0, 0.0))
    ctx.check_close("co-barycentric", "W2^2 = (sigma - rho)^2 for equal x and p", spread.solver, 1.0, 1e-10)

    moments_ok = True
    matches = True
    for _ in range(20):
        x, y = ctx.rng.uniform(-3.0, 3.0, 2)
        s, r = ctx.rng.uniform(0.1, 2.0, 2)
        a, b = ctx.rng.uniform(-1.0, 1.0, 2)
        first, second = Delta2Chart(x, s, a), Delta2Chart(y, r, b)
        for chart in (first, second):
            moments_ok = moments_ok and abs(chart.barycenter - chart.x) <= 1e-12 * max(1.0, abs(chart.x))
            moments_ok = moments_ok and abs(chart.second_moment - chart.sigma ** 2) <= 1e-12 * max(1.0, chart.sigma ** 2)
        matches = matches and delta2_closed_forms(first, second).corrected_matches
    ctx.check("moments", "realizations have barycenter x and variance sigma^2 on 20 random pairs", moments_ok)
    ctx.check("random-pairs", "the e^{-|p-q|} form matches the solver on 20 random pairs", matches)


ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


@suite("exotic")
def exotic_suite(ctx: SuiteContext) -> None:
    """The barycentric rotation on Euclidean(2) x_2 Y is an isometry of W2 fixing Diracs."""
    space = QProduct(Euclidean(2), _three_point_space(), 2.0)
    candidate = IsometryCandidate.exotic(ROTATION, "rotation")
    pairs = [
        (_random_product_measure(ctx.rng, space, 4), _random_product_measure(ctx.rng, space, 4))
        for _ in range(100)
    ]
    ctx.check_at_most(
        "distortion.p=2", "max |W2(F mu, F nu) - W2(mu, nu)| over 100 random pairs",
        verify_isometry(candidate, space, pairs, 2.0), 1e-9,
    )

    fixed = True
    for _ in range(20):
        point = Pair(Vector(ctx.rng.normal(size=2)), Index(int(ctx.rng.integers(3))))
        delta = dirac(space, point)
        fixed = fixed and exotic_isometry(ROTATION, delta) == delta
    ctx.check("diracs-fixed", "20 random Diracs are fixed exactly", fixed)

    y = Index(0)
    v = np.array([1.0, 0.0])
    mu = AtomicMeasure(space, (Pair(Vector((0.0, 0.0)), y), Pair(Vector(v), y)), (1.0 / 3.0, 2.0 / 3.0))
    image = exotic_isometry(ROTATION, mu)
    target = Pair(Vector((2.0 / 3.0) * v - (2.0 / 3.0) * (ROTATION @ v)), y)
    ctx.check_close("witness.mass", "mass 1/3 lands at (2/3)v - (2/3)psi(v)", image.mass_at(target, 1e-12), 1.0 / 3.0, 1e-12)
    ctx.check("witness.moved", "the witness is not fixed", not image.approx_equal(mu))
    ctx.check(
        "identity", "the identity rotation fixes the witness",
        exotic_isometry(np.eye(2), mu).approx_equal(mu),
    )
    ctx.check_raises(
        "non-orthogonal", "non-orthogonal maps are rejected", ConstructionError,
        lambda: exotic_isometry(np.array([[2.0, 0.0], [0.0, 1.0]]), mu),
    )

    def shift_and_flip(point: Pair) -> Pair:
        h = point.left.as_array() + np.array([1.0, -2.0])
        return Pair(Vector(h), Index(2 - point.right.i))

    base_isometry = IsometryCandidate.push_forward("shift-and-flip", shift_and_flip)
    for p in (1.0, 2.0, 3.0):
        ctx.check_at_most(
            f"push-forward.p={p:g}", "push-forward of a base isometry keeps W_p",
            verify_isometry(base_isometry, space, pairs[:30], p), 1e-9,
        )
    ctx.note(
        "distortion.p=4", "distortion of the rotation for W4 (not an isometry claim)",
        verify_isometry(candidate, space, pairs[:30], 4.0),
    )


@suite("frechet")
def frechet_suite(ctx: SuiteContext) -> None:
    """Frechet functions split on products; barycenters are the Euclidean minimizers."""
    plane = Euclidean(2)
    space = QProduct(plane, _three_point_space(), 2.0)

    worst = 0.0
    for _ in range(50):
        mu = _random_product_measure(ctx.rng, space, 5)
        point = Pair(Vector(ctx.rng.normal(size=2)), Index(int(ctx.rng.integers(3))))
        mu_h, mu_y = marginals(mu)
        total = frechet_function(space, mu, point)
        split = frechet_function(plane, mu_h, point.left) + frechet_function(space.right, mu_y, point.right)
        worst = max(worst, abs(total - split) / max(1.0, abs(total)))
    ctx.check_at_most("additivity", "F_mu(h, y) = F_muH(h) + F_muY(y) on 50 random product measures", worst, 1e-12)

    mu = _random_product_measure(ctx.rng, space, 4)
    center = barycenter(marginals(mu)[0])
    offsets = [k * 0.01 for k in range(-3, 4)]
    grid = [
        Pair(Vector(np.asarray(center.coords) + np.array([a, b])), Index(i))
        for a in offsets for b in offsets for i in range(3)
    ]
    minimizers = frechet_mean_set(space, mu, grid)
    ctx.check(
        "product-slice", "grid minimizers share the barycenter's Euclidean coordinate",
        bool(minimizers) and all(point.left == center for point in minimizers),
    )

    nu = _random_euclidean_measure(ctx.rng, plane, 6)
    g = barycenter(nu)
    best = frechet_function(plane, nu, g)
    lowest = min(
        frechet_function(plane, nu, Vector(np.asarray(g.coords) + 0.01 * np.array([i, j])))
        for i in range(-5, 6) for j in range(-5, 6)
    )
    ctx.check_at_most("barycenter-minimizes", "no 0.01-grid point beats the barycenter", best - lowest, 1e-12)

    witness = AtomicMeasure(plane, (Vector((0.0, 0.0)), Vector((1.0, 0.0))), (1.0 / 3.0, 2.0 / 3.0))
    b = barycenter(witness)
    ctx.check_close("barycenter.witness.x", "barycenter of 1/3 delta_0 + 2/3 delta_v", b.coords[0], 2.0 / 3.0, 1e-12)
    ctx.check_close("barycenter.witness.y", "barycenter of 1/3 delta_0 + 2/3 delta_v", b.coords[1], 0.0, 1e-12)
    square = AtomicMeasure(
        plane, tuple(Vector(c) for c in ((0, 0), (2, 0), (0, 2), (2, 2))), (0.25,) * 4,
    )
    ctx.check("barycenter.square", "uniform square corners have barycenter (1, 1)", barycenter(square) == Vector((1.0, 1.0)))

    x, y = Vector((0.3, -1.0)), Vector((2.0, 1.5))
    ctx.check_close(
        "dirac-function", "F_{delta_y}(x) = d(x, y)^2",
        frechet_function(plane, dirac(plane, y), x), plane.distance(x, y) ** 2, 1e-12,
    )
    pair_space = FiniteSpace.from_coordinates([0.0, 1.0])
    uniform = AtomicMeasure(pair_space, (Index(0), Index(1)), (0.5, 0.5))
    ctx.check(
        "two-point", "both points of a uniform two-point space are Frechet means",
        frechet_mean_set(pair_space, uniform, [Index(0), Index(1)]) == [Index(0), Index(1)],
    )


@suite("cylinder-branching")
def cylinder_branching_suite(ctx: SuiteContext) -> None:
    """The set of measures over a fixed base measure is not geodesic."""
    base = Interval(0.0, 1.0)
    cylinder = QProduct(base, Ray(), 2.0)
    mu = AtomicMeasure(base, (Scalar(0.0), Scalar(1.0)), (0.5, 0.5))
    started = time.perf_counter()
    report = cylinder_branching_experiment(cylinder, mu, 2.0)
    elapsed = time.perf_counter() - started
    ctx.check_close("crossing-cost", "optimal cost between nu0 and nu1", report.crossing_cost, 1.0, 1e-12)
    ctx.check_close("vertical-cost", "cost of the vertical coupling", report.vertical_cost, 4.0, 1e-12)
    ctx.check("crossing-wins", "the optimal plan crosses the base", report.crossing_cost < report.vertical_cost)
    ctx.check("endpoints", "nu0 and nu1 both lie over mu", report.endpoints_in_fiber)
    ctx.check("midpoint", "the displacement midpoint is a verified midpoint", report.midpoint_verified)
    ctx.check_close("total-variation", "TV between the midpoint's base and mu", report.total_variation, 1.0, 1e-12)
    ctx.check("leaves", "the geodesic leaves the set over mu", report.leaves_fiber)
    ctx.check("plan-monotone", "the optimal plan is cyclically monotone", report.plan_monotone)
    ctx.check("runtime", "the experiment finishes within one second", elapsed < 1.0)
    ctx.check_raises(
        "dirac", "Dirac base measures are rejected", ConstructionError,
        lambda: cylinder_branching_experiment(cylinder, dirac(base, Scalar(0.5))),
    )

    x, y = Scalar(0.2), Scalar(0.7)
    lifted = dirac(cylinder, Pair(x, Scalar(5.0)))
    ctx.check("membership.same-base", "delta_(x,5) lies over delta_x", cylinder_I_membership(lifted, dirac(base, x)))
    ctx.check("membership.other-base", "delta_(x,5) does not lie over delta_y", not cylinder_I_membership(lifted, dirac(base, y)))

    worst = math.inf
    for _ in range(10):
        size = int(ctx.rng.integers(1, 5))
        atoms = [
            (Pair(Scalar(u), Scalar(r)), w)
            for u, r, w in zip(ctx.rng.uniform(0.0, 1.0, size), ctx.rng.uniform(0.0, 3.0, size), _random_weights(ctx.rng, size))
        ]
        nu = AtomicMeasure.from_atoms(cylinder, atoms)
        fiber = []
        for _ in range(8):
            k = int(ctx.rng.integers(1, 4))
            on_base = AtomicMeasure(base, tuple(Scalar(u) for u in ctx.rng.uniform(0.0, 1.0, k)), _random_weights(ctx.rng, k))
            fiber.append(lift_to_level(cylinder, on_base, 0.0))
        worst = min(worst, fiber_argmin_gap(cylinder, nu, 0.0, fiber, 2.0))
    ctx.check_at_least("argmin", "no fiber measure is closer than the projection", worst, -1e-10)


SUSPENSION_ANGLES = tuple(k * math.pi / 8 for k in range(9))


@suite("suspension-midpoints")
def suspension_midpoints_suite(ctx: SuiteContext) -> None:
    """Midpoints between equator measures and pole mixtures."""
    space = Suspension(FiniteSpace.from_coordinates([0.0, 0.4]))
    x, y = Index(0), Index(1)
    nu = AtomicMeasure(space, (SuspPoint(x, math.pi / 2), SuspPoint(y, math.pi / 2)), (0.5, 0.5))
    poles = pole_mixture(space, 0.5)
    m1, m2 = suspension_two_midpoints(space, nu, 0.5)
    expected_m1 = AtomicMeasure(space, (SuspPoint(x, math.pi / 4), SuspPoint(y, 3 * math.pi / 4)), (0.5, 0.5))
    ctx.check("canonical.m1-shape", "m1 scales E down and F up", m1.approx_equal(expected_m1))
    ctx.check("canonical.m1", "m1 is a verified midpoint", verify_midpoint(nu, poles, m1))
    ctx.check("canonical.m2", "m2 is a verified midpoint", verify_midpoint(nu, poles, m2))
    gap, _ = solve_wp(space, m1, m2)
    ctx.check("canonical.distinct", "m1 and m2 differ", not m1.approx_equal(m2))
    ctx.check_at_least("canonical.separation", "W_p(m1, m2) exceeds 1e-3", gap, 1e-3)

    unique = None
    try:
        suspension_two_midpoints(space, dirac(space, SuspPoint(x, math.pi / 2)))
    except UniqueMidpointError as e:
        unique = e.midpoint
    ctx.check("dirac.raises", "Dirac equator measures report a unique midpoint", unique is not None)
    if unique is not None:
        expected = AtomicMeasure(space, (SuspPoint(x, math.pi / 4), SuspPoint(x, 3 * math.pi / 4)), (0.5, 0.5))
        ctx.check("dirac.shape", "the unique midpoint is 1/2 [x, pi/4] + 1/2 [x, 3pi/4]", unique.approx_equal(expected))
        candidates = atomic_candidates(space, space.grid(SUSPENSION_ANGLES), 2)
        equator = dirac(space, SuspPoint(x, math.pi / 2))
        verified = scan_intermediate_candidates(equator, poles, _progress(candidates, "midpoint candidates"), 0.5)
        ctx.check(
            "dirac.unique", "the constructed midpoint is the only verified grid candidate",
            len(verified) == 1 and verified[0].approx_equal(unique),
        )

    never = lambda point: False  # noqa: E731
    low, high = suspension_two_midpoints(space, nu, split=never)
    ctx.check("degenerate.single-sided", "lambda = 0 gives one scaled midpoint", low == high)
    ctx.check("degenerate.verified", "the scaled measure is a midpoint toward delta_0", verify_midpoint(nu, dirac(space, POLE_ZERO), low))

    fiber = []
    for _ in range(10):
        k = int(ctx.rng.integers(1, 3))
        chosen = ctx.rng.permutation(2)[:k]
        fiber.append(AtomicMeasure(space, tuple(SuspPoint(Index(int(i)), math.pi / 3) for i in chosen), _random_weights(ctx.rng, k)))
    predicted, distances = pole_fiber_distances(space, 0.3, math.pi / 3, fiber, 2.0)
    ctx.check_at_most(
        "pole-fiber", "pole mixtures are equidistant from a fiber",
        max(abs(d - predicted) for d in distances), 1e-9,
    )

    mixtures = [pole_mixture(space, lam) for lam in (0.0, 0.25, 0.5, 0.75, 1.0)]
    others = [m1, dirac(space, SuspPoint(x, math.pi / 3)), nu]
    farthest = equator_pole_argmax(space, nu, mixtures + others)
    ctx.check(
        "equator-argmax", "the measures farthest from an equator measure are the pole mixtures",
        len(farthest) == len(mixtures) and all(all(point.is_pole for point in m.points) for m in farthest),
    )


@suite("conditions")
def conditions_suite(ctx: SuiteContext) -> None:
    """Base-point conditions used by the rigidity arguments on finite spaces."""
    path = FiniteSpace.from_coordinates([0.0, 0.5, 1.0])
    ctx.check("a.path.single", "path {0, 0.5, 1}, targets {0} -> 0.5", condition_a_check(path, [Index(0)]) == Index(1))
    ctx.check("a.path.ends", "path {0, 0.5, 1}, targets {0, 1} -> 0.5", condition_a_check(path, [Index(0), Index(2)]) == Index(1))
    ctx.check("a.cycle", "4-cycle, target 0 -> the neighbour 1", condition_a_check(FiniteSpace.cycle(4), [Index(0)]) == Index(1))
    ctx.check("a.none", "no geodesic extends in a two-point space", condition_a_check(FiniteSpace.from_coordinates([0.0, 1.0]), [Index(0)]) is None)

    pair = FiniteSpace.from_coordinates([0.0, 0.3])
    ctx.check("b.found", "d = 0.3, t in {0.5, 1} -> x_o = 0", condition_b_check(pair, [Index(0), Index(1)], [0.5, 1.0]) == Index(0))
    ctx.check_raises(
        "b.equator", "the equator angle is rejected", SpaceError,
        lambda: condition_b_check(pair, [Index(0)], [math.pi / 2]),
    )

    space = Suspension(pair)
    mu_a = AtomicMeasure(space, (SuspPoint(Index(0), 0.5), SuspPoint(Index(1), 0.5)), (0.3, 0.7))
    mu_b = AtomicMeasure(space, (SuspPoint(Index(0), 0.5), SuspPoint(Index(1), 0.5)), (0.7, 0.3))
    report = condition_b_separation(space, mu_a, mu_b)
    ctx.check("separation.distinct", "projections tell the two fiber measures apart", report.separated)
    ctx.check("separation.same", "a measure is not separated from itself", not condition_b_separation(space, mu_a, mu_a).separated)


@suite("suspension-diameter")
def suspension_diameter_suite(ctx: SuiteContext) -> None:
    """Only the two pole Diracs are at distance pi."""
    space = Suspension(FiniteSpace.from_coordinates(np.linspace(0.0, 1.2, 20)))
    for p in (1.0, 2.0):
        wp, _ = solve_wp(space, dirac(space, POLE_ZERO), dirac(space, POLE_PI), p)
        ctx.check(f"poles.p={p:g}", "W_p(delta_0, delta_pi) == pi exactly", wp == math.pi)
    grid = space.grid(SUSPENSION_ANGLES)
    distances = space.pairwise(grid, grid)
    far = [
        (grid[i], grid[j]) for i, j in zip(*np.nonzero(distances >= math.pi - 1e-9)) if i < j
    ]
    ctx.check(
        "grid-scan", "the pole pair is the only grid pair at distance pi",
        len(far) == 1 and {far[0][0], far[0][1]} == {POLE_ZERO, POLE_PI},
    )
    ctx.note("grid-size", "points in the scanned grid", float(len(grid)))

    largest = 0.0
    for _ in range(20):
        measures = []
        for _ in range(2):
            k = int(ctx.rng.integers(1, 4))
            chosen = ctx.rng.choice(len(grid), size=k, replace=False)
            measures.append(AtomicMeasure(space, tuple(grid[int(i)] for i in chosen), _random_weights(ctx.rng, k)))
        if measures[0].points == (POLE_ZERO,) and measures[1].points == (POLE_PI,):
            continue
        wp, _ = solve_wp(space, measures[0], measures[1], 2.0)
        largest = max(largest, wp)
    ctx.check_at_most("random-pairs", "random grid measures stay below pi", largest, math.pi - 1e-9)


def _crossed_plan() -> TransportPlan:
    mu = AtomicMeasure(RAY, (Scalar(0.0), Scalar(1.0)), (0.5, 0.5))
    return TransportPlan.from_entries(mu, mu, [(0, 1, 0.5), (1, 0, 0.5)], 2.0)


@suite("cyclical-monotonicity")
def cyclical_monotonicity_suite(ctx: SuiteContext) -> None:
    """Optimal plans pass the short-cycle check; a crossed plan fails it."""
    report = is_cyclically_monotone(_crossed_plan())
    ctx.check("crossed.fails", "the crossed plan on the ray is not monotone", not report.monotone)
    ctx.check("crossed.cycle", "the violating cycle swaps the two entries", sorted(report.cycle) == [0, 1])
    ctx.check_close("crossed.gain", "swapping saves cost 2", report.gain, -2.0, 1e-12)

    plane = Euclidean(2)
    product = QProduct(plane, _three_point_space(), 2.0)
    families = {
        "ray": lambda: (_random_ray_measure(ctx.rng, 8), _random_ray_measure(ctx.rng, 8)),
        "euclidean": lambda: (_random_euclidean_measure(ctx.rng, plane, 8), _random_euclidean_measure(ctx.rng, plane, 8)),
        "product": lambda: (_random_product_measure(ctx.rng, product, 6), _random_product_measure(ctx.rng, product, 6)),
    }
    for family, draw in families.items():
        monotone = True
        for k in _progress(range(20), f"{family} plans"):
            mu, nu = draw()
            _, plan = solve_wp(mu.space, mu, nu, ORACLE_EXPONENTS[k % len(ORACLE_EXPONENTS)])
            monotone = monotone and bool(is_cyclically_monotone(plan))
        ctx.check(f"optimal.{family}", f"20 optimal {family} plans pass the 5-cycle check", monotone)

    comonotone = True
    for _ in range(20):
        mu, nu = _random_ray_measure(ctx.rng, 8), _random_ray_measure(ctx.rng, 8)
        comonotone = comonotone and bool(is_cyclically_monotone(monotone_plan(mu, nu, 1.5)))
    ctx.check("comonotone", "comonotone ray plans pass the 5-cycle check", comonotone)
    ctx.check_raises(
        "cycle-limit", "cycle lengths above the limit are refused", TransportError,
        lambda: is_cyclically_monotone(_crossed_plan(), settings.max_cycle_limit + 1),
    )


MERIDIAN_STEP = 1e-4


@suite("meridian-projection")
def meridian_projection_suite(ctx: SuiteContext) -> None:
    """The closed-form meridian projection against a dense angle grid."""
    angles = np.arange(0.0, math.pi / 2, MERIDIAN_STEP)
    angles = np.append(angles, math.pi / 2)
    meridian = [SuspPoint(Index(1), s) for s in angles]
    worst = 0.0
    for _ in _progress(range(100), "projections"):
        d = float(ctx.rng.uniform(0.05, math.pi / 2 - 0.05))
        t = float(ctx.rng.uniform(0.05, math.pi / 2))
        space = Suspension(FiniteSpace.from_coordinates([0.0, d]))
        point = SuspPoint(Index(0), t)
        closed = meridian_projection(space, Index(1), point).angle
        searched = angles[int(np.argmin(space.pairwise([point], meridian)[0]))]
        worst = max(worst, abs(closed - searched))
    ctx.check_at_most("grid-argmin", "closed form vs 1e-4 grid argmin over 100 (d, t) pairs", worst, 2e-4)

    space = Suspension(FiniteSpace.from_coordinates([0.0, 0.4]))
    t = 0.6
    x, y = Index(0), Index(1)
    on_meridian = dirac(space, SuspPoint(y, t))
    ctx.check(
        "pushforward.on-meridian", "a Dirac on the meridian is fixed",
        meridian_projection_pushforward(space, on_meridian, y).approx_equal(on_meridian),
    )
    mu = AtomicMeasure(space, (SuspPoint(x, t), SuspPoint(y, t)), (0.5, 0.5))
    expected = AtomicMeasure(space, (SuspPoint(y, math.atan(math.cos(0.4) * math.tan(t))), SuspPoint(y, t)), (0.5, 0.5))
    ctx.check("pushforward.two-atoms", "closed-form image of a two-atom fiber measure", meridian_projection_pushforward(space, mu, y).approx_equal(expected))
    ctx.check("atom-preserved", "the mass at the meridian point is kept", projection_preserves_atom(space, mu, y))
    ctx.check_raises(
        "upper-half", "fibers at or above pi/2 are refused", ConstructionError,
        lambda: meridian_projection_pushforward(space, dirac(space, SuspPoint(x, math.pi / 2)), y),
    )


@suite("sigma-claim")
def sigma_claim_suite(ctx: SuiteContext) -> None:
    """Unbounded midpoint-set growth for W1 on the ray, and the adjacency diameters."""
    half = AtomicMeasure(RAY, (Scalar(0.0), Scalar(1.0)), (0.5, 0.5))
    for label, eta, n in (("half", half, 2), ("half", half, 3), ("dirac", dirac(RAY, Scalar(1.0)), 2)):
        witness = sigma_w1_claim_witness(eta, n)
        prefix = f"claim.{label}.n={n}"
        ctx.check_close(f"{prefix}.growth", "W1(delta_0, mu_n) = lam x n", witness.growth, witness.expected_growth, 1e-9)
        ctx.check(f"{prefix}.adjacent", "delta_0 and mu_n are adjacent", witness.adjacent)
        ctx.check(f"{prefix}.intermediate", "eta is a 1/n-intermediate point", witness.intermediate)
        ctx.check_close(f"{prefix}.eta-distance", "W1(eta, eta') = 2 lam x (1 - 1/n)", witness.eta_distance, witness.predicted_distance, 1e-9)
        ctx.check_close(f"{prefix}.diameter", "W1(eta, eta') realizes the family diameter", witness.diameter_bound, witness.eta_distance, 1e-8)
    ctx.check_raises(
        "claim.outside", "measures outside the family are rejected", ConstructionError,
        lambda: sigma_w1_claim_witness(AtomicMeasure(RAY, (Scalar(1.0), Scalar(2.0)), (0.5, 0.5)), 2),
    )

    line = Interval(-10.0, 10.0)

    def on_line(points: Sequence[float], weights: Sequence[float]) -> AtomicMeasure:
        return AtomicMeasure(line, tuple(Scalar(v) for v in points), tuple(weights))

    first, second = on_line([0.0], [1.0]), on_line([1.0], [1.0])
    ctx.check_close("diameter.diracs", "delta_0 and delta_1 give W1/2", midpoint_diameter_1d(first, second), 0.5, 1e-8)

    first, second = on_line([0.0, 1.0], [0.5, 0.5]), on_line([0.0, 2.0], [0.5, 0.5])
    ctx.check("adjacent.shared-atom", "1/2 delta_0 + 1/2 delta_1 and 1/2 delta_0 + 1/2 delta_2 are adjacent", adjacency_test(first, second))
    ctx.check_close(
        "diameter.adjacent", "adjacent measures give W1/2",
        midpoint_diameter_1d(first, second), wp_1d(first, second, 1.0) / 2, 1e-8,
    )

    first, second = on_line([0.0, 1.0], [0.5, 0.5]), on_line([2.0, 5.0], [0.5, 0.5])
    w1 = wp_1d(first, second, 1.0)
    ctx.check("adjacent.disjoint", "1/2 delta_0 + 1/2 delta_1 and 1/2 delta_2 + 1/2 delta_5 are not adjacent", not adjacency_test(first, second))
    left, right = on_line([2.0], [1.0]), on_line([0.0, 1.0, 5.0], [0.5, 0.125, 0.375])
    ctx.check(
        "witnesses", "delta_2 and 1/2 delta_0 + 1/8 delta_1 + 3/8 delta_5 are both midpoints",
        verify_midpoint(first, second, left, 1.0) and verify_midpoint(first, second, right, 1.0),
    )
    ctx.check_close("witnesses.distance", "the two midpoints are 9/4 apart", wp_1d(left, right, 1.0), 2.25, 1e-12)
    bound = midpoint_diameter_1d(first, second)
    ctx.check("diameter.non-adjacent", "non-adjacent measures exceed W1/2", bound > w1 / 2 + 1e-9)
    ctx.note("diameter.non-adjacent.value", "family diameter for the non-adjacent pair", bound)

    ctx.check(
        "mixture-midpoint", "1/2 delta_0 + 1/2 delta_1 is a W1 midpoint of delta_0 and delta_1",
        verify_midpoint(on_line([0.0], [1.0]), on_line([1.0], [1.0]), mixture([(on_line([0.0], [1.0]), 0.5), (on_line([1.0], [1.0]), 0.5)]), 1.0),
    )
