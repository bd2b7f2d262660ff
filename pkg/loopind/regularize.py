"""Regularized self-inductance of a single loop.

Two engines compute the same number: the Hadamard finite part of the
strip-excluded double integral, and the value at z = -1 of the analytic
continuation of the z-energy with its pole removed.  The local chord-ball
expansion (phi) gives the residues, and the parallel-curve limit gives a
third, independent route to the Neumann value.
"""
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from loopind.curve import ParametricLoop, curvature_sq_integral, offset_curve
from loopind.errors import (
    ConfigError,
    DomainError,
    ExpansionRangeError,
    ExtrapolationError,
    FitError,
    LocalityError,
    UnsupportedCurveError,
)
from loopind.inductance import (
    FormKernel,
    InductanceForm,
    UnitSystem,
    check_counter_term,
    default_eps_schedule,
    mutual_inductance,
    validate_schedule,
)
from loopind.models import RegularizationResult, ResidueEstimate, ScheduleSample, ZEnergySample
from loopind.quadrature import (
    QuadratureSpec,
    fit_series,
    gauss_legendre,
    integrate_pair_weakly_singular,
    strip_sweep,
)

logger = logging.getLogger(__name__)

METHODS = ('hadamard', 'continuation', 'parallel-limit')

# eps**2 coefficient of the strip integral, per unit of the curvature integral
SECOND_ORDER_COEFFICIENT = {
    InductanceForm.NEUMANN: 11.0 / 24.0,
    InductanceForm.WEBER: 5.0 / 24.0,
}
# t**2 coefficient of phi per kappa**2
PHI_CURVATURE_COEFFICIENT = {
    InductanceForm.NEUMANN: -0.75,
    InductanceForm.WEBER: -0.25,
}

PHI_SAMPLES = 8
PHI_BASE_POINTS = 32
PHI_STEP = 1e-3
PHI_RESIDUAL_TOL = 1e-5
_LOCALITY_SAMPLES = 2048


def default_z_schedule(count: int = 6) -> List[float]:
    return [-1.0 + 2.0**-k for k in range(1, count + 1)]


def default_delta_schedule(loop: ParametricLoop, count: int = 6) -> List[float]:
    kappa = loop.max_curvature
    if kappa <= 0:
        raise UnsupportedCurveError('parallel curves need non-vanishing curvature')
    return [2.0**-k / (25.0 * kappa) for k in range(count)]


def _fit_powers(loop: ParametricLoop) -> Tuple[int, ...]:
    # one-sided strips at the ends of an open curve add odd powers of eps
    return (2, 4) if loop.closed else (1, 2, 3)


def second_order_prediction(
    loop: ParametricLoop, form: InductanceForm, units: UnitSystem = UnitSystem.REDUCED
) -> float:
    """Predicted eps**2 coefficient of the strip integral of a closed loop"""
    return units.mu0_over_4pi * SECOND_ORDER_COEFFICIENT[form] * curvature_sq_integral(loop)


def hadamard_sweep(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    eps_schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    accelerate: bool = False,
) -> List[ScheduleSample]:
    """Raw strip integrals with their counter terms for every eps.

    With ``accelerate`` the counter term also removes the predicted eps**2
    term, so each partial sum is already a fourth-order estimate.
    """
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    if eps_schedule is None:
        eps_schedule = default_eps_schedule(loop)
    eps = np.asarray(eps_schedule, dtype=float)
    if accelerate and not loop.closed:
        raise UnsupportedCurveError('accelerated counter terms are defined for closed loops')
    raw = units.mu0_over_4pi * strip_sweep(loop, FormKernel(form), eps, spec)
    counter = units.log_coefficient(loop.length) * np.log(1.0 / eps)
    if accelerate:
        counter = counter + second_order_prediction(loop, form, units) * eps**2
    for e, value in zip(eps, raw):
        logger.debug('eps=%.6g raw=%.15g', e, value)
    return [
        ScheduleSample(float(e), float(i), float(c), float(i - c))
        for e, i, c in zip(eps, raw, counter)
    ]


def accelerated_partial_sum(
    loop: ParametricLoop,
    eps: float,
    form: InductanceForm = InductanceForm.NEUMANN,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
) -> float:
    """Single-eps estimate with log and eps**2 counter terms removed"""
    return hadamard_sweep(loop, form, [eps], spec, units, accelerate=True)[0].partial_sum


def hadamard_self(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    eps_schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    counter_term_tol: float = 0.01,
) -> RegularizationResult:
    """Hadamard finite part of the self double integral.

    The partial sums ``I(eps) - (mu0 L / 2pi) log(1/eps)`` are fitted to
    ``c0 + sum c_p eps**p``; ``c0`` is the regularized self-inductance.  A
    second fit with the log coefficient free checks the counter term.
    """
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    length = loop.length
    if eps_schedule is None:
        eps_schedule = default_eps_schedule(loop)
    eps = validate_schedule(eps_schedule)
    if np.any(eps <= 0):
        raise DomainError('exclusion widths must be positive')
    if eps.max() >= 0.1 * length:
        raise DomainError(f'exclusion widths must stay below L/10 = {0.1 * length:.6g}')
    kappa = loop.max_curvature
    if kappa > 0 and eps.max() > 0.5 / kappa:
        logger.warning('eps schedule reaches %.3g, past half the radius of curvature', eps.max())

    samples = hadamard_sweep(loop, form, eps, spec, units)
    raw = np.array([s.raw for s in samples])
    partial = np.array([s.partial_sum for s in samples])
    weights = 1.0 / eps
    powers = _fit_powers(loop)
    c_log = units.log_coefficient(length)

    columns: Dict[str, np.ndarray] = {'c0': np.ones_like(eps)}
    columns.update({f'c{p}': eps**p for p in powers})
    pinned = fit_series(columns, partial, weights)
    reduced = fit_series(dict(list(columns.items())[:-1]), partial, weights)

    free_columns = {'c0': columns['c0'], 'c_log': np.log(1.0 / eps)}
    free_columns.update({f'c{p}': eps**p for p in (powers if loop.closed else powers[:2])})
    free = fit_series(free_columns, raw, weights)
    check_counter_term(free['c_log'], c_log, counter_term_tol, 'log(1/eps) coefficient')

    predicted = {'c_log': c_log}
    if loop.closed:
        predicted['c2'] = second_order_prediction(loop, form, units)
    logger.debug('hadamard %s fit: %s', form.value, pinned)
    result = RegularizationResult(
        value=pinned['c0'],
        method='hadamard',
        form=form.value,
        units=units.value,
        schedule=samples,
        fit_coefficients=dict(pinned, c_log=c_log),
        free_fit_coefficients=free,
        predicted=predicted,
        error_estimate=abs(pinned['c0'] - reduced['c0']),
    )
    logger.info('hadamard %s self-inductance: %.12g', form.value, result.value)
    return result


def z_energy(
    loop: ParametricLoop,
    z: float,
    form: InductanceForm = InductanceForm.NEUMANN,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
) -> ZEnergySample:
    """(mu0/4pi) times the double integral of the form's numerator times r**z"""
    if z <= -1:
        raise DomainError(f'z-energy needs z > -1, got {z}')
    if not loop.closed:
        raise UnsupportedCurveError('z-energy is defined for closed loops')
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    energy = integrate_pair_weakly_singular(loop, FormKernel(form, -float(z)), float(z), spec)
    return ZEnergySample(float(z), units.mu0_over_4pi * energy)


def continuation_self(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    z_schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    degree: int = 3,
    extrapolation_tol: float = 0.01,
    counter_term_tol: float = 0.01,
) -> RegularizationResult:
    """Value at z = -1 of the z-energy with its simple pole removed.

    ``g(w) = F(-1 + w) - (mu0 L / 2pi) / w`` is analytic near ``w = 0``; it is
    extrapolated by a weighted polynomial fit in ``w``.
    """
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    z = validate_schedule(z_schedule if z_schedule is not None else default_z_schedule(), 'z')
    if np.any(z <= -1) or np.any(z > -0.5):
        raise DomainError('z schedule must lie in (-1, -0.5]')
    if degree < 1:
        raise FitError('continuation fit degree must be at least 1')
    w = z + 1.0
    c_log = units.log_coefficient(loop.length)
    energies = np.array([z_energy(loop, float(v), form, spec, units).value for v in z])
    pole = c_log / w
    regular = energies - pole
    weights = 1.0 / w

    columns = {f'c{k}': w**k for k in range(degree + 1)}
    fit = fit_series(columns, regular, weights)
    lower = fit_series(dict(list(columns.items())[:-1]), regular, weights)
    value = fit['c0']
    error = abs(value - lower['c0'])
    if error > extrapolation_tol * max(1.0, abs(value)):
        raise ExtrapolationError(
            f'extrapolation to z=-1 is unstable: degree {degree} and {degree - 1} '
            f'intercepts differ by {error:.3e}'
        )

    free_columns = {'c0': np.ones_like(w), 'c_res': 1.0 / w}
    free_columns.update({f'c{k}': w**k for k in range(1, degree)})
    free = fit_series(free_columns, energies, weights)
    check_counter_term(free['c_res'], c_log, counter_term_tol, 'residue at z=-1')

    logger.info('continuation %s self-inductance: %.12g', form.value, value)
    return RegularizationResult(
        value=value,
        method='continuation',
        form=form.value,
        units=units.value,
        schedule=[
            ScheduleSample(float(v), float(f), float(p), float(g))
            for v, f, p, g in zip(z, energies, pole, regular)
        ],
        fit_coefficients=dict(fit, c_res=c_log),
        free_fit_coefficients=free,
        predicted={'c_res': c_log},
        error_estimate=error,
    )


def _numerator(
    form: InductanceForm, diff: np.ndarray, t1: np.ndarray, t2: np.ndarray
) -> np.ndarray:
    return FormKernel(form, 0.0)(diff, t1, t2)


def _crossing(
    loop: ParametricLoop, s1: float, point: np.ndarray, t: float, direction: float
) -> float:
    """Arc distance from s1 at which the chord from ``point`` first reaches t"""
    kappa = loop.max_curvature
    seed = t * (1.0 + kappa**2 * t**2 / 24.0)
    hi = 2.0 * seed
    limit = 0.5 * loop.length if loop.closed else (loop.length - s1 if direction > 0 else s1)
    if hi > limit:
        hi = limit
    lo = t * (1.0 - 1e-9)
    if lo >= hi:
        raise LocalityError(f'chord ball of radius {t:.6g} leaves the curve')

    def gap(sigma: float) -> float:
        p, _ = loop.sample_arclength(np.array([s1 + direction * sigma]), polish=True)
        return float(np.linalg.norm(p[0] - point)) - t

    if gap(hi) <= 0:
        raise LocalityError(f'chord ball of radius {t:.6g} at s={s1:.6g} does not close')
    return optimize.bisect(gap, lo, hi, xtol=1e-15 * max(t, 1e-300))


def _check_locality(
    loop: ParametricLoop, s1: float, point: np.ndarray, t: float, reach: float
) -> None:
    s = np.linspace(0.0, loop.length, _LOCALITY_SAMPLES, endpoint=not loop.closed)
    distance = np.abs(s - s1)
    if loop.closed:
        distance = np.minimum(distance, loop.length - distance)
    far = distance > 1.5 * reach
    if not np.any(far):
        return
    p, _ = loop.sample_arclength(s[far])
    if np.linalg.norm(p - point, axis=-1).min() <= t:
        raise LocalityError(f'chord ball of radius {t:.6g} at s={s1:.6g} captures a distant strand')


def phi_local(
    loop: ParametricLoop,
    s1: float,
    t: float,
    form: InductanceForm = InductanceForm.NEUMANN,
    step: float = PHI_STEP,
) -> float:
    """Derivative in t of the chord-ball tangent correlation at base point s1.

    ``psi(t)`` integrates the form's numerator over the arc inside the ball
    of radius t around ``gamma(s1)``; the centered difference of psi is the
    integral over the two shells between radii ``t - h`` and ``t + h``.
    """
    if t <= 0:
        raise DomainError('chord radius must be positive')
    form = InductanceForm.parse(form)
    point, tangent = loop.sample_arclength(np.array([s1]), polish=True)
    point, tangent = point[0], tangent[0]
    h = step * t
    x, w = gauss_legendre(16)
    total = 0.0
    reach = 0.0
    for direction in (1.0, -1.0):
        inner = _crossing(loop, s1, point, t - h, direction)
        outer = _crossing(loop, s1, point, t + h, direction)
        reach = max(reach, outer)
        half = 0.5 * (outer - inner)
        sigma = inner + half * (x + 1.0)
        p2, t2 = loop.sample_arclength(s1 + direction * sigma, polish=True)
        values = _numerator(form, point - p2, np.broadcast_to(tangent, t2.shape), t2)
        total += half * float(w @ values)
    _check_locality(loop, s1, point, t + h, reach)
    return total / (2.0 * h)


def residue_estimates(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    fit_range: Optional[Tuple[float, float]] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    base_points: int = PHI_BASE_POINTS,
    samples: int = PHI_SAMPLES,
    residual_tol: float = PHI_RESIDUAL_TOL,
) -> ResidueEstimate:
    """Residues of the z-energy at z = -1 and z = -3 from the local phi expansion

    Base points are uniform in arclength; the periodic trapezoid over them needs
    a spacing well below the smallest curvature radius.
    """
    if not loop.closed:
        raise UnsupportedCurveError('residues are computed for closed loops')
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    rho = 1.0 / loop.max_curvature
    lo, hi = fit_range if fit_range is not None else (0.01 * rho, 0.1 * rho)
    if not 0 < lo < hi:
        raise DomainError('fit range must satisfy 0 < lo < hi')
    t = np.geomspace(lo, hi, samples)
    columns = {'a': np.ones_like(t), 'b': t**2, 'c3': t**3, 'c4': t**4}
    length = loop.length
    a_values, b_values = [], []
    for s1 in np.arange(base_points) * (length / base_points):
        phi = np.array([phi_local(loop, float(s1), float(r), form) for r in t])
        fit = fit_series(columns, phi, np.ones_like(t))
        model = sum(fit[name] * column for name, column in columns.items())
        residual = float(np.abs(phi - model).max())
        if residual > residual_tol:
            raise ExpansionRangeError(
                f'phi expansion residual {residual:.3e} at s={s1:.6g} exceeds {residual_tol:.1e}'
            )
        a_values.append(fit['a'])
        b_values.append(fit['b'])
    step = length / base_points
    scale = units.mu0_over_4pi
    estimate = ResidueEstimate(
        res1=scale * step * float(np.sum(a_values)),
        res3=scale * step * float(np.sum(b_values)),
        expected_res1=units.log_coefficient(length),
        expected_res3=scale * PHI_CURVATURE_COEFFICIENT[form] * curvature_sq_integral(loop),
        phi0_max_error=float(np.max(np.abs(np.asarray(a_values) - 2.0))),
        base_points=base_points,
    )
    logger.info('residues (%s): res1=%.10g res3=%.10g', form.value, estimate.res1, estimate.res3)
    return estimate


def parallel_limit(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    delta_schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    separation_samples: int = 2048,
) -> RegularizationResult:
    """Limit of M(loop, loop_delta) + (mu0 L / 2pi) log(delta) as delta -> 0.

    The limit equals the Hadamard value plus ``log(2) mu0 L / 2pi``; the
    implied Hadamard value is reported under ``predicted``.
    """
    if not loop.closed:
        raise UnsupportedCurveError('parallel curves are defined for closed loops')
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    raw_schedule = delta_schedule if delta_schedule is not None else default_delta_schedule(loop)
    if any(d <= 0 for d in raw_schedule):
        raise DomainError('offset distances must be positive')
    delta = validate_schedule(raw_schedule, 'delta')
    c_log = units.log_coefficient(loop.length)
    offsets = [offset_curve(loop, float(d)) for d in delta]
    mutual = np.array(
        [
            mutual_inductance(loop, other, form, units, spec, separation_samples)
            for other in offsets
        ]
    )
    counter = c_log * np.log(1.0 / delta)
    partial = mutual - counter
    weights = np.ones_like(delta)
    columns = {
        'c0': np.ones_like(delta),
        'c1': delta,
        'c_dlog': delta * np.log(delta),
        'c2': delta**2,
    }
    fit = fit_series(columns, partial, weights)
    lower = fit_series(dict(list(columns.items())[:-1]), partial, weights)
    value = fit['c0']
    logger.info('parallel limit (%s): %.12g', form.value, value)
    return RegularizationResult(
        value=value,
        method='parallel-limit',
        form=form.value,
        units=units.value,
        schedule=[
            ScheduleSample(float(d), float(m), float(c), float(p))
            for d, m, c, p in zip(delta, mutual, counter, partial)
        ],
        fit_coefficients=dict(fit, c_log=c_log),
        predicted={'implied_hadamard': value - math.log(2.0) * c_log},
        error_estimate=abs(value - lower['c0']),
    )


def form_offset(loop: ParametricLoop, units: UnitSystem = UnitSystem.REDUCED) -> float:
    """Exact Weber minus Neumann regularized self-inductance.

    ``(mu0 / 2pi)(L - |gamma(L) - gamma(0)|)``; the end-to-end distance
    vanishes for closed loops.
    """
    units = UnitSystem.parse(units)
    gap = 0.0
    if not loop.closed:
        ends, _ = loop.sample_arclength(np.array([0.0, loop.length]), polish=True)
        gap = float(np.linalg.norm(ends[1] - ends[0]))
    return units.mu0 * (loop.length - gap) / (2.0 * math.pi)


def homothety_prediction(
    value: float, length: float, factor: float, units: UnitSystem = UnitSystem.REDUCED
) -> float:
    """H(factor * loop) from H(loop) and the loop length"""
    if factor <= 0:
        raise DomainError('homothety factor must be positive')
    units = UnitSystem.parse(units)
    return factor * value + units.log_coefficient(length) * factor * math.log(factor)


def regularized_self_inductance(
    loop: ParametricLoop,
    method: str = 'hadamard',
    form: InductanceForm = InductanceForm.NEUMANN,
    schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
    **options: Any,
) -> RegularizationResult:
    """Dispatch to one of the regularization methods by name"""
    if method == 'hadamard':
        return hadamard_self(loop, form, schedule, spec, units, **options)
    if method == 'continuation':
        return continuation_self(loop, form, schedule, spec, units, **options)
    if method == 'parallel-limit':
        return parallel_limit(loop, form, schedule, spec, units, **options)
    raise ConfigError(
        f'unknown regularization method {method!r} (expected one of {", ".join(METHODS)})'
    )
