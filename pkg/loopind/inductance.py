"""Neumann and Weber inductance functionals.

All internal energies are bare double integrals; the permeability enters
only through ``UnitSystem.mu0_over_4pi`` when a result is reported as an
inductance.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence

import numpy as np

from loopind.curve import ParametricLoop, minimal_separation
from loopind.errors import (
    ConfigError,
    CounterTermMismatchError,
    FitError,
    ProximityError,
    UnsupportedCurveError,
)
from loopind.models import RegularizationResult, ScheduleSample
from loopind.quadrature import QuadratureSpec, fit_series, integrate_pair, strip_sweep

logger = logging.getLogger(__name__)

DEFAULT_SEPARATION_SAMPLES = 2048
SEPARATION_THRESHOLD = 1e-6
MIN_SCHEDULE_POINTS = 4


class InductanceForm(str, Enum):
    NEUMANN = 'neumann'
    WEBER = 'weber'

    @classmethod
    def parse(cls, value: Any) -> 'InductanceForm':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f'unknown inductance form {value!r} (expected neumann or weber)')


class UnitSystem(str, Enum):
    REDUCED = 'reduced'
    SI = 'si'

    @classmethod
    def parse(cls, value: Any) -> 'UnitSystem':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f'unknown unit system {value!r} (expected reduced or si)')

    @property
    def mu0_over_4pi(self) -> float:
        return 1.0 if self is UnitSystem.REDUCED else 1e-7

    @property
    def mu0(self) -> float:
        return 4.0 * math.pi * self.mu0_over_4pi

    def log_coefficient(self, length: float) -> float:
        """mu0 L / 2 pi, the residue and the log(1/eps) counter-term coefficient"""
        return self.mu0 * length / (2.0 * math.pi)


@dataclass(frozen=True)
class FormKernel:
    """Pair integrand ``numerator / r**alpha``.

    Neumann numerator is ``T1.T2``, Weber numerator ``(rhat.T1)(rhat.T2)``.
    Both are bilinear in the tangents, so raw parameter derivatives may be
    passed instead of unit tangents.
    """

    form: InductanceForm = InductanceForm.NEUMANN
    alpha: float = 1.0

    def __call__(self, diff: np.ndarray, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
        r2 = np.einsum('...i,...i->...', diff, diff)
        if self.form is InductanceForm.NEUMANN:
            numerator = np.einsum('...i,...i->...', t1, t2)
        else:
            numerator = (
                np.einsum('...i,...i->...', diff, t1) * np.einsum('...i,...i->...', diff, t2) / r2
            )
        if self.alpha == 0:
            return numerator
        return numerator * r2 ** (-0.5 * self.alpha)


def aligned_offset(loop_a: ParametricLoop, loop_b: ParametricLoop) -> Optional[float]:
    """Offset distance when one loop is the parallel curve of the other"""
    if loop_b.kind == 'offset' and loop_b.base is loop_a:
        return float(loop_b.params['delta'])
    if loop_a.kind == 'offset' and loop_a.base is loop_b:
        return float(loop_a.params['delta'])
    return None


def check_disjoint(
    loop_a: ParametricLoop, loop_b: ParametricLoop, samples: int = DEFAULT_SEPARATION_SAMPLES
) -> float:
    if loop_a is loop_b:
        raise ProximityError(
            'a loop is not disjoint from itself; use a regularized self-inductance'
        )
    threshold = SEPARATION_THRESHOLD * max(loop_a.length, loop_b.length)
    separation = minimal_separation(loop_a, loop_b, samples)
    if separation <= threshold:
        raise ProximityError(
            f'curves come within {separation:.3e} of each other (threshold {threshold:.3e})'
        )
    return separation


def _pair_energy(
    loop_a: ParametricLoop,
    loop_b: ParametricLoop,
    kernel: FormKernel,
    spec: Optional[QuadratureSpec],
    separation_samples: int,
) -> float:
    check_disjoint(loop_a, loop_b, separation_samples)
    offset = aligned_offset(loop_a, loop_b)
    if offset is not None:
        # the offset pair shares its parameter; integrate the near-diagonal band in u
        return integrate_pair(loop_a, loop_b, kernel, spec, aligned_scale=offset)
    return integrate_pair(loop_a, loop_b, kernel, spec)


def mutual_inductance(
    loop_a: ParametricLoop,
    loop_b: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    units: UnitSystem = UnitSystem.REDUCED,
    spec: Optional[QuadratureSpec] = None,
    separation_samples: int = DEFAULT_SEPARATION_SAMPLES,
) -> float:
    """(mu0/4pi) times the Neumann or Weber double integral of two disjoint loops"""
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    energy = _pair_energy(loop_a, loop_b, FormKernel(form), spec, separation_samples)
    value = units.mu0_over_4pi * energy
    logger.info('mutual inductance (%s, %s): %.12g', form.value, units.value, value)
    return value


def power_alpha_energy(
    loop_a: ParametricLoop,
    loop_b: ParametricLoop,
    alpha: float,
    form: InductanceForm = InductanceForm.NEUMANN,
    spec: Optional[QuadratureSpec] = None,
    separation_samples: int = DEFAULT_SEPARATION_SAMPLES,
) -> float:
    """Bare double integral of the form's numerator over r**alpha"""
    if not (loop_a.closed and loop_b.closed):
        raise UnsupportedCurveError('power-alpha energies are defined for closed loops')
    form = InductanceForm.parse(form)
    return _pair_energy(loop_a, loop_b, FormKernel(form, float(alpha)), spec, separation_samples)


def default_eps_schedule(loop: ParametricLoop, count: int = 6) -> List[float]:
    """eps_k = min(L, 2 pi / max kappa) 2**-k / 20"""
    scale = loop.length
    kappa = loop.max_curvature
    if kappa > 0:
        scale = min(scale, 2.0 * math.pi / kappa)
    return [scale * 2.0**-k / 20.0 for k in range(count)]


def check_counter_term(fitted: float, expected: float, tolerance: float, label: str) -> float:
    """Relative deviation of a free-fit divergent coefficient from theory"""
    deviation = abs(fitted - expected) / abs(expected)
    if deviation > tolerance:
        raise CounterTermMismatchError(
            f'{label}: fitted {fitted:.10g}, expected {expected:.10g} '
            f'(relative deviation {deviation:.3e} > {tolerance:.3e})'
        )
    if deviation > 0.5 * tolerance:
        logger.warning('%s deviates by %.3e from theory', label, deviation)
    return deviation


def validate_schedule(values: Sequence[float], name: str = 'eps') -> np.ndarray:
    schedule = np.asarray(values, dtype=float)
    if schedule.ndim != 1 or schedule.size < MIN_SCHEDULE_POINTS:
        raise FitError(
            f'{name} schedule needs at least {MIN_SCHEDULE_POINTS} points, got {schedule.size}'
        )
    steps = np.diff(schedule)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError(f'{name} schedule must be strictly monotone')
    return schedule


def power2_self_regularized(
    loop: ParametricLoop,
    form: InductanceForm = InductanceForm.NEUMANN,
    eps_schedule: Optional[Sequence[float]] = None,
    spec: Optional[QuadratureSpec] = None,
    counter_term_tol: float = 0.01,
) -> RegularizationResult:
    """Finite part of the self energy with kernel numerator / r**2.

    Both forms share the counter term ``2L/eps``: the Weber numerator is
    ``1 + O(s**2)`` like the Neumann one.  The identity
    ``Neumann = 2 * Weber`` holds for the finite parts.
    """
    if not loop.closed:
        raise UnsupportedCurveError('power-2 regularization needs a closed loop')
    form = InductanceForm.parse(form)
    if eps_schedule is None:
        eps_schedule = default_eps_schedule(loop)
    eps = validate_schedule(eps_schedule)
    raw = strip_sweep(loop, FormKernel(form, 2.0), eps, spec)
    length = loop.length
    counter = 2.0 * length / eps
    partial = raw - counter
    weights = 1.0 / eps

    columns = {'c0': np.ones_like(eps), 'c1': eps, 'c2': eps**2, 'c3': eps**3}
    pinned = fit_series(columns, partial, weights)
    reduced = fit_series(dict(list(columns.items())[:-1]), partial, weights)
    free_columns = {'c0': columns['c0'], 'c_inv': 1.0 / eps, 'c1': eps, 'c2': eps**2}
    free = fit_series(free_columns, raw, weights)
    check_counter_term(
        free['c_inv'], 2.0 * length, counter_term_tol, 'power-2 1/eps coefficient'
    )

    logger.debug('power-2 %s fit: %s', form.value, pinned)
    return RegularizationResult(
        value=pinned['c0'],
        method='power2',
        form=form.value,
        units='bare',
        schedule=[
            ScheduleSample(float(e), float(i), float(c), float(p))
            for e, i, c, p in zip(eps, raw, counter, partial)
        ],
        fit_coefficients=dict(pinned, c_inv=2.0 * length),
        free_fit_coefficients=free,
        predicted={'c_inv': 2.0 * length},
        error_estimate=abs(pinned['c0'] - reduced['c0']),
    )
