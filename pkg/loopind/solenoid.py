"""Helical coils and their large-n self-inductance.

``H(helix_n) / n**2`` tends to ``closed_form_L(r, l)`` as the number of turns
per unit length grows; the closed form is cross-checked by direct quadrature
of the cylinder-surface integral it comes from.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from loopind.curve import ParametricLoop, helix
from loopind.errors import ConfigError, CurveSpecError, DomainError
from loopind.inductance import InductanceForm, UnitSystem
from loopind.models import ConvergenceRow
from loopind.quadrature import QuadratureSpec, elliptic_E, elliptic_K, integrate_1d, panel_rule
from loopind.regularize import hadamard_self

logger = logging.getLogger(__name__)

_ORACLE_SPEC = QuadratureSpec(panel_order=24, abs_tol=1e-14, rel_tol=1e-12)
_THETA_LAYERS = 48


@dataclass(frozen=True)
class SolenoidSpec:
    radius: float
    length: float
    turns_per_length: float

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.length <= 0 or self.turns_per_length <= 0:
            raise CurveSpecError('solenoid radius, length and turns_per_length must be positive')
        if abs(self.turns - round(self.turns)) > 1e-9:
            raise CurveSpecError(f'solenoid must have a whole number of turns, got {self.turns}')

    @property
    def turns(self) -> float:
        return self.turns_per_length * self.length

    @property
    def arc_length(self) -> float:
        return self.length * math.hypot(2.0 * math.pi * self.turns_per_length * self.radius, 1.0)


def helix_curve(spec: SolenoidSpec) -> ParametricLoop:
    return helix(spec.radius, spec.length, spec.turns_per_length)


def _check_dimensions(radius: float, length: float) -> None:
    if radius < 0 or length < 0:
        raise DomainError('radius and length must be non-negative')


def closed_form_L(
    radius: float, length: float, units: UnitSystem = UnitSystem.REDUCED, method: str = 'scipy'
) -> float:
    """Large-n limit of H / n**2 in complete elliptic integrals.

    ``(8 mu0 / 3)[-r**3 + (-l(l**2 - 4r**2) E(m) + l(l**2 + 4r**2) K(m)) / 8]``
    with parameter ``m = -4r**2 / l**2``.
    """
    _check_dimensions(radius, length)
    if radius == 0 or length == 0:
        return 0.0
    units = UnitSystem.parse(units)
    r, h = radius, length
    m = -4.0 * r * r / (h * h)
    e_term = -h * (h * h - 4.0 * r * r) * elliptic_E(m, method)
    k_term = h * (h * h + 4.0 * r * r) * elliptic_K(m, method)
    bracket = -(r**3) + (e_term + k_term) / 8.0
    return 8.0 * units.mu0 / 3.0 * bracket


def cylinder_surface_oracle(
    radius: float,
    length: float,
    units: UnitSystem = UnitSystem.REDUCED,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """Direct quadrature of the cylinder-surface integral.

    ``2 mu0 r**3`` times the integral over theta in [0, pi/2] of
    ``(1 - 2 sin**2 theta)`` times the double integral of
    ``1 / sqrt(4 sin**2 theta + (z1 - z2)**2)`` over ``[0, l/r]**2``.  The
    double integral collapses to ``2 * int_0^L (L - u) / sqrt(a**2 + u**2) du``
    and is evaluated in ``u = a sinh(v)``; the theta integrand has a log
    singularity at 0 handled by geometric breakpoints.
    """
    _check_dimensions(radius, length)
    if radius == 0 or length == 0:
        return 0.0
    units = UnitSystem.parse(units)
    spec = spec or _ORACLE_SPEC
    span = length / radius
    x, w = panel_rule(np.linspace(0.0, 1.0, 17), spec.panel_order)

    def integrand(theta: np.ndarray) -> np.ndarray:
        a = 2.0 * np.sin(theta)
        top = np.arcsinh(span / a)
        v = top[:, None] * x[None, :]
        inner = (span - a[:, None] * np.sinh(v)) @ w * top
        return (1.0 - 2.0 * np.sin(theta) ** 2) * 2.0 * inner

    breakpoints = 0.5 * math.pi * 2.0 ** -np.arange(_THETA_LAYERS, dtype=float)
    total = integrate_1d(integrand, 0.0, 0.5 * math.pi, spec, breakpoints=breakpoints)
    return 2.0 * units.mu0 * radius**3 * total


def asymptotic_L(radius: float, length: float, units: UnitSystem = UnitSystem.REDUCED) -> float:
    """mu0 (pi r**2 l - 8 r**3 / 3), the long-coil behaviour of closed_form_L"""
    _check_dimensions(radius, length)
    units = UnitSystem.parse(units)
    return units.mu0 * (math.pi * radius**2 * length - 8.0 * radius**3 / 3.0)


def convergence_study(
    radius: float,
    length: float,
    n_list: Sequence[float],
    form: InductanceForm = InductanceForm.NEUMANN,
    spec: Optional[QuadratureSpec] = None,
    units: UnitSystem = UnitSystem.REDUCED,
) -> List[ConvergenceRow]:
    """Regularized helix self-inductance over n**2 against the closed form"""
    values = [float(n) for n in n_list]
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError('turns_per_length list must be strictly increasing')
    units = UnitSystem.parse(units)
    limit = closed_form_L(radius, length, units)
    rows = []
    for n in values:
        coil = SolenoidSpec(radius, length, n)
        result = hadamard_self(helix_curve(coil), form, spec=spec, units=units)
        scaled = result.value / (n * n)
        rows.append(ConvergenceRow(n, coil.arc_length, result.value, scaled, abs(scaled - limit)))
        logger.info('helix n=%g: H=%.10g, H/n^2=%.10g', n, result.value, scaled)
    return rows


def deviations_decreasing(rows: Sequence[ConvergenceRow], preasymptotic: float = 1.0) -> bool:
    """Whether deviations shrink along the rows, ignoring n <= preasymptotic"""
    deviations = [row.deviation for row in rows if row.n > preasymptotic]
    return all(b < a for a, b in zip(deviations, deviations[1:]))
