"""Closed-form reference values for circles and coaxial pairs."""
import math

import numpy as np
from scipy import integrate

from loopind.errors import DomainError
from loopind.inductance import InductanceForm, UnitSystem
from loopind.quadrature import elliptic_E, elliptic_E_modulus, elliptic_K_modulus


def circle_strip_integral(eps: float, radius: float = 1.0) -> float:
    """Bare Neumann strip integral of a circle.

    ``R * 2pi(-2 log tan(e/4) - 4 cos(e/2))`` with ``e = eps / R``.
    """
    angle = eps / radius
    bracket = -2.0 * math.log(math.tan(angle / 4.0)) - 4.0 * math.cos(angle / 2.0)
    return radius * 2.0 * math.pi * bracket


def circle_self_inductance(
    radius: float = 1.0,
    form: InductanceForm = InductanceForm.NEUMANN,
    units: UnitSystem = UnitSystem.REDUCED,
) -> float:
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)
    value = units.mu0 * radius * (math.log(4.0 * radius) - 2.0)
    if form is InductanceForm.WEBER:
        value += units.mu0 * radius
    return value


def circle_power2(form: InductanceForm = InductanceForm.NEUMANN) -> float:
    """Power-2 finite part of any circle (scale invariant)"""
    form = InductanceForm.parse(form)
    return -2.0 * math.pi**2 if form is InductanceForm.NEUMANN else -(math.pi**2)


def circle_parallel_limit(radius: float = 1.0, units: UnitSystem = UnitSystem.REDUCED) -> float:
    units = UnitSystem.parse(units)
    return units.mu0 * radius * (math.log(8.0 * radius) - 2.0)


def circle_phi(t: float, form: InductanceForm = InductanceForm.NEUMANN) -> float:
    """phi on the unit circle"""
    form = InductanceForm.parse(form)
    root = math.sqrt(1.0 - t * t / 4.0)
    if form is InductanceForm.NEUMANN:
        return 2.0 * (1.0 - t * t / 2.0) / root
    return 2.0 * root


def circle_z_energy(
    z: float, form: InductanceForm = InductanceForm.NEUMANN, units: UnitSystem = UnitSystem.REDUCED
) -> float:
    """z-energy of the unit circle from its one-dimensional angular integral"""
    if z <= -1:
        raise DomainError('circle z-energy needs z > -1')
    form = InductanceForm.parse(form)
    units = UnitSystem.parse(units)

    def regular(theta: float) -> float:
        # (2 sin(theta/2))**z = theta**z * sinc(theta / 2pi)**z; theta**z is the quad weight
        chord = float(np.sinc(theta / (2.0 * math.pi)))
        if form is InductanceForm.NEUMANN:
            return chord**z * math.cos(theta)
        return chord**z * math.cos(0.5 * theta) ** 2

    # symmetric about theta = pi
    value, _ = integrate.quad(
        regular, 0.0, math.pi, weight='alg', wvar=(z, 0.0), epsabs=1e-13, limit=200
    )
    return units.mu0_over_4pi * 4.0 * math.pi * value


def maxwell_coaxial(
    r1: float,
    r2: float,
    separation: float,
    units: UnitSystem = UnitSystem.REDUCED,
    method: str = 'scipy',
) -> float:
    """Mutual inductance of two coaxial circles (modulus convention, m = k**2)"""
    units = UnitSystem.parse(units)
    m = 4.0 * r1 * r2 / ((r1 + r2) ** 2 + separation**2)
    k = math.sqrt(m)
    return units.mu0 * math.sqrt(r1 * r2) * (
        (2.0 / k - k) * elliptic_K_modulus(k, method) - 2.0 / k * elliptic_E_modulus(k, method)
    )


def ellipse_perimeter(a: float, b: float) -> float:
    """4a E(1 - b**2/a**2) for a >= b"""
    a, b = max(a, b), min(a, b)
    return 4.0 * a * elliptic_E(1.0 - (b / a) ** 2)


def ellipse_curvature_sq_integral(a: float, b: float, samples: int = 20000) -> float:
    """Dense periodic trapezoid of kappa**2 |gamma'| over the ellipse"""
    u = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    speed = np.hypot(a * np.sin(u), b * np.cos(u))
    kappa = a * b / speed**3
    return float(np.sum(kappa**2 * speed) * 2.0 * math.pi / samples)
