import math

import numpy as np
import pytest

from loopind.errors import ConfigError, CurveSpecError, DomainError
from loopind.inductance import UnitSystem
from loopind.models import ConvergenceRow
from loopind.solenoid import (
    SolenoidSpec,
    asymptotic_L,
    closed_form_L,
    convergence_study,
    cylinder_surface_oracle,
    deviations_decreasing,
    helix_curve,
)


def test_closed_form_reference_value():
    # l = 2r: the E(m) term drops out, leaving (32 pi / 3)(2 K(-1) - 1)
    assert closed_form_L(1.0, 2.0) == pytest.approx(54.36, rel=1e-3)
    expected = 32 * math.pi / 3 * (2 * 1.3110287771 - 1)
    assert closed_form_L(1.0, 2.0) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize('radius', [0.5, 1.0, 2.0])
@pytest.mark.parametrize('length', [1.0, 2.0, 10.0])
def test_closed_form_matches_cylinder_oracle(radius, length):
    expected = cylinder_surface_oracle(radius, length)
    assert closed_form_L(radius, length) == pytest.approx(expected, rel=1e-5)


@pytest.mark.parametrize('method', ['agm', 'quadrature'])
def test_elliptic_methods_agree(method):
    value = closed_form_L(1.5, 3.0, method=method)
    assert value == pytest.approx(closed_form_L(1.5, 3.0), rel=1e-12)


def test_cubic_scaling():
    base = closed_form_L(1.0, 3.0)
    assert closed_form_L(2.0, 6.0) == pytest.approx(8.0 * base, rel=1e-12)
    assert cylinder_surface_oracle(0.5, 1.5) == pytest.approx(base / 8.0, rel=1e-5)


def test_degenerate_dimensions():
    assert closed_form_L(0.0, 2.0) == 0.0
    assert closed_form_L(1.0, 0.0) == 0.0
    assert cylinder_surface_oracle(0.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        closed_form_L(-1.0, 2.0)


def test_si_units():
    assert closed_form_L(1.0, 2.0, UnitSystem.SI) == pytest.approx(1e-7 * closed_form_L(1.0, 2.0))


def test_asymptotic_residual_decays_like_inverse_length():
    lengths = np.array([10.0, 20.0, 40.0, 80.0])
    residual = [abs(closed_form_L(1.0, x) - asymptotic_L(1.0, x)) for x in lengths]
    slope = np.polyfit(np.log(lengths), np.log(residual), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


class TestSolenoidSpec:
    def test_geometry(self):
        spec = SolenoidSpec(1.0, 2.0, 4.0)
        assert spec.turns == 8.0
        assert spec.arc_length == pytest.approx(2.0 * math.hypot(8 * math.pi, 1.0))
        assert helix_curve(spec).length == pytest.approx(spec.arc_length, rel=1e-10)

    def test_fractional_turns(self):
        with pytest.raises(CurveSpecError):
            SolenoidSpec(1.0, 1.0, 1.5)

    def test_non_positive(self):
        with pytest.raises(CurveSpecError):
            SolenoidSpec(0.0, 1.0, 1.0)


def test_deviations_decreasing():
    deviations = ((1.0, 0.1), (2.0, 0.5), (4.0, 0.2), (8.0, 0.1))
    rows = [ConvergenceRow(n, 1.0, 0.0, 0.0, d) for n, d in deviations]
    assert deviations_decreasing(rows)
    assert not deviations_decreasing(rows, preasymptotic=0.0)


def test_convergence_needs_increasing_turns():
    with pytest.raises(ConfigError):
        convergence_study(1.0, 2.0, [4.0, 2.0])


@pytest.mark.slow
def test_helix_approaches_closed_form():
    rows = convergence_study(1.0, 2.0, [2.0, 4.0, 8.0])
    assert [row.n for row in rows] == [2.0, 4.0, 8.0]
    assert deviations_decreasing(rows)
    assert rows[-1].deviation < rows[0].deviation
