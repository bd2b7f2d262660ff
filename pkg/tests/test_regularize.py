import math

import pytest

from loopind.curve import circle, ellipse, helix, line_segment
from loopind.errors import (
    ConfigError,
    CounterTermMismatchError,
    DomainError,
    ExpansionRangeError,
    LocalityError,
    UnsupportedCurveError,
)
from loopind.oracles import (
    circle_parallel_limit,
    circle_phi,
    circle_self_inductance,
    circle_strip_integral,
    circle_z_energy,
    ellipse_curvature_sq_integral,
)
from loopind.regularize import (
    accelerated_partial_sum,
    continuation_self,
    default_delta_schedule,
    default_z_schedule,
    form_offset,
    hadamard_self,
    hadamard_sweep,
    homothety_prediction,
    parallel_limit,
    phi_local,
    regularized_self_inductance,
    residue_estimates,
    second_order_prediction,
    z_energy,
)

SAMPLES = 512


class TestHadamard:
    """Hadamard finite part by strip exclusion."""

    @pytest.mark.parametrize('form', ['neumann', 'weber'])
    def test_unit_circle(self, unit_circle, form):
        result = hadamard_self(unit_circle, form)
        assert result.value == pytest.approx(circle_self_inductance(1.0, form), rel=1e-6)
        assert result.method == 'hadamard'
        assert result.error_estimate < 1e-5
        assert len(result.schedule) == 6

    def test_golden_value(self, unit_circle):
        # 4 pi (log 4 - 2) from the closed-form strip integral, not (log 2 - 1) mu0 / pi
        expected = 4 * math.pi * (math.log(4) - 2)
        assert hadamard_self(unit_circle).value == pytest.approx(expected, abs=1e-5)

    def test_counter_terms_match_theory(self, sample_ellipse):
        result = hadamard_self(sample_ellipse, 'weber')
        free = result.free_fit_coefficients
        assert free['c_log'] == pytest.approx(result.predicted['c_log'], rel=1e-3)
        assert result.fit_coefficients['c2'] == pytest.approx(result.predicted['c2'], rel=1e-2)

    def test_second_order_prediction_circle(self, unit_circle):
        # 11/24 of the curvature integral 2 pi
        assert second_order_prediction(unit_circle, 'neumann') == pytest.approx(11 * math.pi / 12)

    def test_sweep_matches_strip_integral(self, unit_circle):
        samples = hadamard_sweep(unit_circle, 'neumann', [0.2, 0.1, 0.05])
        for sample in samples:
            assert sample.raw == pytest.approx(circle_strip_integral(sample.parameter), rel=1e-9)
            counter_term = 4 * math.pi * math.log(1 / sample.parameter)
            assert sample.counter_term == pytest.approx(counter_term)

    def test_accelerated_partial_sum(self, unit_circle):
        value = accelerated_partial_sum(unit_circle, 0.1)
        assert value == pytest.approx(circle_self_inductance(), rel=1e-4)

    def test_accelerate_needs_closed_loop(self):
        with pytest.raises(UnsupportedCurveError):
            hadamard_sweep(line_segment([0, 0, 0], [1, 0, 0]), accelerate=True)

    @pytest.mark.parametrize('form', ['neumann', 'weber'])
    def test_straight_segment(self, form):
        # 2L(log L - 1) for a straight segment of length L
        segment = line_segment([0, 0, 0], [0, 3, 0])
        result = hadamard_self(segment, form)
        assert result.value == pytest.approx(6 * (math.log(3) - 1), rel=1e-6)
        assert 'c2' not in result.predicted

    def test_si_units(self, unit_circle):
        reduced = hadamard_self(unit_circle).value
        si = hadamard_self(unit_circle, units='si')
        assert si.value == pytest.approx(1e-7 * reduced, rel=1e-10)
        assert si.units == 'si'

    def test_schedule_too_wide(self, unit_circle):
        with pytest.raises(DomainError):
            hadamard_self(unit_circle, eps_schedule=[0.8, 0.4, 0.2, 0.1])

    def test_counter_term_mismatch(self, unit_circle):
        with pytest.raises(CounterTermMismatchError):
            hadamard_self(unit_circle, counter_term_tol=1e-14)

    def test_reversal_invariant(self, sample_ellipse):
        forward = hadamard_self(sample_ellipse).value
        backward = hadamard_self(sample_ellipse.reversed()).value
        assert backward == pytest.approx(forward, rel=1e-10)


class TestFormOffset:
    """Weber minus Neumann regularized self-inductance."""

    def test_closed_loop(self, unit_circle):
        assert form_offset(unit_circle) == pytest.approx(4 * math.pi)

    def test_straight_segment_has_none(self):
        assert form_offset(line_segment([0, 0, 0], [2, 0, 0])) == pytest.approx(0.0, abs=1e-12)

    def test_helix_end_to_end(self):
        coil = helix(1.0, 1.0, 2.0)
        assert form_offset(coil) == pytest.approx(2 * (coil.length - 1.0), rel=1e-10)

    def test_ellipse(self, sample_ellipse):
        neumann = hadamard_self(sample_ellipse, 'neumann').value
        weber = hadamard_self(sample_ellipse, 'weber').value
        assert weber - neumann == pytest.approx(form_offset(sample_ellipse), rel=1e-5)

    @pytest.mark.slow
    def test_trefoil(self, trefoil):
        neumann = hadamard_self(trefoil, 'neumann').value
        weber = hadamard_self(trefoil, 'weber').value
        assert weber - neumann == pytest.approx(form_offset(trefoil), rel=1e-4)

    @pytest.mark.slow
    def test_helix(self):
        coil = helix(1.0, 1.0, 2.0)
        neumann = hadamard_self(coil, 'neumann').value
        weber = hadamard_self(coil, 'weber').value
        assert weber - neumann == pytest.approx(form_offset(coil), rel=1e-4)


class TestHomothety:
    @pytest.mark.parametrize('factor', [0.5, 2.0])
    def test_scaled_circle(self, unit_circle, factor):
        base = hadamard_self(unit_circle).value
        scaled = hadamard_self(unit_circle.scaled(factor)).value
        expected = homothety_prediction(base, unit_circle.length, factor)
        assert scaled == pytest.approx(expected, rel=1e-5)
        assert scaled == pytest.approx(circle_self_inductance(factor), rel=1e-5)

    def test_factor_must_be_positive(self):
        with pytest.raises(DomainError):
            homothety_prediction(1.0, 1.0, -2.0)


class TestContinuation:
    """Analytic continuation of the z-energy to z = -1."""

    def test_default_schedule(self):
        expected = [-0.5, -0.75, -0.875, -0.9375, -0.96875, -0.984375]
        assert default_z_schedule() == pytest.approx(expected)

    @pytest.mark.parametrize('z', [-0.5, -0.9, 0.5, 1.0])
    @pytest.mark.parametrize('form', ['neumann', 'weber'])
    def test_z_energy_matches_circle(self, unit_circle, z, form):
        value = z_energy(unit_circle, z, form).value
        assert value == pytest.approx(circle_z_energy(z, form), rel=1e-8)

    def test_z_energy_at_one(self):
        assert circle_z_energy(1.0) == pytest.approx(-16 * math.pi / 3, rel=1e-12)

    def test_z_energy_domain(self, unit_circle):
        with pytest.raises(DomainError):
            z_energy(unit_circle, -1.0)

    def test_circle_agrees_with_hadamard(self, unit_circle):
        result = continuation_self(unit_circle)
        assert result.value == pytest.approx(circle_self_inductance(), rel=1e-3)
        assert result.free_fit_coefficients['c_res'] == pytest.approx(4 * math.pi, rel=1e-2)

    def test_circle_weber_form(self, unit_circle):
        result = continuation_self(unit_circle, 'weber')
        assert result.value == pytest.approx(circle_self_inductance(form='weber'), rel=1e-3)
        assert result.free_fit_coefficients['c_res'] == pytest.approx(4 * math.pi, rel=1e-2)

    @pytest.mark.slow
    @pytest.mark.parametrize('form', ['neumann', 'weber'])
    def test_ellipse_agrees_with_hadamard(self, sample_ellipse, form):
        continued = continuation_self(sample_ellipse, form).value
        finite_part = hadamard_self(sample_ellipse, form).value
        assert continued == pytest.approx(finite_part, rel=1e-3)

    def test_schedule_out_of_range(self, unit_circle):
        with pytest.raises(DomainError):
            continuation_self(unit_circle, z_schedule=[-0.4, -0.6, -0.8, -0.9])

    def test_open_curve(self):
        with pytest.raises(UnsupportedCurveError):
            continuation_self(helix(1.0, 1.0, 1.0))


class TestPhi:
    """Local tangent correlation phi and the residues built from it."""

    @pytest.mark.parametrize('t', [0.05, 0.2, 0.5])
    @pytest.mark.parametrize('form', ['neumann', 'weber'])
    def test_circle_phi(self, unit_circle, t, form):
        assert phi_local(unit_circle, 1.0, t, form) == pytest.approx(circle_phi(t, form), rel=1e-6)

    @pytest.mark.parametrize('form, coefficient', [('neumann', -0.75), ('weber', -0.25)])
    def test_circle_residues(self, unit_circle, form, coefficient):
        estimate = residue_estimates(unit_circle, form, base_points=4)
        assert estimate.phi0_max_error < 1e-6
        assert estimate.res1 == pytest.approx(4 * math.pi, rel=1e-6)
        assert estimate.res3 == pytest.approx(coefficient * 2 * math.pi, rel=1e-3)
        assert estimate.expected_res3 == pytest.approx(coefficient * 2 * math.pi, rel=1e-10)

    @pytest.mark.slow
    @pytest.mark.parametrize('form, coefficient', [('neumann', -0.75), ('weber', -0.25)])
    def test_ellipse_residues(self, sample_ellipse, form, coefficient):
        estimate = residue_estimates(sample_ellipse, form)
        assert estimate.base_points == 32
        assert estimate.phi0_max_error < 1e-6
        assert estimate.res1 == pytest.approx(estimate.expected_res1, rel=1e-3)
        assert estimate.res3 == pytest.approx(estimate.expected_res3, rel=5e-3)
        kappa_sq = ellipse_curvature_sq_integral(2.0, 1.0)
        assert estimate.expected_res3 == pytest.approx(coefficient * kappa_sq, rel=1e-6)

    def test_far_strand_inside_ball(self):
        flat = ellipse(2.0, 0.3)
        with pytest.raises(LocalityError):
            phi_local(flat, 0.25 * flat.length, 0.7)

    def test_fit_range_too_wide(self, unit_circle):
        with pytest.raises(ExpansionRangeError):
            residue_estimates(unit_circle, fit_range=(0.3, 1.2), base_points=2)

    def test_radius_must_be_positive(self, unit_circle):
        with pytest.raises(DomainError):
            phi_local(unit_circle, 0.0, 0.0)


class TestParallelLimit:
    def test_default_schedule(self, unit_circle):
        schedule = default_delta_schedule(unit_circle)
        assert schedule[0] == pytest.approx(0.04)
        assert len(schedule) == 6

    def test_circle(self, unit_circle):
        result = parallel_limit(unit_circle, separation_samples=SAMPLES)
        assert result.value == pytest.approx(circle_parallel_limit(), abs=1e-3)
        implied = result.predicted['implied_hadamard']
        assert implied == pytest.approx(circle_self_inductance(), rel=1e-3)

    def test_needs_curvature(self):
        with pytest.raises(UnsupportedCurveError):
            parallel_limit(line_segment([0, 0, 0], [1, 0, 0]))


def test_dispatch(unit_circle):
    result = regularized_self_inductance(unit_circle, 'hadamard', 'weber')
    assert result.form == 'weber'
    with pytest.raises(ConfigError):
        regularized_self_inductance(unit_circle, 'zeta')


def test_dispatch_continuation_options(unit_circle):
    result = regularized_self_inductance(
        unit_circle, 'continuation', degree=3, extrapolation_tol=0.05, counter_term_tol=0.05
    )
    assert result.method == 'continuation'


def test_circle_radius_two_matches_closed_form():
    assert hadamard_self(circle(2.0)).value == pytest.approx(circle_self_inductance(2.0), rel=1e-6)
