"""Command-line front end.

Every command writes CSV (default) or JSON to stdout or ``--out``; logs go
to stderr.  Input problems exit with 2, numerical failures with 3.
"""
import csv
import functools
import io
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

import click
import numpy as np

from config import Config, get_config
from loopind import configure_logging
from loopind.curve import ParametricLoop, circle
from loopind.errors import InductanceError, ToleranceError
from loopind.inductance import (
    InductanceForm,
    mutual_inductance,
    power2_self_regularized,
    power_alpha_energy,
)
from loopind.models import RegularizationResult, VerificationCheck
from loopind.oracles import (
    circle_parallel_limit,
    circle_power2,
    circle_self_inductance,
    maxwell_coaxial,
)
from loopind.quadrature import QuadratureSpec
from loopind.regularize import (
    continuation_self,
    form_offset,
    hadamard_self,
    hadamard_sweep,
    homothety_prediction,
    parallel_limit,
    regularized_self_inductance,
    residue_estimates,
)
from loopind.schemas import (
    CurveSpecSchema,
    RunConfig,
    RunConfigSchema,
    parse_schedule,
    required_curves,
)
from loopind.solenoid import (
    SolenoidSpec,
    asymptotic_L,
    closed_form_L,
    convergence_study,
    cylinder_surface_oracle,
    deviations_decreasing,
    helix_curve,
)

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ('epsilon', 'raw_integral', 'counter_term', 'partial_sum')
CHECK_COLUMNS = ('name', 'value', 'expected', 'tolerance', 'passed')
CONVERGENCE_COLUMNS = ('n', 'arc_length', 'value', 'scaled', 'deviation')


@dataclass
class Settings:
    cfg: Type[Config]
    spec: QuadratureSpec


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return f'{value:.17g}'
    return str(value)


def render(
    rows: Sequence[Dict[str, Any]],
    columns: Sequence[str],
    output_format: str,
    document: Any = None,
) -> str:
    if output_format == 'json':
        payload = rows if document is None else document
        return json.dumps(payload, indent=2, sort_keys=True) + '\n'
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[name]) for name in columns])
    return buffer.getvalue()


def emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except InductanceError as exc:
            click.echo(f'error: {exc.error_type}: {exc}', err=True)
            raise SystemExit(exc.exit_code)
    return wrapper


def result_rows(result: RegularizationResult) -> List[Dict[str, Any]]:
    rows: List[Dict[str, Any]] = [
        {'quantity': 'value', 'value': result.value},
        {'quantity': 'error_estimate', 'value': result.error_estimate},
    ]
    for prefix, values in (
        ('fit', result.fit_coefficients),
        ('free_fit', result.free_fit_coefficients),
        ('predicted', result.predicted),
    ):
        rows.extend(
            {'quantity': f'{prefix}.{key}', 'value': value}
            for key, value in values.items()
        )
    return rows


output_options = [
    click.option(
        '--out',
        type=click.Path(dir_okay=False),
        default=None,
        help='Write to a file instead of stdout',
    ),
    click.option('--format', 'output_format', type=click.Choice(['csv', 'json']), default=None),
]
physics_options = [
    click.option(
        '--form',
        type=click.Choice(['neumann', 'weber']),
        default='neumann',
        show_default=True,
    ),
    click.option('--units', type=click.Choice(['reduced', 'si']), default=None),
]


def with_options(options: Sequence[Callable[..., Any]]) -> Callable[..., Any]:
    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        for option in reversed(options):
            func = option(func)
        return func
    return decorator


@click.group()
@click.option('--env', default=None, help='Configuration name (development, testing, production)')
@click.option('--log-level', default=None, help='Logging level for stderr diagnostics')
@click.pass_context
def main(ctx: click.Context, env: Optional[str], log_level: Optional[str]) -> None:
    """Mutual and regularized self-inductance of space curves."""
    cfg = get_config(env)
    configure_logging(log_level or cfg.LOG_LEVEL)
    ctx.obj = Settings(cfg=cfg, spec=QuadratureSpec.from_config(cfg))


def _run_config(settings: Settings, **values: Any) -> RunConfig:
    values['units'] = values.get('units') or settings.cfg.UNITS
    values['output_format'] = values.get('output_format') or settings.cfg.OUTPUT_FORMAT
    return RunConfigSchema.load(values)


def _self_command(settings: Settings, config: RunConfig) -> None:
    (loop,) = required_curves(config, 1)
    options: Dict[str, Any] = {}
    if config.method == 'parallel-limit':
        options['separation_samples'] = settings.cfg.SEPARATION_SAMPLES
    else:
        options['counter_term_tol'] = settings.cfg.COUNTER_TERM_TOL
    if config.method == 'continuation':
        options['degree'] = settings.cfg.CONTINUATION_FIT_DEGREE
        options['extrapolation_tol'] = settings.cfg.EXTRAPOLATION_TOL
    result = regularized_self_inductance(
        loop, config.method, config.form, config.schedule, settings.spec, config.units, **options
    )
    text = render(
        result_rows(result), ('quantity', 'value'), config.output_format, result.to_dict()
    )
    emit(text, config.out)


@main.command('self')
@click.option('--curve', required=True, type=click.Path(), help='Curve spec JSON file')
@click.option(
    '--method',
    type=click.Choice(['hadamard', 'continuation', 'parallel-limit']),
    default='hadamard',
    show_default=True,
)
@click.option('--eps', default=None, help='Comma-separated exclusion widths (hadamard)')
@click.option(
    '--z',
    'z_values',
    default=None,
    help='Comma-separated z samples in (-1, -0.5] (continuation)',
)
@click.option('--delta', default=None, help='Comma-separated offset distances (parallel-limit)')
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def self_command(
    settings: Settings,
    curve: str,
    method: str,
    eps: Optional[str],
    z_values: Optional[str],
    delta: Optional[str],
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Regularized self-inductance of one loop."""
    schedule = {'hadamard': eps, 'continuation': z_values, 'parallel-limit': delta}[method]
    config = _run_config(
        settings,
        command='self',
        curves=[curve],
        form=form,
        units=units,
        method=method,
        schedule=parse_schedule(schedule),
        output_format=output_format,
        out=out,
    )
    _self_command(settings, config)


@main.command('continuation')
@click.option('--curve', required=True, type=click.Path())
@click.option('--z', 'z_values', default=None, help='Comma-separated z samples in (-1, -0.5]')
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def continuation_command(
    settings: Settings,
    curve: str,
    z_values: Optional[str],
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Self-inductance by analytic continuation of the z-energy."""
    config = _run_config(
        settings,
        command='continuation',
        curves=[curve],
        form=form,
        units=units,
        method='continuation',
        schedule=parse_schedule(z_values, 'z'),
        output_format=output_format,
        out=out,
    )
    _self_command(settings, config)


@main.command('parallel-limit')
@click.option('--curve', required=True, type=click.Path())
@click.option('--delta', default=None, help='Comma-separated offset distances')
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def parallel_limit_command(
    settings: Settings,
    curve: str,
    delta: Optional[str],
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Limit of the mutual inductance with the delta-parallel curve."""
    config = _run_config(
        settings,
        command='parallel-limit',
        curves=[curve],
        form=form,
        units=units,
        method='parallel-limit',
        schedule=parse_schedule(delta, 'delta'),
        output_format=output_format,
        out=out,
    )
    _self_command(settings, config)


@main.command('mutual')
@click.option(
    '--curve', 'curves', required=True, multiple=True, type=click.Path(), help='Give twice'
)
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def mutual_command(
    settings: Settings,
    curves: Sequence[str],
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Mutual inductance of two disjoint loops."""
    config = _run_config(
        settings,
        command='mutual',
        curves=list(curves),
        form=form,
        units=units,
        output_format=output_format,
        out=out,
    )
    loop_a, loop_b = required_curves(config, 2)
    value = mutual_inductance(
        loop_a,
        loop_b,
        config.form,
        config.units,
        settings.spec,
        settings.cfg.SEPARATION_SAMPLES,
    )
    rows = [{'quantity': 'mutual_inductance', 'value': value}]
    document = {'value': value, 'form': config.form.value, 'units': config.units.value}
    emit(render(rows, ('quantity', 'value'), config.output_format, document), config.out)


@main.command('sweep')
@click.option('--curve', required=True, type=click.Path())
@click.option('--eps', default=None, help='Comma-separated exclusion widths')
@click.option('--accelerate', is_flag=True, help='Also subtract the predicted eps^2 term')
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def sweep_command(
    settings: Settings,
    curve: str,
    eps: Optional[str],
    accelerate: bool,
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Strip integrals and counter terms for an eps schedule."""
    config = _run_config(
        settings,
        command='sweep',
        curves=[curve],
        form=form,
        units=units,
        schedule=parse_schedule(eps, 'eps'),
        output_format=output_format,
        out=out,
        accelerate=accelerate,
    )
    (loop,) = required_curves(config, 1)
    samples = hadamard_sweep(
        loop, config.form, config.schedule, settings.spec, config.units, accelerate
    )
    rows = [
        {
            'epsilon': s.parameter,
            'raw_integral': s.raw,
            'counter_term': s.counter_term,
            'partial_sum': s.partial_sum,
        }
        for s in samples
    ]
    emit(render(rows, SWEEP_COLUMNS, config.output_format), config.out)


@main.command('solenoid')
@click.option('--radius', type=float, required=True)
@click.option('--length', type=float, required=True)
@click.option(
    '--turns',
    default=None,
    help='Comma-separated turns per unit length; adds a helix convergence table',
)
@with_options(physics_options + output_options)
@click.pass_obj
@handle_errors
def solenoid_command(
    settings: Settings,
    radius: float,
    length: float,
    turns: Optional[str],
    form: str,
    units: Optional[str],
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Solenoid closed form, cylinder oracle and long-coil asymptotic."""
    config = _run_config(
        settings,
        command='solenoid',
        form=form,
        units=units,
        output_format=output_format,
        out=out,
    )
    summary = {
        'closed_form': closed_form_L(radius, length, config.units),
        'oracle': cylinder_surface_oracle(radius, length, config.units),
        'asymptotic': asymptotic_L(radius, length, config.units),
    }
    n_list = parse_schedule(turns, 'turns')
    if n_list is None:
        rows = [{'quantity': key, 'value': value} for key, value in summary.items()]
        emit(render(rows, ('quantity', 'value'), config.output_format, summary), config.out)
        return
    table = convergence_study(radius, length, n_list, config.form, settings.spec, config.units)
    rows = [row.to_dict() for row in table]
    document = dict(summary, rows=rows)
    emit(render(rows, CONVERGENCE_COLUMNS, config.output_format, document), config.out)


@main.command('verify')
@click.option(
    '--curves-dir', default='curves', show_default=True, type=click.Path(file_okay=False)
)
@click.option('--quick', is_flag=True, help='Skip the helix checks')
@with_options(output_options)
@click.pass_obj
@handle_errors
def verify_command(
    settings: Settings,
    curves_dir: str,
    quick: bool,
    out: Optional[str],
    output_format: Optional[str],
) -> None:
    """Run the identity suite on the shipped curves; exit 3 on any failure."""
    output_format = output_format or settings.cfg.OUTPUT_FORMAT
    checks = verification_suite(curves_dir, settings, quick)
    rows = [check.to_dict() for check in checks]
    emit(render(rows, CHECK_COLUMNS, output_format), out)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        raise ToleranceError(f'{len(failed)} check(s) failed: {", ".join(failed)}')


PAIRS = (
    ('coaxial', 'circle.json', 'coaxial_upper.json'),
    ('linked', 'circle.json', 'linked_ring.json'),
    ('skew', 'circle.json', 'skew_ellipse.json'),
    ('distant_knot', 'trefoil.json', 'distant_circle.json'),
    ('nested', 'ellipse.json', 'small_circle.json'),
)


class VerificationSuite:
    """Closed-form identities checked on the shipped curve set."""

    def __init__(self, curves_dir: str, settings: Settings) -> None:
        self.curves_dir = curves_dir
        self.spec = settings.spec
        self.cfg = settings.cfg
        self.checks: List[VerificationCheck] = []
        self.loops = {
            name: self.load(f'{name}.json') for name in ('circle', 'ellipse', 'trefoil')
        }
        self.hadamard: Dict[Tuple[str, InductanceForm], RegularizationResult] = {}

    def load(self, filename: str) -> ParametricLoop:
        return CurveSpecSchema.load_file(os.path.join(self.curves_dir, filename))

    def add(
        self, name: str, value: float, expected: float, tolerance: float, floor: float = 0.0
    ) -> None:
        check = VerificationCheck.relative(name, value, expected, tolerance, floor)
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, '%s: %.12g (expected %.12g)', name, value, expected)
        self.checks.append(check)

    def self_value(self, name: str, form: InductanceForm) -> RegularizationResult:
        if (name, form) not in self.hadamard:
            self.hadamard[name, form] = hadamard_self(
                self.loops[name],
                form,
                spec=self.spec,
                counter_term_tol=self.cfg.COUNTER_TERM_TOL,
            )
        return self.hadamard[name, form]

    def circle_values(self) -> None:
        for form in InductanceForm:
            self.add(
                f'circle.hadamard.{form.value}',
                self.self_value('circle', form).value,
                circle_self_inductance(1.0, form),
                1e-5,
            )

    def form_offsets(self) -> None:
        for name, loop in self.loops.items():
            offset = (
                self.self_value(name, InductanceForm.WEBER).value
                - self.self_value(name, InductanceForm.NEUMANN).value
            )
            self.add(f'{name}.form_offset', offset, form_offset(loop), 1e-4)

    def counter_terms(self) -> None:
        for name in ('circle', 'ellipse'):
            for form in InductanceForm:
                result = self.self_value(name, form)
                self.add(
                    f'{name}.counter_term.log.{form.value}',
                    result.free_fit_coefficients['c_log'],
                    result.predicted['c_log'],
                    1e-3,
                )
                self.add(
                    f'{name}.counter_term.eps2.{form.value}',
                    result.fit_coefficients['c2'],
                    result.predicted['c2'],
                    1e-2,
                )

    def method_agreement(self) -> None:
        for name in ('circle', 'ellipse'):
            for form in InductanceForm:
                continued = continuation_self(
                    self.loops[name],
                    form,
                    spec=self.spec,
                    degree=self.cfg.CONTINUATION_FIT_DEGREE,
                    extrapolation_tol=self.cfg.EXTRAPOLATION_TOL,
                    counter_term_tol=self.cfg.COUNTER_TERM_TOL,
                )
                hadamard = self.self_value(name, form).value
                self.add(
                    f'{name}.continuation_vs_hadamard.{form.value}',
                    continued.value,
                    hadamard,
                    1e-3,
                    1.0,
                )

    def residues(self) -> None:
        cases = (
            ('circle', InductanceForm.NEUMANN),
            ('circle', InductanceForm.WEBER),
            ('ellipse', InductanceForm.NEUMANN),
            ('ellipse', InductanceForm.WEBER),
        )
        for name, form in cases:
            estimate = residue_estimates(self.loops[name], form)
            tag = f'{name}.{form.value}'
            self.add(f'phi0.{tag}', estimate.phi0_max_error, 0.0, 1e-6, 1.0)
            self.add(f'residue1.{tag}', estimate.res1, estimate.expected_res1, 1e-3)
            self.add(f'residue3.{tag}', estimate.res3, estimate.expected_res3, 1e-2)

    def parallel(self) -> None:
        limit = parallel_limit(
            self.loops['circle'], spec=self.spec, separation_samples=self.cfg.SEPARATION_SAMPLES
        )
        self.add('circle.parallel_limit', limit.value, circle_parallel_limit(), 1e-3, 1.0)
        self.add(
            'circle.parallel_limit.implied_hadamard',
            limit.predicted['implied_hadamard'],
            self.self_value('circle', InductanceForm.NEUMANN).value,
            1e-3,
            1.0,
        )

    def homothety(self) -> None:
        unit = self.loops['circle']
        base = self.self_value('circle', InductanceForm.NEUMANN).value
        for factor in (0.5, 2.0):
            scaled = hadamard_self(unit.scaled(factor), spec=self.spec).value
            expected = homothety_prediction(base, unit.length, factor)
            self.add(f'circle.homothety.{factor:g}', scaled, expected, 1e-4)

    def power2(self) -> None:
        unit = self.loops['circle']
        neumann = power2_self_regularized(unit, InductanceForm.NEUMANN, spec=self.spec).value
        weber = power2_self_regularized(unit, InductanceForm.WEBER, spec=self.spec).value
        doubled = power2_self_regularized(unit.scaled(2.0), spec=self.spec).value
        self.add('circle.power2.neumann', neumann, circle_power2(InductanceForm.NEUMANN), 1e-4)
        self.add('circle.power2.neumann_twice_weber', neumann, 2.0 * weber, 1e-4)
        self.add('circle.power2.scale_invariance', doubled, neumann, 1e-4)

    def pairs(self) -> None:
        samples = self.cfg.SEPARATION_SAMPLES
        loaded = {name: (self.load(a), self.load(b)) for name, a, b in PAIRS}
        for name, (loop_a, loop_b) in loaded.items():
            values = [
                mutual_inductance(loop_a, loop_b, form, spec=self.spec, separation_samples=samples)
                for form in InductanceForm
            ]
            self.add(f'pair.{name}.neumann_vs_weber', values[1], values[0], 1e-6, 1.0)
        for name in ('coaxial', 'linked'):
            loop_a, loop_b = loaded[name]
            for alpha in (0.5, 1.0, 2.0, 3.0):
                energies = [
                    power_alpha_energy(loop_a, loop_b, alpha, form, self.spec, samples)
                    for form in InductanceForm
                ]
                self.add(
                    f'pair.{name}.alpha_identity.{alpha:g}',
                    energies[0],
                    alpha * energies[1],
                    1e-6,
                    1.0,
                )

    def maxwell(self) -> None:
        unit = circle(1.0)
        for distance in (0.5, 1.0, 2.0):
            upper = unit.transformed(origin=(0.0, 0.0, distance))
            value = mutual_inductance(
                unit, upper, spec=self.spec, separation_samples=self.cfg.SEPARATION_SAMPLES
            )
            self.add(f'maxwell.d={distance:g}', value, maxwell_coaxial(1.0, 1.0, distance), 1e-4)

    def solenoid(self) -> None:
        for radius in (0.5, 1.0, 2.0):
            for length in (1.0, 2.0, 10.0):
                self.add(
                    f'solenoid.oracle.r={radius:g}.l={length:g}',
                    closed_form_L(radius, length),
                    cylinder_surface_oracle(radius, length),
                    1e-5,
                )
        lengths = np.array([10.0, 20.0, 40.0, 80.0])
        residual = [abs(closed_form_L(1.0, x) - asymptotic_L(1.0, x)) for x in lengths]
        slope = float(np.polyfit(np.log(lengths), np.log(residual), 1)[0])
        self.add('solenoid.asymptotic_slope', slope, -1.0, 0.1)

    def helix(self) -> None:
        coil = helix_curve(SolenoidSpec(1.0, 2.0, 4.0))
        neumann, weber = (
            hadamard_self(coil, form, spec=self.spec).value for form in InductanceForm
        )
        self.add('helix.form_offset', weber - neumann, form_offset(coil), 1e-4)
        rows = convergence_study(1.0, 2.0, [2.0, 4.0, 8.0], spec=self.spec)
        self.checks.append(
            VerificationCheck(
                'helix.convergence_monotone',
                rows[-1].deviation,
                rows[0].deviation,
                0.0,
                deviations_decreasing(rows),
            )
        )

    def run(self, quick: bool = False) -> List[VerificationCheck]:
        self.circle_values()
        self.form_offsets()
        self.counter_terms()
        self.method_agreement()
        self.residues()
        self.parallel()
        self.homothety()
        self.power2()
        self.pairs()
        self.maxwell()
        self.solenoid()
        if not quick:
            self.helix()
        return self.checks


def verification_suite(
    curves_dir: str, settings: Settings, quick: bool = False
) -> List[VerificationCheck]:
    return VerificationSuite(curves_dir, settings).run(quick)
