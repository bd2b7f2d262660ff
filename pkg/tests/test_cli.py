import csv
import io
import json
import math

import pytest
from click.testing import CliRunner

from loopind.cli import format_value, main, render
from loopind.oracles import circle_self_inductance, maxwell_coaxial

BASE = ['--env', 'testing', '--log-level', 'ERROR']


@pytest.fixture
def cli():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, BASE + [str(a) for a in args])

    return invoke


def rows(output):
    return list(csv.DictReader(io.StringIO(output)))


def quantities(output):
    return {row['quantity']: float(row['value']) for row in rows(output)}


def test_format_value():
    assert format_value(0.1) == '0.10000000000000001'
    assert format_value(True) == 'true'
    assert format_value('neumann') == 'neumann'


def test_render_json_is_sorted():
    text = render([], (), 'json', {'b': 1, 'a': 2})
    assert text.index('"a"') < text.index('"b"')


class TestSelfCommand:
    """Test the self command."""

    def test_circle_csv(self, cli, curve_file):
        result = cli('self', '--curve', curve_file('circle.json'))

        assert result.exit_code == 0, result.output
        values = quantities(result.output)
        assert values['value'] == pytest.approx(circle_self_inductance(), rel=1e-6)
        assert values['predicted.c_log'] == pytest.approx(4 * math.pi)
        assert 'free_fit.c_log' in values

    def test_json_output_is_deterministic(self, cli, curve_file, tmp_path):
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        for out in (first, second):
            result = cli(
                'self',
                '--curve',
                curve_file('ellipse.json'),
                '--form',
                'weber',
                '--format',
                'json',
                '--out',
                out,
            )
            assert result.exit_code == 0, result.output
        assert first.read_bytes() == second.read_bytes()
        document = json.loads(first.read_text())
        assert document['form'] == 'weber'
        assert document['method'] == 'hadamard'

    def test_continuation_method(self, cli, curve_file):
        result = cli('self', '--curve', curve_file('circle.json'), '--method', 'continuation')

        assert result.exit_code == 0, result.output
        value = quantities(result.output)['value']
        assert value == pytest.approx(circle_self_inductance(), rel=1e-3)

    def test_missing_curve_file(self, cli):
        result = cli('self', '--curve', 'no-such-curve.json')

        assert result.exit_code == 2
        assert 'error' in result.output

    def test_non_monotone_schedule(self, cli, curve_file):
        result = cli('self', '--curve', curve_file('circle.json'), '--eps', '0.1,0.2,0.05,0.01')

        assert result.exit_code == 2

    def test_short_schedule(self, cli, curve_file):
        result = cli('self', '--curve', curve_file('circle.json'), '--eps', '0.1,0.05')

        assert result.exit_code == 3
        assert 'FIT_ERROR' in result.output

    def test_divergent_width(self, cli, curve_file):
        result = cli('self', '--curve', curve_file('circle.json'), '--eps', '0.1,0.05,0.02,0')

        assert result.exit_code == 2


def test_continuation_command(cli, curve_file):
    result = cli('continuation', '--curve', curve_file('circle.json'), '--format', 'json')

    assert result.exit_code == 0, result.output
    document = json.loads(result.output)
    assert document['method'] == 'continuation'
    assert len(document['schedule']) == 6


def test_continuation_z_out_of_range(cli, curve_file):
    result = cli('continuation', '--curve', curve_file('circle.json'), '--z', '-0.2,-0.6,-0.8,-0.9')

    assert result.exit_code == 2


def test_parallel_limit_command(cli, curve_file):
    result = cli('parallel-limit', '--curve', curve_file('circle.json'))

    assert result.exit_code == 0, result.output
    values = quantities(result.output)
    assert values['predicted.implied_hadamard'] == pytest.approx(circle_self_inductance(), rel=1e-3)


class TestSweepCommand:
    """Test the sweep command."""

    def test_columns(self, cli, curve_file):
        result = cli('sweep', '--curve', curve_file('circle.json'), '--eps', '0.2,0.1,0.05,0.025')

        assert result.exit_code == 0, result.output
        assert result.output.splitlines()[0] == 'epsilon,raw_integral,counter_term,partial_sum'
        table = rows(result.output)
        assert [float(row['epsilon']) for row in table] == [0.2, 0.1, 0.05, 0.025]
        errors = [abs(float(row['partial_sum']) - circle_self_inductance()) for row in table]
        assert errors == sorted(errors, reverse=True)

    def test_accelerated(self, cli, curve_file):
        circle = curve_file('circle.json')
        result = cli('sweep', '--curve', circle, '--eps', '0.1,0.05', '--accelerate')

        assert result.exit_code == 0, result.output
        for row in rows(result.output):
            assert float(row['partial_sum']) == pytest.approx(circle_self_inductance(), rel=1e-4)

    def test_accelerate_open_curve(self, cli, curve_file):
        result = cli('sweep', '--curve', curve_file('line.json'), '--accelerate')

        assert result.exit_code == 2


class TestMutualCommand:
    """Test the mutual command."""

    def test_coaxial(self, cli, curve_file):
        circle, upper = curve_file('circle.json'), curve_file('coaxial_upper.json')
        result = cli('mutual', '--curve', circle, '--curve', upper)

        assert result.exit_code == 0, result.output
        value = quantities(result.output)['mutual_inductance']
        assert value == pytest.approx(maxwell_coaxial(1.0, 1.0, 1.0), rel=1e-6)

    def test_one_curve(self, cli, curve_file):
        result = cli('mutual', '--curve', curve_file('circle.json'))

        assert result.exit_code == 2

    def test_same_curve(self, cli, curve_file):
        circle = curve_file('circle.json')
        result = cli('mutual', '--curve', circle, '--curve', circle)

        assert result.exit_code == 2
        assert 'PROXIMITY' in result.output


class TestSolenoidCommand:
    """Test the solenoid command."""

    def test_summary(self, cli):
        result = cli('solenoid', '--radius', 1, '--length', 2)

        assert result.exit_code == 0, result.output
        values = quantities(result.output)
        assert values['closed_form'] == pytest.approx(54.36, rel=1e-3)
        assert values['oracle'] == pytest.approx(values['closed_form'], rel=1e-5)

    def test_si_json(self, cli):
        result = cli('solenoid', '--radius', 1, '--length', 2, '--units', 'si', '--format', 'json')

        assert result.exit_code == 0, result.output
        assert json.loads(result.output)['closed_form'] == pytest.approx(54.36e-7, rel=1e-3)

    def test_turns_must_increase(self, cli):
        result = cli('solenoid', '--radius', 1, '--length', 2, '--turns', '4,2')

        assert result.exit_code == 2

    def test_negative_radius(self, cli):
        result = cli('solenoid', '--radius', -1, '--length', 2)

        assert result.exit_code == 2


def test_verify_missing_curves(cli, tmp_path):
    result = cli('verify', '--curves-dir', tmp_path)

    assert result.exit_code == 2


@pytest.mark.slow
@pytest.mark.integration
def test_verify_quick_suite(cli, curves_dir, tmp_path):
    out = tmp_path / 'checks.csv'
    result = cli('verify', '--curves-dir', curves_dir, '--quick', '--out', out)

    checks = rows(out.read_text())
    failed = [row['name'] for row in checks if row['passed'] != 'true']
    assert failed == []
    assert result.exit_code == 0
    names = {row['name'] for row in checks}
    assert 'circle.hadamard.neumann' in names
    assert 'maxwell.d=1' in names
    for form in ('neumann', 'weber'):
        assert f'circle.continuation_vs_hadamard.{form}' in names
        assert f'ellipse.continuation_vs_hadamard.{form}' in names
        assert f'residue3.ellipse.{form}' in names

    again = tmp_path / 'checks_again.csv'
    cli('verify', '--curves-dir', curves_dir, '--quick', '--out', again)
    assert again.read_bytes() == out.read_bytes()


def test_flask_cli_group(runner):
    args = ['loopind'] + BASE + ['solenoid', '--radius', '1', '--length', '2']
    result = runner.invoke(args=args)

    assert result.exit_code == 0, result.output
    assert 'closed_form' in result.output
