import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from loopind.curve import (
    CURVE_KINDS,
    ParametricLoop,
    circle,
    curvature_sq_integral,
    ellipse,
    harmonic_knot,
    helix,
    line_segment,
    offset_curve,
)
from loopind.errors import ConfigError, CurveSpecError
from loopind.inductance import InductanceForm, UnitSystem

COMMANDS = ('self', 'mutual', 'sweep', 'continuation', 'parallel-limit', 'solenoid', 'verify')
OUTPUT_FORMATS = ('csv', 'json')

CURVE_FIELDS: Dict[str, Dict[str, str]] = {
    'circle': {'radius': 'positive number'},
    'ellipse': {'a': 'positive number', 'b': 'positive number'},
    'harmonic-knot': {
        'cos': 'list of 3-vectors, row k multiplies cos(ku)',
        'sin': 'list of 3-vectors, row k multiplies sin(ku)',
    },
    'helix': {
        'radius': 'positive number',
        'length': 'positive number',
        'turns_per_length': 'positive number, whole number of turns',
    },
    'line': {'start': '3-vector', 'end': '3-vector'},
    'offset': {'base': 'closed curve spec', 'delta': 'non-negative number'},
}


def _number(params: Mapping[str, Any], name: str, positive: bool = True) -> float:
    if name not in params:
        raise CurveSpecError(f'missing field params.{name}')
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise CurveSpecError(f'params.{name} must be a finite number')
    if positive and value <= 0:
        raise CurveSpecError(f'params.{name} must be positive')
    return float(value)


def _vector(value: Any, name: str) -> List[float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise CurveSpecError(f'{name} must be a list of three numbers')
    return [float(x) for x in value]


class CurveSpecSchema:
    """Curve-spec documents: ``{"kind": ..., "params": {...}, "transform": {...}}``"""

    @classmethod
    def load(cls, data: Any) -> ParametricLoop:
        if not isinstance(data, dict):
            raise CurveSpecError('curve spec must be a JSON object')
        kind = data.get('kind')
        if kind not in CURVE_KINDS:
            raise CurveSpecError(f'kind must be one of {", ".join(CURVE_KINDS)}, got {kind!r}')
        params = data.get('params', {})
        if not isinstance(params, dict):
            raise CurveSpecError('params must be an object')
        loop = cls._build(kind, params)
        if 'transform' in data:
            loop = cls._transform(loop, data['transform'])
        return loop

    @classmethod
    def load_file(cls, path: str) -> ParametricLoop:
        if not os.path.isfile(path):
            raise CurveSpecError(f'curve file not found: {path}')
        with open(path, encoding='utf-8') as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as exc:
                raise CurveSpecError(f'{path}: invalid JSON ({exc})')
        return cls.load(data)

    @staticmethod
    def _build(kind: str, params: Mapping[str, Any]) -> ParametricLoop:
        if kind == 'circle':
            return circle(_number(params, 'radius'))
        if kind == 'ellipse':
            return ellipse(_number(params, 'a'), _number(params, 'b'))
        if kind == 'harmonic-knot':
            rows = {}
            for name in ('cos', 'sin'):
                value = params.get(name, [])
                if not isinstance(value, list):
                    raise CurveSpecError(f'params.{name} must be a list of 3-vectors')
                rows[name] = [_vector(row, f'params.{name}[{i}]') for i, row in enumerate(value)]
            if not rows['cos'] and not rows['sin']:
                return harmonic_knot()
            return harmonic_knot(rows['cos'], rows['sin'])
        if kind == 'helix':
            return helix(
                _number(params, 'radius'),
                _number(params, 'length'),
                _number(params, 'turns_per_length'),
            )
        if kind == 'line':
            return line_segment(
                _vector(params.get('start'), 'params.start'),
                _vector(params.get('end'), 'params.end'),
            )
        if 'base' not in params:
            raise CurveSpecError('missing field params.base')
        base = CurveSpecSchema.load(params['base'])
        return offset_curve(base, _number(params, 'delta', positive=False))

    @staticmethod
    def _transform(loop: ParametricLoop, transform: Any) -> ParametricLoop:
        if not isinstance(transform, dict):
            raise CurveSpecError('transform must be an object')
        unknown = set(transform) - {'origin', 'rotation_vector', 'scale', 'reverse'}
        if unknown:
            raise CurveSpecError(f'unknown transform fields: {", ".join(sorted(unknown))}')
        origin = _vector(transform['origin'], 'transform.origin') if 'origin' in transform else None
        rotation = (
            _vector(transform['rotation_vector'], 'transform.rotation_vector')
            if 'rotation_vector' in transform
            else None
        )
        scale = _number(transform, 'scale') if 'scale' in transform else 1.0
        if origin is not None or rotation is not None or scale != 1.0:
            loop = loop.transformed(origin, rotation, scale)
        if transform.get('reverse', False):
            loop = loop.reversed()
        return loop


def parse_schedule(text: Any, name: str = 'schedule') -> Optional[List[float]]:
    """Comma-separated string or list of numbers, strictly monotone; None passes through"""
    if text is None or (isinstance(text, str) and not text.strip()):
        return None
    if isinstance(text, str):
        try:
            values = [float(item) for item in text.split(',') if item.strip()]
        except ValueError:
            raise ConfigError(f'{name} must be a comma-separated list of numbers, got {text!r}')
    else:
        values = [float(item) for item in text]
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f'{name} values must be finite')
    steps = np.diff(values)
    if len(values) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError(f'{name} must be strictly monotone')
    return values


@dataclass
class RunConfig:
    command: str
    curves: List[str] = field(default_factory=list)
    form: InductanceForm = InductanceForm.NEUMANN
    units: UnitSystem = UnitSystem.REDUCED
    schedule: Optional[List[float]] = None
    output_format: str = 'csv'
    out: Optional[str] = None
    method: str = 'hadamard'
    accelerate: bool = False


class RunConfigSchema:
    @staticmethod
    def load(data: Mapping[str, Any]) -> RunConfig:
        command = data.get('command')
        if command not in COMMANDS:
            raise ConfigError(f'command must be one of {", ".join(COMMANDS)}, got {command!r}')
        curves = list(data.get('curves') or [])
        for path in curves:
            if not os.path.isfile(path):
                raise ConfigError(f'curve file not found: {path}')
        output_format = str(data.get('output_format') or 'csv').lower()
        if output_format not in OUTPUT_FORMATS:
            raise ConfigError(f'output format must be csv or json, got {output_format!r}')
        schedule = data.get('schedule')
        return RunConfig(
            command=command,
            curves=curves,
            form=InductanceForm.parse(data.get('form') or 'neumann'),
            units=UnitSystem.parse(data.get('units') or 'reduced'),
            schedule=parse_schedule(schedule) if schedule is not None else None,
            output_format=output_format,
            out=data.get('out'),
            method=str(data.get('method') or 'hadamard'),
            accelerate=bool(data.get('accelerate', False)),
        )


def required_curves(config: RunConfig, count: int) -> List[ParametricLoop]:
    if len(config.curves) != count:
        raise ConfigError(
            f'{config.command} needs exactly {count} curve file(s), got {len(config.curves)}'
        )
    return [CurveSpecSchema.load_file(path) for path in config.curves]


def curve_summary(loop: ParametricLoop) -> Dict[str, Any]:
    return {
        'kind': loop.kind,
        'closed': loop.closed,
        'length': loop.length,
        'curvature_sq_integral': curvature_sq_integral(loop),
        'max_curvature': loop.max_curvature,
    }


def describe_kinds() -> List[Dict[str, Any]]:
    return [{'kind': kind, 'fields': CURVE_FIELDS[kind]} for kind in CURVE_KINDS]
