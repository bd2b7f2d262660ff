import logging
import math
from typing import Any, Dict, Optional, Tuple

from flasgger import swag_from
from flask import Blueprint, Flask, current_app, request

from loopind.curve import CURVE_KINDS
from loopind.errors import ConfigError, InductanceError
from loopind.inductance import InductanceForm, UnitSystem, mutual_inductance
from loopind.quadrature import QuadratureSpec
from loopind.regularize import METHODS, regularized_self_inductance
from loopind.schemas import CurveSpecSchema, curve_summary, describe_kinds, parse_schedule
from loopind.solenoid import asymptotic_L, closed_form_L, cylinder_surface_oracle

logger = logging.getLogger(__name__)

api_bp = Blueprint('api', __name__)


def error_response(
    error_type: str, error_message: str, status_code: int = 400
) -> Tuple[Dict[str, Any], int]:
    """Return error response"""
    return {
        'result': False,
        'error_type': error_type,
        'error_message': error_message
    }, status_code


def success_response(data: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Return success response"""
    response = {'result': True}
    if data:
        response.update(data)
    return response


def register_error_handlers(app: Flask) -> None:
    @app.errorhandler(InductanceError)
    def handle_inductance_error(exc: InductanceError) -> Tuple[Dict[str, Any], int]:
        logger.info('request failed: %s: %s', exc.error_type, exc)
        return exc.to_dict(), exc.status_code

    @app.errorhandler(404)
    def handle_not_found(exc: Exception) -> Tuple[Dict[str, Any], int]:
        return error_response('NOT_FOUND', 'Resource not found', 404)


def _payload() -> Dict[str, Any]:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ConfigError('request body must be a JSON object')
    return data


def _number(data: Dict[str, Any], name: str) -> float:
    value = data.get(name)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{name} must be a number')
    if not math.isfinite(value):
        raise ConfigError(f'{name} must be finite')
    return float(value)


def _spec() -> QuadratureSpec:
    return QuadratureSpec.from_config(current_app.config)


CURVE_SCHEMA = {
    'type': 'object',
    'properties': {
        'kind': {'type': 'string', 'enum': list(CURVE_KINDS)},
        'params': {'type': 'object'},
        'transform': {'type': 'object'}
    },
    'required': ['kind']
}


@api_bp.route('/curves/kinds', methods=['GET'])
@swag_from({
    'tags': ['Curves'],
    'summary': 'List supported curve kinds and their parameters',
    'responses': {
        200: {
            'description': 'Curve kinds',
            'schema': {
                'type': 'object',
                'properties': {
                    'result': {'type': 'boolean'},
                    'kinds': {'type': 'array', 'items': {'type': 'object'}}
                }
            }
        }
    }
})
def list_curve_kinds():
    """List supported curve kinds"""
    return success_response({'kinds': describe_kinds()})


@api_bp.route('/curves/describe', methods=['POST'])
@swag_from({
    'tags': ['Curves'],
    'summary': 'Length, curvature integral and closedness of a curve',
    'parameters': [
        {'name': 'body', 'in': 'body', 'required': True, 'schema': CURVE_SCHEMA}
    ],
    'responses': {
        200: {'description': 'Curve summary'},
        400: {'description': 'Invalid curve spec'}
    }
})
def describe_curve():
    """Describe a curve"""
    loop = CurveSpecSchema.load(_payload())
    return success_response({'curve': curve_summary(loop)})


@api_bp.route('/inductance/self', methods=['POST'])
@swag_from({
    'tags': ['Inductance'],
    'summary': 'Regularized self-inductance of a single loop',
    'parameters': [
        {
            'name': 'body',
            'in': 'body',
            'required': True,
            'schema': {
                'type': 'object',
                'properties': {
                    'curve': CURVE_SCHEMA,
                    'form': {'type': 'string', 'enum': ['neumann', 'weber']},
                    'units': {'type': 'string', 'enum': ['reduced', 'si']},
                    'method': {'type': 'string', 'enum': list(METHODS)},
                    'schedule': {'type': 'array', 'items': {'type': 'number'}}
                },
                'required': ['curve']
            }
        }
    ],
    'responses': {
        200: {'description': 'Regularization result with schedule and fit diagnostics'},
        400: {'description': 'Bad request'},
        422: {'description': 'Numerical failure (tolerance or fit)'}
    }
})
def self_inductance():
    """Regularized self-inductance"""
    data = _payload()
    if 'curve' not in data:
        return error_response('BAD_REQUEST', 'curve is required')
    loop = CurveSpecSchema.load(data['curve'])
    method = data.get('method', 'hadamard')
    if method not in METHODS:
        return error_response('BAD_REQUEST', f'method must be one of {", ".join(METHODS)}')
    options: Dict[str, Any] = {}
    if method == 'parallel-limit':
        options['separation_samples'] = current_app.config['SEPARATION_SAMPLES']
    else:
        options['counter_term_tol'] = current_app.config['COUNTER_TERM_TOL']
    if method == 'continuation':
        options['degree'] = current_app.config['CONTINUATION_FIT_DEGREE']
        options['extrapolation_tol'] = current_app.config['EXTRAPOLATION_TOL']
    result = regularized_self_inductance(
        loop,
        method,
        InductanceForm.parse(data.get('form', 'neumann')),
        parse_schedule(data.get('schedule')),
        _spec(),
        UnitSystem.parse(data.get('units', current_app.config['UNITS'])),
        **options,
    )
    return success_response({'inductance': result.to_dict()})


@api_bp.route('/inductance/mutual', methods=['POST'])
@swag_from({
    'tags': ['Inductance'],
    'summary': 'Mutual inductance of two disjoint loops',
    'parameters': [
        {
            'name': 'body',
            'in': 'body',
            'required': True,
            'schema': {
                'type': 'object',
                'properties': {
                    'curves': {
                        'type': 'array',
                        'items': CURVE_SCHEMA,
                        'minItems': 2,
                        'maxItems': 2
                    },
                    'form': {'type': 'string', 'enum': ['neumann', 'weber']},
                    'units': {'type': 'string', 'enum': ['reduced', 'si']}
                },
                'required': ['curves']
            }
        }
    ],
    'responses': {
        200: {
            'description': 'Mutual inductance',
            'schema': {
                'type': 'object',
                'properties': {
                    'result': {'type': 'boolean'},
                    'value': {'type': 'number'}
                }
            }
        },
        400: {'description': 'Bad request or curves too close'}
    }
})
def mutual():
    """Mutual inductance"""
    data = _payload()
    curves = data.get('curves')
    if not isinstance(curves, list) or len(curves) != 2:
        return error_response('BAD_REQUEST', 'curves must be a list of two curve specs')
    loop_a, loop_b = (CurveSpecSchema.load(item) for item in curves)
    form = InductanceForm.parse(data.get('form', 'neumann'))
    units = UnitSystem.parse(data.get('units', current_app.config['UNITS']))
    value = mutual_inductance(
        loop_a, loop_b, form, units, _spec(), current_app.config['SEPARATION_SAMPLES']
    )
    return success_response({'value': value, 'form': form.value, 'units': units.value})


@api_bp.route('/solenoid', methods=['POST'])
@swag_from({
    'tags': ['Solenoid'],
    'summary': 'Large-n solenoid self-inductance, its oracle and long-coil asymptotic',
    'parameters': [
        {
            'name': 'body',
            'in': 'body',
            'required': True,
            'schema': {
                'type': 'object',
                'properties': {
                    'radius': {'type': 'number'},
                    'length': {'type': 'number'},
                    'units': {'type': 'string', 'enum': ['reduced', 'si']}
                },
                'required': ['radius', 'length']
            }
        }
    ],
    'responses': {
        200: {'description': 'Closed form, cylinder oracle and asymptotic'},
        400: {'description': 'Bad request'}
    }
})
def solenoid():
    """Solenoid closed form"""
    data = _payload()
    radius = _number(data, 'radius')
    length = _number(data, 'length')
    units = UnitSystem.parse(data.get('units', current_app.config['UNITS']))
    return success_response({
        'closed_form': closed_form_L(radius, length, units),
        'oracle': cylinder_surface_oracle(radius, length, units),
        'asymptotic': asymptotic_L(radius, length, units),
        'units': units.value
    })
