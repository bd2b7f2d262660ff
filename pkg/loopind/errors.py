from typing import Any, Dict


class InductanceError(Exception):
    """Base error for every failure the library reports on purpose"""

    error_type = 'INTERNAL_ERROR'
    status_code = 500
    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'result': False,
            'error_type': self.error_type,
            'error_message': str(self),
        }


class ConfigError(InductanceError):
    """Bad input: curve files, schedules, flags"""

    error_type = 'BAD_REQUEST'
    status_code = 400
    exit_code = 2


class CurveSpecError(ConfigError):
    error_type = 'INVALID_CURVE'


class DomainError(ConfigError):
    error_type = 'DOMAIN_ERROR'


class DivergentDomainError(DomainError):
    """Self-pair integrated with no exclusion strip"""

    error_type = 'DIVERGENT_DOMAIN'


class DegenerateCurveError(ConfigError):
    """Speed vanishes somewhere on the curve"""

    error_type = 'DEGENERATE_CURVE'


class UnsupportedCurveError(ConfigError):
    error_type = 'UNSUPPORTED_CURVE'


class ProximityError(ConfigError):
    error_type = 'PROXIMITY'


class LocalityError(DomainError):
    """Chord ball reaches a distant strand of the curve"""

    error_type = 'LOCALITY'


class NumericalError(InductanceError):
    error_type = 'NUMERICAL_ERROR'
    status_code = 422
    exit_code = 3


class ToleranceError(NumericalError):
    error_type = 'TOLERANCE'


class FitError(NumericalError):
    error_type = 'FIT_ERROR'


class CounterTermMismatchError(FitError):
    error_type = 'COUNTER_TERM_MISMATCH'


class ExtrapolationError(FitError):
    error_type = 'EXTRAPOLATION'


class ExpansionRangeError(FitError):
    error_type = 'EXPANSION_RANGE'
