from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from loopind.errors import DomainError


@dataclass
class ScheduleSample:
    """One point of a regularization schedule.

    ``partial_sum = raw - counter_term``; ``parameter`` is eps, z or delta
    depending on the method.
    """

    parameter: float
    raw: float
    counter_term: float
    partial_sum: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'parameter': self.parameter,
            'raw': self.raw,
            'counter_term': self.counter_term,
            'partial_sum': self.partial_sum,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScheduleSample':
        return cls(
            parameter=float(data['parameter']),
            raw=float(data['raw']),
            counter_term=float(data['counter_term']),
            partial_sum=float(data['partial_sum']),
        )


@dataclass
class RegularizationResult:
    value: float
    method: str
    form: str
    units: str
    schedule: List[ScheduleSample] = field(default_factory=list)
    fit_coefficients: Dict[str, float] = field(default_factory=dict)
    free_fit_coefficients: Dict[str, float] = field(default_factory=dict)
    predicted: Dict[str, float] = field(default_factory=dict)
    error_estimate: float = 0.0

    def __post_init__(self) -> None:
        if self.error_estimate < 0:
            raise ValueError('error_estimate must be non-negative')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': self.value,
            'method': self.method,
            'form': self.form,
            'units': self.units,
            'schedule': [sample.to_dict() for sample in self.schedule],
            'fit_coefficients': dict(self.fit_coefficients),
            'free_fit_coefficients': dict(self.free_fit_coefficients),
            'predicted': dict(self.predicted),
            'error_estimate': self.error_estimate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RegularizationResult':
        return cls(
            value=float(data['value']),
            method=data['method'],
            form=data['form'],
            units=data['units'],
            schedule=[ScheduleSample.from_dict(item) for item in data.get('schedule', [])],
            fit_coefficients={k: float(v) for k, v in data.get('fit_coefficients', {}).items()},
            free_fit_coefficients={
                k: float(v) for k, v in data.get('free_fit_coefficients', {}).items()
            },
            predicted={k: float(v) for k, v in data.get('predicted', {}).items()},
            error_estimate=float(data.get('error_estimate', 0.0)),
        )


@dataclass(frozen=True)
class ZEnergySample:
    z: float
    value: float

    def __post_init__(self) -> None:
        if self.z <= -1:
            raise DomainError(
                f'z-energy is defined by direct integration only for z > -1, got {self.z}'
            )

    def to_dict(self) -> Dict[str, float]:
        return {'z': self.z, 'value': self.value}


@dataclass
class ResidueEstimate:
    res1: float
    res3: float
    expected_res1: float
    expected_res3: float
    phi0_max_error: float
    base_points: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'res1': self.res1,
            'res3': self.res3,
            'expected_res1': self.expected_res1,
            'expected_res3': self.expected_res3,
            'phi0_max_error': self.phi0_max_error,
            'base_points': self.base_points,
        }


@dataclass
class ConvergenceRow:
    n: float
    arc_length: float
    value: float
    scaled: float
    deviation: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'n': self.n,
            'arc_length': self.arc_length,
            'value': self.value,
            'scaled': self.scaled,
            'deviation': self.deviation,
        }


@dataclass
class VerificationCheck:
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool
    note: Optional[str] = None

    @classmethod
    def relative(
        cls, name: str, value: float, expected: float, tolerance: float, floor: float = 0.0
    ) -> 'VerificationCheck':
        """Pass when |value - expected| <= tolerance * max(|expected|, floor)"""
        scale = max(abs(expected), floor)
        return cls(name, value, expected, tolerance, abs(value - expected) <= tolerance * scale)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            'name': self.name,
            'value': self.value,
            'expected': self.expected,
            'tolerance': self.tolerance,
            'passed': self.passed,
        }
        if self.note:
            result['note'] = self.note
        return result
