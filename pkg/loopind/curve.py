"""Parametric space curves, arc-length tables and Frenet data.

Every curve is an analytic map ``u -> gamma(u)`` with closed-form
derivatives up to third order (offset curves differentiate their first
derivative numerically).  Integrals in the rest of the package are taken in
arc length, so each curve carries an ``ArcTable`` mapping between the raw
parameter ``u`` and the arc length ``s``.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial.transform import Rotation

from loopind.errors import (
    CurveSpecError,
    DegenerateCurveError,
    DomainError,
    ProximityError,
    UnsupportedCurveError,
)
from loopind.quadrature import QuadratureSpec, gauss_legendre, integrate_1d

logger = logging.getLogger(__name__)

CURVE_KINDS = ('circle', 'ellipse', 'harmonic-knot', 'helix', 'line', 'offset')

TREFOIL_COS = ((0.0, 1.0, 0.0), (0.0, -2.0, 0.0), (0.0, 0.0, 0.0))
TREFOIL_SIN = ((1.0, 0.0, 0.0), (2.0, 0.0, 0.0), (0.0, 0.0, -1.0))

_TABLE_MIN_INTERVALS = 2048
_TABLE_INTERVALS_PER_UNIT = 128
_SPEED_FLOOR = 1e-12
_DIFFERENCE_STEP = 1e-4


@dataclass(frozen=True)
class FrenetData:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    curvature: float
    torsion: float
    curvature_derivative: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'point': self.point.tolist(),
            'tangent': self.tangent.tolist(),
            'normal': self.normal.tolist(),
            'binormal': self.binormal.tolist(),
            'curvature': self.curvature,
            'torsion': self.torsion,
            'curvature_derivative': self.curvature_derivative,
        }


class ArcTable:
    """Monotone map between raw parameter and arc length.

    Arc length at the nodes is exact to rounding (Gauss-Legendre per
    interval); in between, cubic Hermite interpolation with the exact slopes
    ``|gamma'|`` and ``1/|gamma'|`` is used.  ``polish=True`` adds one Newton
    step against the exact arc-length integral.
    """

    def __init__(self, loop: 'ParametricLoop', intervals: int) -> None:
        self._loop = loop
        self.u = np.linspace(0.0, loop.period, intervals + 1)
        self.speed = loop.speed(self.u)
        if self.speed.min() <= _SPEED_FLOOR * max(1.0, self.speed.max()):
            raise DegenerateCurveError(f'{loop.kind} curve is not regular (|gamma\'| vanishes)')
        x, w = gauss_legendre(16)
        half = 0.5 * np.diff(self.u)
        mid = 0.5 * (self.u[1:] + self.u[:-1])
        nodes = mid[:, None] + half[:, None] * x[None, :]
        pieces = (loop.speed(nodes) * w[None, :]).sum(axis=1) * half
        self.s = np.concatenate(([0.0], np.cumsum(pieces)))
        self.total_length = float(self.s[-1])
        self._forward = CubicHermiteSpline(self.u, self.s, self.speed)
        self._inverse = CubicHermiteSpline(self.s, self.u, 1.0 / self.speed)

    @classmethod
    def build(cls, loop: 'ParametricLoop') -> 'ArcTable':
        coarse = cls(loop, 256)
        intervals = max(
            _TABLE_MIN_INTERVALS,
            int(math.ceil(_TABLE_INTERVALS_PER_UNIT * coarse.total_length)),
        )
        table = cls(loop, intervals)
        logger.debug(
            'arc table for %s: %d intervals, length %.12g',
            loop.kind,
            intervals,
            table.total_length,
        )
        return table

    @property
    def nodes(self) -> List[Tuple[float, float]]:
        return list(zip(self.u.tolist(), self.s.tolist()))

    def s_of_u(self, u: np.ndarray) -> np.ndarray:
        return self._forward(u)

    def u_of_s(self, s: np.ndarray, polish: bool = False) -> np.ndarray:
        u = self._inverse(s)
        if not polish:
            return u
        u = np.clip(u, 0.0, self._loop.period)
        index = np.clip(np.searchsorted(self.u, u, side='right') - 1, 0, self.u.size - 2)
        x, w = gauss_legendre(16)
        left = self.u[index]
        half = 0.5 * (u - left)
        nodes = (left + half)[..., None] + half[..., None] * x
        exact = self.s[index] + (self._loop.speed(nodes) * w).sum(axis=-1) * half
        return u - (exact - s) / self._loop.speed(u)


class ParametricLoop:
    """A regular space curve ``gamma(u)``, ``u`` in ``[0, period]``.

    ``params`` holds the shape parameters of ``kind``; placement is a
    similarity transform (``origin``, ``matrix`` = scale * rotation) applied
    after the shape, and ``reverse`` runs the parameter backwards.
    """

    def __init__(
        self,
        kind: str,
        params: Dict[str, Any],
        closed: bool,
        period: float,
        origin: Optional[Sequence[float]] = None,
        matrix: Optional[np.ndarray] = None,
        reverse: bool = False,
        base: Optional['ParametricLoop'] = None,
    ) -> None:
        if kind not in CURVE_KINDS:
            raise CurveSpecError(f'unknown curve kind {kind!r}')
        self.kind = kind
        self.params = dict(params)
        self.closed = closed
        self.period = float(period)
        self.origin = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
        self.matrix = np.eye(3) if matrix is None else np.asarray(matrix, dtype=float)
        self.reverse = reverse
        self.base = base
        self._table: Optional[ArcTable] = None
        self._coefficients: Optional[Tuple[np.ndarray, np.ndarray]] = None
        if kind == 'harmonic-knot':
            cos = np.asarray(self.params['cos'], dtype=float).reshape(-1, 3)
            sin = np.asarray(self.params['sin'], dtype=float).reshape(-1, 3)
            rows = max(len(cos), len(sin))
            self._coefficients = (
                np.vstack((cos, np.zeros((rows - len(cos), 3)))),
                np.vstack((sin, np.zeros((rows - len(sin), 3)))),
            )

    def __repr__(self) -> str:
        return f'<ParametricLoop {self.kind} {self.params}>'

    @property
    def table(self) -> ArcTable:
        if self._table is None:
            self._table = ArcTable.build(self)
        return self._table

    @property
    def length(self) -> float:
        return self.table.total_length

    @property
    def scale(self) -> float:
        return float(abs(np.linalg.det(self.matrix)) ** (1.0 / 3.0))

    @property
    def max_speed(self) -> float:
        return float(self.table.speed.max())

    @property
    def max_curvature(self) -> float:
        return float(self.curvature(self.table.u).max())

    @property
    def min_curvature(self) -> float:
        return float(self.curvature(self.table.u).min())

    # raw derivatives ---------------------------------------------------

    def derivatives(self, u: np.ndarray, order: int = 1) -> List[np.ndarray]:
        """[gamma, gamma', ...] up to ``order`` at raw parameters ``u``.

        Each entry has shape ``u.shape + (3,)``.
        """
        u = np.asarray(u, dtype=float)
        sign = 1.0
        if self.reverse:
            u = self.period - u
            sign = -1.0
        shape = self._shape_derivatives(u, order)
        placed = []
        for k, value in enumerate(shape):
            value = value @ self.matrix.T
            if k == 0:
                value = value + self.origin
            elif sign < 0 and k % 2 == 1:
                value = -value
            placed.append(value)
        return placed

    def _shape_derivatives(self, u: np.ndarray, order: int) -> List[np.ndarray]:
        p = self.params
        if self.kind in ('circle', 'ellipse'):
            a = p['radius'] if self.kind == 'circle' else p['a']
            b = p['radius'] if self.kind == 'circle' else p['b']
            zero = np.zeros_like(u)
            out = []
            for k in range(order + 1):
                phase = u + 0.5 * math.pi * k
                out.append(np.stack((a * np.cos(phase), b * np.sin(phase), zero), axis=-1))
            return out
        if self.kind == 'harmonic-knot':
            cos, sin = self._coefficients
            k = np.arange(1, cos.shape[0] + 1, dtype=float)
            out = []
            for j in range(order + 1):
                phase = u[..., None] * k + 0.5 * math.pi * j
                scale = k**j
                out.append((np.cos(phase) * scale) @ cos + (np.sin(phase) * scale) @ sin)
            return out
        if self.kind == 'helix':
            r = p['radius']
            omega = 2.0 * math.pi * p['turns_per_length']
            out = []
            for j in range(order + 1):
                phase = omega * u + 0.5 * math.pi * j
                axial = u if j == 0 else (np.ones_like(u) if j == 1 else np.zeros_like(u))
                amplitude = r * omega**j
                out.append(
                    np.stack(
                        (amplitude * np.cos(phase), amplitude * np.sin(phase), axial), axis=-1
                    )
                )
            return out
        if self.kind == 'line':
            start = np.asarray(p['start'], dtype=float)
            direction = np.asarray(p['end'], dtype=float) - start
            out = [start + u[..., None] * direction]
            if order >= 1:
                out.append(np.broadcast_to(direction, u.shape + (3,)).copy())
            out.extend(np.zeros(u.shape + (3,)) for _ in range(order - 1))
            return out
        return self._offset_derivatives(u, order)

    def _offset_derivatives(self, u: np.ndarray, order: int) -> List[np.ndarray]:
        # gamma_d = gamma + d N,  gamma_d' = gamma' + d |gamma'| (-kappa T + tau B)
        base, delta = self.base, self.params['delta']

        def first(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            d = base.derivatives(v, 3)
            frame = _frenet_arrays(d[1], d[2], d[3])
            speed = frame['speed'][..., None]
            moved = d[0] + delta * frame['normal']
            turn = (
                -frame['curvature'][..., None] * frame['tangent']
                + frame['torsion'][..., None] * frame['binormal']
            )
            return moved, d[1] + delta * speed * turn

        position, velocity = first(u)
        out = [position, velocity][: order + 1]
        if order >= 2:
            h = _DIFFERENCE_STEP * self.period
            ahead, behind = first(u + h)[1], first(u - h)[1]
            out.append((ahead - behind) / (2.0 * h))
            if order >= 3:
                out.append((ahead - 2.0 * velocity + behind) / (h * h))
        return out

    # sampled quantities ----------------------------------------------

    def speed(self, u: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.derivatives(u, 1)[1], axis=-1)

    def curvature(self, u: np.ndarray) -> np.ndarray:
        d = self.derivatives(u, 2)
        cross = np.cross(d[1], d[2])
        return np.linalg.norm(cross, axis=-1) / np.linalg.norm(d[1], axis=-1) ** 3

    def sample_parameter(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Positions and raw first derivatives at parameters ``u``"""
        if self.closed:
            u = np.mod(u, self.period)
        d = self.derivatives(u, 1)
        return d[0], d[1]

    def sample_arclength(
        self, s: np.ndarray, polish: bool = False
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Positions and unit tangents at arc lengths ``s``"""
        u = self.table.u_of_s(self.wrap(s), polish=polish)
        d = self.derivatives(u, 1)
        return d[0], d[1] / np.linalg.norm(d[1], axis=-1)[..., None]

    def wrap(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.closed:
            return np.mod(s, self.length)
        return np.clip(s, 0.0, self.length)

    # derived curves --------------------------------------------------

    def transformed(
        self,
        origin: Optional[Sequence[float]] = None,
        rotation_vector: Optional[Sequence[float]] = None,
        scale: float = 1.0,
    ) -> 'ParametricLoop':
        """Apply x -> origin + scale * R x after the current placement"""
        rotation = np.eye(3)
        if rotation_vector is not None:
            rotation = Rotation.from_rotvec(rotation_vector).as_matrix()
        outer = scale * rotation
        shift = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
        return self._copy(origin=outer @ self.origin + shift, matrix=outer @ self.matrix)

    def scaled(self, factor: float) -> 'ParametricLoop':
        if factor <= 0:
            raise DomainError('homothety factor must be positive')
        return self.transformed(scale=factor)

    def reversed(self) -> 'ParametricLoop':
        return self._copy(reverse=not self.reverse)

    def _copy(self, **changes: Any) -> 'ParametricLoop':
        fields: Dict[str, Any] = dict(
            kind=self.kind,
            params=self.params,
            closed=self.closed,
            period=self.period,
            origin=self.origin,
            matrix=self.matrix,
            reverse=self.reverse,
            base=self.base,
        )
        fields.update(changes)
        return ParametricLoop(**fields)

    def to_spec(self) -> Dict[str, Any]:
        params = dict(self.params)
        if self.kind == 'offset':
            params['base'] = self.base.to_spec()
        spec: Dict[str, Any] = {'kind': self.kind, 'params': params}
        scale = self.scale
        if not (np.allclose(self.matrix, np.eye(3)) and np.allclose(self.origin, 0.0)):
            spec['transform'] = {
                'origin': self.origin.tolist(),
                'rotation_vector': Rotation.from_matrix(self.matrix / scale).as_rotvec().tolist(),
                'scale': scale,
            }
        if self.reverse:
            spec.setdefault('transform', {})['reverse'] = True
        return spec


def _frenet_arrays(d1: np.ndarray, d2: np.ndarray, d3: np.ndarray) -> Dict[str, np.ndarray]:
    speed = np.linalg.norm(d1, axis=-1)
    tangent = d1 / speed[..., None]
    cross = np.cross(d1, d2)
    cross_norm = np.linalg.norm(cross, axis=-1)
    flat = cross_norm <= 1e-14 * speed**2 * np.maximum(1.0, np.linalg.norm(d2, axis=-1))
    safe = np.where(flat, 1.0, cross_norm)
    binormal = cross / safe[..., None]
    if np.any(flat):
        # any unit vector normal to T will do where the curve is straight
        helper = np.where(
            (np.abs(tangent[..., 0]) < 0.9)[..., None],
            np.array([1.0, 0.0, 0.0]),
            np.array([0.0, 1.0, 0.0]),
        )
        fallback = np.cross(tangent, helper)
        fallback /= np.linalg.norm(fallback, axis=-1)[..., None]
        binormal = np.where(flat[..., None], fallback, binormal)
    normal = np.cross(binormal, tangent)
    curvature = np.where(flat, 0.0, cross_norm / speed**3)
    torsion = np.where(flat, 0.0, np.einsum('...i,...i->...', cross, d3) / safe**2)
    dcross = np.cross(d1, d3)
    dkappa_du = (
        np.einsum('...i,...i->...', cross, dcross) / (safe * speed**3)
        - 3.0 * cross_norm * np.einsum('...i,...i->...', d1, d2) / speed**5
    )
    return {
        'speed': speed,
        'tangent': tangent,
        'normal': normal,
        'binormal': binormal,
        'curvature': curvature,
        'torsion': torsion,
        'curvature_derivative': np.where(flat, 0.0, dkappa_du / speed),
    }


# curve library ---------------------------------------------------------


def circle(radius: float = 1.0) -> ParametricLoop:
    if radius <= 0:
        raise CurveSpecError('circle radius must be positive')
    return ParametricLoop('circle', {'radius': float(radius)}, True, 2.0 * math.pi)


def ellipse(a: float, b: float) -> ParametricLoop:
    if a <= 0 or b <= 0:
        raise CurveSpecError('ellipse semi-axes must be positive')
    return ParametricLoop('ellipse', {'a': float(a), 'b': float(b)}, True, 2.0 * math.pi)


def harmonic_knot(
    cos: Optional[Sequence[Sequence[float]]] = None, sin: Optional[Sequence[Sequence[float]]] = None
) -> ParametricLoop:
    """Closed curve given by a finite Fourier series; trefoil by default"""
    if cos is None and sin is None:
        cos, sin = TREFOIL_COS, TREFOIL_SIN
    params = {
        'cos': [list(map(float, row)) for row in (cos or [])],
        'sin': [list(map(float, row)) for row in (sin or [])],
    }
    if any(len(row) != 3 for row in params['cos'] + params['sin']):
        raise CurveSpecError('harmonic-knot coefficient rows must be 3-vectors')
    if not params['cos'] and not params['sin']:
        raise CurveSpecError('harmonic-knot needs at least one coefficient row')
    return ParametricLoop('harmonic-knot', params, True, 2.0 * math.pi)


def helix(radius: float, length: float, turns_per_length: float) -> ParametricLoop:
    """Open helix of ``turns_per_length * length`` whole turns around the z axis"""
    if radius <= 0 or length <= 0 or turns_per_length <= 0:
        raise CurveSpecError('helix radius, length and turns_per_length must be positive')
    turns = turns_per_length * length
    if abs(turns - round(turns)) > 1e-9:
        raise CurveSpecError(f'helix must have a whole number of turns, got {turns}')
    params = {
        'radius': float(radius),
        'length': float(length),
        'turns_per_length': float(turns_per_length),
    }
    return ParametricLoop('helix', params, False, float(length))


def line_segment(start: Sequence[float], end: Sequence[float]) -> ParametricLoop:
    params = {'start': [float(x) for x in start], 'end': [float(x) for x in end]}
    if np.allclose(params['start'], params['end']):
        raise DegenerateCurveError('line segment endpoints coincide')
    return ParametricLoop('line', params, False, 1.0)


# operations ------------------------------------------------------------


def eval_by_arclength(loop: ParametricLoop, s: float) -> FrenetData:
    if not loop.closed and not -1e-12 <= s <= loop.length + 1e-12:
        raise DomainError(f'arc length {s} outside [0, {loop.length}] on an open curve')
    u = loop.table.u_of_s(loop.wrap(np.array([s])), polish=True)
    d = loop.derivatives(u, 3)
    speed = float(np.linalg.norm(d[1]))
    if speed <= _SPEED_FLOOR:
        raise DegenerateCurveError(f'curve is not regular at s={s}')
    frame = _frenet_arrays(d[1], d[2], d[3])
    return FrenetData(
        point=d[0][0],
        tangent=frame['tangent'][0],
        normal=frame['normal'][0],
        binormal=frame['binormal'][0],
        curvature=float(frame['curvature'][0]),
        torsion=float(frame['torsion'][0]),
        curvature_derivative=float(frame['curvature_derivative'][0]),
    )


def curvature_by_differences(loop: ParametricLoop, s: float, step: Optional[float] = None) -> float:
    """|dT/ds| from centered differences of the unit tangent"""
    h = step or _DIFFERENCE_STEP * loop.length
    _, tangents = loop.sample_arclength(np.array([s - h, s + h]), polish=True)
    return float(np.linalg.norm(tangents[1] - tangents[0]) / (2.0 * h))


def total_arclength(loop: ParametricLoop) -> float:
    return loop.length


def curvature_sq_integral(loop: ParametricLoop, spec: Optional[QuadratureSpec] = None) -> float:
    """Integral of kappa^2 ds over the curve"""
    spec = spec or QuadratureSpec(rel_tol=1e-12)
    return integrate_1d(lambda u: loop.curvature(u) ** 2 * loop.speed(u), 0.0, loop.period, spec)


def chord_length(loop: ParametricLoop, s1: Any, s2: Any) -> Any:
    p1, _ = loop.sample_arclength(np.asarray(s1, dtype=float), polish=True)
    p2, _ = loop.sample_arclength(np.asarray(s2, dtype=float), polish=True)
    distance = np.linalg.norm(p1 - p2, axis=-1)
    return float(distance) if distance.ndim == 0 else distance


def minimal_separation(
    loop_a: ParametricLoop, loop_b: ParametricLoop, samples: int = 2048
) -> float:
    """Brute-force minimum distance between two curves on an arc-length grid"""
    sa = np.linspace(0.0, loop_a.length, samples, endpoint=not loop_a.closed)
    sb = np.linspace(0.0, loop_b.length, samples, endpoint=not loop_b.closed)
    pa, _ = loop_a.sample_arclength(sa)
    pb, _ = loop_b.sample_arclength(sb)
    best = math.inf
    for start in range(0, samples, 256):
        block = pa[start:start + 256]
        distance = np.linalg.norm(block[:, None, :] - pb[None, :, :], axis=-1)
        best = min(best, float(distance.min()))
    return best


def offset_curve(loop: ParametricLoop, delta: float) -> ParametricLoop:
    """The parallel curve x + delta N(x) along the principal normal"""
    if not loop.closed:
        raise UnsupportedCurveError('offset curves are defined for closed loops only')
    if delta < 0:
        raise DomainError('offset distance must be non-negative')
    kappa_min = loop.min_curvature
    if kappa_min <= 1e-9 * max(loop.max_curvature, 1e-300):
        raise UnsupportedCurveError('principal normal undefined where curvature vanishes')
    if delta == 0:
        return loop
    if delta >= 1.0 / loop.max_curvature:
        raise ProximityError(
            f'offset {delta} reaches the focal distance {1.0 / loop.max_curvature:.6g}'
        )
    shifted = ParametricLoop('offset', {'delta': float(delta)}, True, loop.period, base=loop)
    separation = minimal_separation(loop, shifted, samples=512)
    if separation <= 0.5 * delta:
        raise ProximityError(f'offset curve comes within {separation:.3g} of the base curve')
    return shifted
