"""Composite Gauss-Legendre integration on curves and curve pairs.

Integrals over a curve pair are taken in the coordinates ``(s1, sigma)`` with
``sigma = s2 - s1``.  For a closed curve the inner ``s1`` integral is over a
full period and ``sigma`` runs over ``[eps, L - eps]``; for an open curve
``s1`` runs over ``[0, L - sigma]`` and both orderings of the pair are
summed.  The diagonal strip ``|s1 - s2| < eps`` is then a coordinate band,
so panel breakpoints can be placed exactly on its boundary.
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from loopind.errors import (
    ConfigError,
    DivergentDomainError,
    DomainError,
    FitError,
    ToleranceError,
)

logger = logging.getLogger(__name__)

PairKernel = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

MAX_PANEL_ORDER = 64
_AGM_TOL = 1e-16
_AGM_MAX_ITER = 64


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel layout and tolerances shared by every integral in the package.

    ``refinement_near_strip`` is the geometric grading factor for panels
    approaching a singular point; ``grading_layers`` is the number of graded
    panels placed below the base panel width when the singular point itself
    is part of the domain.
    """

    panel_order: int = 16
    panels_per_unit_arclength: float = 8.0
    refinement_near_strip: float = 2.0
    grading_layers: int = 6
    abs_tol: float = 1e-12
    rel_tol: float = 1e-8
    max_refinements: int = 6

    def __post_init__(self) -> None:
        if not 2 <= self.panel_order <= MAX_PANEL_ORDER:
            raise ConfigError(
                f'panel_order must be in [2, {MAX_PANEL_ORDER}], got {self.panel_order}'
            )
        if self.panels_per_unit_arclength <= 0:
            raise ConfigError('panels_per_unit_arclength must be positive')
        if self.refinement_near_strip < 1:
            raise ConfigError('refinement_near_strip must be >= 1')
        if self.grading_layers < 0 or self.max_refinements < 0:
            raise ConfigError('grading_layers and max_refinements must be >= 0')
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ConfigError('tolerances must be positive')

    @classmethod
    def from_config(cls, cfg: Any) -> 'QuadratureSpec':
        """Build from a config class or a Flask config mapping"""
        get = cfg.get if isinstance(cfg, Mapping) else lambda key: getattr(cfg, key)
        return cls(
            panel_order=int(get('QUADRATURE_ORDER')),
            panels_per_unit_arclength=float(get('PANELS_PER_UNIT_ARCLENGTH')),
            refinement_near_strip=float(get('GRADING_FACTOR')),
            grading_layers=int(get('GRADING_LAYERS')),
            abs_tol=float(get('ABS_TOL')),
            rel_tol=float(get('REL_TOL')),
        )

    @property
    def panel_width(self) -> float:
        return 1.0 / self.panels_per_unit_arclength

    def panel_count(self, length: float) -> int:
        return max(1, int(math.ceil(length * self.panels_per_unit_arclength)))

    def to_dict(self) -> dict:
        return {
            'panel_order': self.panel_order,
            'panels_per_unit_arclength': self.panels_per_unit_arclength,
            'refinement_near_strip': self.refinement_near_strip,
            'grading_layers': self.grading_layers,
            'abs_tol': self.abs_tol,
            'rel_tol': self.rel_tol,
        }


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=256)
def gauss_jacobi(order: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight (1 - x)**alpha * (1 + x)**beta on [-1, 1]"""
    nodes, weights = special.roots_jacobi(order, alpha, beta)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(breakpoints: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints"""
    edges = np.asarray(breakpoints, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def uniform_breakpoints(a: float, b: float, width: float) -> np.ndarray:
    count = max(1, int(math.ceil((b - a) / width - 1e-12)))
    return np.linspace(a, b, count + 1)


def graded_breakpoints(
    lo: float, hi: float, spec: QuadratureSpec, anchors: Iterable[float] = ()
) -> np.ndarray:
    """Breakpoints on [lo, hi] for an integrand singular at 0 (0 < lo < hi).

    Panels grow geometrically with ``spec.refinement_near_strip`` until they
    reach the base width, then stay uniform.  Anchors inside the interval are
    added as extra breakpoints.
    """
    if lo <= 0 or hi <= lo:
        raise DomainError(f'graded interval must satisfy 0 < lo < hi, got [{lo}, {hi}]')
    width = spec.panel_width
    grading = spec.refinement_near_strip
    points = [lo]
    b = lo
    while b < hi:
        step = width if grading <= 1 else min(b * (grading - 1), width)
        b = min(b + step, hi)
        points.append(b)
    points.extend(a for a in anchors if lo < a < hi)
    return np.unique(np.asarray(points, dtype=float))


def _singular_panel(
    a: float, b: float, exponent: float, order: int, singular_end: str
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for functions behaving like |x - end|**exponent.

    The weights integrate ``f`` directly: Gauss-Jacobi weights are divided by
    the modulus factor at each node, so the caller evaluates ``f`` itself.
    """
    if singular_end == 'left':
        x, w = gauss_jacobi(order, 0.0, exponent)
    else:
        x, w = gauss_jacobi(order, exponent, 0.0)
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    distance = nodes - a if singular_end == 'left' else b - nodes
    weights = w * half ** (exponent + 1.0) / distance**exponent
    return nodes, weights


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: Optional[QuadratureSpec] = None,
    breakpoints: Optional[Sequence[float]] = None,
) -> float:
    """Composite Gauss-Legendre integral of a vectorised integrand.

    The error is estimated by doubling the order on the same panels; panels
    are halved until the estimate meets ``max(abs_tol, rel_tol * |I|)``.
    """
    spec = spec or QuadratureSpec()
    if a == b:
        return 0.0
    if breakpoints is None:
        edges = uniform_breakpoints(a, b, spec.panel_width)
    else:
        edges = np.unique(np.concatenate(([a, b], np.asarray(breakpoints, dtype=float))))
    order = spec.panel_order
    high = min(2 * order, MAX_PANEL_ORDER)
    estimate = math.inf
    for _ in range(spec.max_refinements + 1):
        nodes, weights = panel_rule(edges, order)
        coarse = float(np.dot(weights, f(nodes)))
        nodes, weights = panel_rule(edges, high)
        fine = float(np.dot(weights, f(nodes)))
        estimate = abs(fine - coarse)
        if estimate <= max(spec.abs_tol, spec.rel_tol * abs(fine)):
            return fine
        edges = np.sort(np.concatenate((edges, 0.5 * (edges[1:] + edges[:-1]))))
    raise ToleranceError(
        f'integral over [{a}, {b}] did not converge (error estimate {estimate:.3e})'
    )


def _self_pair_profile(
    loop: Any, kernel: PairKernel, sigma: np.ndarray, spec: QuadratureSpec
) -> np.ndarray:
    """G(sigma) = integral over s1 of kernel(s1, s1 + sigma), per sigma node"""
    length = loop.length
    n_panels = spec.panel_count(length)
    profile = np.empty(sigma.shape)
    chunk = spec.panel_order
    if loop.closed:
        s1, w1 = panel_rule(np.linspace(0.0, length, n_panels + 1), spec.panel_order)
        p1, t1 = loop.sample_arclength(s1)
        for start in range(0, sigma.size, chunk):
            block = sigma[start:start + chunk]
            p2, t2 = loop.sample_arclength(s1[None, :] + block[:, None])
            values = kernel(p1[None, :, :] - p2, t1[None, :, :], t2)
            profile[start:start + chunk] = values @ w1
        return profile

    x, w = panel_rule(np.linspace(0.0, 1.0, n_panels + 1), spec.panel_order)
    for start in range(0, sigma.size, chunk):
        block = sigma[start:start + chunk]
        span = length - block
        s1 = span[:, None] * x[None, :]
        p1, t1 = loop.sample_arclength(s1)
        p2, t2 = loop.sample_arclength(s1 + block[:, None])
        values = kernel(p1 - p2, t1, t2) + kernel(p2 - p1, t2, t1)
        profile[start:start + chunk] = span * (values @ w)
    return profile


def strip_sweep(
    loop: Any,
    kernel: PairKernel,
    eps_schedule: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """Strip-excluded self integrals for every exclusion width in one pass.

    Every width of the schedule is a panel breakpoint, so each result is a
    partial sum over the same evaluations of the pair profile.
    """
    spec = spec or QuadratureSpec()
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.size == 0:
        return eps
    if np.any(eps <= 0):
        raise DivergentDomainError('self-pair integral needs an exclusion width eps > 0')
    length = loop.length
    upper = 0.5 * length if loop.closed else length
    if np.any(eps >= upper):
        raise DomainError(f'exclusion width must stay below {upper:.6g}')
    left = graded_breakpoints(float(eps.min()), upper, spec, anchors=eps)
    if loop.closed:
        edges = np.unique(np.concatenate((left, length - left)))
    else:
        edges = left
    sigma, weights = panel_rule(edges, spec.panel_order)
    logger.debug('strip sweep: %d sigma panels, %d widths', edges.size - 1, eps.size)
    contributions = weights * _self_pair_profile(loop, kernel, sigma, spec)
    results = np.empty(eps.size)
    for k, width in enumerate(eps):
        if loop.closed:
            mask = (sigma > width) & (sigma < length - width)
        else:
            mask = sigma > width
        results[k] = contributions[mask].sum()
    return results


def integrate_pair_weakly_singular(
    loop: Any, kernel: PairKernel, exponent: float, spec: Optional[QuadratureSpec] = None
) -> float:
    """Self integral of a kernel behaving like |s1 - s2|**exponent, exponent > -1.

    The panel touching the diagonal uses Gauss-Jacobi nodes for that power;
    graded panels follow up to the base width.
    """
    spec = spec or QuadratureSpec()
    if exponent <= -1:
        raise DomainError(f'diagonal exponent must exceed -1, got {exponent}')
    length = loop.length
    grading = spec.refinement_near_strip
    first = spec.panel_width / grading**spec.grading_layers if grading > 1 else spec.panel_width
    upper = 0.5 * length if loop.closed else length
    first = min(first, 0.5 * upper)
    order = spec.panel_order
    nodes, weights = [], []
    x, w = _singular_panel(0.0, first, exponent, order, 'left')
    nodes.append(x)
    weights.append(w)
    x, w = panel_rule(graded_breakpoints(first, upper, spec), order)
    nodes.append(x)
    weights.append(w)
    if loop.closed:
        x, w = panel_rule(length - graded_breakpoints(first, upper, spec)[::-1], order)
        nodes.append(x)
        weights.append(w)
        x, w = _singular_panel(length - first, length, exponent, order, 'right')
        nodes.append(x)
        weights.append(w)
    sigma = np.concatenate(nodes)
    total = np.concatenate(weights) @ _self_pair_profile(loop, kernel, sigma, spec)
    return float(total)


def integrate_pair(
    loop_a: Any,
    loop_b: Any,
    kernel: PairKernel,
    spec: Optional[QuadratureSpec] = None,
    aligned_scale: Optional[float] = None,
) -> float:
    """Double integral over two disjoint curves.

    With ``aligned_scale`` the curves share a raw parameter and approach each
    other along ``u1 = u2`` (an offset pair); the integral is then taken in
    ``(u, du)`` with panels graded toward ``du = 0`` starting at that distance.
    Otherwise the error estimate of :func:`integrate_pair_with_error` is logged.
    """
    spec = spec or QuadratureSpec()
    if aligned_scale is not None:
        return _integrate_aligned_pair(loop_a, loop_b, kernel, spec, aligned_scale)
    total, estimate = integrate_pair_with_error(loop_a, loop_b, kernel, spec)
    if estimate > max(spec.abs_tol, spec.rel_tol * abs(total)):
        logger.warning(
            'pair integral %.10g has error estimate %.3e; refine the panels', total, estimate
        )
    else:
        logger.debug('pair integral %.10g, error estimate %.3e', total, estimate)
    return total


def integrate_pair_with_error(
    loop_a: Any, loop_b: Any, kernel: PairKernel, spec: Optional[QuadratureSpec] = None
) -> Tuple[float, float]:
    """Pair integral on fixed panels and the difference to half the order on them"""
    spec = spec or QuadratureSpec()
    order = spec.panel_order
    total = _pair_sum(loop_a, loop_b, kernel, spec, order)
    coarse = _pair_sum(loop_a, loop_b, kernel, spec, max(1, order // 2))
    return total, abs(total - coarse)


def _pair_sum(
    loop_a: Any, loop_b: Any, kernel: PairKernel, spec: QuadratureSpec, order: int
) -> float:
    sa, wa = panel_rule(np.linspace(0.0, loop_a.length, spec.panel_count(loop_a.length) + 1), order)
    sb, wb = panel_rule(np.linspace(0.0, loop_b.length, spec.panel_count(loop_b.length) + 1), order)
    pa, ta = loop_a.sample_arclength(sa)
    pb, tb = loop_b.sample_arclength(sb)
    total = 0.0
    rows = max(1, 2**20 // max(1, sb.size))
    for start in range(0, sa.size, rows):
        block = slice(start, start + rows)
        values = kernel(pa[block, None, :] - pb[None, :, :], ta[block, None, :], tb[None, :, :])
        total += float(wa[block] @ values @ wb)
    return total


def _integrate_aligned_pair(
    loop_a: Any, loop_b: Any, kernel: PairKernel, spec: QuadratureSpec, scale: float
) -> float:
    period = loop_a.period
    if not (loop_a.closed and loop_b.closed) or not math.isclose(period, loop_b.period):
        raise DomainError('aligned pair integration needs two closed curves with one period')
    speed = loop_a.max_speed
    order = spec.panel_order
    half = 0.5 * period
    start = min(scale / speed, 0.25 * half)
    coarse = replace(spec, panels_per_unit_arclength=spec.panels_per_unit_arclength * speed)
    positive = np.concatenate(([0.0], graded_breakpoints(start, half, coarse)))
    edges = np.unique(np.concatenate((-positive[::-1], positive)))
    du, wdu = panel_rule(edges, order)
    u1, w1 = panel_rule(np.linspace(0.0, period, coarse.panel_count(period) + 1), order)
    p1, d1 = loop_a.sample_parameter(u1)
    total = 0.0
    for start_row in range(0, du.size, order):
        block = slice(start_row, start_row + order)
        p2, d2 = loop_b.sample_parameter(u1[None, :] + du[block, None])
        values = kernel(p1[None, :, :] - p2, d1[None, :, :], d2)
        total += float(wdu[block] @ values @ w1)
    return total


def integrate_pair_minus_strip(
    loop_a: Any,
    loop_b: Any,
    kernel: PairKernel,
    eps: float,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """Pair integral with the diagonal band |s1 - s2| < eps removed.

    For two distinct curves ``eps`` is ignored and the full product domain is
    integrated.
    """
    if loop_a is loop_b:
        if eps <= 0:
            raise DivergentDomainError('identical loops need eps > 0')
        return float(strip_sweep(loop_a, kernel, [eps], spec)[0])
    return integrate_pair(loop_a, loop_b, kernel, spec)


def elliptic_K(m: float, method: str = 'scipy', spec: Optional[QuadratureSpec] = None) -> float:
    """K(m) = integral of 1/sqrt(1 - m sin^2 t) over [0, pi/2], parameter m < 1.

    Parameter convention, as in ``scipy.special.ellipk``; the modulus k of
    classical tables is ``m = k**2``.
    """
    if m >= 1:
        raise DomainError(f'K(m) diverges for m >= 1, got m={m}')
    if method == 'scipy':
        return float(special.ellipk(m))
    if method == 'agm':
        return _agm(m)[0]
    if method == 'quadrature':
        def integrand(t: np.ndarray) -> np.ndarray:
            return 1.0 / np.sqrt(1.0 - m * np.sin(t) ** 2)

        return integrate_1d(integrand, 0.0, 0.5 * math.pi, spec or _REFERENCE)
    raise ConfigError(f'unknown elliptic method {method!r}')


def elliptic_E(m: float, method: str = 'scipy', spec: Optional[QuadratureSpec] = None) -> float:
    """E(m) = integral of sqrt(1 - m sin^2 t) over [0, pi/2], parameter m <= 1"""
    if m > 1:
        raise DomainError(f'E(m) is not real for m > 1, got m={m}')
    if method == 'scipy':
        return float(special.ellipe(m))
    if method == 'agm':
        return 1.0 if m == 1 else _agm(m)[1]
    if method == 'quadrature':
        return integrate_1d(
            lambda t: np.sqrt(1.0 - m * np.sin(t) ** 2), 0.0, 0.5 * math.pi, spec or _REFERENCE
        )
    raise ConfigError(f'unknown elliptic method {method!r}')


def elliptic_K_modulus(k: float, method: str = 'scipy') -> float:
    return elliptic_K(k * k, method)


def elliptic_E_modulus(k: float, method: str = 'scipy') -> float:
    return elliptic_E(k * k, method)


def _agm(m: float) -> Tuple[float, float]:
    # K = pi / (2 AGM(1, sqrt(1 - m))),  E = K (1 - sum 2^(n-1) c_n^2),  c_0^2 = m
    a, b = 1.0, math.sqrt(1.0 - m)
    total = 0.5 * m
    weight = 0.5
    for _ in range(_AGM_MAX_ITER):
        c = 0.5 * (a - b)
        if abs(c) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        total += weight * c * c
    else:
        raise ToleranceError(f'AGM iteration did not converge for m={m}')
    k_value = 0.5 * math.pi / a
    return k_value, k_value * (1.0 - total)


_REFERENCE = QuadratureSpec(panel_order=24, abs_tol=1e-15, rel_tol=1e-13)


def fit_weighted(
    design: np.ndarray, values: np.ndarray, weights: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted least squares; returns (coefficients, residuals)"""
    root = np.sqrt(weights)
    coefficients, *_ = np.linalg.lstsq(design * root[:, None], values * root, rcond=None)
    return coefficients, values - design @ coefficients


def fit_series(
    columns: Dict[str, np.ndarray], values: np.ndarray, weights: np.ndarray
) -> Dict[str, float]:
    """Named weighted least-squares fit of ``values`` on the given columns"""
    design = np.column_stack([np.asarray(c, dtype=float) for c in columns.values()])
    if design.shape[0] < design.shape[1]:
        raise FitError(
            f'{design.shape[0]} samples cannot determine {design.shape[1]} coefficients'
        )
    if np.linalg.matrix_rank(design * np.sqrt(weights)[:, None]) < design.shape[1]:
        raise FitError('fit design is singular; schedule values must be distinct')
    coefficients, _ = fit_weighted(design, np.asarray(values, dtype=float), weights)
    return {name: float(c) for name, c in zip(columns, coefficients)}
