"""
Catalog of bound profiles.

Every application reduces to one scalar inequality

    sum_i (sigma - l_i)^p <= K(p) * sum_i (sigma - l_i)^(p-1) * (a*l_i + b)

with K(p) = c for p <= 2 and K(p) = c*p/2 for p >= 2. A profile stores
(c, a, b) and the index origin of the eigenvalue count; the named
constructors below translate each geometric or physical setting into it.
"""
import json
import math
import numbers
import os
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
from loguru import logger
from numpy.polynomial import Polynomial

from errors import (BadAngle, BadDensity, BadDimension, BadLambda1, BadProfileSpec, BadRatio, DomainError,
                    InputError, NonPositiveP, NotSPD)
from util import coefficient_function

PROFILE_FIELDS = {'name', 'c', 'a', 'b', 'index_origin'}
SPD_PIVOT_TOL = 1e-12
STURM_DEFAULT_GRID = 10_000


@dataclass(frozen=True)
class BoundProfile:
    name: str
    c: float
    a: float = 1.0
    b: float = 0.0
    index_origin: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise InputError(f'profile {self.name!r}: coefficient c must be positive and finite, got {self.c}')
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InputError(f'profile {self.name!r}: weight a*lambda + b needs finite a and b')
        if isinstance(self.index_origin, bool) or self.index_origin not in (0, 1):
            raise InputError(f'profile {self.name!r}: index_origin must be 0 or 1')

    def weight(self, lam):
        return self.a * np.asarray(lam, dtype=float) + self.b

    def coefficient(self, p: float) -> float:
        """K(p); the two regimes meet at p = 2 where both give c."""
        if p <= 2:
            return self.c
        return self.c * p / 2.0

    def to_dict(self) -> dict:
        return asdict(self)


def _dimension(n, name='n', minimum=1) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Real) or not math.isfinite(n) or int(n) != n or n < minimum:
        raise BadDimension(f'{name} must be an integer >= {minimum}, got {n!r}')
    return int(n)


def classical_membrane(n) -> BoundProfile:
    n = _dimension(n)
    return BoundProfile(name=f'classical_membrane(n={n})', c=4.0 / n, a=1.0, b=0.0, index_origin=1)


def inhomogeneous_membrane(n, q_min, q_max) -> BoundProfile:
    n = _dimension(n)
    if not (q_min > 0) or not math.isfinite(q_max) or q_max < q_min:
        raise BadDensity(f'density bounds need 0 < q_min <= q_max < inf, got q_min={q_min}, q_max={q_max}')
    return BoundProfile(name=f'inhomogeneous_membrane(n={n},q_min={q_min:g},q_max={q_max:g})',
                        c=(4.0 / n) * (q_max / q_min), a=1.0, b=0.0, index_origin=1)


def sphere_cap_2d(theta) -> BoundProfile:
    if not (0 < theta < math.pi):
        raise BadAngle(f'outer radius must lie in (0, pi), got {theta}')
    return BoundProfile(name=f'sphere_cap_2d(theta={theta:g})', c=8.0 / (1.0 + math.cos(theta)) ** 2,
                        a=1.0, b=0.0, index_origin=1)


def sphere_n(n) -> BoundProfile:
    n = _dimension(n, minimum=2)
    return BoundProfile(name=f'sphere_n(n={n})', c=4.0 / n, a=1.0, b=n * n / 4.0, index_origin=1)


def hyperbolic_2d(y_sup2, y_inf2) -> BoundProfile:
    # constant weight; the c factor already carries the y ratio
    if not (y_inf2 > 0) or y_sup2 < y_inf2:
        raise BadRatio(f'need y_sup^2 >= y_inf^2 > 0, got {y_sup2} and {y_inf2}')
    return BoundProfile(name=f'hyperbolic_2d(ratio={y_sup2 / y_inf2:g})', c=2.0 * (y_sup2 / y_inf2),
                        a=0.0, b=1.0, index_origin=1)


def minimal_submanifold(n) -> BoundProfile:
    n = _dimension(n)
    return BoundProfile(name=f'minimal_submanifold(n={n})', c=4.0 / n, a=1.0, b=n * n / 4.0, index_origin=0)


def homogeneous_manifold(lambda1) -> BoundProfile:
    if not (lambda1 > 0) or not math.isfinite(lambda1):
        raise BadLambda1(f'the first nonzero eigenvalue must be positive, got {lambda1}')
    return BoundProfile(name=f'homogeneous_manifold(lambda1={lambda1:g})', c=4.0, a=1.0, b=lambda1 / 4.0,
                        index_origin=0)


def schrodinger_like(N, M) -> BoundProfile:
    N = _dimension(N, name='N')
    if not math.isfinite(M):
        raise InputError(f'potential lower bound must be finite, got {M}')
    return BoundProfile(name=f'schrodinger_like(N={N},M={M:g})', c=4.0 / N, a=1.0, b=-float(M), index_origin=1)


def commutator_bound(beta, gamma, N) -> BoundProfile:
    """Abstract commutator setting: c = 2*beta/(gamma*N), weight lambda."""
    N = _dimension(N, name='N')
    if not (beta > 0 and gamma > 0):
        raise DomainError(f'commutator constants need beta > 0 and gamma > 0, got {beta}, {gamma}')
    return BoundProfile(name=f'commutator_bound(beta={beta:g},gamma={gamma:g},N={N})',
                        c=2.0 * beta / (gamma * N), a=1.0, b=0.0, index_origin=1)


def elliptic_constant_coeff(A, b_vec, n=None) -> BoundProfile:
    """
    Constant-coefficient operator -div(A grad u) + b . grad u.

    The first-order term shifts every eigenvalue by |M^-1 b|^2 / 4 with
    M = sqrt(A); |A^(-1/2) b|^2 = b' A^-1 b = |L^-1 b|^2 for the Cholesky
    factor A = L L', so no matrix square root is formed.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b_vec = np.atleast_1d(np.asarray(b_vec, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSPD(f'A must be a square matrix, got shape {A.shape}')
    dim = A.shape[0]
    if n is not None and _dimension(n) != dim:
        raise BadDimension(f'n={n} does not match A of size {dim}')
    if b_vec.shape != (dim,):
        raise BadDimension(f'b_vec must have {dim} entries, got {b_vec.shape}')
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b_vec))):
        raise NotSPD('A and b_vec must be finite')
    if not np.allclose(A, A.T, rtol=1e-12, atol=0.0):
        raise NotSPD('A is not symmetric')
    try:
        L = scipy.linalg.cholesky(A, lower=True)
    except np.linalg.LinAlgError:
        raise NotSPD('A is not positive definite')
    pivots = np.diag(L) ** 2
    if np.any(pivots <= SPD_PIVOT_TOL * np.max(np.diag(A))):
        raise NotSPD(f'A is numerically singular: smallest pivot {pivots.min():.3e}')
    y = scipy.linalg.solve_triangular(L, b_vec, lower=True)
    s = float(np.dot(y, y))
    logger.debug(f'elliptic profile: b\'A^-1 b = {s!r}')
    return BoundProfile(name=f'elliptic_constant_coeff(n={dim})', c=4.0 / dim, a=1.0, b=-s / 4.0,
                        index_origin=1)


def potential_Q(p_fn, q_fn, x, dp_fn=None, d2p_fn=None, h=None) -> np.ndarray:
    """
    Q(x) = q(x) - p'(x)^2 / (16 p(x)) + p''(x) / 4.

    Derivatives come from dp_fn/d2p_fn when given, exactly from the polynomial
    when p_fn is a numpy Polynomial, and otherwise from central differences with
    step h.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p_fn(x), dtype=float) * np.ones_like(x)
    if dp_fn is None and isinstance(p_fn, Polynomial):
        dp_fn, d2p_fn = p_fn.deriv(1), p_fn.deriv(2)
    if dp_fn is not None:
        dp = np.asarray(dp_fn(x), dtype=float) * np.ones_like(x)
    else:
        dp = (np.asarray(p_fn(x + h)) - np.asarray(p_fn(x - h))) / (2 * h)
    if d2p_fn is not None:
        d2p = np.asarray(d2p_fn(x), dtype=float) * np.ones_like(x)
    else:
        d2p = (np.asarray(p_fn(x + h)) - 2 * p + np.asarray(p_fn(x - h))) / (h * h)
    q = np.asarray(q_fn(x), dtype=float) * np.ones_like(x)
    return q - dp ** 2 / (16.0 * p) + d2p / 4.0


def sturm_liouville(p_fn, q_fn, interval=(0.0, 1.0), grid=STURM_DEFAULT_GRID, dp_fn=None, d2p_fn=None) -> BoundProfile:
    """
    Profile of -(p u')' + q u = lambda u with Dirichlet ends.

    M is the minimum of Q over a uniform grid of `grid` points on the closed
    interval. A grid minimum can only overestimate the true infimum, which
    matters only if Q dips below grid scale.

    :param p_fn: p as a callable or a named coefficient form ("poly:1,0,1")
    :param q_fn: q as a callable or a named coefficient form
    :param interval: (a, b)
    :param grid: number of sample points
    :return: BoundProfile with c = 4 and weight lambda - M
    """
    lo, hi = (float(v) for v in interval)
    if not hi > lo:
        raise DomainError(f'interval must satisfy a < b, got {interval}')
    grid = _dimension(grid, name='grid', minimum=3)
    p_fn = coefficient_function(p_fn) if not callable(p_fn) else p_fn
    q_fn = coefficient_function(q_fn) if not callable(q_fn) else q_fn
    x = np.linspace(lo, hi, grid)
    p = np.asarray(p_fn(x), dtype=float) * np.ones_like(x)
    if np.any(~(p > 0)):
        bad = int(np.flatnonzero(~(p > 0))[0])
        raise NonPositiveP(f'p must be positive on the grid, p({x[bad]:g}) = {p[bad]}')
    Q = potential_Q(p_fn, q_fn, x, dp_fn=dp_fn, d2p_fn=d2p_fn, h=x[1] - x[0])
    M = float(np.min(Q))
    logger.debug(f'sturm-liouville profile: min Q = {M!r} at x = {x[int(np.argmin(Q))]:g}')
    return BoundProfile(name=f'sturm_liouville(M={M:g})', c=4.0, a=1.0, b=-M, index_origin=1)


PROFILE_KINDS = {
    'classical': classical_membrane,
    'inhomogeneous': inhomogeneous_membrane,
    'sphere_cap': sphere_cap_2d,
    'sphere': sphere_n,
    'hyperbolic': hyperbolic_2d,
    'minimal': minimal_submanifold,
    'homogeneous': homogeneous_manifold,
    'schrodinger': schrodinger_like,
    'commutator': commutator_bound,
    'elliptic': elliptic_constant_coeff,
    'sturm_liouville': sturm_liouville,
}

# inline spelling -> keyword argument of the constructor
INLINE_KEYS = {
    'classical': {'n': 'n'},
    'inhomogeneous': {'n': 'n', 'q_min': 'q_min', 'q_max': 'q_max'},
    'sphere_cap': {'theta': 'theta'},
    'sphere': {'n': 'n'},
    'hyperbolic': {'y_sup2': 'y_sup2', 'y_inf2': 'y_inf2'},
    'minimal': {'n': 'n'},
    'homogeneous': {'lambda1': 'lambda1'},
    'schrodinger': {'N': 'N', 'M': 'M'},
    'commutator': {'beta': 'beta', 'gamma': 'gamma', 'N': 'N'},
}


def parse_inline_profile(spec: str) -> BoundProfile:
    """
    Read the compact form kind:key=value,key=value, for example classical:n=2
    or schrodinger:N=3,M=1. Matrix and function valued profiles (elliptic,
    sturm_liouville) only come from JSON.
    """
    kind, _, body = spec.partition(':')
    kind = kind.strip()
    if kind not in INLINE_KEYS:
        raise BadProfileSpec(f'unknown inline profile kind {kind!r}; known: {sorted(INLINE_KEYS)}')
    kwargs = {}
    for item in filter(None, (s.strip() for s in body.split(','))):
        key, eq, value = item.partition('=')
        if not eq or key.strip() not in INLINE_KEYS[kind]:
            raise BadProfileSpec(f'bad entry {item!r} for profile {kind!r}; keys: {sorted(INLINE_KEYS[kind])}')
        try:
            kwargs[INLINE_KEYS[kind][key.strip()]] = float(value.strip())
        except ValueError:
            raise BadProfileSpec(f'value of {key!r} in {spec!r} is not a number')
    try:
        return PROFILE_KINDS[kind](**kwargs)
    except InputError:
        raise
    except (TypeError, ValueError) as e:
        raise BadProfileSpec(f'profile {spec!r}: {e}')


def profile_from_dict(data: dict) -> BoundProfile:
    if not isinstance(data, dict):
        raise BadProfileSpec('profile JSON must be an object')
    if 'kind' in data:
        kind = data['kind']
        if kind not in PROFILE_KINDS:
            raise BadProfileSpec(f'unknown profile kind {kind!r}; known: {sorted(PROFILE_KINDS)}')
        kwargs = {k: v for k, v in data.items() if k != 'kind'}
        if kind == 'sturm_liouville':
            kwargs = {'p_fn': kwargs.pop('p', None), 'q_fn': kwargs.pop('q', 'const:0'), **kwargs}
        try:
            return PROFILE_KINDS[kind](**kwargs)
        except InputError:
            raise
        except (TypeError, ValueError) as e:
            raise BadProfileSpec(f'profile kind {kind!r}: {e}')
    missing = PROFILE_FIELDS - set(data)
    unknown = set(data) - PROFILE_FIELDS
    if missing or unknown:
        raise BadProfileSpec(f'explicit profile needs exactly {sorted(PROFILE_FIELDS)}; '
                             f'missing {sorted(missing)}, unknown {sorted(unknown)}')
    origin = data['index_origin']
    if isinstance(origin, bool) or origin not in (0, 1):
        raise BadProfileSpec(f'index_origin must be 0 or 1, got {origin!r}')
    try:
        c, a, b = (float(data[k]) for k in ('c', 'a', 'b'))
    except (TypeError, ValueError):
        values = {k: data[k] for k in ('c', 'a', 'b')}
        raise BadProfileSpec(f'explicit profile needs numeric c, a and b, got {values}')
    return BoundProfile(name=str(data['name']), c=c, a=a, b=b, index_origin=int(origin))


def resolve_profile(spec: str) -> BoundProfile:
    """A profile argument is either a path to a JSON file or an inline spec."""
    if spec is None:
        raise BadProfileSpec('no profile given')
    if os.path.isfile(spec) or spec.endswith('.json'):
        try:
            with open(spec, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise BadProfileSpec(f'{spec} is not valid JSON: {e}')
        except OSError as e:
            raise BadProfileSpec(f'cannot read profile file {spec}: {e.strerror}')
        return profile_from_dict(data)
    return parse_inline_profile(spec)
