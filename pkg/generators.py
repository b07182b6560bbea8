"""
Spectra with known ground truth: analytic boxes, finite-difference Dirichlet
Laplacians in 1D and 2D, Sturm-Liouville and inhomogeneous-density problems.

Discrete problems are assembled as symmetric tridiagonal matrices and their
smallest eigenvalues found by Sturm-sequence bisection, which certifies each
eigenvalue's index by counting.
"""
import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from errors import BadSourceSpec, CountTooLarge, DomainError, GeneratorMismatch, InputError, NonPositiveDensity, \
    NonPositiveP
from profiles import BoundProfile, classical_membrane, inhomogeneous_membrane, sturm_liouville
from spectra import Spectrum, make_spectrum
from util import coefficient_function, compensated_sum

EPS = np.finfo(float).eps
PIVOT_FLOOR = 1e-300
MAX_STURM_BISECTIONS = 256
CROSS_CHECK_RTOL = 1e-10
STURM_ERROR_FACTOR = 16


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float).ravel()
        offdiag = np.asarray(self.offdiag, dtype=float).ravel()
        if diag.size == 0:
            raise InputError('a tridiagonal matrix needs at least one diagonal entry')
        if offdiag.size != diag.size - 1:
            raise InputError(f'offdiag must have {diag.size - 1} entries, got {offdiag.size}')
        if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(offdiag))):
            raise InputError('tridiagonal entries must be finite')
        object.__setattr__(self, 'diag', diag)
        object.__setattr__(self, 'offdiag', offdiag)

    @property
    def n(self) -> int:
        return self.diag.size

    def gershgorin_bounds(self):
        radius = np.zeros(self.n)
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))

    def sturm_count(self, shifts) -> np.ndarray:
        """
        Number of eigenvalues strictly below each shift x: the count of negative
        pivots in d_1 = a_1 - x, d_i = (a_i - x) - b_(i-1)^2 / d_(i-1). A zero
        pivot is replaced by -tiny, which keeps the count correct.
        """
        shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
        scale = max(1.0, float(np.max(np.abs(self.diag))), float(np.max(np.abs(self.offdiag), initial=0.0)))
        tiny = PIVOT_FLOOR * scale
        b2 = self.offdiag ** 2
        d = self.diag[0] - shifts
        d = np.where(d == 0, -tiny, d)
        count = (d < 0).astype(int)
        # a pivot of -tiny can overflow the next one to +inf, which still counts correctly
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            for i in range(1, self.n):
                d = (self.diag[i] - shifts) - b2[i - 1] / d
                d = np.where(d == 0, -tiny, d)
                count += d < 0
        return count


def tridiag_eigenvalues(T: TridiagonalMatrix, count: int) -> np.ndarray:
    """
    The `count` smallest eigenvalues of a symmetric tridiagonal matrix.

    All eigenvalues are bisected at once from the Gershgorin interval; the k-th
    (0-based) keeps hi where more than k eigenvalues lie below and lo otherwise.
    Bisection stops at |hi - lo| <= 4 eps |lambda| (absolute floor 1e-3 eps
    times the Gershgorin width), but the Sturm counts themselves carry a
    backward error of order eps ||T||, so a small eigenvalue of a stiff matrix
    is only good to about that absolute size; see sturm_error_bound.
    """
    if count < 1 or count > T.n:
        raise CountTooLarge(f'asked for {count} eigenvalues of a {T.n}x{T.n} matrix')
    g_lo, g_hi = T.gershgorin_bounds()
    width = max(g_hi - g_lo, PIVOT_FLOOR)
    # widen slightly so the endpoints are strict
    g_lo -= 1e-12 * width + PIVOT_FLOOR
    g_hi += 1e-12 * width + PIVOT_FLOOR
    index = np.arange(count)
    lo = np.full(count, g_lo)
    hi = np.full(count, g_hi)
    atol = 1e-3 * EPS * width
    for iteration in range(MAX_STURM_BISECTIONS):
        mid = 0.5 * (lo + hi)
        above = T.sturm_count(mid) > index
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= np.maximum(4 * EPS * np.maximum(np.abs(lo), np.abs(hi)), atol)):
            break
    else:
        logger.warning(f'Sturm bisection hit {MAX_STURM_BISECTIONS} iterations')
    logger.debug(f'Sturm bisection: {count} eigenvalues of n={T.n} in {iteration + 1} sweeps')
    return np.sort(0.5 * (lo + hi))


def box_spectrum(sides, count: int) -> Spectrum:
    """
    Smallest `count` Dirichlet eigenvalues pi^2 sum_j (k_j / a_j)^2 of a box.

    Every lattice point with energy below the cutoff is enumerated, so once at
    least `count` of them are found the smallest are certified; otherwise the
    cutoff doubles.
    """
    sides = np.atleast_1d(np.asarray(sides, dtype=float))
    if sides.size == 0 or np.any(~(sides > 0)):
        raise DomainError(f'box sides must be positive, got {sides.tolist()}')
    if count < 1:
        raise InputError(f'count must be at least 1, got {count}')
    inv2 = (1.0 / sides) ** 2
    cutoff = 2.0 * math.pi ** 2 * float(np.sum(inv2))
    while True:
        ranges = [np.arange(1, int(math.floor(a * math.sqrt(cutoff) / math.pi)) + 2) for a in sides]
        if all(r.size for r in ranges):
            mesh = np.meshgrid(*ranges, indexing='ij')
            energy = math.pi ** 2 * sum(k.astype(float) ** 2 * w for k, w in zip(mesh, inv2))
            energy = energy[energy < cutoff]
            if energy.size >= count:
                values = np.sort(energy, kind='stable')[:count]
                return make_spectrum(values, index_origin=1)
        cutoff *= 2.0
        logger.debug(f'box lattice: raising cutoff to {cutoff:g}')


def sturm_error_bound(T: TridiagonalMatrix) -> float:
    """Absolute accuracy of Sturm-bisection eigenvalues: a small multiple of eps ||T||."""
    g_lo, g_hi = T.gershgorin_bounds()
    return STURM_ERROR_FACTOR * EPS * max(abs(g_lo), abs(g_hi))


def fd_1d_closed_form(length: float, n: int, count: int) -> np.ndarray:
    """(4/h^2) sin^2(k pi / (2(n+1))) = (2/h^2)(1 - cos(k pi / (n+1))), h = L/(n+1)."""
    h = length / (n + 1)
    k = np.arange(1, count + 1)
    return (4.0 / h ** 2) * np.sin(k * math.pi / (2 * (n + 1))) ** 2


def laplacian_1d_matrix(length: float, n: int) -> TridiagonalMatrix:
    h = length / (n + 1)
    return TridiagonalMatrix(np.full(n, 2.0 / h ** 2), np.full(n - 1, -1.0 / h ** 2))


def _check_grid(length, n, count):
    if not length > 0:
        raise DomainError(f'length must be positive, got {length}')
    if n < 1:
        raise InputError(f'grid size must be at least 1, got {n}')
    if count < 1:
        raise InputError(f'count must be at least 1, got {count}')
    if count > n:
        raise CountTooLarge(f'a grid of {n} interior points has only {n} modes, asked for {count}')


def fd_laplacian_1d(length: float, n: int, count: int) -> Spectrum:
    """Closed-form FD eigenvalues, cross-checked against Sturm bisection."""
    _check_grid(length, n, count)
    values = fd_1d_closed_form(length, n, count)
    T = laplacian_1d_matrix(length, n)
    numeric = tridiag_eigenvalues(T, count)
    mismatch = np.abs(numeric - values) / values
    allowed = np.maximum(CROSS_CHECK_RTOL, sturm_error_bound(T) / values)
    if np.any(mismatch > allowed):
        raise GeneratorMismatch(f'closed form and Sturm bisection disagree by {mismatch.max():.3e} relative')
    logger.debug(f'fd_1d cross-check: max relative difference {mismatch.max():.3e}')
    return make_spectrum(values, index_origin=1)


def fd_laplacian_2d_kronecker(lx: float, ly: float, nx: int, ny: int, count: int) -> Spectrum:
    """
    Smallest `count` eigenvalues of the 5-point Laplacian on an nx by ny grid:
    all sums mu_j + nu_k of the 1D eigenvalues, merged through a heap.
    """
    if not (lx > 0 and ly > 0):
        raise DomainError(f'side lengths must be positive, got {lx}, {ly}')
    if nx < 1 or ny < 1 or count < 1:
        raise InputError('grid sizes and count must be at least 1')
    if count > nx * ny:
        raise CountTooLarge(f'a {nx}x{ny} grid has {nx * ny} modes, asked for {count}')
    mu = fd_1d_closed_form(lx, nx, min(count, nx))
    nu = fd_1d_closed_form(ly, ny, min(count, ny))
    heap = [(mu[0] + nu[0], 0, 0)]
    seen = {(0, 0)}
    values = []
    while len(values) < count:
        value, j, k = heapq.heappop(heap)
        values.append(value)
        for jj, kk in ((j + 1, k), (j, k + 1)):
            if jj < mu.size and kk < nu.size and (jj, kk) not in seen:
                seen.add((jj, kk))
                heapq.heappush(heap, (mu[jj] + nu[kk], jj, kk))
    return make_spectrum(values, index_origin=1)


def _sample(fn, x) -> np.ndarray:
    fn = fn if callable(fn) else coefficient_function(fn)
    return np.asarray(fn(x), dtype=float) * np.ones_like(x)


def sturm_liouville_matrix(p_fn, q_fn, interval, n: int) -> TridiagonalMatrix:
    """
    Symmetric stencil for -(p u')' + q u with Dirichlet ends: p at the cell
    midpoints x_(j +- 1/2), q at the nodes.
    """
    a, b = (float(v) for v in interval)
    if not b > a:
        raise DomainError(f'interval must satisfy a < b, got {interval}')
    h = (b - a) / (n + 1)
    nodes = a + h * np.arange(1, n + 1)
    midpoints = a + h * (np.arange(n + 1) + 0.5)
    p_mid = _sample(p_fn, midpoints)
    if np.any(~(p_mid > 0)):
        bad = int(np.flatnonzero(~(p_mid > 0))[0])
        raise NonPositiveP(f'p must be positive on the grid, p({midpoints[bad]:g}) = {p_mid[bad]}')
    q = _sample(q_fn, nodes)
    diag = (p_mid[:-1] + p_mid[1:]) / h ** 2 + q
    offdiag = -p_mid[1:-1] / h ** 2
    return TridiagonalMatrix(diag, offdiag)


def sturm_liouville_fd(p_fn, q_fn, interval, n: int, count: int) -> Spectrum:
    _check_grid(interval[1] - interval[0], n, count)
    T = sturm_liouville_matrix(p_fn, q_fn, interval, n)
    return make_spectrum(tridiag_eigenvalues(T, count), index_origin=1)


def density_samples(q_density, interval, n: int) -> np.ndarray:
    a, b = (float(v) for v in interval)
    h = (b - a) / (n + 1)
    return _sample(q_density, a + h * np.arange(1, n + 1))


def inhomogeneous_fd_1d(q_density, interval, n: int, count: int) -> Spectrum:
    """
    -u'' = lambda q u, discretized as A u = lambda D u with D = diag(q_j), and
    solved in the symmetric form D^(-1/2) A D^(-1/2), which has the same
    eigenvalues.
    """
    a, b = (float(v) for v in interval)
    _check_grid(b - a, n, count)
    q = density_samples(q_density, interval, n)
    if np.any(~(q > 0)):
        raise NonPositiveDensity(f'density must be positive on the grid, min sample {q.min()}')
    h = (b - a) / (n + 1)
    diag = 2.0 / (h ** 2 * q)
    offdiag = -1.0 / (h ** 2 * np.sqrt(q[:-1] * q[1:]))
    return make_spectrum(tridiag_eigenvalues(TridiagonalMatrix(diag, offdiag), count), index_origin=1)


def trace_gap(T: TridiagonalMatrix) -> float:
    """|sum of all eigenvalues - trace|, a whole-spectrum sanity check."""
    return abs(compensated_sum(tridiag_eigenvalues(T, T.n)) - compensated_sum(T.diag))


SOURCE_KINDS = {
    'box_analytic': {'sides'},
    'fd_1d': {'length', 'grid'},
    'fd_2d_kronecker': {'lx', 'ly', 'nx', 'ny'},
    'sturm_liouville_fd': {'p', 'q', 'interval', 'grid'},
    'inhomogeneous_fd_1d': {'density', 'interval', 'grid'},
}

SOURCE_ALIASES = {
    'box': 'box_analytic',
    'fd1d': 'fd_1d',
    'fd2d': 'fd_2d_kronecker',
    'sturm': 'sturm_liouville_fd',
    'inhomogeneous': 'inhomogeneous_fd_1d',
}

MIN_GRID = 3


@dataclass(frozen=True)
class SpectrumSource:
    kind: str
    count: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = SOURCE_ALIASES.get(self.kind, self.kind)
        if kind not in SOURCE_KINDS:
            raise BadSourceSpec(f'unknown spectrum source {self.kind!r}; known: {sorted(SOURCE_KINDS)}')
        object.__setattr__(self, 'kind', kind)
        missing = SOURCE_KINDS[kind] - set(self.params)
        unknown = set(self.params) - SOURCE_KINDS[kind]
        if missing or unknown:
            raise BadSourceSpec(f'{kind} needs {sorted(SOURCE_KINDS[kind])}; '
                                f'missing {sorted(missing)}, unknown {sorted(unknown)}')
        if not _is_integer(self.count) or self.count < 1:
            raise BadSourceSpec(f'count must be a positive integer, got {self.count!r}')
        for key in ('grid', 'nx', 'ny'):
            if key in self.params and (not _is_integer(self.params[key]) or self.params[key] < MIN_GRID):
                raise BadSourceSpec(f'{key} must be an integer of at least {MIN_GRID}, got {self.params[key]!r}')

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'count': self.count, **self.params}


def _is_integer(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and float(value).is_integer()


def source_from_dict(data: dict) -> SpectrumSource:
    if not isinstance(data, dict) or 'kind' not in data or 'count' not in data:
        raise BadSourceSpec('a spectrum source needs "kind" and "count"')
    params = {k: v for k, v in data.items() if k not in ('kind', 'count')}
    return SpectrumSource(kind=data['kind'], count=data['count'], params=params)


def generate(source: SpectrumSource) -> Spectrum:
    try:
        return _dispatch(source)
    except (TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise BadSourceSpec(f'bad parameters for {source.kind}: {e}')


def _dispatch(source: SpectrumSource) -> Spectrum:
    params, count = source.params, int(source.count)
    if source.kind == 'box_analytic':
        return box_spectrum(params['sides'], count)
    if source.kind == 'fd_1d':
        return fd_laplacian_1d(float(params['length']), int(params['grid']), count)
    if source.kind == 'fd_2d_kronecker':
        return fd_laplacian_2d_kronecker(float(params['lx']), float(params['ly']), int(params['nx']),
                                         int(params['ny']), count)
    if source.kind == 'sturm_liouville_fd':
        return sturm_liouville_fd(params['p'], params['q'], tuple(params['interval']), int(params['grid']), count)
    return inhomogeneous_fd_1d(params['density'], tuple(params['interval']), int(params['grid']), count)


def construction_profile(source: SpectrumSource) -> BoundProfile:
    """
    The bound profile a generated spectrum is known to satisfy: the classical
    membrane in the box dimension for Laplacians, the Sturm-Liouville profile
    for -(p u')' + q u, and the inhomogeneous membrane with the density range
    sampled on the same grid for -u'' = lambda q u.
    """
    params = source.params
    if source.kind == 'box_analytic':
        return classical_membrane(len(np.atleast_1d(params['sides'])))
    if source.kind == 'fd_1d':
        return classical_membrane(1)
    if source.kind == 'fd_2d_kronecker':
        return classical_membrane(2)
    if source.kind == 'sturm_liouville_fd':
        return sturm_liouville(params['p'], params['q'], tuple(params['interval']))
    q = density_samples(params['density'], tuple(params['interval']), int(params['grid']))
    if np.any(~(q > 0)):
        raise NonPositiveDensity(f'density must be positive on the grid, min sample {q.min()}')
    return inhomogeneous_membrane(1, float(q.min()), float(q.max()))
