"""
Upper bounds for lambda_(m+1) from the first m eigenvalues.

    PPW          lambda_m + c * mean(w)                    explicit
    YANG2        root of the linear f_1                    closed form
    YANG1        larger root of the quadratic f_2          closed form
    HP           root of f_0                               safeguarded Newton
    SIGMA_P      root of f_p, 0 <= p <= 2                  bisection
    SIGMA_TILDE  first crossing of ft_p, p >= 2            march + bisection
    CONTAINMENT  lambda_m + c * w(lambda_m)                explicit, crude

For p <= 2 the bounds improve with p; for p >= 2 they get worse with p.
"""
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from errors import BoundsError, BracketFailure, ComplexRoots, DomainError, NonPositiveWeight
from gapfn import GapFunction, eval_f, eval_f_derivative, eval_f_tilde, eval_f_tilde_grid
from profiles import BoundProfile
from spectra import Spectrum
from util import compensated_mean, compensated_sum, relative_difference

ROOT_RTOL = 1e-13
HP_RESIDUAL_RTOL = 1e-12
MAX_DOUBLINGS = 64
MAX_BISECTIONS = 200
MARCH_CELLS = 1000
SCAN_SAMPLES = 1000
SCAN_RTOL = 1e-12
COMPLEX_ROOTS_RTOL = 1e-12
REGIME_AGREEMENT_RTOL = 1e-9


class Method(str, Enum):
    PPW = 'PPW'
    HP = 'HP'
    YANG2 = 'YANG2'
    YANG1 = 'YANG1'
    SIGMA_P = 'SIGMA_P'
    SIGMA_TILDE_P = 'SIGMA_TILDE_P'
    CONTAINMENT = 'CONTAINMENT'


@dataclass(frozen=True)
class BoundResult:
    value: float
    method: Method
    p: Optional[float]
    bracket: Tuple[float, float]
    residual: float = 0.0
    iterations: int = 0
    flagged: bool = False
    note: str = ''
    error: Optional[str] = None

    def to_dict(self) -> dict:
        row = asdict(self)
        row['method'] = self.method.value
        row['bracket'] = list(self.bracket)
        return row


def _gap_function(profile, spectrum, m, p) -> GapFunction:
    return GapFunction(profile, spectrum, m, p)


def _require_positive_weights(g: GapFunction):
    bad = np.flatnonzero(~(g.weights > 0))
    if bad.size:
        i = int(bad[0])
        raise NonPositiveWeight(f'weight w(lambda_{g.spectrum.label(i)}) = {g.weights[i]!r} is not positive; '
                                f'profile {g.profile.name!r} is inadmissible for this spectrum at p < 1')


def bisect(func, lo: float, hi: float, rtol: float = ROOT_RTOL, max_iter: int = MAX_BISECTIONS):
    """
    Bisection on a bracket with func(lo) <= 0 < func(hi).

    Stops once hi - lo <= rtol * |hi|, or when the midpoint no longer moves.

    :return: (root, iterations)
    """
    flo, fhi = func(lo), func(hi)
    if not (flo <= 0 < fhi):
        raise BracketFailure(f'no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}')
    for iteration in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid, iteration
        if func(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * abs(hi):
            return 0.5 * (lo + hi), iteration
    raise BracketFailure(f'bisection did not converge in {max_iter} steps on [{lo!r}, {hi!r}]')


def safe_newton(func, dfunc, lo: float, hi: float, xtol: float, max_iter: int = 100):
    """
    Newton-Raphson kept inside a bracket [lo, hi] with func(lo) < 0 < func(hi):
    a step that would leave the bracket, or that does not halve the previous
    step, is replaced by bisection.

    :return: (root, iterations)
    """
    xl, xh = lo, hi
    x = hi
    dx_old = dx = hi - lo
    fx, dfx = func(x), dfunc(x)
    for iteration in range(1, max_iter + 1):
        if fx == 0:
            return x, iteration
        newton_out = ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) > 0
        if newton_out or abs(2.0 * fx) > abs(dx_old * dfx):
            dx_old, dx = dx, 0.5 * (xh - xl)
            x = xl + dx
        else:
            dx_old, dx = dx, fx / dfx
            x -= dx
        if abs(dx) <= xtol:
            return x, iteration
        fx, dfx = func(x), dfunc(x)
        if fx < 0:
            xl = x
        else:
            xh = x
    raise BracketFailure(f'Newton iteration did not converge in {max_iter} steps')


def ppw_bound(profile: BoundProfile, spectrum: Spectrum, m: int) -> BoundResult:
    g = _gap_function(profile, spectrum, m, 1.0)
    value = g.lam_m + profile.c * compensated_mean(g.weights)
    return BoundResult(value=value, method=Method.PPW, p=None, bracket=(g.lam_m, value))


def containment_bound(profile: BoundProfile, spectrum: Spectrum, m: int) -> BoundResult:
    """lambda_m + c w(lambda_m); (1 + c) lambda_m for the weight lambda."""
    g = _gap_function(profile, spectrum, m, 1.0)
    value = g.lam_m + profile.c * float(g.weights[-1])
    return BoundResult(value=value, method=Method.CONTAINMENT, p=None, bracket=(g.lam_m, value))


def yang2_bound(profile: BoundProfile, spectrum: Spectrum, m: int) -> BoundResult:
    g = _gap_function(profile, spectrum, m, 1.0)
    value = compensated_mean(g.lam) + profile.c * compensated_mean(g.weights)
    return BoundResult(value=value, method=Method.YANG2, p=1.0, bracket=(g.lam_m, value))


def yang1_bound(profile: BoundProfile, spectrum: Spectrum, m: int) -> BoundResult:
    """
    Larger root of s^2 - (2 S_1 + c W_1) s + (S_2 + c W_l) = 0, where
    W_1 = mean(w) and W_l = mean(w * lambda).
    """
    g = _gap_function(profile, spectrum, m, 2.0)
    c = profile.c
    B = 2.0 * compensated_mean(g.lam) + c * compensated_mean(g.weights)
    C = compensated_mean(g.lam ** 2) + c * compensated_mean(g.weights * g.lam)
    disc = B * B - 4.0 * C
    if disc < -COMPLEX_ROOTS_RTOL * B * B:
        raise ComplexRoots(f'f_2 has no real root (discriminant {disc!r}); '
                           f'profile {profile.name!r} is inadmissible for this spectrum')
    root_disc = math.sqrt(max(disc, 0.0))
    # larger-magnitude root first, the other from the product of the roots
    q = 0.5 * (B + math.copysign(root_disc, B))
    roots = [q, C / q] if q != 0 else [0.5 * B]
    value = max(roots)
    return BoundResult(value=value, method=Method.YANG1, p=2.0, bracket=(g.lam_m, value))


def hp_bound(profile: BoundProfile, spectrum: Spectrum, m: int) -> BoundResult:
    """
    Root of f_0 = 1 - (c/m) sum w_i / (s - l_i), which increases from -inf
    to 1 on (lambda_m, inf), so the root inside (lambda_m, PPW] is unique.
    """
    g = _gap_function(profile, spectrum, m, 0.0)
    _require_positive_weights(g)
    lo = g.lam_m
    hi = ppw_bound(profile, spectrum, m).value
    f_hi = eval_f(g, hi)
    # f_0 is dimensionless; with m = 1 the root is the PPW bound itself and rounds to either side
    if abs(f_hi) <= HP_RESIDUAL_RTOL:
        return BoundResult(value=hi, method=Method.HP, p=0.0, bracket=(lo, hi), residual=abs(f_hi))
    doublings = 0
    while f_hi < 0:
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise BracketFailure(f'f_0 is still negative at {hi!r}, past the PPW bound')
        hi = lo + 2.0 * (hi - lo)
        f_hi = eval_f(g, hi)
    root, iterations = safe_newton(lambda s: eval_f(g, s), lambda s: eval_f_derivative(g, s), lo, hi,
                                   xtol=ROOT_RTOL * hi)
    residual = abs(eval_f(g, root))
    if residual > HP_RESIDUAL_RTOL * abs(root):
        logger.debug(f'HP residual {residual!r} above target, polishing by bisection')
        root, more = bisect(lambda s: eval_f(g, s), lo, hi)
        iterations += more
        residual = abs(eval_f(g, root))
    logger.debug(f'HP bound {root!r} after {iterations} iterations')
    return BoundResult(value=root, method=Method.HP, p=0.0, bracket=(lo, hi), residual=residual,
                       iterations=iterations)


def sigma_p(profile: BoundProfile, spectrum: Spectrum, m: int, p: float) -> BoundResult:
    """
    Unique root of f_p above lambda_m for 0 <= p <= 2, by bisection.

    The bracket starts at lambda_m + 1e-12 max(1, |lambda_m|) and at the PPW
    bound; the upper end is pushed out (hi <- lambda_m + 2 (hi - lambda_m))
    until f_p(hi) > 0.
    """
    if not (0 <= p <= 2):
        raise DomainError(f'sigma_p needs 0 <= p <= 2, got {p}')
    g = _gap_function(profile, spectrum, m, float(p))
    if p < 1:
        _require_positive_weights(g)
    func = lambda s: eval_f(g, s)
    lam_m = g.lam_m
    lo = lam_m + 1e-12 * max(1.0, abs(lam_m))
    if func(lo) > 0:
        lo = lam_m
        if func(lo) > 0:
            raise BracketFailure(f'f_{p:g} is already positive at lambda_m = {lam_m!r}')
    hi = ppw_bound(profile, spectrum, m).value
    if hi <= lo:
        hi = lo + max(1.0, abs(lo))
    doublings = 0
    while func(hi) <= 0:
        if func(hi) == 0:
            return BoundResult(value=hi, method=Method.SIGMA_P, p=float(p), bracket=(lo, hi))
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise BracketFailure(f'f_{p:g} shows no sign change after {MAX_DOUBLINGS} doublings')
        hi = lam_m + 2.0 * (hi - lam_m)
    if doublings:
        logger.debug(f'sigma_{p:g}: upper bracket doubled {doublings} times to {hi!r}')
    root, iterations = bisect(func, lo, hi)
    return BoundResult(value=root, method=Method.SIGMA_P, p=float(p), bracket=(lo, hi),
                       residual=abs(func(root)), iterations=iterations)


def sigma_tilde_p(profile: BoundProfile, spectrum: Spectrum, m: int, p: float) -> BoundResult:
    """
    First point above lambda_m where ft_p turns positive, i.e.
    sup{s >= lambda_m : ft_p <= 0 on [lambda_m, s]}.

    ft_p is sampled on cells of width (hi - lambda_m) / 1000 up to one cell past
    the upper estimate hi = lambda_m + K(p) mean(w); the first positive sample
    is bisected against its predecessor. A final scan of [lambda_m, value]
    flags any positive sample, and a nonpositive sample after the crossing is
    reported as evidence of a later root.
    """
    if p < 2:
        raise DomainError(f'sigma_tilde_p needs p >= 2, got {p}')
    g = _gap_function(profile, spectrum, m, float(p))
    lam_m = g.lam_m
    K = profile.coefficient(p)
    estimate = lam_m + K * compensated_mean(g.weights)
    span = estimate - lam_m
    if not span > 0:
        span = max(1.0, abs(lam_m))
    step = span / MARCH_CELLS
    grid = lam_m + step * np.arange(MARCH_CELLS + 2)
    values = eval_f_tilde_grid(g, grid)
    func = lambda s: eval_f_tilde(g, s)

    if func(lam_m) > 0:
        logger.warning(f'sigma_tilde_{p:g}: ft_p > 0 already at lambda_m; the sup is lambda_m itself')
        return BoundResult(value=lam_m, method=Method.SIGMA_TILDE_P, p=float(p), bracket=(lam_m, lam_m),
                           residual=abs(func(lam_m)), flagged=True, note='ft_p > 0 at lambda_m')

    positive = np.flatnonzero(values > 0)
    if positive.size == 0:
        logger.warning(f'sigma_tilde_{p:g}: no sign change up to {grid[-1]!r}; returning the estimate')
        return BoundResult(value=estimate, method=Method.SIGMA_TILDE_P, p=float(p), bracket=(lam_m, estimate),
                           residual=abs(func(estimate)), flagged=True,
                           note='no sign change observed up to the upper estimate')
    k = int(positive[0])
    lo, hi = (lam_m, float(grid[0])) if k == 0 else (float(grid[k - 1]), float(grid[k]))
    # the vectorized scan may disagree with the compensated value right at a cell edge
    while func(lo) > 0 and lo > lam_m:
        lo, hi = max(lam_m, lo - step), lo
    if func(hi) <= 0:
        hi = lo + step
        while func(hi) <= 0:
            hi += step
    root, iterations = bisect(func, lo, hi)

    notes = []
    flagged = False
    samples = np.linspace(lam_m, root, SCAN_SAMPLES)
    scale = _term_scale(g, root)
    worst = float(np.max(eval_f_tilde_grid(g, samples)))
    if worst > SCAN_RTOL * scale:
        flagged = True
        notes.append(f'ft_p reaches {worst:.3e} > 0 inside [lambda_m, value]')
    if np.any(values[k + 1:] <= 0):
        flagged = True
        notes.append('ft_p returns to <= 0 after the first crossing (possible later root)')
    if flagged:
        logger.warning(f'sigma_tilde_{p:g}: ' + '; '.join(notes))
    return BoundResult(value=root, method=Method.SIGMA_TILDE_P, p=float(p), bracket=(lo, hi),
                       residual=abs(func(root)), iterations=iterations, flagged=flagged, note='; '.join(notes))


def _term_scale(g: GapFunction, sigma: float) -> float:
    gaps = sigma - g.lam
    K = g.profile.coefficient(g.p)
    return max(1e-300, (compensated_sum(np.abs(gaps ** g.p))
                        + K * compensated_sum(np.abs(gaps ** (g.p - 1) * g.weights))) / g.m)


def _failed_row(method: Method, p, error: BoundsError) -> BoundResult:
    return BoundResult(value=float('nan'), method=method, p=p, bracket=(float('nan'), float('nan')),
                       residual=float('nan'), iterations=0, flagged=True, error=str(error))


def bound_table(profile: BoundProfile, spectrum: Spectrum, m: int, p_list) -> list:
    """
    PPW row first, then one row per distinct p in increasing order: sigma_p for
    p <= 2, sigma_tilde_p for p >= 2 (both at p = 2, which must agree).
    A failing row is kept, with its error, and the remaining rows still run.
    """
    rows = [ppw_bound(profile, spectrum, m)]
    for p in sorted(set(float(v) for v in p_list)):
        if p <= 2:
            try:
                rows.append(sigma_p(profile, spectrum, m, p))
            except BoundsError as e:
                logger.warning(f'p = {p:g}: {e}')
                rows.append(_failed_row(Method.SIGMA_P, p, e))
        if p >= 2:
            try:
                row = sigma_tilde_p(profile, spectrum, m, p)
            except BoundsError as e:
                logger.warning(f'p = {p:g}: {e}')
                rows.append(_failed_row(Method.SIGMA_TILDE_P, p, e))
                continue
            if p == 2 and rows[-1].method is Method.SIGMA_P and rows[-1].error is None:
                gap = relative_difference(row.value, rows[-1].value)
                if gap > REGIME_AGREEMENT_RTOL:
                    note = f'sigma_tilde_2 and sigma_2 differ by {gap:.3e} relative'
                    logger.warning(note)
                    row = replace(row, flagged=True, note=note)
            rows.append(row)
    return rows
