"""
Checks of the inequalities and identities behind the bounds, on concrete
(profile, spectrum) pairs.

Every check returns a CheckReport whose slack is RHS - LHS of the inequality
as it is usually written, so a check passes when slack >= -tolerance. A
failing check is a report, never an exception.
"""
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger
from scipy.special import gammaln
from tqdm import tqdm

from errors import DomainError, GNegative, GNotMonotone, InputError, LengthMismatch, MissingNextEigenvalue, \
    QuadratureNonConvergence
from gapfn import GapFunction, chebyshev_gap, eval_f, eval_f_plus, eval_f_tilde
from profiles import BoundProfile
from solvers import hp_bound, sigma_p, sigma_tilde_p, yang1_bound
from spectra import Spectrum
from util import compensated_sum, relative_difference

FAMILY_RTOL = 1e-10
MONOTONE_RTOL = 1e-9
REGIME_RTOL = 1e-9
QUADRATURE_RTOL = 1e-8
LIFT_RTOL = 1e-6
TRAPEZOID_RTOL = 1e-9
CHEBYSHEV_RTOL = 1e-12
BETA_RTOL = 1e-12
SIMPSON_MAX_DEPTH = 40


@dataclass(frozen=True)
class CheckReport:
    check: str
    inputs_digest: str
    slack: float
    tolerance: float
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tolerance)

    def to_dict(self) -> dict:
        return {'check': self.check, 'pass': self.passed, 'slack': self.slack, 'tolerance': self.tolerance,
                'witness': self.witness, 'inputs_digest': self.inputs_digest}


def digest(inputs: dict) -> str:
    """First 16 hex digits of the SHA-256 of the inputs as canonical JSON."""
    text = json.dumps(inputs, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def _pair_inputs(profile: BoundProfile, spectrum: Spectrum, m: int, **extra) -> dict:
    return {'profile': profile.to_dict(), 'spectrum': spectrum.to_dict(), 'm': m, **extra}


def _next_eigenvalue(spectrum: Spectrum, m: int) -> float:
    if len(spectrum) <= m:
        raise MissingNextEigenvalue(f'checking at m = {m} needs lambda_(m+1), '
                                    f'but the spectrum holds only {len(spectrum)} values')
    return float(spectrum.values[m])


@dataclass(frozen=True, eq=False)
class MonotoneFunctionTable:
    """
    Samples (lambda, g(lambda)) of a function claimed nonnegative and
    nondecreasing. The claim is checked on the samples; lookups between them
    interpolate linearly and lookups outside them are refused.
    """
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if points.size != values.size:
            raise LengthMismatch(f'{points.size} points but {values.size} values')
        if points.size == 0:
            raise InputError('a function table needs at least one sample')
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
            raise InputError('function table entries must be finite')
        if np.any(np.diff(points) < 0):
            raise InputError('function table points must be nondecreasing')
        ties = np.flatnonzero(np.diff(points) == 0)
        if np.any(values[ties] != values[ties + 1]):
            raise InputError('tied table points must carry equal values')
        if np.any(values < 0):
            i = int(np.flatnonzero(values < 0)[0])
            raise GNegative(f'g({points[i]!r}) = {values[i]!r} is negative')
        if np.any(np.diff(values) < 0):
            i = int(np.flatnonzero(np.diff(values) < 0)[0])
            raise GNotMonotone(f'g decreases from {values[i]!r} to {values[i + 1]!r} '
                               f'between {points[i]!r} and {points[i + 1]!r}')
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, fn, points) -> 'MonotoneFunctionTable':
        points = np.asarray(points, dtype=float)
        return cls(points, np.asarray([fn(x) for x in points], dtype=float))

    def lookup(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < self.points[0]) or np.any(x > self.points[-1]):
            raise DomainError(f'g is tabulated on [{self.points[0]!r}, {self.points[-1]!r}] only')
        # tied points carry equal values after validation, so np.interp is unambiguous
        return np.interp(x, self.points, self.values)

    def to_dict(self) -> dict:
        return {'points': self.points.tolist(), 'values': self.values.tolist()}


def check_family_inequality(profile: BoundProfile, spectrum: Spectrum, m: int, p: float,
                            rtol: float = FAMILY_RTOL) -> CheckReport:
    """
    sum (l_(m+1) - l_i)^p <= K(p) sum (l_(m+1) - l_i)^(p-1) w(l_i), at the true
    next eigenvalue. The slack is exactly -m times the gap function there.
    """
    next_value = _next_eigenvalue(spectrum, m)
    g = GapFunction(profile, spectrum, m, float(p))
    gaps = next_value - g.lam
    lhs = compensated_sum(gaps ** g.p)
    slack = -g.m * (eval_f(g, next_value) if g.p <= 2 else eval_f_tilde(g, next_value))
    rhs = slack + lhs
    tolerance = rtol * (abs(lhs) + abs(rhs)) if math.isfinite(rhs) else 0.0
    witness = {'p': float(p), 'm': m, 'lambda_next': next_value, 'lhs': lhs, 'rhs': rhs}
    return CheckReport(check='family_inequality', inputs_digest=digest(_pair_inputs(profile, spectrum, m, p=p)),
                       slack=slack, tolerance=tolerance, witness=witness)


def check_monotone_weight(profile: BoundProfile, spectrum: Spectrum, m: int,
                          g_table: MonotoneFunctionTable) -> CheckReport:
    """
    Monotone-weight form:
        sum (l_(m+1) - l_i)^2 g(l_i) <= c sum (l_(m+1) - l_i) g(l_i) w(l_i)
    """
    next_value = _next_eigenvalue(spectrum, m)
    lam = spectrum.prefix(m)
    gaps = next_value - lam
    gv = g_table.lookup(lam)
    lhs = compensated_sum(gaps ** 2 * gv)
    rhs = profile.c * compensated_sum(gaps * gv * profile.weight(lam))
    inputs = _pair_inputs(profile, spectrum, m, g=g_table.to_dict())
    return CheckReport(check='monotone_weight', inputs_digest=digest(inputs), slack=rhs - lhs,
                       tolerance=FAMILY_RTOL * (abs(lhs) + abs(rhs)),
                       witness={'m': m, 'lambda_next': next_value, 'lhs': lhs, 'rhs': rhs})


def check_trapezoid_condition(f, df, samples, name: str = 'trapezoid') -> CheckReport:
    """
    (f(x) - f(y)) / (x - y) >= (f'(x) + f'(y)) / 2 over all sample pairs
    x != y; the witness is the pair with the smallest slack.
    """
    x = np.unique(np.asarray(samples, dtype=float))
    if x.size < 2:
        raise InputError('the trapezoid check needs at least two distinct samples')
    fx = np.asarray([f(v) for v in x], dtype=float)
    dfx = np.asarray([df(v) for v in x], dtype=float)
    i, j = np.triu_indices(x.size, k=1)
    quotient = (fx[i] - fx[j]) / (x[i] - x[j])
    slack = quotient - 0.5 * (dfx[i] + dfx[j])
    worst = int(np.argmin(slack))
    tolerance = TRAPEZOID_RTOL * max(1.0, float(np.max(np.abs(dfx))))
    witness = {'x': float(x[i[worst]]), 'y': float(x[j[worst]]), 'pairs': int(slack.size)}
    return CheckReport(check=name, inputs_digest=digest({'samples': x.tolist(), 'f': fx.tolist()}),
                       slack=float(slack[worst]), tolerance=tolerance, witness=witness)


def adaptive_simpson(func, a: float, b: float, tol: float, max_depth: int = SIMPSON_MAX_DEPTH) -> float:
    """
    Adaptive Simpson quadrature with Richardson correction.

    An interval is accepted once |S_left + S_right - S_whole| <= 15 tol, with
    the tolerance halved on each split.

    :raises QuadratureNonConvergence: when refinement needs more than max_depth levels
    """

    def _simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def _adaptive(lo, hi, flo, fmid, fhi, whole, depth, tol):
        mid = 0.5 * (lo + hi)
        left_mid, right_mid = 0.5 * (lo + mid), 0.5 * (mid + hi)
        fl, fr = func(left_mid), func(right_mid)
        left = _simpson(flo, fl, fmid, mid - lo)
        right = _simpson(fmid, fr, fhi, hi - mid)
        error = left + right - whole
        if abs(error) <= 15.0 * tol:
            return left + right + error / 15.0
        if depth >= max_depth:
            raise QuadratureNonConvergence(f'adaptive Simpson exceeded depth {max_depth} on [{lo!r}, {hi!r}]')
        return (_adaptive(lo, mid, flo, fl, fmid, left, depth + 1, tol / 2.0)
                + _adaptive(mid, hi, fmid, fr, fhi, right, depth + 1, tol / 2.0))

    if b == a:
        return 0.0
    fa, fm, fb = func(a), func(0.5 * (a + b)), func(b)
    return _adaptive(a, b, fa, fm, fb, _simpson(fa, fm, fb, b - a), 0, tol)


def _integrate_against_power(fn, upper: float, s: float, tol: float) -> float:
    """
    int_0^upper fn(t) t^(s-1) dt for s > 0 and smooth fn.

    With t = upper * u^k and k = j / s for an integer j >= 1 the integrand
    becomes upper^s k u^(j-1) fn(upper u^k), which has no endpoint singularity.
    """
    if not s > 0:
        raise DomainError(f'power integral needs s > 0, got {s}')
    j = max(1, math.ceil(3 * s))
    k = j / s
    integral = adaptive_simpson(lambda u: u ** (j - 1) * fn(upper * u ** k), 0.0, 1.0, tol / (upper ** s * k))
    return upper ** s * k * integral


def beta_function(s: float, t: float) -> float:
    if not (s > 0 and t > 0):
        raise DomainError(f'beta function needs s > 0 and t > 0, got {s}, {t}')
    return math.exp(gammaln(s) + gammaln(t) - gammaln(s + t))


def beta_integral(gap: float, alpha: float, p: float, tol: float) -> float:
    """
    int_0^inf (gap - r)_+^alpha r^(p-3) dr by quadrature, split at gap / 2 so
    each half carries one endpoint singularity.
    """
    half = 0.5 * gap
    lower = _integrate_against_power(lambda r: (gap - r) ** alpha, half, p - 2.0, tol / 2.0)
    upper = _integrate_against_power(lambda t: (gap - t) ** (p - 3.0), half, alpha + 1.0, tol / 2.0)
    return lower + upper


def aizenman_lieb_identity(gap: float, alpha: float, p: float, tol: float = QUADRATURE_RTOL) -> CheckReport:
    """
    int_0^inf (gap - r)_+^alpha r^(p-3) dr = gap^(alpha+p-2) B(p-2, alpha+1).

    slack = tol - |quadrature - closed form| / closed form; reported with a
    tolerance of 0 since tol is already inside the slack.
    """
    if not p > 2:
        raise DomainError(f'the beta integral needs p > 2, got {p}')
    if not alpha > -1:
        raise DomainError(f'the beta integral needs alpha > -1, got {alpha}')
    if not gap > 0:
        raise DomainError(f'the beta integral needs a positive gap, got {gap}')
    closed = gap ** (alpha + p - 2.0) * beta_function(p - 2.0, alpha + 1.0)
    quadrature = beta_integral(gap, alpha, p, 1e-3 * tol * closed)
    error = abs(quadrature - closed) / closed
    witness = {'gap': gap, 'alpha': alpha, 'p': p, 'quadrature': quadrature, 'closed_form': closed,
               'relative_error': error, 'rtol': tol}
    return CheckReport(check='aizenman_lieb_identity', inputs_digest=digest({'gap': gap, 'alpha': alpha, 'p': p}),
                       slack=tol - error, tolerance=0.0, witness=witness)


def aizenman_lieb_batch(trials: int, seed: int, p_range=(2.0, 8.0), gap_range=(0.25, 4.0),
                        tol: float = QUADRATURE_RTOL) -> CheckReport:
    """Random (p, alpha, gap) with p in (2, 8] and alpha in (0, p]; the worst trial is the witness."""
    if trials < 1:
        raise InputError(f'trials must be at least 1, got {trials}')
    rng = np.random.default_rng(seed)
    p_lo, p_hi = p_range
    worst: Optional[CheckReport] = None
    for _ in tqdm(range(trials), desc='beta integrals', leave=False, disable=None):
        p = p_hi - (p_hi - p_lo) * rng.random()
        alpha = p * (1.0 - rng.random())
        gap = gap_range[0] + (gap_range[1] - gap_range[0]) * rng.random()
        report = aizenman_lieb_identity(gap, alpha, p, tol)
        if worst is None or report.slack < worst.slack:
            worst = report
    inputs = {'trials': trials, 'seed': seed, 'p_range': list(p_range), 'gap_range': list(gap_range)}
    return CheckReport(check='aizenman_lieb_batch', inputs_digest=digest(inputs), slack=worst.slack,
                       tolerance=0.0, witness={**worst.witness, 'trials': trials})


def aizenman_lieb_lift(profile: BoundProfile, spectrum: Spectrum, m: int, q: float, sigma: float,
                       tol: float = LIFT_RTOL) -> CheckReport:
    """
    Lift the p = 2 inequality to exponent q: integrating the truncated p = 2
    form against r^(q-3) and dividing by B(q-2, 3) must reproduce the
    un-truncated form at q, i.e. m * ft_q(sigma) when sigma >= lambda_m.
    """
    if not q > 2:
        raise DomainError(f'lifting needs q > 2, got {q}')
    g2 = GapFunction(profile, spectrum, m, 2.0)
    gq = g2.with_p(float(q))
    direct = eval_f_plus(gq, sigma, 0.0)
    scale = _lift_scale(gq, sigma)
    B = beta_function(q - 2.0, 3.0)
    quad_tol = 1e-3 * tol * scale * B

    integrand = lambda r: eval_f_plus(g2, sigma, r)
    breaks = np.unique(sigma - g2.lam)
    breaks = breaks[breaks > 0]
    if breaks.size == 0:
        lifted = 0.0
    else:
        pieces = [_integrate_against_power(integrand, float(breaks[0]), q - 2.0, quad_tol / breaks.size)]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            pieces.append(adaptive_simpson(lambda r: integrand(r) * r ** (q - 3.0), float(lo), float(hi),
                                           quad_tol / breaks.size))
        lifted = compensated_sum(pieces) / B
    error = abs(lifted - direct) / scale
    witness = {'q': float(q), 'sigma': sigma, 'lifted': lifted, 'direct': direct, 'relative_error': error,
               'rtol': tol}
    return CheckReport(check='aizenman_lieb_lift', inputs_digest=digest(_pair_inputs(profile, spectrum, m, q=q,
                                                                                     sigma=sigma)),
                       slack=tol - error, tolerance=0.0, witness=witness)


def _lift_scale(g: GapFunction, sigma: float) -> float:
    gaps = np.maximum(sigma - g.lam, 0.0)
    K = g.profile.coefficient(g.p)
    return max(1e-300, compensated_sum(gaps ** g.p) + K * compensated_sum(np.abs(gaps ** (g.p - 1) * g.weights)))


def _relative(x, y):
    return abs(x - y) / abs(y)


def beta_identity_report(samples=(0.5, 1.0, 2.0, 5.0), tol: float = BETA_RTOL) -> CheckReport:
    """
    Symmetry, the recursion B(s, t+1) = B(s, t) t / (s + t), and the ratio
    B(s, 2) / B(s, 3) = (s + 2) / 2 that turns the lifted p = 2 coefficient
    into K(q).
    """
    worst, witness = 0.0, {}
    for s in samples:
        for t in samples:
            errors = {
                'symmetry': _relative(beta_function(s, t), beta_function(t, s)),
                'recursion': _relative(beta_function(s, t + 1), beta_function(s, t) * t / (s + t)),
            }
            for name, value in errors.items():
                if value > worst:
                    worst, witness = value, {'identity': name, 's': s, 't': t}
        ratio = _relative(beta_function(s, 2.0) / beta_function(s, 3.0), (s + 2.0) / 2.0)
        if ratio > worst:
            worst, witness = ratio, {'identity': 'ratio', 's': s}
    return CheckReport(check='beta_identities', inputs_digest=digest({'samples': list(samples)}),
                       slack=tol - worst, tolerance=0.0, witness={**witness, 'max_relative_error': worst})


def monotonicity_report(profile: BoundProfile, spectrum: Spectrum, m: int, p_grid_low, p_grid_high,
                        rtol: float = MONOTONE_RTOL) -> CheckReport:
    """
    sigma_p is nonincreasing over the low grid (p <= 2) and sigma_tilde_p is
    nondecreasing over the high grid (p >= 2). Slack is the smallest step in the
    expected direction.
    """
    low = sorted(set(float(p) for p in p_grid_low))
    high = sorted(set(float(p) for p in p_grid_high))
    if any(p < 0 or p > 2 for p in low):
        raise DomainError(f'low grid must lie in [0, 2], got {low}')
    if any(p < 2 for p in high):
        raise DomainError(f'high grid must lie in [2, inf), got {high}')
    low_values = [sigma_p(profile, spectrum, m, p).value for p in low]
    high_values = [sigma_tilde_p(profile, spectrum, m, p).value for p in high]
    steps = [(low_values[k] - low_values[k + 1], 'low', low[k], low[k + 1]) for k in range(len(low) - 1)]
    steps += [(high_values[k + 1] - high_values[k], 'high', high[k], high[k + 1]) for k in range(len(high) - 1)]
    magnitude = max([abs(v) for v in low_values + high_values], default=1.0)
    witness = {'sigma_low': dict(zip(map(str, low), low_values)), 'sigma_high': dict(zip(map(str, high), high_values))}
    if steps:
        slack, regime, p_from, p_to = min(steps)
        witness.update({'regime': regime, 'p_from': p_from, 'p_to': p_to})
    else:
        slack = 0.0
    inputs = _pair_inputs(profile, spectrum, m, low=low, high=high)
    return CheckReport(check='monotonicity', inputs_digest=digest(inputs), slack=slack,
                       tolerance=rtol * magnitude, witness=witness)


def regime_agreement_report(profile: BoundProfile, spectrum: Spectrum, m: int,
                            tol: float = REGIME_RTOL) -> CheckReport:
    """sigma_tilde_2, sigma_2 and the closed-form Yang 1 bound are the same number."""
    s2 = sigma_p(profile, spectrum, m, 2.0).value
    st2 = sigma_tilde_p(profile, spectrum, m, 2.0).value
    y1 = yang1_bound(profile, spectrum, m).value
    worst = max(relative_difference(st2, s2), relative_difference(s2, y1))
    witness = {'sigma_2': s2, 'sigma_tilde_2': st2, 'yang1': y1, 'max_relative_difference': worst}
    return CheckReport(check='regime_agreement', inputs_digest=digest(_pair_inputs(profile, spectrum, m)),
                       slack=tol - worst, tolerance=0.0, witness=witness)


def hp_comparison_report(profile: BoundProfile, spectrum: Spectrum, m: int, p_high) -> CheckReport:
    """
    Where sigma_tilde_p (p > 2) lands relative to the Hile-Protter bound. There
    is no known ordering, so this report always passes and only records it.
    """
    hp = hp_bound(profile, spectrum, m).value
    rows = []
    for p in sorted(set(float(v) for v in p_high)):
        if p <= 2:
            continue
        value = sigma_tilde_p(profile, spectrum, m, p).value
        rows.append({'p': p, 'sigma_tilde': value, 'below_hp': value < hp})
    witness = {'hp': hp, 'rows': rows, 'beats_hp': [r['p'] for r in rows if r['below_hp']]}
    return CheckReport(check='hp_comparison', inputs_digest=digest(_pair_inputs(profile, spectrum, m, p=list(p_high))),
                       slack=0.0, tolerance=0.0, witness=witness)


def chebyshev_report(trials: int, length: int, seed: int, ordering: str = 'opposite') -> CheckReport:
    """
    Random nonnegative weights with a increasing and b decreasing ('opposite')
    or increasing ('similar'). Slack is min(-gap): nonnegative for opposite
    orderings, negative for the similar control group.
    """
    if ordering not in ('opposite', 'similar'):
        raise InputError(f'ordering must be "opposite" or "similar", got {ordering!r}')
    if trials < 1 or length < 1:
        raise InputError('trials and length must be at least 1')
    rng = np.random.default_rng(seed)
    w = rng.random((trials, length))
    a = np.sort(rng.random((trials, length)), axis=1)
    b = np.sort(rng.random((trials, length)), axis=1)
    if ordering == 'opposite':
        b = b[:, ::-1]
    gaps = np.empty(trials)
    scale = 0.0
    for t in tqdm(range(trials), desc=f'chebyshev ({ordering})', leave=False, disable=None):
        gaps[t] = chebyshev_gap(w[t], a[t], b[t])
        scale = max(scale, float(np.sum(w[t]) * np.sum(w[t] * a[t] * b[t])))
    worst = int(np.argmin(-gaps))
    inputs = {'trials': trials, 'length': length, 'seed': seed, 'ordering': ordering}
    witness = {'trial': worst, 'gap': float(gaps[worst]), 'positive_gaps': int(np.sum(gaps > 0))}
    return CheckReport(check=f'chebyshev_{ordering}', inputs_digest=digest(inputs), slack=float(-gaps[worst]),
                       tolerance=CHEBYSHEV_RTOL * max(scale, 1e-300), witness=witness)


@dataclass
class SuiteSettings:
    family_p: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
    p_grid_low: list = field(default_factory=lambda: [0.25 * k for k in range(9)])
    p_grid_high: list = field(default_factory=lambda: [2.0, 2.5, 3.0, 4.0, 6.0])
    monotone_weight_p: list = field(default_factory=lambda: [1.5])
    trapezoid_exponents: list = field(default_factory=lambda: [2.0, 3.0, 4.0])
    trapezoid_samples: int = 32
    lift_q: list = field(default_factory=lambda: [3.0, 4.0])
    aizenman_lieb_trials: int = 50
    aizenman_lieb_p_range: list = field(default_factory=lambda: [2.0, 8.0])
    aizenman_lieb_gap_range: list = field(default_factory=lambda: [0.25, 4.0])
    chebyshev_trials: int = 10_000
    chebyshev_length: int = 8
    family_rtol: float = FAMILY_RTOL
    quadrature_rtol: float = QUADRATURE_RTOL
    lift_rtol: float = LIFT_RTOL
    monotone_rtol: float = MONOTONE_RTOL
    regime_rtol: float = REGIME_RTOL


def _substitution_table(spectrum: Spectrum, m: int, p: float) -> Optional[MonotoneFunctionTable]:
    lam = spectrum.prefix(m)
    next_value = _next_eigenvalue(spectrum, m)
    if next_value <= lam[-1]:
        logger.info(f'g = (lambda_next - lambda)^{p - 2:g} is infinite at a tie; substitution check skipped')
        return None
    return MonotoneFunctionTable.from_function(lambda x: (next_value - x) ** (p - 2.0), lam)


def spectrum_checks(profile: BoundProfile, spectrum: Spectrum, m: int, settings: SuiteSettings) -> list:
    """Every check that depends on the (profile, spectrum, m) triple, in a fixed order."""
    reports = [check_family_inequality(profile, spectrum, m, p, settings.family_rtol) for p in settings.family_p]

    next_value = _next_eigenvalue(spectrum, m)
    lam = spectrum.prefix(m)
    reports.append(check_monotone_weight(profile, spectrum, m, MonotoneFunctionTable(lam, np.ones_like(lam))))
    for p in settings.monotone_weight_p:
        table = _substitution_table(spectrum, m, p)
        if table is not None:
            reports.append(check_monotone_weight(profile, spectrum, m, table))

    samples = np.linspace(0.0, next_value, settings.trapezoid_samples + 2)[1:-1]
    for p in settings.trapezoid_exponents:
        reports.append(check_trapezoid_condition(lambda x, p=p: (next_value - x) ** p,
                                                 lambda x, p=p: -p * (next_value - x) ** (p - 1.0), samples,
                                                 name=f'trapezoid_p{p:g}'))

    sigma_2 = sigma_tilde_p(profile, spectrum, m, 2.0).value
    for q in settings.lift_q:
        lifts = [aizenman_lieb_lift(profile, spectrum, m, q, sigma, settings.lift_rtol)
                 for sigma in (0.5 * (float(lam[0]) + sigma_2), sigma_2)]
        reports.append(min(lifts, key=lambda r: r.slack))

    reports.append(monotonicity_report(profile, spectrum, m, settings.p_grid_low, settings.p_grid_high,
                                       settings.monotone_rtol))
    reports.append(regime_agreement_report(profile, spectrum, m, settings.regime_rtol))
    reports.append(hp_comparison_report(profile, spectrum, m, settings.p_grid_high))
    return reports


def global_checks(settings: SuiteSettings, seed: int) -> list:
    """Checks of the analytic tools themselves; they do not look at any spectrum."""
    return [
        aizenman_lieb_batch(settings.aizenman_lieb_trials, seed, tuple(settings.aizenman_lieb_p_range),
                            tuple(settings.aizenman_lieb_gap_range), settings.quadrature_rtol),
        beta_identity_report(),
        chebyshev_report(settings.chebyshev_trials, settings.chebyshev_length, seed),
    ]


def log_outcome(reports: list, label: str = ''):
    failed = [r.check for r in reports if not r.passed]
    prefix = f'{label}: ' if label else ''
    if failed:
        logger.warning(f'{prefix}{len(failed)} of {len(reports)} checks failed: {", ".join(failed)}')
    else:
        logger.info(f'{prefix}all {len(reports)} checks passed')


def run_suite(profile: BoundProfile, spectrum: Spectrum, m: int, settings: SuiteSettings = None,
              seed: int = 0) -> list:
    """
    The full ordered list of reports for one (profile, spectrum, m); the order
    and contents depend only on the inputs and the seed.
    """
    settings = settings or SuiteSettings()
    reports = spectrum_checks(profile, spectrum, m, settings) + global_checks(settings, seed)
    log_outcome(reports)
    return reports
