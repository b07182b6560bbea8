"""
Scalar gap functions whose roots are the eigenvalue bounds.

For a profile (c, a, b), the first m eigenvalues l_1..l_m and an exponent p:

    f_p(s)  = (1/m) sum (s - l_i)^p - (c/m)       sum (s - l_i)^(p-1) w(l_i),   0 <= p <= 2
    ft_p(s) = (1/m) sum (s - l_i)^p - (c*p/2m)    sum (s - l_i)^(p-1) w(l_i),   p >= 2

with w(l) = a*l + b. Both are normalized by 1/m. The truncated form used to
lift exponents (eval_f_plus) is not normalized, like the inequality it comes
from. Inside the sums 0^0 = 1, which keeps f_1 continuous at s = l_i.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import comb

from errors import DomainError, InputError, LengthMismatch
from profiles import BoundProfile
from spectra import Spectrum, moment
from util import compensated_sum


@dataclass(frozen=True, eq=False)
class GapFunction:
    profile: BoundProfile
    spectrum: Spectrum
    m: int
    p: float

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise InputError(f'm must be a positive integer, got {self.m!r}')
        if not (np.isfinite(self.p) and self.p >= 0):
            raise DomainError(f'exponent p must be finite and >= 0, got {self.p}')
        if not np.all(np.isfinite(self.weights)):
            raise InputError(f'profile {self.profile.name!r} gives non-finite weights on this spectrum')

    @cached_property
    def lam(self) -> np.ndarray:
        return self.spectrum.prefix(int(self.m))

    @cached_property
    def weights(self) -> np.ndarray:
        return self.profile.weight(self.lam)

    @property
    def lam_m(self) -> float:
        return float(self.lam[-1])

    def with_p(self, p: float) -> 'GapFunction':
        return GapFunction(self.profile, self.spectrum, self.m, p)


def _gaps(g: GapFunction, sigma: float) -> np.ndarray:
    if not np.isfinite(sigma):
        raise DomainError(f'sigma must be finite, got {sigma}')
    if sigma < g.lam_m:
        raise DomainError(f'sigma = {sigma!r} lies below lambda_m = {g.lam_m!r}')
    return sigma - g.lam


def _weighted_powers(gaps, exponent, weights) -> np.ndarray:
    # terms with zero weight vanish even where gaps**exponent is infinite
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(weights == 0, 0.0, gaps ** exponent * weights)
    return terms


def _signed_sum(terms) -> float:
    """Compensated sum that tolerates infinite terms of one sign."""
    infinite = np.isinf(terms)
    if not infinite.any():
        return compensated_sum(terms)
    signs = np.unique(np.sign(terms[infinite]))
    if len(signs) > 1:
        raise DomainError('gap sum mixes +inf and -inf terms')
    return float(signs[0]) * np.inf


def eval_f(g: GapFunction, sigma: float) -> float:
    """
    f_p(sigma) for 0 <= p <= 2.

    For p < 1 at sigma = lambda_m the function is -inf (or +inf when the tied
    weights are negative); the infinity is returned as a sentinel so bracketing
    code can read its sign.
    """
    if g.p > 2:
        raise DomainError(f'f_p is defined for p <= 2, got p = {g.p}; use eval_f_tilde')
    gaps = _gaps(g, sigma)
    leading = compensated_sum(gaps ** g.p)
    weighted = _signed_sum(_weighted_powers(gaps, g.p - 1, g.weights))
    return (leading - g.profile.coefficient(g.p) * weighted) / g.m


def eval_f_tilde(g: GapFunction, sigma: float) -> float:
    """ft_p(sigma) for p >= 2, coefficient c*p/2."""
    if g.p < 2:
        raise DomainError(f'ft_p is defined for p >= 2, got p = {g.p}')
    gaps = _gaps(g, sigma)
    leading = compensated_sum(gaps ** g.p)
    weighted = compensated_sum(gaps ** (g.p - 1) * g.weights)
    return (leading - g.profile.coefficient(g.p) * weighted) / g.m


def eval_f_tilde_grid(g: GapFunction, sigmas) -> np.ndarray:
    """
    ft_p on many points at once, with plain (not compensated) sums.

    Used to scan for sign changes; anything returned to a caller as a bound is
    re-evaluated with eval_f_tilde.
    """
    if g.p < 2:
        raise DomainError(f'ft_p is defined for p >= 2, got p = {g.p}')
    sigmas = np.asarray(sigmas, dtype=float)
    if np.any(sigmas < g.lam_m):
        raise DomainError('scan points must not lie below lambda_m')
    gaps = sigmas[:, None] - g.lam[None, :]
    leading = np.sum(gaps ** g.p, axis=1)
    weighted = np.sum(gaps ** (g.p - 1) * g.weights[None, :], axis=1)
    return (leading - g.profile.coefficient(g.p) * weighted) / g.m


def eval_f_plus(g: GapFunction, sigma: float, r: float) -> float:
    """
    Truncated, un-normalized form

        sum (sigma - l_i - r)_+^p - K(p) sum (sigma - l_i - r)_+^(p-1) w(l_i)

    with x_+ = max(x, 0). Defined for every sigma and r >= 0; once
    r >= sigma - l_1 every term is truncated and the value is exactly 0.
    """
    if g.p < 2:
        raise DomainError(f'the truncated form is used for p >= 2, got p = {g.p}')
    if r < 0:
        raise DomainError(f'shift r must be >= 0, got {r}')
    gaps = np.maximum(sigma - g.lam - r, 0.0)
    leading = compensated_sum(gaps ** g.p)
    weighted = compensated_sum(gaps ** (g.p - 1) * g.weights)
    return leading - g.profile.coefficient(g.p) * weighted


def eval_f_derivative(g: GapFunction, sigma: float) -> float:
    """
    d f_p / d sigma = (1/m) (p sum gap^(p-1) - (p-1) c sum gap^(p-2) w).

    The second term is identically zero for p = 1 and the first for p = 0.
    """
    if not (0 <= g.p <= 2):
        raise DomainError(f'derivative of f_p needs 0 <= p <= 2, got {g.p}')
    if g.p < 2 and sigma <= g.lam_m:
        raise DomainError(f'derivative needs sigma > lambda_m = {g.lam_m!r} when p < 2')
    gaps = _gaps(g, sigma)
    total = 0.0
    if g.p != 0:
        total += g.p * compensated_sum(gaps ** (g.p - 1))
    if g.p != 1:
        total -= (g.p - 1) * g.profile.c * compensated_sum(gaps ** (g.p - 2) * g.weights)
    return total / g.m


def eval_f_tilde_derivative(g: GapFunction, sigma: float) -> float:
    """Analytic derivative of ft_p; equals p * ft_(p-1) when p >= 3."""
    if g.p < 2:
        raise DomainError(f'ft_p is defined for p >= 2, got p = {g.p}')
    gaps = _gaps(g, sigma)
    leading = g.p * compensated_sum(gaps ** (g.p - 1))
    weighted = (g.p - 1) * compensated_sum(gaps ** (g.p - 2) * g.weights)
    return (leading - g.profile.coefficient(g.p) * weighted) / g.m


def moment_expansion(g: GapFunction, sigma: float) -> float:
    """
    The normalized gap function for integer p, written through the moments
    S_k of the first m eigenvalues:

        sum_k C(p,k) (-1)^k S_k s^(p-k) - K(p) sum_j C(p-1,j) (-1)^j s^(p-1-j) (a S_(j+1) + b S_j)

    Equal to eval_f (p <= 2) or eval_f_tilde (p >= 2) up to cancellation.
    """
    if g.p < 1 or int(g.p) != g.p:
        raise DomainError(f'moment expansion needs an integer p >= 1, got {g.p}')
    p = int(g.p)
    S = [moment(g.spectrum, g.m, k) for k in range(p + 1)]
    leading = [comb(p, k, exact=True) * (-1) ** k * S[k] * sigma ** (p - k) for k in range(p + 1)]
    weighted = [comb(p - 1, j, exact=True) * (-1) ** j * sigma ** (p - 1 - j)
                * (g.profile.a * S[j + 1] + g.profile.b * S[j]) for j in range(p)]
    return compensated_sum(leading) - g.profile.coefficient(p) * compensated_sum(weighted)


def chebyshev_gap(weights, a, b) -> float:
    """
    sum w * sum w a b - sum w a * sum w b.

    For nonnegative weights and oppositely ordered a, b this is <= 0 (weighted
    reverse Chebyshev inequality); similarly ordered sequences flip the sign.
    """
    weights, a, b = (np.asarray(v, dtype=float).ravel() for v in (weights, a, b))
    if not (len(weights) == len(a) == len(b)):
        raise LengthMismatch(f'sequences differ in length: {len(weights)}, {len(a)}, {len(b)}')
    if np.any(weights < 0):
        raise DomainError('Chebyshev weights must be nonnegative')
    return (compensated_sum(weights) * compensated_sum(weights * a * b)
            - compensated_sum(weights * a) * compensated_sum(weights * b))
