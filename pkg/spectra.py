import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from errors import EmptySpectrum, InputError, NonFinite, NotSorted, PrefixTooLong
from util import compensated_sum

SPECTRUM_FIELDS = {'eigenvalues', 'index_origin'}


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    A validated, nondecreasing prefix of an operator's eigenvalues.

    index_origin only records whether the problem counts from lambda_0 (compact
    manifolds, where lambda_0 = 0) or from lambda_1. Every operation addresses
    "the first m entries" regardless.
    """
    values: np.ndarray
    index_origin: int = 1

    def __len__(self):
        return len(self.values)

    def prefix(self, m: int) -> np.ndarray:
        if m < 1:
            raise InputError(f'prefix length must be at least 1, got {m}')
        if m > len(self.values):
            raise PrefixTooLong(f'asked for {m} eigenvalues but the spectrum holds {len(self.values)}')
        return self.values[:m]

    def label(self, position: int) -> int:
        """Eigenvalue index (lambda_0- or lambda_1-based) of the entry at 0-based position."""
        return position + self.index_origin

    def to_dict(self) -> dict:
        return {'eigenvalues': [float(v) for v in self.values], 'index_origin': self.index_origin}


@dataclass(frozen=True)
class Moments:
    m: int
    S: MappingProxyType = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'S', MappingProxyType(dict(self.S)))


def make_spectrum(values, index_origin: int = 1, abs_tol: float = 0.0) -> Spectrum:
    """
    Validate a sequence of eigenvalues. Out-of-order input is rejected rather
    than sorted.
    """
    if isinstance(index_origin, bool) or index_origin not in (0, 1):
        raise InputError(f'index_origin must be 0 or 1, got {index_origin!r}')
    try:
        array = np.array(values, dtype=float).ravel()
    except (TypeError, ValueError):
        raise InputError('eigenvalues must be real numbers')
    if array.size == 0:
        raise EmptySpectrum('a spectrum needs at least one eigenvalue')
    if not np.all(np.isfinite(array)):
        bad = int(np.flatnonzero(~np.isfinite(array))[0])
        raise NonFinite(f'eigenvalue at position {bad} is {array[bad]}')
    drops = np.flatnonzero(np.diff(array) < -abs_tol)
    if drops.size:
        i = int(drops[0])
        raise NotSorted(f'eigenvalues must be nondecreasing: {array[i + 1]} follows {array[i]} at position {i + 1}')
    array.setflags(write=False)
    return Spectrum(values=array, index_origin=index_origin)


def moment(s: Spectrum, m: int, ell: int) -> float:
    """S_ell, the ell-th power mean of the first m eigenvalues."""
    if ell < 0 or int(ell) != ell:
        raise InputError(f'moment order must be a nonnegative integer, got {ell}')
    lam = s.prefix(m)
    if ell == 0:
        return 1.0
    return compensated_sum(lam ** int(ell)) / m


def moments(s: Spectrum, m: int, max_ell: int) -> Moments:
    return Moments(m=m, S={ell: moment(s, m, ell) for ell in range(max_ell + 1)})


def spectrum_from_dict(data: dict) -> Spectrum:
    if not isinstance(data, dict):
        raise InputError('spectrum JSON must be an object')
    unknown = set(data) - SPECTRUM_FIELDS
    if unknown:
        raise InputError(f'unknown spectrum fields: {sorted(unknown)}')
    if 'eigenvalues' not in data:
        raise InputError('spectrum JSON needs an "eigenvalues" list')
    values = data['eigenvalues']
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise InputError('"eigenvalues" must be a list of numbers')
    return make_spectrum(values, data.get('index_origin', 1))


def load_spectrum(path) -> Spectrum:
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f'{path} is not valid JSON: {e}')
    except OSError as e:
        raise InputError(f'cannot read spectrum file {path}: {e.strerror}')
    return spectrum_from_dict(data)


def spectrum_to_json(s: Spectrum) -> str:
    # repr-exact floats; NaN never reaches here since make_spectrum rejects it
    assert all(math.isfinite(v) for v in s.values)
    return json.dumps(s.to_dict(), indent=2) + '\n'
