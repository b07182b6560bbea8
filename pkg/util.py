import json
import math
import os
import sys
import tempfile

import numpy as np
import pandas as pd
from loguru import logger
from numpy.polynomial import Polynomial

from errors import BadSourceSpec, InputError

CSV_FLOAT_FORMAT = '%.17g'


def compensated_sum(values) -> float:
    """
    Sum a sequence of floats with compensated summation.

    math.fsum tracks the exact partial sums, so the result is the correctly
    rounded total no matter in which order the terms arrive. That keeps every
    gap-function evaluation bit-stable across platforms.

    :param values: iterable of real numbers (a numpy array is fine)
    :return: the correctly rounded sum as a float
    """
    return math.fsum(np.asarray(values, dtype=float).ravel())


def compensated_mean(values) -> float:
    values = np.asarray(values, dtype=float).ravel()
    return compensated_sum(values) / len(values)


def relative_difference(x: float, y: float) -> float:
    """
    |x - y| scaled by the larger magnitude, with a floor of 1 on the scale
    so that values near zero compare absolutely.
    """
    return abs(x - y) / max(1.0, abs(x), abs(y))


def coefficient_function(spec) -> Polynomial:
    """
    Build a coefficient function from its named form.

    Accepted forms, with no expression evaluation of any kind:

    const:<v>             p(x) = v
    affine:<a>,<b>        p(x) = a*x + b
    poly:<c0>,<c1>,...    p(x) = c0 + c1*x + c2*x^2 + ...

    A plain number is read as const. The result is a numpy Polynomial, so
    callers get exact derivatives through .deriv().

    :param spec: the named form as a string, or a number
    :return: numpy.polynomial.Polynomial evaluating the coefficient
    """
    if isinstance(spec, Polynomial):
        return spec
    if isinstance(spec, (int, float)):
        return Polynomial([float(spec)])
    if not isinstance(spec, str) or ':' not in spec:
        raise BadSourceSpec(f'coefficient function must look like "const:<v>", got {spec!r}')
    kind, _, body = spec.partition(':')
    try:
        numbers = [float(v) for v in body.split(',') if v.strip() != '']
    except ValueError:
        raise BadSourceSpec(f'coefficient function {spec!r} has a non-numeric entry')
    if not all(math.isfinite(v) for v in numbers):
        raise BadSourceSpec(f'coefficient function {spec!r} has a non-finite entry')
    kind = kind.strip().lower()
    if kind == 'const' and len(numbers) == 1:
        return Polynomial(numbers)
    if kind == 'affine' and len(numbers) == 2:
        slope, intercept = numbers
        return Polynomial([intercept, slope])
    if kind == 'poly' and len(numbers) >= 1:
        return Polynomial(numbers)
    raise BadSourceSpec(f'unknown coefficient function {spec!r}')


def parse_float_list(text) -> list:
    """
    Parse "0,1,2" into [0.0, 1.0, 2.0]. An empty string gives an empty list.
    """
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        try:
            return [float(v) for v in text]
        except (TypeError, ValueError):
            raise InputError(f'expected a list of numbers, got {list(text)!r}')
    text = str(text).strip()
    if text == '':
        return []
    try:
        return [float(v) for v in text.split(',')]
    except ValueError:
        raise InputError(f'expected a comma separated list of numbers, got {text!r}')


def parse_grid(text) -> list:
    """
    Parse an inclusive grid "LO:HI:STEP" into its points.

    Points are rounded to 12 decimals so that 0:4:0.25 yields exactly
    0.25, 0.5, ... instead of accumulated step error.
    """
    try:
        lo, hi, step = (float(v) for v in str(text).split(':'))
    except ValueError:
        raise InputError(f'expected a grid LO:HI:STEP, got {text!r}')
    if step <= 0 or hi < lo:
        raise InputError(f'grid {text!r} needs STEP > 0 and HI >= LO')
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def table_to_csv(df: pd.DataFrame) -> str:
    """
    Render a table as CSV with '.' decimals, 17 significant digits and LF line
    endings, so the same inputs always give the same bytes.
    """
    return df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')


def _plain(obj):
    # JSON has no inf or nan; they become null
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + '\n'


def write_output(text: str, path=None):
    """
    Write a command's output once, atomically.

    With no path the text goes to standard output. Otherwise it is written to a
    temporary file next to the target and renamed over it, so readers never see
    a half-written file.

    :param text: the complete output
    :param path: destination file, or None for standard output
    """
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp_', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', newline='\n') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f'wrote {len(text)} bytes to {path}')


def setup_logging(level: str = 'WARNING'):
    """
    Send diagnostics to standard error only; standard output is reserved for
    tables and reports.
    """
    logger.remove()
    try:
        logger.add(sys.stderr, level=str(level).upper(), format='{time:HH:mm:ss} | {level: <7} | {message}')
    except ValueError:
        logger.add(sys.stderr, level='WARNING')
        raise InputError(f'unknown log level {level!r}')
