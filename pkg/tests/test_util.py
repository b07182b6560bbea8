import json
import os

import numpy as np
import pandas as pd
import pytest

from errors import BadSourceSpec, InputError
from util import (coefficient_function, compensated_mean, compensated_sum, parse_float_list, parse_grid,
                  relative_difference, table_to_csv, to_json, write_output)


def test_compensated_sum_is_exactly_rounded():
    assert compensated_sum([1e16, 1.0, -1e16]) == 1.0
    assert compensated_sum(np.array([0.1] * 10)) == 1.0
    assert compensated_mean([1.0, 2.0, 3.0]) == 2.0


def test_relative_difference_floors_scale_at_one():
    assert relative_difference(1e-20, 2e-20) == pytest.approx(1e-20)
    assert relative_difference(100.0, 101.0) == pytest.approx(1 / 101)


@pytest.mark.parametrize('spec, x, expected', [
    ('const:4', 3.0, 4.0),
    ('affine:2,1', 3.0, 7.0),
    ('poly:1,0,1', 2.0, 5.0),
    (3, 10.0, 3.0),
])
def test_coefficient_function_forms(spec, x, expected):
    assert coefficient_function(spec)(x) == pytest.approx(expected)


def test_coefficient_function_gives_exact_derivatives():
    p = coefficient_function('poly:1,0,1')
    assert p.deriv(1)(3.0) == pytest.approx(6.0)
    assert p.deriv(2)(3.0) == pytest.approx(2.0)


@pytest.mark.parametrize('spec', ['exp:1', 'const:a', 'const:1,2', 'affine:1', 'const:inf', '1+x', None])
def test_coefficient_function_rejects(spec):
    with pytest.raises(BadSourceSpec):
        coefficient_function(spec)


def test_parse_float_list():
    assert parse_float_list('') == []
    assert parse_float_list(None) == []
    assert parse_float_list('0, 1.5,2') == [0.0, 1.5, 2.0]
    with pytest.raises(InputError):
        parse_float_list('1,x')
    assert parse_float_list([0, 2.5]) == [0.0, 2.5]
    with pytest.raises(InputError):
        parse_float_list([0, 'a'])
    with pytest.raises(InputError):
        parse_float_list([0, None])


def test_parse_grid_is_inclusive_and_rounded():
    grid = parse_grid('0:4:0.25')
    assert len(grid) == 17
    assert grid[1] == 0.25
    assert grid[-1] == 4.0
    assert parse_grid('2:2:1') == [2.0]
    with pytest.raises(InputError):
        parse_grid('0:1:0')
    with pytest.raises(InputError):
        parse_grid('0:1')


def test_table_to_csv_uses_17_digits_and_lf():
    text = table_to_csv(pd.DataFrame({'p': [0.1], 'v': [1 / 3]}))
    assert text == 'p,v\n0.10000000000000001,0.33333333333333331\n'


def test_to_json_replaces_non_finite_numbers():
    data = json.loads(to_json({'a': float('inf'), 'b': np.float64(1.5), 'c': [np.int64(2), float('nan')]}))
    assert data == {'a': None, 'b': 1.5, 'c': [2, None]}


def test_write_output_replaces_file_atomically(tmp_path):
    target = tmp_path / 'out' / 'table.csv'
    write_output('first\n', str(target))
    write_output('second\n', str(target))
    assert target.read_text() == 'second\n'
    assert os.listdir(target.parent) == ['table.csv']


def test_write_output_defaults_to_stdout(capsys):
    write_output('hello\n')
    assert capsys.readouterr().out == 'hello\n'
