import json
import math

import numpy as np
import pytest

from errors import BadAngle, BadDensity, BadDimension, BadLambda1, BadProfileSpec, BadRatio, DomainError, InputError, \
    NonPositiveP, NotSPD
from profiles import (BoundProfile, classical_membrane, commutator_bound, elliptic_constant_coeff, homogeneous_manifold,
                      hyperbolic_2d, inhomogeneous_membrane, minimal_submanifold, parse_inline_profile, potential_Q,
                      profile_from_dict, resolve_profile, schrodinger_like, sphere_cap_2d, sphere_n, sturm_liouville)
from util import coefficient_function


def fields(profile):
    return profile.c, profile.a, profile.b, profile.index_origin


def test_classical_membrane():
    assert fields(classical_membrane(2)) == (2.0, 1.0, 0.0, 1)
    assert classical_membrane(3).c == pytest.approx(4 / 3)
    with pytest.raises(BadDimension):
        classical_membrane(0)
    with pytest.raises(BadDimension):
        classical_membrane(1.5)


def test_coefficient_switches_regime_at_two():
    profile = classical_membrane(2)
    assert profile.coefficient(0.0) == 2.0
    assert profile.coefficient(2.0) == 2.0
    assert profile.coefficient(4.0) == 4.0


def test_inhomogeneous_membrane():
    assert inhomogeneous_membrane(2, 1.0, 4.0).c == pytest.approx(8.0)
    with pytest.raises(BadDensity):
        inhomogeneous_membrane(2, 0.0, 1.0)
    with pytest.raises(BadDensity):
        inhomogeneous_membrane(2, 2.0, 1.0)


def test_sphere_cap():
    assert sphere_cap_2d(math.pi / 2).c == pytest.approx(8.0)
    assert sphere_cap_2d(1e-3).c == pytest.approx(2.0, rel=1e-5)
    assert sphere_cap_2d(1e-5).c == pytest.approx(2.0, abs=1e-9)
    for theta in (0.0, math.pi, -1.0):
        with pytest.raises(BadAngle):
            sphere_cap_2d(theta)


def test_sphere_and_minimal_submanifold():
    assert fields(sphere_n(2)) == (2.0, 1.0, 1.0, 1)
    assert fields(minimal_submanifold(3)) == (pytest.approx(4 / 3), 1.0, 2.25, 0)
    with pytest.raises(BadDimension):
        sphere_n(1)


def test_hyperbolic_uses_constant_weight():
    assert fields(hyperbolic_2d(4.0, 1.0)) == (8.0, 0.0, 1.0, 1)
    with pytest.raises(BadRatio):
        hyperbolic_2d(1.0, 4.0)
    with pytest.raises(BadRatio):
        hyperbolic_2d(1.0, 0.0)


def test_homogeneous_manifold():
    assert fields(homogeneous_manifold(2.0)) == (4.0, 1.0, 0.5, 0)
    with pytest.raises(BadLambda1):
        homogeneous_manifold(0.0)


def test_schrodinger_like_shifts_weight():
    profile = schrodinger_like(3, 1.0)
    assert profile.c == pytest.approx(4 / 3)
    assert profile.b == -1.0
    assert profile.weight([2.0, 3.0]).tolist() == [1.0, 2.0]


def test_commutator_bound_reproduces_classical():
    assert fields(commutator_bound(4.0, 2.0, 3)) == fields(classical_membrane(3))
    with pytest.raises(DomainError):
        commutator_bound(0.0, 2.0, 3)


def test_elliptic_constant_coeff():
    assert fields(elliptic_constant_coeff(np.eye(2), [0.0, 0.0])) == (2.0, 1.0, 0.0, 1)
    # b' A^-1 b = 4/2 + 16/8 = 4
    assert elliptic_constant_coeff([[2.0, 0.0], [0.0, 8.0]], [2.0, 4.0]).b == pytest.approx(-1.0)
    # full matrix: compare against an explicit inverse
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -2.0])
    assert elliptic_constant_coeff(A, b, n=2).b == pytest.approx(-b @ np.linalg.solve(A, b) / 4)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_elliptic_shift_is_invariant_under_rotation(seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    G = rng.normal(size=(3, 3))
    A = G @ G.T + 3.0 * np.eye(3)
    b = rng.normal(size=3)
    rotated = U @ A @ U.T
    rotated = 0.5 * (rotated + rotated.T)
    assert elliptic_constant_coeff(rotated, U @ b).b == pytest.approx(elliptic_constant_coeff(A, b).b, rel=1e-10)

@pytest.mark.parametrize('A, b, error', [
    ([[1.0, 2.0], [2.0, 1.0]], [0.0, 0.0], NotSPD),
    ([[1.0, 0.5], [0.0, 1.0]], [0.0, 0.0], NotSPD),
    ([[1.0, 0.0], [0.0, 1e-20]], [0.0, 0.0], NotSPD),
    ([[1.0, 0.0], [0.0, 1.0]], [0.0], BadDimension),
])
def test_elliptic_rejects(A, b, error):
    with pytest.raises(error):
        elliptic_constant_coeff(A, b)


def test_elliptic_dimension_mismatch():
    with pytest.raises(BadDimension):
        elliptic_constant_coeff(np.eye(2), [0.0, 0.0], n=3)


def test_sturm_liouville_constant_coefficients():
    assert fields(sturm_liouville('const:1', 'const:5')) == (4.0, 1.0, -5.0, 1)


def test_sturm_liouville_linear_p():
    # Q = -1 / (16 (1 + x)) is smallest at x = 0
    assert sturm_liouville('affine:1,1', 'const:0').b == pytest.approx(1 / 16)


def test_sturm_liouville_rejects_nonpositive_p():
    with pytest.raises(NonPositiveP):
        sturm_liouville('affine:-2,1', 'const:0')
    with pytest.raises(DomainError):
        sturm_liouville('const:1', 'const:0', interval=(1.0, 0.0))


def test_potential_finite_differences_match_exact_derivatives():
    x = np.linspace(0.1, 0.9, 9)
    p = coefficient_function('poly:1,0.5,1')
    q = coefficient_function('affine:2,0')
    exact = potential_Q(p, q, x)
    numeric = potential_Q(lambda t: 1 + 0.5 * t + t ** 2, q, x, h=1e-4)
    assert numeric == pytest.approx(exact, rel=1e-6)


def test_parse_inline_profile():
    assert fields(parse_inline_profile('classical:n=2')) == fields(classical_membrane(2))
    assert fields(parse_inline_profile('schrodinger:N=3,M=1')) == fields(schrodinger_like(3, 1.0))
    assert fields(parse_inline_profile('hyperbolic:y_sup2=4,y_inf2=1')) == (8.0, 0.0, 1.0, 1)


@pytest.mark.parametrize('spec', ['bogus:n=1', 'classical:k=2', 'classical:n=x', 'classical:', 'classical:n'])
def test_parse_inline_profile_rejects(spec):
    with pytest.raises(BadProfileSpec):
        parse_inline_profile(spec)


def test_parse_inline_profile_validates_values():
    with pytest.raises(BadDimension):
        parse_inline_profile('classical:n=1.5')
    with pytest.raises(InputError):
        parse_inline_profile('classical:n=nan')


def test_profile_from_dict():
    explicit = {'name': 'custom', 'c': 2.0, 'a': 1.0, 'b': 0.5, 'index_origin': 0}
    assert fields(profile_from_dict(explicit)) == (2.0, 1.0, 0.5, 0)
    assert profile_from_dict({'kind': 'elliptic', 'A': [[2.0, 0.0], [0.0, 8.0]], 'b_vec': [2.0, 4.0]}).b \
        == pytest.approx(-1.0)
    assert profile_from_dict({'kind': 'sturm_liouville', 'p': 'const:1', 'q': 'const:2'}).b == -2.0
    with pytest.raises(BadProfileSpec):
        profile_from_dict({'name': 'x', 'c': 1.0})
    with pytest.raises(BadProfileSpec):
        profile_from_dict({'kind': 'classical', 'dim': 2})


@pytest.mark.parametrize('data', [
    {'kind': 'classical', 'n': 'two'},
    {'kind': 'sphere', 'n': [2]},
    {'kind': 'inhomogeneous', 'n': 2, 'q_min': 'x', 'q_max': 2.0},
    {'name': 'x', 'c': 'x', 'a': 1, 'b': 0, 'index_origin': 1},
    {'name': 'x', 'c': 1.0, 'a': None, 'b': 0, 'index_origin': 1},
    {'name': 'x', 'c': 1.0, 'a': 1, 'b': 0, 'index_origin': True},
    {'name': 'x', 'c': 1.0, 'a': 1, 'b': 0, 'index_origin': 'one'},
])
def test_profile_from_dict_rejects_non_numeric_fields(data):
    with pytest.raises(InputError):
        profile_from_dict(data)


def test_bound_profile_validation():
    with pytest.raises(InputError):
        BoundProfile(name='bad', c=0.0)
    with pytest.raises(InputError):
        BoundProfile(name='bad', c=1.0, b=float('nan'))
    with pytest.raises(InputError):
        BoundProfile(name='bad', c=1.0, index_origin=True)


def test_resolve_profile_reads_json(tmp_path):
    path = tmp_path / 'profile.json'
    path.write_text(json.dumps({'kind': 'sphere', 'n': 2}))
    assert fields(resolve_profile(str(path))) == fields(sphere_n(2))
    assert fields(resolve_profile('classical:n=2')) == fields(classical_membrane(2))
    broken = tmp_path / 'broken.json'
    broken.write_text('{')
    with pytest.raises(BadProfileSpec):
        resolve_profile(str(broken))
