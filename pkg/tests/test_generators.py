import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from errors import BadSourceSpec, CountTooLarge, DomainError, NonPositiveDensity, NonPositiveP
from generators import (SpectrumSource, TridiagonalMatrix, box_spectrum, construction_profile, fd_1d_closed_form,
                        fd_laplacian_1d, fd_laplacian_2d_kronecker, generate, inhomogeneous_fd_1d,
                        laplacian_1d_matrix, source_from_dict, sturm_error_bound, sturm_liouville_fd, trace_gap,
                        tridiag_eigenvalues)


def _random_tridiagonal(n, seed):
    rng = np.random.default_rng(seed)
    return TridiagonalMatrix(rng.uniform(-3, 3, n), rng.uniform(-1, 1, n - 1))


@pytest.mark.parametrize('n, seed', [(1, 0), (2, 1), (7, 2), (50, 3)])
def test_sturm_bisection_matches_lapack(n, seed):
    T = _random_tridiagonal(n, seed)
    expected = eigh_tridiagonal(T.diag, T.offdiag, eigvals_only=True)
    np.testing.assert_allclose(tridiag_eigenvalues(T, n), expected, rtol=1e-12, atol=1e-12)


def test_sturm_count_at_the_gershgorin_ends():
    T = _random_tridiagonal(20, 4)
    lo, hi = T.gershgorin_bounds()
    assert T.sturm_count([lo - 1.0, hi + 1.0]).tolist() == [0, 20]


def test_repeated_eigenvalues():
    # decoupled blocks give a double eigenvalue
    T = TridiagonalMatrix([2.0, 2.0, 2.0], [0.0, 0.0])
    np.testing.assert_allclose(tridiag_eigenvalues(T, 3), [2.0, 2.0, 2.0], rtol=1e-14)


def test_count_too_large():
    with pytest.raises(CountTooLarge):
        tridiag_eigenvalues(TridiagonalMatrix([1.0, 2.0], [0.5]), 3)


def test_box_spectrum():
    square = box_spectrum([1.0, 1.0], 6).values / math.pi ** 2
    np.testing.assert_allclose(square, [2, 5, 5, 8, 10, 10], rtol=1e-14)
    interval = box_spectrum([math.pi], 4).values
    np.testing.assert_allclose(interval, [1, 4, 9, 16], rtol=1e-14)
    # a long thin box fills the low spectrum along its long side
    thin = box_spectrum([3.0, 1.0], 3).values / math.pi ** 2
    np.testing.assert_allclose(thin, [1 / 9 + 1, 4 / 9 + 1, 1 + 1], rtol=1e-14)


def test_box_rejects_bad_sides():
    with pytest.raises(DomainError):
        box_spectrum([1.0, 0.0], 3)


def test_fd_1d_converges_to_the_continuum():
    spectrum = fd_laplacian_1d(math.pi, 99, 3)
    assert spectrum.values[0] == pytest.approx(1.0, abs=1e-4)
    assert spectrum.values[0] < 1.0
    np.testing.assert_allclose(spectrum.values, [1, 4, 9], rtol=1e-2)


def test_fd_1d_second_order():
    # error ratio at halved mesh width is close to 4
    errors = [abs(fd_1d_closed_form(math.pi, n, 1)[0] - 1.0) for n in (19, 39, 79)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.2 <= coarse / fine <= 4.8


def test_fd_1d_closed_form_equals_sturm():
    np.testing.assert_allclose(tridiag_eigenvalues(laplacian_1d_matrix(2.0, 30), 30),
                               fd_1d_closed_form(2.0, 30, 30), rtol=1e-10)


@pytest.mark.parametrize('n', [5000])
def test_fd_1d_fine_grid_passes_the_cross_check(n):
    spectrum = fd_laplacian_1d(1.0, n, 3)
    np.testing.assert_allclose(spectrum.values, fd_1d_closed_form(1.0, n, 3), rtol=0)
    T = laplacian_1d_matrix(1.0, n)
    error = np.abs(tridiag_eigenvalues(T, 3) - spectrum.values)
    assert np.all(error <= sturm_error_bound(T))


def test_fd_1d_count_limits():
    with pytest.raises(CountTooLarge):
        fd_laplacian_1d(1.0, 5, 6)


def test_fd_2d_single_point():
    # one interior node of the unit square: two 1D modes of 8
    assert fd_laplacian_2d_kronecker(1.0, 1.0, 1, 1, 1).values.tolist() == pytest.approx([16.0])


def test_fd_2d_is_all_pairwise_sums():
    mu = fd_1d_closed_form(1.0, 4, 4)
    nu = fd_1d_closed_form(2.0, 3, 3)
    expected = np.sort(np.add.outer(mu, nu).ravel())
    np.testing.assert_allclose(fd_laplacian_2d_kronecker(1.0, 2.0, 4, 3, 12).values, expected, rtol=1e-14)


def test_sturm_liouville_reduces_to_the_laplacian():
    spectrum = sturm_liouville_fd('const:1', 'const:0', (0.0, math.pi), 999, 2)
    np.testing.assert_allclose(spectrum.values, [1.0, 4.0], rtol=1e-5)
    np.testing.assert_allclose(spectrum.values, fd_1d_closed_form(math.pi, 999, 2), rtol=1e-9)


def test_sturm_liouville_shift_and_scale():
    base = sturm_liouville_fd('const:1', 'const:0', (0.0, 1.0), 60, 4).values
    shifted = sturm_liouville_fd('const:1', 'const:5', (0.0, 1.0), 60, 4).values
    scaled = sturm_liouville_fd('const:4', 'const:0', (0.0, 1.0), 60, 4).values
    np.testing.assert_allclose(shifted, base + 5.0, rtol=1e-10)
    np.testing.assert_allclose(scaled, 4.0 * base, rtol=1e-10)


def test_sturm_liouville_needs_positive_p():
    with pytest.raises(NonPositiveP):
        sturm_liouville_fd('affine:1,-0.5', 'const:0', (0.0, 1.0), 20, 2)


def test_inhomogeneous_density_scales_the_spectrum():
    unit = inhomogeneous_fd_1d('const:1', (0.0, 1.0), 40, 5).values
    heavy = inhomogeneous_fd_1d('const:4', (0.0, 1.0), 40, 5).values
    np.testing.assert_allclose(unit, fd_1d_closed_form(1.0, 40, 5), rtol=1e-10)
    np.testing.assert_allclose(heavy, unit / 4.0, rtol=1e-10)


def test_inhomogeneous_needs_positive_density():
    with pytest.raises(NonPositiveDensity):
        inhomogeneous_fd_1d('affine:-2,1', (0.0, 1.0), 20, 2)


def test_trace_identity():
    T = laplacian_1d_matrix(1.0, 999)
    assert trace_gap(T) <= 1e-9 * np.sum(T.diag)


def test_source_validation():
    with pytest.raises(BadSourceSpec):
        SpectrumSource('fd_1d', 3, {'length': 1.0})
    with pytest.raises(BadSourceSpec):
        SpectrumSource('fd_1d', 0, {'length': 1.0, 'grid': 10})
    with pytest.raises(BadSourceSpec):
        SpectrumSource('fd_1d', 3, {'length': 1.0, 'grid': 2})
    with pytest.raises(BadSourceSpec):
        SpectrumSource('fd_1d', 3, {'length': 1.0, 'grid': None})
    with pytest.raises(BadSourceSpec):
        SpectrumSource('cube', 3, {})
    with pytest.raises(BadSourceSpec):
        source_from_dict({'kind': 'box'})


def test_source_aliases_and_generate():
    source = source_from_dict({'kind': 'box', 'count': 3, 'sides': [1.0]})
    assert source.kind == 'box_analytic'
    assert source.to_dict() == {'kind': 'box_analytic', 'count': 3, 'sides': [1.0]}
    np.testing.assert_allclose(generate(source).values / math.pi ** 2, [1, 4, 9], rtol=1e-14)


def test_generate_wraps_bad_parameters():
    with pytest.raises(BadSourceSpec):
        generate(SpectrumSource('fd_1d', 3, {'length': 'long', 'grid': 10}))


@pytest.mark.parametrize('data, c', [
    ({'kind': 'box', 'count': 3, 'sides': [1.0, 2.0, 3.0]}, 4.0 / 3.0),
    ({'kind': 'fd1d', 'count': 3, 'length': 1.0, 'grid': 10}, 4.0),
    ({'kind': 'fd2d', 'count': 3, 'lx': 1.0, 'ly': 1.0, 'nx': 5, 'ny': 5}, 2.0),
    ({'kind': 'sturm', 'count': 3, 'p': 'const:1', 'q': 'const:0', 'interval': [0, 1], 'grid': 10}, 4.0),
    ({'kind': 'inhomogeneous', 'count': 3, 'density': 'affine:1,1', 'interval': [0, 1], 'grid': 9}, None),
])
def test_construction_profile(data, c):
    profile = construction_profile(source_from_dict(data))
    if c is not None:
        assert profile.c == pytest.approx(c)
    else:
        # density samples 1.1 .. 1.9 on the nine interior nodes
        assert profile.c == pytest.approx(4.0 * 1.9 / 1.1)
