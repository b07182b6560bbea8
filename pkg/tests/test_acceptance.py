"""
Cross-module checks on the catalog of spectra with known ground truth in
configs/generated_spectra.yml.
"""
import math
import os

import numpy as np
import pytest
import yaml

from generators import (construction_profile, fd_1d_closed_form, generate, laplacian_1d_matrix, source_from_dict,
                        trace_gap, tridiag_eigenvalues)
from profiles import classical_membrane
from solvers import bound_table, containment_bound, yang1_bound
from spectra import make_spectrum
from verify import (SuiteSettings, aizenman_lieb_batch, beta_function, check_family_inequality,
                    monotonicity_report, regime_agreement_report)

CATALOG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs',
                       'generated_spectra.yml')
FAMILY_P = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0]
LOW_GRID = [0.25 * k for k in range(9)]
HIGH_GRID = [2.0, 2.5, 3.0, 4.0, 6.0]


@pytest.fixture(scope='module')
def catalog():
    with open(CATALOG, 'r') as f:
        config = yaml.safe_load(f)
    entries = []
    for entry in config['sources']:
        source = source_from_dict({k: v for k, v in entry.items() if k != 'name'})
        entries.append((entry['name'], generate(source), construction_profile(source)))
    return config['m_values'], entries


def test_catalog_size(catalog):
    m_values, entries = catalog
    assert m_values == [1, 2, 5, 10]
    assert len(entries) == 25
    assert all(len(spectrum) == 12 for _, spectrum, _ in entries)


def test_bounds_are_monotone_in_p(catalog):
    m_values, entries = catalog
    for name, spectrum, profile in entries:
        for m in m_values:
            report = monotonicity_report(profile, spectrum, m, LOW_GRID, HIGH_GRID)
            assert report.passed, (name, m, report.witness)
            agreement = regime_agreement_report(profile, spectrum, m)
            assert agreement.passed, (name, m, agreement.witness)


def test_every_bound_contains_the_next_eigenvalue(catalog):
    m_values, entries = catalog
    for name, spectrum, profile in entries:
        for m in m_values:
            next_value = spectrum.values[m]
            rows = bound_table(profile, spectrum, m, LOW_GRID + HIGH_GRID)
            rows += [yang1_bound(profile, spectrum, m), containment_bound(profile, spectrum, m)]
            for row in rows:
                assert row.error is None, (name, m, row.error)
                assert next_value <= row.value * (1 + 1e-9), (name, m, row.method, row.p)


def test_unit_square_yang1():
    spectrum = make_spectrum([2 * math.pi ** 2, 5 * math.pi ** 2])
    bound = yang1_bound(classical_membrane(2), spectrum, 1).value
    assert bound == pytest.approx(6 * math.pi ** 2, rel=1e-14)
    assert spectrum.values[1] < bound


def test_family_inequality_on_the_catalog(catalog):
    m_values, entries = catalog
    for name, spectrum, profile in entries:
        for m in m_values:
            for p in FAMILY_P:
                report = check_family_inequality(profile, spectrum, m, p)
                assert report.passed, (name, m, p, report.witness)


def test_beta_integrals():
    report = aizenman_lieb_batch(50, seed=0, tol=1e-8)
    assert report.passed, report.witness
    assert beta_function(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-13)
    assert beta_function(1.0, 2.0) == pytest.approx(1 / 2, rel=1e-13)


@pytest.mark.parametrize('q, p', [(3.0, 2.0), (4.0, 2.0), (5.5, 2.5), (7.0, 3.0)])
def test_beta_ratios(q, p):
    s = q - 2.0
    assert beta_function(s, 2.0) / beta_function(s, 3.0) == pytest.approx((s + 2.0) / 2.0, rel=1e-12)
    assert beta_function(q - p, p) / beta_function(q - p, p + 1) == pytest.approx(q / p, rel=1e-12)


def test_eigensolver_at_size_999():
    T = laplacian_1d_matrix(1.0, 999)
    np.testing.assert_allclose(tridiag_eigenvalues(T, 5), fd_1d_closed_form(1.0, 999, 5), rtol=1e-10)
    assert trace_gap(T) <= 1e-9 * float(np.sum(T.diag))


def test_default_suite_settings_match_the_catalog_checks():
    settings = SuiteSettings()
    assert settings.family_p == FAMILY_P
    assert settings.p_grid_low == LOW_GRID
    assert settings.p_grid_high == HIGH_GRID
