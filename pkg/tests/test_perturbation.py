import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kbmspec.errors import HypothesisViolation, InvalidInputError
from kbmspec.perturbation import (
    convergence_radius,
    eigenvalue_error_bound,
    eigenvalue_threshold,
    kbm_eigenvalue,
    rep_for_eta,
    taylor_coefficients,
    taylor_error_bound,
    trajectory,
)
from kbmspec.rep_core import default_window
from kbmspec.spectral import eigen_spectrum, generator, low_eigenvalue

from conftest import complementary, holo, principal, rep_with_casimir


def fd_coefficients(rep, window):
    """mu^(1..4) by central differences with Richardson extrapolation."""
    h = 1e-2 * convergence_radius(rep)

    def mu(x):
        return low_eigenvalue(rep, x, window)

    def d1(step):
        return (mu(step) - mu(-step)) / (2 * step)

    def d2(step):
        return (mu(step) - 2 * mu(0.0) + mu(-step)) / step ** 2

    def d3(step):
        return (mu(2 * step) - 2 * mu(step) + 2 * mu(-step) - mu(-2 * step)) / (2 * step ** 3)

    def rich(f, p=2):
        return (2 ** p * f(h / 2) - f(h)) / (2 ** p - 1)

    return rich(d1), rich(d2) / 2, rich(d3) / 6


def test_radius_examples():
    assert convergence_radius(principal(0.0)) == pytest.approx(0.377964473, abs=1e-9)
    assert convergence_radius(holo(4)) == pytest.approx(0.1767766953, abs=1e-10)
    assert convergence_radius(complementary(1 - 1e-12)) == pytest.approx(6 ** -0.5, abs=1e-9)


def test_coefficient_examples():
    s = taylor_coefficients(principal(0.0), 2)
    assert s.coefficients[0] == 0.0
    assert abs(s.coefficients[1]) < 1e-10
    assert s.coefficients[2] == pytest.approx(0.125, abs=1e-8)
    c = taylor_coefficients(complementary(0.5), 2)
    assert c.coefficients[2] == pytest.approx(0.09375, abs=1e-8)
    p = taylor_coefficients(principal(2.0), 3)
    assert abs(p.coefficients[3]) < 1e-9


@pytest.mark.parametrize("lam", [0.75, 1.0, 2.0, 5.0, 17.0])
def test_coefficients_vs_finite_difference(lam):
    rep = rep_with_casimir(lam)
    win = default_window(rep, 65)
    series = taylor_coefficients(rep, 4, win)
    m1, m2, m3 = fd_coefficients(rep, win)
    assert series.coefficients[2] == pytest.approx(lam / 8, abs=1e-8)
    assert abs(series.coefficients[1] - m1) < 1e-6
    assert abs(series.coefficients[2] - m2) < 1e-6
    assert abs(series.coefficients[3] - m3) < 1e-6
    assert np.all(np.abs(series.coefficients[1::2]) < 1e-10)


def test_order_and_series_validation():
    with pytest.raises(InvalidInputError):
        taylor_coefficients(principal(0.0), 7)
    with pytest.raises(InvalidInputError):
        taylor_coefficients(holo(1), 2)


def test_error_bound_examples():
    s = taylor_coefficients(principal(0.0), 3)
    assert taylor_error_bound(s, 0.1, 2) == pytest.approx(0.012592, abs=1e-6)
    assert taylor_error_bound(s, 0.1, 3) == pytest.approx(0.003331, abs=1e-6)
    assert taylor_error_bound(s, 0.0, 3) == 0.0
    with pytest.raises(HypothesisViolation):
        taylor_error_bound(s, 0.4, 2)


@settings(max_examples=30, deadline=None)
@given(lam=st.sampled_from([0.75, 1.0, 2.0, 5.0, 17.0]), frac=st.floats(-0.5, 0.5))
def test_series_within_envelope(lam, frac):
    rep = rep_with_casimir(lam)
    win = default_window(rep, 65)
    s = taylor_coefficients(rep, 2, win)
    x = frac * s.radius
    # floor: eigensolver absolute accuracy, relevant only when the bound underflows
    assert abs(low_eigenvalue(rep, x, win) - s(x, 2)) <= taylor_error_bound(s, x, 2) + 1e-13


@pytest.mark.parametrize("lam", [0.75, 1.0, 2.0, 5.0, 17.0])
def test_radius_is_sufficient(lam):
    rep = rep_with_casimir(lam)
    x = 0.99 * convergence_radius(rep)
    assert eigen_spectrum(generator(rep, x, default_window(rep, 129))).count_in_half_plane() == 1
    assert abs(low_eigenvalue(rep, x, default_window(rep, 129))) <= 0.5


@pytest.mark.parametrize("eta,gamma,expected", [
    (2.0, 100.0, 1.1324055),
    (0.25, 50.0, 0.8284894),
    (0.25, 100.0, 0.3911003),
    (1.25, 200.0, 0.3773438),
])
def test_eigenvalue_error_bound_examples(eta, gamma, expected):
    assert eigenvalue_error_bound(eta, gamma) == pytest.approx(expected, abs=1e-6)


def test_bound_decay_rate():
    b = [eigenvalue_error_bound(0.25, g) for g in (50, 100, 200, 400)]
    ratios = np.array(b[1:]) / np.array(b[:-1])
    assert np.all(np.diff(b) < 0)
    assert ratios[-1] == pytest.approx(0.5, abs=0.01)
    big = 1e8
    assert eigenvalue_error_bound(1.0, big) * big == pytest.approx(20 * math.sqrt(10), rel=1e-6)


def test_threshold_rejected():
    with pytest.raises(HypothesisViolation):
        eigenvalue_error_bound(0.25, eigenvalue_threshold(0.25))
    with pytest.raises(InvalidInputError):
        eigenvalue_error_bound(0.0, 100.0)


def test_rep_for_eta():
    assert rep_for_eta(0.25).casimir == 1.0
    assert isinstance(rep_for_eta(0.2).kind, type(complementary(0.5).kind))
    assert rep_for_eta(0.2).kind.s == pytest.approx(math.sqrt(0.2), abs=1e-15)
    assert rep_for_eta(1.25).kind.s == 2.0


def test_trajectory_examples():
    c = trajectory(0.25, [50, 100, 200, 400])
    assert np.all(c.within_bound)
    assert np.isrealobj(c.values)
    assert c.deviation[1] <= 0.39111
    s2 = trajectory(principal(2.0), [200.0])
    assert s2.deviation[0] <= s2.bound[0]
    assert s2.bound[0] == pytest.approx(0.3773438, abs=1e-6)
    with pytest.raises(HypothesisViolation):
        trajectory(0.25, [5.0])


def test_kbm_eigenvalue_matches_second_order():
    # lambda = (g^2/2) mu(2/g) -> (g^2/2)(lam/8)(4/g^2) = lam/4
    rep = principal(0.0)
    assert kbm_eigenvalue(rep, 1000.0) == pytest.approx(0.25, abs=1e-5)
