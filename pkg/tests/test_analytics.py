import math

import numpy as np
import pytest

from rfcqed.adiabatic.analytics import (
    SpinSector,
    critical_dos_ratio,
    displaced_parabola,
    dm_potential,
    excited_lambda_critical_sq,
    ground_minima,
    lambda_critical,
    parabola_crossing,
    splitting_log_slope,
    strong_coupling_corrections,
    triplet_singlet_gap,
    tunnel_splitting,
    tunnel_splitting_critical,
    two_qubit_quartic,
    two_qubit_unperturbed,
)
from rfcqed.adiabatic.born_oppenheimer import evaluate_curve, excited_label
from rfcqed.errors import ParameterError
from rfcqed.quantum.models import ModelParams


def test_critical_couplings():
    assert lambda_critical(4) == pytest.approx(0.5)
    assert excited_lambda_critical_sq(0.0) == pytest.approx(0.5)
    assert excited_lambda_critical_sq(0.1) == pytest.approx(1 / (2 * math.sqrt(1.1)))
    with pytest.raises(ParameterError):
        excited_lambda_critical_sq(-1.0)
    with pytest.raises(ParameterError):
        lambda_critical(0)


@pytest.mark.parametrize("s, m", [(1.0, 0.5), (0.5, 1.5), (-1.0, 0.0), (1.5, 1.0)])
def test_invalid_spin_sectors(s, m):
    with pytest.raises(ParameterError, match="invalid spin sector"):
        SpinSector(s, m)


def test_dm_potential_minima():
    lam = math.sqrt(1.8)
    left, right = ground_minima(lam, 1.0)
    x = np.linspace(0.0, 3.0, 300001)
    v = dm_potential(0.5, -0.5, x, lam)
    assert x[np.argmin(v)] == pytest.approx(right, abs=1e-4)
    assert left == -right
    with pytest.raises(ParameterError, match="single-well"):
        ground_minima(0.9, 1.0)


def test_tunnel_splitting_laws():
    mu = 1e4
    assert tunnel_splitting(0.9, 1.0, mu) == tunnel_splitting_critical(1.0, mu)
    assert tunnel_splitting_critical(1.0, mu, prefactor=2.0) == pytest.approx(2.0 * mu ** (-2 / 3))
    assert tunnel_splitting(math.sqrt(1.5), 1.0, mu) < tunnel_splitting(math.sqrt(1.3), 1.0, mu)
    assert splitting_log_slope(1, mu) == pytest.approx(-200 / 3)
    assert critical_dos_ratio(1.0, 1e5) > critical_dos_ratio(1.0, 1e4)


def test_displaced_parabolas_and_crossing():
    lam, eps = 3.0, 0.05
    crossing = parabola_crossing(-1, lam, eps)
    for m_x in (-1, 0):
        assert displaced_parabola(1, m_x, 0.0, lam, 0.0) == pytest.approx(lam ** 2 * m_x ** 2)
    left = displaced_parabola(1, -1, crossing, lam, eps)
    right = displaced_parabola(1, 0, crossing, lam, eps)
    assert left == pytest.approx(right)


def test_strong_coupling_corrections_consistent():
    zero = strong_coupling_corrections(1, 0, 4.0, 0.0)
    assert zero.well_shift_full == pytest.approx(zero.well_shift)
    assert zero.well_shift_first_order == pytest.approx(zero.well_shift)
    assert zero.splitting == pytest.approx(math.sqrt(2))

    small = strong_coupling_corrections(1, 0, 4.0, 1e-3)
    assert small.well_shift_full == pytest.approx(small.well_shift_first_order, abs=1e-6)


def test_two_qubit_closed_forms_at_origin():
    lam, eps = math.sqrt(0.8), 0.1
    closed = two_qubit_unperturbed(0.0, lam, eps)
    assert float(closed["triplet"] - closed["singlet"]) == pytest.approx(triplet_singlet_gap(lam, eps))
    p = ModelParams.from_dimensionless(0.8, 1e4, epsilon=eps, N=2)
    origin = np.zeros(1)
    assert evaluate_curve(p, "s1_0", origin)[0] == pytest.approx(float(closed["minus"]), abs=1e-12)
    assert evaluate_curve(p, "s1_2", origin)[0] == pytest.approx(float(closed["plus"]), abs=1e-12)


def test_quartic_expansion_near_origin():
    p = ModelParams.from_dimensionless(0.3, 1e4, N=2)
    x = np.linspace(-0.05, 0.05, 11)
    quartic = two_qubit_quartic(x, p.lam)
    assert quartic.lambda_crit_sq == pytest.approx(0.5)
    np.testing.assert_allclose(quartic.potential, evaluate_curve(p, excited_label(2), x), atol=1e-6)
