import logging
import math

import numpy as np
import pytest

from rfcqed.errors import ParameterError
from rfcqed.quantum.models import (
    GeneralCQEDParams,
    ModelParams,
    build_h_cqed,
    build_h_edm,
    build_h_stark,
    depolarization_offset,
    lowest_levels,
    stark_validity,
    validate_truncation,
)


def test_dimensionless_round_trip():
    p = ModelParams.from_dimensionless(0.8, 1e4, epsilon=0.02, N=3)
    assert p.lambda_sq == pytest.approx(0.8)
    assert p.mu == pytest.approx(1e4)
    assert p.omega_r_tilde == pytest.approx(0.01)
    assert p.lambda_c == pytest.approx(1 / math.sqrt(3))
    assert p.lambda_crit_sq == pytest.approx(1 / (2 * math.sqrt(1.02)))
    assert set(p.derived()) >= {"lambda", "lambda_sq", "mu", "lambda_c"}


@pytest.mark.parametrize("lambda_sq, mu", [(-0.1, 100.0), (0.5, 0.0)])
def test_dimensionless_rejects_bad_input(lambda_sq, mu):
    with pytest.raises(ParameterError):
        ModelParams.from_dimensionless(lambda_sq, mu)


def test_general_params_validation():
    with pytest.raises(ParameterError):
        build_h_cqed(GeneralCQEDParams(omega_r=1.0, omega_q=[1.0, 1.0], g=[0.1]), 4)
    with pytest.raises(ParameterError, match="symmetric"):
        build_h_cqed(GeneralCQEDParams(omega_r=1.0, omega_q=[1.0, 1.0], g=[0.1, 0.1],
                                       J=[[0.0, 0.1], [0.2, 0.0]]), 4)


@pytest.mark.parametrize("epsilon", [0.0, 0.1, -0.5])
def test_edm_matches_general_cqed_up_to_constant(epsilon):
    p = ModelParams.from_dimensionless(0.6, 20.0, epsilon=epsilon, N=2)
    edm = build_h_edm(p, 10).matrix
    cqed = build_h_cqed(GeneralCQEDParams.from_model(p), 10).matrix
    offset = depolarization_offset(p)
    np.testing.assert_allclose(edm, cqed + offset * np.eye(edm.shape[0]), atol=1e-12)


def test_uncoupled_spectrum():
    p = ModelParams(omega_r=0.3, omega_q=1.0, g=0.0, N=1)
    levels = lowest_levels(build_h_edm(p, 10), 4)
    np.testing.assert_allclose(levels, [-0.5, -0.2, 0.1, 0.4], atol=1e-12)


def test_lowest_levels_rejects_too_many():
    p = ModelParams.from_dimensionless(0.1, 4.0)
    with pytest.raises(ParameterError):
        lowest_levels(build_h_edm(p, 2), 7)


def test_truncation_report():
    p = ModelParams.from_dimensionless(0.5, 100.0, N=1)
    report = validate_truncation(p, 60, k_levels=6)
    assert report.passed
    assert report.n_check == 75
    assert not validate_truncation(p, 4, k_levels=6).passed


@pytest.mark.parametrize("n_qubits", [1, 2])
def test_stark_limit(n_qubits):
    p = ModelParams.from_dimensionless(0.01, 1e4, N=n_qubits)
    exact = lowest_levels(build_h_edm(p, 40), 5)
    stark = lowest_levels(build_h_stark(p, 40), 5)
    assert np.max(np.abs(exact - stark)) < 10 * p.lambda_sq ** 2


def test_stark_validity_warning(caplog):
    p = ModelParams.from_dimensionless(3.0, 1e4)
    assert stark_validity(p) == pytest.approx(1.5)
    with caplog.at_level(logging.WARNING, logger="rfcqed"):
        build_h_stark(p, 3)
    assert "validity" in caplog.text
