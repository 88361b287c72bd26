import math

import numpy as np
import pytest

from rfcqed.adiabatic.born_oppenheimer import evaluate_curve, ground_label, sector_label
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.probes.spectroscopy import (
    SpectrumConfig,
    boltzmann_weights,
    extract_peaks,
    lorentzian,
    lorentzian_sum,
    spectrum_bo_approx,
    spectrum_ground,
    spectrum_sweep,
    spectrum_thermal,
    strong_coupling_condition,
    sum_rule,
)
from rfcqed.quantum.models import ModelParams


def _nearest(peaks, target):
    return min((peak.center for peak in peaks), key=lambda c: abs(c - target))


def test_lorentzian_normalization():
    gamma = 0.01
    assert lorentzian(np.array([1.0]), 1.0, gamma)[0] == pytest.approx(1.0)
    assert lorentzian(np.array([1.0 + gamma / 2]), 1.0, gamma)[0] == pytest.approx(0.5)


def test_extract_peaks_recovers_isolated_lines():
    omega = np.linspace(0.0, 2.0, 4001)
    values = lorentzian_sum(omega, np.array([0.5003, 1.5]), np.array([2.0, 0.5]), 0.01)
    peaks = extract_peaks(omega, values)
    assert len(peaks) == 2
    assert peaks[0].center == pytest.approx(0.5003, abs=1e-6)
    assert peaks[0].height == pytest.approx(2.0, rel=1e-4)
    assert peaks[0].width == pytest.approx(0.01, rel=1e-3)


def test_config_rejects_bad_grid():
    with pytest.raises(ValueError):
        SpectrumConfig(gamma=0.01, omega_grid=[1.0, 0.5, 2.0])


def test_boltzmann_weights():
    energies = np.array([0.0, 0.1, 0.2])
    np.testing.assert_allclose(boltzmann_weights(energies, 0.0), [1.0, 0.0, 0.0])
    weights = boltzmann_weights(energies, 0.1)
    assert weights.sum() == pytest.approx(1.0)
    assert weights[1] / weights[0] == pytest.approx(math.exp(-1))


def test_uncoupled_qubit_single_line():
    p = ModelParams(omega_r=0.1, omega_q=1.0, g=0.0, N=1)
    cfg = SpectrumConfig.uniform(0.9, 1.1, 801, gamma=0.005, fock_cutoff=5)
    result = spectrum_ground(p, cfg)
    assert len(result.peaks) == 1
    assert result.peaks[0].center == pytest.approx(1.0, abs=1e-9)
    assert result.peaks[0].height == pytest.approx(1.0, rel=1e-6)
    integral, expected = sum_rule(result, cfg.gamma)
    assert integral == pytest.approx(expected, rel=0.03)


def test_resonant_rabi_splitting():
    g, gamma = 0.05, 0.005
    p = ModelParams(omega_r=1.0, omega_q=1.0, g=g, N=2)
    result = spectrum_ground(p, SpectrumConfig.uniform(0.85, 1.15, 3001, gamma=gamma, fock_cutoff=20))
    tallest = max(peak.height for peak in result.peaks)
    strong = [peak.center for peak in result.peaks if peak.height >= 0.1 * tallest]
    assert max(strong) - min(strong) == pytest.approx(math.sqrt(2) * g, abs=gamma / 2)


def test_spectrum_tracks_potential_gaps():
    gamma = 0.005
    p = ModelParams.from_dimensionless(0.1, 1e4, N=2)
    origin = np.zeros(1)
    ground = evaluate_curve(p, ground_label(2), origin)[0]
    singlet = evaluate_curve(p, sector_label(0, 0), origin)[0] - ground
    triplet = evaluate_curve(p, sector_label(1, 1), origin)[0] - ground
    assert triplet - singlet == pytest.approx(p.lambda_sq, rel=1e-2)

    cfg = SpectrumConfig.uniform(0.85, 1.2, 3501, gamma=gamma, fock_cutoff=60)
    exact = spectrum_ground(p, cfg)
    assert _nearest(exact.peaks, singlet) == pytest.approx(singlet, abs=gamma / 2)
    assert _nearest(exact.peaks, triplet) == pytest.approx(triplet, abs=gamma / 2)

    approx = spectrum_bo_approx(p, cfg)
    assert _nearest(approx.peaks, singlet) == pytest.approx(_nearest(exact.peaks, singlet), abs=gamma / 2)


def test_truncated_eigenpairs_rejected():
    p = ModelParams.from_dimensionless(0.5, 100.0, N=1)
    cfg = SpectrumConfig.uniform(0.0, 2.0, 101, gamma=0.01, fock_cutoff=30, eigenpair_count=2)
    with pytest.raises(NumericalError, match="insufficient eigenpairs"):
        spectrum_ground(p, cfg)


def test_invalid_probe_site():
    p = ModelParams.from_dimensionless(0.1, 100.0, N=1)
    with pytest.raises(ParameterError, match="invalid site"):
        spectrum_ground(p, SpectrumConfig.uniform(0.5, 1.5, 101, gamma=0.01, fock_cutoff=10, probe_site=2))


def test_thermal_spectrum_needs_temperature():
    p = ModelParams.from_dimensionless(0.1, 100.0, N=1)
    with pytest.raises(ParameterError):
        spectrum_thermal(p, SpectrumConfig.uniform(0.5, 1.5, 101, gamma=0.01, fock_cutoff=10))


def test_thermal_matches_ground_when_cold():
    p = ModelParams.from_dimensionless(0.2, 100.0, N=1)
    cold = SpectrumConfig.uniform(0.5, 1.5, 501, gamma=0.01, fock_cutoff=30, temperature=1e-3)
    ground = SpectrumConfig.uniform(0.5, 1.5, 501, gamma=0.01, fock_cutoff=30)
    np.testing.assert_allclose(spectrum_thermal(p, cold).values, spectrum_ground(p, ground).values, atol=1e-6)


def test_strong_coupling_condition():
    p = ModelParams.from_dimensionless(0.1, 1e4)
    check = strong_coupling_condition(p, 0.005)
    assert check.passed
    assert check.ratio == pytest.approx(math.sqrt(0.001) / math.sqrt(0.005 * 0.01))
    assert not strong_coupling_condition(p, 1.0).passed


def test_spectrum_sweep_long_format():
    base = ModelParams.from_dimensionless(0.1, 100.0, N=1)
    cfg = SpectrumConfig.uniform(0.5, 1.5, 201, gamma=0.01, fock_cutoff=20)
    frame, peaks = spectrum_sweep(base, cfg, [0.0, 0.1])
    assert list(frame.columns) == ["lambda_sq", "omega", "S"]
    assert len(frame) == 402
    assert set(peaks["lambda_sq"]) <= {0.0, 0.1}
