import logging
import math

import numpy as np
import pytest

from rfcqed.adiabatic.born_oppenheimer import XGrid, build_surfaces
from rfcqed.circuit.elements import CircuitParams, to_ghz
from rfcqed.circuit.flux_qubit import (
    calibrate_flux_bias,
    charge_basis_hamiltonian,
    dressed_qubit,
    flux_qubit_spectrum,
)
from rfcqed.circuit.normal_modes import normal_modes
from rfcqed.circuit.two_mode import (
    aligned_branches,
    compare_surfaces,
    single_mode_params,
    two_mode_bo_surfaces,
)
from rfcqed.errors import ParameterError


@pytest.fixture(scope="module")
def reference_circuit():
    return CircuitParams.reference_circuit()


def test_unit_conversion():
    assert to_ghz(2 * math.pi * 1e9) == pytest.approx(1.0)


def test_circuit_params(reference_circuit, caplog):
    assert reference_circuit.C_J_fF == pytest.approx(2.21)
    assert reference_circuit.flux_bias == 0.5
    assert reference_circuit.scaled_parasitics(0.5).C_s_fF == pytest.approx(0.53)
    assert reference_circuit.scaled_parasitics(0.5).L_nH == reference_circuit.L_nH
    with pytest.raises(ValueError):
        CircuitParams.reference_circuit(R_Ohm=50.0)
    with caplog.at_level(logging.WARNING, logger="rfcqed"):
        CircuitParams.reference_circuit(alpha=1.2)
    assert "alpha" in caplog.text


def test_normal_modes_of_table_i(reference_circuit):
    modes = normal_modes(reference_circuit)
    summary = modes.summary()
    bare_mhz = 1e3 * to_ghz(1 / math.sqrt(reference_circuit.L * reference_circuit.C))
    assert summary["omega_minus_mhz"] < bare_mhz
    assert summary["omega_minus_mhz"] == pytest.approx(50.0, rel=0.01)
    assert summary["g_phi_minus_ratio"] == pytest.approx(7.15, rel=0.02)
    assert summary["g_q_plus_ratio"] == pytest.approx(0.366, rel=0.02)
    assert summary["g_q_minus_ratio"] < 0.1


def test_closed_form_matches_network(reference_circuit):
    modes = normal_modes(reference_circuit)
    assert max(modes.closed_form_deviation.values()) < 1e-6
    assert modes.limit_deviation["g_phi_minus"] < 0.05


def test_charge_basis_hamiltonian_is_hermitian(reference_circuit):
    hamiltonian, ops = charge_basis_hamiltonian(reference_circuit, cutoff=3)
    assert hamiltonian.shape == (49, 49)
    np.testing.assert_allclose(hamiltonian, hamiltonian.conj().T, atol=1e-12)
    np.testing.assert_allclose(ops["phase"], ops["phase"].conj().T, atol=1e-12)
    with pytest.raises(ParameterError):
        charge_basis_hamiltonian(reference_circuit, cutoff=0)


def test_flux_qubit_spectrum(reference_circuit):
    spectrum = flux_qubit_spectrum(reference_circuit)
    assert np.all(np.diff(spectrum.energies) > 0)
    assert spectrum.omega_q_ghz > 0
    assert spectrum.phase_element > 0
    with pytest.raises(ParameterError):
        flux_qubit_spectrum(reference_circuit, levels=1)


def test_sweet_spot_mapping_is_bare(reference_circuit):
    params, metadata = single_mode_params(reference_circuit)
    assert metadata["dressed"] == 0.0
    assert metadata["flux_bias"] == 0.5
    assert metadata["omega_q_ghz"] == metadata["omega_q_bare_ghz"]
    assert metadata["omega_q_ghz"] == pytest.approx(8.0, rel=0.05)
    assert metadata["lambda_sq"] == pytest.approx(0.7, rel=0.05)
    assert metadata["mu"] == pytest.approx(2.5e4, rel=0.1)
    assert metadata["mu"] == pytest.approx((metadata["omega_q_ghz"] / (metadata["omega_minus_mhz"] * 1e-3)) ** 2)
    assert params.lambda_sq == pytest.approx(metadata["lambda_sq"])
    assert params.N == 2
    assert metadata["p_term_bound"] < 0.01


def test_dressed_gap_lies_below_bare(reference_circuit):
    gap, element = dressed_qubit(reference_circuit)
    spectrum = flux_qubit_spectrum(reference_circuit)
    assert 0 < gap < spectrum.omega_q_ghz
    assert element > 0
    _, metadata = single_mode_params(reference_circuit, dressed=True)
    assert metadata["omega_q_ghz"] == pytest.approx(gap)
    assert metadata["phase_element"] == pytest.approx(element)


def test_omega_plus_follows_limit_form(reference_circuit):
    modes = normal_modes(reference_circuit)
    limit = 1 / math.sqrt(reference_circuit.L_s * reference_circuit.C_b)
    assert modes.omega_plus == pytest.approx(limit, rel=0.05)


def test_calibration_keeps_sweet_spot_when_gap_suffices(reference_circuit, caplog):
    with caplog.at_level(logging.WARNING, logger="rfcqed"):
        kept = calibrate_flux_bias(reference_circuit, target_ghz=8.0)
    assert kept.flux_bias == 0.5
    assert "keeping bias 0.5" in caplog.text


@pytest.mark.slow
def test_flux_bias_calibration_on_bare_gap(reference_circuit):
    target = flux_qubit_spectrum(reference_circuit).omega_q_ghz + 1.0
    calibrated = calibrate_flux_bias(reference_circuit, target_ghz=target)
    assert calibrated.flux_bias > 0.5
    assert flux_qubit_spectrum(calibrated, check_convergence=False).omega_q_ghz == pytest.approx(target, abs=1e-4)


@pytest.mark.slow
def test_two_mode_surfaces_are_even_at_sweet_spot(reference_circuit):
    grid = XGrid.symmetric(3.0, 201)
    surfaces = two_mode_bo_surfaces(reference_circuit, grid, branches=3)
    assert np.max(np.abs(surfaces.branches - surfaces.branches[:, ::-1])) < 1e-8


@pytest.mark.slow
def test_two_mode_surfaces_overlay_single_mode(reference_circuit):
    grid = XGrid.symmetric(3.0, 201)
    two_mode = two_mode_bo_surfaces(reference_circuit, grid, branches=3)
    single = build_surfaces(grid, two_mode.params)
    assert compare_surfaces(single, two_mode, 2.0, count=3) < 0.1


@pytest.mark.slow
def test_two_mode_surfaces(reference_circuit):
    grid = XGrid.symmetric(3.0, 201)
    surfaces = two_mode_bo_surfaces(reference_circuit, grid, branches=3)
    assert surfaces.branches.shape == (3, 201)
    assert surfaces.labels == ["b0", "b1", "b2"]
    assert np.all(np.diff(surfaces.branches, axis=0) >= -1e-12)
    x, curves = aligned_branches(surfaces, 2.0, 2)
    assert np.all(np.abs(x) <= 2.0 + 1e-12)
    assert curves[0].min() == pytest.approx(0.0)
    with pytest.raises(ParameterError):
        two_mode_bo_surfaces(reference_circuit, grid, branches=0)
