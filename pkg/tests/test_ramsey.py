import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.linalg import expm

from rfcqed.errors import NumericalError, ParameterError
from rfcqed.probes.ramsey import (
    PulseSpec,
    RamseyConfig,
    RamseySession,
    RamseyTrace,
    calibrate_pi_half,
    modulation_frequency,
    oscillator_eigenfunctions,
    propagate,
    ramsey_scan,
    revival_peaks,
    t2_feasibility,
    trace_contrast,
    wavepacket_snapshot,
)
from rfcqed.quantum.models import ModelParams

PULSE = PulseSpec(rabi_amplitude=0.1, drive_frequency=1.0, duration=10.0)


def _trace(tau, p0):
    return RamseyTrace(tau_w=np.asarray(tau), p0=np.asarray(p0), pulse=PULSE, theta_star=0.0, offset=0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        PulseSpec(rabi_amplitude=0.1, drive_frequency=1.0, duration=0.0)
    with pytest.raises(ValueError):
        RamseyConfig(unknown=1)
    cfg = RamseyConfig(tau_w_max=100.0, tau_w_points=11)
    np.testing.assert_allclose(cfg.tau_w, np.arange(0.0, 101.0, 10.0))


def test_propagate_static_hamiltonian():
    h = np.array([[0.0, 0.3], [0.3, 1.0]])
    psi = np.array([1.0, 0.0], dtype=complex)
    result = propagate(psi, lambda t: h, 0.0, 7.0)
    np.testing.assert_allclose(result, expm(-1j * 7.0 * h) @ psi, atol=1e-8)


def test_propagate_rejects_norm_drift():
    h = np.array([[0.0, 3.0], [3.0, 10.0]])
    psi = np.array([1.0, 0.0], dtype=complex)
    with pytest.raises(NumericalError, match="norm drift"):
        propagate(psi, lambda t: h, 0.0, 500.0, rtol=1e-3, atol=1e-3)


def test_propagate_rejects_unnormalized_state():
    with pytest.raises(ParameterError, match="not normalized"):
        propagate(np.array([1.0, 1.0]), lambda t: np.eye(2), 0.0, 1.0)


def test_propagate_empty_interval():
    psi = np.array([0.0, 1.0])
    np.testing.assert_allclose(propagate(psi, lambda t: np.eye(2), 2.0, 2.0), psi)


def test_oscillator_eigenfunctions_are_orthonormal():
    x = np.linspace(-4.0, 4.0, 4001)
    phi = oscillator_eigenfunctions(8, x, 100.0)
    gram = trapezoid(phi[:, None, :] * phi[None, :, :], x, axis=-1)
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-8)


def test_wavepacket_snapshot_of_vacuum():
    chi = np.array([0.0, 1.0])
    state = np.kron(chi, np.eye(6)[0])
    x = np.linspace(-4.0, 4.0, 2001)
    snapshot = wavepacket_snapshot(state, chi, x, 100.0)
    assert snapshot.weight == pytest.approx(1.0)
    assert trapezoid(snapshot.density, x) == pytest.approx(1.0)
    assert x[np.argmax(snapshot.density)] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(NumericalError, match="no excited component"):
        wavepacket_snapshot(state, np.array([1.0, 0.0]), x, 100.0)


def test_trace_analysis():
    tau = np.arange(400) * 0.5
    omega = 2 * math.pi * 10 / 200.0
    trace = _trace(tau, 0.5 + 0.4 * np.cos(omega * tau))
    assert trace_contrast(trace) == pytest.approx(0.8, abs=1e-3)
    assert modulation_frequency(trace) == pytest.approx(omega, rel=1e-9)
    revivals = revival_peaks(trace)
    assert revivals[0][0] == pytest.approx(2 * math.pi / omega)
    assert revivals[0][1] == pytest.approx(0.9)


def test_modulation_frequency_input_checks():
    with pytest.raises(ParameterError):
        modulation_frequency(_trace([0.0, 1.0, 2.0], [1.0, 0.5, 1.0]))
    with pytest.raises(ParameterError, match="uniform"):
        modulation_frequency(_trace([0.0, 1.0, 3.0, 4.0, 5.0], [1.0, 0.5, 1.0, 0.5, 1.0]))


def test_t2_feasibility():
    report = t2_feasibility(5e9, [1.0, 100.0])
    assert report["required_tau_w_s"] == pytest.approx(2e-10)
    assert report["ratio_to_t2_1us"] == pytest.approx(2e-4)
    with pytest.raises(ParameterError):
        t2_feasibility(0.0)


def test_session_state_bookkeeping():
    p = ModelParams.from_dimensionless(0.1, 100.0, N=2)
    session = RamseySession(p, RamseyConfig(fock_cutoff=30))
    assert session.target == "s1_1"
    assert session.return_probability(session.ground_state) > 0.95
    assert session.preparation_fidelity(session.ground_state) == pytest.approx(0.5, abs=0.05)
    evolved = session.free_evolve(session.ground_state, 37.0)
    assert np.linalg.norm(evolved) == pytest.approx(1.0)
    assert session.return_probability(evolved) == pytest.approx(session.return_probability(session.ground_state))


def test_session_rejects_unknown_target():
    p = ModelParams.from_dimensionless(0.1, 100.0, N=2)
    with pytest.raises(ParameterError, match="no sector state"):
        RamseySession(p, RamseyConfig(fock_cutoff=10), target="s3_0")


@pytest.mark.slow
def test_calibrated_pulse_and_short_scan():
    p = ModelParams.from_dimensionless(0.4, 1e4, N=2)
    cfg = RamseyConfig(rabi_amplitude=0.05, fock_cutoff=40, duration_points=21)
    session = RamseySession(p, cfg)
    pulse = calibrate_pi_half(p, session=session)
    assert pulse.fidelity > 0.9
    assert 0.5 * session.nominal_duration() <= pulse.duration <= 1.5 * session.nominal_duration()

    trace = ramsey_scan(p, tau_w=np.linspace(0.0, 50.0, 6), pulse=pulse, session=session)
    assert np.all((trace.p0 >= 0.0) & (trace.p0 <= 1.0))
    assert trace.p0[0] > 0.8
    assert trace.metadata["fock_cutoff"] == 40


@pytest.mark.slow
def test_uncoupled_qubit_gives_flat_trace():
    p = ModelParams.from_dimensionless(0.0, 1e4, N=1)
    cfg = RamseyConfig(rabi_amplitude=0.01)
    trace = ramsey_scan(p, tau_w=np.linspace(0.0, 200.0, 9), cfg=cfg)
    assert trace.fidelity > 0.999
    assert np.ptp(trace.p0) < 1e-3
    assert trace.p0.min() > 0.99
