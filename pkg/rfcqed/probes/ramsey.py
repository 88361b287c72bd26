"""
Ramsey protocol on the extended Dicke model: pi/2 pulse, free evolution,
phase-adjusted pi/2 pulse, readout of the qubit ground-state population.

Time is measured in 1/omega_q and energies in omega_q. The drive
Omega cos(omega_d t + theta) sigma_x^1 is applied in the lab frame (no
rotating-wave approximation) and referenced to a continuous local
oscillator, so theta is a phase offset against absolute time.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import solve_ivp, trapezoid
from scipy.signal import find_peaks

from rfcqed.adiabatic.born_oppenheimer import (
    default_grid,
    evaluate_curve,
    excited_label,
    find_minima,
    ground_label,
    parse_sector_label,
    sector_eigen,
    spin_sectors,
)
from rfcqed.config import settings
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.quantum.models import ModelParams, build_h_edm, minimal_fock_cutoff
from rfcqed.quantum.operators import BasisDescriptor, pauli_on_site
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.probes.ramsey")

MIN_FIDELITY = 0.8
NORM_DRIFT = 1e-8
SNAPSHOT_MIN_NORM = 1e-6


class PulseSpec(BaseModel):
    rabi_amplitude: float = Field(gt=0)
    drive_frequency: float
    phase: float = 0.0
    duration: float = Field(gt=0)
    fidelity: Optional[float] = None


class RamseyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rabi_amplitude: Optional[float] = Field(default=None, gt=0)  # None: rabi_in_resonator_units * omega_r
    tau_w_max: float = Field(default=2000.0, ge=0)
    tau_w_points: int = Field(default=201, ge=2)
    theta_points: int = Field(default=8, ge=4)
    duration_points: int = Field(default=41, ge=5)
    detuning: float = 0.0
    fock_cutoff: Optional[int] = Field(default=None, ge=1)
    k_levels: int = Field(default=10, ge=1)
    snapshot_times: List[float] = Field(default_factory=list)
    t2_us: List[float] = Field(default_factory=lambda: [1.0, 100.0])
    resonator_frequency_hz: Optional[float] = Field(default=None, gt=0)  # for the T_2 report

    @property
    def tau_w(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_w_max, self.tau_w_points)


@dataclass
class RamseyTrace:
    tau_w: np.ndarray
    p0: np.ndarray
    pulse: PulseSpec
    theta_star: float
    offset: float  # mean excited-minus-ground energy of the packet relative to omega_d
    metadata: Dict = field(default_factory=dict)

    @property
    def fidelity(self) -> Optional[float]:
        return self.pulse.fidelity

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"tau_w": self.tau_w, "P_0": self.p0})


@dataclass
class WavepacketSnapshot:
    x: np.ndarray
    density: np.ndarray  # normalized to unit integral
    weight: float        # squared norm of the projected component

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"X": self.x, "density": self.density})


# --- propagation --------------------------------------------------------------

class DrivenHamiltonian:
    """H(t) = H0 + Omega cos(omega_d t + theta) (Q (x) 1) acting on qubits-then-boson vectors."""

    def __init__(self, h0: np.ndarray, drive_qubit: np.ndarray, boson_dimension: int,
                 rabi: float = 0.0, frequency: float = 0.0, phase: float = 0.0):
        self.h0 = h0
        self.drive_qubit = drive_qubit
        self.qubit_dimension = drive_qubit.shape[0]
        self.boson_dimension = boson_dimension
        self.rabi = rabi
        self.frequency = frequency
        self.phase = phase

    def with_pulse(self, pulse: PulseSpec, phase: Optional[float] = None) -> "DrivenHamiltonian":
        return DrivenHamiltonian(
            self.h0, self.drive_qubit, self.boson_dimension,
            pulse.rabi_amplitude, pulse.drive_frequency, pulse.phase if phase is None else phase,
        )

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = self.h0 @ psi
        if self.rabi:
            driven = (self.drive_qubit @ psi.reshape(self.qubit_dimension, self.boson_dimension)).ravel()
            out = out + self.rabi * math.cos(self.frequency * t + self.phase) * driven
        return out


HamiltonianLike = Union[DrivenHamiltonian, Callable[[float], np.ndarray]]


def _rhs(hamiltonian: HamiltonianLike) -> Callable[[float, np.ndarray], np.ndarray]:
    if hasattr(hamiltonian, "apply"):
        return lambda t, y: -1j * hamiltonian.apply(t, y)
    return lambda t, y: -1j * (hamiltonian(t) @ y)


def propagate_samples(
    state: np.ndarray,
    hamiltonian: HamiltonianLike,
    t0: float,
    t1: float,
    t_eval: Optional[np.ndarray] = None,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate i d psi/dt = H(t) psi with DOP853; returns (times, states as columns)."""
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_DRIFT:
        raise ParameterError(f"input state is not normalized (norm {norm:.12f})")
    if t1 == t0:
        return np.array([t0]), state.reshape(-1, 1).astype(complex)

    solution = solve_ivp(
        _rhs(hamiltonian),
        (t0, t1),
        state.astype(complex),
        method="DOP853",
        t_eval=t_eval,
        rtol=settings.propagator_rtol if rtol is None else rtol,
        atol=settings.propagator_atol if atol is None else atol,
    )
    if solution.status < 0:
        raise NumericalError(f"stiff segment [{t0:.4g}, {t1:.4g}]: {solution.message}")

    drift = float(np.max(np.abs(np.linalg.norm(solution.y, axis=0) - 1.0)))
    if drift > NORM_DRIFT:
        raise NumericalError(f"norm drift {drift:.2e} over [{t0:.4g}, {t1:.4g}] exceeds {NORM_DRIFT:g}")
    return solution.t, solution.y


def propagate(
    state: np.ndarray,
    hamiltonian: HamiltonianLike,
    t0: float,
    t1: float,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
) -> np.ndarray:
    """State at t1."""
    _, states = propagate_samples(state, hamiltonian, t0, t1, None, rtol, atol)
    return states[:, -1]


# --- protocol -------------------------------------------------------------------

def _origin_state(p: ModelParams, label: str) -> np.ndarray:
    s, k, copy = parse_sector_label(label)
    for sector in spin_sectors(p.N):
        if math.isclose(sector.spin, s) and sector.copy == copy:
            _, v = sector_eigen(p, sector, np.zeros(1))
            return sector.basis @ v[0, :, k]
    raise ParameterError(f"no sector state '{label}' for N={p.N}")


class RamseySession:
    """Everything one parameter set needs: H_EDM eigensystem, target qubit pair, drive."""

    def __init__(self, p: ModelParams, cfg: Optional[RamseyConfig] = None, target: Optional[str] = None):
        self.p = p
        self.cfg = cfg or RamseyConfig()
        self.target = target or excited_label(p.N)
        self.n_max = self.cfg.fock_cutoff or int(math.ceil(1.25 * minimal_fock_cutoff(p, self.cfg.k_levels)))

        self.h0 = build_h_edm(p, self.n_max).matrix / p.omega_q
        self.energies, self.vectors = np.linalg.eigh(self.h0)
        self.ground_state = self.vectors[:, 0].astype(complex)

        self.chi0 = _origin_state(p, ground_label(p.N))
        self.chi_t = _origin_state(p, self.target)
        origin = np.zeros(1)
        self.transition = float(
            evaluate_curve(p, self.target, origin)[0] - evaluate_curve(p, ground_label(p.N), origin)[0]
        )

        qubits = BasisDescriptor(qubit_count=p.N)
        drive = pauli_on_site(qubits, 1, "x").matrix.real
        self.matrix_element = abs(float(self.chi_t @ drive @ self.chi0))
        if self.matrix_element < 1e-12:
            raise ParameterError(f"sigma_x^1 does not couple the ground state to {self.target}")
        self.hamiltonian = DrivenHamiltonian(self.h0, drive, self.n_max + 1)

        self.rabi = self.cfg.rabi_amplitude or settings.rabi_in_resonator_units * p.omega_r_tilde
        self.drive_frequency = self.transition + self.cfg.detuning

    # qubit-resolved observables
    def _amplitudes(self, psi: np.ndarray, chi: np.ndarray) -> np.ndarray:
        return chi @ psi.reshape(2 ** self.p.N, self.n_max + 1)

    def return_probability(self, psi: np.ndarray) -> float:
        """P_0 = || (|chi_0><chi_0| (x) 1) psi ||^2."""
        return float(np.sum(np.abs(self._amplitudes(psi, self.chi0)) ** 2))

    def preparation_fidelity(self, psi: np.ndarray) -> float:
        """Phase-insensitive overlap with (|chi_0> + e^{i phi}|chi_T>)/sqrt(2) on the reduced qubit state."""
        a0 = self._amplitudes(psi, self.chi0)
        at = self._amplitudes(psi, self.chi_t)
        rho_00 = np.sum(np.abs(a0) ** 2)
        rho_tt = np.sum(np.abs(at) ** 2)
        rho_0t = np.sum(a0 * np.conj(at))
        return float(0.5 * (rho_00 + rho_tt) + abs(rho_0t))

    def energy_offset(self, psi: np.ndarray) -> float:
        """Mean energy of the chi_T component minus that of the chi_0 component, minus omega_d."""
        means = []
        for chi in (self.chi0, self.chi_t):
            projected = np.outer(chi, self._amplitudes(psi, chi)).ravel()
            weight = np.vdot(projected, projected).real
            if weight < 1e-14:
                return 0.0
            means.append(np.vdot(projected, self.h0 @ projected).real / weight)
        return float(means[1] - means[0] - self.drive_frequency)

    # evolution
    def free_evolve(self, psi: np.ndarray, tau: float) -> np.ndarray:
        coefficients = self.vectors.T @ psi
        return self.vectors @ (np.exp(-1j * self.energies * tau) * coefficients)

    def pulse(self, psi: np.ndarray, pulse: PulseSpec, t_start: float, phase: Optional[float] = None) -> np.ndarray:
        driven = self.hamiltonian.with_pulse(pulse, phase)
        return propagate(psi, driven, t_start, t_start + pulse.duration)

    def nominal_duration(self) -> float:
        return math.pi / (2 * self.rabi * self.matrix_element)


def calibrate_pi_half(
    p: ModelParams,
    cfg: Optional[RamseyConfig] = None,
    session: Optional[RamseySession] = None,
) -> PulseSpec:
    """
    Scan the duration over [0.5, 1.5] x pi/(2 Omega_eff) in one integration and keep
    the best preparation fidelity of (|chi_0> + |chi_T>)/sqrt(2) from the ground state.
    Omega_eff = Omega |<chi_T|sigma_x^1|chi_0>|.
    """
    session = session or RamseySession(p, cfg)
    nominal = session.nominal_duration()
    times = np.linspace(0.5 * nominal, 1.5 * nominal, session.cfg.duration_points)
    probe = PulseSpec(rabi_amplitude=session.rabi, drive_frequency=session.drive_frequency, duration=times[-1])
    driven = session.hamiltonian.with_pulse(probe)
    _, states = propagate_samples(session.ground_state, driven, 0.0, times[-1], t_eval=times)
    fidelities = np.array([session.preparation_fidelity(states[:, i]) for i in range(len(times))])

    best = int(np.argmax(fidelities))
    duration, fidelity = times[best], fidelities[best]
    if 0 < best < len(times) - 1:
        left, mid, right = fidelities[best - 1:best + 2]
        curvature = left - 2 * mid + right
        if curvature < 0:
            step = times[1] - times[0]
            shift = 0.5 * (left - right) / curvature
            duration = times[best] + shift * step
            fidelity = mid - 0.25 * (left - right) * shift

    if fidelity < MIN_FIDELITY:
        raise NumericalError(f"calibration failed: best pi/2 fidelity {fidelity:.3f} < {MIN_FIDELITY}")
    logger.info(
        f"🔧 pi/2 pulse: duration {duration:.4g} (nominal {nominal:.4g}), fidelity {fidelity:.4f}"
    )
    return PulseSpec(
        rabi_amplitude=session.rabi,
        drive_frequency=session.drive_frequency,
        phase=0.0,
        duration=float(duration),
        fidelity=float(min(fidelity, 1.0)),
    )


def _second_pulse_p0(session: RamseySession, prepared: np.ndarray, pulse: PulseSpec,
                     tau_w: float, phase: float) -> float:
    evolved = session.free_evolve(prepared, tau_w)
    final = session.pulse(evolved, pulse, pulse.duration + tau_w, phase)
    return session.return_probability(final)


def optimize_phase(session: RamseySession, prepared: np.ndarray, pulse: PulseSpec, tau_ref: float,
                   offset: float) -> float:
    """theta* maximizing P_0 at tau_ref, from a first-harmonic fit of an equally spaced scan."""
    thetas = 2 * math.pi * np.arange(session.cfg.theta_points) / session.cfg.theta_points
    values = np.array([
        _second_pulse_p0(session, prepared, pulse, tau_ref, theta + offset * tau_ref) for theta in thetas
    ])
    cos_part = 2 * np.mean(values * np.cos(thetas))
    sin_part = 2 * np.mean(values * np.sin(thetas))
    theta_star = math.atan2(sin_part, cos_part) % (2 * math.pi)
    logger.debug(f"🔧 theta* = {theta_star:.4f} (scan spread {values.max() - values.min():.3g})")
    return theta_star


def ramsey_scan(
    p: ModelParams,
    tau_w: Optional[Sequence[float]] = None,
    pulse: Optional[PulseSpec] = None,
    cfg: Optional[RamseyConfig] = None,
    session: Optional[RamseySession] = None,
) -> RamseyTrace:
    """
    P_0(tau_w) for: pulse(theta=0) -> free evolution tau_w -> pulse(theta* + delta tau_w).
    delta is the static energy offset of the prepared packet against omega_d.
    """
    session = session or RamseySession(p, cfg)
    pulse = pulse or calibrate_pi_half(p, session=session)
    tau_w = np.asarray(session.cfg.tau_w if tau_w is None else tau_w, dtype=float)

    prepared = session.pulse(session.ground_state, pulse, 0.0, 0.0)
    offset = session.energy_offset(prepared)
    theta_star = optimize_phase(session, prepared, pulse, float(tau_w[0]), offset)

    p0 = np.array([
        _second_pulse_p0(session, prepared, pulse, tau, theta_star + offset * tau) for tau in tau_w
    ])
    p0 = np.clip(p0, 0.0, 1.0)
    logger.info(
        f"📊 Ramsey trace lambda^2={p.lambda_sq:.3g}: contrast {p0.max() - p0.min():.3f} "
        f"over {len(tau_w)} delays"
    )
    return RamseyTrace(
        tau_w=tau_w,
        p0=p0,
        pulse=pulse,
        theta_star=theta_star,
        offset=offset,
        metadata={
            "fock_cutoff": session.n_max,
            "rabi_amplitude": session.rabi,
            "drive_frequency": session.drive_frequency,
            "target": session.target,
            "theta_star": theta_star,
            "energy_offset": offset,
            "fidelity": pulse.fidelity,
            "pulse_duration": pulse.duration,
            **p.derived(),
        },
    )


# --- wave packets ----------------------------------------------------------------

def oscillator_eigenfunctions(n_count: int, x: np.ndarray, mu: float) -> np.ndarray:
    """phi_n(X) = mu^(1/8) psi_n(X mu^(1/4)) for n < n_count, shape (n_count, len(x))."""
    xi = np.asarray(x, dtype=float) * mu ** 0.25
    out = np.zeros((n_count, xi.size))
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * xi ** 2)
    if n_count > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_count - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return mu ** 0.125 * out


def wavepacket_snapshot(
    state: np.ndarray,
    chi: np.ndarray,
    x: np.ndarray,
    mu: float,
) -> WavepacketSnapshot:
    """Resonator density after projecting the qubits on chi, in the X representation."""
    qubit_dimension = chi.shape[0]
    if state.size % qubit_dimension:
        raise ParameterError("state does not factor over the given qubit state")
    amplitudes = np.conj(chi) @ state.reshape(qubit_dimension, -1)
    norm = float(np.linalg.norm(amplitudes))
    if norm < SNAPSHOT_MIN_NORM:
        raise NumericalError(f"no excited component: projected norm {norm:.1e}")
    wave = amplitudes @ oscillator_eigenfunctions(amplitudes.size, x, mu)
    density = np.abs(wave) ** 2
    area = trapezoid(density, x)
    return WavepacketSnapshot(x=np.asarray(x), density=density / area, weight=norm ** 2)


def ramsey_snapshots(
    session: RamseySession,
    pulse: PulseSpec,
    times: Sequence[float],
    x: Optional[np.ndarray] = None,
) -> Dict[float, WavepacketSnapshot]:
    """Packets projected on chi_T after the first pulse and a free evolution of each time."""
    x = default_grid(session.p).values if x is None else x
    prepared = session.pulse(session.ground_state, pulse, 0.0, 0.0)
    return {
        float(tau): wavepacket_snapshot(session.free_evolve(prepared, tau), session.chi_t, x, session.p.mu)
        for tau in times
    }


# --- trace analysis -----------------------------------------------------------------

def trace_contrast(trace: RamseyTrace) -> float:
    return float(trace.p0.max() - trace.p0.min())


def modulation_frequency(trace: RamseyTrace) -> float:
    """Angular frequency of the dominant non-zero Fourier component of P_0(tau_w)."""
    tau = trace.tau_w
    if len(tau) < 4:
        raise ParameterError("need at least 4 delays for a frequency estimate")
    step = tau[1] - tau[0]
    if not np.allclose(np.diff(tau), step, rtol=1e-6, atol=0):
        raise ParameterError("modulation frequency needs a uniform tau_w grid")
    spectrum = np.abs(np.fft.rfft(trace.p0 - trace.p0.mean()))
    frequencies = np.fft.rfftfreq(len(tau), d=step)
    peak = int(np.argmax(spectrum[1:])) + 1
    return float(2 * math.pi * frequencies[peak])


def revival_peaks(trace: RamseyTrace, prominence: float = 0.01) -> List[Tuple[float, float]]:
    """Successive local maxima of P_0 after its first minimum."""
    minima, _ = find_peaks(-trace.p0, prominence=prominence)
    if minima.size == 0:
        return []
    maxima, _ = find_peaks(trace.p0, prominence=prominence)
    return [(float(trace.tau_w[i]), float(trace.p0[i])) for i in maxima if i > minima[0]]


def classical_frequency(p: ModelParams, label: Optional[str] = None) -> float:
    """sqrt(V''(X_min)/mu) at the outermost minimum of the excited branch."""
    label = label or excited_label(p.N)
    x = default_grid(p).values
    curve = evaluate_curve(p, label, x)
    minima = find_minima(curve, x)
    x_min = max((m[0] for m in minima), key=abs) if minima else 0.0
    step = 1e-3
    v = evaluate_curve(p, label, np.array([x_min - step, x_min, x_min + step]))
    curvature = (v[0] - 2 * v[1] + v[2]) / step ** 2
    if curvature <= 0:
        raise NumericalError(f"branch {label} has no confining minimum")
    return math.sqrt(curvature / p.mu)


def t2_feasibility(resonator_frequency_hz: float, t2_us: Sequence[float] = (1.0, 100.0)) -> Dict[str, float]:
    """Required free-evolution time ~ one resonator period, against a range of T_2 values."""
    if resonator_frequency_hz <= 0:
        raise ParameterError("resonator frequency must be positive")
    required_s = 1.0 / resonator_frequency_hz
    report = {"required_tau_w_s": required_s}
    for t2 in t2_us:
        report[f"ratio_to_t2_{t2:g}us"] = required_s / (t2 * 1e-6)
    return report
