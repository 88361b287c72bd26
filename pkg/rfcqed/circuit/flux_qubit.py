"""
Three-junction flux qubit in the charge basis of its two island phases.

With node phases phi_1, phi_2 the upper (alpha E_J) junction carries
Delta = phi_1 - phi_2, and

    H = 4 E_C/(1 + 2 alpha) [(1 + alpha)(n_1^2 + n_2^2) + 2 alpha n_1 n_2]
        - E_J (cos phi_1 + cos phi_2) - alpha E_J cos(Delta + phi_e)
        + (E_L/2) Delta^2

with E_C = e^2/2C_J and E_L = Phi_0^2/L (the inductive loading by the
resonator). The conjugate charge of Delta is n_q = (n_1 - n_2)/2.
Energies are in GHz.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from rfcqed.circuit.elements import CircuitParams, to_ghz
from rfcqed.circuit.normal_modes import NormalModeData, normal_modes
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.circuit.flux_qubit")

DEFAULT_CHARGE_CUTOFF = 7  # charges -7..7 per island
DEFAULT_LEVELS = 5
CONVERGENCE_TOLERANCE = 1e-4  # relative to the qubit gap
PLUS_MODE_FOCK = 6


@dataclass
class FluxQubitSpectrum:
    """Lowest levels and operator matrix elements in the kept eigenbasis."""

    energies: np.ndarray                      # (M,), GHz, ascending
    phase: np.ndarray = field(repr=False)     # <i|Delta|j>
    charge: np.ndarray = field(repr=False)    # <i|n_q|j>
    flux_bias: float = 0.5
    charge_cutoff: int = DEFAULT_CHARGE_CUTOFF

    @property
    def levels(self) -> int:
        return self.energies.size

    @property
    def omega_q_ghz(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def phase_element(self) -> float:
        """|<0|Delta|1>|"""
        return float(abs(self.phase[0, 1]))


@lru_cache(maxsize=8)
def _island_operators(cutoff: int) -> Dict[str, np.ndarray]:
    """Single-island charge, e^{i phi}, phi and phi^2 (phi in [-pi, pi)) in the charge basis."""
    charges = np.arange(-cutoff, cutoff + 1)
    size = charges.size
    k = charges[None, :] - charges[:, None]  # m - n
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    safe = np.where(k == 0, 1, k)
    phi = np.where(k == 0, 0.0, -1j * sign / safe)
    phi_sq = np.where(k == 0, math.pi ** 2 / 3, 2 * sign / safe ** 2).astype(complex)
    ops = {
        "n": np.diag(charges.astype(float)),
        "raise": np.eye(size, k=-1),
        "phi": phi,
        "phi_sq": phi_sq,
        "identity": np.eye(size),
    }
    for op in ops.values():
        op.setflags(write=False)
    return ops


def charge_basis_hamiltonian(cp: CircuitParams, cutoff: int = DEFAULT_CHARGE_CUTOFF) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Full two-island Hamiltonian (GHz) plus the Delta and n_q operators."""
    if cutoff < 1:
        raise ParameterError("charge cutoff must be at least 1")
    ops = _island_operators(cutoff)
    one = ops["identity"]
    n1, n2 = np.kron(ops["n"], one), np.kron(one, ops["n"])
    up1, up2 = np.kron(ops["raise"], one), np.kron(one, ops["raise"])

    alpha, e_j = cp.alpha, cp.E_J_GHz
    kinetic = 4 * cp.E_C_GHz / (1 + 2 * alpha) * (
        (1 + alpha) * (n1 @ n1 + n2 @ n2) + 2 * alpha * (n1 @ n2)
    )
    cos_sum = 0.5 * (up1 + up1.T + up2 + up2.T)
    loop = np.exp(1j * cp.flux_phase) * (up1 @ up2.T)
    cos_loop = 0.5 * (loop + loop.conj().T)

    delta = np.kron(ops["phi"], one) - np.kron(one, ops["phi"])
    delta_sq = (
        np.kron(ops["phi_sq"], one) + np.kron(one, ops["phi_sq"])
        - 2 * np.kron(ops["phi"], ops["phi"])
    )
    hamiltonian = kinetic - e_j * cos_sum - alpha * e_j * cos_loop + 0.5 * cp.E_L_GHz * delta_sq
    return hamiltonian, {"phase": delta, "charge": 0.5 * (n1 - n2)}


def _diagonalize(cp: CircuitParams, cutoff: int, levels: int) -> FluxQubitSpectrum:
    hamiltonian, ops = charge_basis_hamiltonian(cp, cutoff)
    energies, vectors = eigh(hamiltonian, subset_by_index=[0, levels - 1])
    # real, positive leading component where possible
    pivots = np.argmax(np.abs(vectors), axis=0)
    phases = vectors[pivots, np.arange(levels)]
    vectors = vectors * (np.abs(phases) / phases)[None, :]
    return FluxQubitSpectrum(
        energies=energies,
        phase=vectors.conj().T @ ops["phase"] @ vectors,
        charge=vectors.conj().T @ ops["charge"] @ vectors,
        flux_bias=cp.flux_bias,
        charge_cutoff=cutoff,
    )


def flux_qubit_spectrum(
    cp: CircuitParams,
    cutoff: int = DEFAULT_CHARGE_CUTOFF,
    levels: int = DEFAULT_LEVELS,
    check_convergence: bool = True,
) -> FluxQubitSpectrum:
    """Lowest `levels` states; the kept levels must move < 1e-4 omega_q when the cutoff grows by 2."""
    if levels < 2:
        raise ParameterError("keep at least two qubit levels")
    spectrum = _diagonalize(cp, cutoff, levels)
    if check_convergence:
        larger = _diagonalize(cp, cutoff + 2, levels)
        shift = np.max(np.abs((spectrum.energies - spectrum.energies[0]) - (larger.energies - larger.energies[0])))
        if shift > CONVERGENCE_TOLERANCE * spectrum.omega_q_ghz:
            raise NumericalError(
                f"flux qubit not converged at charge cutoff {cutoff}: levels move {shift:.2e} GHz"
            )
    logger.debug(
        f"🔧 Flux qubit at bias {cp.flux_bias:.6f}: omega_q={spectrum.omega_q_ghz:.4f} GHz, "
        f"|<0|Delta|1>|={spectrum.phase_element:.4f}"
    )
    return spectrum


def qubit_mode_hamiltonian(
    spectrum: FluxQubitSpectrum,
    omega_ghz: float,
    g_phi_ghz: float,
    g_q_ghz: float,
    fock: int = PLUS_MODE_FOCK,
) -> np.ndarray:
    """One projected qubit coupled to one oscillator, qubit (x) mode ordering, GHz."""
    a = np.diag(np.sqrt(np.arange(1, fock + 1, dtype=float)), k=1)
    a_dag = a.T
    qubit_one = np.eye(spectrum.levels)
    return (
        np.kron(np.diag(spectrum.energies), np.eye(fock + 1))
        + omega_ghz * np.kron(qubit_one, np.diag(np.arange(fock + 1, dtype=float)))
        + 0.5 * g_phi_ghz * np.kron(spectrum.phase, a + a_dag)
        + 0.5 * g_q_ghz * np.kron(spectrum.charge, 1j * (a_dag - a))
    )


def dressed_qubit(
    cp: CircuitParams,
    spectrum: Optional[FluxQubitSpectrum] = None,
    modes: Optional[NormalModeData] = None,
    fock: int = PLUS_MODE_FOCK,
) -> Tuple[float, float]:
    """Qubit gap (GHz) and |<0|Delta|1>| of the two lowest states dressed by the high-frequency mode."""
    spectrum = spectrum or flux_qubit_spectrum(cp)
    modes = modes or normal_modes(cp)
    hamiltonian = qubit_mode_hamiltonian(
        spectrum, to_ghz(modes.omega_plus), to_ghz(modes.g_phi_plus), to_ghz(modes.g_q_plus), fock
    )
    energies, vectors = eigh(hamiltonian, subset_by_index=[0, 1])
    phase = np.kron(spectrum.phase, np.eye(fock + 1))
    element = abs(vectors[:, 0].conj() @ phase @ vectors[:, 1])
    return float(energies[1] - energies[0]), float(element)


def dressed_qubit_frequency(
    cp: CircuitParams,
    spectrum: Optional[FluxQubitSpectrum] = None,
    modes: Optional[NormalModeData] = None,
    fock: int = PLUS_MODE_FOCK,
) -> float:
    """Qubit gap (GHz) including the dressing by the high-frequency mode."""
    return dressed_qubit(cp, spectrum, modes, fock)[0]


def calibrate_flux_bias(
    cp: CircuitParams,
    target_ghz: float = 8.0,
    max_offset: float = 0.1,
    xtol: float = 1e-8,
) -> CircuitParams:
    """
    Flux bias above the sweet spot at which the bare qubit gap equals target_ghz.
    The gap is smallest at the sweet spot, so bias 0.5 is kept (with a warning)
    whenever its gap already reaches the target.
    """

    def mismatch(bias: float) -> float:
        trial = cp.model_copy(update={"flux_bias": bias})
        return flux_qubit_spectrum(trial, check_convergence=False).omega_q_ghz - target_ghz

    start = mismatch(0.5)
    if start >= 0:
        logger.warning(
            f"⚠️ Sweet-spot gap {start + target_ghz:.3f} GHz already reaches {target_ghz} GHz; keeping bias 0.5"
        )
        return cp.model_copy(update={"flux_bias": 0.5})

    step = 5e-4
    upper = 0.5 + step
    while mismatch(upper) < 0:
        step *= 2
        upper = 0.5 + step
        if step > max_offset:
            raise NumericalError(f"no flux bias within 0.5 + {max_offset} reaches {target_ghz} GHz")
    bias = brentq(mismatch, 0.5, upper, xtol=xtol)
    calibrated = cp.model_copy(update={"flux_bias": bias})
    logger.info(f"✅ Flux bias calibrated to {bias:.8f} Phi_0 for omega_q/2pi = {target_ghz} GHz")
    return calibrated
