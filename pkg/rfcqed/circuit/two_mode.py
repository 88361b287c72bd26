"""
Born-Oppenheimer potentials of the two-mode circuit.

The low-frequency mode is replaced by its rescaled quadrature X (P terms
dropped), while the projected flux qubits and the high-frequency mode are
diagonalized at every X:

    H(X) = sum_k H_q,k + E_L sum_{k<l} Delta_k Delta_l + omega_+ c^dag c
           + g_phi,+/2 (c + c^dag) sum_k Delta_k + i g_Q,+/2 (c^dag - c) sum_k n_k
           + g_phi,-/2 sqrt(2 omega_q/omega_-) X sum_k Delta_k

V_n(X) = X^2/2 + (E_n(X) - N (E_0 + E_1)/2)/omega_q with omega_q the dressed qubit gap,
so the curves overlay the surfaces of the dressed single-mode extended Dicke model.
At the sweet spot (flux bias 0.5) every surface is even in X.
"""
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from rfcqed.adiabatic.born_oppenheimer import PotentialSurfaceSet, XGrid, default_grid
from rfcqed.circuit.elements import CircuitParams, to_ghz
from rfcqed.circuit.flux_qubit import (
    DEFAULT_LEVELS,
    PLUS_MODE_FOCK,
    FluxQubitSpectrum,
    dressed_qubit,
    flux_qubit_spectrum,
)
from rfcqed.circuit.normal_modes import NormalModeData, normal_modes
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.quantum.models import ModelParams
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.circuit.two_mode")

PLUS_MODE_TOLERANCE = 1e-3  # omega_q units


def effective_mass(
    cp: CircuitParams,
    omega_q_ghz: Optional[float] = None,
    modes: Optional[NormalModeData] = None,
) -> float:
    """mu = (omega_q/omega_-)^2 with the bare qubit gap unless one is given."""
    modes = modes or normal_modes(cp)
    omega_q = omega_q_ghz if omega_q_ghz is not None else flux_qubit_spectrum(cp).omega_q_ghz
    return (omega_q / to_ghz(modes.omega_minus)) ** 2


def single_mode_params(
    cp: CircuitParams,
    spectrum: Optional[FluxQubitSpectrum] = None,
    modes: Optional[NormalModeData] = None,
    dressed: bool = False,
    fock: int = PLUS_MODE_FOCK,
) -> Tuple[ModelParams, Dict[str, float]]:
    """
    Equivalent extended Dicke model: g = g_phi,- |<0|Delta|1>|, lambda^2 = g^2/(omega_- omega_q),
    eps = 0. The bare qubit sets the benchmark values; dressed=True maps the two lowest states
    of qubit plus high-frequency mode instead, which is what the two-mode surfaces contain.
    The metadata carries the (g_Q,-/omega_q)^2 bound on the dropped P terms.
    """
    modes = modes or normal_modes(cp)
    spectrum = spectrum or flux_qubit_spectrum(cp)
    omega_dressed, element_dressed = dressed_qubit(cp, spectrum, modes, fock)
    if dressed:
        omega_q, element = omega_dressed, element_dressed
    else:
        omega_q, element = spectrum.omega_q_ghz, spectrum.phase_element
    omega_minus = to_ghz(modes.omega_minus)
    g = to_ghz(modes.g_phi_minus) * element
    lambda_sq = g ** 2 / (omega_minus * omega_q)
    mu = (omega_q / omega_minus) ** 2
    params = ModelParams.from_dimensionless(lambda_sq, mu, epsilon=0.0, N=cp.qubits_on_node)
    metadata = {
        "dressed": float(dressed),
        "flux_bias": cp.flux_bias,
        "omega_q_ghz": omega_q,
        "omega_q_bare_ghz": spectrum.omega_q_ghz,
        "omega_q_dressed_ghz": omega_dressed,
        "omega_minus_mhz": omega_minus * 1e3,
        "g_ghz": g,
        "phase_element": element,
        "lambda_sq": lambda_sq,
        "mu": mu,
        "p_term_bound": (to_ghz(modes.g_q_minus) / omega_q) ** 2,
    }
    logger.info(
        f"📊 Single-mode mapping ({'dressed' if dressed else 'bare'}): lambda^2={lambda_sq:.4f}, "
        f"mu={mu:.4g}, omega_q={omega_q:.4f} GHz"
    )
    return params, metadata


def _site(op: np.ndarray, site: int, count: int) -> np.ndarray:
    one = np.eye(op.shape[0])
    out = np.ones((1, 1))
    for k in range(count):
        out = np.kron(out, op if k == site else one)
    return out


def _two_mode_parts(
    cp: CircuitParams,
    spectrum: FluxQubitSpectrum,
    modes: NormalModeData,
    omega_q: float,
    plus_fock: int,
    coupling_scale: float,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Static part and X-slope of H(X)/omega_q, plus the energy offset."""
    count = cp.qubits_on_node
    energies = np.diag(spectrum.energies).astype(complex)
    phase_sum = sum(_site(spectrum.phase, k, count) for k in range(count))
    charge_sum = sum(_site(spectrum.charge, k, count) for k in range(count))
    qubits = sum(_site(energies, k, count) for k in range(count))
    for k in range(count):
        for l in range(k + 1, count):
            qubits = qubits + coupling_scale * cp.E_L_GHz * (
                _site(spectrum.phase, k, count) @ _site(spectrum.phase, l, count)
            )

    a = np.diag(np.sqrt(np.arange(1, plus_fock + 1, dtype=float)), k=1)
    mode_one = np.eye(plus_fock + 1)
    static = (
        np.kron(qubits, mode_one)
        + to_ghz(modes.omega_plus) * np.kron(np.eye(qubits.shape[0]), np.diag(np.arange(plus_fock + 1.0)))
        + coupling_scale * 0.5 * to_ghz(modes.g_phi_plus) * np.kron(phase_sum, a + a.T)
        + coupling_scale * 0.5 * to_ghz(modes.g_q_plus) * np.kron(charge_sum, 1j * (a.T - a))
    )
    slope_coefficient = 0.5 * to_ghz(modes.g_phi_minus) * math.sqrt(2 * omega_q / to_ghz(modes.omega_minus))
    slope = coupling_scale * slope_coefficient * np.kron(phase_sum, mode_one)
    offset = count * 0.5 * (spectrum.energies[0] + spectrum.energies[1])
    return static / omega_q, slope / omega_q, offset / omega_q


def _lowest(static: np.ndarray, slope: np.ndarray, x: np.ndarray, count: int) -> Tuple[np.ndarray, np.ndarray]:
    energies = np.empty((x.size, count))
    states = np.empty((x.size, static.shape[0], count), dtype=complex)
    for i, value in enumerate(x):
        energies[i], states[i] = eigh(static + value * slope, subset_by_index=[0, count - 1])
    return energies, states


def two_mode_bo_surfaces(
    cp: CircuitParams,
    grid: Optional[XGrid] = None,
    levels: int = DEFAULT_LEVELS,
    plus_fock: int = PLUS_MODE_FOCK,
    branches: int = 4,
    coupling_scale: float = 1.0,
    spectrum: Optional[FluxQubitSpectrum] = None,
    modes: Optional[NormalModeData] = None,
    check_truncation: bool = True,
) -> PotentialSurfaceSet:
    """Lowest `branches` BO potentials of the projected two-mode model."""
    if branches < 1:
        raise ParameterError("need at least one branch")
    modes = modes or normal_modes(cp)
    spectrum = spectrum or flux_qubit_spectrum(cp, levels=levels)
    params, mapping = single_mode_params(cp, spectrum, modes, dressed=True, fock=plus_fock)
    omega_q = mapping["omega_q_ghz"]
    grid = grid or default_grid(params)
    x = grid.values

    static, slope, offset = _two_mode_parts(cp, spectrum, modes, omega_q, plus_fock, coupling_scale)
    if branches > static.shape[0]:
        raise ParameterError(f"only {static.shape[0]} states in the projected space")
    energies, states = _lowest(static, slope, x, branches)

    if check_truncation:
        samples = np.array([0.0, 0.5 * grid.x_max])
        bigger, bigger_slope, _ = _two_mode_parts(cp, spectrum, modes, omega_q, plus_fock + 2, coupling_scale)
        reference, _ = _lowest(static, slope, samples, branches)
        extended, _ = _lowest(bigger, bigger_slope, samples, branches)
        shift = float(np.max(np.abs(reference - extended)))
        if shift > PLUS_MODE_TOLERANCE:
            raise NumericalError(f"two-mode truncation not converged: +2 Fock states move levels by {shift:.2e}")

    curves = (0.5 * x ** 2)[None, :] + energies.T - offset
    labels = [f"b{n}" for n in range(branches)]
    logger.info(
        f"✅ Two-mode surfaces: {branches} branches on {grid.points} points "
        f"({static.shape[0]} states per X)"
    )
    return PotentialSurfaceSet(
        params=params,
        grid=grid,
        branches=curves,
        adiabatic_states=states,
        branch_spins=np.full((branches, x.size), np.nan),
        labels=labels,
        mz_character=np.full(branches, np.nan),
        sector_curves={},
        sector_states={},
    )


def aligned_branches(surfaces: PotentialSurfaceSet, x_max: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Branches on |X| <= x_max, shifted so the ground branch minimum is zero."""
    x = surfaces.x
    window = np.abs(x) <= x_max + 1e-12
    curves = surfaces.branches[:count, window]
    return x[window], curves - curves[0].min()


def compare_surfaces(
    reference: PotentialSurfaceSet,
    other: PotentialSurfaceSet,
    x_max: float = 2.0,
    count: Optional[int] = None,
) -> float:
    """Max deviation between ground-aligned branches over |X| <= x_max (omega_q units)."""
    count = count or min(reference.count, other.count)
    if count > min(reference.count, other.count):
        raise ParameterError("comparison asks for more branches than available")
    x_ref, ref = aligned_branches(reference, x_max, count)
    x_other, oth = aligned_branches(other, x_max, count)
    interpolated = np.array([np.interp(x_ref, x_other, curve) for curve in oth])
    return float(np.max(np.abs(ref - interpolated)))


def projection_convergence(
    cp: CircuitParams,
    grid: XGrid,
    low: int = 4,
    high: int = 6,
    x_max: float = 3.0,
    branches: int = 4,
) -> float:
    """Surface change when the kept qubit levels grow from `low` to `high`."""
    modes = normal_modes(cp)
    surfaces: List[PotentialSurfaceSet] = [
        two_mode_bo_surfaces(cp, grid, levels=m, branches=branches, modes=modes, check_truncation=False)
        for m in (low, high)
    ]
    return compare_surfaces(surfaces[1], surfaces[0], x_max=x_max)
