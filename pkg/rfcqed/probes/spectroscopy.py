"""
Single-qubit excitation spectra S(omega) of the extended Dicke model.

Lines are built from exact eigenpairs with a uniform Lorentzian width
gamma; every line has the normalization (1/4) gamma^2 |amp|^2 / ((w - w_f)^2 + gamma^2/4),
so its peak value is |amp|^2. Frequencies are in units of omega_q.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator
from scipy.integrate import trapezoid
from scipy.linalg import eigh
from scipy.signal import find_peaks

from rfcqed.adiabatic.born_oppenheimer import (
    BoundStateSet,
    PotentialSurfaceSet,
    build_surfaces,
    default_grid,
    ground_label,
    sector_eigen,
    sector_label,
    solve_bound_states,
    spin_sectors,
)
from rfcqed.config import settings
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.quantum.models import ModelParams, build_h_edm
from rfcqed.quantum.operators import BasisDescriptor, pauli_on_site
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.probes.spectroscopy")

COMPLETENESS = 0.999
THERMAL_CLOSURE = 1e-6
LINE_FLOOR = 1e-12
CHUNK = 4096


class SpectrumConfig(BaseModel):
    gamma: float = Field(gt=0)
    omega_grid: List[float]
    temperature: float = Field(default=0.0, ge=0)
    probe_site: int = Field(default=1, ge=1)
    eigenpair_count: Optional[int] = Field(default=None, ge=2)  # None: full diagonalization
    fock_cutoff: Optional[int] = Field(default=None, ge=1)
    prominence: float = Field(default=1e-3, gt=0)
    bo_levels: int = Field(default=60, ge=1)

    @field_validator("omega_grid")
    @classmethod
    def _strictly_increasing(cls, grid: List[float]) -> List[float]:
        if len(grid) < 3:
            raise ValueError("omega_grid needs at least 3 points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("omega_grid must be strictly increasing")
        return grid

    @classmethod
    def uniform(cls, omega_min: float, omega_max: float, points: int, **kwargs) -> "SpectrumConfig":
        return cls(omega_grid=np.linspace(omega_min, omega_max, points).tolist(), **kwargs)

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.omega_grid, dtype=float)


class Peak(BaseModel):
    center: float
    height: float
    width: float  # full width at half maximum


@dataclass
class SpectrumResult:
    omega: np.ndarray
    values: np.ndarray
    peaks: List[Peak]
    line_frequencies: np.ndarray = field(repr=False)
    line_weights: np.ndarray = field(repr=False)
    metadata: Dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"omega": self.omega, "S": self.values})

    def peaks_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [peak.model_dump() for peak in self.peaks], columns=["center", "height", "width"]
        )


class StrongCouplingCheck(BaseModel):
    ratio: float
    passed: bool
    boundary: bool


def lorentzian(omega: np.ndarray, center: float, gamma: float) -> np.ndarray:
    """Line shape with unit peak: (gamma^2/4) / ((w - center)^2 + gamma^2/4)."""
    quarter = 0.25 * gamma ** 2
    return quarter / ((np.asarray(omega) - center) ** 2 + quarter)


def lorentzian_sum(omega: np.ndarray, centers: np.ndarray, weights: np.ndarray, gamma: float) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    total = np.zeros_like(omega)
    quarter = 0.25 * gamma ** 2
    for start in range(0, len(centers), CHUNK):
        c = centers[start:start + CHUNK]
        w = weights[start:start + CHUNK]
        total += (quarter * w[:, None] / ((omega[None, :] - c[:, None]) ** 2 + quarter)).sum(axis=0)
    return total


def extract_peaks(omega: np.ndarray, values: np.ndarray, prominence: float = 1e-3) -> List[Peak]:
    """
    Local maxima with prominence >= prominence * max(S). Center, height and FWHM
    come from the parabola through 1/S at the three samples around each maximum,
    which is exact for an isolated Lorentzian.
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.max() <= 0:
        return []
    indices, _ = find_peaks(values, prominence=prominence * values.max())
    peaks = []
    for i in indices:
        if i == 0 or i == len(values) - 1 or np.any(values[i - 1:i + 2] <= 0):
            continue
        x = omega[i - 1:i + 2]
        a, b, c = np.polyfit(x, 1.0 / values[i - 1:i + 2], 2)
        if a <= 0:
            peaks.append(Peak(center=float(omega[i]), height=float(values[i]), width=float("nan")))
            continue
        center = -b / (2 * a)
        floor = c - b * b / (4 * a)
        peaks.append(Peak(center=float(center), height=float(1.0 / floor), width=float(2 * math.sqrt(floor / a))))
    return peaks


def _probe_matrix(p: ModelParams, n_max: int, site: int) -> np.ndarray:
    if site > p.N:
        raise ParameterError("invalid site")
    basis = BasisDescriptor(qubit_count=p.N, fock_cutoff=n_max)
    return pauli_on_site(basis, site, "x").matrix.real


def _eigenpairs(p: ModelParams, cfg: SpectrumConfig) -> Tuple[np.ndarray, np.ndarray, int]:
    n_max = cfg.fock_cutoff or settings.default_fock_cutoff
    h = build_h_edm(p, n_max).matrix / p.omega_q
    if cfg.eigenpair_count is None or cfg.eigenpair_count >= h.shape[0]:
        energies, vectors = eigh(h)
    else:
        energies, vectors = eigh(h, subset_by_index=[0, cfg.eigenpair_count - 1])
    return energies, vectors, n_max


def _check_completeness(amplitudes: np.ndarray, which: str) -> None:
    captured = float(np.sum(np.abs(amplitudes) ** 2))
    if captured < COMPLETENESS:
        raise NumericalError(
            f"insufficient eigenpairs: {which} keeps {captured:.4f} of the sigma_x weight"
        )
    if captured < COMPLETENESS + 0.5 * (1 - COMPLETENESS):
        logger.warning(f"⚠️ Marginal sigma_x completeness for {which}: {captured:.5f}")


def _result(omega, centers, weights, cfg, metadata) -> SpectrumResult:
    keep = weights > LINE_FLOOR * max(weights.max(), LINE_FLOOR)
    centers, weights = centers[keep], weights[keep]
    values = lorentzian_sum(omega, centers, weights, cfg.gamma)
    return SpectrumResult(
        omega=omega,
        values=values,
        peaks=extract_peaks(omega, values, cfg.prominence),
        line_frequencies=centers,
        line_weights=weights,
        metadata=metadata,
    )


def _metadata(p: ModelParams, cfg: SpectrumConfig, **extra) -> Dict:
    meta = {
        "N": p.N,
        "epsilon": p.epsilon,
        "gamma": cfg.gamma,
        "temperature": cfg.temperature,
        "probe_site": cfg.probe_site,
        **p.derived(),
    }
    meta.update(extra)
    return meta


def spectrum_ground(p: ModelParams, cfg: SpectrumConfig) -> SpectrumResult:
    """S(w) = sum_f (1/4) gamma^2 |<f|sx_1|GS>|^2 / ((w - w_f)^2 + gamma^2/4)."""
    energies, vectors, n_max = _eigenpairs(p, cfg)
    probe = _probe_matrix(p, n_max, cfg.probe_site)
    amplitudes = vectors.T @ (probe @ vectors[:, 0])
    # <GS| sx sx |GS> = 1
    _check_completeness(amplitudes, "the ground state")

    centers = energies - energies[0]
    weights = np.abs(amplitudes) ** 2
    logger.debug(f"📊 Ground spectrum from {len(energies)} eigenpairs (n_max={n_max})")
    return _result(cfg.omega, centers, weights, cfg, _metadata(p, cfg, fock_cutoff=n_max))


def boltzmann_weights(energies: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized Boltzmann weights; zero temperature puts all weight on the lowest level."""
    shifted = energies - energies.min()
    if temperature == 0:
        weights = np.zeros_like(energies)
        weights[np.argmin(energies)] = 1.0
        return weights
    weights = np.exp(-shifted / temperature)
    return weights / weights.sum()


def spectrum_thermal(p: ModelParams, cfg: SpectrumConfig) -> SpectrumResult:
    """Thermal average over exact eigenstates; initial states kept until 1 - 1e-6 of the weight."""
    if cfg.temperature <= 0:
        raise ParameterError("thermal spectrum needs temperature > 0")
    energies, vectors, n_max = _eigenpairs(p, cfg)

    populations = boltzmann_weights(energies, cfg.temperature)
    highest = populations[-1]
    if cfg.eigenpair_count is not None and highest > THERMAL_CLOSURE:
        raise NumericalError(
            f"insufficient eigenpairs for thermal closure: top level still carries weight {highest:.1e}"
        )
    cumulative = np.cumsum(populations)
    n_initial = int(np.searchsorted(cumulative, 1.0 - THERMAL_CLOSURE) + 1)
    n_initial = min(n_initial, len(energies))

    probe = _probe_matrix(p, n_max, cfg.probe_site)
    amplitudes = vectors.T @ (probe @ vectors[:, :n_initial])  # (f, i)
    for i in range(n_initial):
        _check_completeness(amplitudes[:, i], f"initial state {i}")

    centers = (energies[:, None] - energies[None, :n_initial]).ravel()
    weights = (np.abs(amplitudes) ** 2 * populations[None, :n_initial]).ravel()
    logger.debug(f"📊 Thermal spectrum: {n_initial} initial states at k_BT={cfg.temperature}")
    return _result(
        cfg.omega, centers, weights, cfg,
        _metadata(p, cfg, fock_cutoff=n_max, initial_states=n_initial),
    )


def _origin_weights(p: ModelParams, site: int) -> Dict[str, float]:
    """C = |<chi|sx_site|chi_0>|^2/4 per sector curve (copies summed)."""
    probe = pauli_on_site(BasisDescriptor(qubit_count=p.N), site, "x").matrix.real
    zero = np.zeros(1)
    states = {}
    for sector in spin_sectors(p.N):
        _, v = sector_eigen(p, sector, zero)
        for k in range(sector.dimension):
            states[(sector.spin, sector.copy, k)] = sector.basis @ v[0, :, k]
    chi0 = states[(p.N / 2, 0, 0)]
    weights: Dict[str, float] = {}
    for (spin, copy, k), state in states.items():
        label = sector_label(spin, k)
        if label == ground_label(p.N):
            continue
        weights[label] = weights.get(label, 0.0) + 0.25 * float(state @ probe @ chi0) ** 2
    return weights


def spectrum_bo_approx(
    p: ModelParams,
    cfg: SpectrumConfig,
    surfaces: Optional[PotentialSurfaceSet] = None,
    bound_states: Optional[Dict[str, BoundStateSet]] = None,
) -> SpectrumResult:
    """
    Franck-Condon form: S ~ sum_n C_n sum_k gamma^2 |<phi_{n,k}|phi_{0,0}>|^2 / ((w - w_k0)^2 + gamma^2/4)
    over the excited sector curves n, with C_n = |<chi_n(0)|sx_1|chi_0(0)>|^2 / 4.
    """
    surfaces = surfaces or build_surfaces(default_grid(p), p)
    bound_states = dict(bound_states or {})
    ground = ground_label(p.N)
    if ground not in bound_states:
        bound_states[ground] = solve_bound_states(surfaces, ground, p.mu, 1)
    phi0 = bound_states[ground].eigenfunctions[0]
    e0 = bound_states[ground].energies[0]
    x = surfaces.x

    prefactors = _origin_weights(p, cfg.probe_site)
    centers, weights = [], []
    for label, prefactor in prefactors.items():
        if prefactor < LINE_FLOOR:
            continue
        if label not in bound_states:
            bound_states[label] = solve_bound_states(surfaces, label, p.mu, cfg.bo_levels)
        bound = bound_states[label]
        overlaps = trapezoid(bound.eigenfunctions * phi0[None, :], x, axis=1)
        centers.extend(bound.energies - e0)
        # gamma^2 C |overlap|^2 = (1/4) gamma^2 (4 C) |overlap|^2
        weights.extend(4 * prefactor * overlaps ** 2)

    return _result(
        cfg.omega, np.asarray(centers), np.asarray(weights), cfg,
        _metadata(p, cfg, approximation="born-oppenheimer", bo_levels=cfg.bo_levels),
    )


def strong_coupling_condition(p: ModelParams, gamma: float) -> StrongCouplingCheck:
    """g > sqrt(gamma omega_r), gamma in units of omega_q."""
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    ratio = abs(p.g / p.omega_q) / math.sqrt(gamma * p.omega_r_tilde)
    boundary = math.isclose(ratio, 1.0, rel_tol=1e-9)
    return StrongCouplingCheck(ratio=ratio, passed=ratio > 1.0 and not boundary, boundary=boundary)


def sum_rule(result: SpectrumResult, gamma: float) -> Tuple[float, float]:
    """(integral of S over the grid, (pi gamma / 2) * total line weight)."""
    return float(trapezoid(result.values, result.omega)), 0.5 * math.pi * gamma * float(result.line_weights.sum())


def spectrum_sweep(
    base: ModelParams,
    cfg: SpectrumConfig,
    lambda_sq_values: Sequence[float],
    thermal: bool = False,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """S over a (lambda^2, omega) mesh as long-format rows, plus the peak table per coupling."""
    rows, peak_rows = [], []
    compute = spectrum_thermal if thermal else spectrum_ground
    for lambda_sq in lambda_sq_values:
        p = ModelParams.from_dimensionless(lambda_sq, base.mu, base.epsilon, base.N, base.omega_q)
        result = compute(p, cfg)
        rows.append(pd.DataFrame({"lambda_sq": lambda_sq, "omega": result.omega, "S": result.values}))
        for peak in result.peaks:
            peak_rows.append({"lambda_sq": lambda_sq, **peak.model_dump()})
        logger.info(f"📊 lambda^2={lambda_sq:.4g}: {len(result.peaks)} peaks")
    peaks = pd.DataFrame(peak_rows, columns=["lambda_sq", "center", "height", "width"])
    return pd.concat(rows, ignore_index=True), peaks
