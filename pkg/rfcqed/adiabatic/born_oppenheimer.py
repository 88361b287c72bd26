"""
Born-Oppenheimer treatment of the extended Dicke model.

Dimensionless units throughout: energies in omega_q, X the rescaled resonator
quadrature and mu = (omega_q/omega_r)^2 the effective mass, so that

    H = -1/(2 mu) d^2/dX^2 + X^2/2 + H_q(X),
    H_q(X) = S_z + sqrt(2) lambda X S_x + (1 + eps) lambda^2 S_x^2.

H_q commutes with S^2 for every eps, so the qubit problem is solved per
total-spin sector. Sector curves are labelled "s{s}_{k}" (k-th level of the
sector, counted from below); energy-ordered branches are indexed by integers.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from rfcqed.config import settings
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.quantum.models import ModelParams
from rfcqed.quantum.operators import (
    BasisDescriptor,
    collective_spin,
    qubit_mz_values,
    spin_squared,
)
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.adiabatic.born_oppenheimer")

BranchKey = Union[int, str]

BOUNDARY_AMPLITUDE = 1e-8
WINDOW_DENSITY = 1e-4
DEGENERACY_GAP = 1e-6


class XGrid(BaseModel):
    """Uniform grid in the rescaled quadrature X."""

    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    points: int = Field(ge=201)

    @model_validator(mode="after")
    def _check_bounds(self) -> "XGrid":
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self

    @classmethod
    def symmetric(cls, half_width: float, points: int) -> "XGrid":
        return cls(x_min=-half_width, x_max=half_width, points=points)

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.x_min, -self.x_max, rel_tol=0.0, abs_tol=1e-12 * abs(self.x_max))

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.points - 1)

    @property
    def values(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.points)
        if self.is_symmetric:
            # exact antisymmetry keeps V(X) = V(-X) to rounding
            x = 0.5 * (x - x[::-1])
        return x

    def refined(self) -> "XGrid":
        """Same interval at half the spacing."""
        return XGrid(x_min=self.x_min, x_max=self.x_max, points=2 * self.points - 1)


def default_grid(p: ModelParams) -> XGrid:
    """[-6, 6] with 2001 points, widened to contain the outermost displaced well."""
    half = settings.default_grid_half_width
    points = settings.default_grid_points
    if p.lambda_sq > 1.5:
        outer = math.sqrt(2) * p.lam * p.N / 2 + 6 * p.mu ** -0.25 + 2
        if outer > half:
            points = int(math.ceil(points * outer / half)) | 1
            half = outer
    return XGrid.symmetric(half, points)


# --- spin sectors ---------------------------------------------------------

@dataclass(frozen=True)
class SectorBasis:
    """Orthonormal |s, m> columns (m = s ... -s) of one copy of a spin-s irrep."""

    spin: float
    copy: int
    basis: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def spin_label(s: float) -> str:
    twice = int(round(2 * s))
    return str(twice // 2) if twice % 2 == 0 else f"{twice}/2"


def sector_label(s: float, k: int, copy: int = 0) -> str:
    label = f"s{spin_label(s)}_{k}"
    return label if copy == 0 else f"{label}#{copy}"


def parse_sector_label(label: str) -> Tuple[float, int, int]:
    """Inverse of sector_label: (s, k, copy)."""
    try:
        body, _, copy = label.partition("#")
        spin, k = body[1:].split("_")
        num, _, den = spin.partition("/")
        s = float(num) / float(den or 1)
        return s, int(k), int(copy or 0)
    except (ValueError, IndexError):
        raise ParameterError(f"not a sector label: '{label}'")


def ground_label(n_qubits: int) -> str:
    return sector_label(n_qubits / 2, 0)


def excited_label(n_qubits: int) -> str:
    """First excited level of the maximal-spin sector (the triplet T for N = 2)."""
    return sector_label(n_qubits / 2, 1)


@lru_cache(maxsize=None)
def _collective(n_qubits: int) -> Tuple[np.ndarray, np.ndarray]:
    basis = BasisDescriptor(qubit_count=n_qubits)
    sx = collective_spin(basis, "x").matrix.real
    sz = collective_spin(basis, "z").matrix.real
    sx.flags.writeable = False
    sz.flags.writeable = False
    return sx, sz


@lru_cache(maxsize=None)
def spin_sectors(n_qubits: int) -> Tuple[SectorBasis, ...]:
    """
    Decompose the N-qubit space into spin irreps, largest s first.
    Each copy is generated from a highest-weight state by repeated S_-.
    """
    basis = BasisDescriptor(qubit_count=n_qubits)
    sx = collective_spin(basis, "x").matrix
    sy = collective_spin(basis, "y").matrix
    lowering = (sx - 1j * sy).real
    s2 = spin_squared(basis).matrix.real
    mz = qubit_mz_values(n_qubits)

    sectors: List[SectorBasis] = []
    s = n_qubits / 2
    while s >= 0:
        idx = np.flatnonzero(np.isclose(mz, s))
        w, v = np.linalg.eigh(s2[np.ix_(idx, idx)])
        tops = v[:, np.isclose(w, s * (s + 1), atol=1e-9)]
        for copy in range(tops.shape[1]):
            column = np.zeros(2 ** n_qubits)
            column[idx] = tops[:, copy]
            columns = [column]
            for _ in range(int(round(2 * s))):
                lowered = lowering @ columns[-1]
                columns.append(lowered / np.linalg.norm(lowered))
            block = np.array(columns).T
            block.flags.writeable = False
            sectors.append(SectorBasis(spin=s, copy=copy, basis=block))
        s -= 1
    return tuple(sectors)


def sector_eigen(p: ModelParams, sector: SectorBasis, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of H_q(X) inside one sector copy for every X: (M, d), (M, d, d)."""
    sx, sz = _collective(p.N)
    B = sector.basis
    bx = B.T @ sx @ B
    static = B.T @ sz @ B + (1 + p.epsilon) * p.lambda_sq * (bx @ bx)
    slope = math.sqrt(2) * p.lam * bx
    stack = static[None, :, :] + x[:, None, None] * slope[None, :, :]
    return np.linalg.eigh(stack)


def _fix_phases(states: np.ndarray) -> np.ndarray:
    """Make <chi(X_k)|chi(X_k+1)> >= 0 along axis 0. states: (M, d, K), modified in place."""
    overlaps = np.einsum("idk,idk->ik", states[:-1], states[1:])
    signs = np.cumprod(np.where(overlaps < 0, -1.0, 1.0), axis=0)
    states[1:] *= signs[:, None, :]
    return states


def adiabatic_qubit_eigen(X: float, p: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Full diagonalization of H_q(X). Returns ascending energies and eigenvector columns."""
    sx, sz = _collective(p.N)
    h = sz + math.sqrt(2) * p.lam * X * sx + (1 + p.epsilon) * p.lambda_sq * (sx @ sx)
    return np.linalg.eigh(h)


def _ordered_energies(p: ModelParams, x: np.ndarray) -> Tuple[np.ndarray, List[Tuple[SectorBasis, int]]]:
    """All sector eigenvalues, concatenated in sector order: (M, 2^N) plus their origin."""
    energies, origin = [], []
    for sector in spin_sectors(p.N):
        e, _ = sector_eigen(p, sector, x)
        energies.append(e)
        origin.extend((sector, k) for k in range(sector.dimension))
    return np.concatenate(energies, axis=1), origin


def evaluate_curve(p: ModelParams, key: BranchKey, x: np.ndarray) -> np.ndarray:
    """V(X) = X^2/2 + E(X) of a sector label or energy-ordered branch index at arbitrary X."""
    x = np.asarray(x, dtype=float)
    if isinstance(key, str):
        s, k, copy = parse_sector_label(key)
        for sector in spin_sectors(p.N):
            if math.isclose(sector.spin, s) and sector.copy == copy and k < sector.dimension:
                e, _ = sector_eigen(p, sector, x)
                return 0.5 * x ** 2 + e[:, k]
        raise ParameterError(f"no sector curve '{key}' for N={p.N}")
    if not 0 <= key < 2 ** p.N:
        raise ParameterError(f"branch index {key} out of range for N={p.N}")
    energies, _ = _ordered_energies(p, x)
    return 0.5 * x ** 2 + np.sort(energies, axis=1)[:, key]


@dataclass
class PotentialSurfaceSet:
    """
    BO potentials on a grid.

    branches:         (K, M) energy-ordered V_n(X)
    adiabatic_states: (M, 2^N, K) eigenvectors of the ordered branches
    branch_spins:     (K, M) total spin s carried by each ordered branch
    labels:           sector label of each ordered branch at X = 0
    sector_curves:    label -> V(X), smooth through exact crossings
    """

    params: ModelParams
    grid: XGrid
    branches: np.ndarray = field(repr=False)
    adiabatic_states: np.ndarray = field(repr=False)
    branch_spins: np.ndarray = field(repr=False)
    labels: List[str]
    mz_character: np.ndarray = field(repr=False)
    sector_curves: Dict[str, np.ndarray] = field(repr=False)
    sector_states: Dict[str, np.ndarray] = field(repr=False)
    sector_multiplicity: Dict[str, int] = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.grid.values

    @property
    def count(self) -> int:
        return self.branches.shape[0]

    def curve(self, key: BranchKey) -> np.ndarray:
        if isinstance(key, str):
            if key not in self.sector_curves:
                raise ParameterError(f"unknown sector curve '{key}'")
            return self.sector_curves[key]
        if not 0 <= key < self.count:
            raise ParameterError(f"branch index {key} out of range")
        return self.branches[key]

    def states(self, key: BranchKey) -> np.ndarray:
        """(M, 2^N) adiabatic qubit state along the grid."""
        if isinstance(key, str):
            self.curve(key)
            return self.sector_states[key]
        self.curve(key)
        return self.adiabatic_states[:, :, key]

    def to_frame(self) -> pd.DataFrame:
        columns = {"X": self.x}
        columns.update({f"V_{n}": self.branches[n] for n in range(self.count)})
        return pd.DataFrame(columns)

    def sector_frame(self) -> pd.DataFrame:
        columns = {"X": self.x}
        columns.update({label: curve for label, curve in self.sector_curves.items()})
        return pd.DataFrame(columns)


def _labels_at_origin(p: ModelParams) -> Tuple[List[str], np.ndarray]:
    _, sz = _collective(p.N)
    energies, labels, mz = [], [], []
    for sector in spin_sectors(p.N):
        e, v = sector_eigen(p, sector, np.zeros(1))
        for k in range(sector.dimension):
            state = sector.basis @ v[0, :, k]
            energies.append(e[0, k])
            labels.append(sector_label(sector.spin, k, sector.copy))
            mz.append(float(state @ sz @ state))
    # ties (exact cross-sector degeneracies) keep sector order: larger s first
    order = np.lexsort((np.arange(len(energies)), np.round(np.asarray(energies), 10)))
    return [labels[i] for i in order], np.asarray(mz)[order]


def build_surfaces(grid: XGrid, p: ModelParams) -> PotentialSurfaceSet:
    """Diagonalize H_q(X) on the grid and assemble V_n(X) = X^2/2 + E_n(X)."""
    if not grid.is_symmetric:
        raise ParameterError("potential surfaces need a grid symmetric about X = 0")
    x = grid.values

    sector_curves: Dict[str, np.ndarray] = {}
    sector_states: Dict[str, np.ndarray] = {}
    multiplicity: Dict[str, int] = {}
    energies, states, spins = [], [], []
    for sector in spin_sectors(p.N):
        e, v = sector_eigen(p, sector, x)
        full = np.einsum("ab,mbk->mak", sector.basis, v)
        if sector.copy == 0:
            smooth = _fix_phases(full.copy())
            for k in range(sector.dimension):
                label = sector_label(sector.spin, k)
                sector_curves[label] = 0.5 * x ** 2 + e[:, k]
                sector_states[label] = smooth[:, :, k]
                multiplicity[label] = 0
        for k in range(sector.dimension):
            multiplicity[sector_label(sector.spin, k)] += 1
        energies.append(e)
        states.append(full)
        spins.append(np.full(sector.dimension, sector.spin))

    energies = np.concatenate(energies, axis=1)
    states = np.concatenate(states, axis=2)
    spins = np.concatenate(spins)

    order = np.argsort(energies, axis=1, kind="stable")
    ordered = np.take_along_axis(energies, order, axis=1)
    ordered_states = _fix_phases(np.take_along_axis(states, order[:, None, :], axis=2))
    labels, mz = _labels_at_origin(p)

    surfaces = PotentialSurfaceSet(
        params=p,
        grid=grid,
        branches=(0.5 * x ** 2)[None, :] + ordered.T,
        adiabatic_states=ordered_states,
        branch_spins=spins[order].T,
        labels=labels,
        mz_character=mz,
        sector_curves=sector_curves,
        sector_states=sector_states,
        sector_multiplicity=multiplicity,
    )
    logger.debug(
        f"📊 Built {surfaces.count} branches on {grid.points} points "
        f"(N={p.N}, lambda^2={p.lambda_sq:.4g}, eps={p.epsilon:.3g})"
    )
    return surfaces


# --- slow-mode problem ------------------------------------------------------

@dataclass
class BoundStateSet:
    """Lowest eigenpairs of -1/(2 mu) d^2/dX^2 + V(X) on one branch."""

    branch: BranchKey
    mu: float
    grid: XGrid
    energies: np.ndarray
    eigenfunctions: np.ndarray = field(repr=False)  # (k, M), trapezoid-normalized
    extrapolated: bool = False

    def to_frame(self) -> pd.DataFrame:
        columns = {"X": self.grid.values}
        columns.update({f"phi_{k}": self.eigenfunctions[k] for k in range(len(self.energies))})
        return pd.DataFrame(columns)


def _fd_levels(potential: np.ndarray, h: float, mu: float, k: int) -> Tuple[np.ndarray, np.ndarray]:
    interior = potential[1:-1]
    if k > interior.size:
        raise NumericalError(f"insufficient eigenpairs: asked for {k} on {interior.size} interior points")
    kinetic = 1.0 / (mu * h * h)
    diagonal = kinetic + interior
    off = np.full(interior.size - 1, -0.5 * kinetic)
    return eigh_tridiagonal(diagonal, off, select="i", select_range=(0, k - 1))


def solve_bound_states(
    surfaces: PotentialSurfaceSet,
    branch: BranchKey,
    mu: Optional[float] = None,
    k_max: int = 6,
    richardson: bool = False,
) -> BoundStateSet:
    """
    Second-order finite differences with Dirichlet ends. With richardson=True
    the energies are extrapolated from spacings h and h/2 (error O(h^4));
    eigenfunctions stay those of the coarse grid.
    """
    if k_max < 1:
        raise ParameterError("k_max must be at least 1")
    mu = surfaces.params.mu if mu is None else mu
    if mu <= 0:
        raise ParameterError("mu must be positive")

    grid = surfaces.grid
    h = grid.spacing
    energies, vectors = _fd_levels(surfaces.curve(branch), h, mu, k_max)

    phi = np.zeros((k_max, grid.points))
    phi[:, 1:-1] = vectors.T / math.sqrt(h)
    for k in range(k_max):
        peak = np.max(np.abs(phi[k]))
        edge = max(abs(phi[k, 1]), abs(phi[k, -2]))
        if edge >= BOUNDARY_AMPLITUDE * peak:
            raise NumericalError(
                f"grid too narrow: state {k} of branch {branch} has boundary amplitude "
                f"{edge / peak:.1e} of its maximum"
            )
        if phi[k, np.argmax(np.abs(phi[k]))] < 0:
            phi[k] = -phi[k]

    if richardson:
        fine = grid.refined()
        fine_potential = evaluate_curve(surfaces.params, branch, fine.values)
        fine_energies, _ = _fd_levels(fine_potential, fine.spacing, mu, k_max)
        energies = (4.0 * fine_energies - energies) / 3.0

    return BoundStateSet(
        branch=branch,
        mu=mu,
        grid=grid,
        energies=np.asarray(energies),
        eigenfunctions=phi,
        extrapolated=richardson,
    )


def doublet_splitting(bound: BoundStateSet) -> float:
    """eps_1 - eps_0 of a branch (tunnel splitting in a symmetric double well)."""
    if len(bound.energies) < 2:
        raise ParameterError("need at least two bound states")
    return float(bound.energies[1] - bound.energies[0])


def _shoot(potential: np.ndarray, energy: float, h: float, mu: float, start: Tuple[float, float], stop: int) -> float:
    """Value at index `stop` of the finite-difference solution grown outward from X = 0."""
    prev, cur = start
    scale = 2.0 * mu * h * h
    for j in range(1, stop):
        prev, cur = cur, 2.0 * cur - prev + scale * (potential[j] - energy) * cur
    return cur


def wronskian_splitting(surfaces: PotentialSurfaceSet, branch: BranchKey, mu: Optional[float] = None) -> float:
    """
    Ground-doublet splitting of a symmetric double well from the discrete Wronskian at X = 0.

    The right-well state r (Dirichlet wall at X = 0) fixes the amplitude in the
    well; even and odd solutions grown outward from X = 0 carry it back to the
    origin, so the splitting r_m^2 / (2 mu h^2 s_m t_m) stays resolvable far
    below the spacing of the finite-difference eigenvalues.
    """
    mu = surfaces.params.mu if mu is None else mu
    grid = surfaces.grid
    if not grid.is_symmetric or grid.points % 2 == 0:
        raise ParameterError("Wronskian splitting needs a symmetric grid with a point at X = 0")
    h = grid.spacing
    centre = grid.points // 2
    right = surfaces.curve(branch)[centre:]

    energies, vectors = _fd_levels(right, h, mu, 1)
    energy = float(energies[0])
    if right[0] <= energy:
        raise ParameterError(f"branch {branch} has no barrier above its lowest level at X = 0")
    r = vectors[:, 0]
    peak = int(np.argmax(np.abs(r)))  # interior index, grid index peak + 1
    stop = peak + 1

    even = _shoot(right, energy, h, mu, (1.0, 1.0 + mu * h * h * (right[0] - energy)), stop)
    odd = _shoot(right, energy, h, mu, (0.0, 1.0), stop)
    splitting = r[peak] ** 2 / (2.0 * mu * h * h * even * odd)
    logger.debug(f"🔧 Wronskian splitting of branch {branch}: {splitting:.3e} (E_R={energy:.6f})")
    return float(splitting)


def density_of_states_ratio(bound: BoundStateSet) -> float:
    """Low-energy density of states relative to the bare resonator, (1/delta)/sqrt(mu)."""
    return 1.0 / (doublet_splitting(bound) * math.sqrt(bound.mu))


def nonadiabatic_coupling(
    surfaces: PotentialSurfaceSet,
    bound_states: BoundStateSet,
    n: BranchKey,
    m: BranchKey,
    state: int = 0,
) -> float:
    """
    Estimate of the derivative coupling between branches n and m:

        C(X) = (1/mu) dphi/dX sqrt(2) lambda <chi_m|S_x|chi_n> / (E_n - E_m)

    with phi bound state `state` of branch n, differentiated on the grid.
    Returns max |C| over the region where that state has |phi|^2 >= 1e-4 max.
    """
    if n == m:
        raise ParameterError("nonadiabatic coupling needs two different branches")
    p = surfaces.params
    if p.lam == 0.0:
        return 0.0

    sx, _ = _collective(p.N)
    element = np.einsum("ia,ab,ib->i", surfaces.states(m), sx, surfaces.states(n))
    if np.max(np.abs(element)) < 1e-14:
        # different spin sectors never couple
        return 0.0

    phi = bound_states.eigenfunctions[state]
    window = phi ** 2 >= WINDOW_DENSITY * np.max(phi ** 2)
    gap = np.abs(surfaces.curve(n) - surfaces.curve(m))[window]
    if np.min(gap) < DEGENERACY_GAP:
        raise NumericalError(f"quasi-degenerate branches {n} and {m}: gap {np.min(gap):.1e}")

    slope = np.abs(np.gradient(phi, surfaces.grid.spacing))[window]
    coupling = slope / bound_states.mu * math.sqrt(2) * p.lam * np.abs(element[window]) / gap
    return float(np.max(coupling))


def bo_eigenstate_energies(
    p: ModelParams,
    grid: Optional[XGrid] = None,
    k_per_branch: int = 10,
    richardson: bool = False,
) -> np.ndarray:
    """
    Sorted BO levels eps_{n,k} of every sector curve (degenerate copies repeated),
    shifted by -omega_r/2 so they compare directly with H_EDM / omega_q.
    """
    grid = grid or default_grid(p)
    surfaces = build_surfaces(grid, p)
    levels: List[float] = []
    for label, curve_count in surfaces.sector_multiplicity.items():
        bound = solve_bound_states(surfaces, label, p.mu, k_per_branch, richardson)
        for _ in range(curve_count):
            levels.extend(bound.energies)
    return np.sort(np.asarray(levels)) - 0.5 * p.omega_r_tilde


def find_minima(curve: np.ndarray, x: np.ndarray) -> List[Tuple[float, float]]:
    """Interior local minima refined by a parabola through the three nearest points."""
    v = np.asarray(curve)
    h = x[1] - x[0]
    idx = np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])) + 1
    minima = []
    for i in idx:
        left, mid, right = v[i - 1], v[i], v[i + 1]
        curvature = left - 2 * mid + right
        if curvature <= 0:
            minima.append((float(x[i]), float(mid)))
            continue
        shift = 0.5 * (left - right) / curvature
        minima.append((float(x[i] + shift * h), float(mid - 0.25 * (left - right) * shift)))
    return minima


def curvature_at_origin(p: ModelParams, key: Optional[BranchKey] = None, step: float = 1e-3) -> float:
    """Second derivative of a curve at X = 0; negative means the origin is a local maximum."""
    key = ground_label(p.N) if key is None else key
    v = evaluate_curve(p, key, np.array([-step, 0.0, step]))
    return float((v[0] - 2 * v[1] + v[2]) / step ** 2)


def critical_coupling_scan(
    p: ModelParams,
    key: Optional[BranchKey] = None,
    lambda_sq_low: float = 0.05,
    lambda_sq_high: float = 3.0,
    tol: float = 1e-4,
) -> float:
    """lambda^2 at which the curvature of `key` at X = 0 changes sign."""

    def curvature(lambda_sq: float) -> float:
        trial = ModelParams.from_dimensionless(lambda_sq, p.mu, p.epsilon, p.N, p.omega_q)
        return curvature_at_origin(trial, key)

    low, high = curvature(lambda_sq_low), curvature(lambda_sq_high)
    if low * high > 0:
        raise ParameterError(
            f"curvature does not change sign on [{lambda_sq_low}, {lambda_sq_high}]"
        )
    critical = brentq(curvature, lambda_sq_low, lambda_sq_high, xtol=tol)
    logger.info(f"📊 Curvature of {key or ground_label(p.N)} changes sign at lambda^2 = {critical:.5f}")
    return float(critical)
