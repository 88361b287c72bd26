"""
Hamiltonian builders: general cavity QED, extended Dicke model (EDM) and
the weak-coupling Stark Hamiltonian.

All builders return energies in the same angular-frequency units as the
parameters they are given (hbar = 1). Use ModelParams.from_dimensionless
with omega_q=1 to work in units of the qubit frequency.
"""
import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import eigvalsh

from rfcqed.config import settings
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.quantum.operators import (
    BasisDescriptor,
    HermitianOperator,
    collective_spin,
    pauli_on_site,
    spin_squared,
)
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.quantum.models")


class GeneralCQEDParams(BaseModel):
    """One resonator coupled to N possibly different qubits with direct couplings J."""

    model_config = ConfigDict(frozen=True)

    omega_r: float = Field(gt=0)
    omega_q: List[float]
    g: List[float]
    J: Optional[List[List[float]]] = None  # N x N, symmetric; diagonal ignored

    @classmethod
    def from_model(cls, p: "ModelParams") -> "GeneralCQEDParams":
        """Identical qubits with J_ij = epsilon g^2 / (4 omega_r)."""
        j = p.epsilon * p.g ** 2 / (4 * p.omega_r)
        coupling = [[0.0 if i == k else j for k in range(p.N)] for i in range(p.N)]
        return cls(omega_r=p.omega_r, omega_q=[p.omega_q] * p.N, g=[p.g] * p.N, J=coupling)

    def coupling_matrix(self) -> np.ndarray:
        """Validated J with its diagonal zeroed."""
        n = len(self.omega_q)
        if n == 0:
            raise ParameterError("at least one qubit is required")
        if len(self.g) != n:
            raise ParameterError(f"got {n} qubit frequencies but {len(self.g)} couplings")
        if any(w <= 0 for w in self.omega_q):
            raise ParameterError("qubit frequencies must be positive")
        if self.J is None:
            return np.zeros((n, n))
        J = np.asarray(self.J, dtype=float)
        if J.shape != (n, n):
            raise ParameterError(f"J has shape {J.shape}, expected ({n}, {n})")
        if not np.allclose(J, J.T, rtol=0, atol=1e-14 * max(1.0, np.max(np.abs(J)))):
            raise ParameterError("J must be symmetric")
        np.fill_diagonal(J, 0.0)
        return J


class ModelParams(BaseModel):
    """Parameters of the extended Dicke model."""

    model_config = ConfigDict(frozen=True)

    omega_r: float = Field(gt=0)
    omega_q: float = Field(gt=0)
    g: float
    epsilon: float = Field(default=0.0, ge=-1.0)
    N: int = Field(default=1, ge=1)

    @classmethod
    def from_dimensionless(
        cls,
        lambda_sq: float,
        mu: float,
        epsilon: float = 0.0,
        N: int = 1,
        omega_q: float = 1.0,
    ) -> "ModelParams":
        """Build from lambda^2 and the effective mass mu = (omega_q/omega_r)^2."""
        if lambda_sq < 0:
            raise ParameterError("lambda_sq must be non-negative")
        if mu <= 0:
            raise ParameterError("mu must be positive")
        omega_r = omega_q / math.sqrt(mu)
        return cls(
            omega_r=omega_r,
            omega_q=omega_q,
            g=math.sqrt(lambda_sq * omega_r * omega_q),
            epsilon=epsilon,
            N=N,
        )

    @property
    def lambda_sq(self) -> float:
        return self.g ** 2 / (self.omega_r * self.omega_q)

    @property
    def lam(self) -> float:
        return math.sqrt(self.lambda_sq)

    @property
    def mu(self) -> float:
        return (self.omega_q / self.omega_r) ** 2

    @property
    def omega_r_tilde(self) -> float:
        """Resonator frequency in units of omega_q."""
        return self.omega_r / self.omega_q

    @property
    def lambda_c(self) -> float:
        """Symmetry-breaking coupling of the ground state."""
        return 1.0 / math.sqrt(self.N)

    @property
    def lambda_crit_sq(self) -> float:
        """Two-qubit excited-state transition, lambda^2 = 1/(2 sqrt(1 + epsilon))."""
        if self.epsilon <= -1.0:
            return math.inf
        return 1.0 / (2.0 * math.sqrt(1.0 + self.epsilon))

    def derived(self) -> Dict[str, float]:
        """Dimensionless quantities echoed into run metadata."""
        return {
            "lambda": self.lam,
            "lambda_sq": self.lambda_sq,
            "mu": self.mu,
            "omega_r_tilde": self.omega_r_tilde,
            "lambda_c": self.lambda_c,
            "lambda_crit_sq": self.lambda_crit_sq,
        }


class TruncationReport(BaseModel):
    n_max: int
    n_check: int
    k_levels: int
    max_shift: float
    tolerance: float
    passed: bool
    minimal_n_max: Optional[int] = None


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def _assemble(qubit_static: np.ndarray, qubit_coupled: List[np.ndarray],
              boson_coupled: List[np.ndarray], omega_r: float, n_max: int) -> np.ndarray:
    """omega_r n + Q_static (x) 1 + sum_k Q_k (x) B_k on the qubits-then-boson space."""
    dq = qubit_static.shape[0]
    eye_b = np.eye(n_max + 1)
    number = np.diag(np.arange(n_max + 1, dtype=float))
    H = omega_r * np.kron(np.eye(dq), number) + np.kron(qubit_static, eye_b)
    for q, b in zip(qubit_coupled, boson_coupled):
        H = H + np.kron(q, b)
    return H


def _real_if_possible(matrix: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(matrix) and not np.any(matrix.imag):
        return matrix.real
    return matrix


def _check_cutoff(n_max: int) -> None:
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max}")


def build_h_cqed(p: GeneralCQEDParams, n_max: int) -> HermitianOperator:
    """
    H = w_r a+a + sum w_i/2 sz_i + sum g_i/2 (a + a+) sx_i
        + sum_{i,j} (g_i g_j / (4 w_r) + J_ij) sx_i sx_j

    The i = j depolarization terms are kept; each is a multiple of the identity.
    With GeneralCQEDParams.from_model(p) the result equals build_h_edm(p) minus
    depolarization_offset(p) times the identity, not build_h_edm(p) itself.
    """
    _check_cutoff(n_max)
    J = p.coupling_matrix()
    n = len(p.omega_q)
    qubits = BasisDescriptor(qubit_count=n)
    sx = [pauli_on_site(qubits, i, "x").matrix.real for i in range(1, n + 1)]
    sz = [pauli_on_site(qubits, i, "z").matrix.real for i in range(1, n + 1)]
    g = np.asarray(p.g, dtype=float)

    static = sum(0.5 * w * z for w, z in zip(p.omega_q, sz))
    for i in range(n):
        for j in range(n):
            static = static + (g[i] * g[j] / (4 * p.omega_r) + J[i, j]) * (sx[i] @ sx[j])
    coupling = sum(0.5 * g[i] * sx[i] for i in range(n))

    a = _ladder(n_max)
    H = _assemble(static, [coupling], [a + a.T], p.omega_r, n_max)
    return HermitianOperator(BasisDescriptor(qubit_count=n, fock_cutoff=n_max), H)


def depolarization_offset(p: ModelParams) -> float:
    """
    Constant by which build_h_edm exceeds build_h_cqed(GeneralCQEDParams.from_model(p)).

    The EDM's (1+eps) S_x^2 term carries eps g^2/(4 w_r) on each i = j term,
    while the direct couplings J only act between distinct qubits.
    """
    return p.epsilon * p.g ** 2 * p.N / (4 * p.omega_r)


def build_h_edm(p: ModelParams, n_max: int) -> HermitianOperator:
    """H = w_r a+a + w_q S_z + g (a+ + a) S_x + (1 + eps)(g^2/w_r) S_x^2."""
    _check_cutoff(n_max)
    qubits = BasisDescriptor(qubit_count=p.N)
    Sx = collective_spin(qubits, "x").matrix.real
    Sz = collective_spin(qubits, "z").matrix.real

    static = p.omega_q * Sz + (1 + p.epsilon) * (p.g ** 2 / p.omega_r) * (Sx @ Sx)
    a = _ladder(n_max)
    H = _assemble(static, [p.g * Sx], [a + a.T], p.omega_r, n_max)
    return HermitianOperator(BasisDescriptor(qubit_count=p.N, fock_cutoff=n_max), H)


def stark_validity(p: ModelParams) -> float:
    """delta omega_r / omega_r with delta omega_r = g^2/(2 omega_q); must stay below 1."""
    return p.g ** 2 / (2 * p.omega_q) / p.omega_r


def build_h_stark(p: ModelParams, n_max: int) -> HermitianOperator:
    """
    Weak-coupling effective Hamiltonian:
    w_r a+a + w_q S_z + (g^2/(4 w_q))(2 a+a + 1) S_z
        + [(1+eps) g^2/(2 w_r) - g^2/(4 w_q)] (S^2 - S_z^2)
    """
    _check_cutoff(n_max)
    ratio = stark_validity(p)
    if ratio >= 1.0:
        logger.warning(
            f"⚠️ Stark Hamiltonian outside its validity regime: delta_omega_r/omega_r = {ratio:.3g}"
        )

    qubits = BasisDescriptor(qubit_count=p.N)
    Sz = collective_spin(qubits, "z").matrix.real
    S2 = _real_if_possible(spin_squared(qubits).matrix)
    shift = p.g ** 2 / (4 * p.omega_q)
    exchange = (1 + p.epsilon) * p.g ** 2 / (2 * p.omega_r) - shift

    static = p.omega_q * Sz + shift * Sz + exchange * (S2 - Sz @ Sz)
    number = np.diag(np.arange(n_max + 1, dtype=float))
    H = _assemble(static, [2 * shift * Sz], [number], p.omega_r, n_max)
    return HermitianOperator(BasisDescriptor(qubit_count=p.N, fock_cutoff=n_max), H)


def lowest_levels(h: HermitianOperator, k: int) -> np.ndarray:
    """The k smallest eigenvalues, ascending."""
    if k > h.dimension:
        raise ParameterError(f"requested {k} levels from a {h.dimension}-dimensional space")
    return eigvalsh(h.matrix, subset_by_index=[0, k - 1])


def validate_truncation(
    p: ModelParams,
    n_max: int,
    k_levels: int = 10,
    scan_minimum: bool = False,
) -> TruncationReport:
    """
    Compare the lowest k_levels EDM eigenvalues at n_max and at n_max + 25%.
    Passes when the largest shift is below truncation_tolerance * omega_r.
    """
    n_check = int(math.ceil(1.25 * n_max))
    if n_check == n_max:
        n_check = n_max + 1
    low = lowest_levels(build_h_edm(p, n_max), k_levels)
    high = lowest_levels(build_h_edm(p, n_check), k_levels)
    max_shift = float(np.max(np.abs(low - high)))
    tolerance = settings.truncation_tolerance * p.omega_r

    report = TruncationReport(
        n_max=n_max,
        n_check=n_check,
        k_levels=k_levels,
        max_shift=max_shift,
        tolerance=tolerance,
        passed=max_shift < tolerance,
    )
    if scan_minimum:
        report.minimal_n_max = minimal_fock_cutoff(p, k_levels=k_levels)

    if report.passed:
        logger.debug(f"✅ n_max={n_max} converged (shift {max_shift:.2e})")
    else:
        logger.warning(f"⚠️ n_max={n_max} not converged: shift {max_shift:.2e} > {tolerance:.2e}")
    return report


def minimal_fock_cutoff(
    p: ModelParams,
    k_levels: int = 10,
    start: int = 20,
    step: int = 10,
    ceiling: int = 1200,
) -> int:
    """Smallest n_max (on the start + i*step ladder) that passes validate_truncation."""
    n_max = max(start, k_levels)
    while n_max <= ceiling:
        n_check = int(math.ceil(1.25 * n_max))
        low = lowest_levels(build_h_edm(p, n_max), k_levels)
        high = lowest_levels(build_h_edm(p, n_check), k_levels)
        if float(np.max(np.abs(low - high))) < settings.truncation_tolerance * p.omega_r:
            logger.info(f"📊 Minimal Fock cutoff: {n_max} (lambda^2={p.lambda_sq:.3g}, N={p.N})")
            return n_max
        n_max += step
    raise NumericalError(f"Fock truncation did not converge below n_max={ceiling}")
