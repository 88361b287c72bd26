"""
Finite-dimensional operator algebra: Pauli and collective spin operators
for N qubits, truncated bosonic ladder operators, parity.

Tensor ordering is fixed: qubit 1 ... qubit N, then the bosonic factor.
Single-qubit basis order is {|e>, |g>}, so sigma_z = diag(1, -1).
"""
from dataclasses import dataclass, field
from functools import reduce
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rfcqed.config import settings
from rfcqed.errors import BasisMismatchError, ParameterError, NumericalError


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class BasisDescriptor(BaseModel):
    """Qubits-then-boson product basis. fock_cutoff=0 means no bosonic factor."""

    model_config = ConfigDict(frozen=True)

    qubit_count: int = Field(ge=1)
    fock_cutoff: int = Field(default=0, ge=0)
    ordering: Literal["qubits_then_mode"] = "qubits_then_mode"

    @property
    def has_boson(self) -> bool:
        return self.fock_cutoff > 0

    @property
    def qubit_dimension(self) -> int:
        return 2 ** self.qubit_count

    @property
    def boson_dimension(self) -> int:
        return self.fock_cutoff + 1 if self.has_boson else 1

    @property
    def dimension(self) -> int:
        return self.qubit_dimension * self.boson_dimension

    def qubit_only(self) -> "BasisDescriptor":
        return BasisDescriptor(qubit_count=self.qubit_count)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix tied to the basis it was built on."""

    basis: BasisDescriptor
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.basis.dimension, self.basis.dimension):
            raise ParameterError(
                f"matrix shape {m.shape} does not match basis dimension {self.basis.dimension}"
            )
        if not is_hermitian(m):
            raise NumericalError("matrix is not Hermitian")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def eigh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_basis(self, other)
        return HermitianOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_basis(self, other)
        return HermitianOperator(self.basis, self.matrix - other.matrix)

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(self.basis, float(factor) * self.matrix)


def is_hermitian(matrix: np.ndarray, rtol: Optional[float] = None) -> bool:
    rtol = settings.hermiticity_rtol if rtol is None else rtol
    scale = np.max(np.abs(matrix)) if matrix.size else 0.0
    if scale == 0.0:
        return True
    return float(np.max(np.abs(matrix - matrix.conj().T))) <= rtol * scale


def _require_same_basis(*ops) -> BasisDescriptor:
    bases = {op.basis for op in ops}
    if len(bases) != 1:
        raise BasisMismatchError("operators were built on different basis descriptors")
    return ops[0].basis


def commutator(a: HermitianOperator, b: HermitianOperator) -> np.ndarray:
    """[A, B] as a plain matrix (anti-Hermitian in general)."""
    _require_same_basis(a, b)
    return a.matrix @ b.matrix - b.matrix @ a.matrix


def _embed_qubit_matrix(basis: BasisDescriptor, qubit_matrix: np.ndarray) -> np.ndarray:
    if not basis.has_boson:
        return qubit_matrix
    return np.kron(qubit_matrix, np.eye(basis.boson_dimension))


def _single_site(n_qubits: int, site: int, local: np.ndarray) -> np.ndarray:
    factors = [np.eye(2, dtype=complex) for _ in range(n_qubits)]
    factors[site - 1] = local
    return reduce(np.kron, factors)


def _axis(axis: str) -> str:
    axis = axis.lower()
    if axis not in _PAULI:
        raise ParameterError(f"invalid axis '{axis}'")
    return axis


def pauli_on_site(basis: BasisDescriptor, site: int, axis: str) -> HermitianOperator:
    """sigma_axis acting on qubit `site` (1-based), identity elsewhere."""
    if not 1 <= site <= basis.qubit_count:
        raise ParameterError("invalid site")
    local = _single_site(basis.qubit_count, site, _PAULI[_axis(axis)])
    return HermitianOperator(basis, _embed_qubit_matrix(basis, local))


def collective_spin(basis: BasisDescriptor, axis: str) -> HermitianOperator:
    """S_axis = 1/2 sum_i sigma_axis^i."""
    axis = _axis(axis)
    n = basis.qubit_count
    total = sum(_single_site(n, site, _PAULI[axis]) for site in range(1, n + 1))
    return HermitianOperator(basis, _embed_qubit_matrix(basis, 0.5 * total))


def spin_squared(basis: BasisDescriptor) -> HermitianOperator:
    """Total spin S^2 = Sx^2 + Sy^2 + Sz^2."""
    ops = [collective_spin(basis.qubit_only(), axis).matrix for axis in "xyz"]
    s2 = sum(op @ op for op in ops)
    return HermitianOperator(basis, _embed_qubit_matrix(basis, s2))


def boson_ops(basis: BasisDescriptor) -> Tuple[np.ndarray, np.ndarray, HermitianOperator]:
    """Truncated a, a^dagger and a^dagger a on the full product space."""
    if not basis.has_boson:
        raise ParameterError("no bosonic factor")
    local = np.diag(np.sqrt(np.arange(1, basis.fock_cutoff + 1, dtype=float)), k=1).astype(complex)
    eye_q = np.eye(basis.qubit_dimension)
    a = np.kron(eye_q, local)
    a_dag = a.conj().T
    number = np.kron(eye_q, np.diag(np.arange(basis.boson_dimension, dtype=complex)))
    return a, a_dag, HermitianOperator(basis, number)


def qubit_mz_values(n_qubits: int) -> np.ndarray:
    """S_z eigenvalue of every computational qubit basis state, in tensor order."""
    bits = (np.arange(2 ** n_qubits)[:, None] >> np.arange(n_qubits - 1, -1, -1)) & 1
    # bit 0 is |e> (+1/2), bit 1 is |g> (-1/2)
    return 0.5 * np.sum(1 - 2 * bits, axis=1)


def parity_operator(basis: BasisDescriptor) -> HermitianOperator:
    """U = exp(i pi (a^dagger a + S_z + N/2)); diagonal with entries +-1."""
    mz = qubit_mz_values(basis.qubit_count)
    photons = np.arange(basis.boson_dimension)
    exponent = (mz[:, None] + basis.qubit_count / 2 + photons[None, :]).ravel()
    signs = np.where(np.round(exponent).astype(int) % 2 == 0, 1.0, -1.0)
    return HermitianOperator(basis, np.diag(signs).astype(complex))


def symmetric_subspace(basis: BasisDescriptor) -> np.ndarray:
    """
    Isometry onto the maximal-spin (Dicke) subspace.
    Columns are |s=N/2, m> for m = N/2, N/2-1, ..., -N/2 (tensored with the
    bosonic identity if present).
    """
    n = basis.qubit_count
    mz = qubit_mz_values(n)
    columns = []
    for k in range(n + 1):
        m = n / 2 - k
        vec = np.where(np.isclose(mz, m), 1.0, 0.0)
        columns.append(vec / np.linalg.norm(vec))
    iso = np.array(columns).T.astype(complex)
    if basis.has_boson:
        iso = np.kron(iso, np.eye(basis.boson_dimension))
    return iso
