import numpy as np
import pytest

from rfcqed.errors import BasisMismatchError, NumericalError, ParameterError
from rfcqed.quantum.models import ModelParams, build_h_edm
from rfcqed.quantum.operators import (
    BasisDescriptor,
    HermitianOperator,
    boson_ops,
    collective_spin,
    commutator,
    is_hermitian,
    parity_operator,
    pauli_on_site,
    qubit_mz_values,
    spin_squared,
    symmetric_subspace,
)


def test_basis_dimensions():
    basis = BasisDescriptor(qubit_count=2, fock_cutoff=3)
    assert basis.qubit_dimension == 4
    assert basis.boson_dimension == 4
    assert basis.dimension == 16
    assert BasisDescriptor(qubit_count=3).dimension == 8


def test_basis_ordering_is_fixed():
    assert BasisDescriptor(qubit_count=2).ordering == "qubits_then_mode"
    with pytest.raises(ValueError):
        BasisDescriptor(qubit_count=2, fock_cutoff=3, ordering="mode_then_qubits")


def test_pauli_rejects_invalid_site_and_axis():
    basis = BasisDescriptor(qubit_count=2)
    with pytest.raises(ParameterError, match="invalid site"):
        pauli_on_site(basis, 3, "x")
    with pytest.raises(ParameterError):
        pauli_on_site(basis, 1, "w")


def test_paulis_on_different_sites_commute():
    basis = BasisDescriptor(qubit_count=2, fock_cutoff=2)
    x1 = pauli_on_site(basis, 1, "x")
    z2 = pauli_on_site(basis, 2, "z")
    np.testing.assert_allclose(commutator(x1, z2), 0.0, atol=1e-14)


@pytest.mark.parametrize("n_qubits", [1, 2, 3])
def test_collective_spin_algebra(n_qubits):
    basis = BasisDescriptor(qubit_count=n_qubits)
    sx, sy, sz = (collective_spin(basis, axis) for axis in "xyz")
    np.testing.assert_allclose(commutator(sx, sy), 1j * sz.matrix, atol=1e-13)
    np.testing.assert_allclose(commutator(sy, sz), 1j * sx.matrix, atol=1e-13)
    np.testing.assert_allclose(commutator(sz, sx), 1j * sy.matrix, atol=1e-13)


def test_spin_squared_spectrum_two_qubits():
    values = np.sort(spin_squared(BasisDescriptor(qubit_count=2)).eigvalsh())
    np.testing.assert_allclose(values, [0.0, 2.0, 2.0, 2.0], atol=1e-13)


def test_boson_ops_commutator_away_from_cutoff():
    basis = BasisDescriptor(qubit_count=1, fock_cutoff=6)
    a, a_dag, number = boson_ops(basis)
    comm = a @ a_dag - a_dag @ a
    diagonal = np.real(np.diag(comm)).reshape(2, 7)
    np.testing.assert_allclose(diagonal[:, :-1], 1.0)
    np.testing.assert_allclose(number.matrix, a_dag @ a)


def test_boson_ops_without_boson():
    with pytest.raises(ParameterError, match="no bosonic factor"):
        boson_ops(BasisDescriptor(qubit_count=1))


def test_mz_values_tensor_order():
    np.testing.assert_allclose(qubit_mz_values(2), [1.0, 0.0, 0.0, -1.0])


def test_parity_commutes_with_edm():
    p = ModelParams.from_dimensionless(0.7, 50.0, epsilon=0.1, N=2)
    h = build_h_edm(p, 12)
    parity = parity_operator(h.basis)
    assert set(np.unique(np.real(np.diag(parity.matrix)))) <= {-1.0, 1.0}
    np.testing.assert_allclose(commutator(parity, h), 0.0, atol=1e-12)


def test_symmetric_subspace_is_isometry():
    basis = BasisDescriptor(qubit_count=3, fock_cutoff=2)
    iso = symmetric_subspace(basis)
    assert iso.shape == (basis.dimension, 4 * 3)
    np.testing.assert_allclose(iso.conj().T @ iso, np.eye(12), atol=1e-14)


def test_symmetric_subspace_carries_maximal_spin():
    basis = BasisDescriptor(qubit_count=2)
    iso = symmetric_subspace(basis)
    s2 = iso.conj().T @ spin_squared(basis).matrix @ iso
    np.testing.assert_allclose(s2, 2.0 * np.eye(3), atol=1e-13)


def test_hermitian_operator_checks():
    basis = BasisDescriptor(qubit_count=1)
    with pytest.raises(NumericalError):
        HermitianOperator(basis, np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ParameterError):
        HermitianOperator(basis, np.eye(3))
    assert is_hermitian(np.array([[1.0, 2j], [-2j, 0.0]]))


def test_basis_mismatch():
    a = collective_spin(BasisDescriptor(qubit_count=1), "x")
    b = collective_spin(BasisDescriptor(qubit_count=1, fock_cutoff=1), "x")
    with pytest.raises(BasisMismatchError):
        a + b
    with pytest.raises(BasisMismatchError):
        commutator(a, b)
