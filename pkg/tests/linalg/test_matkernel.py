"""
Tests for the dense matrix kernel.
"""
import numpy as np
import pytest

from src.linalg.matkernel import (
    IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, as_square, eig_sym3, eigh_sym3, expectation,
    invert_permutation, is_hermitian, kron, kron_all, partial_trace, permute_qubits, qubit_count,
    spin_operator,
)
from src.utils.errors import DimensionError, ValidationError


def _random_matrix(rng, dim):
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def _random_density(rng, dim):
    g = _random_matrix(rng, dim)
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def test_kron_block_layout():
    """Test that kron places b blocks scaled by the entries of a."""
    result = kron(PAULI_X, PAULI_Z)
    assert result.shape == (4, 4)
    assert np.allclose(result[0:2, 2:4], PAULI_Z)
    assert np.allclose(result[2:4, 0:2], PAULI_Z)
    assert np.allclose(result[0:2, 0:2], 0)


def test_kron_all_matches_nested_kron():
    expected = np.kron(np.kron(PAULI_X, PAULI_Y), PAULI_Z)
    assert np.allclose(kron_all(PAULI_X, PAULI_Y, PAULI_Z), expected)


def test_kron_all_requires_factors():
    with pytest.raises(DimensionError):
        kron_all()


def test_as_square_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_square(np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        as_square(np.array([[np.nan, 0], [0, 1]]))


def test_qubit_count():
    assert qubit_count(1) == 0
    assert qubit_count(8) == 3
    with pytest.raises(DimensionError):
        qubit_count(6)


def test_spin_operator_axes():
    assert np.allclose(spin_operator((0, 0, 1)), PAULI_Z)
    assert np.allclose(spin_operator((1, 0, 0)), PAULI_X)
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    op = spin_operator(axis)
    assert is_hermitian(op)
    assert np.allclose(op @ op, IDENTITY2)


def test_expectation_is_trace_of_product(rng):
    op = _random_matrix(rng, 4)
    rho = _random_density(rng, 4)
    assert expectation(op, rho) == pytest.approx(np.trace(op @ rho), abs=1e-12)


def test_permute_swaps_two_factors(rng):
    """Test that the (1, 0) permutation exchanges the tensor factors."""
    a = _random_matrix(rng, 2)
    b = _random_matrix(rng, 2)
    assert np.allclose(permute_qubits(kron(a, b), (1, 0)), kron(b, a))


def test_permute_three_factors_transpose_convention(rng):
    """Test that output factor k is input factor perm[k]."""
    factors = [_random_matrix(rng, 2) for _ in range(3)]
    perm = (2, 0, 1)
    permuted = permute_qubits(kron_all(*factors), perm)
    assert np.allclose(permuted, kron_all(*(factors[p] for p in perm)))


def test_permute_vector():
    zero = np.array([1, 0])
    one = np.array([0, 1])
    state = np.kron(np.kron(zero, one), one)
    assert np.allclose(permute_qubits(state, (1, 0, 2)), np.kron(np.kron(one, zero), one))


def test_inverse_permutation_round_trip(rng):
    rho = _random_density(rng, 16)
    perm = (3, 1, 0, 2)
    restored = permute_qubits(permute_qubits(rho, perm), invert_permutation(perm))
    assert np.allclose(restored, rho)


def test_permute_preserves_trace_hermiticity_and_spectrum(rng):
    for qubits in (2, 3, 4):
        for _ in range(10):
            g = _random_matrix(rng, 2 ** qubits)
            h = g + g.conj().T
            permuted = permute_qubits(h, tuple(rng.permutation(qubits)))
            assert np.trace(permuted) == pytest.approx(np.trace(h), abs=1e-10)
            assert is_hermitian(permuted)
            assert np.allclose(np.linalg.eigvalsh(permuted), np.linalg.eigvalsh(h), atol=1e-10)


def test_permute_rejects_non_bijection():
    with pytest.raises(ValidationError):
        permute_qubits(np.eye(4), (0, 0))
    with pytest.raises(DimensionError):
        permute_qubits(np.eye(3), (0,))


def test_partial_trace_of_product(rng):
    rho1 = _random_density(rng, 2)
    rho2 = _random_density(rng, 4)
    joint = kron(rho1, rho2)
    assert np.allclose(partial_trace(joint, [0]), rho1)
    assert np.allclose(partial_trace(joint, [1, 2]), rho2)
    assert np.allclose(partial_trace(joint, [2, 1]), permute_qubits(rho2, (1, 0)))


def test_partial_trace_rejects_bad_selection():
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4) / 4, [0, 0])
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4) / 4, [2])


def test_eigh_sym3_matches_numpy(rng):
    """Test the Jacobi solver against LAPACK on random symmetric matrices."""
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        sym = m + m.T
        values, vectors = eigh_sym3(sym)
        assert np.allclose(values, np.sort(np.linalg.eigvalsh(sym))[::-1], atol=1e-12)
        assert np.allclose(sym @ vectors, vectors * values, atol=1e-10)
        assert np.allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)


def test_eigh_sym3_diagonal_input():
    values, _ = eigh_sym3(np.diag([0.2, 3.0, -1.0]))
    assert np.allclose(values, [3.0, 0.2, -1.0])


def test_eig_sym3_trace_and_determinant(rng):
    """Test that the eigenvalues sum to the trace and multiply to the determinant."""
    for _ in range(200):
        g = rng.normal(size=(3, 3))
        m = g + g.T
        values = eig_sym3(m)
        assert sum(values) == pytest.approx(np.trace(m), abs=1e-10)
        assert np.prod(values) == pytest.approx(np.linalg.det(m), abs=1e-9)
        assert values[0] >= values[1] >= values[2]


def test_eig_sym3_rejects_asymmetric():
    m = np.eye(3)
    m[0, 1] = 1e-6
    with pytest.raises(ValidationError):
        eig_sym3(m)


def test_eig_sym3_psd_clamp():
    """Test that tiny negative eigenvalues clamp to zero and large ones raise."""
    assert eig_sym3(np.diag([1.0, 0.0, -1e-12]), psd=True) == (1.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        eig_sym3(np.diag([1.0, 0.0, -1e-3]), psd=True)
    assert eig_sym3(np.diag([1.0, 0.0, -1e-3]))[2] == pytest.approx(-1e-3)


def test_eig_sym3_shape_check():
    with pytest.raises(DimensionError):
        eig_sym3(np.eye(2))
