"""
Dense complex-matrix kernel for the n-local analysis package.

Operators and states are plain ``numpy`` complex arrays; this module adds
the shape checks, the small symmetric eigensolver used for correlation
spectra, and qubit-level tensor plumbing (Kronecker chains, qubit
permutations, partial traces).
"""
import logging
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.utils.errors import DimensionError, ValidationError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
RealMatrix = NDArray[np.float64]

SYMMETRY_TOL = 1e-12
PSD_CLAMP_TOL = 1e-10
JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def _frozen(values) -> ComplexMatrix:
    array = np.array(values, dtype=np.complex128)
    array.setflags(write=False)
    return array


IDENTITY2 = _frozen([[1, 0], [0, 1]])
PAULI_X = _frozen([[0, 1], [1, 0]])
PAULI_Y = _frozen([[0, -1j], [1j, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])
PAULIS: Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix] = (PAULI_X, PAULI_Y, PAULI_Z)


def as_square(matrix, name: str = "matrix") -> ComplexMatrix:
    """
    Coerce input to a finite square complex array.

    Args:
        matrix: Array-like input
        name: Label used in error messages

    Returns:
        The input as a complex128 ndarray

    Raises:
        DimensionError: If the input is not a square 2-D array
        ValidationError: If any entry is NaN or infinite
    """
    array = np.asarray(matrix, dtype=np.complex128)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} contains non-finite entries")
    return array


def qubit_count(dim: int) -> int:
    """Return q such that dim == 2**q, or raise DimensionError."""
    if dim < 1 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def kron(a, b) -> ComplexMatrix:
    """
    Kronecker product of two square matrices.

    result[i*dim(b) + k, j*dim(b) + l] = a[i, j] * b[k, l]
    """
    return np.kron(as_square(a, "left factor"), as_square(b, "right factor"))


def kron_all(*factors) -> ComplexMatrix:
    """Kronecker product of a sequence of square matrices, left to right."""
    if not factors:
        raise DimensionError("kron_all needs at least one factor")
    return reduce(kron, factors)


def spin_operator(axis: Sequence[float]) -> ComplexMatrix:
    """Return the observable axis . sigma for a real 3-vector."""
    x, y, z = (float(c) for c in axis)
    return x * PAULI_X + y * PAULI_Y + z * PAULI_Z


def is_hermitian(matrix, tol: float = 1e-10) -> bool:
    array = as_square(matrix)
    return bool(np.max(np.abs(array - array.conj().T)) <= tol)


def expectation(operator, rho) -> complex:
    """Tr[operator . rho] without forming the product matrix."""
    return complex(np.sum(np.asarray(operator) * np.asarray(rho).T))


def _check_sym3(matrix) -> RealMatrix:
    array = np.asarray(matrix, dtype=np.float64)
    if array.shape != (3, 3):
        raise DimensionError(f"expected a 3x3 matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValidationError("3x3 matrix contains non-finite entries")
    asymmetry = np.max(np.abs(array - array.T))
    if asymmetry > SYMMETRY_TOL:
        raise ValidationError(f"matrix is not symmetric (max asymmetry {asymmetry:.3e})")
    return array


def eigh_sym3(matrix) -> Tuple[RealMatrix, RealMatrix]:
    """
    Cyclic Jacobi diagonalization of a real symmetric 3x3 matrix.

    Args:
        matrix: Symmetric 3x3 array-like

    Returns:
        Tuple (eigenvalues, eigenvectors) with eigenvalues in descending
        order and eigenvectors as the matching columns

    Raises:
        ValidationError: If the input is asymmetric beyond 1e-12
    """
    a = _check_sym3(matrix).copy()
    a = 0.5 * (a + a.T)
    vectors = np.eye(3)
    threshold = JACOBI_OFF_TOL * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * (a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2))
        if off < threshold:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rotation = np.eye(3)
            rotation[p, p] = c
            rotation[q, q] = c
            rotation[p, q] = s
            rotation[q, p] = -s
            a = rotation.T @ a @ rotation
            vectors = vectors @ rotation
    else:
        logger.warning("Jacobi eigensolver hit %d sweeps without converging", JACOBI_MAX_SWEEPS)

    values = np.diag(a).copy()
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def eig_sym3(matrix, psd: bool = False) -> Tuple[float, float, float]:
    """
    Eigenvalues of a real symmetric 3x3 matrix, descending.

    Args:
        matrix: Symmetric 3x3 array-like
        psd: Treat the matrix as positive semidefinite; negative eigenvalues
            of magnitude <= 1e-10 are clamped to zero, larger ones rejected

    Returns:
        (l1, l2, l3) with l1 >= l2 >= l3
    """
    values, _ = eigh_sym3(matrix)
    if psd:
        if values[-1] < -PSD_CLAMP_TOL:
            raise ValidationError(
                f"matrix expected PSD but has eigenvalue {values[-1]:.3e}"
            )
        values = np.maximum(values, 0.0)
    return float(values[0]), float(values[1]), float(values[2])


def _check_permutation(perm: Sequence[int], qubits: int) -> Tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(qubits)):
        raise ValidationError(f"{perm} is not a permutation of {qubits} qubits")
    return perm


def invert_permutation(perm: Sequence[int]) -> Tuple[int, ...]:
    """Inverse of a qubit permutation given in transpose convention."""
    return tuple(int(i) for i in np.argsort(perm))


def permute_qubits(operator, perm: Sequence[int]) -> ComplexMatrix:
    """
    Relabel the tensor factors of an operator or state vector.

    Output factor k is input factor perm[k], so for two qubits
    permute_qubits(kron(A, B), (1, 0)) == kron(B, A).

    Args:
        operator: 2**q x 2**q matrix or length-2**q vector
        perm: Permutation of range(q)

    Returns:
        The permuted operator (or vector)
    """
    array = np.asarray(operator, dtype=np.complex128)
    if array.ndim not in (1, 2) or (array.ndim == 2 and array.shape[0] != array.shape[1]):
        raise DimensionError(f"cannot permute qubits of an array with shape {array.shape}")
    dim = array.shape[0]
    qubits = qubit_count(dim)
    perm = _check_permutation(perm, qubits)

    if array.ndim == 1:
        return array.reshape([2] * qubits).transpose(perm).reshape(dim)
    axes = list(perm) + [qubits + p for p in perm]
    return array.reshape([2] * (2 * qubits)).transpose(axes).reshape(dim, dim)


def partial_trace(rho, keep: Sequence[int]) -> ComplexMatrix:
    """
    Reduced operator on the qubits listed in keep (in that order).

    Args:
        rho: 2**q x 2**q operator
        keep: Qubit indices to keep

    Returns:
        2**len(keep) square matrix
    """
    array = as_square(rho, "rho")
    qubits = qubit_count(array.shape[0])
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep) or any(k < 0 or k >= qubits for k in keep):
        raise ValidationError(f"invalid qubit selection {keep} for {qubits} qubits")
    traced = [k for k in range(qubits) if k not in keep]
    permuted = permute_qubits(array, keep + traced)
    kept_dim = 2 ** len(keep)
    rest_dim = 2 ** len(traced)
    blocks = permuted.reshape(kept_dim, rest_dim, kept_dim, rest_dim)
    return np.trace(blocks, axis1=1, axis2=3)
