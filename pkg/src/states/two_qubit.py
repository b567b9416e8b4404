"""
Two-qubit source states for the n-local analysis package.

This module holds the density-matrix value type, its Bloch form
rho = 1/4 (1 + mA.sigma x 1 + 1 x sigma.mB + sum t_mn sigma_m x sigma_n),
the correlation spectrum (eigenvalues of t^T t) and the local-rotation
alignment that diagonalizes the correlation matrix.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import special_ortho_group, unitary_group

from src.linalg.matkernel import (
    IDENTITY2, PAULIS, ComplexMatrix, RealMatrix, as_square, eig_sym3, expectation, kron,
    permute_qubits,
)
from src.utils.errors import DimensionError, UnphysicalStateError, ValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
IMAG_TOL = 1e-10

AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
# The chain's middle parties measure sigma_z x sigma_z and sigma_x x sigma_x,
# so the two largest singular values go to z and x.
CANONICAL_AXIS_ORDER = ("z", "x", "y")

_SINGLE = (IDENTITY2,) + PAULIS
# _PAULI_PAIRS[i][j] = sigma_i x sigma_j with sigma_0 = identity
_PAULI_PAIRS = tuple(tuple(np.kron(a, b) for b in _SINGLE) for a in _SINGLE)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """
    A validated two-qubit density matrix.

    The first qubit belongs to the first party of the source, the second
    qubit to the second party. Instances are immutable.
    """

    rho: ComplexMatrix
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        rho = as_square(self.rho, "rho")
        if rho.shape != (4, 4):
            raise DimensionError(f"two-qubit state needs a 4x4 matrix, got {rho.shape}")

        asymmetry = float(np.max(np.abs(rho - rho.conj().T)))
        if asymmetry > HERMITIAN_TOL:
            raise ValidationError(f"density matrix is not Hermitian (deviation {asymmetry:.3e})")

        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {trace.real:.12g}, expected 1")

        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if min_eig < -PSD_TOL:
            raise UnphysicalStateError("density matrix is not positive semidefinite", min_eig)

        object.__setattr__(self, "rho", _readonly(rho))

    def swap_parties(self) -> "TwoQubitState":
        """Return the same source with its two qubits exchanged."""
        return TwoQubitState(permute_qubits(self.rho, (1, 0)), label=self.label)

    def bloch(self) -> "BlochForm":
        return bloch_decompose(self)

    def spectrum(self) -> "CorrelationSpectrum":
        return correlation_spectrum(bloch_decompose(self))

    def __repr__(self):
        name = self.label or "state"
        return f"TwoQubitState({name})"


@dataclass(frozen=True, eq=False)
class BlochForm:
    """
    Local Bloch vectors and the 3x3 correlation matrix of a two-qubit state.

    Attributes:
        mA: Bloch vector of the first qubit's reduced state
        mB: Bloch vector of the second qubit's reduced state
        t: Correlation matrix, t[m, n] = Tr[rho sigma_m x sigma_n]
    """

    mA: RealMatrix
    mB: RealMatrix
    t: RealMatrix

    def __post_init__(self):
        mA = np.asarray(self.mA, dtype=np.float64)
        mB = np.asarray(self.mB, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64)
        if mA.shape != (3,) or mB.shape != (3,) or t.shape != (3, 3):
            raise DimensionError(
                f"Bloch form needs two 3-vectors and a 3x3 matrix, got {mA.shape}, {mB.shape}, {t.shape}"
            )
        if not (np.all(np.isfinite(mA)) and np.all(np.isfinite(mB)) and np.all(np.isfinite(t))):
            raise ValidationError("Bloch form contains non-finite entries")
        object.__setattr__(self, "mA", _readonly(mA))
        object.__setattr__(self, "mB", _readonly(mB))
        object.__setattr__(self, "t", _readonly(t))

    @classmethod
    def zero(cls) -> "BlochForm":
        return cls(np.zeros(3), np.zeros(3), np.zeros((3, 3)))


@dataclass(frozen=True)
class CorrelationSpectrum:
    """Descending eigenvalues (l1, l2, l3) of R = t^T t."""

    values: Tuple[float, float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != 3:
            raise DimensionError("correlation spectrum has exactly three eigenvalues")
        if not values[0] >= values[1] >= values[2] >= 0.0:
            raise ValidationError(f"spectrum must be descending and nonnegative, got {values}")
        object.__setattr__(self, "values", values)

    @property
    def top_two(self) -> Tuple[float, float]:
        return self.values[0], self.values[1]

    def __getitem__(self, index: int) -> float:
        return self.values[index]

    def to_list(self):
        return list(self.values)


def _real_trace(operator, rho, what: str) -> float:
    value = expectation(operator, rho)
    if abs(value.imag) > IMAG_TOL:
        raise ValidationError(f"{what} has imaginary part {value.imag:.3e}")
    return value.real


def bloch_decompose(state: TwoQubitState) -> BlochForm:
    """
    Pauli-trace decomposition of a two-qubit state.

    Args:
        state: Valid two-qubit state

    Returns:
        BlochForm with mA_i = Tr[rho sigma_i x 1], mB_j = Tr[rho 1 x sigma_j],
        t_ij = Tr[rho sigma_i x sigma_j]
    """
    rho = state.rho
    mA = [_real_trace(_PAULI_PAIRS[i + 1][0], rho, "local Bloch component") for i in range(3)]
    mB = [_real_trace(_PAULI_PAIRS[0][j + 1], rho, "local Bloch component") for j in range(3)]
    t = [
        [_real_trace(_PAULI_PAIRS[i + 1][j + 1], rho, "correlation entry") for j in range(3)]
        for i in range(3)
    ]
    return BlochForm(np.array(mA), np.array(mB), np.array(t))


def bloch_compose(form: BlochForm, label: Optional[str] = None) -> TwoQubitState:
    """
    Assemble the density matrix of a Bloch form.

    Raises:
        UnphysicalStateError: If the assembled matrix is not PSD
    """
    rho = np.array(_PAULI_PAIRS[0][0], dtype=np.complex128)
    for i in range(3):
        rho = rho + form.mA[i] * _PAULI_PAIRS[i + 1][0]
        rho = rho + form.mB[i] * _PAULI_PAIRS[0][i + 1]
        for j in range(3):
            rho = rho + form.t[i, j] * _PAULI_PAIRS[i + 1][j + 1]
    rho = 0.25 * rho

    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -PSD_TOL:
        raise UnphysicalStateError("unphysical Bloch form", min_eig)
    return TwoQubitState(rho, label=label)


def correlation_spectrum(form: BlochForm) -> CorrelationSpectrum:
    """Eigenvalues of R = t^T t, descending, clamped at zero."""
    t = np.asarray(form.t)
    r = t.T @ t
    return CorrelationSpectrum(eig_sym3(0.5 * (r + r.T), psd=True))


def rotate_state(state: TwoQubitState, rot_a, rot_b) -> TwoQubitState:
    """
    Apply proper rotations to both Bloch spheres of a state.

    The correlation matrix becomes rot_a . t . rot_b^T. Proper rotations
    are induced by local unitaries, so a physical input stays physical.
    """
    rot_a = _check_rotation(rot_a)
    rot_b = _check_rotation(rot_b)
    form = bloch_decompose(state)
    rotated = BlochForm(rot_a @ form.mA, rot_b @ form.mB, rot_a @ form.t @ rot_b.T)
    return bloch_compose(rotated, label=state.label)


def _check_rotation(rotation) -> RealMatrix:
    rotation = np.asarray(rotation, dtype=np.float64)
    if rotation.shape != (3, 3):
        raise DimensionError(f"rotation must be 3x3, got {rotation.shape}")
    if np.max(np.abs(rotation @ rotation.T - np.eye(3))) > 1e-9 or np.linalg.det(rotation) < 0:
        raise ValidationError("matrix is not a proper rotation")
    return rotation


def _axis_permutation(axis_order: Sequence[str]) -> RealMatrix:
    if sorted(axis_order) != ["x", "y", "z"]:
        raise ValidationError(f"axis order must be a permutation of x, y, z, got {axis_order}")
    perm = np.zeros((3, 3))
    for rank, axis in enumerate(axis_order):
        perm[AXIS_INDEX[axis], rank] = 1.0
    if np.linalg.det(perm) < 0:
        # keeps the map proper; only the smallest slot changes sign
        perm[:, 2] *= -1.0
    return perm


def _is_aligned(t: RealMatrix, order: Sequence[int], tol: float = 1e-12) -> bool:
    off_diagonal = t - np.diag(np.diag(t))
    if np.max(np.abs(off_diagonal)) > tol:
        return False
    d = [t[i, i] for i in order]
    return d[0] >= d[1] >= abs(d[2]) and d[1] >= 0.0


def align_state(state: TwoQubitState,
                axis_order: Sequence[str] = CANONICAL_AXIS_ORDER
                ) -> Tuple[TwoQubitState, RealMatrix, RealMatrix]:
    """
    Rotate both qubits so the correlation matrix becomes diagonal.

    The diagonal holds the singular values of t, descending along
    axis_order (default z, x, y). When det t < 0 the smallest slot carries
    the negative sign, since proper rotations preserve det t.

    Args:
        state: Valid two-qubit state
        axis_order: Axes receiving the largest, middle and smallest values

    Returns:
        Tuple (aligned_state, rot_a, rot_b) with t_aligned = rot_a . t . rot_b^T
    """
    form = bloch_decompose(state)
    t = np.asarray(form.t)
    order = [AXIS_INDEX[a] for a in axis_order]
    perm = _axis_permutation(axis_order)

    if _is_aligned(t, order):
        return state, np.eye(3), np.eye(3)

    u, singular, vt = np.linalg.svd(t)
    v = vt.T
    sign_u = 1.0 if np.linalg.det(u) > 0 else -1.0
    sign_v = 1.0 if np.linalg.det(v) > 0 else -1.0
    u = u @ np.diag([1.0, 1.0, sign_u])
    v = v @ np.diag([1.0, 1.0, sign_v])

    rot_a = perm @ u.T
    rot_b = perm @ v.T
    aligned = rotate_state(state, rot_a, rot_b)
    logger.debug("Aligned %r: singular values %s", state, singular)
    return aligned, rot_a, rot_b


def random_state(rng: np.random.Generator, rank: int = 4) -> TwoQubitState:
    """
    Random density matrix from the Ginibre ensemble.

    Args:
        rng: Seeded numpy generator
        rank: Rank of the generated state, 1..4
    """
    if not 1 <= rank <= 4:
        raise ValidationError(f"rank must be in 1..4, got {rank}")
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return TwoQubitState(0.5 * (rho + rho.conj().T), label=f"random(rank={rank})")


def random_local_unitary(rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random U_A x U_B acting on one source."""
    u_a = unitary_group.rvs(2, random_state=rng)
    u_b = unitary_group.rvs(2, random_state=rng)
    return kron(u_a, u_b)


def random_rotation(rng: np.random.Generator) -> RealMatrix:
    """Haar-random proper 3x3 rotation."""
    return special_ortho_group.rvs(3, random_state=rng)


def apply_local_unitary(state: TwoQubitState, unitary) -> TwoQubitState:
    """Return u rho u^dagger."""
    u = as_square(unitary, "unitary")
    if u.shape != (4, 4):
        raise DimensionError(f"local unitary must be 4x4, got {u.shape}")
    rho = u @ state.rho @ u.conj().T
    return TwoQubitState(0.5 * (rho + rho.conj().T), label=state.label)
