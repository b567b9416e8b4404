"""
Generalized Bell basis and the star-network combinatorial tables.

The central node of a star network measures in the basis
|psi_r> = Z^{r1} x X^{r2} x ... x X^{rn} |GHZ_n> and coarse-grains the
2^n outcomes into dichotomic observables B^j = M_0^j - M_1^j through the
output-bit functions b^j. The end parties' inputs enter through the
even-parity functions g_j.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence, Tuple

import numpy as np

from src.linalg.matkernel import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, ComplexMatrix, kron_all
from src.utils.errors import UnsupportedSizeError, ValidationError

logger = logging.getLogger(__name__)

GHZ_MAX_PARTIES = 10
BASIS_MAX_PARTIES = 6
TABLE_MAX_PARTIES = 10
SUPPORTED_BJ_SIZES = (2, 3, 4)
PAULI_SUPPORT_TOL = 1e-12
_PAULI_LABELS = {"i": IDENTITY2, "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def _check_range(n: int, low: int, high: int, what: str) -> int:
    if not isinstance(n, (int, np.integer)) or not low <= n <= high:
        raise UnsupportedSizeError(f"{what} needs {low} <= n <= {high}, got {n}")
    return int(n)


def bit_strings(n: int) -> Tuple[Tuple[int, ...], ...]:
    """All n-bit strings r1...rn in index order (r1 most significant)."""
    return tuple(product((0, 1), repeat=n))


def ghz(n: int) -> np.ndarray:
    """(|0...0> + |1...1>) / sqrt(2) on n qubits."""
    n = _check_range(n, 2, GHZ_MAX_PARTIES, "GHZ state")
    vector = np.zeros(2 ** n, dtype=np.complex128)
    vector[0] = vector[-1] = 1.0 / np.sqrt(2.0)
    return vector


@dataclass(frozen=True, eq=False)
class GeneralizedBellBasis:
    """
    The 2^n generalized Bell vectors on n qubits.

    Attributes:
        n: Number of qubits
        vectors: 2^n x 2^n array; row index is the bit string r1...rn read
            as a binary number with r1 most significant
    """

    n: int
    vectors: np.ndarray

    def vector(self, bits: Sequence[int]) -> np.ndarray:
        index = int("".join(str(int(b)) for b in bits), 2)
        return self.vectors[index]

    def projector(self, index: int) -> ComplexMatrix:
        v = self.vectors[index]
        return np.outer(v, v.conj())

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T

    def completeness(self) -> np.ndarray:
        return self.vectors.T @ self.vectors.conj()


@lru_cache(maxsize=None)
def bell_basis(n: int) -> GeneralizedBellBasis:
    """
    Build the generalized Bell basis Z^{r1} x X^{r2} x ... x X^{rn} |GHZ_n>.

    Args:
        n: Number of qubits, 2..6

    Returns:
        GeneralizedBellBasis with orthonormal, complete rows
    """
    n = _check_range(n, 2, BASIS_MAX_PARTIES, "generalized Bell basis")
    state = ghz(n)
    rows = []
    for bits in bit_strings(n):
        factors = [PAULI_Z if bits[0] else IDENTITY2]
        factors += [PAULI_X if b else IDENTITY2 for b in bits[1:]]
        rows.append(kron_all(*factors) @ state)
    vectors = np.array(rows)
    vectors.setflags(write=False)
    return GeneralizedBellBasis(n, vectors)


@lru_cache(maxsize=None)
def gj_table(n: int) -> Tuple[Tuple[int, ...], ...]:
    """
    Even-cardinality subsets of {1..n}, ordered by size then lexicographically.

    Subset j defines g_j(x) = sum of x_i over the subset; there are 2^(n-1).
    """
    n = _check_range(n, 2, TABLE_MAX_PARTIES, "g_j table")
    subsets = []
    for size in range(0, n + 1, 2):
        subsets.extend(combinations(range(1, n + 1), size))
    return tuple(subsets)


def gj_value(subset: Sequence[int], inputs: Sequence[int]) -> int:
    """g_j(x1..xn) for the subset defining g_j."""
    return sum(int(inputs[i - 1]) for i in subset)


@dataclass(frozen=True)
class ParityDichotomy:
    """
    Output-bit function b(r) = r_{p1} xor ... xor r_{pk} xor flip.

    Positions are 1-based indices into the bit string r1...rn.
    """

    positions: Tuple[int, ...]
    flip: int = 0

    def __call__(self, bits: Sequence[int]) -> int:
        value = self.flip
        for p in self.positions:
            value ^= int(bits[p - 1])
        return value & 1

    def truth_table(self, n: int) -> Tuple[int, ...]:
        return tuple(self(bits) for bits in bit_strings(n))

    def describe(self) -> str:
        terms = [f"r{p}" for p in self.positions]
        if self.flip:
            terms.append("1")
        return " xor ".join(terms) if terms else "0"


_BJ_TABLES = {
    # B^1 = sigma_z x sigma_z, B^2 = sigma_x x sigma_x under the basis indexing
    2: (ParityDichotomy((2,)), ParityDichotomy((1,))),
    3: (
        ParityDichotomy((1,)),
        ParityDichotomy((1, 2), 1),
        ParityDichotomy((1, 3), 1),
        ParityDichotomy((1, 2, 3), 1),
    ),
    4: (
        ParityDichotomy((1,)),
        ParityDichotomy((2, 3), 1),
        ParityDichotomy((2, 4), 1),
        ParityDichotomy((3, 4), 1),
        ParityDichotomy((2,), 1),
        ParityDichotomy((3,), 1),
        ParityDichotomy((4,), 1),
        ParityDichotomy((2, 3, 4)),
    ),
}


def bj_table(n: int) -> Tuple[ParityDichotomy, ...]:
    """
    Output-bit functions b^1..b^(2^(n-1)) for the central measurement.

    Raises:
        UnsupportedSizeError: For n outside {2, 3, 4}
    """
    if n not in _BJ_TABLES:
        raise UnsupportedSizeError(
            f"no b^j table for n={n} (supported: {SUPPORTED_BJ_SIZES}); "
            "unsupported, use dichotomy search (oracle.dichotomy_search)"
        )
    return _BJ_TABLES[n]


def observable_from_signs(n: int, signs: Sequence[float]) -> ComplexMatrix:
    """sum_r signs[r] |psi_r><psi_r| over the generalized Bell basis."""
    basis = bell_basis(n)
    signs = np.asarray(signs, dtype=np.float64)
    if signs.shape != (2 ** n,):
        raise ValidationError(f"need {2 ** n} signs, got {signs.shape}")
    return (basis.vectors.T * signs) @ basis.vectors.conj()


@lru_cache(maxsize=None)
def bob_observable(n: int, j: int) -> ComplexMatrix:
    """
    B^j = M_0^j - M_1^j for the central node of an n-star.

    Args:
        n: Number of sources (2, 3 or 4)
        j: 1-based index, 1 <= j <= 2^(n-1)

    Returns:
        Hermitian involution of dimension 2^n
    """
    table = bj_table(n)
    if not 1 <= j <= len(table):
        raise ValidationError(f"j must be in 1..{len(table)} for n={n}, got {j}")
    dichotomy = table[j - 1]
    signs = [1.0 - 2.0 * dichotomy(bits) for bits in bit_strings(n)]
    observable = observable_from_signs(n, signs)
    observable.setflags(write=False)
    return observable


def pauli_support(observable: ComplexMatrix, n: int) -> Tuple[str, ...]:
    """Pauli strings (e.g. "xyy", "iiz") with a nonzero coefficient in the observable."""
    strings = []
    for labels in product("ixyz", repeat=n):
        coefficient = np.trace(kron_all(*(_PAULI_LABELS[a] for a in labels)) @ observable) / 2 ** n
        if abs(coefficient) > PAULI_SUPPORT_TOL:
            strings.append("".join(labels))
    return tuple(strings)


@lru_cache(maxsize=None)
def star_axis_order(n: int) -> Tuple[str, str, str]:
    """
    Alignment axis order for the sources of an n-star.

    Axes are ranked by how often they occur in the Pauli expansion of
    B^1..B^(2^(n-1)); ties keep the order z, x, y. n=2 gives (z, x, y)
    and n=3 gives (x, y, z).
    """
    table = bj_table(n)
    counts = {"x": 0, "y": 0, "z": 0}
    for j in range(1, len(table) + 1):
        for string in pauli_support(bob_observable(n, j), n):
            for label in string.replace("i", ""):
                counts[label] += 1
    order = tuple(sorted(("z", "x", "y"), key=lambda axis: -counts[axis]))
    logger.debug("star axis order n=%d: %s (counts %s)", n, order, counts)
    return order
