"""
Closed-form maxima of n-local inequalities.

All results are functions of the per-source correlation spectra
(eigenvalues of t^T t), which are invariant under local unitaries:

    CHSH            2 sqrt(l1 + l2)
    chain (n-local) sqrt(sqrt(prod l1) + sqrt(prod l2))            bound 1
    star            2^(n-2) sqrt((prod l1)^(1/n) + (prod l2)^(1/n)) bound 2^(n-2)

The chain uses the normalized inequality (1/4 prefactor in I and J, bound
1). For two sources a paper-scale view (x2, bound 2) is available.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, NamedTuple, Sequence, Tuple, Union

import numpy as np

from src.network.settings import ChainSettings
from src.network.topology import ChainNetwork, StarNetwork, Topology
from src.states.two_qubit import CorrelationSpectrum, TwoQubitState, bloch_decompose
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)

VIOLATION_SLACK = 1e-12
CHSH_CLASSICAL_BOUND = 2.0
CAUCHY_SCHWARZ_TOL = 1e-9


class Convention(Enum):
    """Normalization of the chain inequality."""
    NORMALIZED = "normalized"
    PAPER_SCALE = "paper_scale"


@dataclass(frozen=True)
class ViolationReport:
    """Closed-form verdict for one network."""

    topology: Topology
    n: int
    classical_bound: float
    closed_form_max: float
    per_source_spectra: Tuple[CorrelationSpectrum, ...]
    convention: Convention = Convention.NORMALIZED
    chsh_nonlocal_sources: int = 0
    violation: bool = field(init=False)

    def __post_init__(self):
        if self.closed_form_max < 0:
            raise ValidationError(f"closed-form maximum must be >= 0, got {self.closed_form_max}")
        object.__setattr__(self, "violation",
                           self.closed_form_max > self.classical_bound + VIOLATION_SLACK)

    @property
    def margin(self) -> float:
        return self.closed_form_max - self.classical_bound

    def to_dict(self) -> Dict:
        return {
            "topology": self.topology.value,
            "n": self.n,
            "convention": self.convention.value,
            "classical_bound": self.classical_bound,
            "closed_form_max": self.closed_form_max,
            "violation": self.violation,
            "chsh_nonlocal_sources": self.chsh_nonlocal_sources,
            "spectra": [s.to_list() for s in self.per_source_spectra],
        }


class CauchySchwarzResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def _spectra(states: Sequence[TwoQubitState]) -> Tuple[CorrelationSpectrum, ...]:
    return tuple(s.spectrum() for s in states)


def _chsh_from_spectrum(spectrum: CorrelationSpectrum) -> float:
    return 2.0 * math.sqrt(spectrum[0] + spectrum[1])


def chsh_max(state: TwoQubitState) -> float:
    """Maximal CHSH value 2 sqrt(l1 + l2) of a two-qubit state."""
    return _chsh_from_spectrum(state.spectrum())


def chsh_violation(state: TwoQubitState) -> bool:
    return chsh_max(state) > CHSH_CLASSICAL_BOUND + VIOLATION_SLACK


def _count_chsh_nonlocal(spectra: Sequence[CorrelationSpectrum]) -> int:
    return sum(1 for s in spectra if _chsh_from_spectrum(s) > CHSH_CLASSICAL_BOUND + VIOLATION_SLACK)


def _chain_value(spectra: Sequence[CorrelationSpectrum]) -> float:
    top = math.prod(s[0] for s in spectra)
    second = math.prod(s[1] for s in spectra)
    return math.sqrt(math.sqrt(top) + math.sqrt(second))


def chain_max(net: ChainNetwork, convention: Convention = Convention.NORMALIZED) -> ViolationReport:
    """
    Closed-form maximum of the chain n-local inequality.

    Args:
        net: Chain with n >= 2 sources
        convention: NORMALIZED (bound 1) or PAPER_SCALE (n=2 only, bound 2)

    Returns:
        ViolationReport for the chain
    """
    convention = Convention(convention)
    spectra = _spectra(net.sources)
    value = _chain_value(spectra)
    bound = 1.0
    if convention is Convention.PAPER_SCALE:
        if net.n != 2:
            raise ValidationError("paper_scale convention is only defined for two-source chains")
        value *= 2.0
        bound = 2.0
    return ViolationReport(Topology.CHAIN, net.n, bound, value, spectra, convention,
                           _count_chsh_nonlocal(spectra))


def chain_violation_margin(net: ChainNetwork) -> float:
    """sqrt(prod l1) + sqrt(prod l2) - 1; positive exactly when the chain violates."""
    spectra = _spectra(net.sources)
    return (math.sqrt(math.prod(s[0] for s in spectra))
            + math.sqrt(math.prod(s[1] for s in spectra)) - 1.0)


def biloc_bell_generic(state: TwoQubitState) -> float:
    """
    Bilocal maximum for a Bell pair on one side and `state` on the other.

    Returns sqrt(sqrt(g1) + sqrt(g2)) in the normalized convention; it
    dominates the normalized CHSH proxy sqrt(g1 + g2).
    """
    g1, g2, _ = state.spectrum().values
    value = math.sqrt(math.sqrt(g1) + math.sqrt(g2))
    proxy = math.sqrt(g1 + g2)
    if value < proxy - CAUCHY_SCHWARZ_TOL:
        raise ValidationError(f"bilocal value {value} fell below CHSH proxy {proxy}")
    return value


def chain_ij_factorized(net: ChainNetwork, settings: ChainSettings) -> Tuple[float, float]:
    """
    I and J of a chain from per-source correlation matrices.

    I = 1/4 (a + a').t1[:, z] x prod t_k[z, z] x t_n[z, :].(c + c')
    J = 1/4 (a - a').t1[:, x] x prod t_k[x, x] x t_n[x, :].(c - c')
    """
    matrices = [bloch_decompose(s).t for s in net.sources]
    return chain_ij_from_correlations(
        matrices,
        settings.a0.axis + settings.a1.axis, settings.a0.axis - settings.a1.axis,
        settings.c0.axis + settings.c1.axis, settings.c0.axis - settings.c1.axis,
    )


def chain_ij_from_correlations(matrices: Sequence[np.ndarray],
                               a_sum: np.ndarray, a_diff: np.ndarray,
                               c_sum: np.ndarray, c_diff: np.ndarray) -> Tuple[float, float]:
    """chain_ij_factorized on precomputed correlation matrices and setting sums/differences."""
    z, x = 2, 0
    i_value = 0.25 * float(a_sum @ matrices[0][:, z]) * float(matrices[-1][z, :] @ c_sum)
    j_value = 0.25 * float(a_diff @ matrices[0][:, x]) * float(matrices[-1][x, :] @ c_diff)
    for t in matrices[1:-1]:
        i_value *= t[z, z]
        j_value *= t[x, x]
    return i_value, j_value


def chain_value(i_value: float, j_value: float) -> float:
    """sqrt|I| + sqrt|J|"""
    return math.sqrt(abs(i_value)) + math.sqrt(abs(j_value))


def star_max(net: StarNetwork) -> ViolationReport:
    """
    Closed-form maximum of the star n-local inequality.

    S = 2^(n-2) sqrt((prod l1)^(1/n) + (prod l2)^(1/n)), bound 2^(n-2).
    """
    spectra = _spectra(net.sources)
    n = net.n
    top = math.prod(s[0] for s in spectra) ** (1.0 / n)
    second = math.prod(s[1] for s in spectra) ** (1.0 / n)
    scale = 2.0 ** (n - 2)
    return ViolationReport(Topology.STAR, n, scale, scale * math.sqrt(top + second), spectra,
                           Convention.NORMALIZED, _count_chsh_nonlocal(spectra))


def star_violation_margin(net: StarNetwork) -> float:
    return star_max(net).margin


def cauchy_schwarz_check(a: TwoQubitState, b: TwoQubitState) -> CauchySchwarzResult:
    """
    Bilocal maximum against the geometric mean of the CHSH maxima.

    lhs = 2 sqrt(sqrt(L1 G1) + sqrt(L2 G2)), rhs = sqrt(chsh(a) chsh(b)).
    """
    sa, sb = a.spectrum(), b.spectrum()
    lhs = 2.0 * math.sqrt(math.sqrt(sa[0] * sb[0]) + math.sqrt(sa[1] * sb[1]))
    rhs = math.sqrt(_chsh_from_spectrum(sa) * _chsh_from_spectrum(sb))
    return CauchySchwarzResult(lhs, rhs, lhs <= rhs + CAUCHY_SCHWARZ_TOL)


def cauchy_schwarz_chain(net: ChainNetwork) -> CauchySchwarzResult:
    """
    n-source form: S^2 <= prod_i chsh(rho_i) / 2 with S the normalized chain maximum.
    """
    spectra = _spectra(net.sources)
    lhs = _chain_value(spectra) ** 2
    rhs = math.prod(_chsh_from_spectrum(s) / 2.0 for s in spectra)
    return CauchySchwarzResult(lhs, rhs, lhs <= rhs + CAUCHY_SCHWARZ_TOL)


def closed_form_report(net: Union[ChainNetwork, StarNetwork],
                       convention: Convention = Convention.NORMALIZED) -> ViolationReport:
    """Dispatch to chain_max or star_max."""
    if isinstance(net, ChainNetwork):
        return chain_max(net, convention)
    if Convention(convention) is not Convention.NORMALIZED:
        raise ValidationError("star networks only support the normalized convention")
    return star_max(net)
