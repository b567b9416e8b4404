"""
Network topology descriptors.

A chain of n sources links parties A_1..A_{n+1}; source k feeds A_k (first
qubit) and A_{k+1} (second qubit). A star of n sources links Alice_i
(first qubit of source i) to the central node Bob (second qubit).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

from src.network.bell_basis import SUPPORTED_BJ_SIZES, star_axis_order
from src.states.two_qubit import CANONICAL_AXIS_ORDER, TwoQubitState, align_state
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)


class Topology(Enum):
    CHAIN = "chain"
    STAR = "star"


def _check_sources(sources: Sequence[TwoQubitState], kind: str) -> Tuple[TwoQubitState, ...]:
    sources = tuple(sources)
    if len(sources) < 2:
        raise ValidationError(f"a {kind} network needs at least 2 sources, got {len(sources)}")
    for index, source in enumerate(sources):
        if not isinstance(source, TwoQubitState):
            raise ValidationError(f"{kind} source {index} is not a TwoQubitState")
    return sources


@dataclass(frozen=True)
class ChainNetwork:
    """Ordered sources of a linear chain."""

    sources: Tuple[TwoQubitState, ...]

    topology = Topology.CHAIN

    def __post_init__(self):
        object.__setattr__(self, "sources", _check_sources(self.sources, "chain"))

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def qubits(self) -> int:
        return 2 * self.n

    def aligned(self) -> "ChainNetwork":
        """Chain with every source rotated to its aligned (diagonal-t) form."""
        return ChainNetwork(tuple(align_state(s)[0] for s in self.sources))

    def party_qubits(self, party: int) -> Tuple[int, ...]:
        """
        Qubits held by party A_party (1-based) in source-major order.

        A_1 holds qubit 0, A_{n+1} holds qubit 2n-1 and middle party i
        holds (2i-3, 2i-2).
        """
        if not 1 <= party <= self.n + 1:
            raise ValidationError(f"chain with {self.n} sources has parties 1..{self.n + 1}")
        if party == 1:
            return (0,)
        if party == self.n + 1:
            return (2 * self.n - 1,)
        return (2 * party - 3, 2 * party - 2)


@dataclass(frozen=True)
class StarNetwork:
    """Sources of a star; Bob holds the second qubit of every source."""

    sources: Tuple[TwoQubitState, ...]

    topology = Topology.STAR

    def __post_init__(self):
        object.__setattr__(self, "sources", _check_sources(self.sources, "star"))

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def qubits(self) -> int:
        return 2 * self.n

    def aligned(self, axis_order: Optional[Sequence[str]] = None) -> "StarNetwork":
        """
        Star with every source rotated to diagonal-t form.

        By default the two largest singular values go on the axes the
        central observables measure (star_axis_order); sizes without a b^j
        table use the chain order z, x, y.
        """
        if axis_order is None:
            axis_order = star_axis_order(self.n) if self.n in SUPPORTED_BJ_SIZES else CANONICAL_AXIS_ORDER
        return StarNetwork(tuple(align_state(s, axis_order)[0] for s in self.sources))

    @classmethod
    def from_chain(cls, chain: ChainNetwork) -> "StarNetwork":
        """
        Two-source star equivalent to a bilocal chain.

        The chain's second source has the middle party on its first qubit,
        so it is reversed to put Bob on the second qubit.
        """
        if chain.n != 2:
            raise ValidationError(f"only a 2-source chain maps onto a star, got n={chain.n}")
        return cls((chain.sources[0], chain.sources[1].swap_parties()))
