"""
Brute-force oracle for the closed-form maxima.

The oracle assembles full network density matrices, evaluates I, J and
I_j as exact traces and maximizes the inequality values over the end
parties' settings with the multi-start search in optimizer. Fast paths
(factorized chain correlators, Bob-reduced star operators) drive the
search; every optimum is confirmed against the literal full trace.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.closed_form import (
    chain_ij_factorized, chain_ij_from_correlations, chain_max, chain_value, chsh_max, star_max,
)
from src.analysis.optimizer import TWO_PI, OptimizerConfig, OptResult, multistart
from src.linalg.matkernel import ComplexMatrix, expectation, kron_all, permute_qubits, spin_operator
from src.network.bell_basis import (
    ParityDichotomy, bell_basis, bit_strings, bj_table, bob_observable, gj_table, gj_value,
)
from src.network.settings import (
    MIDDLE_I_OBSERVABLE, MIDDLE_J_OBSERVABLE, ChainSettings, ChshSettings, DichotomicSetting,
    StarSettings, sphere_point,
)
from src.network.topology import ChainNetwork, StarNetwork
from src.states.state_factory import make_state
from src.states.two_qubit import TwoQubitState, bloch_decompose, random_state
from src.utils.errors import ConsistencyError, ResourceLimitError, UnsupportedSizeError, ValidationError

logger = logging.getLogger(__name__)

ORACLE_MAX_SOURCES = 5
FULL_AGREEMENT_TOL = 1e-10
DICHOTOMY_TOL = 1e-9
# accepted oracle window around a closed form: [closed - DEFICIT, closed + EXCESS]
ORACLE_DEFICIT_TOL = 1e-4
ORACLE_EXCESS_TOL = 1e-6
EXHAUSTIVE_DICHOTOMY_MAX = 3


def _check_cap(n: int, kind: str) -> None:
    if n > ORACLE_MAX_SOURCES:
        raise ResourceLimitError(
            f"{kind} oracle with {n} sources needs a {2 ** (2 * n)}-dimensional density matrix",
            ORACLE_MAX_SOURCES,
        )


def _real(value: complex) -> float:
    return float(np.real(value))


# --- chain -----------------------------------------------------------------

def assemble_chain(net: ChainNetwork) -> ComplexMatrix:
    """
    Joint density matrix of a chain in source-major qubit order.

    A_1 owns qubit 0, middle party i owns (2i-3, 2i-2) and A_{n+1} owns
    qubit 2n-1.

    Raises:
        ResourceLimitError: For more than ORACLE_MAX_SOURCES sources
    """
    _check_cap(net.n, "chain")
    return kron_all(*(s.rho for s in net.sources))


def chain_observables(n: int, settings: ChainSettings) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Full-network operators whose expectations are 4I and 4J."""
    a0, a1 = settings.a0.axis, settings.a1.axis
    c0, c1 = settings.c0.axis, settings.c1.axis
    i_op = kron_all(spin_operator(a0 + a1), *([MIDDLE_I_OBSERVABLE] * (n - 1)), spin_operator(c0 + c1))
    j_op = kron_all(spin_operator(a0 - a1), *([MIDDLE_J_OBSERVABLE] * (n - 1)), spin_operator(c0 - c1))
    return i_op, j_op


def chain_ij_full(net: ChainNetwork, settings: ChainSettings,
                  rho: Optional[ComplexMatrix] = None) -> Tuple[float, float]:
    """
    I and J by exact traces against the assembled chain.

    Args:
        net: Chain with at most ORACLE_MAX_SOURCES sources
        settings: End-party settings
        rho: Pre-assembled chain density, if already available

    Returns:
        (I, J)
    """
    if rho is None:
        rho = assemble_chain(net)
    i_op, j_op = chain_observables(net.n, settings)
    return 0.25 * _real(expectation(i_op, rho)), 0.25 * _real(expectation(j_op, rho))


def chain_objective(net: ChainNetwork) -> Callable[[np.ndarray], float]:
    """
    sqrt|I| + sqrt|J| as a function of the 8 end-party angles.

    Settings are (a, a', c, c'), each a (polar, azimuth) pair.
    """
    matrices = [np.asarray(bloch_decompose(s).t) for s in net.sources]

    def objective(x: np.ndarray) -> float:
        a0, a1, c0, c1 = (sphere_point(x[2 * k], x[2 * k + 1]) for k in range(4))
        i_value, j_value = chain_ij_from_correlations(matrices, a0 + a1, a0 - a1, c0 + c1, c0 - c1)
        return chain_value(i_value, j_value)
    return objective


def optimize_chain(net: ChainNetwork, cfg: Optional[OptimizerConfig] = None) -> OptResult:
    """
    Maximize sqrt|I| + sqrt|J| over the four end-party settings.

    Each setting is a full-sphere direction (two angles). The search runs
    on the factorized correlators; the optimum is re-evaluated with
    chain_ij_full.

    Raises:
        ResourceLimitError: Above the oracle cap
        ConsistencyError: If the fast path and the full trace disagree
    """
    cfg = cfg or OptimizerConfig()
    _check_cap(net.n, "chain")
    outcome = multistart(chain_objective(net), [TWO_PI] * 8, cfg, label=f"chain n={net.n}")

    settings = ChainSettings.from_angles(outcome.x)
    fast = chain_ij_factorized(net, settings)
    full = chain_ij_full(net, settings)
    _confirm(fast, full, "chain I/J")
    return OptResult(chain_value(*full), settings, outcome.iterations, outcome.converged,
                     components=tuple(full), angles=tuple(float(a) for a in outcome.x))


def _confirm(fast: Sequence[float], full: Sequence[float], what: str) -> None:
    gap = max(abs(f - g) for f, g in zip(fast, full))
    if gap > FULL_AGREEMENT_TOL:
        logger.error("%s: fast path and full trace differ by %.3e", what, gap)
        raise ConsistencyError(f"{what}: fast path and full trace differ by {gap:.3e}")


# --- star ------------------------------------------------------------------

def star_order(n: int) -> Tuple[int, ...]:
    """Qubit permutation from source-major order to (Alice_1..n, Bob_1..n)."""
    return tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))


def assemble_star(net: StarNetwork) -> ComplexMatrix:
    """
    Joint density matrix of a star, qubits ordered (Alice_1..Alice_n, Bob_1..Bob_n).

    Raises:
        ResourceLimitError: For more than ORACLE_MAX_SOURCES sources
    """
    _check_cap(net.n, "star")
    return permute_qubits(kron_all(*(s.rho for s in net.sources)), star_order(net.n))


def _check_star_settings(net: StarNetwork, settings: StarSettings) -> None:
    if settings.n != net.n:
        raise ValidationError(f"settings for {settings.n} parties applied to a star of {net.n} sources")


def star_ij_full(net: StarNetwork, settings: StarSettings, j: int,
                 rho: Optional[ComplexMatrix] = None) -> float:
    """
    I_j = 2^-n sum_x (-1)^g_j(x) Tr[(A_x1 x ... x A_xn) x B^j rho_star].

    The sum runs literally over all 2^n input strings.
    """
    _check_star_settings(net, settings)
    n = net.n
    bob = bob_observable(n, j)
    subset = gj_table(n)[j - 1]
    if rho is None:
        rho = assemble_star(net)
    observables = [settings.observables(i) for i in range(n)]
    total = 0.0
    for inputs in bit_strings(n):
        sign = -1.0 if gj_value(subset, inputs) % 2 else 1.0
        operator = kron_all(*(observables[i][x] for i, x in enumerate(inputs)), bob)
        total += sign * _real(expectation(operator, rho))
    return total / 2 ** n


def bob_reduced(rho_star: ComplexMatrix, n: int, bob_operator: ComplexMatrix) -> ComplexMatrix:
    """Tr_Bob[(1 x B) rho_star], an operator on the n Alice qubits."""
    dim = 2 ** n
    blocks = np.asarray(rho_star).reshape(dim, dim, dim, dim)
    return np.einsum("bc,acdb->ad", bob_operator, blocks)


def _alice_operator(sums: Sequence[ComplexMatrix], diffs: Sequence[ComplexMatrix],
                    subset: Sequence[int]) -> ComplexMatrix:
    members = set(subset)
    return kron_all(*(diffs[i] if i + 1 in members else sums[i] for i in range(len(sums))))


def _star_components(reduced: Sequence[ComplexMatrix], subsets: Sequence[Sequence[int]],
                     settings: StarSettings) -> Tuple[float, ...]:
    n = settings.n
    pairs = [settings.sum_difference(i) for i in range(n)]
    sums = [p[0] for p in pairs]
    diffs = [p[1] for p in pairs]
    return tuple(_real(expectation(_alice_operator(sums, diffs, subset), sigma)) / 2 ** n
                 for sigma, subset in zip(reduced, subsets))


def star_value(components: Sequence[float], n: int) -> float:
    """sum_j |I_j|^(1/n)"""
    return float(sum(abs(c) ** (1.0 / n) for c in components))


def _star_settings_from_angles(x: np.ndarray, n: int) -> StarSettings:
    return StarSettings.from_frame(x[:n], x[n], x[n + 1], x[n + 2])


def _star_reduced(n: int, rho: ComplexMatrix):
    subsets = gj_table(n)
    reduced = [bob_reduced(rho, n, bob_observable(n, j)) for j in range(1, len(subsets) + 1)]
    return reduced, subsets


def star_objective(net: StarNetwork, rho: Optional[ComplexMatrix] = None) -> Callable[[np.ndarray], float]:
    """
    sum_j |I_j|^(1/n) as a function of the n + 3 angles.

    The angles are alpha_1..alpha_n followed by the three Euler angles of
    the shared (n, n') frame.

    Raises:
        UnsupportedSizeError: When no b^j table exists for n
    """
    n = net.n
    bj_table(n)
    reduced, subsets = _star_reduced(n, assemble_star(net) if rho is None else rho)

    def objective(x: np.ndarray) -> float:
        return star_value(_star_components(reduced, subsets, _star_settings_from_angles(x, n)), n)
    return objective


def optimize_star(net: StarNetwork, cfg: Optional[OptimizerConfig] = None) -> OptResult:
    """
    Maximize sum_j |I_j|^(1/n) over the angles alpha_i and the frame (n, n').

    Args:
        net: Star with 2, 3 or 4 sources
        cfg: Search configuration

    Returns:
        OptResult carrying StarSettings and the I_j at the optimum

    Raises:
        UnsupportedSizeError: When no b^j table exists for n
        ConsistencyError: If the fast path and the 2^n-term sum disagree
    """
    cfg = cfg or OptimizerConfig()
    n = net.n
    bj_table(n)
    rho = assemble_star(net)
    outcome = multistart(star_objective(net, rho), [TWO_PI] * (n + 3), cfg, label=f"star n={n}")
    settings = _star_settings_from_angles(outcome.x, n)
    reduced, subsets = _star_reduced(n, rho)
    fast = _star_components(reduced, subsets, settings)
    full = tuple(star_ij_full(net, settings, j, rho) for j in range(1, len(subsets) + 1))
    _confirm(fast, full, "star I_j")
    return OptResult(star_value(full, n), settings, outcome.iterations, outcome.converged,
                     components=full, angles=tuple(float(a) for a in outcome.x))


# --- CHSH ------------------------------------------------------------------

def _unit_or_default(vector: np.ndarray) -> DichotomicSetting:
    norm = float(np.linalg.norm(vector))
    if norm < 1e-15:
        return DichotomicSetting(np.array([0.0, 0.0, 1.0]))
    return DichotomicSetting(vector / norm)


def optimize_chsh(state: TwoQubitState, cfg: Optional[OptimizerConfig] = None) -> OptResult:
    """
    Brute-force CHSH maximum of one source.

    Bob's b, b' are searched over the sphere; for fixed b, b' the best
    Alice settings point along t(b + b') and t(b - b'), giving
    S = |t(b + b')| + |t(b - b')|.
    """
    cfg = cfg or OptimizerConfig()
    t = np.asarray(bloch_decompose(state).t)

    def objective(x: np.ndarray) -> float:
        b0 = sphere_point(x[0], x[1])
        b1 = sphere_point(x[2], x[3])
        return float(np.linalg.norm(t @ (b0 + b1)) + np.linalg.norm(t @ (b0 - b1)))

    outcome = multistart(objective, [TWO_PI] * 4, cfg, label="chsh")
    b0 = sphere_point(outcome.x[0], outcome.x[1])
    b1 = sphere_point(outcome.x[2], outcome.x[3])
    settings = ChshSettings(_unit_or_default(t @ (b0 + b1)), _unit_or_default(t @ (b0 - b1)),
                            DichotomicSetting(b0), DichotomicSetting(b1))
    return OptResult(outcome.value, settings, outcome.iterations, outcome.converged,
                     components=(outcome.value,), angles=tuple(float(a) for a in outcome.x))


# --- dichotomy search ------------------------------------------------------

@dataclass(frozen=True)
class DichotomyResult:
    """
    Best output-bit assignment found for one B^j.

    Bits are indexed like bit_strings(n): entry r is b(r) for basis vector r.
    """

    j: int
    best_bits: Tuple[int, ...]
    best_value: float
    table_bits: Tuple[int, ...]
    table_value: float
    candidates: int

    @property
    def table_optimal(self) -> bool:
        return self.table_value >= self.best_value - DICHOTOMY_TOL


def r1_augmented(dichotomy: ParityDichotomy) -> ParityDichotomy:
    """The dichotomy with r1 xor-ed in, unless it already reads r1."""
    if 1 in dichotomy.positions:
        return dichotomy
    return ParityDichotomy((1,) + tuple(dichotomy.positions), dichotomy.flip)


def _dichotomy_candidates(n: int, dichotomy: ParityDichotomy, balanced_only: bool):
    size = 2 ** n
    if n <= EXHAUSTIVE_DICHOTOMY_MAX:
        for bits in product((0, 1), repeat=size):
            if not balanced_only or sum(bits) == size // 2:
                yield bits
        return
    table_bits = dichotomy.truth_table(n)
    augmented = r1_augmented(dichotomy).truth_table(n)
    yield table_bits
    yield tuple(1 - b for b in table_bits)
    yield augmented
    yield tuple(1 - b for b in augmented)
    for r in range(size):
        flipped = list(table_bits)
        flipped[r] ^= 1
        yield tuple(flipped)


def dichotomy_search(net: StarNetwork, settings: StarSettings, j: int,
                     balanced_only: bool = False) -> DichotomyResult:
    """
    Search output-bit functions for the one maximizing |I_j| at fixed settings.

    For n <= 3 every assignment of 2^n bits is tried (optionally only
    balanced ones). For n = 4 the candidates are the listed b^j, the b^j
    with r1 xor-ed in, the complements of both and the single-bit flips of
    the listed b^j.

    Raises:
        UnsupportedSizeError: For n > 4
    """
    n = net.n
    if n > max(4, EXHAUSTIVE_DICHOTOMY_MAX):
        raise UnsupportedSizeError(f"dichotomy search supports n <= 4, got n={n}")
    _check_star_settings(net, settings)
    table = bj_table(n)
    if not 1 <= j <= len(table):
        raise ValidationError(f"j must be in 1..{len(table)} for n={n}, got {j}")

    rho = assemble_star(net)
    basis = bell_basis(n)
    pairs = [settings.sum_difference(i) for i in range(n)]
    alice = _alice_operator([p[0] for p in pairs], [p[1] for p in pairs], gj_table(n)[j - 1])
    contributions = np.array([
        _real(expectation(alice, bob_reduced(rho, n, basis.projector(r)))) / 2 ** n
        for r in range(2 ** n)
    ])

    def value_of(bits: Sequence[int]) -> float:
        signs = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
        return abs(float(signs @ contributions))

    table_bits = table[j - 1].truth_table(n)
    best_bits, best_value, count = table_bits, value_of(table_bits), 0
    for bits in _dichotomy_candidates(n, table[j - 1], balanced_only):
        count += 1
        value = value_of(bits)
        if value > best_value + DICHOTOMY_TOL:
            best_bits, best_value = tuple(bits), value

    result = DichotomyResult(j, best_bits, best_value, table_bits, value_of(table_bits), count)
    logger.debug("dichotomy search n=%d j=%d: best %.12g, table %.12g over %d candidates",
                 n, j, result.best_value, result.table_value, count)
    return result


# (n, n') frames at which Bell sources reach the star closed form with the listed b^j
BELL_OPTIMUM_FRAMES = {
    2: ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
    3: ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
}


def bell_optimum_settings(n: int) -> StarSettings:
    """alpha = pi/4 settings in the frame where n Bell sources attain 2^(n-2) sqrt 2."""
    if n not in BELL_OPTIMUM_FRAMES:
        raise UnsupportedSizeError(f"no Bell optimum frame for n={n} (have {sorted(BELL_OPTIMUM_FRAMES)})")
    frame, frame_prime = BELL_OPTIMUM_FRAMES[n]
    return StarSettings.uniform(n, np.pi / 4, frame, frame_prime)


def table_dichotomies(n: int) -> List[DichotomyResult]:
    """Dichotomy search for every b^j on a Bell star at its optimum settings."""
    net = StarNetwork((make_state("bell"),) * n)
    settings = bell_optimum_settings(n)
    return [dichotomy_search(net, settings, j) for j in range(1, len(bj_table(n)) + 1)]


# --- acceptance scenarios --------------------------------------------------

@dataclass(frozen=True)
class ScenarioResult:
    """Oracle value against the closed form for one built-in scenario."""

    name: str
    closed_form: float
    oracle: float

    @property
    def gap(self) -> float:
        return self.oracle - self.closed_form

    @property
    def passed(self) -> bool:
        return -ORACLE_DEFICIT_TOL <= self.gap <= ORACLE_EXCESS_TOL

    @property
    def exceeded(self) -> bool:
        return self.gap > ORACLE_EXCESS_TOL

    def to_dict(self) -> Dict:
        return {"name": self.name, "closed_form": self.closed_form, "oracle": self.oracle,
                "gap": self.gap, "passed": self.passed}


def verify_scenarios(cfg: Optional[OptimizerConfig] = None) -> List[ScenarioResult]:
    """
    Run the built-in closed-form versus oracle scenarios.

    Covers the bilocal Bell pair, the 3-local Bell triple, a Bell-Werner-Bell
    chain, Bell stars with 2 and 3 sources and the CHSH maximum of a
    random state drawn from cfg.seed.
    """
    cfg = cfg or OptimizerConfig()
    bell = make_state("bell")
    results = []

    chains = {
        "bilocal bell pair": ChainNetwork((bell, bell)),
        "3-local bell triple": ChainNetwork((bell, bell, bell)),
        "bell-werner(0.8)-bell chain": ChainNetwork((bell, make_state("werner", v=0.8, base="phi+"), bell)),
    }
    for name, net in chains.items():
        results.append(ScenarioResult(name, chain_max(net).closed_form_max, optimize_chain(net, cfg).value))

    for n in (2, 3):
        net = StarNetwork((bell,) * n)
        results.append(ScenarioResult(f"star n={n} bell sources", star_max(net).closed_form_max,
                                      optimize_star(net, cfg).value))

    state = random_state(np.random.default_rng(cfg.seed))
    results.append(ScenarioResult("chsh random state", chsh_max(state), optimize_chsh(state, cfg).value))

    for result in results:
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "scenario %s: closed form %.9f, oracle %.9f, gap %.2e",
                   result.name, result.closed_form, result.oracle, result.gap)
    return results
