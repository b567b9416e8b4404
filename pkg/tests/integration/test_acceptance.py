"""
End-to-end scenarios: closed forms against the brute-force oracle, sweeps
through the file layer and the basis invariants.
"""
import math

import numpy as np
import pytest

from src.analysis.closed_form import (
    cauchy_schwarz_chain, cauchy_schwarz_check, chain_ij_factorized, chain_max, chsh_max, star_max,
)
from src.analysis.optimizer import OptimizerConfig
from src.analysis.oracle import (
    ORACLE_DEFICIT_TOL, ORACLE_EXCESS_TOL, chain_ij_full, dichotomy_search, optimize_chain, optimize_chsh,
    optimize_star,
)
from src.network.bell_basis import bell_basis, bj_table, bob_observable
from src.network.settings import ChainSettings
from src.network.topology import ChainNetwork, StarNetwork
from src.states.state_factory import make_state
from src.states.two_qubit import apply_local_unitary, random_local_unitary, random_state
from src.utils.network_file_manager import SweepSpec

pytestmark = pytest.mark.integration

SQRT2 = math.sqrt(2.0)


def in_window(value, closed):
    return closed - ORACLE_DEFICIT_TOL <= value <= closed + ORACLE_EXCESS_TOL


def werner_sweep(topology, n):
    template = {"topology": topology,
                "sources": [{"family": "werner", "params": {"v": "@sweep"}}] * n}
    return SweepSpec(template, 0.60, 0.80, 0.005)


@pytest.fixture
def oracle_config():
    return OptimizerConfig(starts=4, seed=0)


def test_bilocal_bell_pair(bell_state, oracle_config):
    net = ChainNetwork((bell_state, bell_state))
    assert chain_max(net).closed_form_max == pytest.approx(SQRT2, abs=1e-12)
    assert chain_max(net, "paper_scale").closed_form_max == pytest.approx(2 * SQRT2, abs=1e-12)
    assert optimize_chain(net, oracle_config).value == pytest.approx(SQRT2, abs=1e-6)


@pytest.mark.slow
def test_three_local_bell_triple(bell_state, oracle_config):
    net = ChainNetwork((bell_state,) * 3)
    report = chain_max(net)
    assert report.closed_form_max == pytest.approx(SQRT2, abs=1e-12)
    assert report.classical_bound == 1.0
    assert in_window(optimize_chain(net, oracle_config).value, report.closed_form_max)


@pytest.mark.parametrize("topology,n", [("chain", 2), ("star", 3)])
def test_werner_sweep_threshold(topology, n):
    """Test that equal Werner sources first violate at v = 0.710."""
    sweep = werner_sweep(topology, n)
    flags = [(v, sweep.at(v).build()) for v in sweep.grid()]
    verdicts = [(v, (chain_max(net) if topology == "chain" else star_max(net)).violation) for v, net in flags]
    first = next(v for v, violated in verdicts if violated)
    assert first == 0.71
    assert all(violated == (v > 1 / SQRT2) for v, violated in verdicts)


@pytest.mark.slow
@pytest.mark.parametrize("v", [0.705, 0.71, 0.715])
def test_werner_chain_oracle_near_threshold(v, oracle_config):
    net = ChainNetwork((make_state("werner", v=v),) * 2).aligned()
    assert in_window(optimize_chain(net, oracle_config).value, chain_max(net).closed_form_max)


@pytest.mark.slow
@pytest.mark.parametrize("v", [0.705, 0.715])
def test_werner_star_oracle_near_threshold(v, oracle_config):
    net = StarNetwork((make_state("werner", v=v),) * 3).aligned()
    assert in_window(optimize_star(net, oracle_config).value, star_max(net).closed_form_max)


@pytest.mark.slow
def test_horodecki_against_brute_force():
    rng = np.random.default_rng(2024)
    cfg = OptimizerConfig(starts=4, seed=1)
    gaps = [abs(optimize_chsh(s, cfg).value - chsh_max(s)) for s in (random_state(rng) for _ in range(100))]
    assert max(gaps) <= 1e-4


def test_cauchy_schwarz_never_fails():
    rng = np.random.default_rng(99)
    failures = sum(not cauchy_schwarz_check(random_state(rng), random_state(rng)).holds for _ in range(1000))
    failures += sum(not cauchy_schwarz_chain(ChainNetwork([random_state(rng) for _ in range(3)])).holds
                    for _ in range(200))
    assert failures == 0


@pytest.mark.slow
def test_star_three_bells(bell_state, oracle_config):
    net = StarNetwork((bell_state,) * 3)
    report = star_max(net)
    assert report.closed_form_max == pytest.approx(2 * SQRT2, abs=1e-12)
    assert report.classical_bound == 2.0
    result = optimize_star(net, oracle_config)
    assert result.value == pytest.approx(2 * SQRT2, abs=1e-4)
    for j in range(1, 5):
        assert dichotomy_search(net, result.settings, j).table_optimal


def test_two_source_star_reduces_to_chain():
    rng = np.random.default_rng(5)
    for _ in range(100):
        chain = ChainNetwork((random_state(rng), random_state(rng)))
        star = StarNetwork.from_chain(chain)
        assert star_max(star).closed_form_max == pytest.approx(chain_max(chain).closed_form_max, abs=1e-12)


@pytest.mark.slow
def test_two_source_star_oracle_matches_chain_oracle(oracle_config):
    rng = np.random.default_rng(6)
    for _ in range(100):
        chain = ChainNetwork((random_state(rng), random_state(rng))).aligned()
        star = StarNetwork.from_chain(chain)
        assert optimize_star(star, oracle_config).value == pytest.approx(
            optimize_chain(chain, oracle_config).value, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_generalized_bell_basis(n):
    basis = bell_basis(n)
    identity = np.eye(2 ** n)
    assert np.max(np.abs(basis.gram() - identity)) <= 1e-12
    assert np.max(np.abs(basis.completeness() - identity)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bob_observables_are_involutions(n):
    identity = np.eye(2 ** n)
    for j in range(1, len(bj_table(n)) + 1):
        b = bob_observable(n, j)
        assert np.max(np.abs(b @ b - identity)) <= 1e-12
        assert abs(np.trace(b)) <= 1e-12


def test_factorized_against_full_tensor():
    rng = np.random.default_rng(11)
    for sample in range(200):
        n = 2 + sample % 3
        net = ChainNetwork([random_state(rng) for _ in range(n)])
        settings = ChainSettings.from_angles(rng.uniform(0, 2 * np.pi, size=8))
        assert chain_ij_full(net, settings) == pytest.approx(chain_ij_factorized(net, settings), abs=1e-10)


def test_local_unitary_invariance():
    rng = np.random.default_rng(21)
    for _ in range(100):
        sources = [random_state(rng) for _ in range(3)]
        moved = [apply_local_unitary(s, random_local_unitary(rng)) for s in sources]
        assert chain_max(ChainNetwork(moved)).closed_form_max == pytest.approx(
            chain_max(ChainNetwork(sources)).closed_form_max, abs=1e-10)
        assert star_max(StarNetwork(moved)).closed_form_max == pytest.approx(
            star_max(StarNetwork(sources)).closed_form_max, abs=1e-10)


@pytest.mark.slow
def test_aligned_oracle_matches_unaligned_closed_form(oracle_config):
    rng = np.random.default_rng(31)
    for _ in range(100):
        net = ChainNetwork((random_state(rng), random_state(rng)))
        value = optimize_chain(net.aligned(), oracle_config).value
        assert abs(value - chain_max(net).closed_form_max) <= 1e-4
