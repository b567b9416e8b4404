"""
Tests for report rendering and sweep CSV output.
"""
import json

import numpy as np
import pytest

from src.analysis.closed_form import cauchy_schwarz_chain, chain_max, star_max
from src.analysis.optimizer import OptResult
from src.analysis.oracle import DichotomyResult, ScenarioResult
from src.network.bell_basis import bell_basis, bj_table, gj_table
from src.network.settings import ChshSettings, DichotomicSetting
from src.network.topology import ChainNetwork, StarNetwork
from src.states.state_factory import make_state
from src.utils.errors import SpecFileError
from src.utils.export_manager import CSV_HEADER, ExportManager, SweepRow


@pytest.fixture
def exporter():
    return ExportManager()


@pytest.fixture
def bell_pair_report(bell_state):
    return chain_max(ChainNetwork((bell_state, bell_state)))


def _oracle_result(value):
    z = DichotomicSetting(np.array([0.0, 0.0, 1.0]))
    return OptResult(value, ChshSettings(z, z, z, z), 3, True, components=(0.5, 0.5))


def test_verdict_line(exporter, bell_pair_report):
    assert exporter.verdict_line(bell_pair_report) == "closed-form 1.414214, bound 1, VIOLATION"
    report = chain_max(ChainNetwork((make_state("werner", v=0.6),) * 2))
    assert exporter.verdict_line(report).endswith("no violation")


def test_render_report(exporter, bell_state, bell_pair_report):
    net = ChainNetwork((bell_state, bell_state))
    text = exporter.render_report(bell_pair_report, cauchy_schwarz_chain(net), _oracle_result(1.4142))
    assert "topology: chain (n=2, convention normalized)" in text
    assert "source 2 spectrum: 1.000000 1.000000 1.000000" in text
    assert "CHSH-nonlocal sources: 2 of 2" in text
    assert "(holds)" in text
    assert "oracle 1.414200" in text
    assert "converged after 3 sweeps" in text
    assert text.endswith("\n")


def test_render_star_report(exporter, bell_state):
    text = exporter.render_report(star_max(StarNetwork((bell_state,) * 3)))
    assert "closed-form 2.828427, bound 2, VIOLATION" in text
    assert "Cauchy-Schwarz" not in text


def test_report_dict(exporter, bell_state, bell_pair_report):
    data = exporter.report_dict(bell_pair_report, cauchy_schwarz_chain(ChainNetwork((bell_state, bell_state))),
                                _oracle_result(1.4))
    assert data["closed_form_max"] == pytest.approx(np.sqrt(2))
    assert data["cauchy_schwarz"]["holds"] is True
    assert data["oracle"]["gap"] == pytest.approx(1.4 - np.sqrt(2))
    assert data["oracle"]["settings"]["a0"] == [0.0, 0.0, 1.0]
    json.dumps(data)


def test_sweep_csv_format(exporter):
    rows = [SweepRow(0.7, 0.7, 1.0, False), SweepRow(0.71, 1.0041, 1.0, True, oracle=1.0040999)]
    text = exporter.sweep_csv_text(rows)
    assert text.splitlines() == [
        ",".join(CSV_HEADER),
        "0.7,0.7,1,false",
        "0.71,1.0041,1,true",
    ]
    with_oracle = exporter.sweep_csv_text(rows, with_oracle=True).splitlines()
    assert with_oracle[0].endswith(",oracle")
    assert with_oracle[1].endswith(",")
    assert with_oracle[2].endswith(",1.0040999")


def test_sweep_csv_twelve_digits(exporter):
    text = exporter.sweep_csv_text([SweepRow(1 / 3, np.sqrt(2), 2.0, True)])
    assert text.splitlines()[1] == "0.333333333333,1.41421356237,2,true"


def test_save_sweep_csv(exporter, tmp_path):
    path = tmp_path / "nested" / "sweep.csv"
    exporter.save_sweep_csv([SweepRow(0.5, 0.5, 1.0, False)], str(path))
    assert path.read_text(encoding="utf-8") == "param,closed_form,bound,violation\n0.5,0.5,1,false\n"


def test_save_sweep_csv_unwritable(exporter, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(SpecFileError):
        exporter.save_sweep_csv([], str(blocker / "sweep.csv"))


def test_render_basis_two_qubits(exporter):
    text = exporter.render_basis(bell_basis(2), gj_table(2), bj_table(2))
    lines = text.splitlines()
    assert lines[0] == "generalized Bell basis, n=2"
    assert lines[1] == "psi_00 = +0.707107|00> +0.707107|11>"
    assert lines[3] == "psi_10 = +0.707107|00> -0.707107|11>"
    assert "  g_1 = {}" in lines
    assert "  g_2 = {1,2}" in lines
    assert any(line.startswith("  b^1 = r2") for line in lines)
    assert any(line.startswith("  b^2 = r1") for line in lines)


def test_render_basis_without_tables(exporter):
    text = exporter.render_basis(bell_basis(5))
    assert "g_j subsets" not in text
    assert len(text.splitlines()) == 1 + 32


def test_render_checks(exporter):
    assert exporter.render_checks({"a": True, "b": True}).endswith("all checks passed\n")
    text = exporter.render_checks({"a": True, "b": False})
    assert "FAIL: b" in text
    assert "some checks FAILED" in text


def test_render_dichotomies_and_scenarios(exporter):
    result = DichotomyResult(1, (0, 1, 0, 1), 0.5, (0, 1, 0, 1), 0.5, 16)
    assert "table optimal" in exporter.render_dichotomies([result])
    text = exporter.render_scenarios([ScenarioResult("pair", 1.0, 1.0), ScenarioResult("bad", 1.0, 0.5)])
    assert text.startswith("PASS pair")
    assert "FAIL bad" in text
