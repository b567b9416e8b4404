"""
Report rendering for the n-local analysis package.

This module turns closed-form reports, oracle results, sweep rows and
basis listings into the text, JSON and CSV outputs of the command line.
"""
import csv
import io
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

from src.analysis.closed_form import CauchySchwarzResult, ViolationReport
from src.analysis.optimizer import OptResult
from src.analysis.oracle import DichotomyResult, ScenarioResult
from src.network.bell_basis import GeneralizedBellBasis, ParityDichotomy, bit_strings
from src.utils.errors import SpecFileError

logger = logging.getLogger(__name__)

CSV_HEADER = ("param", "closed_form", "bound", "violation")


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a parameter sweep."""

    param: float
    closed_form: float
    bound: float
    violation: bool
    oracle: Optional[float] = None


def _csv_float(value: float) -> str:
    return f"{value:.12g}"


def _bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def _complex(value: complex) -> str:
    value = complex(value)
    re = 0.0 if abs(value.real) < 1e-15 else value.real
    im = 0.0 if abs(value.imag) < 1e-15 else value.imag
    if im == 0.0:
        return f"{re:+.6f}"
    return f"{re:+.6f}{im:+.6f}j"


class ExportManager:
    """
    Renders analysis results.

    Text output is for people, JSON output is a network file with an
    attached report, CSV output is the sweep table.
    """

    def __init__(self):
        logger.debug("Export manager initialized")

    def verdict_line(self, report: ViolationReport) -> str:
        verdict = "VIOLATION" if report.violation else "no violation"
        return f"closed-form {report.closed_form_max:.6f}, bound {report.classical_bound:g}, {verdict}"

    def render_report(self, report: ViolationReport,
                      cauchy_schwarz: Optional[CauchySchwarzResult] = None,
                      oracle: Optional[OptResult] = None) -> str:
        """
        Human-readable closed-form report.

        Args:
            report: Closed-form verdict
            cauchy_schwarz: Chain-only Cauchy-Schwarz check
            oracle: Optional brute-force result for the same network
        """
        lines = [f"topology: {report.topology.value} (n={report.n}, convention {report.convention.value})"]
        for index, spectrum in enumerate(report.per_source_spectra, start=1):
            l1, l2, l3 = spectrum.values
            lines.append(f"source {index} spectrum: {l1:.6f} {l2:.6f} {l3:.6f}")
        lines.append(f"CHSH-nonlocal sources: {report.chsh_nonlocal_sources} of {report.n}")
        if cauchy_schwarz is not None:
            status = "holds" if cauchy_schwarz.holds else "FAILS"
            lines.append(f"Cauchy-Schwarz: lhs {cauchy_schwarz.lhs:.6f}, rhs {cauchy_schwarz.rhs:.6f} ({status})")
        lines.append(self.verdict_line(report))
        if oracle is not None:
            lines.extend(self.render_oracle(oracle, report.closed_form_max))
        return "\n".join(lines) + "\n"

    def render_oracle(self, oracle: OptResult, closed_form: float) -> List[str]:
        state = "converged" if oracle.converged else "NOT converged"
        components = ", ".join(f"{c:.6f}" for c in oracle.components)
        return [
            f"oracle {oracle.value:.6f} (gap {oracle.value - closed_form:+.2e}, {state} after {oracle.iterations} sweeps)",
            f"oracle components: {components}",
            f"oracle settings: {json.dumps(oracle.settings.to_dict())}",
        ]

    def report_dict(self, report: ViolationReport,
                    cauchy_schwarz: Optional[CauchySchwarzResult] = None,
                    oracle: Optional[OptResult] = None) -> Dict[str, Any]:
        data = report.to_dict()
        if cauchy_schwarz is not None:
            data["cauchy_schwarz"] = {"lhs": cauchy_schwarz.lhs, "rhs": cauchy_schwarz.rhs,
                                      "holds": cauchy_schwarz.holds}
        if oracle is not None:
            data["oracle"] = {
                "value": oracle.value,
                "gap": oracle.value - report.closed_form_max,
                "iterations": oracle.iterations,
                "converged": oracle.converged,
                "components": list(oracle.components),
                "settings": oracle.settings.to_dict(),
            }
        return data

    def write_sweep_csv(self, rows: Iterable[SweepRow], stream: TextIO, with_oracle: bool = False) -> None:
        """Write sweep rows with the fixed header; floats keep 12 significant digits."""
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_HEADER + (("oracle",) if with_oracle else ()))
        for row in rows:
            fields = [_csv_float(row.param), _csv_float(row.closed_form), _csv_float(row.bound),
                      "true" if row.violation else "false"]
            if with_oracle:
                fields.append("" if row.oracle is None else _csv_float(row.oracle))
            writer.writerow(fields)

    def sweep_csv_text(self, rows: Iterable[SweepRow], with_oracle: bool = False) -> str:
        buffer = io.StringIO()
        self.write_sweep_csv(rows, buffer, with_oracle)
        return buffer.getvalue()

    def save_sweep_csv(self, rows: Sequence[SweepRow], file_path: str, with_oracle: bool = False) -> None:
        """
        Write sweep rows to a file.

        Raises:
            SpecFileError: If the path cannot be written
        """
        try:
            directory = os.path.dirname(os.path.abspath(file_path))
            os.makedirs(directory, exist_ok=True)
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                self.write_sweep_csv(rows, f, with_oracle)
        except OSError as e:
            logger.error("Error writing sweep CSV to %s: %s", file_path, e)
            raise SpecFileError(f"cannot write {file_path}: {e.strerror or e}") from e
        logger.info("Sweep CSV written to %s (%d rows)", file_path, len(rows))

    def render_basis(self, basis: GeneralizedBellBasis,
                     gj: Optional[Sequence[Sequence[int]]] = None,
                     bj: Optional[Sequence[ParityDichotomy]] = None) -> str:
        """Basis amplitudes plus, when available, the g_j subsets and b^j truth tables."""
        n = basis.n
        lines = [f"generalized Bell basis, n={n}"]
        for bits in bit_strings(n):
            vector = basis.vector(bits)
            support = [f"{_complex(a)}|{_bits(b)}>" for a, b in zip(vector, bit_strings(n))
                       if abs(a) > 1e-12]
            lines.append(f"psi_{_bits(bits)} = {' '.join(support)}")
        if gj is not None:
            lines.append("g_j subsets:")
            for j, subset in enumerate(gj, start=1):
                members = "{" + ",".join(str(i) for i in subset) + "}" if subset else "{}"
                lines.append(f"  g_{j} = {members}")
        if bj is not None:
            header = " ".join(_bits(bits) for bits in bit_strings(n))
            lines.append(f"b^j truth tables (r = {header}):")
            for j, dichotomy in enumerate(bj, start=1):
                cells = " ".join(str(b).rjust(n) for b in dichotomy.truth_table(n))
                lines.append(f"  b^{j} = {dichotomy.describe():<16} {cells}")
        return "\n".join(lines) + "\n"

    def render_checks(self, checks: Dict[str, bool]) -> str:
        lines = [f"{'pass' if ok else 'FAIL'}: {name}" for name, ok in checks.items()]
        lines.append("all checks passed" if all(checks.values()) else "some checks FAILED")
        return "\n".join(lines) + "\n"

    def render_dichotomies(self, results: Sequence[DichotomyResult]) -> str:
        lines = []
        for result in results:
            status = "table optimal" if result.table_optimal else "table NOT optimal"
            lines.append(f"j={result.j}: table |I_j| {result.table_value:.9f}, best {result.best_value:.9f} "
                         f"({_bits(result.best_bits)}, {result.candidates} candidates) {status}")
        return "\n".join(lines) + "\n"

    def render_scenarios(self, results: Sequence[ScenarioResult]) -> str:
        lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name}: closed-form {r.closed_form:.6f}, "
                 f"oracle {r.oracle:.6f}, gap {r.gap:+.2e}" for r in results]
        return "\n".join(lines) + "\n"
