"""
Command-line application for the n-local analysis package.

Subcommands:
    analyze  closed-form report for a network file, optionally checked by the oracle
    sweep    closed-form (and oracle) values over a parameter grid, as CSV
    basis    generalized Bell basis and star tables, with optional invariant checks
    verify   built-in closed-form versus oracle scenarios

Exit codes: 0 success, 1 input error, 2 invariant violation.
"""
import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from logging.handlers import RotatingFileHandler
from typing import Dict, Optional, Sequence, TextIO

import numpy as np

from src.analysis.closed_form import (
    Convention, cauchy_schwarz_chain, cauchy_schwarz_check, closed_form_report,
)
from src.analysis.optimizer import OptimizerConfig
from src.analysis.oracle import (
    BELL_OPTIMUM_FRAMES, ORACLE_EXCESS_TOL, optimize_chain, optimize_star, table_dichotomies, verify_scenarios,
)
from src.network.bell_basis import (
    SUPPORTED_BJ_SIZES, bell_basis, bj_table, bob_observable, gj_table,
)
from src.network.topology import ChainNetwork
from src.states.state_factory import state_to_dict
from src.utils.errors import ConsistencyError, NetworkAnalysisError
from src.utils.export_manager import ExportManager, SweepRow
from src.utils.network_file_manager import NetworkFileManager, NetworkSpec

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE_NAME = "nlocal.log"
DEFAULT_LOG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "logs")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INVARIANT = 2

BASIS_CHECK_TOL = 1e-12

logger = logging.getLogger(__name__)


def setup_logging(verbosity: int = 0, log_dir: Optional[str] = None, log_file: bool = True) -> Optional[str]:
    """
    Configure the root logger for a command-line run.

    A rotating file handler (5MB, 5 backups) records INFO and above; the
    console shows WARNING, or INFO/DEBUG with -v/-vv.

    Returns:
        Path of the log file, or None when file logging is disabled
    """
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "_nlocal", False)]:
        root.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel({0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG))
    console_handler._nlocal = True
    root.addHandler(console_handler)

    log_file_path = None
    if log_file:
        log_dir = log_dir or DEFAULT_LOG_DIR
        os.makedirs(log_dir, exist_ok=True)
        log_file_path = os.path.join(log_dir, LOG_FILE_NAME)
        file_handler = RotatingFileHandler(
            log_file_path,
            maxBytes=1024 * 1024 * 5,
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.INFO)
        file_handler._nlocal = True
        root.addHandler(file_handler)

    root.setLevel(logging.DEBUG if verbosity >= 2 else logging.INFO)
    if log_file_path:
        logger.info("Logging to file: %s", log_file_path)
    return log_file_path


def _config_from_args(args: argparse.Namespace) -> OptimizerConfig:
    cfg = OptimizerConfig(seed=args.seed, workers=args.workers)
    if getattr(args, "starts", None):
        cfg = replace(cfg, starts=args.starts)
    return cfg


class NetworkAnalysisApp:
    """
    Runs the subcommands against a file manager and an export manager.

    Output goes to the given stream so that commands can be captured.
    """

    def __init__(self, stdout: Optional[TextIO] = None):
        self.file_manager = NetworkFileManager()
        self.export_manager = ExportManager()
        self.stdout = stdout or sys.stdout

    def _write(self, text: str) -> None:
        self.stdout.write(text)

    def _analyze_spec(self, spec: NetworkSpec, convention: Convention, align: bool,
                      oracle_cfg: Optional[OptimizerConfig]):
        net = spec.build(self.file_manager.factory)
        if align:
            net = net.aligned()
        report = closed_form_report(net, convention)

        cauchy_schwarz = None
        if isinstance(net, ChainNetwork):
            if net.n == 2:
                cauchy_schwarz = cauchy_schwarz_check(*net.sources)
            else:
                cauchy_schwarz = cauchy_schwarz_chain(net)

        oracle = None
        if oracle_cfg is not None:
            if isinstance(net, ChainNetwork):
                oracle = optimize_chain(net, oracle_cfg)
            else:
                oracle = optimize_star(net, oracle_cfg)
            if convention is Convention.PAPER_SCALE:
                oracle = replace(oracle, value=2.0 * oracle.value)
        return report, cauchy_schwarz, oracle

    @staticmethod
    def _oracle_exceeds(report, oracle) -> bool:
        if oracle is None:
            return False
        excess = oracle.value - report.closed_form_max
        if excess > ORACLE_EXCESS_TOL:
            logger.error("Oracle value %.12g exceeds closed form %.12g by %.3e",
                         oracle.value, report.closed_form_max, excess)
            return True
        return False

    def cmd_analyze(self, args: argparse.Namespace) -> int:
        """Closed-form report for one network file."""
        spec = self.file_manager.load_network(args.file)
        convention = Convention(args.convention) if args.convention else spec.convention
        cfg = _config_from_args(args) if args.oracle else None
        report, cauchy_schwarz, oracle = self._analyze_spec(spec, convention, args.align, cfg)

        if args.json:
            spec = replace(spec, convention=convention)
            if args.align:
                # aligned states go out as dense entries
                aligned = spec.build(self.file_manager.factory).aligned()
                spec = replace(spec, sources=[state_to_dict(s) for s in aligned.sources])
            self._write(self.file_manager.dumps(
                spec, self.export_manager.report_dict(report, cauchy_schwarz, oracle)))
        else:
            self._write(self.export_manager.render_report(report, cauchy_schwarz, oracle))
        return EXIT_INVARIANT if self._oracle_exceeds(report, oracle) else EXIT_OK

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        """CSV table of closed-form (and oracle) values over the sweep grid."""
        sweep = self.file_manager.load_sweep(args.file)
        grid = sweep.grid()
        cfg = _config_from_args(args) if args.oracle else None
        workers = args.workers
        if cfg is not None and workers > 1:
            cfg = replace(cfg, workers=1)

        def evaluate(value: float):
            spec = sweep.at(value)
            convention = Convention(args.convention) if args.convention else spec.convention
            report, _, oracle = self._analyze_spec(spec, convention, args.align, cfg)
            row = SweepRow(value, report.closed_form_max, report.classical_bound, report.violation,
                           None if oracle is None else oracle.value)
            return row, self._oracle_exceeds(report, oracle)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(evaluate, grid))
        else:
            results = [evaluate(v) for v in grid]

        rows = [row for row, _ in results]
        if args.csv:
            self.export_manager.save_sweep_csv(rows, args.csv, with_oracle=args.oracle)
        else:
            self._write(self.export_manager.sweep_csv_text(rows, with_oracle=args.oracle))
        logger.info("Sweep finished: %d points, %d violating", len(rows), sum(r.violation for r in rows))
        return EXIT_INVARIANT if any(exceeded for _, exceeded in results) else EXIT_OK

    def basis_checks(self, n: int, tables: bool) -> Dict[str, bool]:
        basis = bell_basis(n)
        identity = np.eye(2 ** n)
        checks = {
            f"n={n} Gram matrix is the identity": bool(np.max(np.abs(basis.gram() - identity)) <= BASIS_CHECK_TOL),
            f"n={n} basis is complete": bool(np.max(np.abs(basis.completeness() - identity)) <= BASIS_CHECK_TOL),
        }
        if tables:
            for j in range(1, len(bj_table(n)) + 1):
                b = bob_observable(n, j)
                checks[f"B^{j} is Hermitian"] = bool(np.max(np.abs(b - b.conj().T)) <= BASIS_CHECK_TOL)
                checks[f"B^{j} squares to the identity"] = bool(np.max(np.abs(b @ b - identity)) <= BASIS_CHECK_TOL)
                checks[f"B^{j} is traceless"] = bool(abs(np.trace(b)) <= BASIS_CHECK_TOL)
        return checks

    def cmd_basis(self, args: argparse.Namespace) -> int:
        """List the basis and tables; --check runs the invariant suite."""
        n = args.n
        basis = bell_basis(n)
        tables = args.tables or n in SUPPORTED_BJ_SIZES
        gj = gj_table(n) if tables else None
        bj = bj_table(n) if tables else None
        self._write(self.export_manager.render_basis(basis, gj, bj))
        if not args.check:
            return EXIT_OK
        checks = self.basis_checks(n, tables)
        if tables and n in BELL_OPTIMUM_FRAMES:
            dichotomies = table_dichotomies(n)
            self._write(self.export_manager.render_dichotomies(dichotomies))
            for result in dichotomies:
                checks[f"b^{result.j} is optimal for Bell sources"] = result.table_optimal
        self._write(self.export_manager.render_checks(checks))
        return EXIT_OK if all(checks.values()) else EXIT_INVARIANT

    def cmd_verify(self, args: argparse.Namespace) -> int:
        """Built-in scenarios; exit 2 if any oracle value leaves its window."""
        cfg = _config_from_args(args)
        if args.oracle_starts:
            cfg = replace(cfg, starts=args.oracle_starts)
        results = verify_scenarios(cfg)
        if args.json:
            self._write(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
        else:
            self._write(self.export_manager.render_scenarios(results))
        return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT

    def run(self, args: argparse.Namespace) -> int:
        handlers = {"analyze": self.cmd_analyze, "sweep": self.cmd_sweep,
                    "basis": self.cmd_basis, "verify": self.cmd_verify}
        try:
            return handlers[args.command](args)
        except ConsistencyError as e:
            logger.error("Invariant violation: %s", e)
            print(f"invariant violation: {e}", file=sys.stderr)
            return EXIT_INVARIANT
        except NetworkAnalysisError as e:
            logger.error("%s", e)
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for every random draw (default 0)")
    common.add_argument("--starts", type=_positive_int, default=None, help="oracle multi-start count")
    common.add_argument("--workers", type=_positive_int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--log-dir", default=None, help="directory for nlocal.log")
    common.add_argument("--no-log-file", action="store_true", help="log to the console only")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("file", help="network (or sweep) JSON file")
    analysis.add_argument("--oracle", action="store_true", help="also run the brute-force optimizer")
    analysis.add_argument("--align", action="store_true", help="align every source before analysis")
    analysis.add_argument("--convention", choices=[c.value for c in Convention], default=None,
                          help="chain normalization (default: file value, else normalized)")

    parser = argparse.ArgumentParser(prog="nlocal", description="n-local network violation analysis")
    subparsers = parser.add_subparsers(dest="command", required=True)

    analyze = subparsers.add_parser("analyze", parents=[common, analysis], help="analyze a network file")
    analyze.add_argument("--json", action="store_true", help="print the network file with an attached report")

    sweep = subparsers.add_parser("sweep", parents=[common, analysis], help="sweep one parameter")
    sweep.add_argument("--csv", metavar="PATH", default=None, help="write the CSV here instead of stdout")

    basis = subparsers.add_parser("basis", parents=[common], help="list the generalized Bell basis")
    basis.add_argument("n", type=int, help="number of qubits")
    basis.add_argument("--tables", action="store_true", help="require the g_j / b^j tables")
    basis.add_argument("--check", action="store_true", help="run orthonormality and involution checks")

    verify = subparsers.add_parser("verify", parents=[common], help="run the built-in oracle scenarios")
    verify.add_argument("--oracle-starts", type=_positive_int, default=None, help="multi-start count")
    verify.add_argument("--json", action="store_true", help="print results as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """Parse arguments, configure logging and run one subcommand."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR
    setup_logging(args.verbose, args.log_dir, not args.no_log_file)
    logger.info("Running %s", args.command)
    return NetworkAnalysisApp(stdout).run(args)
