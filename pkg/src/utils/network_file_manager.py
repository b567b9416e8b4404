"""
Network description files.

A network file is JSON naming the topology, an optional chain convention
and the source states as {"family", "params"} objects. A sweep file is a
network file in which one parameter value is the marker "@sweep", plus a
"range" object {"lo", "hi", "step"}.
"""
import copy
import json
import logging
import math
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

from src.analysis.closed_form import Convention
from src.network.topology import ChainNetwork, StarNetwork, Topology
from src.states.state_factory import StateFactory, default_factory
from src.utils.errors import NetworkAnalysisError, SpecFileError

logger = logging.getLogger(__name__)

SWEEP_MARKER = "@sweep"
MAX_SWEEP_POINTS = 10 ** 6
GRID_DECIMALS = 12
_FIELD_PATH = re.compile(r"([A-Za-z_]+)(?:\[(\d+)\])?")


@dataclass
class NetworkSpec:
    """Parsed network file; sources stay as their raw state specs."""

    topology: Topology
    sources: List[Dict[str, Any]]
    convention: Convention = Convention.NORMALIZED
    version: str = "1.0.0"

    def build(self, factory: Optional[StateFactory] = None) -> Union[ChainNetwork, StarNetwork]:
        """Construct the network, reporting the offending source on failure."""
        factory = factory or default_factory()
        states = tuple(factory.create_from_dict(s, field=f"sources[{i}]") for i, s in enumerate(self.sources))
        if self.topology is Topology.CHAIN:
            return ChainNetwork(states)
        return StarNetwork(states)

    def to_dict(self) -> Dict[str, Any]:
        data = {"version": self.version, "topology": self.topology.value,
                "sources": copy.deepcopy(self.sources)}
        if self.convention is not Convention.NORMALIZED:
            data["convention"] = self.convention.value
        return data


@dataclass
class SweepSpec:
    """A network template with one swept parameter."""

    template: Dict[str, Any]
    lo: float
    hi: float
    step: float
    markers: int = field(default=0)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.lo, self.hi, self.step)):
            raise SpecFileError("sweep range must be finite", field="range")
        if not self.lo < self.hi:
            raise SpecFileError(f"sweep range needs lo < hi, got lo={self.lo}, hi={self.hi}", field="range")
        if not self.step > 0:
            raise SpecFileError(f"sweep step must be > 0, got {self.step}", field="range.step")
        if (self.hi - self.lo) / self.step > MAX_SWEEP_POINTS:
            raise SpecFileError(f"sweep would exceed {MAX_SWEEP_POINTS} points", field="range.step")
        self.markers = _count_markers(self.template)
        if self.markers == 0:
            raise SpecFileError(f"sweep file has no {SWEEP_MARKER!r} parameter", field="sources")

    def grid(self) -> List[float]:
        """lo + k*step rounded to 12 decimals, k = 0..floor((hi - lo)/step)."""
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9))
        return [round(self.lo + k * self.step, GRID_DECIMALS) for k in range(count + 1)]

    def at(self, value: float) -> NetworkSpec:
        """The network spec with every marker replaced by value."""
        return parse_network_dict(_substitute(self.template, value))


def _count_markers(node: Any) -> int:
    if isinstance(node, dict):
        return sum(_count_markers(v) for v in node.values())
    if isinstance(node, list):
        return sum(_count_markers(v) for v in node)
    return int(node == SWEEP_MARKER)


def _substitute(node: Any, value: float) -> Any:
    if isinstance(node, dict):
        return {k: _substitute(v, value) for k, v in node.items()}
    if isinstance(node, list):
        return [_substitute(v, value) for v in node]
    return value if node == SWEEP_MARKER else node


def _element_offset(text: str, start: int, index: int) -> Optional[int]:
    """Offset of element `index` of the first JSON array opening at or after start."""
    opening = text.find("[", start)
    if opening < 0:
        return None
    depth, count, expecting = 0, 0, True
    in_string = escaped = False
    for pos in range(opening + 1, len(text)):
        ch = text[pos]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if depth == 0 and expecting and not ch.isspace():
            if ch == "]":
                return None
            if count == index:
                return pos
            expecting = False
        if ch == '"':
            in_string = True
        elif ch in "[{":
            depth += 1
        elif ch in "]}":
            if depth == 0:
                return None
            depth -= 1
        elif ch == "," and depth == 0:
            count += 1
            expecting = True
    return None


def field_line(text: str, field: str) -> Optional[int]:
    """
    1-based line on which a reported field starts in the file text.

    "sources[2].params" resolves to the line opening the third source;
    other fields resolve to the line of their top-level key.
    """
    match = _FIELD_PATH.match(field)
    if match is None:
        return None
    key = re.search(r'"%s"\s*:' % re.escape(match.group(1)), text)
    if key is None:
        return None
    offset = key.start()
    if match.group(2) is not None:
        element = _element_offset(text, key.end(), int(match.group(2)))
        if element is not None:
            offset = element
    return text.count("\n", 0, offset) + 1


@contextmanager
def _located(text: str):
    """Attach the file line to field errors raised inside the block."""
    try:
        yield
    except SpecFileError as e:
        if e.line is not None or not e.field:
            raise
        line = field_line(text, e.field)
        if line is None:
            raise
        raise SpecFileError(e.message, field=e.field, line=line) from e


def parse_network_dict(data: Any, factory: Optional[StateFactory] = None) -> NetworkSpec:
    """
    Validate a decoded network file.

    Every source is built once so that a bad state is reported here, with
    the index of the offending source.

    Raises:
        SpecFileError: Naming the offending field
    """
    if not isinstance(data, dict):
        raise SpecFileError("network file must contain a JSON object")
    try:
        topology = Topology(data.get("topology"))
    except ValueError:
        raise SpecFileError(f"unknown topology {data.get('topology')!r}; expected 'chain' or 'star'",
                            field="topology") from None
    try:
        convention = Convention(data.get("convention", Convention.NORMALIZED.value))
    except ValueError:
        raise SpecFileError(f"unknown convention {data.get('convention')!r}", field="convention") from None

    sources = data.get("sources")
    if not isinstance(sources, list):
        raise SpecFileError("'sources' must be a list of state specs", field="sources")
    if len(sources) < 2:
        raise SpecFileError(f"a network needs at least 2 sources, got {len(sources)}", field="sources")

    spec = NetworkSpec(topology, sources, convention, str(data.get("version", NetworkFileManager.FILE_VERSION)))
    try:
        spec.build(factory)
    except SpecFileError:
        raise
    except NetworkAnalysisError as e:
        raise SpecFileError(str(e), field="sources") from e
    return spec


class NetworkFileManager:
    """
    Reads network and sweep files and serializes specs back to JSON.

    Loading a file written with another format version logs a warning and
    carries on.
    """

    FILE_VERSION = "1.0.0"

    def __init__(self, factory: Optional[StateFactory] = None):
        self.factory = factory or default_factory()
        self.current_file_path: Optional[str] = None

    def _read_json(self, file_path: str) -> Tuple[Any, str]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise SpecFileError(f"cannot read {file_path}: {e.strerror or e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecFileError(f"{file_path}: invalid JSON ({e.msg})", line=e.lineno) from e

        version = data.get("version") if isinstance(data, dict) else None
        if version is not None and version != self.FILE_VERSION:
            logger.warning("Loading network file with version %s, current version is %s",
                           version, self.FILE_VERSION)
        self.current_file_path = file_path
        return data, text

    def load_network(self, file_path: str) -> NetworkSpec:
        """
        Load and validate a network file.

        Raises:
            SpecFileError: If the file is unreadable or malformed; field
                errors carry the line they were found on
        """
        data, text = self._read_json(file_path)
        with _located(text):
            if isinstance(data, dict) and _count_markers(data):
                raise SpecFileError(f"network file contains {SWEEP_MARKER!r}; use the sweep command",
                                    field="sources")
            spec = parse_network_dict(data, self.factory)
        logger.info("Network loaded from %s (%s, %d sources)", file_path, spec.topology.value,
                    len(spec.sources))
        return spec

    def load_sweep(self, file_path: str) -> SweepSpec:
        """
        Load a sweep file; the template is checked at the first grid point.

        Raises:
            SpecFileError: If the file, the range or the template is malformed
        """
        data, text = self._read_json(file_path)
        with _located(text):
            sweep = self._parse_sweep(data)
        logger.info("Sweep loaded from %s: %d points", file_path, len(sweep.grid()))
        return sweep

    @staticmethod
    def _parse_sweep(data: Any) -> SweepSpec:
        if not isinstance(data, dict):
            raise SpecFileError("sweep file must contain a JSON object")
        bounds = data.get("range")
        if not isinstance(bounds, dict):
            raise SpecFileError("sweep file needs a 'range' object with lo, hi and step", field="range")
        try:
            lo, hi, step = (float(bounds[k]) for k in ("lo", "hi", "step"))
        except KeyError as e:
            raise SpecFileError(f"sweep range missing {e.args[0]!r}", field=f"range.{e.args[0]}") from None
        except (TypeError, ValueError):
            raise SpecFileError("sweep range values must be numbers", field="range") from None

        template = {k: v for k, v in data.items() if k != "range"}
        sweep = SweepSpec(template, lo, hi, step)
        sweep.at(sweep.grid()[0])
        return sweep

    @staticmethod
    def dumps(spec: NetworkSpec, report: Optional[Dict[str, Any]] = None) -> str:
        """JSON text of a spec; an attached report is ignored when read back."""
        data = spec.to_dict()
        if report is not None:
            data["report"] = report
        return json.dumps(data, indent=2, sort_keys=False) + "\n"
