"""
State family factory for the n-local analysis package.

This module provides a registry of named two-qubit state families and a
factory that builds TwoQubitState instances from a family name plus
parameters, either directly or from the {"family", "params"} dictionaries
used in network description files.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.states.two_qubit import BlochForm, TwoQubitState, bloch_compose
from src.utils.errors import NetworkAnalysisError, SpecFileError, ValidationError

logger = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / np.sqrt(2.0)

BELL_VECTORS: Dict[str, np.ndarray] = {
    "phi+": np.array([1, 0, 0, 1], dtype=np.complex128) * _SQRT_HALF,
    "phi-": np.array([1, 0, 0, -1], dtype=np.complex128) * _SQRT_HALF,
    "psi+": np.array([0, 1, 1, 0], dtype=np.complex128) * _SQRT_HALF,
    "psi-": np.array([0, 1, -1, 0], dtype=np.complex128) * _SQRT_HALF,
}
for _vector in BELL_VECTORS.values():
    _vector.setflags(write=False)

DEFAULT_WERNER_BASE = "psi-"


def parse_complex(value: Any) -> complex:
    """Read a complex number written as [re, im] or as a plain number."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, complex):
        return value
    return complex(float(value))


def _bell_projector(label: str) -> np.ndarray:
    if label not in BELL_VECTORS:
        raise ValidationError(f"unknown Bell label {label!r}; expected one of {sorted(BELL_VECTORS)}")
    vector = BELL_VECTORS[label]
    return np.outer(vector, vector.conj())


def build_bell(label: str = "phi+") -> TwoQubitState:
    return TwoQubitState(_bell_projector(label), label=f"bell({label})")


def build_werner(v: float, base: str = DEFAULT_WERNER_BASE) -> TwoQubitState:
    """v |bell><bell| + (1 - v) 1/4"""
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"Werner visibility must lie in [0, 1], got {v}")
    rho = v * _bell_projector(base) + (1.0 - v) * np.eye(4) / 4.0
    return TwoQubitState(rho, label=f"werner({v:g}, {base})")


def build_pure(amplitudes: Sequence[Any]) -> TwoQubitState:
    psi = np.array([parse_complex(a) for a in amplitudes], dtype=np.complex128)
    if psi.shape != (4,):
        raise ValidationError(f"pure state needs 4 amplitudes, got {psi.shape[0]}")
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm < 1e-12:
        raise ValidationError("pure state amplitudes cannot be normalized")
    psi = psi / norm
    return TwoQubitState(np.outer(psi, psi.conj()), label="pure")


def build_bloch(mA: Sequence[float], mB: Sequence[float], t: Sequence[Sequence[float]]) -> TwoQubitState:
    return bloch_compose(BlochForm(np.asarray(mA, float), np.asarray(mB, float), np.asarray(t, float)),
                         label="bloch")


def build_dense(entries: Sequence[Any]) -> TwoQubitState:
    """Density matrix from 16 row-major complex entries or 4 rows of 4."""
    flat: List[Any] = []
    for item in entries:
        # rows are lists of [re, im] pairs; a bare pair is one entry
        if isinstance(item, (list, tuple)) and item and isinstance(item[0], (list, tuple)):
            flat.extend(item)
        elif isinstance(item, (list, tuple)) and len(item) == 4:
            flat.extend(item)
        else:
            flat.append(item)
    if len(flat) != 16:
        raise ValidationError(f"dense state needs 16 entries, got {len(flat)}")
    rho = np.array([parse_complex(x) for x in flat], dtype=np.complex128).reshape(4, 4)
    return TwoQubitState(rho, label="dense")


def build_product(mA: Sequence[float], mB: Sequence[float]) -> TwoQubitState:
    mA = np.asarray(mA, float)
    mB = np.asarray(mB, float)
    if np.linalg.norm(mA) > 1 + 1e-12 or np.linalg.norm(mB) > 1 + 1e-12:
        raise ValidationError("product-state Bloch vectors must have norm <= 1")
    state = build_bloch(mA, mB, np.outer(mA, mB))
    return TwoQubitState(state.rho, label="product")


class StateFamilyMetadata:
    """
    Metadata for a state family.

    Stores the display name, a description and the parameter list used
    when building states from files.
    """

    def __init__(self,
                 family: str,
                 display_name: str,
                 description: str = "",
                 params: List[Dict[str, Any]] = None):
        self.family = family
        self.display_name = display_name
        self.description = description
        self.params = params or []

    def __str__(self):
        return f"{self.display_name} ({self.family})"


class StateFamilyRegistry:
    """Registry mapping family names to builders and metadata."""

    def __init__(self):
        self._builders: Dict[str, Callable[..., TwoQubitState]] = {}
        self._metadata: Dict[str, StateFamilyMetadata] = {}

    def register_family(self,
                        family: str,
                        builder: Callable[..., TwoQubitState],
                        metadata: StateFamilyMetadata = None) -> None:
        """
        Register a state family.

        Args:
            family: Name used in files and on the command line
            builder: Callable taking the family parameters as keywords
            metadata: Optional description of the family
        """
        self._builders[family] = builder
        if metadata is None:
            metadata = StateFamilyMetadata(family, family.title(), builder.__doc__ or "")
        self._metadata[family] = metadata
        logger.debug("Registered state family: %s", family)

    def get_builder(self, family: str) -> Optional[Callable[..., TwoQubitState]]:
        return self._builders.get(family)

    def get_metadata(self, family: str) -> Optional[StateFamilyMetadata]:
        return self._metadata.get(family)

    def families(self) -> List[str]:
        return sorted(self._builders)

    def family_exists(self, family: str) -> bool:
        return family in self._builders


class StateFactory:
    """
    Factory for two-qubit source states.

    Builds states by family name (bell, werner, pure, bloch, dense,
    product) and from the dictionaries stored in network files.
    """

    def __init__(self):
        self._registry = StateFamilyRegistry()
        self._register_built_in_families()

    def _register_built_in_families(self):
        self._registry.register_family(
            "bell", build_bell,
            StateFamilyMetadata("bell", "Bell state", "One of the four maximally entangled Bell states",
                                [{"name": "label", "type": "str", "default": "phi+"}]))
        self._registry.register_family(
            "werner", build_werner,
            StateFamilyMetadata("werner", "Werner state", "v |bell><bell| + (1 - v) 1/4",
                                [{"name": "v", "type": "float"},
                                 {"name": "base", "type": "str", "default": DEFAULT_WERNER_BASE}]))
        self._registry.register_family(
            "pure", build_pure,
            StateFamilyMetadata("pure", "Pure state", "Normalized pure state from 4 complex amplitudes",
                                [{"name": "amplitudes", "type": "complex[4]"}]))
        self._registry.register_family(
            "bloch", build_bloch,
            StateFamilyMetadata("bloch", "Bloch form", "State from local Bloch vectors and correlation matrix",
                                [{"name": "mA", "type": "float[3]"}, {"name": "mB", "type": "float[3]"},
                                 {"name": "t", "type": "float[3][3]"}]))
        self._registry.register_family(
            "dense", build_dense,
            StateFamilyMetadata("dense", "Dense matrix", "Explicit 4x4 density matrix",
                                [{"name": "entries", "type": "complex[16]"}]))
        self._registry.register_family(
            "product", build_product,
            StateFamilyMetadata("product", "Product state", "Uncorrelated product of two qubit states",
                                [{"name": "mA", "type": "float[3]"}, {"name": "mB", "type": "float[3]"}]))

    @property
    def registry(self) -> StateFamilyRegistry:
        return self._registry

    def create(self, family: str, **params) -> TwoQubitState:
        """
        Build a state of the named family.

        Args:
            family: Registered family name
            **params: Family parameters

        Returns:
            Validated TwoQubitState

        Raises:
            ValidationError: For unknown families or bad parameters
        """
        builder = self._registry.get_builder(family)
        if builder is None:
            raise ValidationError(f"unknown state family {family!r}; expected one of {self._registry.families()}")
        try:
            return builder(**params)
        except TypeError as e:
            raise ValidationError(f"bad parameters for state family {family!r}: {e}") from e

    def create_from_dict(self, state_data: Dict[str, Any], field: str = "source") -> TwoQubitState:
        """
        Build a state from a {"family": ..., "params": {...}} dictionary.

        Raises:
            SpecFileError: If the dictionary is malformed or the state invalid
        """
        if not isinstance(state_data, dict):
            raise SpecFileError("state spec must be an object", field=field)
        family = state_data.get("family")
        if not family:
            raise SpecFileError("state spec missing 'family'", field=f"{field}.family")
        params = state_data.get("params", {})
        if not isinstance(params, dict):
            raise SpecFileError("state 'params' must be an object", field=f"{field}.params")
        try:
            return self.create(family, **params)
        except NetworkAnalysisError as e:
            raise SpecFileError(str(e), field=field) from e


_DEFAULT_FACTORY = StateFactory()


def make_state(family: str, **params) -> TwoQubitState:
    """Build a state with the default factory, e.g. make_state("werner", v=0.6)."""
    return _DEFAULT_FACTORY.create(family, **params)


def default_factory() -> StateFactory:
    return _DEFAULT_FACTORY


def state_to_dict(state: TwoQubitState) -> Dict[str, Any]:
    """
    File spec of any state as a "dense" family entry.

    Entries are written as rows of [re, im] pairs; create_from_dict reads
    them back to the same density matrix.
    """
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(state.rho)]
    return {"family": "dense", "params": {"entries": rows}}
