"""
Measurement settings for the end parties of chain and star networks.

Every end party measures dichotomic observables axis . sigma with
outcomes +-1. Chain middle parties are fixed to sigma_z x sigma_z (I) and
sigma_x x sigma_x (J); the star's central node uses the generalized Bell
observables from bell_basis.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.linalg.matkernel import PAULI_X, PAULI_Z, ComplexMatrix, kron, spin_operator
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-12

# Fixed joint observables of the chain's middle parties
MIDDLE_I_OBSERVABLE = kron(PAULI_Z, PAULI_Z)
MIDDLE_J_OBSERVABLE = kron(PAULI_X, PAULI_X)


def sphere_point(theta: float, phi: float) -> np.ndarray:
    """Unit vector with polar angle theta and azimuth phi."""
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def euler_frame(phi: float, theta: float, psi: float) -> np.ndarray:
    """Rotation Rz(phi) Ry(theta) Rz(psi); its columns form an orthonormal frame."""
    def rz(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = np.cos(theta), np.sin(theta)
    ry = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return rz(phi) @ ry @ rz(psi)


@dataclass(frozen=True, eq=False)
class DichotomicSetting:
    """A +-1 valued observable axis . sigma."""

    axis: np.ndarray

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64)
        if axis.shape != (3,) or not np.all(np.isfinite(axis)):
            raise ValidationError(f"setting axis must be a finite 3-vector, got {axis!r}")
        norm = float(np.linalg.norm(axis))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValidationError(f"setting axis must be a unit vector, norm is {norm:.15g}")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "DichotomicSetting":
        vector = np.asarray(vector, dtype=np.float64)
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            raise ValidationError("cannot build a setting from the zero vector")
        return cls(vector / norm)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "DichotomicSetting":
        return cls(sphere_point(theta, phi))

    def observable(self) -> ComplexMatrix:
        return spin_operator(self.axis)

    def to_list(self):
        return [float(x) for x in self.axis]


@dataclass(frozen=True)
class ChainSettings:
    """
    Settings of the two end parties of a chain.

    a0, a1 belong to A_1; c0, c1 belong to A_{n+1}.
    """

    a0: DichotomicSetting
    a1: DichotomicSetting
    c0: DichotomicSetting
    c1: DichotomicSetting

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "ChainSettings":
        """Eight angles (theta, phi) for a0, a1, c0, c1 in that order."""
        if len(angles) != 8:
            raise ValidationError(f"chain settings need 8 angles, got {len(angles)}")
        return cls(*(DichotomicSetting.from_angles(angles[2 * k], angles[2 * k + 1]) for k in range(4)))

    @classmethod
    def coplanar(cls, alpha: float, alpha_prime: float, theta: float, theta_prime: float) -> "ChainSettings":
        """x-z plane settings (sin, 0, cos) for a, a', c, c'."""
        def xz(angle):
            return DichotomicSetting(np.array([np.sin(angle), 0.0, np.cos(angle)]))

        return cls(xz(alpha), xz(alpha_prime), xz(theta), xz(theta_prime))

    @classmethod
    def symmetric(cls, alpha: float = np.pi / 4, theta: float = np.pi / 4) -> "ChainSettings":
        """The optimal family for aligned sources: a, a' = (+-sin alpha, 0, cos alpha)."""
        return cls.coplanar(alpha, -alpha, theta, -theta)

    def to_dict(self):
        return {"a0": self.a0.to_list(), "a1": self.a1.to_list(),
                "c0": self.c0.to_list(), "c1": self.c1.to_list()}


@dataclass(frozen=True)
class ChshSettings:
    """Alice's (a0, a1) and Bob's (b0, b1) for a single CHSH test."""

    a0: DichotomicSetting
    a1: DichotomicSetting
    b0: DichotomicSetting
    b1: DichotomicSetting

    def to_dict(self):
        return {"a0": self.a0.to_list(), "a1": self.a1.to_list(),
                "b0": self.b0.to_list(), "b1": self.b1.to_list()}


@dataclass(frozen=True, eq=False)
class StarSettings:
    """
    Rotated-basis settings of the star's end parties.

    Alice_i measures A_0 = cos(alpha_i) n.sigma + sin(alpha_i) n'.sigma and
    A_1 = cos(alpha_i) n.sigma - sin(alpha_i) n'.sigma, so
    A_0 + A_1 = 2 cos(alpha_i) n.sigma and A_0 - A_1 = 2 sin(alpha_i) n'.sigma.
    """

    alpha: Tuple[float, ...]
    nhat: np.ndarray
    nprime: np.ndarray

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        nhat = np.asarray(self.nhat, dtype=np.float64)
        nprime = np.asarray(self.nprime, dtype=np.float64)
        if not alpha:
            raise ValidationError("star settings need at least one angle")
        if nhat.shape != (3,) or nprime.shape != (3,):
            raise ValidationError("n and n' must be 3-vectors")
        for name, vector in (("n", nhat), ("n'", nprime)):
            if abs(np.linalg.norm(vector) - 1.0) > UNIT_TOL:
                raise ValidationError(f"{name} must be a unit vector")
        if abs(float(nhat @ nprime)) > UNIT_TOL:
            raise ValidationError(f"n and n' must be orthogonal (n.n' = {float(nhat @ nprime):.3e})")
        nhat.setflags(write=False)
        nprime.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "nhat", nhat)
        object.__setattr__(self, "nprime", nprime)

    @classmethod
    def from_frame(cls, alpha: Sequence[float], phi: float, theta: float, psi: float) -> "StarSettings":
        """Settings whose n, n' are the first two columns of an Euler rotation."""
        frame = euler_frame(phi, theta, psi)
        return cls(tuple(alpha), frame[:, 0], frame[:, 1])

    @classmethod
    def uniform(cls, n: int, alpha: float, nhat: Sequence[float], nprime: Sequence[float]) -> "StarSettings":
        return cls((alpha,) * n, np.asarray(nhat, float), np.asarray(nprime, float))

    @property
    def n(self) -> int:
        return len(self.alpha)

    def settings(self, party: int) -> Tuple[DichotomicSetting, DichotomicSetting]:
        """(A_0, A_1) of Alice_party, 0-based."""
        a = self.alpha[party]
        return (DichotomicSetting(np.cos(a) * self.nhat + np.sin(a) * self.nprime),
                DichotomicSetting(np.cos(a) * self.nhat - np.sin(a) * self.nprime))

    def observables(self, party: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
        a0, a1 = self.settings(party)
        return a0.observable(), a1.observable()

    def sum_difference(self, party: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
        """(A_0 + A_1, A_0 - A_1) of Alice_party, 0-based."""
        a = self.alpha[party]
        return (2.0 * np.cos(a) * spin_operator(self.nhat),
                2.0 * np.sin(a) * spin_operator(self.nprime))

    def to_dict(self):
        return {"alpha": list(self.alpha), "n": [float(x) for x in self.nhat],
                "n_prime": [float(x) for x in self.nprime]}


def chain_settings_from_star(settings: StarSettings) -> ChainSettings:
    """
    Chain settings equivalent to two-party star settings.

    Alice_1's pair becomes (a0, a1) and Alice_2's pair becomes (c0, c1).
    """
    if settings.n != 2:
        raise ValidationError(f"only 2-party star settings map onto a chain, got n={settings.n}")
    a0, a1 = settings.settings(0)
    c0, c1 = settings.settings(1)
    return ChainSettings(a0, a1, c0, c1)
