"""Two-level Hilbert-space algebra for vacuum-one-photon qubits.

Basis index 0 is the vacuum |0>, index 1 the one-photon state |1>. Pure states are
parametrised as cos(theta)|0> + exp(i*phi) sin(theta)|1>; theta may be negative.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vopqkd.errors import InvalidArgumentError

# Tolerance for algebraic identities (normalisation, hermiticity, trace).
ALGEBRA_TOL = 1e-12
# Tolerance for eigenvalue and positivity checks.
PSD_TOL = 1e-9

ComplexMatrix = NDArray[np.complex128]


@dataclass(frozen=True)
class PureState:
    """A normalised two-level state cos(theta)|0> + exp(i*phi) sin(theta)|1>."""

    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise InvalidArgumentError(
                f"state angles must be finite (theta={self.theta}, phi={self.phi})"
            )

    @property
    def amplitudes(self) -> NDArray[np.complex128]:
        """Amplitudes (a0, a1) on the vacuum and one-photon states."""
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array(
            [math.cos(self.theta), phase * math.sin(self.theta)], dtype=np.complex128
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A 2x2 Hermitian, unit-trace, positive semidefinite matrix.

    The entries are copied on construction and frozen.
    """

    entries: ComplexMatrix

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.complex128)
        if m.shape != (2, 2):
            raise InvalidArgumentError(f"density matrix must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentError("density matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRA_TOL:
            raise InvalidArgumentError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > ALGEBRA_TOL:
            raise InvalidArgumentError(f"density matrix trace {np.trace(m).real!r} is not 1")
        if np.min(np.linalg.eigvalsh(m)) < -ALGEBRA_TOL:
            raise InvalidArgumentError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(2, dtype=np.complex128) / 2)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    @property
    def one_photon_population(self) -> float:
        """Entry (1, 1): the probability of finding one photon."""
        return float(self.entries[1, 1].real)

    def eigenvalues(self) -> NDArray[np.float64]:
        return np.linalg.eigvalsh(self.entries)


def make_state(theta: float, phi: float = 0.0) -> PureState:
    """Build cos(theta)|0> + exp(i*phi) sin(theta)|1>.

    Raises:
        InvalidArgumentError: If either angle is NaN or infinite.
    """
    return PureState(float(theta), float(phi))


def vacuum() -> PureState:
    return PureState(0.0)


def one_photon() -> PureState:
    return PureState(math.pi / 2)


def plus() -> PureState:
    """The symmetric superposition (|0> + |1>)/sqrt(2)."""
    return PureState(math.pi / 4)


def minus() -> PureState:
    """The antisymmetric superposition (|0> - |1>)/sqrt(2)."""
    return PureState(-math.pi / 4)


def bb84_bases() -> tuple[tuple[PureState, PureState], tuple[PureState, PureState]]:
    """The BB84 alphabet as (bit 0, bit 1) pairs: ({|0>, |1>}, {|+>, |->})."""
    return (vacuum(), one_photon()), (plus(), minus())


def symmetric_pair(theta: float) -> tuple[PureState, PureState]:
    """The pair cos(theta)|0> + sin(theta)|1> and cos(theta)|0> - sin(theta)|1>."""
    return make_state(theta), make_state(-theta)


def state_from_cos2(cos2_theta: float, sign: int = 1) -> PureState:
    """State cos(theta)|0> + sign*sin(theta)|1> with theta in [0, pi/2] fixed by cos^2(theta).

    Raises:
        InvalidArgumentError: If cos2_theta is outside [0, 1] or sign is not +1/-1.
    """
    if not 0.0 <= cos2_theta <= 1.0:
        raise InvalidArgumentError(f"cos^2(theta) must lie in [0, 1], got {cos2_theta}")
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
    return make_state(sign * math.acos(math.sqrt(cos2_theta)))


def overlap(a: PureState, b: PureState) -> complex:
    """Inner product <a|b> (conjugate-linear in a)."""
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def is_same_ray(a: PureState, b: PureState) -> bool:
    """True when a and b are equal up to a global phase."""
    return abs(overlap(a, b)) >= 1.0 - ALGEBRA_TOL


def projector(s: PureState) -> ComplexMatrix:
    """The rank-one projector |s><s| as a plain matrix."""
    a = s.amplitudes
    return np.outer(a, a.conj())


def density_of(s: PureState) -> DensityMatrix:
    return DensityMatrix(projector(s))


def orthogonal_complement(s: PureState) -> PureState:
    """The state orthogonal to s.

    Returned as (theta - pi/2, phi), whose amplitudes are exp(i*phi) * (a1*, -a0*): the
    conjugate construction, fixed up to global phase. For phi = 0 this matches
    sin(theta)|0> - cos(theta)|1> up to sign.
    """
    return PureState(s.theta - math.pi / 2, s.phi)


def mean_photon_number(s: PureState) -> float:
    """Expected photon number sin^2(theta) = |a1|^2."""
    return math.sin(s.theta) ** 2
