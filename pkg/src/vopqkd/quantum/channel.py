"""Amplitude-damping photon loss and the fiber-loss parametrisation.

A photon is lost with probability gamma = 1 - 10^(-alpha*l/10) for a fiber of length
l km with loss coefficient alpha dB/km. Only transmission loss is modelled; detector
inefficiency and dark counts are not.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vopqkd.errors import InfiniteDistanceError, InvalidArgumentError
from vopqkd.quantum.hilbert import (
    ALGEBRA_TOL,
    ComplexMatrix,
    DensityMatrix,
    PureState,
    mean_photon_number,
)

LN10 = math.log(10.0)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (math.isfinite(gamma) and 0.0 <= gamma <= 1.0):
        raise InvalidArgumentError(f"loss probability must lie in [0, 1], got {gamma}")
    return gamma


def gamma_of_length(alpha: float, length: float) -> float:
    """Loss probability 1 - 10^(-alpha*length/10).

    Raises:
        InvalidArgumentError: If alpha or length is negative or not finite.
    """
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise InvalidArgumentError(f"loss coefficient must be non-negative, got {alpha}")
    if not (math.isfinite(length) and length >= 0.0):
        raise InvalidArgumentError(f"fiber length must be non-negative, got {length}")
    return -math.expm1(-alpha * length * LN10 / 10.0)


def length_of_gamma(alpha: float, gamma: float) -> float:
    """Fiber length (km) whose loss probability is gamma.

    Raises:
        InvalidArgumentError: If alpha is not positive or gamma is outside [0, 1].
        InfiniteDistanceError: If gamma is 1.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidArgumentError(f"loss coefficient must be positive, got {alpha}")
    gamma = _check_gamma(gamma)
    if gamma == 1.0:
        raise InfiniteDistanceError("total loss corresponds to an infinite fiber length")
    return -(10.0 / alpha) * math.log1p(-gamma) / LN10


@dataclass(frozen=True)
class LossModel:
    """Photon-loss probability, optionally derived from a fiber (alpha dB/km, length km)."""

    gamma: float
    alpha: float | None = None
    length: float | None = None

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)
        if (self.alpha is None) != (self.length is None):
            raise InvalidArgumentError("alpha and length must be given together")
        if self.alpha is not None and self.length is not None:
            expected = gamma_of_length(self.alpha, self.length)
            if abs(expected - self.gamma) > ALGEBRA_TOL:
                raise InvalidArgumentError(
                    f"gamma {self.gamma} does not match fiber loss {expected}"
                )

    @classmethod
    def lossless(cls) -> "LossModel":
        return cls(0.0)

    @classmethod
    def from_fiber(cls, alpha: float, length: float) -> "LossModel":
        return cls(gamma_of_length(alpha, length), alpha, length)


def amplitude_damp(rho: DensityMatrix, gamma: float) -> DensityMatrix:
    """Apply photon loss with probability gamma.

    The vacuum population gains gamma times the one-photon population, coherences
    shrink by sqrt(1 - gamma) and the one-photon population by (1 - gamma).

    Raises:
        InvalidArgumentError: If gamma is outside [0, 1].
    """
    return DensityMatrix(amplitude_damp_many(rho, np.array([_check_gamma(gamma)]))[0])


def amplitude_damp_many(
    rho: DensityMatrix, gammas: NDArray[np.float64]
) -> NDArray[np.complex128]:
    """Damp one density matrix by each loss probability in `gammas`; shape (n, 2, 2).

    Raises:
        InvalidArgumentError: If any gamma is outside [0, 1].
    """
    g = np.asarray(gammas, dtype=np.float64)
    if g.ndim != 1 or not np.all(np.isfinite(g)) or np.any((g < 0.0) | (g > 1.0)):
        raise InvalidArgumentError("loss probabilities must be a 1-d array within [0, 1]")
    m = rho.entries
    keep = np.sqrt(1.0 - g)
    out = np.empty((g.size, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = m[0, 0] + g * m[1, 1]
    out[:, 0, 1] = keep * m[0, 1]
    out[:, 1, 0] = keep * m[1, 0]
    out[:, 1, 1] = (1.0 - g) * m[1, 1]
    return out


def kraus_operators(gamma: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Kraus pair (no loss, loss) of the damping channel."""
    gamma = _check_gamma(gamma)
    k0 = np.diag([1.0, math.sqrt(1.0 - gamma)]).astype(np.complex128)
    k1 = np.zeros((2, 2), dtype=np.complex128)
    k1[0, 1] = math.sqrt(gamma)
    return k0, k1


def photon_loss_probability(s: PureState, gamma: float) -> float:
    """Probability that the photon of `s` is lost: gamma * sin^2(theta)."""
    return _check_gamma(gamma) * mean_photon_number(s)


def surviving_state(s: PureState, gamma: float) -> PureState:
    """The normalised no-loss branch K0|s> (amplitudes cos(theta), sqrt(1-gamma) sin(theta)).

    Mixing it with the vacuum at weight `photon_loss_probability` reproduces
    `amplitude_damp` of |s><s|.
    """
    keep = math.sqrt(1.0 - _check_gamma(gamma))
    theta = math.atan2(keep * math.sin(s.theta), math.cos(s.theta))
    return PureState(theta, s.phi)
