"""Closed-form effectiveness parameters, loss limits and eavesdropping conditions.

H is the sifted-key length per qubit sent and K the sifted-key length per photon
sent. For B92 the conclusive probability per qubit is (1 - s^2)/2 with Bob's random
projector pair (PVM) and 1 - s with the optimal unambiguous POVM, where s is the
modulus of the signal overlap; K divides it by the mean photon number per qubit,
(sin^2(theta0) + sin^2(theta1))/2.

Differences such as 1 - s and 1 - s^2 are evaluated in cancellation-free forms so
the identities K = 2cos^2(theta) and K_max^POVM = 2 hold to round-off even for small
angles.
"""

import cmath
import math

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect

from vopqkd.errors import (
    DegenerateError,
    InvalidArgumentError,
    NoUsableRegimeError,
    RootBracketError,
)
from vopqkd.models import DetectionStrategy, Encoding, OutcomeLabel
from vopqkd.quantum.channel import amplitude_damp_many, kraus_operators, length_of_gamma
from vopqkd.quantum.hilbert import (
    ALGEBRA_TOL,
    ComplexMatrix,
    PureState,
    bb84_bases,
    density_of,
    make_state,
    mean_photon_number,
    overlap,
    state_from_cos2,
)
from vopqkd.quantum.measurement import pvm_for_choice, unambiguous_povm
from vopqkd.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_SCAN_STEP = 1e-3
DEFAULT_XTOL = 1e-9


def _check_probability(name: str, value: float) -> float:
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")
    return value


def _distinguishability(psi0: PureState, psi1: PureState) -> float:
    """1 - |<psi0|psi1>|^2, computed as |<psi0_perp|psi1>|^2."""
    term0 = cmath.exp(1j * psi0.phi) * math.sin(psi0.theta) * math.cos(psi1.theta)
    term1 = cmath.exp(1j * psi1.phi) * math.cos(psi0.theta) * math.sin(psi1.theta)
    return min(abs(term0 - term1) ** 2, 1.0)


def _conclusive_ideal(psi0: PureState, psi1: PureState, strategy: DetectionStrategy) -> float:
    d = _distinguishability(psi0, psi1)
    if strategy is DetectionStrategy.PVM:
        return d / 2
    return d / (1.0 + abs(overlap(psi0, psi1)))


def h_b92(psi0: PureState, psi1: PureState, strategy: DetectionStrategy) -> float:
    """Sifted bits per qubit for lossless B92: (1 - s^2)/2 (PVM) or 1 - s (POVM)."""
    return _conclusive_ideal(psi0, psi1, strategy)


def _photon_denominator(theta0: float, theta1: float) -> float:
    denominator = math.sin(theta0) ** 2 + math.sin(theta1) ** 2
    if denominator == 0.0:
        raise DegenerateError(
            "theta0 = theta1 = 0 sends no photons; K tends to 2 along theta0 = +/-theta1"
        )
    return denominator


def k_b92(
    theta0: float,
    theta1: float,
    phi0: float,
    phi1: float,
    strategy: DetectionStrategy,
) -> float:
    """Sifted bits per photon for lossless B92.

    Raises:
        DegenerateError: At theta0 = theta1 = 0 (0/0).
    """
    denominator = _photon_denominator(theta0, theta1)
    psi0, psi1 = make_state(theta0, phi0), make_state(theta1, phi1)
    return _conclusive_ideal(psi0, psi1, strategy) / (denominator / 2)


def kmax_surface(theta0: float, theta1: float, strategy: DetectionStrategy) -> float:
    """K maximised over the phases for fixed (theta0, theta1).

    PVM: [1 - (|c0 c1| - |s0 s1|)^2] / (s0^2 + s1^2)
    POVM: 2 [1 - ||c0 c1| - |s0 s1||] / (s0^2 + s1^2)

    With a_j = atan2(|s_j|, |c_j|), |c0 c1| - |s0 s1| = cos(a0 + a1), which gives both
    numerators without cancellation.

    Raises:
        DegenerateError: At theta0 = theta1 = 0.
    """
    denominator = _photon_denominator(theta0, theta1)
    a0 = math.atan2(abs(math.sin(theta0)), abs(math.cos(theta0)))
    a1 = math.atan2(abs(math.sin(theta1)), abs(math.cos(theta1)))
    spread = math.sin(a0 + a1) ** 2
    if strategy is DetectionStrategy.PVM:
        return spread / denominator
    return 2 * spread / (1.0 + abs(math.cos(a0 + a1))) / denominator


def optimal_phase_check(theta0: float, theta1: float) -> float:
    """Phase difference phi0 - phi1 that maximises K.

    0 when cos(theta0)cos(theta1) and sin(theta0)sin(theta1) have opposite signs, pi when
    they share a sign. When either product vanishes the phase is irrelevant and 0 is
    returned.
    """
    product = math.cos(theta0) * math.cos(theta1) * math.sin(theta0) * math.sin(theta1)
    return math.pi if product > 0.0 else 0.0


def _concluding_operators(
    psi0: PureState, psi1: PureState, strategy: DetectionStrategy
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Operators whose click concludes psi0 and psi1 respectively."""
    if strategy is DetectionStrategy.PVM:
        # A click on 1 - |psi1><psi1| concludes psi0 and vice versa.
        return (
            pvm_for_choice(psi0, psi1, 1).operator(OutcomeLabel.CONCLUDE_STATE_0),
            pvm_for_choice(psi0, psi1, 0).operator(OutcomeLabel.CONCLUDE_STATE_1),
        )
    povm = unambiguous_povm(psi0, psi1)
    return (
        povm.operator(OutcomeLabel.CONCLUDE_STATE_0),
        povm.operator(OutcomeLabel.CONCLUDE_STATE_1),
    )


def _identification_traces(
    psi0: PureState,
    psi1: PureState,
    gammas: NDArray[np.float64],
    strategy: DetectionStrategy,
) -> NDArray[np.float64]:
    """traces[j, k, n] = Tr(rho'_j C_k) at gammas[n], C_k the operator concluding psi_k."""
    concluding = _concluding_operators(psi0, psi1, strategy)
    damped = [amplitude_damp_many(density_of(psi), gammas) for psi in (psi0, psi1)]
    return np.array(
        [[np.einsum("nij,ji->n", rho, op).real for op in concluding] for rho in damped]
    )


def identification_margin_curve(
    psi0: PureState,
    psi1: PureState,
    gammas: NDArray[np.float64],
    strategy: DetectionStrategy,
) -> NDArray[np.float64]:
    """Vectorised `identification_margin` over an array of loss probabilities."""
    t = _identification_traces(psi0, psi1, np.asarray(gammas, dtype=np.float64), strategy)
    correct = np.minimum(t[0, 0], t[1, 1])
    incorrect = np.maximum(t[0, 1], t[1, 0])
    margin: NDArray[np.float64] = correct - incorrect
    return margin


def identification_margin(
    psi0: PureState, psi1: PureState, gamma: float, strategy: DetectionStrategy
) -> float:
    """min(correct_0, correct_1) - max(incorrect_0, incorrect_1) after loss gamma.

    correct_j is the probability that the damped psi_j is concluded as psi_j,
    incorrect_j that it is concluded as psi_{1-j}. A positive margin means correct
    identification dominates and the scheme is usable.
    """
    _check_probability("gamma", gamma)
    return float(identification_margin_curve(psi0, psi1, np.array([gamma]), strategy)[0])


def gamma_max(
    psi0: PureState,
    psi1: PureState,
    strategy: DetectionStrategy,
    scan_step: float = DEFAULT_SCAN_STEP,
    xtol: float = DEFAULT_XTOL,
) -> float:
    """Largest loss probability at which correct identification still dominates.

    The margin is scanned on a grid of `scan_step` to confirm a single sign change,
    which is then refined by bisection to `xtol`. Returns 1 when the margin stays
    non-negative on all of [0, 1].

    Raises:
        NoUsableRegimeError: If the margin is not positive at zero loss.
        RootBracketError: If the margin changes sign more than once.
    """
    n_intervals = max(2, round(1.0 / scan_step))
    grid = np.linspace(0.0, 1.0, n_intervals + 1)
    margins = identification_margin_curve(psi0, psi1, grid, strategy)
    if margins[0] <= 0.0:
        raise NoUsableRegimeError(
            f"identification margin {margins[0]:.3g} is not positive at zero loss"
        )

    usable = margins > 0.0
    # Equal-angle pairs only reach a zero margin at total loss.
    if abs(margins[-1]) <= ALGEBRA_TOL:
        usable[-1] = True
    flips = np.flatnonzero(usable[:-1] != usable[1:])
    if flips.size == 0:
        return 1.0
    if flips.size > 1:
        raise RootBracketError(
            f"identification margin changes sign {flips.size} times on [0, 1]"
        )

    i = int(flips[0])
    lo, hi = float(grid[i]), float(grid[i + 1])
    logger.debug("Bracketed gamma_max", strategy=strategy.value, lo=lo, hi=hi)
    if margins[i + 1] == 0.0:
        return hi
    root: float = bisect(
        lambda g: identification_margin(psi0, psi1, g, strategy), lo, hi, xtol=xtol
    )
    return root


def l_max(
    psi0: PureState,
    psi1: PureState,
    alpha: float,
    strategy: DetectionStrategy,
    scan_step: float = DEFAULT_SCAN_STEP,
    xtol: float = DEFAULT_XTOL,
) -> float:
    """Longest fiber (km) over which correct identification still dominates.

    Raises:
        InvalidArgumentError: If alpha is not positive.
        InfiniteDistanceError: If gamma_max is 1.
    """
    if not alpha > 0.0:
        raise InvalidArgumentError(f"loss coefficient must be positive, got {alpha}")
    return length_of_gamma(alpha, gamma_max(psi0, psi1, strategy, scan_step, xtol))


def k_with_loss(k_ideal: float, gamma: float) -> float:
    """K reduced by the factor (1 - gamma) that photon loss applies to the key rate."""
    return (1.0 - _check_probability("gamma", gamma)) * k_ideal


def gamma_zero(psi0: PureState, psi1: PureState, strategy: DetectionStrategy) -> float:
    """Loss probability at which (1 - gamma) K_ideal falls to 1; 0 when K_ideal <= 1.

    Raises:
        DegenerateError: If K_ideal is 0 or the pair sends no photons.
    """
    k_ideal = k_b92(psi0.theta, psi1.theta, psi0.phi, psi1.phi, strategy)
    if k_ideal == 0.0:
        raise DegenerateError("the signal pair yields no sifted key")
    return 1.0 - 1.0 / k_ideal if k_ideal > 1.0 else 0.0


def conclusive_probability(
    psi0: PureState, psi1: PureState, gamma: float, strategy: DetectionStrategy
) -> float:
    """Per-signal probability that Bob's outcome is conclusive after loss gamma.

    Averaged over Alice's two equiprobable states and, for PVM, Bob's two settings.
    """
    gammas = np.array([_check_probability("gamma", gamma)])
    t = _identification_traces(psi0, psi1, gammas, strategy)
    total = float(t[:, :, 0].sum())
    return total / 4 if strategy is DetectionStrategy.PVM else total / 2


def error_probability(
    psi0: PureState, psi1: PureState, gamma: float, strategy: DetectionStrategy
) -> float:
    """Per-signal probability of a conclusive but wrong outcome after loss gamma."""
    gammas = np.array([_check_probability("gamma", gamma)])
    t = _identification_traces(psi0, psi1, gammas, strategy)
    total = float(t[0, 1, 0] + t[1, 0, 0])
    return total / 4 if strategy is DetectionStrategy.PVM else total / 2


def arrived_probabilities(
    psi0: PureState,
    psi1: PureState,
    gamma: float,
    strategy: DetectionStrategy,
    encoding: Encoding = Encoding.VOPQ,
) -> tuple[float, float]:
    """Per-signal probabilities (correct, wrong) of a conclusive outcome on an arrival.

    Only signals whose photon survives reach Bob. For VOPQ the arriving branch is
    K0 rho K0^dagger, whose trace 1 - gamma*sin^2(theta) is the arrival probability;
    a polarization-like signal arrives undisturbed with probability 1 - gamma.
    """
    gamma = _check_probability("gamma", gamma)
    c0, c1 = _concluding_operators(psi0, psi1, strategy)
    if encoding is Encoding.VOPQ:
        k0, _ = kraus_operators(gamma)
        branches = [k0 @ density_of(psi).entries @ k0.conj().T for psi in (psi0, psi1)]
    else:
        branches = [(1.0 - gamma) * density_of(psi).entries for psi in (psi0, psi1)]
    t = [[float(np.trace(rho @ op).real) for op in (c0, c1)] for rho in branches]
    norm = 4 if strategy is DetectionStrategy.PVM else 2
    return (t[0][0] + t[1][1]) / norm, (t[0][1] + t[1][0]) / norm


def arrived_correct_factor(gamma: float) -> float:
    """(1 + sqrt(1 - gamma))^2 / 4, the share of K_ideal left in correct arrived bits.

    Holds for the symmetric VOPQ pair under either strategy, and lies between
    1 - gamma and 1.
    """
    return (1.0 + math.sqrt(1.0 - _check_probability("gamma", gamma))) ** 2 / 4


def eve_inconclusive_prob(theta: float) -> float:
    """Eve's inconclusive probability |2cos^2(theta) - 1|.

    Defined for the pair cos(theta)|0> +/- sin(theta)|1>, where it equals the overlap.
    """
    return abs(math.cos(2 * theta))


def eve_detectability(theta: float, gamma: float) -> bool:
    """True when channel loss is below Eve's blocking rate, so her blocking shows."""
    return _check_probability("gamma", gamma) < eve_inconclusive_prob(theta)


def key_rate(r: float, theta: float) -> float:
    """Sifted key rate r sin^2(2 theta)/2 for raw qubit rate r on the symmetric pair.

    Raises:
        InvalidArgumentError: If r is negative.
    """
    if not (math.isfinite(r) and r >= 0.0):
        raise InvalidArgumentError(f"raw key rate must be non-negative, got {r}")
    return r * math.sin(2 * theta) ** 2 / 2


def bb84_effectiveness(encoding: Encoding) -> tuple[float, float]:
    """(H, K) for lossless BB84; bases agree half the time."""
    h = 0.5
    if encoding is Encoding.POLARIZATION:
        return h, h
    alphabet = [state for basis in bb84_bases() for state in basis]
    mean_photons = sum(mean_photon_number(s) for s in alphabet) / len(alphabet)
    return h, h / mean_photons


def curve_pair(cos2_theta0: float, cos2_theta1: float) -> tuple[PureState, PureState]:
    """The pair cos(theta0)|0> + sin(theta0)|1>, cos(theta1)|0> - sin(theta1)|1>."""
    return state_from_cos2(cos2_theta0, 1), state_from_cos2(cos2_theta1, -1)
