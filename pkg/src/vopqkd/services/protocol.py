"""Seeded Monte-Carlo engines for BB84 and generalized B92.

Both engines are vectorised over signals. Random draws are taken in a fixed order
from a single `numpy.random.Generator`, so a configuration with a given seed always
produces the same transcript.

Photon loss is sampled as a quantum trajectory of the damping channel. The photon
of a VOPQ signal is lost with probability gamma*sin^2(theta), that of a
polarization-like signal with probability gamma. A lost photon never registers at
Bob and counts as a non-arrival; a surviving signal arrives as the normalised
no-loss branch.
"""

import hashlib
import math
from collections.abc import Iterator
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray
from scipy.stats import binom

from vopqkd.errors import DegenerateError, InvalidArgumentError
from vopqkd.models import (
    DetectionStrategy,
    Encoding,
    EveMode,
    OutcomeLabel,
    ProtocolKind,
    Verdict,
)
from vopqkd.quantum.channel import LossModel, photon_loss_probability, surviving_state
from vopqkd.quantum.hilbert import (
    ALGEBRA_TOL,
    PureState,
    bb84_bases,
    is_same_ray,
    mean_photon_number,
    overlap,
)
from vopqkd.quantum.measurement import (
    MeasurementOperatorSet,
    basis_pvm,
    pure_outcome_vector,
    pvm_for_choice,
    sample_outcome_codes,
    unambiguous_povm,
)
from vopqkd.utils.logging import get_logger

logger = get_logger(__name__)

# Column sentinel for "no value" in int8 columns.
NONE_CODE = -1
UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything that determines a protocol run, including its seed."""

    protocol: ProtocolKind
    encoding: Encoding = Encoding.VOPQ
    detection: DetectionStrategy = DetectionStrategy.PVM
    psi0: PureState | None = None
    psi1: PureState | None = None
    loss: LossModel = field(default_factory=LossModel.lossless)
    eve: EveMode = EveMode.ABSENT
    n_signals: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.n_signals, bool) or int(self.n_signals) != self.n_signals:
            raise InvalidArgumentError(f"n_signals must be an integer, got {self.n_signals!r}")
        if self.n_signals < 1:
            raise InvalidArgumentError(f"n_signals must be at least 1, got {self.n_signals}")
        if not 0 <= self.seed <= UINT64_MAX:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.protocol is ProtocolKind.B92:
            if self.psi0 is None or self.psi1 is None:
                raise InvalidArgumentError("B92 requires both signal states psi0 and psi1")
            if is_same_ray(self.psi0, self.psi1):
                raise InvalidArgumentError("signal states are identical up to a global phase")
            if abs(overlap(self.psi0, self.psi1)) <= ALGEBRA_TOL:
                raise InvalidArgumentError("signal states are orthogonal; B92 needs overlap > 0")
        elif self.eve is not EveMode.ABSENT:
            raise InvalidArgumentError("the intercept-resend attacker is modelled for B92 only")

    def signal_pair(self) -> tuple[PureState, PureState]:
        if self.psi0 is None or self.psi1 is None:
            raise InvalidArgumentError("this configuration has no B92 signal pair")
        return self.psi0, self.psi1


@dataclass(frozen=True)
class SignalRecord:
    """One signal's path from Alice to sifting.

    `bob_setting` is the PVM projector choice, the BB84 basis, or 0 for the single
    POVM setting; it is None when nothing reached Bob. `bob_bit` and `error` are set
    only for sifted signals.
    """

    alice_bit: int
    alice_state: PureState
    eve_outcome: OutcomeLabel | None
    delivered: bool
    photon_present: bool
    photon_lost: bool
    bob_setting: int | None
    bob_outcome: OutcomeLabel
    sifted: bool
    bob_bit: int | None
    error: bool | None


@dataclass(frozen=True, eq=False)
class SignalBatch:
    """Signals in flight between Alice and the channel.

    `alphabet` holds every state that can travel; `alice_state` and `in_flight` index
    into it. `eve_outcome` is NONE_CODE where Eve did not measure.
    """

    alphabet: tuple[PureState, ...]
    alice_bit: NDArray[np.int8]
    alice_state: NDArray[np.int8]
    in_flight: NDArray[np.int8]
    delivered: NDArray[np.bool_]
    eve_outcome: NDArray[np.int8]

    @classmethod
    def from_alice(
        cls,
        alphabet: tuple[PureState, ...],
        alice_bit: NDArray[np.int8],
        alice_state: NDArray[np.int8],
    ) -> "SignalBatch":
        n = alice_state.shape[0]
        return cls(
            alphabet=alphabet,
            alice_bit=alice_bit,
            alice_state=alice_state,
            in_flight=alice_state.copy(),
            delivered=np.ones(n, dtype=np.bool_),
            eve_outcome=np.full(n, NONE_CODE, dtype=np.int8),
        )


def apply_eve(
    batch: SignalBatch, psi0: PureState, psi1: PureState, rng: np.random.Generator
) -> SignalBatch:
    """Intercept-resend with unambiguous discrimination.

    Eve measures each delivered signal with the optimal unambiguous POVM for
    (psi0, psi1). On ConcludeState_j she forwards a fresh psi_j; on Inconclusive she
    blocks the signal. Consumes one uniform per signal.
    """
    povm = unambiguous_povm(psi0, psi1)
    try:
        resend = np.array(
            [batch.alphabet.index(psi0), batch.alphabet.index(psi1)], dtype=np.int8
        )
    except ValueError as e:
        raise InvalidArgumentError("Eve's signal pair is not in the batch alphabet") from e
    table = np.stack([pure_outcome_vector(povm, s) for s in batch.alphabet])
    codes = sample_outcome_codes(table[batch.in_flight], rng)
    codes = np.where(batch.delivered, codes, np.int8(NONE_CODE)).astype(np.int8)
    conclusive = (codes == OutcomeLabel.CONCLUDE_STATE_0) | (
        codes == OutcomeLabel.CONCLUDE_STATE_1
    )
    in_flight = np.where(conclusive, resend[np.clip(codes, 0, 1)], batch.in_flight)
    return replace(
        batch,
        in_flight=in_flight.astype(np.int8),
        delivered=batch.delivered & conclusive,
        eve_outcome=codes,
    )


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    """Column-wise ledger of a finished run. Arrays are read-only."""

    config: ProtocolConfig
    alphabet: tuple[PureState, ...]
    photon_weights: NDArray[np.float64]
    alice_bit: NDArray[np.int8]
    alice_state: NDArray[np.int8]
    eve_outcome: NDArray[np.int8]
    delivered: NDArray[np.bool_]
    photon_present: NDArray[np.bool_]
    photon_lost: NDArray[np.bool_]
    bob_setting: NDArray[np.int8]
    bob_outcome: NDArray[np.int8]
    sifted: NDArray[np.bool_]
    bob_bit: NDArray[np.int8]
    error: NDArray[np.bool_]

    def __post_init__(self) -> None:
        lengths = {a.shape for a in self._columns().values()}
        if len(lengths) != 1:
            raise InvalidArgumentError("transcript columns differ in length")
        if self.photon_weights.shape != (len(self.alphabet),):
            raise InvalidArgumentError("one photon weight is needed per alphabet state")
        for column in (self.photon_weights, *self._columns().values()):
            column.setflags(write=False)

    def _columns(self) -> dict[str, NDArray[np.generic]]:
        return {
            "alice_bit": self.alice_bit,
            "alice_state": self.alice_state,
            "eve_outcome": self.eve_outcome,
            "delivered": self.delivered,
            "photon_present": self.photon_present,
            "photon_lost": self.photon_lost,
            "bob_setting": self.bob_setting,
            "bob_outcome": self.bob_outcome,
            "sifted": self.sifted,
            "bob_bit": self.bob_bit,
            "error": self.error,
        }

    @property
    def n_q(self) -> int:
        return int(self.alice_bit.shape[0])

    @property
    def n_p_expected(self) -> float:
        """Sum of the mean photon number of every state Alice sent."""
        return float(self.photon_weights[self.alice_state].sum())

    @property
    def n_p_sampled(self) -> int:
        return int(self.photon_present.sum())

    @property
    def n_b(self) -> int:
        return int(self.sifted.sum())

    @property
    def n_err(self) -> int:
        return int(self.error.sum())

    @property
    def eve_blocked(self) -> int:
        return int((self.eve_outcome == OutcomeLabel.INCONCLUSIVE).sum())

    @property
    def arrived(self) -> NDArray[np.bool_]:
        """Signals that reached Bob: delivered by Eve and not lost in the fiber."""
        return self.delivered & ~self.photon_lost

    @property
    def non_arrivals(self) -> int:
        return int((~self.arrived).sum())

    @property
    def observed_arrival_rate(self) -> float:
        if self.n_q == 0:
            return 0.0
        return 1.0 - self.non_arrivals / self.n_q

    def record(self, i: int) -> SignalRecord:
        eve = int(self.eve_outcome[i])
        setting = int(self.bob_setting[i])
        sifted = bool(self.sifted[i])
        return SignalRecord(
            alice_bit=int(self.alice_bit[i]),
            alice_state=self.alphabet[int(self.alice_state[i])],
            eve_outcome=None if eve == NONE_CODE else OutcomeLabel(eve),
            delivered=bool(self.delivered[i]),
            photon_present=bool(self.photon_present[i]),
            photon_lost=bool(self.photon_lost[i]),
            bob_setting=None if setting == NONE_CODE else setting,
            bob_outcome=OutcomeLabel(int(self.bob_outcome[i])),
            sifted=sifted,
            bob_bit=int(self.bob_bit[i]) if sifted else None,
            error=bool(self.error[i]) if sifted else None,
        )

    def records(self) -> Iterator[SignalRecord]:
        for i in range(self.n_q):
            yield self.record(i)

    def digest(self) -> str:
        """SHA-256 over the configuration and every column."""
        h = hashlib.sha256(repr(self.config).encode())
        for name, column in self._columns().items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(column).tobytes())
        return h.hexdigest()


def _photon_weights(alphabet: tuple[PureState, ...], encoding: Encoding) -> NDArray[np.float64]:
    if encoding is Encoding.POLARIZATION:
        return np.ones(len(alphabet), dtype=np.float64)
    return np.array([mean_photon_number(s) for s in alphabet], dtype=np.float64)


def _bob_table(
    received: list[PureState], settings: list[MeasurementOperatorSet]
) -> NDArray[np.float64]:
    """Outcome vectors indexed by (received state, Bob's setting, outcome code)."""
    return np.stack(
        [np.stack([pure_outcome_vector(ops, s) for ops in settings]) for s in received]
    )


def _run(
    config: ProtocolConfig,
    rng: np.random.Generator,
    alphabet: tuple[PureState, ...],
    alice_bit: NDArray[np.int8],
    alice_state: NDArray[np.int8],
    settings: list[MeasurementOperatorSet],
    alice_setting: NDArray[np.int8] | None,
) -> ProtocolTranscript:
    """Photon draw, Eve, channel, Bob and sifting for signals Alice has prepared."""
    n = config.n_signals
    weights = _photon_weights(alphabet, config.encoding)
    presence = rng.random(n)
    photon_present = presence < weights[alice_state]

    batch = SignalBatch.from_alice(alphabet, alice_bit, alice_state)
    if config.eve is EveMode.INTERCEPT_RESEND:
        psi0, psi1 = config.signal_pair()
        batch = apply_eve(batch, psi0, psi1, rng)
        logger.info(
            "Eve intercepted signals",
            blocked=int((~batch.delivered).sum()),
            n=n,
        )

    # Eve's resends reproduce the state Alice sent, so the photon draw carries over.
    # The loss event reuses the photon uniform: a photon is present with probability
    # sin^2(theta) and lost with gamma*sin^2(theta), so lost implies present.
    gamma = config.loss.gamma
    if config.encoding is Encoding.VOPQ:
        jump = np.array([photon_loss_probability(s, gamma) for s in alphabet])
        received = [surviving_state(s, gamma) for s in alphabet]
    else:
        jump = gamma * weights
        received = list(alphabet)
    lost = batch.delivered & (presence < jump[batch.in_flight])
    registered = batch.delivered & ~lost
    setting = rng.integers(0, len(settings), size=n).astype(np.int8)
    table = _bob_table(received, settings)
    codes = sample_outcome_codes(table[batch.in_flight, setting], rng)

    bob_outcome = np.where(registered, codes, np.int8(OutcomeLabel.INCONCLUSIVE))
    conclusive = bob_outcome != OutcomeLabel.INCONCLUSIVE
    if alice_setting is None:
        sifted = registered & conclusive
    else:
        sifted = registered & (setting == alice_setting)
    bob_bit = np.where(sifted, bob_outcome, np.int8(NONE_CODE)).astype(np.int8)
    error = sifted & (bob_bit != alice_bit)

    transcript = ProtocolTranscript(
        config=config,
        alphabet=alphabet,
        photon_weights=weights,
        alice_bit=alice_bit,
        alice_state=alice_state,
        eve_outcome=batch.eve_outcome,
        delivered=batch.delivered,
        photon_present=photon_present,
        photon_lost=lost,
        bob_setting=np.where(registered, setting, np.int8(NONE_CODE)).astype(np.int8),
        bob_outcome=bob_outcome.astype(np.int8),
        sifted=sifted,
        bob_bit=bob_bit,
        error=error,
    )
    logger.info(
        "Protocol run complete",
        protocol=config.protocol.value,
        encoding=config.encoding.value,
        detection=config.detection.value,
        n=n,
        seed=config.seed,
        n_b=transcript.n_b,
        n_err=transcript.n_err,
    )
    return transcript


def run_b92(config: ProtocolConfig, rng: np.random.Generator | None = None) -> ProtocolTranscript:
    """Run B92: Alice sends psi_b for a uniform bit b; conclusive outcomes are sifted.

    With PVM detection Bob picks projector setting j uniformly; with POVM detection
    he applies the three-outcome unambiguous measurement.

    Raises:
        InvalidArgumentError: If the configuration is not a valid B92 configuration.
    """
    if config.protocol is not ProtocolKind.B92:
        raise InvalidArgumentError(f"run_b92 needs a B92 configuration, got {config.protocol}")
    psi0, psi1 = config.signal_pair()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    logger.info("Starting B92 run", n=config.n_signals, seed=config.seed)

    alice_bit = rng.integers(0, 2, size=config.n_signals).astype(np.int8)
    if config.detection is DetectionStrategy.PVM:
        settings = [pvm_for_choice(psi0, psi1, 0), pvm_for_choice(psi0, psi1, 1)]
    else:
        settings = [unambiguous_povm(psi0, psi1)]
    return _run(config, rng, (psi0, psi1), alice_bit, alice_bit.copy(), settings, None)


def run_bb84(config: ProtocolConfig, rng: np.random.Generator | None = None) -> ProtocolTranscript:
    """Run BB84 over {|0>, |1>} and {|+>, |->}; basis-matched signals are sifted.

    The VOPQ alphabet sends half a photon per qubit on average; the
    polarization-like alphabet sends one.

    Raises:
        InvalidArgumentError: If the configuration is not a BB84 configuration.
    """
    if config.protocol is not ProtocolKind.BB84:
        raise InvalidArgumentError(f"run_bb84 needs a BB84 configuration, got {config.protocol}")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    logger.info("Starting BB84 run", n=config.n_signals, seed=config.seed)

    bases = bb84_bases()
    alphabet = tuple(state for basis in bases for state in basis)
    alice_basis = rng.integers(0, 2, size=config.n_signals).astype(np.int8)
    alice_bit = rng.integers(0, 2, size=config.n_signals).astype(np.int8)
    alice_state = (2 * alice_basis + alice_bit).astype(np.int8)
    settings = [basis_pvm(*basis) for basis in bases]
    return _run(config, rng, alphabet, alice_bit, alice_state, settings, alice_basis)


def run_protocol(
    config: ProtocolConfig, rng: np.random.Generator | None = None
) -> ProtocolTranscript:
    if config.protocol is ProtocolKind.B92:
        return run_b92(config, rng)
    return run_bb84(config, rng)


@dataclass(frozen=True)
class EavesdropperTest:
    """Result of the one-sided loss-excess test."""

    verdict: Verdict
    non_arrivals: int
    n_q: int
    expected_rate: float
    threshold: float
    significance: float

    @property
    def observed_rate(self) -> float:
        return self.non_arrivals / self.n_q


def detect_eavesdropper(
    transcript: ProtocolTranscript, expected_gamma: float, significance: float = 0.01
) -> EavesdropperTest:
    """Flag the run when more signals went missing than honest loss explains.

    Honest non-arrivals are taken as Binomial(n_q, p0) with p0 = expected_gamma, the
    rate of a one-photon signal. VOPQ signals carry fewer photons and lose fewer, so
    the test is conservative for them. The run is suspect when the count exceeds the
    (1 - significance) quantile.

    Raises:
        InvalidArgumentError: On an empty transcript or out-of-range arguments.
    """
    if transcript.n_q == 0:
        raise InvalidArgumentError("cannot test an empty transcript")
    if not (math.isfinite(expected_gamma) and 0.0 <= expected_gamma <= 1.0):
        raise InvalidArgumentError(f"expected_gamma must lie in [0, 1], got {expected_gamma}")
    if not (math.isfinite(significance) and 0.0 < significance < 1.0):
        raise InvalidArgumentError(f"significance must lie in (0, 1), got {significance}")

    n = transcript.n_q
    p0 = expected_gamma
    if p0 == 0.0:
        threshold = 0.0
    elif p0 == 1.0:
        threshold = float(n)
    else:
        threshold = float(binom.ppf(1.0 - significance, n, p0))
    non_arrivals = transcript.non_arrivals
    verdict = Verdict.SUSPECT if non_arrivals > threshold else Verdict.CLEAN
    logger.info(
        "Eavesdropper test",
        verdict=verdict.value,
        non_arrivals=non_arrivals,
        threshold=threshold,
        expected_rate=p0,
    )
    return EavesdropperTest(
        verdict=verdict,
        non_arrivals=non_arrivals,
        n_q=n,
        expected_rate=p0,
        threshold=threshold,
        significance=significance,
    )


@dataclass(frozen=True)
class EffectivenessReport:
    """H and K estimates with their standard errors."""

    h: float
    k_expected: float
    k_sampled: float
    h_se: float
    k_expected_se: float
    k_sampled_se: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.h <= 1.0:
            raise ValueError(f"H = {self.h} violates the one bit per qubit bound")


def effectiveness_report(transcript: ProtocolTranscript) -> EffectivenessReport:
    """H = n_b/n_q, K_expected = n_b/n_p_expected, K_sampled = n_b/max(n_p_sampled, 1).

    Raises:
        InvalidArgumentError: On an empty transcript.
        DegenerateError: If Alice's states carry no photons on average.
    """
    n_q = transcript.n_q
    if n_q == 0:
        raise InvalidArgumentError("cannot report on an empty transcript")
    n_p_expected = transcript.n_p_expected
    if n_p_expected == 0.0:
        raise DegenerateError("Alice's alphabet sends no photons; K is undefined")

    n_b = transcript.n_b
    h = n_b / n_q
    # Agresti-Coull: stays positive when no signal or every signal is sifted.
    n_adj = n_q + 4
    h_adj = (n_b + 2) / n_adj
    h_se = math.sqrt(h_adj * (1.0 - h_adj) / n_adj)

    n_p_sampled = max(transcript.n_p_sampled, 1)
    k_sampled = n_b / n_p_sampled
    # Delta method for the ratio of two per-signal sums.
    residual = transcript.sifted.astype(np.float64) - k_sampled * transcript.photon_present
    delta_se = math.sqrt(float(np.dot(residual, residual))) / n_p_sampled
    k_sampled_se = max(delta_se, h_se * n_q / n_p_sampled)

    return EffectivenessReport(
        h=h,
        k_expected=n_b / n_p_expected,
        k_sampled=k_sampled,
        h_se=h_se,
        k_expected_se=h_se * n_q / n_p_expected,
        k_sampled_se=k_sampled_se,
    )
