"""B92 detection strategies, Born-rule probabilities and outcome sampling.

Two strategies discriminate the signal pair (psi0, psi1):

- PVM: Bob picks one of the projectors P_j = 1 - |psi_j><psi_j| at random. A click on
  P_j excludes psi_j and therefore concludes psi_{1-j}.
- POVM: the equal-prior optimal unambiguous discrimination measurement
  {E_0, E_1, E_?} with E_j = |psi_{1-j}^perp><psi_{1-j}^perp| / (1 + s), s = |<psi0|psi1>|.

BB84 uses the plain two-outcome basis measurement from `basis_pvm`.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vopqkd.errors import InvalidArgumentError
from vopqkd.models import MeasurementKind, OutcomeLabel
from vopqkd.quantum.hilbert import (
    ALGEBRA_TOL,
    PSD_TOL,
    ComplexMatrix,
    DensityMatrix,
    PureState,
    is_same_ray,
    orthogonal_complement,
    overlap,
    projector,
)

N_OUTCOMES = len(OutcomeLabel)

_EXPECTED_LABELS: dict[MeasurementKind, frozenset[OutcomeLabel]] = {
    MeasurementKind.PVM_CHOICE_0: frozenset(
        {OutcomeLabel.CONCLUDE_STATE_1, OutcomeLabel.INCONCLUSIVE}
    ),
    MeasurementKind.PVM_CHOICE_1: frozenset(
        {OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.INCONCLUSIVE}
    ),
    MeasurementKind.POVM: frozenset(OutcomeLabel),
    MeasurementKind.BASIS: frozenset(
        {OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.CONCLUDE_STATE_1}
    ),
}


@dataclass(frozen=True, eq=False)
class MeasurementOperatorSet:
    """Labelled positive operators summing to the identity."""

    kind: MeasurementKind
    labels: tuple[OutcomeLabel, ...]
    operators: NDArray[np.complex128]

    def __post_init__(self) -> None:
        ops = np.array(self.operators, dtype=np.complex128)
        if ops.ndim != 3 or ops.shape[1:] != (2, 2) or ops.shape[0] != len(self.labels):
            raise InvalidArgumentError("operators must be a stack of 2x2 matrices, one per label")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidArgumentError("outcome labels must be distinct")
        if frozenset(self.labels) != _EXPECTED_LABELS[self.kind]:
            raise InvalidArgumentError(
                f"labels {sorted(self.labels)} do not fit a {self.kind.name} measurement"
            )
        for label, op in zip(self.labels, ops):
            if np.max(np.abs(op - op.conj().T)) > PSD_TOL:
                raise InvalidArgumentError(f"operator for {label.name} is not Hermitian")
            if np.min(np.linalg.eigvalsh(op)) < -PSD_TOL:
                raise InvalidArgumentError(f"operator for {label.name} is not positive")
        if np.max(np.abs(ops.sum(axis=0) - np.eye(2))) > PSD_TOL:
            raise InvalidArgumentError("operators do not sum to the identity")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    def operator(self, label: OutcomeLabel) -> ComplexMatrix:
        """The operator for `label`, or the zero matrix if the set never reports it."""
        for own, op in zip(self.labels, self.operators):
            if own is label:
                return op
        return np.zeros((2, 2), dtype=np.complex128)

    def full_stack(self) -> NDArray[np.complex128]:
        """Operators indexed by outcome code, zero for labels this set lacks."""
        return np.stack([self.operator(label) for label in OutcomeLabel])


def _signal_overlap(psi0: PureState, psi1: PureState) -> float:
    if is_same_ray(psi0, psi1):
        raise InvalidArgumentError("signal states are identical up to a global phase")
    return abs(overlap(psi0, psi1))


def pvm_for_choice(psi0: PureState, psi1: PureState, choice: int) -> MeasurementOperatorSet:
    """Bob's projective measurement for setting `choice`.

    Returns {(ConcludeState_{1-j}, 1 - |psi_j><psi_j|), (Inconclusive, |psi_j><psi_j|)}.

    Raises:
        InvalidArgumentError: If the states coincide or choice is not 0 or 1.
    """
    if choice not in (0, 1):
        raise InvalidArgumentError(f"projector choice must be 0 or 1, got {choice}")
    _signal_overlap(psi0, psi1)
    excluded = projector((psi0, psi1)[choice])
    return MeasurementOperatorSet(
        kind=MeasurementKind(choice),
        labels=(OutcomeLabel(1 - choice), OutcomeLabel.INCONCLUSIVE),
        operators=np.stack([np.eye(2, dtype=np.complex128) - excluded, excluded]),
    )


def unambiguous_povm(psi0: PureState, psi1: PureState) -> MeasurementOperatorSet:
    """The optimal equal-prior unambiguous discrimination measurement.

    Never concludes the wrong state on a pure input, succeeds with probability 1 - s
    and is inconclusive with probability s.

    Raises:
        InvalidArgumentError: If the states are identical or orthogonal to within
            ALGEBRA_TOL.
    """
    s = _signal_overlap(psi0, psi1)
    if s <= ALGEBRA_TOL:
        raise InvalidArgumentError("signal states are orthogonal; discrimination is trivial")
    e0 = projector(orthogonal_complement(psi1)) / (1.0 + s)
    e1 = projector(orthogonal_complement(psi0)) / (1.0 + s)
    e_inconclusive = np.eye(2, dtype=np.complex128) - e0 - e1
    e_inconclusive = (e_inconclusive + e_inconclusive.conj().T) / 2
    return MeasurementOperatorSet(
        kind=MeasurementKind.POVM,
        labels=(
            OutcomeLabel.CONCLUDE_STATE_0,
            OutcomeLabel.CONCLUDE_STATE_1,
            OutcomeLabel.INCONCLUSIVE,
        ),
        operators=np.stack([e0, e1, e_inconclusive]),
    )


def basis_pvm(zero: PureState, one: PureState) -> MeasurementOperatorSet:
    """Two-outcome projective measurement reading `zero` as bit 0 and `one` as bit 1.

    Raises:
        InvalidArgumentError: If the two basis states are not orthogonal.
    """
    if abs(overlap(zero, one)) > ALGEBRA_TOL:
        raise InvalidArgumentError("basis states must be orthogonal")
    return MeasurementOperatorSet(
        kind=MeasurementKind.BASIS,
        labels=(OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.CONCLUDE_STATE_1),
        operators=np.stack([projector(zero), projector(one)]),
    )


def _checked_probabilities(raw: NDArray[np.float64]) -> NDArray[np.float64]:
    """Validate probability rows and clamp round-off into [0, 1]."""
    if not np.all(np.isfinite(raw)):
        raise InvalidArgumentError("probabilities must be finite")
    if np.any(raw < -PSD_TOL) or np.any(raw > 1.0 + PSD_TOL):
        raise InvalidArgumentError("probabilities outside [0, 1] beyond round-off")
    if np.any(np.abs(raw.sum(axis=-1) - 1.0) > PSD_TOL):
        raise InvalidArgumentError("probabilities do not sum to 1")
    return np.clip(raw, 0.0, 1.0)


def outcome_vector(ops: MeasurementOperatorSet, rho: DensityMatrix) -> NDArray[np.float64]:
    """Born probabilities Tr(rho E_k) indexed by outcome code."""
    raw = np.einsum("kij,ji->k", ops.full_stack(), rho.entries).real
    return _checked_probabilities(raw)


def outcome_distribution(
    ops: MeasurementOperatorSet, rho: DensityMatrix
) -> dict[OutcomeLabel, float]:
    """Born probabilities Tr(rho E_k) for every outcome label (0 for absent labels)."""
    vector = outcome_vector(ops, rho)
    return {label: float(vector[label]) for label in OutcomeLabel}


def pure_outcome_vector(ops: MeasurementOperatorSet, state: PureState) -> NDArray[np.float64]:
    """Born probabilities <psi|E_k|psi> indexed by outcome code."""
    a = state.amplitudes
    raw = np.einsum("i,kij,j->k", a.conj(), ops.full_stack(), a).real
    return _checked_probabilities(raw)


def _as_vector(probs: Mapping[OutcomeLabel, float] | Sequence[float]) -> NDArray[np.float64]:
    if isinstance(probs, Mapping):
        return np.array([probs.get(label, 0.0) for label in OutcomeLabel], dtype=np.float64)
    vector = np.asarray(probs, dtype=np.float64)
    if vector.shape != (N_OUTCOMES,):
        raise InvalidArgumentError(f"expected {N_OUTCOMES} probabilities, got {vector.shape}")
    return vector


def sample_outcome(
    probs: Mapping[OutcomeLabel, float] | Sequence[float], rng: np.random.Generator
) -> OutcomeLabel:
    """Draw one outcome by inverse-CDF sampling from a single uniform.

    Raises:
        InvalidArgumentError: If the distribution is malformed.
    """
    vector = _checked_probabilities(_as_vector(probs))
    cdf = np.cumsum(vector)
    cdf[-1] = 1.0
    code = int(np.searchsorted(cdf, rng.random(), side="right"))
    return OutcomeLabel(min(code, N_OUTCOMES - 1))


def sample_outcome_codes(
    rows: NDArray[np.float64], rng: np.random.Generator
) -> NDArray[np.int8]:
    """Vectorised `sample_outcome`: one uniform and one outcome code per row.

    Raises:
        InvalidArgumentError: If rows is not an (n, 3) array of distributions.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != N_OUTCOMES:
        raise InvalidArgumentError(f"expected an (n, {N_OUTCOMES}) array, got {rows.shape}")
    cdf = np.cumsum(_checked_probabilities(rows), axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(rows.shape[0])
    codes = (cdf <= u[:, None]).sum(axis=1)
    return np.minimum(codes, N_OUTCOMES - 1).astype(np.int8)
