"""Shared enumerations for vopqkd."""

from enum import Enum, IntEnum


class OutcomeLabel(IntEnum):
    """Outcome of a discrimination measurement.

    Conclusive codes equal the bit they conclude, so a code can be used directly as
    Bob's (or Eve's) key bit.
    """

    CONCLUDE_STATE_0 = 0
    CONCLUDE_STATE_1 = 1
    INCONCLUSIVE = 2

    @property
    def is_conclusive(self) -> bool:
        return self is not OutcomeLabel.INCONCLUSIVE


class DetectionStrategy(str, Enum):
    """Bob's B92 detection: random projector pair or optimal unambiguous POVM."""

    PVM = "pvm"
    POVM = "povm"


class MeasurementKind(IntEnum):
    """Which operator set was applied; stored per signal as Bob's setting."""

    PVM_CHOICE_0 = 0
    PVM_CHOICE_1 = 1
    POVM = 2
    BASIS = 3


class Encoding(str, Enum):
    """How a qubit is carried.

    POLARIZATION stands for any single-photon carrier (polarization, phase); every
    qubit costs one photon and a lost photon never reaches Bob. VOPQ carries the
    qubit in the vacuum/one-photon superposition.
    """

    POLARIZATION = "pol"
    VOPQ = "vopq"


class ProtocolKind(str, Enum):
    BB84 = "bb84"
    B92 = "b92"


class EveMode(str, Enum):
    """ABSENT, or an intercept-resend attacker who blocks her inconclusive outcomes."""

    ABSENT = "absent"
    INTERCEPT_RESEND = "intercept-resend"


class Verdict(str, Enum):
    """Outcome of the loss-excess test for an intercept-resend eavesdropper."""

    CLEAN = "clean"
    SUSPECT = "suspect"
