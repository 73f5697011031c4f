"""Unit tests for detection strategies and outcome sampling."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vopqkd.errors import InvalidArgumentError
from vopqkd.models import MeasurementKind, OutcomeLabel
from vopqkd.quantum.hilbert import (
    PureState,
    density_of,
    make_state,
    one_photon,
    overlap,
    plus,
    symmetric_pair,
    vacuum,
)
from vopqkd.quantum.measurement import (
    MeasurementOperatorSet,
    basis_pvm,
    outcome_distribution,
    pure_outcome_vector,
    pvm_for_choice,
    sample_outcome,
    sample_outcome_codes,
    unambiguous_povm,
)

half_angles = st.floats(min_value=0.01, max_value=math.pi / 4 - 0.01)


class TestPvm:
    """Tests for Bob's projector pair."""

    def test_excludes_the_chosen_state(self) -> None:
        """Should never click when the excluded state is sent."""
        psi0, psi1 = vacuum(), plus()
        ops = pvm_for_choice(psi0, psi1, 0)
        probs = pure_outcome_vector(ops, psi0)
        assert probs[OutcomeLabel.CONCLUDE_STATE_1] < 1e-15
        assert probs[OutcomeLabel.INCONCLUSIVE] == pytest.approx(1.0)

    def test_clicks_with_one_minus_overlap_squared(self) -> None:
        """Should conclude psi1 with probability 1 - s^2 when psi1 is sent."""
        psi0, psi1 = vacuum(), plus()
        probs = pure_outcome_vector(pvm_for_choice(psi0, psi1, 0), psi1)
        assert probs[OutcomeLabel.CONCLUDE_STATE_1] == pytest.approx(0.5, abs=1e-12)
        assert probs[OutcomeLabel.CONCLUDE_STATE_0] == 0.0

    def test_kind_matches_choice(self) -> None:
        """Should record which projector was used."""
        psi0, psi1 = symmetric_pair(0.3)
        assert pvm_for_choice(psi0, psi1, 1).kind is MeasurementKind.PVM_CHOICE_1

    def test_rejects_bad_choice(self) -> None:
        """Should raise for a choice other than 0 or 1."""
        with pytest.raises(InvalidArgumentError, match="choice"):
            pvm_for_choice(vacuum(), plus(), 2)

    def test_rejects_identical_states(self) -> None:
        """Should raise when the states coincide up to phase."""
        with pytest.raises(InvalidArgumentError, match="identical"):
            pvm_for_choice(plus(), make_state(math.pi / 4 + math.pi), 0)


class TestUnambiguousPovm:
    """Tests for the optimal unambiguous discrimination measurement."""

    @given(theta=half_angles)
    def test_never_misidentifies(self, theta: float) -> None:
        """Should give zero probability to the wrong conclusion on pure inputs."""
        psi0, psi1 = symmetric_pair(theta)
        povm = unambiguous_povm(psi0, psi1)
        assert pure_outcome_vector(povm, psi0)[OutcomeLabel.CONCLUDE_STATE_1] < 1e-12
        assert pure_outcome_vector(povm, psi1)[OutcomeLabel.CONCLUDE_STATE_0] < 1e-12

    @given(theta=half_angles)
    def test_inconclusive_probability_equals_overlap(self, theta: float) -> None:
        """Should be inconclusive with probability s and conclusive with 1 - s."""
        psi0, psi1 = symmetric_pair(theta)
        s = abs(overlap(psi0, psi1))
        probs = pure_outcome_vector(unambiguous_povm(psi0, psi1), psi0)
        assert probs[OutcomeLabel.INCONCLUSIVE] == pytest.approx(s, abs=1e-12)
        assert probs[OutcomeLabel.CONCLUDE_STATE_0] == pytest.approx(1 - s, abs=1e-12)

    def test_operators_sum_to_identity(self) -> None:
        """Should form a complete measurement."""
        povm = unambiguous_povm(vacuum(), plus())
        np.testing.assert_allclose(povm.operators.sum(axis=0), np.eye(2), atol=1e-12)

    @pytest.mark.parametrize(
        "pair", [(vacuum(), one_photon()), symmetric_pair(math.pi / 4)], ids=["basis", "pi-4"]
    )
    def test_rejects_orthogonal_states(self, pair: tuple[PureState, PureState]) -> None:
        """Should raise when the overlap vanishes to within round-off."""
        with pytest.raises(InvalidArgumentError, match="orthogonal"):
            unambiguous_povm(*pair)

    def test_accepts_nearly_orthogonal_states(self) -> None:
        """Should still conclude almost always when the overlap is just above round-off."""
        psi0, psi1 = symmetric_pair(math.pi / 4 - 1e-6)
        probs = pure_outcome_vector(unambiguous_povm(psi0, psi1), psi0)
        assert 0.0 < probs[OutcomeLabel.INCONCLUSIVE] < 1e-5
        assert probs[OutcomeLabel.CONCLUDE_STATE_1] < 1e-12

    def test_rejects_identical_states(self) -> None:
        """Should raise when the states are the same ray."""
        with pytest.raises(InvalidArgumentError, match="identical"):
            unambiguous_povm(plus(), plus())

    @given(theta=half_angles)
    def test_beats_random_projectors(self, theta: float) -> None:
        """Should conclude with 1 - s, strictly more than the projector pair's (1 - s^2)/2."""
        psi0, psi1 = symmetric_pair(theta)
        povm = pure_outcome_vector(unambiguous_povm(psi0, psi1), psi0)
        pvm = sum(
            pure_outcome_vector(pvm_for_choice(psi0, psi1, choice), psi0)[
                OutcomeLabel.CONCLUDE_STATE_0
            ]
            for choice in (0, 1)
        ) / 2
        s = abs(overlap(psi0, psi1))
        assert pvm == pytest.approx((1 - s**2) / 2, abs=1e-12)
        assert pvm < 1 - povm[OutcomeLabel.INCONCLUSIVE]


class TestMeasurementOperatorSet:
    """Tests for operator-set validation."""

    def test_rejects_incomplete_set(self) -> None:
        """Should raise when the operators do not sum to the identity."""
        with pytest.raises(InvalidArgumentError, match="identity"):
            MeasurementOperatorSet(
                kind=MeasurementKind.BASIS,
                labels=(OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.CONCLUDE_STATE_1),
                operators=np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])]),
            )

    def test_rejects_non_positive_operator(self) -> None:
        """Should raise for an operator with a negative eigenvalue."""
        with pytest.raises(InvalidArgumentError, match="positive"):
            MeasurementOperatorSet(
                kind=MeasurementKind.BASIS,
                labels=(OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.CONCLUDE_STATE_1),
                operators=np.stack([np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])]),
            )

    def test_rejects_labels_foreign_to_kind(self) -> None:
        """Should raise when a PVM setting reports the wrong conclusion."""
        with pytest.raises(InvalidArgumentError, match="do not fit"):
            MeasurementOperatorSet(
                kind=MeasurementKind.PVM_CHOICE_0,
                labels=(OutcomeLabel.CONCLUDE_STATE_0, OutcomeLabel.INCONCLUSIVE),
                operators=np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]),
            )

    def test_missing_label_has_zero_operator(self) -> None:
        """Should return the zero matrix for an outcome the set never reports."""
        ops = basis_pvm(vacuum(), one_photon())
        assert not ops.operator(OutcomeLabel.INCONCLUSIVE).any()

    def test_basis_pvm_rejects_non_orthogonal_states(self) -> None:
        """Should raise when the basis states overlap."""
        with pytest.raises(InvalidArgumentError, match="orthogonal"):
            basis_pvm(vacuum(), plus())

    def test_outcome_distribution_covers_all_labels(self) -> None:
        """Should report every label, with zero for absent ones."""
        ops = basis_pvm(plus(), make_state(-math.pi / 4))
        dist = outcome_distribution(ops, density_of(vacuum()))
        assert set(dist) == set(OutcomeLabel)
        assert dist[OutcomeLabel.INCONCLUSIVE] == 0.0
        assert dist[OutcomeLabel.CONCLUDE_STATE_0] == pytest.approx(0.5)


class TestSampling:
    """Tests for inverse-CDF outcome sampling."""

    @pytest.mark.parametrize("label", list(OutcomeLabel))
    def test_certain_outcome(self, label: OutcomeLabel) -> None:
        """Should always return the outcome that has probability 1."""
        rng = np.random.default_rng(0)
        probs = {label: 1.0}
        assert all(sample_outcome(probs, rng) is label for _ in range(100))

    def test_frequencies_match_probabilities(self) -> None:
        """Should reproduce the distribution within 5 sigma."""
        rng = np.random.default_rng(11)
        probs = [0.2, 0.3, 0.5]
        n = 20_000
        draws = [sample_outcome(probs, rng) for _ in range(n)]
        for code, p in enumerate(probs):
            freq = sum(d == code for d in draws) / n
            assert abs(freq - p) < 5 * math.sqrt(p * (1 - p) / n)

    def test_vectorised_sampler_matches_scalar_sampler(self) -> None:
        """Should draw the same outcomes as repeated scalar sampling on one seed."""
        rows = np.array([[0.2, 0.3, 0.5], [0.0, 0.0, 1.0], [0.6, 0.4, 0.0]] * 200)
        scalar_rng = np.random.default_rng(5)
        expected = [int(sample_outcome(row, scalar_rng)) for row in rows]
        codes = sample_outcome_codes(rows, np.random.default_rng(5))
        assert codes.tolist() == expected

    @pytest.mark.parametrize(
        "probs", [[0.5, 0.2, 0.2], [1.2, -0.2, 0.0], [0.5, math.nan, 0.5], [0.5, 0.5]]
    )
    def test_rejects_malformed_distribution(self, probs: list[float]) -> None:
        """Should raise InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            sample_outcome(probs, np.random.default_rng(0))

    def test_vectorised_sampler_rejects_wrong_shape(self) -> None:
        """Should raise for rows that are not three-outcome distributions."""
        with pytest.raises(InvalidArgumentError):
            sample_outcome_codes(np.array([[0.5, 0.5]]), np.random.default_rng(0))
