"""Unit tests for effectiveness closed forms, loss limits and Eve's conditions."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vopqkd.errors import (
    DegenerateError,
    InfiniteDistanceError,
    InvalidArgumentError,
    NoUsableRegimeError,
    RootBracketError,
)
from vopqkd.models import DetectionStrategy, Encoding
from vopqkd.quantum.channel import length_of_gamma
from vopqkd.quantum.hilbert import overlap, plus, symmetric_pair, vacuum
from vopqkd.services import analysis
from vopqkd.services.analysis import (
    bb84_effectiveness,
    conclusive_probability,
    curve_pair,
    arrived_correct_factor,
    arrived_probabilities,
    error_probability,
    eve_detectability,
    eve_inconclusive_prob,
    gamma_max,
    gamma_zero,
    h_b92,
    identification_margin,
    identification_margin_curve,
    k_b92,
    k_with_loss,
    key_rate,
    kmax_surface,
    l_max,
    optimal_phase_check,
)

nonzero_angles = st.floats(min_value=-math.pi / 2, max_value=math.pi / 2).filter(
    lambda t: abs(t) > 1e-6
)

PVM = DetectionStrategy.PVM
POVM = DetectionStrategy.POVM


@pytest.fixture
def random_thetas() -> np.ndarray:
    """Fifty seeded angles in (0, pi/2)."""
    return np.random.default_rng(3).uniform(1e-3, math.pi / 2 - 1e-3, size=50)


class TestLosslessEffectiveness:
    """Tests for H and K without loss."""

    def test_standard_b92(self) -> None:
        """Should give H = 1/4 for |0>, |+> with projectors."""
        assert h_b92(vacuum(), plus(), PVM) == pytest.approx(0.25, abs=1e-12)

    def test_standard_b92_povm(self) -> None:
        """Should give H = 1 - 1/sqrt(2) with the unambiguous POVM."""
        assert h_b92(vacuum(), plus(), POVM) == pytest.approx(1 - 2**-0.5, abs=1e-12)

    def test_symmetric_pair_pvm_identity(self, random_thetas: np.ndarray) -> None:
        """Should give K = 2 cos^2(theta) for the pair cos|0> +/- sin|1>."""
        for theta in random_thetas:
            k = k_b92(theta, -theta, 0.0, 0.0, PVM)
            assert abs(k - 2 * math.cos(theta) ** 2) < 1e-12

    def test_povm_line_property(self) -> None:
        """Should give K_max = 2 along theta1 = +/-theta0 for |theta| <= pi/4."""
        thetas = np.random.default_rng(4).uniform(1e-3, math.pi / 4, size=50)
        for theta in thetas:
            for sign in (1, -1):
                assert abs(kmax_surface(theta, sign * theta, POVM) - 2.0) < 1e-12

    def test_povm_symmetric_pair(self) -> None:
        """Should give K = 2 for the symmetric pair with the POVM."""
        assert k_b92(math.pi / 8, -math.pi / 8, 0.0, 0.0, POVM) == pytest.approx(2.0, abs=1e-12)

    def test_origin_is_degenerate(self) -> None:
        """Should raise DegenerateError at theta0 = theta1 = 0."""
        with pytest.raises(DegenerateError):
            kmax_surface(0.0, 0.0, PVM)
        with pytest.raises(DegenerateError):
            k_b92(0.0, 0.0, 0.0, 0.0, POVM)

    @given(
        theta0=st.floats(min_value=0.05, max_value=math.pi / 2 - 0.05),
        theta1=st.floats(min_value=-math.pi / 2 + 0.05, max_value=math.pi / 2 - 0.05),
    )
    def test_optimal_phase_attains_kmax(self, theta0: float, theta1: float) -> None:
        """Should reach the phase-maximised K at the returned phase difference."""
        phase = optimal_phase_check(theta0, theta1)
        for strategy in (PVM, POVM):
            k = k_b92(theta0, theta1, phase, 0.0, strategy)
            assert k == pytest.approx(kmax_surface(theta0, theta1, strategy), abs=1e-10)

    @given(theta0=nonzero_angles, theta1=nonzero_angles)
    def test_surfaces_bounded_by_two(self, theta0: float, theta1: float) -> None:
        """Should never exceed 2, with the POVM at least as good as projectors."""
        pvm = kmax_surface(theta0, theta1, PVM)
        povm = kmax_surface(theta0, theta1, POVM)
        assert povm <= 2.0 + 1e-9
        assert povm >= pvm - 1e-15

    def test_bb84(self) -> None:
        """Should give H = K = 1/2 for polarization and K = 1 for VOPQ."""
        assert bb84_effectiveness(Encoding.POLARIZATION) == (0.5, 0.5)
        h, k = bb84_effectiveness(Encoding.VOPQ)
        assert h == 0.5
        assert k == pytest.approx(1.0, abs=1e-12)

    def test_optimal_phase_signs(self) -> None:
        """Should return pi when the products share a sign and 0 otherwise."""
        assert optimal_phase_check(math.pi / 8, math.pi / 8) == math.pi
        assert optimal_phase_check(math.pi / 8, -math.pi / 8) == 0.0


class TestLossProbabilities:
    """Tests for the damped conclusive and error probabilities."""

    @pytest.mark.parametrize("strategy", [PVM, POVM])
    def test_lossless_matches_h(self, strategy: DetectionStrategy) -> None:
        """Should equal H and have no errors at gamma = 0."""
        psi0, psi1 = symmetric_pair(0.4)
        assert conclusive_probability(psi0, psi1, 0.0, strategy) == pytest.approx(
            h_b92(psi0, psi1, strategy), abs=1e-12
        )
        assert error_probability(psi0, psi1, 0.0, strategy) < 1e-12

    def test_loss_creates_errors(self) -> None:
        """Should misidentify some damped signals."""
        psi0, psi1 = symmetric_pair(math.pi / 8)
        assert error_probability(psi0, psi1, 0.5, PVM) > 0.0

    @pytest.mark.parametrize("strategy", [PVM, POVM])
    @pytest.mark.parametrize("gamma", [0.0, 0.3, 0.9, 1.0])
    def test_arrived_correct_bits_of_symmetric_pair(
        self, strategy: DetectionStrategy, gamma: float
    ) -> None:
        """Should keep (1 + sqrt(1 - gamma))^2 / 4 of K_ideal in correct arrived bits."""
        theta = math.pi / 8
        psi0, psi1 = symmetric_pair(theta)
        correct, _ = arrived_probabilities(psi0, psi1, gamma, strategy)
        k_correct = correct / math.sin(theta) ** 2
        k_ideal = k_b92(theta, -theta, 0.0, 0.0, strategy)
        assert k_correct == pytest.approx(arrived_correct_factor(gamma) * k_ideal, abs=1e-12)
        assert (1 - gamma) * k_ideal - 1e-12 <= k_correct <= k_ideal + 1e-12

    def test_arrived_pvm_total_of_symmetric_pair(self) -> None:
        """Should sift c^2 (2 - gamma) bits per photon on arrivals with projectors."""
        theta, gamma = math.pi / 8, 0.3
        psi0, psi1 = symmetric_pair(theta)
        correct, wrong = arrived_probabilities(psi0, psi1, gamma, PVM)
        expected = math.cos(theta) ** 2 * (2 - gamma)
        assert (correct + wrong) / math.sin(theta) ** 2 == pytest.approx(expected, rel=1e-12)
        assert wrong > 0.0

    @pytest.mark.parametrize("strategy", [PVM, POVM])
    def test_arrived_polarization_scales_by_one_minus_gamma(
        self, strategy: DetectionStrategy
    ) -> None:
        """Should reduce a single-photon carrier's conclusive rate by exactly 1 - gamma."""
        psi0, psi1 = curve_pair(0.95, 0.7)
        correct, wrong = arrived_probabilities(psi0, psi1, 0.4, strategy, Encoding.POLARIZATION)
        assert correct + wrong == pytest.approx(0.6 * h_b92(psi0, psi1, strategy), rel=1e-12)

    @given(gamma=st.floats(min_value=0.0, max_value=1.0))
    def test_arrived_correct_factor_bounds(self, gamma: float) -> None:
        """Should lie between 1 - gamma and 1."""
        assert 1 - gamma <= arrived_correct_factor(gamma) <= 1.0

    def test_k_with_loss(self) -> None:
        """Should scale K by 1 - gamma."""
        assert k_with_loss(2.0, 0.25) == 1.5

    def test_rejects_bad_gamma(self) -> None:
        """Should raise InvalidArgumentError for gamma outside [0, 1]."""
        with pytest.raises(InvalidArgumentError):
            k_with_loss(2.0, 1.5)
        with pytest.raises(InvalidArgumentError):
            identification_margin(vacuum(), plus(), -0.1, PVM)


class TestLossLimits:
    """Tests for gamma_max, l_max and gamma0 on the cos^2(theta1) family."""

    def test_symmetric_member_tolerates_total_loss(self) -> None:
        """Should return gamma_max = 1 at cos^2(theta1) = cos^2(theta0)."""
        psi0, psi1 = curve_pair(0.95, 0.95)
        assert gamma_max(psi0, psi1, PVM) == 1.0
        assert gamma_max(psi0, psi1, POVM) == 1.0

    @pytest.mark.parametrize(
        ("cos2_theta1", "gamma", "length"), [(0.9, 0.9744, 79.6), (0.5, 0.7682, 31.7)]
    )
    def test_reference_values(self, cos2_theta1: float, gamma: float, length: float) -> None:
        """Should match the family's known gamma_max and l_max at 0.2 dB/km."""
        psi0, psi1 = curve_pair(0.95, cos2_theta1)
        assert gamma_max(psi0, psi1, PVM) == pytest.approx(gamma, abs=2e-3)
        assert l_max(psi0, psi1, 0.2, PVM) == pytest.approx(length, abs=2.0)

    def test_pvm_and_povm_agree(self) -> None:
        """Should give the same gamma_max for both strategies."""
        for c in np.linspace(0.5, 0.94, 20):
            psi0, psi1 = curve_pair(0.95, float(c))
            assert abs(gamma_max(psi0, psi1, PVM) - gamma_max(psi0, psi1, POVM)) < 1e-6

    @pytest.mark.parametrize("cos2_theta1", [0.6, 0.85])
    def test_bisection_matches_dense_scan(self, cos2_theta1: float) -> None:
        """Should agree with a million-point grid scan within 2e-6."""
        psi0, psi1 = curve_pair(0.95, cos2_theta1)
        grid = np.linspace(0.0, 1.0, 1_000_001)
        margins = identification_margin_curve(psi0, psi1, grid, PVM)
        oracle = grid[np.flatnonzero(margins <= 0.0)[0]]
        assert gamma_max(psi0, psi1, PVM) == pytest.approx(oracle, abs=2e-6)

    def test_l_max_is_infinite_for_total_loss_tolerance(self) -> None:
        """Should refuse to convert gamma_max = 1 into a length."""
        psi0, psi1 = curve_pair(0.95, 0.95)
        with pytest.raises(InfiniteDistanceError):
            l_max(psi0, psi1, 0.2, PVM)

    def test_no_usable_regime(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Should raise NoUsableRegimeError when the margin starts non-positive."""
        monkeypatch.setattr(
            analysis, "identification_margin_curve", lambda *a: -np.ones(a[2].size)
        )
        with pytest.raises(NoUsableRegimeError):
            gamma_max(vacuum(), plus(), PVM)

    def test_multiple_crossings(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Should raise RootBracketError when the margin changes sign twice."""
        monkeypatch.setattr(
            analysis,
            "identification_margin_curve",
            lambda *a: np.cos(6 * np.pi * a[2]) + 0.5,
        )
        with pytest.raises(RootBracketError):
            gamma_max(vacuum(), plus(), PVM)

    def test_gamma_zero_reference_values(self) -> None:
        """Should give 1 - 1/1.9 for projectors and 1/2 for the POVM at cos^2 = 0.95."""
        psi0, psi1 = curve_pair(0.95, 0.95)
        assert gamma_zero(psi0, psi1, PVM) == pytest.approx(1 - 1 / 1.9, abs=1e-12)
        assert gamma_zero(psi0, psi1, POVM) == pytest.approx(0.5, abs=1e-12)

    def test_gamma_zero_identity(self) -> None:
        """Should satisfy (1 - gamma0) K = 1 wherever K exceeds 1."""
        for c in np.linspace(0.5, 1.0, 21):
            psi0, psi1 = curve_pair(0.95, float(c))
            for strategy in (PVM, POVM):
                k = k_b92(psi0.theta, psi1.theta, psi0.phi, psi1.phi, strategy)
                g0 = gamma_zero(psi0, psi1, strategy)
                if k > 1.0:
                    assert abs((1 - g0) * k - 1.0) < 1e-12
                else:
                    assert g0 == 0.0
            assert gamma_zero(psi0, psi1, POVM) >= gamma_zero(psi0, psi1, PVM)

    def test_length_of_gamma_max(self) -> None:
        """Should convert gamma_max with the fiber formula."""
        psi0, psi1 = curve_pair(0.95, 0.7)
        g = gamma_max(psi0, psi1, PVM)
        assert l_max(psi0, psi1, 0.2, PVM) == pytest.approx(length_of_gamma(0.2, g))


class TestEavesdropping:
    """Tests for Eve's inconclusive rate and the detectability condition."""

    @pytest.mark.parametrize("theta", [0.1, 0.3, 0.6, 1.2])
    def test_inconclusive_probability_is_overlap(self, theta: float) -> None:
        """Should equal |2cos^2(theta) - 1| = |<psi0|psi1>|."""
        psi0, psi1 = symmetric_pair(theta)
        assert eve_inconclusive_prob(theta) == pytest.approx(abs(overlap(psi0, psi1)))
        assert eve_inconclusive_prob(theta) == pytest.approx(abs(2 * math.cos(theta) ** 2 - 1))

    def test_detectability(self) -> None:
        """Should be detectable only when loss is below Eve's blocking rate."""
        assert eve_detectability(0.2, 0.05)
        assert not eve_detectability(0.7, 0.5)

    def test_key_rate(self) -> None:
        """Should give r/2 at theta = pi/4 and reject negative rates."""
        assert key_rate(1000.0, math.pi / 4) == pytest.approx(500.0)
        with pytest.raises(InvalidArgumentError):
            key_rate(-1.0, 0.3)
