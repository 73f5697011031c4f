"""Pydantic models for sweep requests and run reports."""

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, model_validator

from vopqkd.models import DetectionStrategy


class Surface(str, Enum):
    KMAX_PVM = "kmax-pvm"
    KMAX_POVM = "kmax-povm"
    LOSS_LIMITS = "loss-limits"
    GAMMA0 = "gamma0"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class SweepSpec(BaseModel):
    """What to sweep and where to write it."""

    surface: Surface = Field(description="Which figure data to generate")
    grid_resolution: int = Field(ge=2, description="Points per axis of a K_max surface")
    points: int = Field(ge=2, description="Points along a cos^2(theta1) curve")
    cos2_theta0: float = Field(ge=0.0, le=1.0, description="Fixed cos^2(theta0) of curves")
    alpha: float = Field(ge=0.0, description="Fiber loss coefficient in dB/km")
    curve_min: float = Field(ge=0.0, le=1.0, description="Smallest cos^2(theta1)")
    curve_max: float = Field(ge=0.0, le=1.0, description="Largest cos^2(theta1)")
    detection: DetectionStrategy = Field(
        default=DetectionStrategy.PVM, description="Detection used for loss limits"
    )
    scan_step: float = Field(gt=0.0, le=0.5, description="Gamma scan resolution")
    xtol: float = Field(gt=0.0, description="Bisection tolerance")
    format: OutputFormat = Field(default=OutputFormat.CSV, description="Output format")
    out: Path | None = Field(default=None, description="Output file; standard output if unset")

    @model_validator(mode="after")
    def validate_ranges(self) -> "SweepSpec":
        """Validate the curve range and that loss limits have a lossy fiber."""
        if self.curve_min >= self.curve_max:
            raise ValueError("curve minimum must be below curve maximum")
        if self.surface is Surface.LOSS_LIMITS and self.alpha <= 0.0:
            raise ValueError("loss limits need a positive loss coefficient")
        return self


class RunReport(BaseModel):
    """Flat summary of one protocol run: configuration echo, estimates and counts."""

    protocol: str = Field(description="bb84 or b92")
    encoding: str = Field(description="pol or vopq")
    detection: str | None = Field(default=None, description="pvm or povm (B92 only)")
    theta0: float | None = Field(default=None, description="theta of psi0 in radians")
    theta1: float | None = Field(default=None, description="theta of psi1 in radians")
    phi0: float | None = Field(default=None, description="phi of psi0 in radians")
    phi1: float | None = Field(default=None, description="phi of psi1 in radians")
    gamma: float = Field(ge=0.0, le=1.0, description="Photon-loss probability")
    alpha: float | None = Field(default=None, description="Fiber loss coefficient in dB/km")
    length: float | None = Field(default=None, description="Fiber length in km")
    eve: str = Field(description="absent or intercept-resend")
    seed: int = Field(description="Seed of the random stream")
    n_q: int = Field(ge=1, description="Qubits sent")
    n_b: int = Field(ge=0, description="Sifted-key length")
    n_err: int = Field(ge=0, description="Sifted bits that disagree with Alice")
    n_p_expected: float = Field(ge=0.0, description="Expected photons sent")
    n_p_sampled: int = Field(ge=0, description="Photons sent in sampled presence draws")
    h: float = Field(ge=0.0, le=1.0, description="Sifted bits per qubit")
    h_se: float = Field(gt=0.0, description="Standard error of h")
    k_expected: float = Field(ge=0.0, description="Sifted bits per expected photon")
    k_expected_se: float = Field(gt=0.0, description="Standard error of k_expected")
    k_sampled: float = Field(ge=0.0, description="Sifted bits per sampled photon")
    k_sampled_se: float = Field(gt=0.0, description="Standard error of k_sampled")
    observed_arrival_rate: float = Field(ge=0.0, le=1.0, description="Fraction Bob registered")
    eve_blocking_fraction: float | None = Field(
        default=None, description="Fraction of signals Eve blocked"
    )
    verdict: str | None = Field(default=None, description="clean or suspect")
    non_arrivals: int | None = Field(default=None, description="Blocked or lost signals")
    loss_threshold: float | None = Field(
        default=None, description="Largest non-arrival count judged clean"
    )
    significance: float | None = Field(default=None, description="Significance of the test")
    digest: str = Field(description="SHA-256 of the transcript")

    @model_validator(mode="after")
    def validate_counts(self) -> "RunReport":
        """Validate the sifted counts are consistent."""
        if not self.n_err <= self.n_b <= self.n_q:
            raise ValueError("counts must satisfy n_err <= n_b <= n_q")
        return self
