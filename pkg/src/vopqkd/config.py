"""Configuration loading for vopqkd."""

from functools import lru_cache

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
LOG_FORMATS = {"json", "console"}


class Settings(BaseSettings):
    """Defaults for simulations and sweeps, loaded from environment variables.

    Command-line flags always override these values.
    """

    model_config = SettingsConfigDict(env_prefix="VOPQKD_")

    # Application settings
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="json", description="Log rendering: json or console")

    # Monte-Carlo settings
    seed: int = Field(default=7, description="Default seed for protocol runs")
    n_signals: int = Field(default=100_000, description="Default number of signals per run")
    significance: float = Field(
        default=0.01, description="Significance of the one-sided eavesdropper loss test"
    )

    # Fiber settings (0.2 dB/km is typical for 1550 nm transmission)
    alpha_db_per_km: float = Field(default=0.2, description="Fiber loss coefficient in dB/km")

    # Sweep settings
    cos2_theta0: float = Field(
        default=0.95, description="Fixed cos^2(theta0) for the loss-limit and gamma0 curves"
    )
    grid_resolution: int = Field(default=201, description="Points per axis of K_max surfaces")
    curve_points: int = Field(default=201, description="Points along cos^2(theta1) curves")
    curve_min: float = Field(default=0.5, description="Smallest cos^2(theta1) on curves")
    curve_max: float = Field(default=1.0, description="Largest cos^2(theta1) on curves")

    # Root finding
    scan_step: float = Field(
        default=1e-3, description="Gamma resolution of the sign-change scan before bisection"
    )
    bisection_xtol: float = Field(default=1e-9, description="Absolute tolerance of bisection")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate the log level is one the logging module knows."""
        v = v.strip().upper()
        if v not in LOG_LEVELS:
            raise ValueError(
                f"VOPQKD_LOG_LEVEL '{v}' is not valid. Use one of {sorted(LOG_LEVELS)}."
            )
        return v

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate the log format is a known renderer."""
        v = v.strip().lower()
        if v not in LOG_FORMATS:
            raise ValueError(f"VOPQKD_LOG_FORMAT '{v}' is not valid. Use json or console.")
        return v

    @field_validator("n_signals")
    @classmethod
    def validate_n_signals(cls, v: int) -> int:
        """Validate at least one signal is sent."""
        if v < 1:
            raise ValueError("VOPQKD_N_SIGNALS must be at least 1.")
        return v

    @field_validator("significance")
    @classmethod
    def validate_significance(cls, v: float) -> float:
        """Validate the significance is a proper probability."""
        if not 0.0 < v < 1.0:
            raise ValueError("VOPQKD_SIGNIFICANCE must lie strictly between 0 and 1.")
        return v

    @field_validator("alpha_db_per_km")
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        """Validate the fiber loss coefficient is non-negative."""
        if v < 0.0:
            raise ValueError("VOPQKD_ALPHA_DB_PER_KM must be non-negative.")
        return v

    @field_validator("cos2_theta0")
    @classmethod
    def validate_cos2_theta0(cls, v: float) -> float:
        """Validate cos^2(theta0) is in [0, 1]."""
        if not 0.0 <= v <= 1.0:
            raise ValueError("VOPQKD_COS2_THETA0 must lie in [0, 1].")
        return v

    @field_validator("grid_resolution", "curve_points")
    @classmethod
    def validate_resolution(cls, v: int) -> int:
        """Validate grids have at least two points."""
        if v < 2:
            raise ValueError(
                "VOPQKD_GRID_RESOLUTION and VOPQKD_CURVE_POINTS must be at least 2."
            )
        return v

    @field_validator("scan_step")
    @classmethod
    def validate_scan_step(cls, v: float) -> float:
        """Validate the scan step splits [0, 1] into at least two intervals."""
        if not 0.0 < v <= 0.5:
            raise ValueError("VOPQKD_SCAN_STEP must lie in (0, 0.5].")
        return v

    @field_validator("bisection_xtol")
    @classmethod
    def validate_xtol(cls, v: float) -> float:
        """Validate the bisection tolerance is positive."""
        if v <= 0.0:
            raise ValueError("VOPQKD_BISECTION_XTOL must be positive.")
        return v

    @model_validator(mode="after")
    def validate_curve_range(self) -> "Settings":
        """Validate the cos^2(theta1) range is an ordered sub-interval of [0, 1]."""
        if not 0.0 <= self.curve_min < self.curve_max <= 1.0:
            raise ValueError(
                "VOPQKD_CURVE_MIN and VOPQKD_CURVE_MAX must satisfy 0 <= min < max <= 1."
            )
        return self


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get cached application settings."""
    return Settings()
