"""Unit tests for settings."""

import pytest
from pydantic import ValidationError

from vopqkd.config import Settings, get_settings


class TestSettings:
    """Tests for Settings defaults and validation."""

    def test_defaults(self) -> None:
        """Should use the documented defaults."""
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.log_format == "json"
        assert settings.seed == 7
        assert settings.significance == 0.01
        assert settings.alpha_db_per_km == 0.2
        assert settings.cos2_theta0 == 0.95
        assert settings.grid_resolution == 201
        assert (settings.curve_points, settings.curve_min, settings.curve_max) == (201, 0.5, 1.0)

    def test_environment_override(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Should read VOPQKD_ variables."""
        monkeypatch.setenv("VOPQKD_SEED", "11")
        monkeypatch.setenv("VOPQKD_LOG_LEVEL", "debug")
        settings = Settings()
        assert settings.seed == 11
        assert settings.log_level == "DEBUG"

    @pytest.mark.parametrize(
        ("variable", "value"),
        [
            ("VOPQKD_LOG_LEVEL", "chatty"),
            ("VOPQKD_LOG_FORMAT", "xml"),
            ("VOPQKD_N_SIGNALS", "0"),
            ("VOPQKD_SIGNIFICANCE", "1.5"),
            ("VOPQKD_ALPHA_DB_PER_KM", "-0.1"),
            ("VOPQKD_COS2_THETA0", "1.1"),
            ("VOPQKD_GRID_RESOLUTION", "1"),
            ("VOPQKD_SCAN_STEP", "0.9"),
            ("VOPQKD_BISECTION_XTOL", "0"),
            ("VOPQKD_CURVE_MIN", "1.0"),
        ],
    )
    def test_rejects_invalid_values(
        self, monkeypatch: pytest.MonkeyPatch, variable: str, value: str
    ) -> None:
        """Should raise a ValidationError naming the variable."""
        monkeypatch.setenv(variable, value)
        with pytest.raises(ValidationError, match="VOPQKD_"):
            Settings()

    def test_get_settings_is_cached(self) -> None:
        """Should return the same instance until the cache is cleared."""
        get_settings.cache_clear()
        try:
            assert get_settings() is get_settings()
        finally:
            get_settings.cache_clear()
