"""
Tests for ktree_bounds.config.
"""

import tempfile
from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from ktree_bounds.config import (
    PRECISION_ENV_VAR,
    KTreeSettings,
    load_settings,
    save_settings,
)
from ktree_bounds.errors import ParameterError


class TestKTreeSettings:
    """Test settings defaults and validation."""

    def test_defaults(self):
        """Test default values."""
        settings = KTreeSettings()
        assert settings.precision_bits == 192
        assert settings.memory_cap == 2**31
        assert settings.n_max == 2**40
        assert settings.trials == 1000
        assert settings.seed == 0
        assert settings.parallelism == 1
        assert settings.log_level == "WARNING"

    def test_precision_floor(self):
        """Test that precision below 64 bits is rejected."""
        with pytest.raises(ValidationError):
            KTreeSettings(precision_bits=32)


class TestLoadSettings:
    """Test reading and writing settings files."""

    def setup_method(self):
        """Set up a temporary directory."""
        self.temp_dir = Path(tempfile.mkdtemp())
        self.path = self.temp_dir / "ktree.yaml"

    def test_missing_file(self, monkeypatch):
        """Test that a missing file yields defaults."""
        monkeypatch.delenv(PRECISION_ENV_VAR, raising=False)
        assert load_settings(self.path) == KTreeSettings()
        assert load_settings() == KTreeSettings()

    def test_save_and_load(self, monkeypatch):
        """Test that saved settings load back."""
        monkeypatch.delenv(PRECISION_ENV_VAR, raising=False)
        settings = KTreeSettings(trials=50, seed=7, memory_cap=1000)
        save_settings(self.path, settings)
        assert load_settings(self.path) == settings
        with open(self.path) as f:
            assert list(yaml.safe_load(f))[0] == "precision_bits"

    def test_env_override(self, monkeypatch):
        """Test that the environment overrides the file."""
        save_settings(self.path, KTreeSettings(precision_bits=128))
        monkeypatch.setenv(PRECISION_ENV_VAR, "256")
        assert load_settings(self.path).precision_bits == 256

    def test_bad_env(self, monkeypatch):
        """Test that a non-integer environment value is a parameter error."""
        monkeypatch.setenv(PRECISION_ENV_VAR, "lots")
        with pytest.raises(ParameterError):
            load_settings()

    def test_not_a_mapping(self, monkeypatch):
        """Test that a YAML list is rejected."""
        monkeypatch.delenv(PRECISION_ENV_VAR, raising=False)
        self.path.write_text("- 1\n- 2\n")
        with pytest.raises(ParameterError):
            load_settings(self.path)
