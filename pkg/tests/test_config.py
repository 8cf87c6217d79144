"""
Tests for the INI-backed settings.
"""
import os
import sys
import tempfile

import pytest

from src.config import AppConfig
from src.constants import OutputFormat, ResourceLimits


class TestAppConfig:
    """Defaults, loading and saving."""

    def test_defaults(self):
        cfg = AppConfig()
        assert cfg.MAX_DIMENSION == ResourceLimits.MAX_DIMENSION
        assert cfg.OUTPUT_FORMAT == OutputFormat.CSV
        assert cfg.WORKERS == 1
        assert cfg.BANNER is True

    def test_missing_file_keeps_defaults(self):
        cfg = AppConfig()
        with tempfile.TemporaryDirectory() as tmpdir:
            assert cfg.load_config(os.path.join(tmpdir, 'absent.ini')) is False
        assert cfg.MAX_TRIALS == ResourceLimits.MAX_TRIALS

    def test_load_sections(self):
        cfg = AppConfig()
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'hdc.ini')
            with open(path, 'w', encoding='utf-8') as f:
                f.write("[LIMITS]\nmax_dimension = 1024\nmax_trials = 7\n"
                        "[OUTPUT]\nformat = JSONL\nbanner = no\n"
                        "[RUN]\nworkers = 0\nprogress = yes\n"
                        "[LOGGING]\nlevel = debug\n")
            assert cfg.load_config(path) is True
            assert cfg.CONFIG_FILE == path
        assert cfg.MAX_DIMENSION == 1024
        assert cfg.MAX_TRIALS == 7
        assert cfg.OUTPUT_FORMAT == OutputFormat.JSONL
        assert cfg.BANNER is False
        assert cfg.WORKERS == 1
        assert cfg.PROGRESS is True
        assert cfg.LOG_LEVEL == 'DEBUG'

    def test_save_then_load(self):
        cfg = AppConfig()
        cfg.MAX_ALPHABET = 99
        cfg.WORKERS = 3
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'saved.ini')
            assert cfg.save_config(path)
            other = AppConfig()
            other.load_config(path)
        assert other.MAX_ALPHABET == 99
        assert other.WORKERS == 3

    def test_reset(self):
        cfg = AppConfig()
        cfg.MAX_DIMENSION = 5
        cfg.reset()
        assert cfg.MAX_DIMENSION == ResourceLimits.MAX_DIMENSION


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
