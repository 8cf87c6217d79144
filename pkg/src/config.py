"""
Toolkit configuration management.
"""
# Standard library imports
import logging
import os
from configparser import ConfigParser
from typing import Optional

# Local application imports
from .constants import OutputFormat, ResourceLimits

logger = logging.getLogger(__name__)


def _as_bool(value: str) -> bool:
    return str(value).strip().lower() in ('1', 'true', 'yes', 'on')


class AppConfig:
    """Toolkit configuration with type-safe access to settings."""

    def __init__(self):
        # File paths and defaults
        self.CONFIG_FILE: str = 'hdc.ini'
        self.LOG_FILE: str = 'hdc.log'
        self.LOG_LEVEL: str = 'INFO'

        # Resource caps; the CLI refuses anything larger unless --allow-large is given
        self.MAX_DIMENSION: int = ResourceLimits.MAX_DIMENSION
        self.MAX_TRIALS: int = ResourceLimits.MAX_TRIALS
        self.MAX_ALPHABET: int = ResourceLimits.MAX_ALPHABET
        self.MAX_SPARSE_SEPARATOR_DIMENSION: int = ResourceLimits.MAX_SPARSE_SEPARATOR_DIMENSION

        # Report output
        self.OUTPUT_DIRECTORY: str = 'results'
        self.OUTPUT_FORMAT: str = OutputFormat.CSV
        self.BANNER: bool = True

        # Execution
        self.WORKERS: int = 1
        self.PROGRESS: bool = False

    def reset(self) -> None:
        """Restore every setting to its built-in default."""
        self.__init__()

    def load_config(self, path: Optional[str] = None) -> bool:
        """
        Loads settings from an INI file.

        Missing files and sections leave the defaults in place.

        Args:
            path: INI file to read (defaults to CONFIG_FILE)

        Returns:
            bool: True if the file existed and was parsed
        """
        path = path or self.CONFIG_FILE
        if not os.path.exists(path):
            logger.info(f"No settings file at {path}, using defaults")
            return False

        try:
            cfg = ConfigParser()
            cfg.read(path, encoding='utf-8')
        except Exception as e:
            logger.error(f"Failed to read settings from {path}: {e}")
            return False

        if 'LIMITS' in cfg:
            limits = cfg['LIMITS']
            self.MAX_DIMENSION = limits.getint('max_dimension', self.MAX_DIMENSION)
            self.MAX_TRIALS = limits.getint('max_trials', self.MAX_TRIALS)
            self.MAX_ALPHABET = limits.getint('max_alphabet', self.MAX_ALPHABET)
            self.MAX_SPARSE_SEPARATOR_DIMENSION = limits.getint(
                'max_sparse_separator_dimension', self.MAX_SPARSE_SEPARATOR_DIMENSION)

        if 'OUTPUT' in cfg:
            output = cfg['OUTPUT']
            self.OUTPUT_DIRECTORY = output.get('directory', self.OUTPUT_DIRECTORY)
            self.OUTPUT_FORMAT = output.get('format', self.OUTPUT_FORMAT).lower()
            self.BANNER = _as_bool(output.get('banner', str(self.BANNER)))

        if 'RUN' in cfg:
            run = cfg['RUN']
            self.WORKERS = max(1, run.getint('workers', self.WORKERS))
            self.PROGRESS = _as_bool(run.get('progress', str(self.PROGRESS)))

        if 'LOGGING' in cfg:
            logging_section = cfg['LOGGING']
            self.LOG_FILE = logging_section.get('file', self.LOG_FILE)
            self.LOG_LEVEL = logging_section.get('level', self.LOG_LEVEL).upper()

        self.CONFIG_FILE = path
        logger.info(f"Loaded settings from {path} (max d={self.MAX_DIMENSION}, "
                    f"max trials={self.MAX_TRIALS}, workers={self.WORKERS})")
        return True

    def save_config(self, path: Optional[str] = None) -> bool:
        """
        Writes the current settings to an INI file.

        Args:
            path: Destination (defaults to CONFIG_FILE)

        Returns:
            bool: True if the file was written
        """
        path = path or self.CONFIG_FILE
        cfg = ConfigParser()
        cfg['LIMITS'] = {
            'max_dimension': str(self.MAX_DIMENSION),
            'max_trials': str(self.MAX_TRIALS),
            'max_alphabet': str(self.MAX_ALPHABET),
            'max_sparse_separator_dimension': str(self.MAX_SPARSE_SEPARATOR_DIMENSION),
        }
        cfg['OUTPUT'] = {
            'directory': self.OUTPUT_DIRECTORY,
            'format': self.OUTPUT_FORMAT,
            'banner': str(self.BANNER),
        }
        cfg['RUN'] = {
            'workers': str(self.WORKERS),
            'progress': str(self.PROGRESS),
        }
        cfg['LOGGING'] = {
            'file': self.LOG_FILE,
            'level': self.LOG_LEVEL,
        }

        try:
            with open(path, 'w', encoding='utf-8') as f:
                cfg.write(f)
        except Exception as e:
            logger.error(f"Failed to save settings to {path}: {e}")
            return False

        logger.info(f"Saved settings to {path}")
        return True


# Global config instance
config = AppConfig()
