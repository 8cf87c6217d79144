"""
Experiment runners.

Importing this package registers every runner; `run_experiment` looks them
up by name.
"""
from .base import (ALIASES, REGISTRY, Experiment, Param, RunContext, get_experiment,
                   register, run_experiment)
from . import sets, structured, euclidean, learning  # noqa: F401  (registration)

__all__ = [
    'ALIASES',
    'REGISTRY',
    'Experiment',
    'Param',
    'RunContext',
    'get_experiment',
    'register',
    'run_experiment',
]
