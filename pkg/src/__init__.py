"""
Hyperdimensional computing toolkit.

Random codebooks, set and structure encodings with threshold decoding, noise
models, distance-preserving encoders for real vectors, learning on
encodings, and a command-line harness that checks each construction's
guarantees empirically.
"""

__version__ = "0.1.0"

# Import core configuration
from .config import config

# Core modules
from . import hdcore, codebook, setmem, structures, noise, euclid, learn

__all__ = ["config", "hdcore", "codebook", "setmem", "structures", "noise", "euclid", "learn"]
