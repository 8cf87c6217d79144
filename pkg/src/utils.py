"""
Utility functions shared across the toolkit.

Includes seed derivation, the counter-based random streams codebooks are drawn
from, and small argument validators.
"""
# Standard library imports
import hashlib
import logging
import math
from typing import Any, Iterable, Sequence

# Third-party imports
import numpy as np

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_DOUBLE_SCALE = 1.0 / (1 << 53)


# ============================================================================
# SEEDS AND RANDOM STREAMS
# ============================================================================
# Every random object is reproducible from an explicit integer seed. Codewords
# are drawn from Philox, a counter-based generator, keyed by (seed, symbol) so a
# single codeword can be regenerated without touching any other. Everything
# else (encoders, noise, trials) derives a child seed with derive_seed().
# ============================================================================

def derive_seed(base_seed: int, *labels: Any) -> int:
    """
    Derive a 64-bit child seed from a base seed and any number of labels.

    The derivation is a blake2b hash of the inputs, so it does not depend on
    execution order or on how many other seeds were derived before.

    Args:
        base_seed: Parent seed
        *labels: Distinguishing labels (trial index, purpose string, ...)

    Returns:
        int: Seed in [0, 2**64)
    """
    digest = hashlib.blake2b(repr((int(base_seed),) + tuple(labels)).encode('utf-8'),
                             digest_size=8)
    return int.from_bytes(digest.digest(), 'little')


def make_rng(seed: int, *labels: Any) -> np.random.Generator:
    """Return a numpy Generator seeded from derive_seed(seed, *labels)."""
    return np.random.default_rng(derive_seed(seed, *labels) if labels else int(seed) & _MASK64)


def symbol_stream(seed: int, symbol: int) -> np.random.Philox:
    """
    Counter-based bit generator for one codeword.

    The key is (seed, symbol index); the counter advances with the coordinate
    index, so coordinate j of a codeword always comes from the same raw words.
    """
    key = np.array([int(seed) & _MASK64, int(symbol) & _MASK64], dtype=np.uint64)
    return np.random.Philox(key=key)


def raw_words(seed: int, symbol: int, count: int) -> np.ndarray:
    """First `count` raw 64-bit words of a symbol's stream."""
    return symbol_stream(seed, symbol).random_raw(count).astype(np.uint64)


def words_to_uniform(words: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to doubles in [0, 1) using the top 53 bits."""
    return (words >> np.uint64(11)).astype(np.float64) * _DOUBLE_SCALE


def uniform_stream(seed: int, symbol: int, count: int) -> np.ndarray:
    """`count` uniforms in [0, 1); value j is a function of raw word j only."""
    return words_to_uniform(raw_words(seed, symbol, count))


def bit_stream(seed: int, symbol: int, count: int) -> np.ndarray:
    """
    `count` fair bits; bit j is bit (j mod 64) of raw word j // 64.

    Returns:
        np.ndarray: uint8 array of 0/1 values
    """
    n_words = (count + 63) // 64
    words = raw_words(seed, symbol, n_words)
    bits = np.unpackbits(words.astype('<u8').view(np.uint8), bitorder='little')
    return bits[:count]


def gaussian_stream(seed: int, symbol: int, count: int) -> np.ndarray:
    """
    `count` standard normals by Box-Muller over consecutive uniform pairs.

    Coordinate j uses uniforms 2j and 2j+1: z = sqrt(-2 ln(1 - u)) cos(2 pi v).
    Only numpy elementwise transcendental functions are involved, so the
    output is reproducible across platforms.
    """
    u = uniform_stream(seed, symbol, 2 * count).reshape(count, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    return radius * np.cos(2.0 * math.pi * u[:, 1])


# ============================================================================
# VALIDATION HELPERS
# ============================================================================

def require_positive_int(name: str, value: Any, error: type = ValueError,
                         minimum: int = 1) -> int:
    """Return `value` as int, raising `error` unless it is an integer >= minimum."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise error(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise error(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def require_probability(name: str, value: float, error: type = ValueError,
                        open_interval: bool = True) -> float:
    """Check a probability lies in (0,1) (or [0,1] when open_interval is False)."""
    value = float(value)
    if open_interval and not 0.0 < value < 1.0:
        raise error(f"{name} must lie in (0, 1), got {value}")
    if not open_interval and not 0.0 <= value <= 1.0:
        raise error(f"{name} must lie in [0, 1], got {value}")
    return value


def require_distinct(name: str, items: Sequence[int], error: type = ValueError) -> None:
    """Raise `error` naming the first repeated entry of `items`."""
    seen = set()
    for item in items:
        if item in seen:
            raise error(f"{name} contains duplicate entry {item}")
        seen.add(item)


def require_indices(name: str, items: Iterable[int], upper: int,
                    error: type = ValueError) -> None:
    """Raise `error` unless every entry lies in [0, upper)."""
    for item in items:
        if not 0 <= int(item) < upper:
            raise error(f"{name} index {item} out of range [0, {upper})")


def quantiles(values: Sequence[float], points: Sequence[float] = (0.5, 0.9, 0.99, 1.0)) -> dict:
    """Named quantiles of `values` (q50, q90, ...); empty input gives an empty dict."""
    if len(values) == 0:
        return {}
    arr = np.asarray(values, dtype=np.float64)
    return {f"q{int(round(p * 100))}": float(np.quantile(arr, p)) for p in points}
