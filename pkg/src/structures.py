"""
Feature-value records and sequences.

Records bind each value codeword to the codeword of its feature and bundle the
bound pairs. Sequences shift each symbol's codeword by its distance from the
newest position and bundle the shifted copies. A sliding window over a symbol
stream is maintained incrementally and stays bit-identical to re-encoding the
window contents.
"""
# Standard library imports
import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np

# Local application imports
from .codebook import Codebook
from .constants import CodebookError, CodebookKind, EncodingError, Storage
from .hdcore import Hypervector, permute
from .utils import require_distinct, require_indices, require_positive_int

logger = logging.getLogger(__name__)

DecodeResult = Union[int, Tuple[int, float, float]]


@dataclass(frozen=True, eq=False)
class StructureCodec:
    """
    Value codebook phi plus an optional bipolar feature codebook psi.

    A codec without a feature codebook can only encode sequences.
    """
    value_cb: Codebook
    feature_cb: Optional[Codebook] = None

    def __post_init__(self) -> None:
        if self.feature_cb is None:
            return
        if self.feature_cb.kind != CodebookKind.BIPOLAR:
            raise CodebookError(
                f"Feature codebook must be bipolar (self-inverse keys), got {self.feature_cb.kind}")
        if self.feature_cb.d != self.value_cb.d:
            raise CodebookError(
                f"Feature codebook d={self.feature_cb.d} differs from value codebook d={self.value_cb.d}")

    @property
    def d(self) -> int:
        return self.value_cb.d

    @property
    def m(self) -> int:
        return self.value_cb.m

    @property
    def n(self) -> int:
        """Number of features."""
        return self.feature_cb.m if self.feature_cb is not None else 0

    @property
    def M(self) -> float:
        """Largest bound-pair norm; binding preserves norms so this is L_max of phi."""
        return self.value_cb.stats.L_max

    @property
    def L_sq(self) -> float:
        return float(self.value_cb.norms_sq.min())

    @property
    def identity_hash(self) -> str:
        parts = self.value_cb.identity_hash + (self.feature_cb.identity_hash if self.feature_cb else '')
        return hashlib.blake2b(parts.encode('utf-8'), digest_size=16).hexdigest()

    def _features(self) -> Codebook:
        if self.feature_cb is None:
            raise CodebookError("This codec has no feature codebook")
        return self.feature_cb


def _value_matrix(codec: StructureCodec) -> np.ndarray:
    return codec.value_cb.dense_matrix()


def _as_result(h_data: np.ndarray, storage_real: bool, d: int, bound: int) -> Hypervector:
    if storage_real:
        return Hypervector(h_data.astype(np.float64), d, Storage.REAL)
    return Hypervector.integer(h_data.astype(np.int64), bound=bound)


def _check_query(h: Hypervector, codec: StructureCodec) -> np.ndarray:
    if h.is_sparse:
        raise EncodingError("Structure queries need a dense encoding")
    if h.dim != codec.d:
        raise CodebookError(f"Encoding has d={h.dim}, codec has d={codec.d}")
    return h.data.astype(np.float64)


def _argmax(scores: np.ndarray, return_score: bool) -> DecodeResult:
    # np.argmax returns the first maximum, so ties go to the lowest symbol index
    best = int(np.argmax(scores))
    if not return_score:
        return best
    if scores.size > 1:
        runner_up = float(np.partition(scores, -2)[-2])
    else:
        runner_up = float('-inf')
    return best, float(scores[best]), runner_up


# ============================================================================
# RECORDS
# ============================================================================

def encode_structure(pairs: Sequence[Tuple[int, int]], codec: StructureCodec) -> Hypervector:
    """
    Encode a record as the bundle of psi(f) (x) phi(x_f) over its (feature, value) pairs.

    Records may cover any subset of the features. The result does not depend on
    the order of the pairs.

    Raises:
        EncodingError: repeated feature or out-of-range index
    """
    features = codec._features()
    pairs = [(int(f), int(a)) for f, a in pairs]
    require_distinct('Record features', [f for f, _ in pairs], EncodingError)
    require_indices('Feature', [f for f, _ in pairs], features.m, EncodingError)
    require_indices('Value', [a for _, a in pairs], codec.m, EncodingError)

    real = codec.value_cb.storage == Storage.REAL
    if not pairs:
        return Hypervector.zeros(codec.d, Storage.REAL if real else Storage.INTEGER)

    total = np.zeros(codec.d, dtype=np.float64 if real else np.int64)
    bound = 0
    for f, a in sorted(pairs):
        key = np.asarray(features.matrix[f], dtype=np.int64)
        value = codec.value_cb.vector(a).to_dense()
        total += key * value
        bound += int(np.max(np.abs(value))) if value.size else 0
    return _as_result(total, real, codec.d, bound)


def decode_feature(h: Hypervector, f: int, codec: StructureCodec,
                   return_score: bool = False) -> DecodeResult:
    """
    Value stored under feature f: argmax_a <phi(a), h (x) psi(f)>.

    Always returns some symbol. With return_score the result is
    (symbol, score, runner-up score) so callers can inspect the margin; an
    absent feature shows up as a low winning score.
    """
    features = codec._features()
    require_indices('Feature', [f], features.m, EncodingError)
    unbound = _check_query(h, codec) * np.asarray(features.matrix[f], dtype=np.float64)
    return _argmax(codec.value_cb.scores(unbound), return_score)


def structure_overlap(h1: Hypervector, h2: Hypervector, codec: StructureCodec) -> float:
    """Estimated number of agreeing features: <h1, h2> / L^2."""
    v1 = _check_query(h1, codec)
    v2 = _check_query(h2, codec)
    return float(np.dot(v1, v2)) / codec.L_sq


def binding_incoherence(codec: StructureCodec) -> float:
    """max over a, a', f of |<phi(a), psi(f) (x) phi(a')>| / L^2."""
    features = codec._features()
    phi = _value_matrix(codec)
    worst = 0.0
    for f in range(features.m):
        key = np.asarray(features.matrix[f], dtype=np.float64)
        worst = max(worst, float(np.abs(phi @ (phi * key).T).max()))
    return worst / codec.L_sq


def cross_feature_incoherence(codec: StructureCodec) -> float:
    """max over a, a' and f != f' of |<phi(a) (x) psi(f), phi(a') (x) psi(f')>| / L^2."""
    features = codec._features()
    if features.m < 2:
        return 0.0
    phi = _value_matrix(codec)
    keys = features.dense_matrix()
    worst = 0.0
    for f in range(features.m):
        for g in range(f + 1, features.m):
            worst = max(worst, float(np.abs(phi @ (phi * (keys[f] * keys[g])).T).max()))
    return worst / codec.L_sq


# ============================================================================
# SEQUENCES
# ============================================================================

def _require_sequence_codebook(codec: StructureCodec) -> None:
    if codec.value_cb.kind != CodebookKind.BIPOLAR:
        raise CodebookError(
            f"Sequence encoding needs a bipolar value codebook, got {codec.value_cb.kind}")


def _sequence_data(xs: Sequence[int], codec: StructureCodec) -> np.ndarray:
    total = np.zeros(codec.d, dtype=np.int64)
    length = len(xs)
    for i, x in enumerate(xs):
        row = np.asarray(codec.value_cb.matrix[x], dtype=np.int64)
        total += np.roll(row, -(length - 1 - i))
    return total


def encode_sequence(xs: Sequence[int], codec: StructureCodec) -> Hypervector:
    """
    Shift encoding: sum over positions of rho^(n-1-i)(phi(x_i)).

    The newest symbol (last in xs) is unshifted.

    Raises:
        EncodingError: len(xs) >= d or an out-of-range symbol
        CodebookError: the value codebook is not bipolar
    """
    _require_sequence_codebook(codec)
    xs = [int(x) for x in xs]
    if len(xs) >= codec.d:
        raise EncodingError(f"Sequence length {len(xs)} must be smaller than d={codec.d}")
    require_indices('Sequence', xs, codec.m, EncodingError)
    if not xs:
        return Hypervector.zeros(codec.d)
    return Hypervector.integer(_sequence_data(xs, codec), bound=len(xs))


@dataclass(frozen=True, eq=False)
class SequenceWindow:
    """
    Sliding window of the n most recent symbols and their shift encoding.

    Until n symbols have arrived the state encodes the partial sequence with
    the newest symbol unshifted, exactly as encode_sequence would.
    """
    codec: StructureCodec
    n: int
    state: np.ndarray
    history: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.state.setflags(write=False)

    @property
    def is_full(self) -> bool:
        return len(self.history) == self.n

    def vector(self) -> Hypervector:
        if not self.history:
            return Hypervector.zeros(self.codec.d)
        return Hypervector.integer(self.state, bound=len(self.history))


def window_new(codec: StructureCodec, n: int) -> SequenceWindow:
    """
    Empty window of length n.

    Raises:
        EncodingError: n < 1 or n >= d
    """
    _require_sequence_codebook(codec)
    require_positive_int('Window length', n, EncodingError)
    if n >= codec.d:
        raise EncodingError(f"Window length {n} must be smaller than d={codec.d}")
    return SequenceWindow(codec=codec, n=n, state=np.zeros(codec.d, dtype=np.int64))


def window_push(w: SequenceWindow, x: int) -> SequenceWindow:
    """
    Append symbol x, evicting the oldest symbol once the window is full.

    Full window: state' = rho(state - rho^(n-1)(phi(oldest))) + phi(x).
    Filling window: state' = rho(state) + phi(x).

    Returns:
        SequenceWindow: the updated window (the input is left untouched)
    """
    require_indices('Sequence', [x], w.codec.m, EncodingError)
    state = w.state
    history = w.history
    if w.is_full:
        oldest = np.asarray(w.codec.value_cb.matrix[history[0]], dtype=np.int64)
        state = state - np.roll(oldest, -(w.n - 1))
        history = history[1:]
    state = np.roll(state, -1) + np.asarray(w.codec.value_cb.matrix[int(x)], dtype=np.int64)
    return SequenceWindow(codec=w.codec, n=w.n, state=state, history=history + (int(x),))


def decode_sequence_position(h: Hypervector, i: int, n: int, codec: StructureCodec,
                             return_score: bool = False) -> DecodeResult:
    """
    Symbol at position i (0 = oldest, n-1 = newest) of a length-n window encoding.

    Undoes the position's shift and returns argmax_a <phi(a), rho^-(n-1-i)(h)>.

    Raises:
        EncodingError: i outside [0, n)
    """
    if not 0 <= i < n:
        raise EncodingError(f"Position {i} outside window of length {n}")
    _check_query(h, codec)
    unshifted = permute(h, -(n - 1 - i))
    return _argmax(codec.value_cb.scores(unshifted.data.astype(np.float64)), return_score)


def decode_sequence(h: Hypervector, n: int, codec: StructureCodec) -> List[int]:
    """Decode every position of a length-n window, oldest first."""
    return [decode_sequence_position(h, i, n, codec) for i in range(n)]


def shift_incoherence(cb: Codebook, n: int) -> float:
    """max over a, a' and 0 < |i| < n of |<phi(a), rho^(i)(phi(a'))>| / L^2."""
    phi = cb.dense_matrix()
    worst = 0.0
    # negative shifts give the transposed score matrix, so i > 0 covers both signs
    for i in range(1, min(n, cb.d)):
        worst = max(worst, float(np.abs(phi @ np.roll(phi, -i, axis=1).T).max()))
    return worst / float(cb.norms_sq.min())


def self_shift_incoherence(cb: Codebook) -> float:
    """max over a and every non-zero shift i of |<phi(a), rho^(i)(phi(a))>| / L^2."""
    phi = cb.dense_matrix()
    spectrum = np.fft.rfft(phi, axis=1)
    autocorr = np.fft.irfft(spectrum * np.conj(spectrum), n=cb.d, axis=1)
    if cb.d < 2:
        return 0.0
    if cb.kind == CodebookKind.BIPOLAR:
        autocorr = np.rint(autocorr)
    return float(np.abs(autocorr[:, 1:]).max()) / float(cb.norms_sq.min())


__all__ = [
    'StructureCodec',
    'SequenceWindow',
    'encode_structure',
    'decode_feature',
    'structure_overlap',
    'binding_incoherence',
    'cross_feature_incoherence',
    'encode_sequence',
    'window_new',
    'window_push',
    'decode_sequence_position',
    'decode_sequence',
    'shift_incoherence',
    'self_shift_incoherence',
]
