"""
Set encoding, membership decoding and cardinality estimates.

A set S over the alphabet is encoded by bundling the codewords of its items.
Three bundling modes are supported:
- sum: element-wise sum; membership by <phi(a), phi(S)> >= L^2 / 2
- max: support union of sparse binary codewords (a Bloom filter)
- threshold: the sum passed through g_t, stored as a 0/1 vector

Size, intersection and union estimates read the sum bundle's norms and inner
products. Context-dependent thinning (cdt_thin) controls the density of sparse
binary bundles.
"""
# Standard library imports
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Set, Tuple

# Third-party imports
import numpy as np

# Local application imports
from .codebook import Codebook
from .constants import (
    Bundling,
    Calibration,
    CodebookError,
    EncodingError,
    OperationError,
    QueryRule,
    Storage,
    StorageError,
)
from .hdcore import Hypervector, binarize, clamp
from .utils import make_rng, require_distinct, require_indices, require_positive_int, require_probability

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EncodedSet:
    """
    An encoded set together with how it was built.

    Attributes:
        vector: The bundle
        codebook_id: identity_hash of the codebook the items were drawn from
        bundling: 'sum', 'max' or 'threshold'
        threshold: t for threshold bundling
        s_declared: Intended maximum set size, if the caller declared one
        n_items: Number of items bundled
    """
    vector: Hypervector
    codebook_id: str
    bundling: str
    threshold: Optional[float] = None
    s_declared: Optional[int] = None
    n_items: int = 0

    @property
    def dim(self) -> int:
        return self.vector.dim

    def clamped(self, c: Optional[int] = None) -> 'EncodedSet':
        """
        Low-precision copy of a sum bundle with every coordinate truncated to [-c, c].

        Args:
            c: Clamp bound; defaults to clamp_bound(s_declared or n_items)
        """
        if self.bundling != Bundling.SUM:
            raise EncodingError(f"Only sum bundles can be clamped, not '{self.bundling}'")
        if c is None:
            c = clamp_bound(max(1, self.s_declared or self.n_items))
        return replace(self, vector=clamp(self.vector, c))


# ============================================================================
# SIZING HELPERS
# ============================================================================

def bloom_parameters(s: int, delta: float) -> Tuple[float, int]:
    """
    Density and dimension for a max-bundled set of up to s items.

    p = ln 2 / s and d = ceil(1.443 s log2(1/delta)), the classical Bloom sizing
    with about log2(1/delta) ones per codeword.

    Returns:
        tuple: (p, d)
    """
    require_positive_int('s', s, EncodingError)
    require_probability('delta', delta, EncodingError)
    p = math.log(2.0) / s
    d = int(math.ceil(Calibration.BLOOM_DIMENSION * s * math.log2(1.0 / delta) - 1e-9))
    return p, max(d, 1)


def clamp_bound(s: int) -> int:
    """Clamp level ceil(2 sqrt(s)) for a bundle of s bipolar codewords."""
    require_positive_int('s', s, EncodingError)
    return int(math.ceil(Calibration.CLAMP_FACTOR * math.sqrt(s) - 1e-9))


# ============================================================================
# ENCODING
# ============================================================================

def _check_items(items: Sequence[int], cb: Codebook) -> np.ndarray:
    items = [int(i) for i in items]
    require_distinct('Set', items, EncodingError)
    require_indices('Set', items, cb.m, EncodingError)
    # sorted so the float summation order never depends on the caller's order
    return np.array(sorted(items), dtype=np.int64)


def _sum_rows(cb: Codebook, rows: np.ndarray) -> Hypervector:
    if rows.size == 0:
        return Hypervector.zeros(cb.d, Storage.REAL if cb.storage == Storage.REAL else Storage.INTEGER)
    if cb.is_sparse:
        total = np.asarray(cb.matrix[rows].sum(axis=0), dtype=np.int64).ravel()
        return Hypervector.integer(total, bound=int(rows.size))
    block = np.asarray(cb.matrix[rows])
    if cb.storage == Storage.REAL:
        total = np.zeros(cb.d, dtype=np.float64)
        for row in block:
            total += row
        return Hypervector(total, cb.d, Storage.REAL)
    total = block.astype(np.int64).sum(axis=0)
    bound = int(np.abs(block).max(axis=1).astype(np.int64).sum())
    return Hypervector.integer(total, bound=bound)


def encode_set(items: Sequence[int], cb: Codebook, bundling: str = Bundling.SUM,
               threshold: Optional[float] = None, s_declared: Optional[int] = None) -> EncodedSet:
    """
    Encode a set of symbol indices.

    Args:
        items: Distinct symbol indices in [0, m)
        cb: Codebook supplying the codewords
        bundling: 'sum', 'max' (sparse codebooks only) or 'threshold'
        threshold: t for threshold bundling
        s_declared: Optional intended maximum set size

    Returns:
        EncodedSet: the bundle; sum bundles are order-independent bit for bit

    Raises:
        EncodingError: duplicate or out-of-range items, max bundling on a dense
                       codebook, or threshold bundling without a threshold
    """
    rows = _check_items(items, cb)

    if bundling == Bundling.SUM:
        vector = _sum_rows(cb, rows)
    elif bundling == Bundling.MAX:
        if not cb.is_sparse:
            raise EncodingError("Max bundling requires a sparse binary codebook")
        if rows.size == 0:
            vector = Hypervector.zeros(cb.d, Storage.SPARSE)
        else:
            support = np.unique(cb.matrix[rows].indices).astype(np.int64)
            vector = Hypervector(support, cb.d, Storage.SPARSE)
    elif bundling == Bundling.THRESHOLD:
        if threshold is None:
            raise EncodingError("Threshold bundling needs a threshold t")
        vector = binarize(_sum_rows(cb, rows), threshold, output=Storage.SPARSE)
    else:
        raise EncodingError(f"Unknown bundling mode '{bundling}'")

    logger.debug(f"Encoded set of {rows.size} items ({bundling}) with {cb}")
    return EncodedSet(vector=vector, codebook_id=cb.identity_hash, bundling=bundling,
                      threshold=threshold if bundling == Bundling.THRESHOLD else None,
                      s_declared=s_declared, n_items=int(rows.size))


# ============================================================================
# QUERIES
# ============================================================================

def _check_codebook(es: EncodedSet, cb: Codebook) -> None:
    if es.codebook_id != cb.identity_hash:
        raise CodebookError("Encoded set was built with a different codebook")
    if es.dim != cb.d:
        raise CodebookError(f"Encoded set has d={es.dim}, codebook has d={cb.d}")


def query_scores(es: EncodedSet, cb: Codebook) -> np.ndarray:
    """Raw <phi(a), phi(S)> for every symbol a."""
    _check_codebook(es, cb)
    return cb.scores(es.vector)


def _accept(scores: np.ndarray, norms_sq: np.ndarray, es: EncodedSet, cb: Codebook,
            rule: Optional[str]) -> np.ndarray:
    half_norm = 0.5 * float(cb.norms_sq.min())
    if es.bundling == Bundling.MAX:
        rule = rule or QueryRule.CONTAINMENT
        if rule == QueryRule.CONTAINMENT:
            return scores >= norms_sq
        if rule != QueryRule.HALF_NORM:
            raise EncodingError(f"Unknown query rule '{rule}'")
    elif rule not in (None, QueryRule.HALF_NORM):
        raise EncodingError(f"Query rule '{rule}' only applies to max-bundled sets")
    return scores >= half_norm


def member_query(es: EncodedSet, a: int, cb: Codebook, rule: Optional[str] = None) -> bool:
    """
    Decide whether symbol a belongs to the encoded set.

    Sum and threshold bundles accept when <phi(a), phi(S)> >= L^2 / 2 (ties
    accept). Max bundles default to exact containment, <phi(a), phi(S)> equal
    to |phi(a)|_1, with the L^2 / 2 rule selectable through `rule`.

    Raises:
        CodebookError: es was built with a different codebook
        EncodingError: a is out of range or the rule is unknown
    """
    _check_codebook(es, cb)
    require_indices('Query', [a], cb.m, EncodingError)
    score = np.array([_single_score(es, cb, a)])
    return bool(_accept(score, cb.norms_sq[[a]], es, cb, rule)[0])


def _single_score(es: EncodedSet, cb: Codebook, a: int) -> float:
    row = cb.vector(a)
    vec = es.vector
    if row.is_sparse and vec.is_sparse:
        return float(np.intersect1d(row.data, vec.data, assume_unique=True).size)
    return float(np.dot(row.to_dense().astype(np.float64), vec.to_dense().astype(np.float64)))


def probe(es: EncodedSet, v: Hypervector, cb: Codebook, rule: Optional[str] = None) -> bool:
    """
    Membership test for an arbitrary codeword v drawn from cb's distribution.

    Used to measure false-positive rates with fresh symbols that were never
    materialized in the codebook.
    """
    _check_codebook(es, cb)
    if v.dim != cb.d:
        raise CodebookError(f"Probe has d={v.dim}, codebook has d={cb.d}")
    if v.is_sparse and es.vector.is_sparse:
        score = float(np.intersect1d(v.data, es.vector.data, assume_unique=True).size)
        norm_sq = float(v.data.size)
    else:
        dense = v.to_dense().astype(np.float64)
        score = float(np.dot(dense, es.vector.to_dense().astype(np.float64)))
        norm_sq = float(np.dot(dense, dense))
    return bool(_accept(np.array([score]), np.array([norm_sq]), es, cb, rule)[0])


def decode_set(es: EncodedSet, cb: Codebook, rule: Optional[str] = None) -> Set[int]:
    """Every symbol member_query accepts."""
    scores = query_scores(es, cb)
    accepted = np.flatnonzero(_accept(scores, cb.norms_sq, es, cb, rule))
    return {int(a) for a in accepted}


# ============================================================================
# CARDINALITY ESTIMATES
# ============================================================================

def _require_sum(*sets: EncodedSet) -> None:
    for es in sets:
        if es.bundling != Bundling.SUM:
            raise EncodingError(f"Size estimates need sum bundles, got '{es.bundling}'")


def _dense(es: EncodedSet) -> np.ndarray:
    return es.vector.to_dense().astype(np.float64)


def size_estimate(es: EncodedSet, cb: Codebook) -> float:
    """|phi(S)|^2 / L^2."""
    _require_sum(es)
    _check_codebook(es, cb)
    v = _dense(es)
    return float(np.dot(v, v)) / float(cb.norms_sq.min())


def intersection_estimate(a: EncodedSet, b: EncodedSet, cb: Codebook) -> float:
    """<phi(S), phi(S')> / L^2."""
    _require_sum(a, b)
    _check_codebook(a, cb)
    _check_codebook(b, cb)
    return float(np.dot(_dense(a), _dense(b))) / float(cb.norms_sq.min())


def union_estimate(a: EncodedSet, b: EncodedSet, cb: Codebook) -> float:
    """size(a) + size(b) - intersection(a, b)."""
    return size_estimate(a, cb) + size_estimate(b, cb) - intersection_estimate(a, b, cb)


# ============================================================================
# CONTEXT-DEPENDENT THINNING
# ============================================================================

def cdt_thin(v: Hypervector, rounds: int, perm_seed: int) -> Hypervector:
    """
    Thin a sparse binary vector by intersecting it with permuted copies of itself.

    Round r draws permutation sigma_r from (perm_seed, r) and replaces the
    current vector u by u AND sigma_r(u), so density never increases.

    Raises:
        StorageError: v is not sparse
        OperationError: rounds < 0
    """
    if not v.is_sparse:
        raise StorageError("cdt_thin requires a sparse binary vector")
    if rounds < 0:
        raise OperationError(f"rounds must be >= 0, got {rounds}")
    current = v.to_dense().astype(bool)
    for r in range(rounds):
        if not current.any():
            break
        perm = make_rng(perm_seed, 'cdt', r).permutation(v.dim)
        current = current & current[perm]
    thinned = Hypervector(np.flatnonzero(current).astype(np.int64), v.dim, Storage.SPARSE)
    logger.debug(f"CDT {rounds} rounds: density {v.density:.5f} -> {thinned.density:.5f}")
    return thinned


__all__ = [
    'EncodedSet',
    'bloom_parameters',
    'clamp_bound',
    'encode_set',
    'query_scores',
    'member_query',
    'probe',
    'decode_set',
    'size_estimate',
    'intersection_estimate',
    'union_estimate',
    'cdt_thin',
]
