"""Codebook Generation and Incoherence Statistics

This module generates random codebooks (the map from alphabet symbols to
hypervectors), measures their incoherence, and sizes the encoding dimension
for target decoding guarantees. It provides functionality for:
- Sampling bipolar, Gaussian and sparse binary codebooks reproducibly
- Regenerating a single codeword without materializing the codebook
- Measuring norms, kappa, pairwise and subset incoherence
- Closed-form dimension sizing and the matching tail bounds

Codewords are drawn from a counter-based generator keyed by (seed, symbol
index), so codebooks are bit-identical on regeneration regardless of the
order in which codewords are produced.
"""
# Standard library imports
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Union

# Third-party imports
import numpy as np
from scipy import sparse as sp

# Local application imports
from .constants import Calibration, CodebookError, CodebookKind, Regime, Storage
from .hdcore import Hypervector
from .utils import (
    bit_stream,
    gaussian_stream,
    make_rng,
    require_positive_int,
    require_probability,
    uniform_stream,
)

logger = logging.getLogger(__name__)

_GRAM_BLOCK = 512


@dataclass(frozen=True)
class CodebookStats:
    """Derived codebook statistics."""
    L: float
    L_max: float
    kappa: float
    mu_emp: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {'L': self.L, 'L_max': self.L_max, 'kappa': self.kappa, 'mu_emp': self.mu_emp}


@dataclass(frozen=True, eq=False)
class Codebook:
    """
    m codewords of dimension d plus the parameters that generated them.

    Dense kinds keep an (m, d) numpy matrix; the sparse kind keeps a CSR
    matrix of 0/1 entries. Statistics are computed lazily and cached.
    """
    kind: str
    m: int
    d: int
    seed: int
    matrix: Union[np.ndarray, sp.csr_matrix]
    p: Optional[float] = None
    sigma: Optional[float] = None
    fixed_weight: bool = False

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.m, self.d):
            raise CodebookError(
                f"Codebook matrix has shape {self.matrix.shape}, expected ({self.m}, {self.d})")
        if isinstance(self.matrix, np.ndarray):
            self.matrix.setflags(write=False)

    # ------------------------------------------------------------------ basic views
    @property
    def is_sparse(self) -> bool:
        return self.kind == CodebookKind.SPARSE

    @property
    def storage(self) -> str:
        if self.is_sparse:
            return Storage.SPARSE
        if self.kind == CodebookKind.GAUSSIAN:
            return Storage.REAL
        if self.kind == CodebookKind.ORTHOGONAL:
            return Storage.INTEGER
        return Storage.BIPOLAR

    def vector(self, index: int) -> Hypervector:
        """Codeword for one symbol."""
        if not 0 <= index < self.m:
            raise CodebookError(f"Symbol {index} out of range [0, {self.m})")
        if self.is_sparse:
            row = self.matrix.getrow(index)
            return Hypervector(np.sort(row.indices).astype(np.int64), self.d, Storage.SPARSE)
        row = np.array(self.matrix[index])
        if self.storage == Storage.BIPOLAR:
            return Hypervector(row.astype(np.int8), self.d, Storage.BIPOLAR, 1)
        if self.storage == Storage.INTEGER:
            return Hypervector.integer(row)
        return Hypervector(row.astype(np.float64), self.d, Storage.REAL)

    @property
    def vectors(self) -> List[Hypervector]:
        return [self.vector(i) for i in range(self.m)]

    def dense_matrix(self) -> np.ndarray:
        """(m, d) float64 copy of the codewords."""
        if self.is_sparse:
            return self.matrix.toarray().astype(np.float64)
        return np.asarray(self.matrix, dtype=np.float64)

    def scores(self, h: Union[Hypervector, np.ndarray]) -> np.ndarray:
        """Inner product of every codeword with h (length-m float64 array)."""
        vec = h.to_dense() if isinstance(h, Hypervector) else np.asarray(h)
        if vec.shape != (self.d,):
            raise CodebookError(f"Query of dimension {vec.shape[-1]} against codebook d={self.d}")
        vec = vec.astype(np.float64)
        if self.is_sparse:
            return np.asarray(self.matrix @ vec, dtype=np.float64).ravel()
        return np.asarray(self.matrix, dtype=np.float64) @ vec

    # ------------------------------------------------------------------ statistics
    @cached_property
    def norms_sq(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.matrix.sum(axis=1), dtype=np.float64).ravel()
        mat = np.asarray(self.matrix, dtype=np.float64)
        return np.einsum('ij,ij->i', mat, mat)

    @cached_property
    def stats(self) -> CodebookStats:
        norms = np.sqrt(self.norms_sq)
        L = float(norms.min())
        L_max = float(norms.max())
        kappa = (L * L) / (L_max * L_max) if L_max > 0 else 0.0
        mu = incoherence(self) if self.m >= 2 and L > 0 else None
        return CodebookStats(L=L, L_max=L_max, kappa=kappa, mu_emp=mu)

    @cached_property
    def identity_hash(self) -> str:
        """Hash of the generating parameters, used to pair encodings with codebooks."""
        header = {'kind': self.kind, 'm': self.m, 'd': self.d, 'seed': self.seed,
                  'p': self.p, 'sigma': self.sigma, 'fixed_weight': self.fixed_weight}
        if self.kind in (CodebookKind.ORTHOGONAL, CodebookKind.LEVEL):
            header['payload'] = hashlib.blake2b(
                np.ascontiguousarray(self.matrix, dtype='<f8').tobytes(), digest_size=8).hexdigest()
        return hashlib.blake2b(json.dumps(header, sort_keys=True).encode('utf-8'),
                               digest_size=16).hexdigest()

    def params(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'm': self.m, 'd': self.d, 'seed': self.seed,
                'p': self.p, 'sigma': self.sigma, 'fixed_weight': self.fixed_weight}

    def __repr__(self) -> str:
        return f"Codebook(kind={self.kind}, m={self.m}, d={self.d}, seed={self.seed})"


# ============================================================================
# GENERATION
# ============================================================================

def codeword(kind: str, d: int, seed: int, index: int, p: Optional[float] = None,
             sigma: float = 1.0, fixed_weight: bool = False) -> Hypervector:
    """
    Regenerate a single codeword from (seed, symbol index).

    Coordinate j depends only on (seed, index, j), so the result equals row
    `index` of generate(kind, m, d, seed) for any m > index.
    """
    return _codeword_from_row(kind, d, _draw_row(kind, d, seed, index, p, sigma, fixed_weight))


def _draw_row(kind: str, d: int, seed: int, index: int, p: Optional[float],
              sigma: float, fixed_weight: bool) -> np.ndarray:
    if kind == CodebookKind.BIPOLAR:
        return (2 * bit_stream(seed, index, d).astype(np.int8) - 1).astype(np.int8)
    if kind == CodebookKind.GAUSSIAN:
        return sigma * gaussian_stream(seed, index, d)
    if kind == CodebookKind.SPARSE:
        u = uniform_stream(seed, index, d)
        if fixed_weight:
            weight = max(1, int(round(p * d)))
            return np.sort(np.argsort(u, kind='stable')[:weight]).astype(np.int64)
        return np.flatnonzero(u < p).astype(np.int64)
    raise CodebookError(f"Cannot sample codebook kind '{kind}'")


def _codeword_from_row(kind: str, d: int, row: np.ndarray) -> Hypervector:
    if kind == CodebookKind.SPARSE:
        return Hypervector(row, d, Storage.SPARSE)
    if kind == CodebookKind.GAUSSIAN:
        return Hypervector(row, d, Storage.REAL)
    return Hypervector(row, d, Storage.BIPOLAR, 1)


def _validate(kind: str, m: int, d: int, p: Optional[float], sigma: float) -> None:
    if kind not in CodebookKind.ALL:
        raise CodebookError(f"Unknown codebook kind '{kind}'")
    require_positive_int('m', m, CodebookError)
    require_positive_int('d', d, CodebookError)
    if kind == CodebookKind.SPARSE:
        if p is None:
            raise CodebookError("Sparse codebooks need a density p")
        require_probability('p', p, CodebookError)
    if kind == CodebookKind.GAUSSIAN and not sigma > 0:
        raise CodebookError(f"Gaussian sigma must be positive, got {sigma}")


def generate(kind: str, m: int, d: int, seed: int, p: Optional[float] = None,
             sigma: float = 1.0, fixed_weight: bool = False) -> Codebook:
    """
    Sample a codebook with i.i.d. coordinates.

    Args:
        kind: 'bipolar' (uniform on {-1,+1}), 'gaussian' (N(0, sigma^2)) or
              'sparse' (Bernoulli(p) per coordinate, or exactly round(p*d) ones
              when fixed_weight is set)
        m: Alphabet size
        d: Dimension
        seed: 64-bit seed
        p: Density for sparse codebooks
        sigma: Standard deviation for Gaussian codebooks
        fixed_weight: Sparse variant with constant support size

    Returns:
        Codebook: reproducible from (kind, m, d, seed, p, sigma, fixed_weight)

    Raises:
        CodebookError: invalid parameters
    """
    _validate(kind, m, d, p, sigma)
    if kind in (CodebookKind.LEVEL, CodebookKind.ORTHOGONAL):
        raise CodebookError(f"Use the dedicated constructor for '{kind}' codebooks")

    if kind == CodebookKind.SPARSE:
        rows = [_draw_row(kind, d, seed, i, p, sigma, fixed_weight) for i in range(m)]
        indptr = np.zeros(m + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([r.size for r in rows])
        indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        matrix = sp.csr_matrix((np.ones(indices.size, dtype=np.int8), indices, indptr),
                               shape=(m, d))
        cb = Codebook(kind, m, d, seed, matrix, p=float(p), fixed_weight=fixed_weight)
    else:
        dtype = np.int8 if kind == CodebookKind.BIPOLAR else np.float64
        matrix = np.empty((m, d), dtype=dtype)
        for i in range(m):
            matrix[i] = _draw_row(kind, d, seed, i, p, sigma, fixed_weight)
        cb = Codebook(kind, m, d, seed, matrix,
                      sigma=float(sigma) if kind == CodebookKind.GAUSSIAN else None)

    logger.debug(f"Generated {cb}")
    return cb


def orthogonal(m: int, d: int, scale: int = 1) -> Codebook:
    """
    Rows of a scaled identity: m mutually orthogonal codewords (requires m <= d).

    Serves as the zero cross-talk reference codebook.
    """
    require_positive_int('m', m, CodebookError)
    require_positive_int('d', d, CodebookError)
    if m > d:
        raise CodebookError(f"An orthogonal codebook needs m <= d (m={m}, d={d})")
    matrix = np.zeros((m, d), dtype=np.int64)
    matrix[np.arange(m), np.arange(m)] = scale
    return Codebook(CodebookKind.ORTHOGONAL, m, d, 0, matrix)


def from_matrix(kind: str, matrix: np.ndarray, seed: int = 0, p: Optional[float] = None,
                sigma: Optional[float] = None, fixed_weight: bool = False) -> Codebook:
    """Wrap an existing (m, d) matrix (dense or CSR) as a codebook."""
    m, d = matrix.shape
    if kind == CodebookKind.SPARSE and not sp.issparse(matrix):
        matrix = sp.csr_matrix(np.asarray(matrix, dtype=np.int8))
    return Codebook(kind, int(m), int(d), int(seed), matrix, p=p, sigma=sigma,
                    fixed_weight=fixed_weight)


# ============================================================================
# INCOHERENCE
# ============================================================================

def _max_offdiag_abs(matrix: Union[np.ndarray, sp.csr_matrix]) -> float:
    """max |<row_i, row_j>| over i != j, computed in row blocks."""
    m = matrix.shape[0]
    if sp.issparse(matrix):
        full = matrix.astype(np.float64)
    else:
        full = np.asarray(matrix, dtype=np.float64)
    best = 0.0
    for start in range(0, m, _GRAM_BLOCK):
        stop = min(m, start + _GRAM_BLOCK)
        block = full[start:stop] @ full.T
        block = block.toarray() if sp.issparse(block) else np.asarray(block)
        block = np.abs(block)
        block[np.arange(stop - start), np.arange(start, stop)] = 0.0
        best = max(best, float(block.max()))
    return best


def incoherence(cb: Codebook) -> float:
    """
    Empirical incoherence: max over distinct pairs of |<phi(a), phi(a')>| / L^2.

    Raises:
        CodebookError: fewer than two codewords
    """
    if cb.m < 2:
        raise CodebookError("Incoherence needs at least two codewords")
    L_sq = float(cb.norms_sq.min())
    if L_sq <= 0:
        raise CodebookError("Incoherence undefined: codebook contains a zero codeword")
    return _max_offdiag_abs(cb.matrix) / L_sq


def kappa(cb: Codebook) -> float:
    """L^2 / L_max^2."""
    return cb.stats.kappa


def min_norm(cb: Codebook) -> float:
    """L, the smallest codeword norm."""
    return cb.stats.L


def subset_incoherence_estimate(cb: Codebook, s: int, trials: int, seed: int) -> float:
    """
    Empirical subset incoherence.

    Over `trials` random subsets S of size s, the largest
    |sum_{a' in S} <phi(a), phi(a')>| / L^2 over symbols a outside S.

    Raises:
        CodebookError: s >= m or trials < 1
    """
    require_positive_int('s', s, CodebookError)
    require_positive_int('trials', trials, CodebookError)
    if s >= cb.m:
        raise CodebookError(f"Subset size s={s} must be smaller than m={cb.m}")
    L_sq = float(cb.norms_sq.min())
    rng = make_rng(seed, 'subset-incoherence')
    worst = 0.0
    for _ in range(trials):
        subset = rng.choice(cb.m, size=s, replace=False)
        if cb.is_sparse:
            bundle = np.asarray(cb.matrix[subset].sum(axis=0), dtype=np.float64).ravel()
        else:
            bundle = np.asarray(cb.matrix[subset], dtype=np.float64).sum(axis=0)
        scores = np.abs(cb.scores(bundle))
        scores[subset] = 0.0
        worst = max(worst, float(scores.max()) / L_sq)
    return worst


def norm_concentration(cb: Codebook) -> Dict[str, float]:
    """Squared-norm summary: mean, min, max, relative spread and kappa."""
    norms = cb.norms_sq
    mean = float(norms.mean())
    return {
        'mean_sq_norm': mean,
        'min_sq_norm': float(norms.min()),
        'max_sq_norm': float(norms.max()),
        'max_relative_deviation': float(np.max(np.abs(norms - mean)) / mean) if mean else 0.0,
        'kappa': cb.stats.kappa,
    }


# ============================================================================
# SIZING AND TAIL BOUNDS
# ============================================================================

def _ceil(x: float) -> int:
    # guards ceil against floating-point noise on exact integers
    return int(math.ceil(x - 1e-9))


def dimension_for(s: int, m: int, delta: float, regime: str = Regime.UNIFORM) -> int:
    """
    Encoding dimension for threshold decoding of sets of size <= s.

    Uniform:   ceil(8 s^2 ln(m^2 / delta)), every subset decodes with prob. 1 - delta
    Pointwise: ceil(8 s ln(2m / delta)),    any fixed subset decodes with prob. 1 - delta

    The constant 8 instantiates the bipolar Hoeffding tails at mu = 1/(2s)
    and tau = 1/2 respectively.

    Raises:
        CodebookError: s < 1, m < 2, delta outside (0, 1) or unknown regime
    """
    require_positive_int('s', s, CodebookError)
    require_positive_int('m', m, CodebookError, minimum=2)
    require_probability('delta', delta, CodebookError)
    if regime == Regime.UNIFORM:
        return _ceil(Calibration.UNIFORM_DIMENSION * s * s * math.log(m * m / delta))
    if regime == Regime.POINTWISE:
        return _ceil(Calibration.POINTWISE_DIMENSION * s * math.log(2 * m / delta))
    raise CodebookError(f"Unknown sizing regime '{regime}'")


def incoherence_tail_bound(m: int, d: int, mu: float, kappa_value: float = 1.0,
                           sigma: float = 1.0, L_sq: Optional[float] = None) -> float:
    """
    Union bound on P(codebook is not mu-incoherent) for sub-Gaussian codewords.

    m^2 exp(-mu^2 kappa L^2 / (2 sigma^2)), with L^2 = d unless given.
    """
    L_sq = float(d) if L_sq is None else L_sq
    return min(1.0, m * m * math.exp(-(mu ** 2) * kappa_value * L_sq / (2.0 * sigma ** 2)))


def subset_incoherence_tail_bound(m: int, d: int, s: int, tau: float) -> float:
    """Bipolar subset-incoherence failure bound 2m exp(-tau^2 d / (2s))."""
    return min(1.0, 2.0 * m * math.exp(-(tau ** 2) * d / (2.0 * s)))


def incoherence_scale(m: int, d: int, delta: float) -> float:
    """The mu reached with probability 1 - delta by a bipolar codebook: sqrt(2 ln(m^2/delta) / d)."""
    return math.sqrt(2.0 * math.log(m * m / delta) / d)


__all__ = [
    'Codebook',
    'CodebookStats',
    'codeword',
    'generate',
    'orthogonal',
    'from_matrix',
    'incoherence',
    'kappa',
    'min_norm',
    'subset_incoherence_estimate',
    'norm_concentration',
    'dimension_for',
    'incoherence_tail_bound',
    'subset_incoherence_tail_bound',
    'incoherence_scale',
]
