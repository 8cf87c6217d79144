"""
Hypervector value type and element-wise algebra.

Every other module builds on the operations here: bundling (sum and max),
binding with bipolar keys, cyclic permutation, similarity, clamping and
thresholding. Hypervectors are immutable; every operation returns a new value.

Storage kinds:
    bipolar  - d entries in {-1, +1}
    integer  - d integer entries in [-b, +b] for a declared bound b
    real     - d float64 entries
    sparse   - strictly increasing indices of the non-zero (one) coordinates
"""
# Standard library imports
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

# Third-party imports
import numpy as np

# Local application imports
from .constants import (
    CapacityError,
    DimensionMismatchError,
    OperationError,
    Storage,
    StorageError,
)

logger = logging.getLogger(__name__)


def _accumulator_dtype(bound: int) -> np.dtype:
    """Smallest signed integer dtype holding [-bound, bound]."""
    for dtype in (np.int8, np.int16, np.int32, np.int64):
        if bound <= np.iinfo(dtype).max:
            return np.dtype(dtype)
    raise CapacityError(f"Bound {bound} does not fit a 64-bit accumulator")


@dataclass(frozen=True, eq=False)
class Hypervector:
    """
    A d-dimensional point with one of four storage kinds.

    Use the constructors (`bipolar`, `integer`, `real`, `sparse`, `zeros`)
    rather than instantiating directly; they normalize dtypes and validate
    the storage invariants.
    """
    data: np.ndarray
    dim: int
    storage: str
    bound: Optional[int] = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise OperationError(f"Hypervector dimension must be positive, got {self.dim}")
        data = self.data
        if self.storage == Storage.SPARSE:
            if data.ndim != 1:
                raise StorageError("Sparse support must be a 1-D index array")
            if data.size and (data[0] < 0 or data[-1] >= self.dim or np.any(np.diff(data) <= 0)):
                raise StorageError("Sparse indices must be strictly increasing and < dim")
        else:
            if data.shape != (self.dim,):
                raise DimensionMismatchError(
                    f"Dense data has shape {data.shape}, expected ({self.dim},)")
            if self.storage == Storage.BIPOLAR:
                if not np.all(np.abs(data) == 1):
                    raise StorageError("Bipolar entries must be exactly +1 or -1")
            elif self.storage == Storage.INTEGER:
                if self.bound is None or self.bound < 0:
                    raise StorageError("Integer storage requires a non-negative bound")
                if data.size and int(np.max(np.abs(data.astype(np.int64)))) > self.bound:
                    raise CapacityError(f"Entry magnitude exceeds declared bound {self.bound}")
            elif self.storage != Storage.REAL:
                raise StorageError(f"Unknown storage kind '{self.storage}'")
        data.setflags(write=False)

    # ------------------------------------------------------------------ constructors
    @classmethod
    def bipolar(cls, values: Sequence[int]) -> 'Hypervector':
        arr = np.array(values, dtype=np.int8)
        return cls(arr, int(arr.shape[0]), Storage.BIPOLAR, 1)

    @classmethod
    def integer(cls, values: Sequence[int], bound: Optional[int] = None) -> 'Hypervector':
        raw = np.array(values, dtype=np.int64)
        if bound is None:
            bound = int(np.max(np.abs(raw))) if raw.size else 0
        elif raw.size and int(np.max(np.abs(raw))) > bound:
            raise CapacityError(f"Entry magnitude exceeds declared bound {bound}")
        return cls(raw.astype(_accumulator_dtype(bound)), int(raw.shape[0]), Storage.INTEGER, int(bound))

    @classmethod
    def real(cls, values: Sequence[float]) -> 'Hypervector':
        arr = np.array(values, dtype=np.float64)
        return cls(arr, int(arr.shape[0]), Storage.REAL)

    @classmethod
    def sparse(cls, indices: Sequence[int], dim: int) -> 'Hypervector':
        arr = np.array(sorted(int(i) for i in indices), dtype=np.int64)
        return cls(arr, int(dim), Storage.SPARSE)

    @classmethod
    def zeros(cls, dim: int, storage: str = Storage.INTEGER) -> 'Hypervector':
        """Additive identity; integer storage with bound 0 unless sparse or real is requested."""
        if storage == Storage.SPARSE:
            return cls(np.zeros(0, dtype=np.int64), dim, Storage.SPARSE)
        if storage == Storage.REAL:
            return cls(np.zeros(dim, dtype=np.float64), dim, Storage.REAL)
        return cls(np.zeros(dim, dtype=np.int8), dim, Storage.INTEGER, 0)

    @classmethod
    def identity(cls, dim: int) -> 'Hypervector':
        """All-ones bipolar vector, the identity element of binding."""
        return cls(np.ones(dim, dtype=np.int8), dim, Storage.BIPOLAR, 1)

    # ------------------------------------------------------------------ views
    @property
    def is_sparse(self) -> bool:
        return self.storage == Storage.SPARSE

    @property
    def support(self) -> np.ndarray:
        """Indices of non-zero coordinates."""
        if self.is_sparse:
            return self.data
        return np.flatnonzero(self.data)

    @property
    def density(self) -> float:
        return float(self.support.size) / self.dim

    def to_dense(self) -> np.ndarray:
        """Dense numpy copy (sparse vectors expand to a 0/1 int8 array)."""
        if self.is_sparse:
            out = np.zeros(self.dim, dtype=np.int8)
            out[self.data] = 1
            return out
        return np.array(self.data)

    def promote(self, storage: str) -> 'Hypervector':
        """
        Explicit storage promotion.

        sparse -> integer (0/1 entries, bound 1), bipolar -> integer (bound 1),
        any dense -> real. Other directions are lossy and refused.
        """
        if storage == self.storage:
            return self
        if storage == Storage.REAL:
            return Hypervector(self.to_dense().astype(np.float64), self.dim, Storage.REAL)
        if storage == Storage.INTEGER and self.storage in (Storage.SPARSE, Storage.BIPOLAR):
            return Hypervector(self.to_dense().astype(np.int8), self.dim, Storage.INTEGER, 1)
        raise StorageError(f"Cannot promote {self.storage} to {storage}")

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        if self.dim != other.dim or self.is_sparse != other.is_sparse:
            return False
        return bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.dim, self.is_sparse, self.data.astype(np.float64).tobytes()))

    def __repr__(self) -> str:
        if self.is_sparse:
            return f"Hypervector(sparse, dim={self.dim}, nnz={self.data.size})"
        bound = f", bound={self.bound}" if self.storage == Storage.INTEGER else ""
        return f"Hypervector({self.storage}, dim={self.dim}{bound})"


# ============================================================================
# CHECKS
# ============================================================================

def check_same_dim(*vectors: Hypervector) -> int:
    """Return the shared dimension or raise DimensionMismatchError."""
    dims = {v.dim for v in vectors}
    if len(dims) > 1:
        raise DimensionMismatchError(f"Dimension mismatch between operands: {sorted(dims)}")
    return vectors[0].dim


def _require_dense(v: Hypervector, op: str) -> None:
    if v.is_sparse:
        raise StorageError(f"{op} requires dense storage; promote the sparse operand first")


def _as_float(v: Hypervector) -> np.ndarray:
    return v.data.astype(np.float64)


# ============================================================================
# BUNDLING
# ============================================================================

def bundle_sum(vs: Sequence[Hypervector], allow_empty: bool = False,
               dim: Optional[int] = None, max_bundle: Optional[int] = None) -> Hypervector:
    """
    Element-wise sum of hypervectors.

    Bipolar, integer and sparse operands accumulate into integer storage whose
    bound is the sum of the operand bounds (one per bipolar or sparse operand).
    Any real operand makes the result real.

    Args:
        vs: Operands, all of one dimension
        allow_empty: Return the zero vector for an empty list (requires dim)
        dim: Dimension of the empty bundle
        max_bundle: Declared maximum bundle bound; exceeding it raises CapacityError

    Returns:
        Hypervector: integer or real sum

    Raises:
        DimensionMismatchError: operands differ in dimension
        StorageError: sparse and dense operands are mixed
        CapacityError: the integer bound exceeds max_bundle
    """
    if len(vs) == 0:
        if not allow_empty:
            raise OperationError("bundle_sum of an empty list (pass allow_empty=True)")
        if dim is None:
            raise OperationError("Empty bundle needs an explicit dim")
        return Hypervector.zeros(dim)

    d = check_same_dim(*vs)
    kinds = {v.storage for v in vs}
    if Storage.SPARSE in kinds and len(kinds) > 1:
        raise StorageError("Cannot mix sparse and dense operands without explicit promotion")

    if Storage.REAL in kinds:
        total = np.zeros(d, dtype=np.float64)
        for v in vs:
            total += v.to_dense().astype(np.float64)
        return Hypervector(total, d, Storage.REAL)

    bound = sum(1 if v.storage in (Storage.BIPOLAR, Storage.SPARSE) else int(v.bound) for v in vs)
    if max_bundle is not None and bound > max_bundle:
        raise CapacityError(f"Bundle bound {bound} exceeds declared maximum {max_bundle}")

    total = np.zeros(d, dtype=np.int64)
    for v in vs:
        if v.is_sparse:
            total[v.data] += 1
        else:
            total += v.data
    return Hypervector(total.astype(_accumulator_dtype(bound)), d, Storage.INTEGER, bound)


def bundle_max(vs: Sequence[Hypervector], dim: Optional[int] = None) -> Hypervector:
    """
    Element-wise maximum of sparse binary vectors, i.e. the union of supports.

    Raises:
        StorageError: a non-sparse operand is given
    """
    if len(vs) == 0:
        if dim is None:
            raise OperationError("Empty max-bundle needs an explicit dim")
        return Hypervector.zeros(dim, Storage.SPARSE)
    d = check_same_dim(*vs)
    for v in vs:
        if not v.is_sparse:
            raise StorageError(f"bundle_max requires sparse operands, got {v.storage}")
    union = vs[0].data
    for v in vs[1:]:
        union = np.union1d(union, v.data)
    return Hypervector(np.asarray(union, dtype=np.int64), d, Storage.SPARSE)


# ============================================================================
# BINDING AND PERMUTATION
# ============================================================================

def bind(a: Hypervector, k: Hypervector) -> Hypervector:
    """
    Element-wise product with a bipolar key.

    Binding preserves norms and dot products, and is its own inverse:
    bind(bind(a, k), k) == a.

    Raises:
        StorageError: the key is not bipolar or `a` is sparse
    """
    if k.storage != Storage.BIPOLAR:
        raise StorageError(f"Binding key must be bipolar, got {k.storage}")
    _require_dense(a, "bind")
    d = check_same_dim(a, k)
    if a.storage == Storage.REAL:
        return Hypervector(a.data * k.data, d, Storage.REAL)
    product = a.data.astype(np.int64) * k.data
    if a.storage == Storage.BIPOLAR:
        return Hypervector(product.astype(np.int8), d, Storage.BIPOLAR, 1)
    return Hypervector(product.astype(a.data.dtype), d, Storage.INTEGER, a.bound)


def permute(v: Hypervector, i: int) -> Hypervector:
    """
    Cyclic left shift by i coordinates (negative i shifts right).

    permute([z1, z2, z3], 1) == [z2, z3, z1]; i is reduced mod d.
    """
    _require_dense(v, "permute")
    shift = int(i) % v.dim
    if shift == 0:
        return v
    return Hypervector(np.roll(v.data, -shift), v.dim, v.storage, v.bound)


# ============================================================================
# SIMILARITY
# ============================================================================

def dot(a: Hypervector, b: Hypervector) -> float:
    """
    Exact inner product.

    Dense pairs of any storage are supported. Sparse vectors pair with sparse
    (size of the support intersection) or bipolar (sum over the support);
    other sparse mixes need explicit promotion.
    """
    check_same_dim(a, b)
    if a.is_sparse and b.is_sparse:
        return float(np.intersect1d(a.data, b.data, assume_unique=True).size)
    if a.is_sparse or b.is_sparse:
        sparse, dense = (a, b) if a.is_sparse else (b, a)
        if dense.storage != Storage.BIPOLAR:
            raise StorageError(
                f"Sparse/{dense.storage} dot requires explicit promotion of the sparse operand")
        return float(np.sum(dense.data[sparse.data], dtype=np.int64))
    if Storage.REAL in (a.storage, b.storage):
        return float(np.dot(_as_float(a), _as_float(b)))
    return float(np.dot(a.data.astype(np.int64), b.data.astype(np.int64)))


def norm2(a: Hypervector) -> float:
    """Euclidean norm."""
    if a.is_sparse:
        return math.sqrt(a.data.size)
    return math.sqrt(dot(a, a))


def hamming(a: Hypervector, b: Hypervector) -> int:
    """Number of disagreeing coordinates between two bipolar vectors."""
    check_same_dim(a, b)
    if a.storage != Storage.BIPOLAR or b.storage != Storage.BIPOLAR:
        raise StorageError("hamming requires bipolar operands")
    return int(np.count_nonzero(a.data != b.data))


# ============================================================================
# PRECISION CONTROL
# ============================================================================

def clamp(v: Hypervector, c: int) -> Hypervector:
    """
    Truncate every coordinate to [-c, c].

    Raises:
        OperationError: c <= 0
    """
    if c <= 0:
        raise OperationError(f"Clamp bound must be positive, got {c}")
    _require_dense(v, "clamp")
    if v.storage == Storage.BIPOLAR:
        return v
    if v.storage == Storage.REAL:
        return Hypervector(np.clip(v.data, -c, c), v.dim, Storage.REAL)
    bound = min(int(v.bound), int(c))
    clipped = np.clip(v.data.astype(np.int64), -bound, bound)
    return Hypervector(clipped.astype(_accumulator_dtype(bound)), v.dim, Storage.INTEGER, bound)


def binarize(v: Hypervector, t: float, output: str = Storage.SPARSE) -> Hypervector:
    """
    Coordinate-wise threshold g_t(x) = 1 if x >= t else 0.

    Args:
        v: Dense hypervector
        t: Threshold
        output: 'sparse' for the index set of ones, 'bipolar' to map 1 -> +1, 0 -> -1
    """
    _require_dense(v, "binarize")
    hits = v.data.astype(np.float64) >= t
    if output == Storage.SPARSE:
        return Hypervector(np.flatnonzero(hits).astype(np.int64), v.dim, Storage.SPARSE)
    if output == Storage.BIPOLAR:
        return Hypervector(np.where(hits, 1, -1).astype(np.int8), v.dim, Storage.BIPOLAR, 1)
    raise StorageError(f"binarize output must be sparse or bipolar, got {output}")


def subtract(a: Hypervector, b: Hypervector) -> Hypervector:
    """Element-wise difference a - b of dense vectors (integer bounds add)."""
    _require_dense(a, "subtract")
    _require_dense(b, "subtract")
    d = check_same_dim(a, b)
    if Storage.REAL in (a.storage, b.storage):
        return Hypervector(_as_float(a) - _as_float(b), d, Storage.REAL)
    bound = int(a.bound or 1) + int(b.bound or 1)
    diff = a.data.astype(np.int64) - b.data.astype(np.int64)
    return Hypervector(diff.astype(_accumulator_dtype(bound)), d, Storage.INTEGER, bound)


def negate(v: Hypervector) -> Hypervector:
    """Additive inverse of a dense vector."""
    _require_dense(v, "negate")
    return Hypervector((-v.data.astype(np.int64)).astype(v.data.dtype)
                       if v.storage != Storage.REAL else -v.data,
                       v.dim, v.storage, v.bound)


def stack(vs: Sequence[Hypervector]) -> np.ndarray:
    """Rows of dense copies; handy for batched scoring."""
    if not vs:
        return np.zeros((0, 0))
    check_same_dim(*vs)
    return np.vstack([v.to_dense() for v in vs])


__all__: List[str] = [
    'Hypervector',
    'bundle_sum',
    'bundle_max',
    'bind',
    'permute',
    'dot',
    'norm2',
    'hamming',
    'clamp',
    'binarize',
    'subtract',
    'negate',
    'stack',
    'check_same_dim',
]
