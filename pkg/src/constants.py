"""
Constants used throughout the toolkit.
"""


# ==================== Custom Exception Classes ====================
class HDCError(Exception):
    """Base class for all toolkit errors."""
    pass


class DimensionMismatchError(HDCError, ValueError):
    """Raised when operands of a binary operation have different dimensions."""
    pass


class StorageError(HDCError, TypeError):
    """Raised when storage kinds are incompatible without explicit promotion."""
    pass


class CapacityError(HDCError, OverflowError):
    """Raised when a bundle exceeds its declared integer accumulator bound."""
    pass


class OperationError(HDCError, ValueError):
    """Invalid argument to a hypervector operation (e.g. a non-positive clamp bound)."""
    pass


class CodebookError(HDCError, ValueError):
    """Invalid codebook parameters or a codebook that does not match an encoding."""
    pass


class EncodingError(HDCError, ValueError):
    """Duplicate items, repeated features or out-of-range symbol indices."""
    pass


class NoiseModelError(HDCError, ValueError):
    """Invalid noise parameters or a model incompatible with the vector storage."""
    pass


class EncoderError(HDCError, ValueError):
    """Invalid Euclidean encoder parameters or inputs."""
    pass


class ModelError(HDCError, ValueError):
    """Learner misuse: empty models, bad labels, degenerate training sets."""
    pass


class DatasetError(HDCError, ValueError):
    """Ragged, non-numeric or empty CSV input."""
    pass


class ContainerFormatError(HDCError, ValueError):
    """Corrupt or unsupported container file."""
    pass


class ConfigError(HDCError, ValueError):
    """Experiment configuration failed schema validation."""
    pass


class ResourceLimitError(HDCError):
    """A configured resource cap (dimension, trials, alphabet) was exceeded."""
    pass


# ==================== Constants ====================
class Storage:
    """Hypervector storage kinds."""
    BIPOLAR = "bipolar"
    INTEGER = "integer"
    REAL = "real"
    SPARSE = "sparse"

    DENSE = frozenset({BIPOLAR, INTEGER, REAL})


class CodebookKind:
    """Codeword distributions."""
    BIPOLAR = "bipolar"
    GAUSSIAN = "gaussian"
    SPARSE = "sparse"
    LEVEL = "level"
    ORTHOGONAL = "orthogonal"

    ALL = (BIPOLAR, GAUSSIAN, SPARSE, LEVEL, ORTHOGONAL)


class Bundling:
    """Set bundling modes."""
    SUM = "sum"
    MAX = "max"
    THRESHOLD = "threshold"


class QueryRule:
    """Membership decision rules for Max-bundled (Bloom) sets."""
    HALF_NORM = "half_norm"
    CONTAINMENT = "containment"


class Regime:
    """Dimension sizing regimes."""
    UNIFORM = "uniform"
    POINTWISE = "pointwise"


class NoiseModel:
    """Corruption models for encoded vectors."""
    AWGN = "awgn"
    UNIFORM_INTEGER = "uniform_integer"
    TERNARY_FLIP = "ternary_flip"
    ADVERSARIAL_L2 = "adversarial_l2"
    ADVERSARIAL_L1 = "adversarial_l1"

    PASSIVE = frozenset({AWGN, UNIFORM_INTEGER, TERNARY_FLIP})
    ADVERSARIAL = frozenset({ADVERSARIAL_L2, ADVERSARIAL_L1})
    ALL = (AWGN, UNIFORM_INTEGER, TERNARY_FLIP, ADVERSARIAL_L2, ADVERSARIAL_L1)


class Distance:
    """Distance functions for distortion reports."""
    L1 = "l1"
    L2 = "l2"
    ANGULAR = "angular"
    SQ_EUCLID = "sq_euclid"
    HAMMING = "hamming"

    INPUT = (L1, L2, ANGULAR)
    ENCODED = (SQ_EUCLID, HAMMING, ANGULAR)


class Kernel:
    """Shift-invariant kernels supported by random Fourier features."""
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


class Calibration:
    """Constants the toolkit fixes where only the order of growth is known."""
    UNIFORM_DIMENSION = 8.0
    POINTWISE_DIMENSION = 8.0
    BLOOM_DIMENSION = 1.443
    CLAMP_FACTOR = 2.0
    WINNOW_FACTOR = 2.0


class ExitCode:
    """CLI exit codes."""
    OK = 0
    EXPERIMENT_FAILED = 1
    SCHEMA_ERROR = 2
    RESOURCE_LIMIT = 3


class ContainerFormat:
    """Shared container file constants."""
    MAGIC = b"HDC-CONTAINER"
    VERSION = 1
    SUFFIX = ".hdc"


class OutputFormat:
    """Report formats."""
    CSV = "csv"
    JSONL = "jsonl"


class ResourceLimits:
    """Default desk-scale resource caps."""
    MAX_DIMENSION = 1_048_576
    MAX_TRIALS = 100_000
    MAX_ALPHABET = 1_000_000
    MAX_SPARSE_SEPARATOR_DIMENSION = 2_000_000
