"""
Distance-preserving encoders for real vectors.

Three encoders map R^n (or [0,1]^n) into hypervector space:
- PositionIdEncoder: quantize each coordinate to a level codeword, bind it to
  the feature's key, bundle. Squared distances track 2d times the L1 distance.
- SignedRandomProjection: sign(Phi x) with unit-norm Gaussian rows. Hamming
  distance over d tracks the angle between inputs (as a fraction of pi).
- QuantizedRFF: random Fourier features for a shift-invariant kernel, either
  real-valued or quantized to one bit per coordinate.

The second half of the module measures how well an encoder preserves
distances (distortion_report), whether Voronoi assignments survive encoding
(cluster_preservation_check) and the noise margins that follow.
"""
# Standard library imports
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

# Third-party imports
import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import cauchy

# Local application imports
from . import codebook as cbmod
from .codebook import Codebook
from .constants import CodebookError, CodebookKind, Distance, EncoderError, Kernel, Storage
from .hdcore import Hypervector
from .utils import derive_seed, make_rng, quantiles, require_positive_int

logger = logging.getLogger(__name__)


# ============================================================================
# LEVEL CODEBOOKS
# ============================================================================

def level_codebook(m: int, d: int, seed: int) -> Codebook:
    """
    Codebook over m equally spaced levels a_1 = 0, ..., a_m = 1.

    The first codeword is random bipolar. Each following codeword flips the
    next ceil(d / (2(m-1))) coordinates of a seeded permutation, so every
    coordinate flips at most once and the endpoints end up (nearly)
    orthogonal: <phi(a_i), phi(a_j)> = d - 2 (flips between i and j).

    Raises:
        CodebookError: m < 2 or the cumulative flips exceed d
    """
    require_positive_int('Level count', m, CodebookError, minimum=2)
    require_positive_int('d', d, CodebookError)
    step = int(math.ceil(d / (2.0 * (m - 1)) - 1e-9))
    if step * (m - 1) > d:
        raise CodebookError(f"{m} levels need {step * (m - 1)} flips but d={d}")

    base = cbmod.codeword(CodebookKind.BIPOLAR, d, seed, 0).data
    order = make_rng(seed, 'level-flips').permutation(d)
    matrix = np.empty((m, d), dtype=np.int8)
    for j in range(m):
        row = base.copy()
        row[order[:j * step]] *= -1
        matrix[j] = row
    return cbmod.from_matrix(CodebookKind.LEVEL, matrix, seed=seed)


# ============================================================================
# ENCODERS
# ============================================================================

class EuclidEncoder:
    """Common interface: encode one vector or a batch of row vectors."""
    variant: str = ''
    n: int
    d: int
    seed: int

    def encode_matrix(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def encode(self, x: Sequence[float]) -> Hypervector:
        raise NotImplementedError

    def params(self) -> Dict[str, Any]:
        raise NotImplementedError

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n:
            raise EncoderError(f"Input has {X.shape[1]} features, encoder expects n={self.n}")
        if not np.all(np.isfinite(X)):
            raise EncoderError("Input contains non-finite values")
        return X


@dataclass(eq=False)
class PositionIdEncoder(EuclidEncoder):
    """
    Position-ID encoder for inputs in [0,1]^n.

    A single level codebook is shared by all features unless per_feature is set.
    """
    n: int
    bins: int
    d: int
    seed: int
    per_feature: bool = False
    level_cbs: Tuple[Codebook, ...] = field(default=(), repr=False)
    feature_cb: Optional[Codebook] = field(default=None, repr=False)
    variant: str = 'position_id'

    @classmethod
    def create(cls, n: int, bins: int, d: int, seed: int,
               per_feature: bool = False) -> 'PositionIdEncoder':
        require_positive_int('n', n, EncoderError)
        require_positive_int('bins', bins, EncoderError, minimum=2)
        require_positive_int('d', d, EncoderError)
        if per_feature:
            levels = tuple(level_codebook(bins, d, derive_seed(seed, 'level', i)) for i in range(n))
        else:
            levels = (level_codebook(bins, d, derive_seed(seed, 'level')),)
        keys = cbmod.generate(CodebookKind.BIPOLAR, n, d, derive_seed(seed, 'features'))
        logger.info(f"Built position-ID encoder n={n}, bins={bins}, d={d}, per_feature={per_feature}")
        return cls(n=n, bins=bins, d=d, seed=seed, per_feature=per_feature,
                   level_cbs=levels, feature_cb=keys)

    def level_for(self, feature: int) -> Codebook:
        return self.level_cbs[feature if self.per_feature else 0]

    def quantize(self, X: np.ndarray) -> np.ndarray:
        """Nearest level index round(x (bins - 1)) per coordinate, after clamping to [0, 1]."""
        X = self._check_input(X)
        if np.any((X < 0.0) | (X > 1.0)):
            logger.warning(f"Position-ID inputs outside [0, 1] clamped "
                           f"({int(np.sum((X < 0.0) | (X > 1.0)))} coordinates)")
            X = np.clip(X, 0.0, 1.0)
        return np.rint(X * (self.bins - 1)).astype(np.int64)

    def encode_matrix(self, X: np.ndarray) -> np.ndarray:
        levels = self.quantize(X)
        keys = np.asarray(self.feature_cb.matrix, dtype=np.int32)
        out = np.zeros((levels.shape[0], self.d), dtype=np.int32)
        for i in range(self.n):
            level_rows = np.asarray(self.level_for(i).matrix, dtype=np.int32)[levels[:, i]]
            out += level_rows * keys[i]
        return out

    def encode(self, x: Sequence[float]) -> Hypervector:
        return Hypervector.integer(self.encode_matrix(np.asarray(x))[0], bound=self.n)

    @cached_property
    def cross_incoherence(self) -> float:
        """max over f != f' and levels a, a' of |<psi(f) (x) phi(a), psi(f') (x) phi(a')>| / d."""
        if self.n < 2:
            return 0.0
        keys = self.feature_cb.dense_matrix()
        worst = 0.0
        for f in range(self.n):
            for g in range(f + 1, self.n):
                phi_f = self.level_for(f).dense_matrix()
                phi_g = self.level_for(g).dense_matrix() * (keys[f] * keys[g])
                worst = max(worst, float(np.abs(phi_f @ phi_g.T).max()))
        return worst / self.d

    def params(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'n': self.n, 'bins': self.bins, 'd': self.d,
                'seed': self.seed, 'per_feature': self.per_feature}


@dataclass(eq=False)
class SignedRandomProjection(EuclidEncoder):
    """sign(Phi x) with rows of Phi uniform on the unit sphere; sign(0) = +1."""
    n: int
    d: int
    seed: int
    projection: np.ndarray = field(default=None, repr=False)
    variant: str = 'srp'

    @classmethod
    def create(cls, n: int, d: int, seed: int) -> 'SignedRandomProjection':
        require_positive_int('n', n, EncoderError)
        require_positive_int('d', d, EncoderError)
        rows = make_rng(seed, 'srp').standard_normal((d, n))
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return cls(n=n, d=d, seed=seed, projection=rows / norms)

    def encode_matrix(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise EncoderError("Signed random projection is undefined for the zero vector")
        return np.where((X / norms) @ self.projection.T >= 0, 1, -1).astype(np.int8)

    def encode(self, x: Sequence[float]) -> Hypervector:
        return Hypervector(self.encode_matrix(np.asarray(x))[0], self.d, Storage.BIPOLAR, 1)

    def params(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'n': self.n, 'd': self.d, 'seed': self.seed}


@dataclass(eq=False)
class QuantizedRFF(EuclidEncoder):
    """
    Random Fourier features for k(x, x') = exp(-gamma |x - x'|^2) (gaussian)
    or exp(-gamma |x - x'|_1) (laplacian).

    Unquantized: sqrt(2/d) cos(Phi x + b), so <phi(x), phi(x')> estimates k(x, x').
    Quantized: coordinate i is +1 when cos(Phi_i x + b_i) + t_i >= 0, else -1,
    with t_i uniform on [-1, 1].
    """
    n: int
    d: int
    seed: int
    bandwidth: float = 1.0
    kernel: str = Kernel.GAUSSIAN
    quantized: bool = True
    projection: np.ndarray = field(default=None, repr=False)
    phases: np.ndarray = field(default=None, repr=False)
    thresholds: np.ndarray = field(default=None, repr=False)
    variant: str = 'rff'

    @classmethod
    def create(cls, n: int, d: int, seed: int, bandwidth: float = 1.0,
               kernel: str = Kernel.GAUSSIAN, quantized: bool = True) -> 'QuantizedRFF':
        require_positive_int('n', n, EncoderError)
        require_positive_int('d', d, EncoderError)
        if not bandwidth > 0:
            raise EncoderError(f"Kernel bandwidth must be positive, got {bandwidth}")
        projection = sample_spectrum(kernel, bandwidth, d, n, derive_seed(seed, 'rff-spectrum'))
        rng = make_rng(seed, 'rff-offsets')
        phases = rng.uniform(0.0, 2.0 * math.pi, size=d)
        thresholds = rng.uniform(-1.0, 1.0, size=d)
        return cls(n=n, d=d, seed=seed, bandwidth=float(bandwidth), kernel=kernel,
                   quantized=quantized, projection=projection, phases=phases,
                   thresholds=thresholds)

    def features(self, X: np.ndarray) -> np.ndarray:
        """Unscaled cos(Phi x + b) rows."""
        X = self._check_input(X)
        return np.cos(X @ self.projection.T + self.phases)

    def encode_matrix(self, X: np.ndarray) -> np.ndarray:
        waves = self.features(X)
        if self.quantized:
            return np.where(waves + self.thresholds >= 0, 1, -1).astype(np.int8)
        return math.sqrt(2.0 / self.d) * waves

    def encode(self, x: Sequence[float]) -> Hypervector:
        row = self.encode_matrix(np.asarray(x))[0]
        if self.quantized:
            return Hypervector(row, self.d, Storage.BIPOLAR, 1)
        return Hypervector(row, self.d, Storage.REAL)

    def kernel_value(self, x: Sequence[float], y: Sequence[float]) -> float:
        """Exact kernel k(x, y)."""
        return float(kernel_matrix(self.kernel, self.bandwidth, np.atleast_2d(x), np.atleast_2d(y))[0, 0])

    def params(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'n': self.n, 'd': self.d, 'seed': self.seed,
                'bandwidth': self.bandwidth, 'kernel': self.kernel, 'quantized': self.quantized}


def sample_spectrum(kernel: str, bandwidth: float, d: int, n: int, seed: int) -> np.ndarray:
    """
    d frequency vectors drawn from the kernel's spectral distribution.

    Gaussian exp(-gamma |delta|^2): N(0, 2 gamma I).
    Laplacian exp(-gamma |delta|_1): independent Cauchy(0, gamma) coordinates.
    """
    rng = make_rng(seed)
    if kernel == Kernel.GAUSSIAN:
        return rng.normal(0.0, math.sqrt(2.0 * bandwidth), size=(d, n))
    if kernel == Kernel.LAPLACIAN:
        return cauchy.rvs(loc=0.0, scale=bandwidth, size=(d, n), random_state=rng)
    raise EncoderError(f"Unsupported kernel '{kernel}'")


def kernel_matrix(kernel: str, bandwidth: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact kernel values between rows of X and rows of Y."""
    if kernel == Kernel.GAUSSIAN:
        return np.exp(-bandwidth * cdist(X, Y, 'sqeuclidean'))
    if kernel == Kernel.LAPLACIAN:
        return np.exp(-bandwidth * cdist(X, Y, 'cityblock'))
    raise EncoderError(f"Unsupported kernel '{kernel}'")


def build_encoder(params: Dict[str, Any]) -> EuclidEncoder:
    """Rebuild an encoder from params() output; construction is seed-deterministic."""
    variant = params.get('variant')
    if variant == 'position_id':
        return PositionIdEncoder.create(int(params['n']), int(params['bins']), int(params['d']),
                                        int(params['seed']), bool(params.get('per_feature', False)))
    if variant == 'srp':
        return SignedRandomProjection.create(int(params['n']), int(params['d']), int(params['seed']))
    if variant == 'rff':
        return QuantizedRFF.create(int(params['n']), int(params['d']), int(params['seed']),
                                   float(params.get('bandwidth', 1.0)),
                                   params.get('kernel', Kernel.GAUSSIAN),
                                   bool(params.get('quantized', True)))
    raise EncoderError(f"Unknown encoder variant '{variant}'")


# ============================================================================
# ENCODED-SPACE ESTIMATES
# ============================================================================

def _dense(h: Hypervector) -> np.ndarray:
    return h.to_dense().astype(np.float64)


def l1_estimate(h1: Hypervector, h2: Hypervector, enc: PositionIdEncoder) -> float:
    """|h1 - h2|^2 / (2d), the position-ID estimate of |x - x'|_1."""
    if h1.dim != enc.d or h2.dim != enc.d:
        raise EncoderError(f"Encodings must have d={enc.d}")
    diff = _dense(h1) - _dense(h2)
    return float(np.dot(diff, diff)) / (2.0 * enc.d)


def angle_estimate(h1: Hypervector, h2: Hypervector) -> float:
    """Normalized Hamming distance, an estimate of angle(x, x') / pi."""
    if h1.dim != h2.dim:
        raise EncoderError(f"Dimension mismatch: {h1.dim} vs {h2.dim}")
    return float(np.count_nonzero(h1.data != h2.data)) / h1.dim


def dot_estimate(h1: Hypervector, h2: Hypervector) -> float:
    """First-order inversion <x, x'> ~ (pi / 2d) <phi(x), phi(x')> for unit inputs."""
    return math.pi / (2.0 * h1.dim) * float(np.dot(_dense(h1), _dense(h2)))


def cosine_estimate(h1: Hypervector, h2: Hypervector) -> float:
    """cos(pi * angle_estimate)."""
    return math.cos(math.pi * angle_estimate(h1, h2))


def position_id_norm_bounds(enc: PositionIdEncoder) -> Tuple[float, float]:
    """Interval n d +/- n^2 d mu holding |phi(x)|^2 for every input x."""
    spread = enc.n * enc.n * enc.d * enc.cross_incoherence
    centre = float(enc.n * enc.d)
    return centre - spread, centre + spread


# ============================================================================
# DISTANCES
# ============================================================================

def input_distances(X: np.ndarray, Y: np.ndarray, metric: str) -> np.ndarray:
    """Pairwise input-space distances between rows of X and rows of Y."""
    if metric == Distance.L1:
        return cdist(X, Y, 'cityblock')
    if metric == Distance.L2:
        return cdist(X, Y, 'euclidean')
    if metric == Distance.SQ_EUCLID:
        return cdist(X, Y, 'sqeuclidean')
    if metric == Distance.ANGULAR:
        cos = 1.0 - cdist(X, Y, 'cosine')
        return np.arccos(np.clip(cos, -1.0, 1.0)) / math.pi
    raise EncoderError(f"Unknown input distance '{metric}'")


def encoded_distances(H: np.ndarray, G: np.ndarray, metric: str) -> np.ndarray:
    """Pairwise encoded-space distances between rows of H and rows of G."""
    H = np.asarray(H, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    if metric == Distance.SQ_EUCLID:
        return cdist(H, G, 'sqeuclidean')
    if metric == Distance.HAMMING:
        return cdist(H, G, 'hamming') * H.shape[1]
    if metric == Distance.ANGULAR:
        cos = 1.0 - cdist(H, G, 'cosine')
        return np.arccos(np.clip(cos, -1.0, 1.0)) / math.pi
    raise EncoderError(f"Unknown encoded distance '{metric}'")


def _paired(fn, A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    return np.array([fn(A[i:i + 1], B[i:i + 1], metric)[0, 0] for i in range(A.shape[0])])


# ============================================================================
# DISTORTION, CLUSTERS, ROBUSTNESS
# ============================================================================

@dataclass(frozen=True)
class DistortionReport:
    """
    Fit of delta_H ~ alpha * delta_X over a set of pairs.

    beta_max is the largest additive deviation |delta_H - alpha delta_X|.
    """
    pairs_tested: int
    alpha_fit: float
    beta_max: float
    residual_quantiles: Dict[str, float]
    delta_x: str
    delta_h: str
    d: Optional[int] = None

    @property
    def beta_over_alpha(self) -> float:
        return self.beta_max / self.alpha_fit if self.alpha_fit > 0 else math.inf

    def to_dict(self) -> Dict[str, Any]:
        data = {'pairs_tested': self.pairs_tested, 'alpha_fit': self.alpha_fit,
                'beta_max': self.beta_max, 'beta_over_alpha': self.beta_over_alpha,
                'delta_x': self.delta_x, 'delta_h': self.delta_h, 'd': self.d}
        data.update({f"residual_{k}": v for k, v in self.residual_quantiles.items()})
        return data


def fit_distortion(dx: np.ndarray, dh: np.ndarray, delta_x: str, delta_h: str,
                   d: Optional[int] = None) -> DistortionReport:
    """
    Least-squares slope through the origin of dh against dx, plus residuals.

    d records the encoding dimension the distances were measured at.
    """
    dx = np.asarray(dx, dtype=np.float64).ravel()
    dh = np.asarray(dh, dtype=np.float64).ravel()
    denom = float(np.dot(dx, dx))
    if denom == 0.0:
        raise EncoderError("All input distances are zero; the distortion fit is degenerate")
    alpha = float(np.dot(dx, dh)) / denom
    residuals = np.abs(dh - alpha * dx)
    return DistortionReport(pairs_tested=int(dx.size), alpha_fit=alpha,
                            beta_max=float(residuals.max()),
                            residual_quantiles=quantiles(residuals),
                            delta_x=delta_x, delta_h=delta_h, d=d)


def distortion_report(enc: EuclidEncoder, pairs: Sequence[Tuple[Sequence[float], Sequence[float]]],
                      delta_x: str, delta_h: str) -> DistortionReport:
    """
    Measure alpha(d) and beta(d) for an encoder over explicit input pairs.

    Raises:
        EncoderError: fewer than two pairs or all input distances zero
    """
    if len(pairs) < 2:
        raise EncoderError(f"A distortion report needs at least 2 pairs, got {len(pairs)}")
    A = np.array([p[0] for p in pairs], dtype=np.float64)
    B = np.array([p[1] for p in pairs], dtype=np.float64)
    dx = _paired(input_distances, A, B, delta_x)
    dh = _paired(encoded_distances, enc.encode_matrix(A), enc.encode_matrix(B), delta_h)
    report = fit_distortion(dx, dh, delta_x, delta_h, d=enc.d)
    logger.debug(f"Distortion over {report.pairs_tested} pairs: alpha={report.alpha_fit:.4f}, "
                 f"beta={report.beta_max:.4f}")
    return report


@dataclass(frozen=True)
class ClusterReport:
    """Outcome of a cluster-preservation check."""
    points: int
    centroids: int
    min_gap: float
    beta_over_alpha: float
    condition_met: bool
    agreement: float

    @property
    def preserved(self) -> bool:
        return self.agreement == 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {'points': self.points, 'centroids': self.centroids, 'min_gap': self.min_gap,
                'beta_over_alpha': self.beta_over_alpha, 'condition_met': self.condition_met,
                'agreement': self.agreement, 'preserved': self.preserved}


def cluster_preservation_check(enc: EuclidEncoder, centroids: Sequence[Sequence[float]],
                               points: Sequence[Sequence[float]], delta_x: str,
                               delta_h: str) -> ClusterReport:
    """
    Compare nearest-centroid assignments before and after encoding.

    The sufficient condition is beta/alpha < min over points of
    (delta_X(x, c') - delta_X(x, c(x))) / 2, with c' the runner-up centroid.
    It is reported, never asserted.

    Raises:
        EncoderError: empty inputs or repeated centroids
    """
    C = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if C.size == 0 or P.size == 0:
        raise EncoderError("Cluster check needs at least one centroid and one point")
    if len({tuple(row) for row in C}) != C.shape[0]:
        raise EncoderError("Centroids must be distinct")

    dx = input_distances(P, C, delta_x)
    dh = encoded_distances(enc.encode_matrix(P), enc.encode_matrix(C), delta_h)
    before = np.argmin(dx, axis=1)
    after = np.argmin(dh, axis=1)
    agreement = float(np.mean(before == after))

    if C.shape[0] == 1:
        return ClusterReport(points=P.shape[0], centroids=1, min_gap=math.inf,
                             beta_over_alpha=0.0, condition_met=True, agreement=agreement)

    ordered = np.sort(dx, axis=1)
    min_gap = float(np.min(ordered[:, 1] - ordered[:, 0]) / 2.0)
    nonzero = dx.ravel() > 0
    if np.any(nonzero):
        ratio = fit_distortion(dx.ravel()[nonzero], dh.ravel()[nonzero], delta_x, delta_h,
                               d=enc.d).beta_over_alpha
    else:
        ratio = math.inf
    report = ClusterReport(points=P.shape[0], centroids=C.shape[0], min_gap=min_gap,
                           beta_over_alpha=ratio, condition_met=ratio < min_gap,
                           agreement=agreement)
    logger.debug(f"Cluster check: {report.to_dict()}")
    return report


def _check_eps(eps1: float, eps2: float) -> None:
    if not eps2 > eps1 >= 0:
        raise EncoderError(f"Need eps2 > eps1 >= 0, got eps1={eps1}, eps2={eps2}")


def robustness_margin(enc: EuclidEncoder, eps1: float, eps2: float, rho: float,
                      report: DistortionReport) -> float:
    """
    (alpha/4)(eps2 - eps1) - beta/2 - rho; positive means nearest-neighbour order is safe.

    Raises:
        EncoderError: eps2 <= eps1, or a report measured at a dimension other than enc.d
    """
    _check_eps(eps1, eps2)
    if report.d is not None and report.d != enc.d:
        raise EncoderError(f"Distortion report was measured at d={report.d}, encoder has d={enc.d}")
    return report.alpha_fit / 4.0 * (eps2 - eps1) - report.beta_max / 2.0 - rho


def awgn_tolerance(alpha: float, beta: float, L: float, eps1: float, eps2: float) -> float:
    """Largest AWGN sigma keeping the (eps1, eps2) ordering: alpha(eps2-eps1)/(16L) - beta/(8L)."""
    _check_eps(eps1, eps2)
    return alpha * (eps2 - eps1) / (16.0 * L) - beta / (8.0 * L)


def adversarial_tolerance(alpha: float, beta: float, d: int, eps1: float, eps2: float) -> float:
    """Largest adversarial omega keeping the ordering: alpha(eps2-eps1)/(4d) - beta/(2d)."""
    _check_eps(eps1, eps2)
    return alpha * (eps2 - eps1) / (4.0 * d) - beta / (2.0 * d)


__all__: List[str] = [
    'level_codebook',
    'EuclidEncoder',
    'PositionIdEncoder',
    'SignedRandomProjection',
    'QuantizedRFF',
    'sample_spectrum',
    'kernel_matrix',
    'build_encoder',
    'l1_estimate',
    'angle_estimate',
    'dot_estimate',
    'cosine_estimate',
    'position_id_norm_bounds',
    'input_distances',
    'encoded_distances',
    'DistortionReport',
    'fit_distortion',
    'distortion_report',
    'ClusterReport',
    'cluster_preservation_check',
    'robustness_margin',
    'awgn_tolerance',
    'adversarial_tolerance',
]
