"""
Euclidean encoder experiments: distortion, kernel approximation, cluster
preservation and noise robustness.
"""
# Standard library imports
import logging
import math
from typing import Any, Dict, List, Tuple

# Third-party imports
import numpy as np
from scipy.stats import spearmanr

# Local application imports
from ..constants import ConfigError, Distance, Kernel
from ..euclid import (PositionIdEncoder, QuantizedRFF, SignedRandomProjection,
                      adversarial_tolerance, awgn_tolerance, cluster_preservation_check,
                      fit_distortion, kernel_matrix, position_id_norm_bounds, robustness_margin)
from ..reporting import Check, ExperimentReport
from ..utils import make_rng, quantiles
from .base import Param, RunContext, register

logger = logging.getLogger(__name__)

_EPS = 1e-9
_CHUNK = 64

SRP = 'srp'
POSITION_ID = 'position_id'


# ============================================================================
# SAMPLING HELPERS
# ============================================================================

def unit_rows(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Rows drawn uniformly from the unit sphere in R^n."""
    rows = rng.standard_normal((count, n))
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return rows / norms


def rotate_towards(rng: np.random.Generator, x: np.ndarray, angle: float) -> np.ndarray:
    """A unit vector at exactly `angle` radians from the unit vector x."""
    g = rng.standard_normal(x.shape[0])
    v = g - np.dot(g, x) * x
    v /= np.linalg.norm(v)
    return math.cos(angle) * x + math.sin(angle) * v


def _row_angles(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    cos = np.sum(X * Y, axis=1) / (np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1))
    return np.arccos(np.clip(cos, -1.0, 1.0)) / math.pi


# ============================================================================
# SIGNED RANDOM PROJECTION
# ============================================================================

@register('srp-distortion', 'Hamming distance of sign projections against the input angle', [
    Param('n', int, 32, 'Input dimension', minimum=2),
    Param('d', int, 4096, 'Encoding dimension', minimum=1),
    Param('pairs', int, 1000, 'Random unit pairs per encoder', minimum=2),
    Param('delta', float, 0.01, 'Failure probability of the angle bound', minimum=0.0, maximum=1.0),
    Param('trials', int, 1, 'Encoders drawn', minimum=1),
])
def srp_distortion(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    n, d, delta = params['n'], params['d'], params['delta']
    ctx.require_trials(params['pairs'], 'pairs')
    # twice the Hoeffding radius sqrt(ln(2/delta) / (2d)) for a mean of d Bernoulli flips
    angle_bound = math.sqrt(2.0 * math.log(2.0 / delta) / d)

    def trial(t: int) -> List[Dict[str, Any]]:
        enc = SignedRandomProjection.create(n, d, ctx.trial_seed('srp', t))
        rng = make_rng(ctx.seed, 'pairs', t)
        X, Y = unit_rows(rng, params['pairs'], n), unit_rows(rng, params['pairs'], n)
        H, G = enc.encode_matrix(X), enc.encode_matrix(Y)
        theta = _row_angles(X, Y)
        theta_hat = np.mean(H != G, axis=1)
        dots = np.sum(X * Y, axis=1)
        dot_hat = math.pi / (2.0 * d) * np.sum(H.astype(np.float64) * G, axis=1)
        return [{'trial': t, 'pair': i, 'theta': float(theta[i]), 'theta_hat': float(theta_hat[i]),
                 'error': float(abs(theta_hat[i] - theta[i])), 'dot': float(dots[i]),
                 'dot_estimate': float(dot_hat[i])} for i in range(len(theta))]

    rows = [r for chunk in ctx.map_trials(trial, params['trials'], 'srp-distortion') for r in chunk]
    errors = np.array([r['error'] for r in rows])
    within = float(np.mean(errors <= angle_bound))
    report = fit_distortion(np.array([r['theta'] for r in rows]),
                            np.array([r['theta_hat'] for r in rows]) * d,
                            Distance.ANGULAR, Distance.HAMMING)

    checks = [Check('pairs with |theta_hat - theta| within the bound', within, 1.0 - delta, '>=')]
    metrics = {'angle_bound': angle_bound, 'alpha_fit': report.alpha_fit, 'beta_max': report.beta_max,
               'dot_error_max': float(max(abs(r['dot'] - r['dot_estimate']) for r in rows))}
    metrics.update({f"error_{k}": v for k, v in quantiles(errors).items()})
    return ExperimentReport('srp-distortion', params, rows, checks, metrics)


# ============================================================================
# POSITION-ID
# ============================================================================

@register('posid-distortion', 'Position-ID squared distance against the L1 distance', [
    Param('n', int, 8, 'Input dimension', minimum=1),
    Param('bins', int, 64, 'Quantization levels', minimum=2),
    Param('d', int, 65536, 'Encoding dimension', minimum=1),
    Param('pairs', int, 500, 'Random pairs in [0,1]^n per encoder', minimum=2),
    Param('per_feature', bool, False, 'Separate level codebook per feature'),
    Param('trials', int, 1, 'Encoders drawn', minimum=1),
])
def posid_distortion(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    n, bins, d = params['n'], params['bins'], params['d']
    ctx.require_trials(params['pairs'], 'pairs')

    def trial(t: int) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
        enc = PositionIdEncoder.create(n, bins, d, ctx.trial_seed('position-id', t),
                                       per_feature=params['per_feature'])
        step = int(math.ceil(d / (2.0 * (bins - 1)) - 1e-9))
        alpha = 2.0 * step * (bins - 1) / d
        mu = enc.cross_incoherence
        slack = 2.0 * step * n / d + 2.0 * n * (n - 1) * mu
        lower, upper = position_id_norm_bounds(enc)

        rng = make_rng(ctx.seed, 'pairs', t)
        X, Y = rng.random((params['pairs'], n)), rng.random((params['pairs'], n))
        rows = []
        for start in range(0, X.shape[0], _CHUNK):
            A, B = X[start:start + _CHUNK], Y[start:start + _CHUNK]
            HA = enc.encode_matrix(A).astype(np.int64)
            HB = enc.encode_matrix(B).astype(np.int64)
            sq = np.sum((HA - HB) ** 2, axis=1)
            norms = np.sum(HA * HA, axis=1)
            for i in range(A.shape[0]):
                l1 = float(np.sum(np.abs(A[i] - B[i])))
                estimate = float(sq[i]) / (2.0 * d)
                rows.append({'trial': t, 'pair': start + i, 'l1': l1, 'l1_estimate': estimate,
                             'sq_distance': float(sq[i]), 'deviation': abs(estimate - alpha * l1),
                             'slack': slack, 'norm_sq': float(norms[i]),
                             'norm_in_bounds': bool(lower - _EPS <= norms[i] <= upper + _EPS)})
        return rows, {'alpha': alpha, 'mu': mu, 'slack': slack}

    results = ctx.map_trials(trial, params['trials'], 'posid-distortion')
    rows = [r for chunk, _ in results for r in chunk]
    fit = fit_distortion(np.array([r['l1'] for r in rows]), np.array([r['sq_distance'] for r in rows]),
                         Distance.L1, Distance.SQ_EUCLID)
    checks = [
        Check('pairs outside the alpha L1 +/- slack sandwich',
              sum(1 for r in rows if r['deviation'] > r['slack'] + _EPS), 0, '==', hard=True),
        Check('encodings with |phi(x)|^2 outside n d +/- n^2 d mu',
              sum(1 for r in rows if not r['norm_in_bounds']), 0, '==', hard=True),
    ]
    metrics = {'alpha': results[0][1]['alpha'], 'cross_incoherence': results[0][1]['mu'],
               'slack': results[0][1]['slack'], 'alpha_fit_sq_over_l1': fit.alpha_fit,
               'beta_max': fit.beta_max,
               'deviation_max': float(max(r['deviation'] for r in rows))}
    return ExperimentReport('posid-distortion', params, rows, checks, metrics)


# ============================================================================
# RANDOM FOURIER FEATURES
# ============================================================================

@register('rff-kernel', 'Random Fourier features against the exact kernel', [
    Param('n', int, 4, 'Input dimension', minimum=1),
    Param('d', int, 8192, 'Encoding dimension', minimum=1),
    Param('pairs', int, 1000, 'Random pairs per encoder', minimum=2),
    Param('bandwidth', float, 1.0, 'Kernel bandwidth gamma', minimum=0.0),
    Param('kernel', str, Kernel.GAUSSIAN, 'Kernel', choices=(Kernel.GAUSSIAN, Kernel.LAPLACIAN)),
    Param('scale', float, 1.5, 'Inputs are uniform on [0, scale]^n', minimum=0.0),
    Param('mae_factor', float, 3.0, 'Allowed mean absolute error in units of 1/sqrt(d)', minimum=0.0),
    Param('min_rank', float, 0.99, 'Required rank correlation for the quantized encoder',
          minimum=-1.0, maximum=1.0),
    Param('trials', int, 1, 'Encoders drawn', minimum=1),
])
def rff_kernel(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    n, d = params['n'], params['d']
    ctx.require_trials(params['pairs'], 'pairs')

    def trial(t: int) -> List[Dict[str, Any]]:
        seed = ctx.trial_seed('rff', t)
        exact = QuantizedRFF.create(n, d, seed, params['bandwidth'], params['kernel'], quantized=False)
        binary = QuantizedRFF.create(n, d, seed, params['bandwidth'], params['kernel'], quantized=True)
        rng = make_rng(ctx.seed, 'pairs', t)
        X = rng.random((params['pairs'], n)) * params['scale']
        Y = rng.random((params['pairs'], n)) * params['scale']
        k = np.array([kernel_matrix(params['kernel'], params['bandwidth'], X[i:i + 1], Y[i:i + 1])[0, 0]
                      for i in range(X.shape[0])])
        dots = np.sum(exact.encode_matrix(X) * exact.encode_matrix(Y), axis=1)
        hamming = np.mean(binary.encode_matrix(X) != binary.encode_matrix(Y), axis=1)
        return [{'trial': t, 'pair': i, 'kernel': float(k[i]), 'dot': float(dots[i]),
                 'abs_error': float(abs(dots[i] - k[i])), 'hamming_fraction': float(hamming[i])}
                for i in range(k.size)]

    rows = [r for chunk in ctx.map_trials(trial, params['trials'], 'rff-kernel') for r in chunk]
    mae = float(np.mean([r['abs_error'] for r in rows]))
    rank = float(spearmanr([r['kernel'] for r in rows],
                           [-r['hamming_fraction'] for r in rows]).correlation)
    checks = [
        Check('mean |<phi(x), phi(y)> - k(x, y)|', mae, params['mae_factor'] / math.sqrt(d), '<='),
        Check('rank correlation of -hamming/d with k', rank, params['min_rank'], '>='),
    ]
    metrics = {'abs_error_max': float(max(r['abs_error'] for r in rows)),
               'kernel_mean': float(np.mean([r['kernel'] for r in rows]))}
    return ExperimentReport('rff-kernel', params, rows, checks, metrics)


# ============================================================================
# CLUSTERS
# ============================================================================

def _make_encoder(kind: str, n: int, d: int, bins: int, seed: int):
    if kind == SRP:
        return SignedRandomProjection.create(n, d, seed)
    return PositionIdEncoder.create(n, bins, d, seed)


def _distances(kind: str) -> Tuple[str, str]:
    if kind == SRP:
        return Distance.ANGULAR, Distance.HAMMING
    return Distance.L1, Distance.SQ_EUCLID


def _synthetic_clusters(kind: str, rng: np.random.Generator, params: Dict[str, Any]
                        ) -> Tuple[np.ndarray, np.ndarray]:
    n, count, per = params['n'], params['centroids'], params['points']
    if kind == SRP:
        centroids = unit_rows(rng, count, n)
        points = np.repeat(centroids, per, axis=0) + params['spread'] * rng.standard_normal((count * per, n))
    else:
        centroids = rng.uniform(0.2, 0.8, size=(count, n))
        points = np.clip(np.repeat(centroids, per, axis=0)
                         + params['spread'] * rng.standard_normal((count * per, n)), 0.0, 1.0)
    return centroids, points


def _data_clusters(ctx: RunContext) -> Tuple[np.ndarray, np.ndarray]:
    data = ctx.data
    if data.labels is None:
        raise ConfigError("cluster-preserve on a dataset needs a label column")
    labels = np.unique(data.labels)
    centroids = np.array([data.features[data.labels == c].mean(axis=0) for c in labels])
    return centroids, data.features


@register('cluster-preserve', 'Nearest-centroid assignments before and after encoding', [
    Param('encoder', str, SRP, 'Encoder', choices=(SRP, POSITION_ID)),
    Param('n', int, 16, 'Input dimension (synthetic clusters)', minimum=1),
    Param('d', int, 4096, 'Encoding dimension', minimum=1),
    Param('bins', int, 32, 'Position-ID levels', minimum=2),
    Param('centroids', int, 4, 'Synthetic clusters', minimum=1),
    Param('points', int, 50, 'Points per synthetic cluster', minimum=1),
    Param('spread', float, 0.1, 'Standard deviation around each centroid', minimum=0.0),
    Param('trials', int, 10, 'Encoders drawn', minimum=1),
], uses_data=True)
def cluster_preserve(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    kind = params['encoder']
    delta_x, delta_h = _distances(kind)

    def trial(t: int) -> Dict[str, Any]:
        if ctx.data is not None:
            centroids, points = _data_clusters(ctx)
        else:
            centroids, points = _synthetic_clusters(kind, make_rng(ctx.seed, 'clusters', t), params)
        enc = _make_encoder(kind, centroids.shape[1], params['d'], params['bins'],
                            ctx.trial_seed('encoder', t))
        report = cluster_preservation_check(enc, centroids, points, delta_x, delta_h)
        return dict({'trial': t}, **report.to_dict())

    rows = ctx.map_trials(trial, params['trials'], 'cluster-preserve')
    checks = [Check('trials meeting the condition without full agreement',
                    sum(1 for r in rows if r['condition_met'] and not r['preserved']), 0, '==',
                    hard=True)]
    metrics = {'agreement_mean': float(np.mean([r['agreement'] for r in rows])),
               'preserved_fraction': float(np.mean([r['preserved'] for r in rows])),
               'condition_fraction': float(np.mean([r['condition_met'] for r in rows])),
               'source': ctx.data.source if ctx.data is not None else 'synthetic'}
    return ExperimentReport('cluster-preserve', params, rows, checks, metrics)


# ============================================================================
# ROBUSTNESS
# ============================================================================

@register('euclid-robustness', 'Nearest-neighbour order of near and far points under AWGN', [
    Param('n', int, 16, 'Input dimension', minimum=2),
    Param('d', int, 4096, 'Encoding dimension', minimum=1),
    Param('eps1', float, 0.1, 'Angle (fraction of pi) of the near point', minimum=0.0),
    Param('eps2', float, 0.3, 'Angle (fraction of pi) of the far point', minimum=0.0),
    Param('delta', float, 0.05, 'Failure probability', minimum=0.0, maximum=1.0),
    Param('fraction', float, 0.5, 'Noise sigma as a fraction of the tolerance', minimum=0.0),
    Param('calibration_pairs', int, 500, 'Pairs used to fit alpha and beta', minimum=2),
    Param('trials', int, 500, 'Query triples', minimum=1),
])
def euclid_robustness(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    n, d, eps1, eps2 = params['n'], params['d'], params['eps1'], params['eps2']
    if not eps2 > eps1:
        raise ConfigError(f"Need eps2 > eps1, got eps1={eps1}, eps2={eps2}")
    enc = SignedRandomProjection.create(n, d, ctx.trial_seed('srp'))

    # alpha, beta on squared encoded distance against the angle, over angles in [0, pi/2]
    rng = make_rng(ctx.seed, 'calibration')
    X = unit_rows(rng, params['calibration_pairs'], n)
    angles = rng.uniform(0.0, 0.5, size=X.shape[0])
    Y = np.array([rotate_towards(rng, x, a * math.pi) for x, a in zip(X, angles)])
    sq = np.sum((enc.encode_matrix(X).astype(np.float64) - enc.encode_matrix(Y)) ** 2, axis=1)
    report = fit_distortion(angles, sq, Distance.ANGULAR, Distance.SQ_EUCLID, d=d)
    L = math.sqrt(d)
    limit = awgn_tolerance(report.alpha_fit, report.beta_max, L, eps1, eps2)
    sigma = params['fraction'] * limit

    def trial(t: int) -> Dict[str, Any]:
        trng = make_rng(ctx.seed, 'query', t)
        x = unit_rows(trng, 1, n)[0]
        near, far = rotate_towards(trng, x, eps1 * math.pi), rotate_towards(trng, x, eps2 * math.pi)
        H = enc.encode_matrix(np.vstack([x, near, far])).astype(np.float64)
        noise = trng.normal(0.0, sigma, size=d) if sigma > 0 else np.zeros(d)
        query = H[0] + noise
        to_near = float(np.sum((query - H[1]) ** 2))
        to_far = float(np.sum((query - H[2]) ** 2))
        rho = abs(float(np.dot(noise, H[2] - H[1]))) / 2.0
        return {'trial': t, 'sigma': sigma, 'to_near': to_near, 'to_far': to_far,
                'violated': to_near >= to_far,
                'margin': robustness_margin(enc, eps1, eps2, rho, report)}

    rows = ctx.map_trials(trial, params['trials'], 'euclid-robustness')
    violation_rate = float(np.mean([r['violated'] for r in rows]))
    checks = [
        Check('AWGN tolerance is positive', limit, 0.0, '>='),
        Check('order violations', violation_rate, 2.0 * params['delta'], '<='),
    ]
    metrics = {'alpha_fit': report.alpha_fit, 'beta_max': report.beta_max, 'awgn_tolerance': limit,
               'sigma': sigma,
               'adversarial_tolerance': adversarial_tolerance(report.alpha_fit, report.beta_max,
                                                              d, eps1, eps2),
               'positive_margin_fraction': float(np.mean([r['margin'] > 0 for r in rows]))}
    return ExperimentReport('euclid-robustness', params, rows, checks, metrics)


__all__ = [
    'unit_rows',
    'rotate_towards',
    'srp_distortion',
    'posid_distortion',
    'rff_kernel',
    'cluster_preserve',
    'euclid_robustness',
]
