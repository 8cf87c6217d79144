"""
Learning experiments: prototype classification, Winnow mistake counts and
the sparse-separator construction.
"""
# Standard library imports
import logging
import math
from typing import Any, Dict, List, Tuple

# Third-party imports
import numpy as np
from scipy.spatial.distance import cdist

# Local application imports
from ..constants import ConfigError, Kernel
from ..euclid import QuantizedRFF, SignedRandomProjection
from ..learn import (accuracy, perceptron_finetune, perceptron_train, predict_batch,
                     separating_function, sparse_separator_dimension,
                     sparse_separator_experiment, train_prototypes, winnow_train)
from ..reporting import Check, ExperimentReport
from ..utils import make_rng
from .base import Param, RunContext, register

logger = logging.getLogger(__name__)

SRP = 'srp'
RFF = 'rff'


# ============================================================================
# PROTOTYPE CLASSIFICATION
# ============================================================================

def _blobs(rng: np.random.Generator, u: np.ndarray, per_class: int, separation: float
           ) -> Tuple[np.ndarray, np.ndarray]:
    """Two unit-variance Gaussian blobs at +/- (separation/2) u."""
    labels = np.repeat([0, 1], per_class)
    centres = np.where(labels[:, None] == 0, 1.0, -1.0) * (separation / 2.0) * u
    return centres + rng.standard_normal((2 * per_class, u.shape[0])), labels


def _split(rng: np.random.Generator, X: np.ndarray, y: np.ndarray, test_fraction: float
           ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    order = rng.permutation(X.shape[0])
    cut = max(1, min(X.shape[0] - 1, int(round(X.shape[0] * (1.0 - test_fraction)))))
    train, test = order[:cut], order[cut:]
    return X[train], y[train], X[test], y[test]


def _nearest_centroid(X_train: np.ndarray, y_train: np.ndarray, X_test: np.ndarray) -> np.ndarray:
    classes = np.unique(y_train)
    centroids = np.array([X_train[y_train == c].mean(axis=0) for c in classes])
    return classes[np.argmin(cdist(X_test, centroids, 'sqeuclidean'), axis=1)]


def _separation_trial(ctx: RunContext, params: Dict[str, Any], t: int) -> Dict[str, Any]:
    """
    Closest-pair classifier between two clouds facing each other along e_1.

    P sits on the side x_1 >= g/2 and Q on x_1 <= -g/2, with the points
    (+/- g/2) e_1 included, so those two are the closest cross pair.
    """
    n, g, spread = params['sep_n'], params['sep_gap'], params['sep_spread']
    rng = make_rng(ctx.seed, 'separation', t)
    anchor = np.zeros(n)
    anchor[0] = g / 2.0

    def cloud(sign: float) -> np.ndarray:
        noise = spread * rng.standard_normal((params['sep_points'] - 1, n))
        noise[:, 0] = np.abs(noise[:, 0])
        return sign * np.vstack([anchor, anchor + noise])

    P, Q = cloud(1.0), cloud(-1.0)
    enc = QuantizedRFF.create(n, params['sep_d'], ctx.trial_seed('separation-rff', t),
                              bandwidth=params['sep_bandwidth'], kernel=Kernel.GAUSSIAN,
                              quantized=False)
    f = separating_function(P, Q, enc)

    p, q = P[f.p_index], Q[f.q_index]
    hull_ok = bool(np.all((P - p) @ (p - q) >= -1e-12) and np.all((Q - q) @ (q - p) >= -1e-12))
    separated = bool(np.all(f.evaluate(enc.encode_matrix(P)) > 0)
                     and np.all(f.evaluate(enc.encode_matrix(Q)) < 0))
    return dict(f.to_dict(), trial=t, hull_ok=hull_ok, separated=separated)


@register('classify-prototypes', 'Prototype classifier on encodings against the raw nearest centroid', [
    Param('encoder', str, SRP, 'Encoder', choices=(SRP, RFF)),
    Param('n', int, 16, 'Input dimension of the synthetic blobs', minimum=1),
    Param('d', int, 4096, 'Encoding dimension', minimum=1),
    Param('train', int, 200, 'Training points per class (synthetic)', minimum=1),
    Param('test', int, 200, 'Test points per class (synthetic)', minimum=1),
    Param('separation', float, 2.0, 'Distance between the blob centres', minimum=0.0),
    Param('bandwidth', float, 0.1, 'RFF kernel bandwidth', minimum=0.0),
    Param('epochs', int, 0, 'Perceptron fine-tuning passes', minimum=0),
    Param('test_fraction', float, 0.3, 'Held-out share of a --data set', minimum=0.0, maximum=1.0),
    Param('tolerance', float, 0.05, 'Allowed accuracy gap to the raw oracle', minimum=0.0),
    Param('trials', int, 20, 'Repetitions', minimum=1),
    Param('sep_trials', int, 20, 'Closest-pair separation trials', minimum=0),
    Param('sep_points', int, 10, 'Points per side in a separation trial', minimum=1),
    Param('sep_n', int, 2, 'Input dimension of a separation trial', minimum=1),
    Param('sep_gap', float, 1.0, 'Distance between the two closest points', minimum=0.0),
    Param('sep_spread', float, 0.2, 'Spread of each separation cloud', minimum=0.0),
    Param('sep_bandwidth', float, 0.1, 'Gaussian kernel bandwidth of the separation encoder',
          minimum=0.0),
    Param('sep_d', int, 8192, 'Encoding dimension of a separation trial', minimum=1),
], uses_data=True)
def classify_prototypes(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    d = params['d']
    ctx.require_dimension(params['sep_d'], 'sep_d')
    ctx.require_trials(params['sep_trials'], 'sep_trials')

    def trial(t: int) -> Dict[str, Any]:
        rng = make_rng(ctx.seed, 'classify', t)
        if ctx.data is not None:
            if ctx.data.labels is None:
                raise ConfigError("classify-prototypes on a dataset needs a label column")
            X_train, y_train, X_test, y_test = _split(rng, ctx.data.features, ctx.data.labels,
                                                      params['test_fraction'])
        else:
            u = rng.standard_normal(params['n'])
            u /= np.linalg.norm(u)
            X_train, y_train = _blobs(rng, u, params['train'], params['separation'])
            X_test, y_test = _blobs(rng, u, params['test'], params['separation'])
        n = X_train.shape[1]

        raw = float(np.mean(_nearest_centroid(X_train, y_train, X_test) == y_test))

        if params['encoder'] == SRP:
            enc = SignedRandomProjection.create(n, d, ctx.trial_seed('srp', t))
            shift = X_train.mean(axis=0)
            H_train, H_test = enc.encode_matrix(X_train - shift), enc.encode_matrix(X_test - shift)
        else:
            enc = QuantizedRFF.create(n, d, ctx.trial_seed('rff', t), bandwidth=params['bandwidth'])
            H_train, H_test = enc.encode_matrix(X_train), enc.encode_matrix(X_test)

        labels = y_train.tolist()
        model = train_prototypes(zip(H_train, labels))
        if params['epochs'] > 0:
            model = perceptron_finetune(model, list(zip(H_train, labels)), params['epochs'])
        hd = float(np.mean(np.array(predict_batch(model, H_test)) == y_test))
        return {'trial': t, 'raw_accuracy': raw, 'hd_accuracy': hd, 'gap': hd - raw,
                'train_accuracy': accuracy(model, zip(H_train, labels))}

    rows = ctx.map_trials(trial, params['trials'], 'classify-prototypes')
    sep_rows = ctx.map_trials(lambda t: _separation_trial(ctx, params, t), params['sep_trials'],
                              'separation')
    raw_mean = float(np.mean([r['raw_accuracy'] for r in rows]))
    hd_mean = float(np.mean([r['hd_accuracy'] for r in rows]))

    checks = [
        Check('|mean HD accuracy - mean raw accuracy|', abs(hd_mean - raw_mean),
              params['tolerance'], '<='),
        Check('separation trials meeting the condition without sign separation',
              sum(1 for r in sep_rows if r['condition_met'] and r['hull_ok'] and not r['separated']),
              0, '==', hard=True),
    ]
    metrics = {'raw_accuracy_mean': raw_mean, 'hd_accuracy_mean': hd_mean,
               'separation_condition_fraction':
                   float(np.mean([r['condition_met'] for r in sep_rows])) if sep_rows else float('nan'),
               'separation_fraction':
                   float(np.mean([r['separated'] for r in sep_rows])) if sep_rows else float('nan'),
               'source': ctx.data.source if ctx.data is not None else 'synthetic'}
    return ExperimentReport('classify-prototypes', params,
                            [dict(r, kind='prototype') for r in rows]
                            + [dict(r, kind='separation') for r in sep_rows], checks, metrics)


# ============================================================================
# WINNOW
# ============================================================================

@register('winnow-mistakes', 'Winnow mistakes on a planted k-sparse disjunction', [
    Param('d', int, 4096, 'Input dimension', minimum=2),
    Param('k', int, 8, 'Relevant coordinates in the disjunction', minimum=1),
    Param('examples', int, 2000, 'Stream length', minimum=1),
    Param('density', float, 0.02,
          'Probability a coordinate is on (0 picks 1 - 2^(-1/k), which balances the labels)',
          minimum=0.0, maximum=1.0),
    Param('min_fraction', float, 0.95, 'Required share of runs within 4 k ln d mistakes',
          minimum=0.0, maximum=1.0),
    Param('trials', int, 100, 'Independent runs', minimum=1),
])
def winnow_mistakes(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    d, k = params['d'], params['k']
    if k > d:
        raise ConfigError(f"k={k} relevant coordinates do not fit in d={d}")
    q = params['density'] or 1.0 - 2.0 ** (-1.0 / k)
    bound = 4.0 * k * math.log(d)

    def trial(t: int) -> Dict[str, Any]:
        rng = make_rng(ctx.seed, 'winnow', t)
        relevant = rng.choice(d, size=k, replace=False)
        X = (rng.random((params['examples'], d)) < q).astype(np.int8)
        y = np.where(X[:, relevant].any(axis=1), 1, -1)
        stream = list(zip(X, y.tolist()))
        winnow = winnow_train(stream)
        perceptron = perceptron_train(stream)
        return {'trial': t, 'mistakes': winnow.mistake_count,
                'perceptron_mistakes': perceptron.mistake_count,
                'positives': int(np.sum(y == 1)), 'within_bound': winnow.mistake_count <= bound}

    rows = ctx.map_trials(trial, params['trials'], 'winnow-mistakes')
    within = float(np.mean([r['within_bound'] for r in rows]))
    checks = [Check('runs with Winnow mistakes <= 4 k ln d', within, params['min_fraction'], '>=')]
    metrics = {'mistake_bound': bound, 'density': q,
               'mistakes_mean': float(np.mean([r['mistakes'] for r in rows])),
               'mistakes_max': int(max(r['mistakes'] for r in rows)),
               'perceptron_mistakes_mean': float(np.mean([r['perceptron_mistakes'] for r in rows]))}
    return ExperimentReport('winnow-mistakes', params, rows, checks, metrics)


# ============================================================================
# SPARSE SEPARATOR
# ============================================================================

@register('sparse-separator', 'Sum of the k most aligned projection rows as a linear separator', [
    Param('n', int, 10, 'Input dimension', minimum=2),
    Param('k', int, 4, 'Rows summed', minimum=1),
    Param('gamma', float, 0.5, 'Margin of the data', minimum=0.0, maximum=1.0),
    Param('multiplier', float, 1.0, 'Scale on the required number of rows', minimum=0.0),
    Param('points', int, 200, 'Margin-gamma points per trial', minimum=1),
    Param('inject_planted', bool, False, 'Replace row 0 with the planted direction'),
    Param('trials', int, 50, 'Projection draws', minimum=1),
])
def sparse_separator(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    n, k, gamma = params['n'], params['k'], params['gamma']
    d = sparse_separator_dimension(n, k, gamma, params['multiplier'])
    summary = sparse_separator_experiment(
        n, k, gamma, params['trials'], ctx.seed, params['multiplier'], params['points'],
        params['inject_planted'], max_dimension=d if ctx.allow_large else None)

    rows: List[Dict[str, Any]] = [dict(r, trial=t) for t, r in enumerate(summary['trials_detail'])]
    sufficient = math.sqrt(1.0 - gamma * gamma)
    checks = [
        Check('trials with summed correlation > sqrt(1 - gamma^2) that fail to separate',
              sum(1 for r in rows if r['summed_correlation'] > sufficient and not r['separated']),
              0, '==', hard=True),
        Check('trials with a row within gamma^2/2 of the target that fails to separate',
              sum(1 for r in rows if r['single_row_event'] and not r['single_row_separates']),
              0, '==', hard=True),
    ]
    metrics = {key: summary[key] for key in
               ('d', 'success_rate', 'single_row_rate', 'min_selected_rho', 'rho_required')}
    return ExperimentReport('sparse-separator', dict(params, d=d), rows, checks, metrics)


__all__ = ['classify_prototypes', 'winnow_mistakes', 'sparse_separator']
