"""
Set-memory experiments: threshold decoding, cardinality estimates, Bloom
false positives and noise tolerance.
"""
# Standard library imports
import itertools
import logging
import math
from dataclasses import replace
from typing import Any, Dict, List

# Third-party imports
import numpy as np

# Local application imports
from .. import codebook as cbmod
from ..constants import Bundling, CodebookKind, NoiseModel, QueryRule, Regime
from ..noise import (NoiseSpec, apply_noise, decoding_margin, l1_budget, noise_delta, rho_bound,
                     tolerance)
from ..reporting import Check, ExperimentReport
from ..setmem import (bloom_parameters, decode_set, encode_set, intersection_estimate,
                      size_estimate, union_estimate)
from ..utils import make_rng
from .base import Param, RunContext, register

logger = logging.getLogger(__name__)

_EPS = 1e-9


def _resolve_dimension(params: Dict[str, Any], ctx: RunContext, regime: str) -> int:
    d = params['d'] or cbmod.dimension_for(params['s'], params['m'], params['delta'], regime)
    return ctx.require_dimension(d)


def _decode_errors(cb: cbmod.Codebook, items: np.ndarray) -> bool:
    return decode_set(encode_set(items, cb), cb) != {int(a) for a in items}


# ============================================================================
# UNIFORM DECODING
# ============================================================================

@register('set-decode-uniform', 'Threshold decoding of every small set (uniform sizing)', [
    Param('m', int, 100, 'Alphabet size', minimum=2),
    Param('s', int, 5, 'Set size', minimum=1),
    Param('delta', float, 0.05, 'Failure probability of the sizing rule', minimum=0.0, maximum=1.0),
    Param('d', int, 0, 'Dimension (0 sizes it with the uniform rule)', minimum=0),
    Param('trials', int, 200, 'Codebook draws', minimum=1),
    Param('sets', int, 20, 'Random sets decoded per codebook', minimum=1),
    Param('slack', float, 0.05, 'Monte-Carlo slack added to delta', minimum=0.0),
    Param('exhaustive_m', int, 10, 'Alphabet of the exhaustive subset check (0 disables it)', minimum=0),
    Param('exhaustive_size', int, 3, 'Largest subset in the exhaustive check', minimum=1),
    Param('exhaustive_draws', int, 20, 'Codebooks drawn for the exhaustive check', minimum=1),
])
def set_decode_uniform(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, s, delta, sets = params['m'], params['s'], params['delta'], params['sets']
    d = _resolve_dimension(params, ctx, Regime.UNIFORM)
    mu_required = 1.0 / (2.0 * s)

    def trial(t: int) -> Dict[str, Any]:
        cb = cbmod.generate(CodebookKind.BIPOLAR, m, d, ctx.trial_seed('codebook', t))
        rng = make_rng(ctx.seed, 'sets', t)
        failures = sum(_decode_errors(cb, rng.choice(m, size=s, replace=False)) for _ in range(sets))
        mu = cb.stats.mu_emp
        return {'trial': t, 'd': d, 'mu_emp': mu, 'mu_required': mu_required,
                'incoherent': mu < mu_required, 'sets': sets,
                'sets_with_errors': failures, 'any_error': failures > 0}

    rows = ctx.map_trials(trial, params['trials'], 'set-decode-uniform')
    failure_rate = float(np.mean([r['any_error'] for r in rows]))
    incoherent_errors = sum(r['sets_with_errors'] for r in rows if r['incoherent'])

    checks = [
        Check('codebook draws with a decode error', failure_rate, delta + params['slack'], '<='),
        Check('decode errors while mu_emp < 1/(2s)', incoherent_errors, 0, '==', hard=True),
    ]
    metrics = {
        'd': d,
        'mu_required': mu_required,
        'mu_emp_mean': float(np.mean([r['mu_emp'] for r in rows])),
        'mu_emp_max': float(np.max([r['mu_emp'] for r in rows])),
        'mu_scale_bound': cbmod.incoherence_scale(m, d, delta),
        'incoherence_tail_bound': cbmod.incoherence_tail_bound(m, d, mu_required),
        'incoherent_fraction': float(np.mean([r['incoherent'] for r in rows])),
    }

    if params['exhaustive_m'] >= 2:
        checked, errors = _exhaustive_check(params, ctx, d)
        checks.append(Check('exhaustive subset errors while mu_emp < 1/(2s)', errors, 0, '==',
                            hard=True))
        metrics['exhaustive_codebooks_checked'] = checked

    return ExperimentReport('set-decode-uniform', dict(params, d=d), rows, checks, metrics)


def _exhaustive_check(params: Dict[str, Any], ctx: RunContext, d: int) -> tuple:
    """Decode every subset of size <= exhaustive_size on small incoherent codebooks."""
    m_small, size = params['exhaustive_m'], params['exhaustive_size']
    mu_required = 1.0 / (2.0 * size)
    checked = errors = 0
    for draw in range(params['exhaustive_draws']):
        cb = cbmod.generate(CodebookKind.BIPOLAR, m_small, d, ctx.trial_seed('exhaustive', draw))
        if cb.stats.mu_emp >= mu_required:
            continue
        checked += 1
        for r in range(min(size, m_small) + 1):
            for subset in itertools.combinations(range(m_small), r):
                errors += _decode_errors(cb, np.array(subset, dtype=np.int64))
    logger.debug(f"Exhaustive check: {checked} incoherent codebooks, {errors} errors")
    return checked, errors


# ============================================================================
# POINTWISE DECODING
# ============================================================================

@register('set-decode-pointwise', 'Threshold decoding of one fixed set per codebook (pointwise sizing)', [
    Param('m', int, 1000, 'Alphabet size', minimum=2),
    Param('s', int, 50, 'Set size', minimum=1),
    Param('delta', float, 0.01, 'Failure probability of the sizing rule', minimum=0.0, maximum=1.0),
    Param('d', int, 0, 'Dimension (0 sizes it with the pointwise rule)', minimum=0),
    Param('trials', int, 1000, '(codebook, set) draws', minimum=1),
    Param('slack', float, 0.01, 'Monte-Carlo slack subtracted from 1 - delta', minimum=0.0),
])
def set_decode_pointwise(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, s, delta = params['m'], params['s'], params['delta']
    d = _resolve_dimension(params, ctx, Regime.POINTWISE)

    def trial(t: int) -> Dict[str, Any]:
        cb = cbmod.generate(CodebookKind.BIPOLAR, m, d, ctx.trial_seed('codebook', t))
        items = make_rng(ctx.seed, 'set', t).choice(m, size=s, replace=False)
        es = encode_set(items, cb)
        decoded = decode_set(es, cb)
        members = {int(a) for a in items}
        # cross-talk: score minus the symbol's own contribution
        crosstalk = cb.scores(es.vector)
        crosstalk[items] -= cb.norms_sq[items]
        tau = float(np.max(np.abs(crosstalk))) / float(cb.norms_sq.min())
        return {'trial': t, 'd': d, 'success': decoded == members,
                'false_positives': len(decoded - members),
                'false_negatives': len(members - decoded),
                'tau_emp': tau, 'tau_required': 0.5}

    rows = ctx.map_trials(trial, params['trials'], 'set-decode-pointwise')
    success_rate = float(np.mean([r['success'] for r in rows]))
    safe_errors = sum(1 for r in rows if r['tau_emp'] < 0.5 and not r['success'])

    checks = [
        Check('decode success rate', success_rate, 1.0 - delta - params['slack'], '>='),
        Check('decode errors while cross-talk < 1/2', safe_errors, 0, '==', hard=True),
    ]
    metrics = {
        'd': d,
        'guaranteed_success': 1.0 - delta,
        'tau_emp_max': float(np.max([r['tau_emp'] for r in rows])),
        'subset_incoherence_tail_bound': cbmod.subset_incoherence_tail_bound(m, d, s, 0.5),
    }
    return ExperimentReport('set-decode-pointwise', dict(params, d=d), rows, checks, metrics)


# ============================================================================
# CARDINALITY ESTIMATES
# ============================================================================

@register('set-estimates', 'Size, intersection and union estimates against their error bounds', [
    Param('m', int, 200, 'Alphabet size', minimum=2),
    Param('d', int, 16384, 'Dimension', minimum=1),
    Param('s_max', int, 20, 'Largest set size', minimum=1),
    Param('trials', int, 10, 'Codebook draws', minimum=1),
    Param('pairs', int, 50, 'Set pairs per codebook', minimum=1),
])
def set_estimates(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, d, s_max = params['m'], params['d'], min(params['s_max'], params['m'])

    def trial(t: int) -> List[Dict[str, Any]]:
        cb = cbmod.generate(CodebookKind.BIPOLAR, m, d, ctx.trial_seed('codebook', t))
        mu = cb.stats.mu_emp
        rng = make_rng(ctx.seed, 'pairs', t)
        rows = []
        for pair in range(params['pairs']):
            s1 = int(rng.integers(1, s_max + 1))
            s2 = int(rng.integers(1, s_max + 1))
            first = rng.choice(m, size=s1, replace=False)
            shared = int(rng.integers(0, min(s1, s2) + 1))
            outside = np.setdiff1d(np.arange(m), first)
            fresh = rng.choice(outside, size=min(s2 - shared, outside.size), replace=False)
            second = np.concatenate([first[:shared], fresh])
            a, b = encode_set(first, cb), encode_set(second, cb)
            overlap = len(set(first.tolist()) & set(second.tolist()))
            union = len(set(first.tolist()) | set(second.tolist()))
            size_err = abs(size_estimate(a, cb) - s1)
            inter_err = abs(intersection_estimate(a, b, cb) - overlap)
            union_err = abs(union_estimate(a, b, cb) - union)
            s2 = int(second.size)
            rows.append({
                'trial': t, 'pair': pair, 's': s1, 's_prime': s2, 'intersection': overlap,
                'mu_emp': mu,
                'size_error': size_err, 'size_bound': s1 * s1 * mu,
                'intersection_error': inter_err, 'intersection_bound': s1 * s2 * mu,
                'union_error': union_err, 'union_bound': (s1 * s1 + s2 * s2 + s1 * s2) * mu,
            })
        return rows

    rows = [row for chunk in ctx.map_trials(trial, params['trials'], 'set-estimates') for row in chunk]

    def exceptions(kind: str) -> int:
        return sum(1 for r in rows if r[f"{kind}_error"] > r[f"{kind}_bound"] + _EPS)

    checks = [
        Check('size estimates outside s^2 mu_emp', exceptions('size'), 0, '==', hard=True),
        Check("intersection estimates outside s s' mu_emp", exceptions('intersection'), 0, '==',
              hard=True),
        Check('union estimates outside the combined bound', exceptions('union'), 0, '==', hard=True),
    ]
    metrics = {
        'pairs_tested': len(rows),
        'size_error_max': float(max(r['size_error'] for r in rows)),
        'intersection_error_max': float(max(r['intersection_error'] for r in rows)),
    }
    return ExperimentReport('set-estimates', params, rows, checks, metrics)


# ============================================================================
# BLOOM MODE
# ============================================================================

@register('bloom-fpr', 'Max-bundled sparse sets: false negatives and false-positive rate', [
    Param('s', int, 100, 'Items stored', minimum=1),
    Param('delta', float, 0.01, 'Target false-positive rate', minimum=0.0, maximum=1.0),
    Param('probes', int, 100000, 'Fresh non-member probes per set', minimum=1),
    Param('trials', int, 1, 'Sets built', minimum=1),
    Param('fixed_weight', bool, True, 'Codewords with exactly round(p d) ones'),
    Param('fpr_factor', float, 2.0, 'Allowed multiple of delta', minimum=1.0),
])
def bloom_fpr(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    s, delta, probes = params['s'], params['delta'], params['probes']
    p, d = bloom_parameters(s, delta)
    ctx.require_dimension(d)
    ctx.require_trials(probes, 'probes')
    weight = max(1, int(round(p * d)))

    def trial(t: int) -> Dict[str, Any]:
        seed = ctx.trial_seed('members', t)
        cb = cbmod.generate(CodebookKind.SPARSE, s, d, seed, p=p, fixed_weight=params['fixed_weight'])
        es = encode_set(range(s), cb, Bundling.MAX)
        false_negatives = s - len(decode_set(es, cb))
        # probes come from the same distribution with an independent seed
        fresh = cbmod.generate(CodebookKind.SPARSE, probes, d, ctx.trial_seed('probes', t), p=p,
                               fixed_weight=params['fixed_weight'])
        false_positives = int(np.count_nonzero(fresh.scores(es.vector) >= fresh.norms_sq))
        return {'trial': t, 'd': d, 'p': p, 'fill': es.vector.density,
                'false_negatives': false_negatives, 'false_positives': false_positives,
                'probes': probes, 'fpr': false_positives / probes}

    rows = ctx.map_trials(trial, params['trials'], 'bloom-fpr')
    fpr = float(np.mean([r['fpr'] for r in rows]))
    fill = float(np.mean([r['fill'] for r in rows]))
    checks = [
        Check('false negatives', sum(r['false_negatives'] for r in rows), 0, '==', hard=True),
        Check('false-positive rate', fpr, params['fpr_factor'] * delta, '<='),
    ]
    metrics = {'d': d, 'p': p, 'ones_per_codeword': weight, 'fill': fill,
               'predicted_fpr': fill ** weight, 'delta': delta}
    return ExperimentReport('bloom-fpr', dict(params, d=d), rows, checks, metrics)


# ============================================================================
# NOISE TOLERANCE
# ============================================================================

def _noise_models(text: str) -> List[str]:
    if text.strip().lower() == 'all':
        return list(NoiseModel.ALL)
    models = [t.strip() for t in text.split(',') if t.strip()]
    for model in models:
        NoiseSpec(model, 0.0)
    return models


@register('noise-tolerance', 'Decoding under each noise model at a fraction of its tolerance', [
    Param('m', int, 100, 'Alphabet size', minimum=2),
    Param('s', int, 5, 'Set size', minimum=1),
    Param('delta', float, 0.05, 'Failure probability', minimum=0.0, maximum=1.0),
    Param('d', int, 4096, 'Dimension of the dense codebooks', minimum=1),
    Param('trials', int, 500, 'Trials per model', minimum=1),
    Param('fraction', float, 0.5, 'Noise parameter as a fraction of the tolerance', minimum=0.0),
    Param('models', str, 'all', "Comma-separated noise models or 'all'"),
    Param('sparse_d', int, 65536, 'Dimension of the sparse codebooks (ternary flips)', minimum=1),
    Param('sparse_p', float, 0.01, 'Density of the sparse codebooks', minimum=0.0, maximum=1.0),
])
def noise_tolerance(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, s, delta = params['m'], params['s'], params['delta']
    models = _noise_models(params['models'])
    if NoiseModel.TERNARY_FLIP in models:
        ctx.require_dimension(params['sparse_d'], 'sparse_d')

    rows: List[Dict[str, Any]] = []
    checks: List[Check] = []
    metrics: Dict[str, Any] = {}
    for model in models:
        model_rows = ctx.map_trials(lambda t: _noise_trial(model, t, params, ctx),
                                    params['trials'], model)
        rows.extend(model_rows)
        covered = [r for r in model_rows if r['covered']]
        checks.append(Check(f"{model}: trials with a positive tolerance",
                            len(covered), len(model_rows), '=='))
        if covered:
            rate = float(np.mean([r['success'] for r in covered]))
            checks.append(Check(f"{model}: decode success rate", rate, 1.0 - 2.0 * delta, '>='))
            metrics[f"{model}_mean_param"] = float(np.mean([r['param'] for r in covered]))
        metrics[f"{model}_mean_tolerance"] = float(np.mean([r['tolerance'] for r in model_rows]))

    unsafe = sum(1 for r in rows if r['margin'] > 0 and not r['success'])
    checks.append(Check('decode errors with a positive margin', unsafe, 0, '==', hard=True))
    return ExperimentReport('noise-tolerance', params, rows, checks, metrics)


def _noise_trial(model: str, t: int, params: Dict[str, Any], ctx: RunContext) -> Dict[str, Any]:
    m, s, delta = params['m'], params['s'], params['delta']
    sparse = model == NoiseModel.TERNARY_FLIP
    seed = ctx.trial_seed('codebook', model, t)
    if sparse:
        cb = cbmod.generate(CodebookKind.SPARSE, m, params['sparse_d'], seed, p=params['sparse_p'])
    else:
        cb = cbmod.generate(CodebookKind.BIPOLAR, m, params['d'], seed)

    items = make_rng(ctx.seed, 'set', model, t).choice(m, size=s, replace=False)
    es = encode_set(items, cb, Bundling.MAX if sparse else Bundling.SUM)
    mu = cb.stats.mu_emp
    limit = tolerance(cb, s, delta, model, mu)
    row = {'model': model, 'trial': t, 'd': cb.d, 'mu_emp': mu, 'tolerance': limit,
           'covered': limit > 0, 'param': 0.0, 'rho': 0.0, 'margin': 0.0, 'success': False}
    if limit <= 0:
        return row

    value = params['fraction'] * limit
    if model == NoiseModel.UNIFORM_INTEGER:
        value = math.floor(value)
    elif model == NoiseModel.ADVERSARIAL_L1:
        value = l1_budget(cb, value, s)
    spec = NoiseSpec(model, value, ctx.trial_seed('noise', model, t))
    target = int(np.min(items))
    noisy = replace(es, vector=apply_noise(es.vector, spec, target, cb))

    rule = QueryRule.HALF_NORM if sparse else None
    decoded = decode_set(noisy, cb, rule)
    rho = rho_bound(cb, noise_delta(es.vector, noisy.vector))
    row.update(param=float(value), rho=rho, margin=decoding_margin(cb, s, rho, mu),
               success=decoded == {int(a) for a in items})
    return row


__all__ = [
    'set_decode_uniform',
    'set_decode_pointwise',
    'set_estimates',
    'bloom_fpr',
    'noise_tolerance',
]
