"""
Record and sequence experiments.
"""
# Standard library imports
import logging
from typing import Any, Dict, List

# Third-party imports
import numpy as np

# Local application imports
from .. import codebook as cbmod
from ..constants import CodebookKind
from ..reporting import Check, ExperimentReport
from ..structures import (StructureCodec, binding_incoherence, cross_feature_incoherence,
                          decode_feature, decode_sequence, encode_sequence, encode_structure,
                          self_shift_incoherence, shift_incoherence, structure_overlap,
                          window_new, window_push)
from ..utils import make_rng
from .base import Param, RunContext, register

logger = logging.getLogger(__name__)

_EPS = 1e-9


@register('structure-decode', 'Feature-value records: field decoding, overlap and absent features', [
    Param('m', int, 32, 'Values per feature', minimum=2),
    Param('n', int, 8, 'Features per record', minimum=1),
    Param('delta', float, 0.05, 'Failure probability used to size d', minimum=0.0, maximum=1.0),
    Param('d', int, 0, 'Dimension (0 sizes it with the uniform rule at s = n)', minimum=0),
    Param('trials', int, 200, 'Codec draws', minimum=1),
    Param('min_success', float, 0.99, 'Required fraction of fully decoded records',
          minimum=0.0, maximum=1.0),
])
def structure_decode(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, n = params['m'], params['n']
    d = params['d'] or cbmod.dimension_for(n, m, params['delta'])
    ctx.require_dimension(d)
    mu_required = 1.0 / (2.0 * n)

    def trial(t: int) -> Dict[str, Any]:
        codec = StructureCodec(
            cbmod.generate(CodebookKind.BIPOLAR, m, d, ctx.trial_seed('values', t)),
            cbmod.generate(CodebookKind.BIPOLAR, n, d, ctx.trial_seed('features', t)))
        rng = make_rng(ctx.seed, 'records', t)
        values = rng.integers(0, m, size=n)
        h = encode_structure(list(enumerate(values.tolist())), codec)
        decoded = [decode_feature(h, f, codec) for f in range(n)]
        mu = max(codec.value_cb.stats.mu_emp, cross_feature_incoherence(codec))

        # second record agreeing on a random subset of features
        agree = rng.random(n) < 0.5
        other = np.where(agree, values, (values + rng.integers(1, m, size=n)) % m)
        overlap = structure_overlap(h, encode_structure(list(enumerate(other.tolist())), codec), codec)
        overlap_error = abs(overlap - int(agree.sum()))

        # the last feature left out of the record
        absent_score = 0.0
        if n > 1:
            partial = encode_structure(list(enumerate(values[:-1].tolist())), codec)
            _, absent_score, _ = decode_feature(partial, n - 1, codec, return_score=True)
            absent_score = abs(absent_score) / codec.L_sq

        return {'trial': t, 'd': d, 'success': decoded == values.tolist(),
                'fields_correct': int(np.sum(np.array(decoded) == values)),
                'mu_emp': mu, 'binding_incoherence': binding_incoherence(codec),
                'incoherent': mu < mu_required,
                'overlap': overlap, 'agreements': int(agree.sum()),
                'overlap_error': overlap_error, 'overlap_bound': n * n * mu,
                'absent_score': absent_score, 'absent_bound': n * mu}

    rows = ctx.map_trials(trial, params['trials'], 'structure-decode')
    success_rate = float(np.mean([r['success'] for r in rows]))
    checks = [
        Check('records decoded exactly', success_rate, params['min_success'], '>='),
        Check('decode errors while mu_emp < 1/(2n)',
              sum(1 for r in rows if r['incoherent'] and not r['success']), 0, '==', hard=True),
        Check('overlaps outside n^2 mu_emp',
              sum(1 for r in rows if r['overlap_error'] > r['overlap_bound'] + _EPS), 0, '==',
              hard=True),
        Check('absent-feature scores above n mu_emp L^2',
              sum(1 for r in rows if r['absent_score'] > r['absent_bound'] + _EPS), 0, '==',
              hard=True),
    ]
    metrics = {'d': d, 'mu_required': mu_required,
               'mu_emp_max': float(max(r['mu_emp'] for r in rows)),
               'incoherent_fraction': float(np.mean([r['incoherent'] for r in rows]))}
    return ExperimentReport('structure-decode', dict(params, d=d), rows, checks, metrics)


@register('sequence-stream', 'Sliding-window shift encoding against a full re-encode at every step', [
    Param('m', int, 26, 'Alphabet size', minimum=2),
    Param('n', int, 64, 'Window length', minimum=1),
    Param('d', int, 4096, 'Dimension', minimum=2),
    Param('pushes', int, 10000, 'Symbols pushed per trial', minimum=1),
    Param('decode_every', int, 100, 'Decode the window every this many pushes', minimum=1),
    Param('trials', int, 1, 'Independent streams', minimum=1),
])
def sequence_stream(params: Dict[str, Any], ctx: RunContext) -> ExperimentReport:
    m, n, d = params['m'], params['n'], params['d']
    ctx.require_trials(params['pushes'], 'pushes')

    def trial(t: int) -> Dict[str, Any]:
        codec = StructureCodec(cbmod.generate(CodebookKind.BIPOLAR, m, d, ctx.trial_seed('values', t)))
        cb = codec.value_cb
        mu = max(cb.stats.mu_emp, shift_incoherence(cb, n), self_shift_incoherence(cb))
        window = window_new(codec, n)
        stream = make_rng(ctx.seed, 'stream', t).integers(0, m, size=params['pushes'])
        checkpoints: List[Dict[str, Any]] = []
        mismatches = 0
        for step, x in enumerate(stream.tolist(), start=1):
            window = window_push(window, x)
            if not np.array_equal(window.state, encode_sequence(window.history, codec).data):
                mismatches += 1
            if window.is_full and step % params['decode_every'] == 0:
                decoded = decode_sequence(window.vector(), n, codec)
                correct = int(np.sum(np.array(decoded) == np.array(window.history)))
                checkpoints.append({'trial': t, 'step': step, 'mismatches': mismatches,
                                    'positions_correct': correct, 'positions': n,
                                    'shift_incoherence': mu})
        logger.debug(f"Stream {t}: {mismatches} mismatches over {params['pushes']} pushes")
        return {'mismatches': mismatches, 'mu': mu, 'checkpoints': checkpoints}

    results = ctx.map_trials(trial, params['trials'], 'sequence-stream')
    rows = [row for r in results for row in r['checkpoints']]
    mu_required = 1.0 / (2.0 * n)
    decoded = sum(r['positions'] for r in rows)
    correct = sum(r['positions_correct'] for r in rows)
    safe_errors = sum(r['positions'] - r['positions_correct'] for r in rows
                      if r['shift_incoherence'] < mu_required)

    checks = [
        Check('steps where the window differs from a re-encode',
              sum(r['mismatches'] for r in results), 0, '==', hard=True),
        Check('position errors while shift incoherence < 1/(2n)', safe_errors, 0, '==', hard=True),
    ]
    metrics = {'position_accuracy': correct / decoded if decoded else float('nan'),
               'shift_incoherence_max': float(max(r['mu'] for r in results)),
               'mu_required': mu_required}
    return ExperimentReport('sequence-stream', params, rows, checks, metrics)


__all__ = ['structure_decode', 'sequence_stream']
