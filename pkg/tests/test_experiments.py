"""
Tests for the experiment registry, parameter handling and small runs of each family.
"""
import sys
from unittest.mock import patch

import numpy as np
import pytest

from src.config import config
from src.constants import ConfigError, NoiseModelError, ResourceLimitError
from src.datasets import Dataset
from src.experiments import REGISTRY, Param, get_experiment, run_experiment

SMALL_UNIFORM = {'m': 20, 's': 2, 'd': 1024, 'trials': 4, 'sets': 3, 'exhaustive_m': 0}


def hard_checks_pass(report):
    return all(c.passed for c in report.checks if c.hard)


@pytest.fixture
def blobs():
    rng = np.random.default_rng(3)
    features = np.vstack([rng.normal(0.0, 0.3, (30, 3)), rng.normal(2.0, 0.3, (30, 3))])
    labels = np.repeat([0, 1], 30)
    return Dataset(features=features, feature_names=['a', 'b', 'c'], labels=labels,
                   label_coding={'x': 0, 'y': 1}, source='blobs')


class TestRegistry:
    """Names, aliases and parameter parsing."""

    def test_every_family_registered(self):
        expected = {'set-decode-uniform', 'set-decode-pointwise', 'set-estimates', 'bloom-fpr',
                    'noise-tolerance', 'structure-decode', 'sequence-stream', 'srp-distortion',
                    'posid-distortion', 'rff-kernel', 'cluster-preserve', 'euclid-robustness',
                    'classify-prototypes', 'winnow-mistakes', 'sparse-separator'}
        assert expected <= set(REGISTRY)

    def test_alias(self):
        assert get_experiment('set-decode').name == 'set-decode-uniform'

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            get_experiment('set-decode-everything')

    def test_seed_added_to_every_schema(self):
        for experiment in REGISTRY.values():
            assert experiment.param('seed').default == 0

    def test_param_parsing(self):
        assert Param('flag', bool, False).parse('yes') is True
        assert Param('count', int, 0).parse('12') == 12
        with pytest.raises(ConfigError):
            Param('count', int, 0).parse('1.5')
        with pytest.raises(ConfigError):
            Param('count', int, 0, minimum=1).parse('0')
        with pytest.raises(ConfigError):
            Param('mode', str, 'a', choices=('a', 'b')).parse('c')


class TestRunExperiment:
    """Validation, caps and worker independence."""

    def test_small_uniform_run(self):
        report = run_experiment('set-decode', SMALL_UNIFORM)
        assert report.experiment == 'set-decode-uniform'
        assert len(report.rows) == 4
        assert report.passed

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            run_experiment('set-decode-uniform', {'dimension': 10})

    def test_trial_cap(self):
        with patch.object(config, 'MAX_TRIALS', 2):
            with pytest.raises(ResourceLimitError):
                run_experiment('set-decode-uniform', SMALL_UNIFORM)
            report = run_experiment('set-decode-uniform', SMALL_UNIFORM, allow_large=True)
        assert len(report.rows) == 4

    def test_dimension_cap(self):
        with patch.object(config, 'MAX_DIMENSION', 512):
            with pytest.raises(ResourceLimitError):
                run_experiment('set-decode-uniform', SMALL_UNIFORM)

    def test_data_rejected_by_synthetic_runner(self, blobs):
        with pytest.raises(ConfigError):
            run_experiment('set-decode-uniform', SMALL_UNIFORM, data=blobs)

    def test_workers_do_not_change_rows(self):
        one = run_experiment('set-decode-uniform', SMALL_UNIFORM, workers=1)
        two = run_experiment('set-decode-uniform', SMALL_UNIFORM, workers=2)
        assert one.rows == two.rows

    def test_seed_changes_rows(self):
        a = run_experiment('set-decode-uniform', SMALL_UNIFORM)
        b = run_experiment('set-decode-uniform', dict(SMALL_UNIFORM, seed=1))
        assert [r['mu_emp'] for r in a.rows] != [r['mu_emp'] for r in b.rows]


class TestSmallRuns:
    """Each family at desk-test size; deterministic guarantees must hold."""

    def test_bloom(self):
        report = run_experiment('bloom-fpr', {'s': 10, 'delta': 0.05, 'probes': 500})
        assert hard_checks_pass(report)
        assert report.metrics['d'] > 0

    def test_pointwise(self):
        report = run_experiment('set-decode-pointwise', {'m': 50, 's': 3, 'trials': 5})
        assert hard_checks_pass(report)

    def test_noise_tolerance(self):
        report = run_experiment('noise-tolerance', {'m': 20, 's': 2, 'd': 1024, 'trials': 5,
                                                    'sparse_d': 4096, 'sparse_p': 0.02})
        assert hard_checks_pass(report)

    def test_noise_tolerance_rejects_unknown_model(self):
        with pytest.raises(NoiseModelError):
            run_experiment('noise-tolerance', {'models': 'burst', 'trials': 1})

    def test_sequence_stream(self):
        report = run_experiment('sequence-stream', {'m': 5, 'n': 4, 'd': 256, 'pushes': 40,
                                                    'decode_every': 10})
        assert hard_checks_pass(report)
        assert len(report.rows) == 4

    def test_structure_decode(self):
        report = run_experiment('structure-decode', {'m': 8, 'n': 3, 'trials': 3})
        assert hard_checks_pass(report)

    def test_srp_distortion(self):
        report = run_experiment('srp-distortion', {'n': 4, 'd': 1024, 'pairs': 50})
        assert hard_checks_pass(report)

    def test_cluster_preserve_on_data(self, blobs):
        report = run_experiment('cluster-preserve', {'d': 512, 'trials': 2}, data=blobs)
        assert report.metrics['source'] == 'blobs'
        assert hard_checks_pass(report)

    def test_classify_on_data(self, blobs):
        report = run_experiment('classify-prototypes',
                                {'d': 512, 'trials': 2, 'sep_trials': 0}, data=blobs)
        assert {r['kind'] for r in report.rows} == {'prototype'}
        assert report.metrics['hd_accuracy_mean'] > 0.9

    def test_classify_needs_labels(self, blobs):
        unlabelled = Dataset(features=blobs.features, feature_names=blobs.feature_names)
        with pytest.raises(ConfigError):
            run_experiment('classify-prototypes', {'d': 256, 'trials': 1, 'sep_trials': 0},
                           data=unlabelled)

    def test_winnow(self):
        report = run_experiment('winnow-mistakes', {'d': 256, 'k': 2, 'examples': 200,
                                                    'trials': 3})
        assert len(report.rows) == 3

    def test_sparse_separator(self):
        report = run_experiment('sparse-separator', {'n': 4, 'k': 2, 'gamma': 0.6,
                                                     'points': 20, 'trials': 3})
        assert hard_checks_pass(report)

    def test_euclid_robustness_needs_ordered_eps(self):
        with pytest.raises(ConfigError):
            run_experiment('euclid-robustness', {'eps1': 0.3, 'eps2': 0.1, 'trials': 1,
                                                 'calibration_pairs': 2})


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
