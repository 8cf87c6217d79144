"""
Tests for corruption models, rho-boundedness and the decoding-margin predicates.
"""
import dataclasses
import math
import sys

import numpy as np
import pytest

from src import codebook as cbmod
from src.constants import Bundling, CodebookKind, NoiseModel, NoiseModelError, Storage
from src.hdcore import Hypervector, dot
from src.noise import (NoiseSpec, apply_noise, awgn_rho_bound, decoding_margin, l1_budget,
                       noise_delta, rho_bound, tolerance)
from src.setmem import decode_set, encode_set


@pytest.fixture(scope='module')
def cb():
    return cbmod.generate(CodebookKind.BIPOLAR, 50, 4096, seed=12)


class TestNoiseSpec:
    """Parameter validation."""

    def test_unknown_model(self):
        with pytest.raises(NoiseModelError):
            NoiseSpec('salt_and_pepper', 0.1)

    def test_negative_parameter(self):
        with pytest.raises(NoiseModelError):
            NoiseSpec.awgn(-1.0)

    def test_flip_probability_range(self):
        with pytest.raises(NoiseModelError):
            NoiseSpec.ternary_flip(1.5)

    def test_integer_range_must_be_whole(self):
        with pytest.raises(NoiseModelError):
            NoiseSpec(NoiseModel.UNIFORM_INTEGER, 2.5)

    def test_dict_round_trip(self):
        spec = NoiseSpec.awgn(0.3, seed=9)
        assert NoiseSpec.from_dict(spec.to_dict()) == spec

    def test_adversarial_flag(self):
        assert NoiseSpec.adversarial_l2(0.1).is_adversarial
        assert not NoiseSpec.awgn(0.1).is_adversarial


class TestPassiveModels:
    """Seeded random corruption."""

    def test_zero_parameter_returns_input(self, cb):
        h = cb.vector(0)
        assert apply_noise(h, NoiseSpec.awgn(0.0)) is h

    def test_awgn_is_seeded(self, cb):
        h = cb.vector(0)
        a = apply_noise(h, NoiseSpec.awgn(0.5, seed=1))
        b = apply_noise(h, NoiseSpec.awgn(0.5, seed=1))
        assert a == b
        assert a.storage == Storage.REAL
        assert np.std(noise_delta(h, a)) == pytest.approx(0.5, rel=0.1)

    def test_awgn_refuses_sparse(self):
        with pytest.raises(NoiseModelError):
            apply_noise(Hypervector.sparse([1], 8), NoiseSpec.awgn(1.0))

    def test_uniform_integer_range(self, cb):
        h = encode_set([0, 1, 2], cb).vector
        noisy = apply_noise(h, NoiseSpec.uniform_integer(2, seed=3))
        delta = noise_delta(h, noisy)
        assert noisy.storage == Storage.INTEGER
        assert delta.min() >= -2 and delta.max() <= 2
        assert noisy.bound == h.bound + 2

    def test_uniform_integer_refuses_real(self):
        with pytest.raises(NoiseModelError):
            apply_noise(Hypervector.real([0.5, 0.5]), NoiseSpec.uniform_integer(1))

    def test_ternary_flip_stays_binary(self):
        h = Hypervector.sparse(range(0, 1000, 5), 1000)
        noisy = apply_noise(h, NoiseSpec.ternary_flip(0.2, seed=4))
        assert noisy.storage == Storage.SPARSE
        changed = np.count_nonzero(noise_delta(h, noisy))
        # a flip changes the coordinate only when it pushes 0 up or 1 down
        assert 0 < changed < 0.2 * 1000

    def test_full_ternary_flip_resamples_every_coordinate(self):
        d = 20000
        h = Hypervector.sparse(range(0, d, 10), d)
        noisy = apply_noise(h, NoiseSpec.ternary_flip(1.0, seed=5))
        agreement = float(np.mean(noisy.to_dense() == h.to_dense()))
        assert agreement == pytest.approx(0.5, abs=0.02)

    def test_awgn_rho_bound_holds_in_most_draws(self, cb):
        sigma, delta, draws = 0.5, 0.05, 200
        h = encode_set([1, 2, 3], cb).vector
        limit = awgn_rho_bound(sigma, cb.stats.L, cb.m, delta)
        within = []
        for t in range(draws):
            noisy = apply_noise(h, NoiseSpec.awgn(sigma, seed=t))
            within.append(rho_bound(cb, noise_delta(h, noisy)) <= limit)
        assert np.mean(within) >= 1 - delta

    def test_ternary_flip_refuses_dense(self, cb):
        with pytest.raises(NoiseModelError):
            apply_noise(cb.vector(0), NoiseSpec.ternary_flip(0.1))


class TestAdversarialModels:
    """Budgeted attacks on one target symbol."""

    def test_needs_target(self, cb):
        with pytest.raises(NoiseModelError):
            apply_noise(cb.vector(0), NoiseSpec.adversarial_l2(0.1))
        with pytest.raises(NoiseModelError):
            apply_noise(cb.vector(0), NoiseSpec.adversarial_l2(0.1), target=50, cb=cb)

    def test_l2_norm_and_direction(self, cb):
        h = encode_set([3, 4], cb).vector
        noisy = apply_noise(h, NoiseSpec.adversarial_l2(0.2), target=3, cb=cb)
        delta = noise_delta(h, noisy)
        L = cb.stats.L
        assert np.linalg.norm(delta) == pytest.approx(0.2 * L)
        assert dot(cb.vector(3), Hypervector.real(delta)) == pytest.approx(-0.2 * L * L)

    def test_l1_spends_exact_budget(self, cb):
        h = encode_set([3, 4], cb).vector
        noisy = apply_noise(h, NoiseSpec.adversarial_l1(100), target=3, cb=cb)
        delta = noise_delta(h, noisy)
        assert np.abs(delta).sum() == 100
        assert dot(cb.vector(3), Hypervector.real(delta)) == pytest.approx(-100.0)

    def test_l1_budget_beyond_support_wraps(self, cb):
        h = cb.vector(0)
        noisy = apply_noise(h, NoiseSpec.adversarial_l1(2 * 4096 + 3), target=0, cb=cb)
        delta = noise_delta(h, noisy)
        assert np.abs(delta).sum() == 2 * 4096 + 3
        assert np.abs(delta).max() == 3

    def test_l1_on_sparse_clears_shared_ones(self):
        sparse_cb = cbmod.generate(CodebookKind.SPARSE, 10, 1000, seed=2, p=0.05, fixed_weight=True)
        h = encode_set([0, 1], sparse_cb, Bundling.MAX).vector
        noisy = apply_noise(h, NoiseSpec.adversarial_l1(10), target=0, cb=sparse_cb)
        assert noisy.storage == Storage.SPARSE
        assert set(noisy.data.tolist()) <= set(h.data.tolist())
        assert h.data.size - noisy.data.size == 10


class TestMargins:
    """Closed-form margins and tolerances."""

    def test_rho_bound_is_worst_score(self, cb):
        delta = np.zeros(4096)
        delta[:10] = 1.0
        expected = np.abs(cb.dense_matrix()[:, :10].sum(axis=1)).max()
        assert rho_bound(cb, delta) == pytest.approx(expected)

    def test_codeword_as_corruption_reaches_its_squared_norm(self, cb):
        rho = rho_bound(cb, cb.vector(0))
        assert rho >= cb.stats.L ** 2 - 1e-9
        assert rho >= cb.norms_sq[0]

    def test_decoding_margin(self):
        cb = cbmod.generate(CodebookKind.BIPOLAR, 4, 1024, seed=0)
        assert decoding_margin(cb, 2, 102.4, mu=0.1) == pytest.approx(0.2)

    def test_awgn_rho_bound(self):
        assert awgn_rho_bound(1.0, 10.0, 5, 0.1) == pytest.approx(10 * math.sqrt(2 * math.log(100)))

    def test_l1_budget(self, cb):
        assert l1_budget(cb, 0.01, 3) == pytest.approx(0.01 * 3 * 4096)
        sparse_cb = cbmod.generate(CodebookKind.SPARSE, 4, 1000, seed=0, p=0.1)
        assert l1_budget(sparse_cb, 0.01, 3) == pytest.approx(10.0)

    def test_tolerance_formulas(self, cb):
        log_term = math.log(2 * 50 / 0.05)
        slack = 0.5 - 2 * 0.01
        assert tolerance(cb, 2, 0.05, NoiseModel.AWGN, mu=0.01) == pytest.approx(
            64 / math.sqrt(2 * log_term) * slack)
        assert tolerance(cb, 2, 0.05, NoiseModel.ADVERSARIAL_L2, mu=0.01) == pytest.approx(slack)
        assert tolerance(cb, 2, 0.05, NoiseModel.ADVERSARIAL_L1, mu=0.01) == pytest.approx(0.25 - 0.01)

    def test_tolerance_unknown_model(self, cb):
        with pytest.raises(NoiseModelError):
            tolerance(cb, 2, 0.05, 'burst')

    def test_attack_inside_tolerance_still_decodes(self, cb):
        s = 3
        omega = 0.9 * tolerance(cb, s, 0.05, NoiseModel.ADVERSARIAL_L2)
        if omega <= 0:
            pytest.skip("codebook draw leaves no adversarial slack")
        items = {7, 8, 9}
        es = encode_set(items, cb)
        for target in items:
            noisy = apply_noise(es.vector, NoiseSpec.adversarial_l2(omega), target=target, cb=cb)
            assert decoding_margin(cb, s, rho_bound(cb, noise_delta(es.vector, noisy))) > 0
            assert decode_set(dataclasses.replace(es, vector=noisy), cb) == items


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
