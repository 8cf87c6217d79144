"""
Tests for set encoding, threshold decoding and cardinality estimates.
"""
import math
import sys

import numpy as np
import pytest

from src import codebook as cbmod
from src.constants import (Bundling, CodebookError, CodebookKind, EncodingError, QueryRule,
                           Storage, StorageError)
from src.hdcore import Hypervector
from src.setmem import (bloom_parameters, cdt_thin, clamp_bound, decode_set, encode_set,
                        intersection_estimate, member_query, probe, query_scores, size_estimate,
                        union_estimate)


@pytest.fixture(scope='module')
def bipolar_cb():
    return cbmod.generate(CodebookKind.BIPOLAR, 100, 2442, seed=7)


class TestEncoding:
    """Encoding rules and their error paths."""

    def test_sum_is_order_independent(self, bipolar_cb):
        a = encode_set([3, 1, 2], bipolar_cb)
        b = encode_set([2, 3, 1], bipolar_cb)
        assert a.vector == b.vector
        assert a.n_items == 3

    def test_duplicates_rejected(self, bipolar_cb):
        with pytest.raises(EncodingError):
            encode_set([1, 1], bipolar_cb)

    def test_out_of_range_rejected(self, bipolar_cb):
        with pytest.raises(EncodingError):
            encode_set([100], bipolar_cb)

    def test_empty_set(self, bipolar_cb):
        es = encode_set([], bipolar_cb)
        assert decode_set(es, bipolar_cb) == set()

    def test_max_needs_sparse_codebook(self, bipolar_cb):
        with pytest.raises(EncodingError):
            encode_set([1], bipolar_cb, Bundling.MAX)

    def test_threshold_needs_t(self, bipolar_cb):
        with pytest.raises(EncodingError):
            encode_set([1], bipolar_cb, Bundling.THRESHOLD)

    def test_unknown_bundling(self, bipolar_cb):
        with pytest.raises(EncodingError):
            encode_set([1], bipolar_cb, 'median')


class TestDecoding:
    """Membership decisions at the L^2/2 threshold."""

    def test_orthogonal_codebook_decodes_exactly(self):
        cb = cbmod.orthogonal(10, 10)
        es = encode_set([0, 4, 9], cb)
        assert decode_set(es, cb) == {0, 4, 9}

    def test_incoherent_codebook_decodes_exactly(self, bipolar_cb):
        s = 5
        if bipolar_cb.stats.mu_emp >= 1 / (2 * s):
            pytest.skip("codebook draw not incoherent enough")
        rng = np.random.default_rng(0)
        for _ in range(10):
            items = set(rng.choice(100, size=s, replace=False).tolist())
            assert decode_set(encode_set(items, bipolar_cb), bipolar_cb) == items

    def test_member_query_agrees_with_decode(self, bipolar_cb):
        es = encode_set([5, 6, 7], bipolar_cb)
        decoded = decode_set(es, bipolar_cb)
        for a in range(20):
            assert member_query(es, a, bipolar_cb) == (a in decoded)

    def test_query_scores_of_members(self):
        cb = cbmod.orthogonal(4, 8, scale=2)
        scores = query_scores(encode_set([1, 2], cb), cb)
        assert scores.tolist() == [0.0, 4.0, 4.0, 0.0]

    def test_foreign_codebook_rejected(self, bipolar_cb):
        other = cbmod.generate(CodebookKind.BIPOLAR, 100, 2442, seed=8)
        with pytest.raises(CodebookError):
            decode_set(encode_set([1], bipolar_cb), other)

    def test_containment_rule_only_for_max(self, bipolar_cb):
        with pytest.raises(EncodingError):
            decode_set(encode_set([1], bipolar_cb), bipolar_cb, QueryRule.CONTAINMENT)

    def test_threshold_bundling_decodes_members(self):
        cb = cbmod.generate(CodebookKind.SPARSE, 50, 4000, seed=3, p=0.02)
        items = {1, 2, 3}
        es = encode_set(items, cb, Bundling.THRESHOLD, threshold=1)
        assert items <= decode_set(es, cb)


class TestBloom:
    """Max bundling over sparse codewords."""

    def test_bloom_parameters(self):
        p, d = bloom_parameters(100, 0.01)
        assert p == pytest.approx(math.log(2) / 100)
        assert d == 959

    def test_no_false_negatives(self):
        p, d = bloom_parameters(20, 0.01)
        cb = cbmod.generate(CodebookKind.SPARSE, 200, d, seed=5, p=p, fixed_weight=True)
        items = set(range(0, 200, 10))
        es = encode_set(items, cb, Bundling.MAX)
        assert es.vector.storage == Storage.SPARSE
        assert items <= decode_set(es, cb)

    def test_fresh_probe(self):
        p, d = bloom_parameters(20, 0.01)
        cb = cbmod.generate(CodebookKind.SPARSE, 30, d, seed=5, p=p, fixed_weight=True)
        es = encode_set(range(20), cb, Bundling.MAX)
        assert probe(es, cb.vector(3), cb)
        assert not probe(es, cb.vector(3), cb) or 3 in decode_set(es, cb)

    def test_half_norm_rule_accepts_more(self):
        cb = cbmod.generate(CodebookKind.SPARSE, 100, 500, seed=1, p=0.02)
        es = encode_set(range(30), cb, Bundling.MAX)
        exact = decode_set(es, cb)
        loose = decode_set(es, cb, QueryRule.HALF_NORM)
        assert exact <= loose


class TestEstimates:
    """Size, intersection and union estimates stay within their error terms."""

    def test_estimates_within_bounds(self):
        cb = cbmod.generate(CodebookKind.BIPOLAR, 200, 16384, seed=2)
        mu = cb.stats.mu_emp
        a = encode_set(range(0, 12), cb)
        b = encode_set(range(6, 20), cb)
        assert abs(size_estimate(a, cb) - 12) <= 12 * 12 * mu + 1e-9
        assert abs(intersection_estimate(a, b, cb) - 6) <= 12 * 14 * mu + 1e-9
        assert abs(union_estimate(a, b, cb) - 20) <= (144 + 196 + 168) * mu + 1e-9

    def test_estimates_exact_on_orthogonal(self):
        cb = cbmod.orthogonal(8, 8)
        a, b = encode_set([0, 1, 2], cb), encode_set([2, 3], cb)
        assert size_estimate(a, cb) == 3.0
        assert intersection_estimate(a, b, cb) == 1.0
        assert union_estimate(a, b, cb) == 4.0

    def test_estimates_need_sum_bundles(self):
        cb = cbmod.generate(CodebookKind.SPARSE, 10, 100, seed=0, p=0.1)
        with pytest.raises(EncodingError):
            size_estimate(encode_set([1], cb, Bundling.MAX), cb)


class TestPrecision:
    """Clamping and thinning."""

    def test_clamp_bound(self):
        assert clamp_bound(25) == 10
        assert clamp_bound(5) == 5

    def test_clamped_set_keeps_members(self):
        cb = cbmod.generate(CodebookKind.BIPOLAR, 50, 8192, seed=4)
        es = encode_set(range(9), cb, s_declared=9)
        clamped = es.clamped()
        assert clamped.vector.bound == 6
        assert decode_set(clamped, cb) == decode_set(es, cb)

    def test_clamp_only_sum(self):
        cb = cbmod.generate(CodebookKind.SPARSE, 10, 100, seed=0, p=0.1)
        with pytest.raises(EncodingError):
            encode_set([1], cb, Bundling.MAX).clamped(2)

    def test_cdt_never_increases_density(self):
        v = Hypervector.sparse(range(0, 1000, 3), 1000)
        thinned = cdt_thin(v, 2, perm_seed=1)
        assert set(thinned.data.tolist()) <= set(v.data.tolist())
        assert cdt_thin(v, 0, perm_seed=1) == v

    def test_cdt_requires_sparse(self):
        with pytest.raises(StorageError):
            cdt_thin(Hypervector.bipolar([1, -1]), 1, perm_seed=0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
