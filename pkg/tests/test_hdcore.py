"""
Tests for the hypervector value type and its element-wise algebra.
"""
import sys

import numpy as np
import pytest

from src.constants import (CapacityError, DimensionMismatchError, OperationError, Storage,
                           StorageError)
from src.hdcore import (Hypervector, binarize, bind, bundle_max, bundle_sum, clamp, dot, hamming,
                        negate, norm2, permute, stack, subtract)


class TestConstruction:
    """Storage invariants enforced by the constructors."""

    def test_bipolar_rejects_zero(self):
        with pytest.raises(StorageError):
            Hypervector.bipolar([1, 0, -1])

    def test_integer_bound_is_checked(self):
        with pytest.raises(CapacityError):
            Hypervector.integer([3, -1], bound=2)

    def test_integer_picks_smallest_dtype(self):
        assert Hypervector.integer([1, -1], bound=5).data.dtype == np.int8
        assert Hypervector.integer([1, -1], bound=1000).data.dtype == np.int16

    def test_sparse_indices_sorted(self):
        v = Hypervector.sparse([5, 1, 3], dim=8)
        assert v.data.tolist() == [1, 3, 5]
        assert v.density == pytest.approx(3 / 8)

    def test_sparse_index_out_of_range(self):
        with pytest.raises(StorageError):
            Hypervector.sparse([0, 8], dim=8)

    def test_data_is_read_only(self):
        v = Hypervector.bipolar([1, -1, 1])
        with pytest.raises(ValueError):
            v.data[0] = -1

    def test_promote_sparse_to_integer(self):
        v = Hypervector.sparse([0, 2], dim=4).promote(Storage.INTEGER)
        assert v.storage == Storage.INTEGER
        assert v.data.tolist() == [1, 0, 1, 0]

    def test_lossy_promotion_refused(self):
        with pytest.raises(StorageError):
            Hypervector.real([0.5, 1.0]).promote(Storage.BIPOLAR)


class TestBundling:
    """Sum and max bundling."""

    def test_sum_of_bipolar(self):
        a = Hypervector.bipolar([1, -1, 1, 1])
        b = Hypervector.bipolar([1, 1, -1, 1])
        s = bundle_sum([a, b])
        assert s.storage == Storage.INTEGER
        assert s.bound == 2
        assert s.data.tolist() == [2, 0, 0, 2]

    def test_sum_with_real_operand_is_real(self):
        s = bundle_sum([Hypervector.bipolar([1, -1]), Hypervector.real([0.5, 0.5])])
        assert s.storage == Storage.REAL
        assert s.data.tolist() == [1.5, -0.5]

    def test_empty_sum_needs_flag(self):
        with pytest.raises(OperationError):
            bundle_sum([])
        assert bundle_sum([], allow_empty=True, dim=3).data.tolist() == [0, 0, 0]

    def test_declared_capacity(self):
        vs = [Hypervector.bipolar([1, 1])] * 3
        with pytest.raises(CapacityError):
            bundle_sum(vs, max_bundle=2)

    def test_mixed_sparse_dense_refused(self):
        with pytest.raises(StorageError):
            bundle_sum([Hypervector.sparse([0], 2), Hypervector.bipolar([1, 1])])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            bundle_sum([Hypervector.bipolar([1, 1]), Hypervector.bipolar([1, 1, 1])])

    def test_max_is_union(self):
        u = bundle_max([Hypervector.sparse([0, 3], 6), Hypervector.sparse([3, 5], 6)])
        assert u.data.tolist() == [0, 3, 5]

    def test_max_requires_sparse(self):
        with pytest.raises(StorageError):
            bundle_max([Hypervector.bipolar([1, -1])])


class TestBindingAndPermutation:
    """Binding is an involution; permutation is a cyclic shift."""

    def test_bind_is_self_inverse(self):
        rng = np.random.default_rng(0)
        a = Hypervector.integer(rng.integers(-3, 4, size=64), bound=3)
        k = Hypervector.bipolar(np.where(rng.random(64) < 0.5, 1, -1))
        assert bind(bind(a, k), k) == a

    def test_bind_preserves_dot(self):
        rng = np.random.default_rng(1)
        a = Hypervector.bipolar(np.where(rng.random(32) < 0.5, 1, -1))
        b = Hypervector.bipolar(np.where(rng.random(32) < 0.5, 1, -1))
        k = Hypervector.bipolar(np.where(rng.random(32) < 0.5, 1, -1))
        assert dot(bind(a, k), bind(b, k)) == dot(a, b)

    def test_bind_key_must_be_bipolar(self):
        with pytest.raises(StorageError):
            bind(Hypervector.bipolar([1, 1]), Hypervector.integer([1, 1]))

    def test_permute_left_shift(self):
        v = Hypervector.integer([1, 2, 3], bound=3)
        assert permute(v, 1).data.tolist() == [2, 3, 1]
        assert permute(v, -1).data.tolist() == [3, 1, 2]
        assert permute(v, 3) == v

    def test_permute_sparse_refused(self):
        with pytest.raises(StorageError):
            permute(Hypervector.sparse([1], 4), 1)


class TestSimilarity:
    """Dot products, norms and Hamming distance."""

    def test_sparse_sparse_dot_is_overlap(self):
        assert dot(Hypervector.sparse([0, 2, 4], 8), Hypervector.sparse([2, 4, 6], 8)) == 2.0

    def test_sparse_bipolar_dot(self):
        assert dot(Hypervector.sparse([0, 1], 3), Hypervector.bipolar([1, -1, 1])) == 0.0

    def test_sparse_integer_dot_needs_promotion(self):
        with pytest.raises(StorageError):
            dot(Hypervector.sparse([0], 2), Hypervector.integer([1, 1]))

    def test_norm(self):
        assert norm2(Hypervector.bipolar([1] * 16)) == pytest.approx(4.0)
        assert norm2(Hypervector.sparse([1, 2, 3, 4], 10)) == pytest.approx(2.0)

    def test_hamming(self):
        assert hamming(Hypervector.bipolar([1, -1, 1, -1]), Hypervector.bipolar([1, 1, 1, 1])) == 2


class TestPrecisionControl:
    """Clamping, thresholding and signed arithmetic."""

    def test_clamp_lowers_bound(self):
        v = clamp(Hypervector.integer([5, -7, 1], bound=7), 3)
        assert v.data.tolist() == [3, -3, 1]
        assert v.bound == 3

    def test_clamp_rejects_non_positive(self):
        with pytest.raises(OperationError):
            clamp(Hypervector.integer([1]), 0)

    def test_binarize_sparse_and_bipolar(self):
        v = Hypervector.integer([0, 2, 3, 1], bound=3)
        assert binarize(v, 2).data.tolist() == [1, 2]
        assert binarize(v, 2, Storage.BIPOLAR).data.tolist() == [-1, 1, 1, -1]

    def test_subtract_and_negate(self):
        a = Hypervector.bipolar([1, -1])
        b = Hypervector.bipolar([-1, -1])
        assert subtract(a, b).data.tolist() == [2, 0]
        assert negate(a).data.tolist() == [-1, 1]

    def test_stack(self):
        rows = stack([Hypervector.sparse([0], 3), Hypervector.sparse([2], 3)])
        assert rows.tolist() == [[1, 0, 0], [0, 0, 1]]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
