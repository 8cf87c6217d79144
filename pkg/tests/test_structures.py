"""
Tests for feature-value records, shift-encoded sequences and sliding windows.
"""
import sys

import numpy as np
import pytest

from src import codebook as cbmod
from src.constants import CodebookError, CodebookKind, EncodingError, Storage
from src.hdcore import Hypervector
from src.structures import (StructureCodec, binding_incoherence, cross_feature_incoherence,
                            decode_feature, decode_sequence, decode_sequence_position,
                            encode_sequence, encode_structure, self_shift_incoherence,
                            shift_incoherence, structure_overlap, window_new, window_push)


@pytest.fixture(scope='module')
def codec():
    values = cbmod.generate(CodebookKind.BIPOLAR, 20, 2048, seed=21)
    features = cbmod.generate(CodebookKind.BIPOLAR, 5, 2048, seed=22)
    return StructureCodec(values, features)


@pytest.fixture(scope='module')
def seq_codec():
    return StructureCodec(cbmod.generate(CodebookKind.BIPOLAR, 20, 2048, seed=31))


class TestRecords:
    """Binding feature keys to values and reading them back."""

    def test_every_feature_decodes(self, codec):
        record = [(0, 3), (1, 7), (2, 7), (3, 0), (4, 19)]
        h = encode_structure(record, codec)
        for f, a in record:
            assert decode_feature(h, f, codec) == a

    def test_pair_order_does_not_matter(self, codec):
        a = encode_structure([(0, 1), (2, 5)], codec)
        b = encode_structure([(2, 5), (0, 1)], codec)
        assert a == b

    def test_score_reports_runner_up(self, codec):
        h = encode_structure([(1, 4)], codec)
        best, score, runner_up = decode_feature(h, 1, codec, return_score=True)
        assert best == 4
        assert score == pytest.approx(2048.0)
        assert runner_up < score

    def test_tie_goes_to_lowest_index(self, codec):
        assert decode_feature(Hypervector.zeros(2048), 0, codec, return_score=True) == (0, 0.0, 0.0)

    def test_empty_record_is_zero(self, codec):
        assert encode_structure([], codec) == Hypervector.zeros(2048)

    def test_repeated_feature_rejected(self, codec):
        with pytest.raises(EncodingError):
            encode_structure([(0, 1), (0, 2)], codec)

    def test_out_of_range_feature(self, codec):
        with pytest.raises(EncodingError):
            encode_structure([(5, 1)], codec)
        with pytest.raises(EncodingError):
            decode_feature(encode_structure([(0, 1)], codec), 5, codec)

    def test_overlap_counts_agreeing_features(self):
        values = cbmod.generate(CodebookKind.BIPOLAR, 10, 8192, seed=1)
        features = cbmod.generate(CodebookKind.BIPOLAR, 5, 8192, seed=2)
        codec = StructureCodec(values, features)
        h1 = encode_structure([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], codec)
        h2 = encode_structure([(0, 1), (1, 2), (2, 3), (3, 9), (4, 8)], codec)
        assert structure_overlap(h1, h2, codec) == pytest.approx(3.0, abs=0.5)

    def test_feature_codebook_must_be_bipolar(self):
        values = cbmod.generate(CodebookKind.BIPOLAR, 4, 64, seed=0)
        gaussian = cbmod.generate(CodebookKind.GAUSSIAN, 2, 64, seed=1)
        with pytest.raises(CodebookError):
            StructureCodec(values, gaussian)

    def test_feature_codebook_dimension(self):
        values = cbmod.generate(CodebookKind.BIPOLAR, 4, 64, seed=0)
        with pytest.raises(CodebookError):
            StructureCodec(values, cbmod.generate(CodebookKind.BIPOLAR, 2, 128, seed=1))

    def test_records_need_features(self, seq_codec):
        with pytest.raises(CodebookError):
            encode_structure([(0, 1)], seq_codec)

    def test_incoherence_measures_are_small(self, codec):
        assert 0 < binding_incoherence(codec) < 0.2
        assert 0 < cross_feature_incoherence(codec) < 0.2


class TestSequences:
    """Shift encoding and position decoding."""

    def test_newest_symbol_is_unshifted(self, seq_codec):
        h = encode_sequence([4], seq_codec)
        assert h == seq_codec.value_cb.vector(4).promote(Storage.INTEGER)

    def test_decode_every_position(self, seq_codec):
        xs = [3, 3, 17, 0]
        h = encode_sequence(xs, seq_codec)
        assert decode_sequence(h, len(xs), seq_codec) == xs

    def test_position_out_of_window(self, seq_codec):
        h = encode_sequence([1, 2], seq_codec)
        with pytest.raises(EncodingError):
            decode_sequence_position(h, 2, 2, seq_codec)

    def test_sequence_must_be_shorter_than_d(self):
        codec = StructureCodec(cbmod.generate(CodebookKind.BIPOLAR, 2, 4, seed=0))
        with pytest.raises(EncodingError):
            encode_sequence([0, 1, 0, 1], codec)

    def test_needs_bipolar_values(self):
        codec = StructureCodec(cbmod.generate(CodebookKind.GAUSSIAN, 3, 64, seed=0))
        with pytest.raises(CodebookError):
            encode_sequence([0], codec)


class TestSlidingWindow:
    """Incremental window updates match re-encoding the contents."""

    def test_full_window_matches_reencoding(self, seq_codec):
        stream = [5, 1, 9, 9, 2, 14, 0, 7]
        w = window_new(seq_codec, 4)
        for t, x in enumerate(stream):
            w = window_push(w, x)
            contents = stream[max(0, t - 3):t + 1]
            assert list(w.history) == contents
            assert w.vector() == encode_sequence(contents, seq_codec)
        assert w.is_full

    def test_push_leaves_input_untouched(self, seq_codec):
        w = window_new(seq_codec, 3)
        w2 = window_push(w, 1)
        assert w.history == ()
        assert not np.any(w.state)
        assert w2.history == (1,)

    def test_state_is_read_only(self, seq_codec):
        w = window_push(window_new(seq_codec, 3), 2)
        with pytest.raises(ValueError):
            w.state[0] = 99
        w = window_push(w, 4)
        assert w.vector() == encode_sequence([2, 4], seq_codec)

    def test_empty_window_is_zero(self, seq_codec):
        assert window_new(seq_codec, 3).vector() == Hypervector.zeros(2048)

    def test_window_length_checked(self, seq_codec):
        with pytest.raises(EncodingError):
            window_new(seq_codec, 0)
        with pytest.raises(EncodingError):
            window_new(seq_codec, 2048)


class TestShiftIncoherence:
    """FFT and direct computations agree with brute force."""

    @pytest.fixture
    def small_cb(self):
        return cbmod.generate(CodebookKind.BIPOLAR, 3, 32, seed=4)

    def test_self_shift_matches_brute_force(self, small_cb):
        phi = small_cb.dense_matrix().astype(np.int64)
        worst = max(abs(int(phi[a] @ np.roll(phi[a], -i))) for a in range(3) for i in range(1, 32))
        assert self_shift_incoherence(small_cb) == pytest.approx(worst / 32)

    def test_shift_matches_brute_force(self, small_cb):
        phi = small_cb.dense_matrix().astype(np.int64)
        worst = max(abs(int(phi[a] @ np.roll(phi[b], -i)))
                    for a in range(3) for b in range(3) for i in range(1, 5))
        assert shift_incoherence(small_cb, 5) == pytest.approx(worst / 32)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
