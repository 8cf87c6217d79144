"""
Tests for container files: headers, integrity checks and reloading.
"""
import json
import sys

import numpy as np
import pytest

from src import codebook as cbmod
from src.constants import Bundling, CodebookKind, ContainerFormat, ContainerFormatError
from src.euclid import PositionIdEncoder
from src.learn import train_prototypes, winnow_train
from src.persistence import (load_codebook, load_encoded_set, load_encoder, load_hypervector,
                             load_linear_model, load_prototype_model, read_header, save_codebook,
                             save_encoded_set, save_encoder, save_hypervector,
                             save_linear_model, save_prototype_model)
from src.setmem import decode_set, encode_set


class TestCodebookFiles:
    """Codebooks reload bit-identically or not at all."""

    def test_bipolar_reload(self, tmp_path):
        cb = cbmod.generate(CodebookKind.BIPOLAR, 30, 1000, seed=17)
        path = str(tmp_path / 'cb.hdc')
        save_codebook(cb, path)
        loaded = load_codebook(path)
        assert np.array_equal(loaded.matrix, cb.matrix)
        assert loaded.identity_hash == cb.identity_hash

    def test_bipolar_payload_is_bit_packed(self, tmp_path):
        path = str(tmp_path / 'cb.hdc')
        save_codebook(cbmod.generate(CodebookKind.BIPOLAR, 8, 1000, seed=1), path)
        assert read_header(path)['payload_bytes'] == 1000

    def test_sparse_reload_decodes_same_sets(self, tmp_path):
        cb = cbmod.generate(CodebookKind.SPARSE, 40, 2000, seed=2, p=0.01, fixed_weight=True)
        path = str(tmp_path / 'sparse.hdc')
        save_codebook(cb, path)
        loaded = load_codebook(path)
        es = encode_set([1, 5, 9], cb, Bundling.MAX)
        assert decode_set(es, loaded) == decode_set(es, cb)

    def test_header_records_parameters(self, tmp_path):
        path = str(tmp_path / 'g.hdc')
        save_codebook(cbmod.generate(CodebookKind.GAUSSIAN, 3, 16, seed=4, sigma=0.5), path)
        header = read_header(path)
        assert header['kind'] == CodebookKind.GAUSSIAN
        assert header['sigma'] == 0.5
        assert header['object'] == 'Codebook'

    def test_tampered_payload_rejected(self, tmp_path):
        path = tmp_path / 'cb.hdc'
        save_codebook(cbmod.generate(CodebookKind.BIPOLAR, 4, 64, seed=3), str(path))
        data = bytearray(path.read_bytes())
        data[-1] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(ContainerFormatError):
            load_codebook(str(path))

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / 'cb.hdc'
        save_codebook(cbmod.generate(CodebookKind.BIPOLAR, 4, 64, seed=3), str(path))
        path.write_bytes(path.read_bytes()[:-2])
        with pytest.raises(ContainerFormatError):
            load_codebook(str(path))

    def test_bad_magic_and_version(self, tmp_path):
        path = tmp_path / 'x.hdc'
        path.write_bytes(b'NOT-A-CONTAINER\n{}\n')
        with pytest.raises(ContainerFormatError):
            read_header(str(path))
        header = json.dumps({'version': ContainerFormat.VERSION + 1}).encode('utf-8')
        path.write_bytes(ContainerFormat.MAGIC + b'\n' + header + b'\n')
        with pytest.raises(ContainerFormatError):
            read_header(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ContainerFormatError):
            load_codebook(str(tmp_path / 'absent.hdc'))


class TestOtherObjects:
    """Vectors, sets, models and encoders."""

    def test_encoded_set(self, tmp_path):
        cb = cbmod.generate(CodebookKind.BIPOLAR, 20, 512, seed=6)
        es = encode_set([2, 3, 11], cb, s_declared=5)
        path = str(tmp_path / 'set.hdc')
        save_encoded_set(es, path)
        loaded = load_encoded_set(path)
        assert loaded.vector == es.vector
        assert loaded.vector.bound == es.vector.bound
        assert (loaded.codebook_id, loaded.s_declared, loaded.n_items) == (cb.identity_hash, 5, 3)

    def test_sparse_hypervector(self, tmp_path):
        cb = cbmod.generate(CodebookKind.SPARSE, 5, 300, seed=6, p=0.05)
        h = cb.vector(2)
        path = str(tmp_path / 'h.hdc')
        save_hypervector(h, path)
        assert load_hypervector(path) == h

    def test_wrong_object_type(self, tmp_path):
        path = str(tmp_path / 'h.hdc')
        save_hypervector(cbmod.generate(CodebookKind.BIPOLAR, 1, 64, seed=0).vector(0), path)
        with pytest.raises(ContainerFormatError):
            load_codebook(path)

    def test_prototype_model(self, tmp_path):
        model = train_prototypes([(np.array([1, -1]), 'x'), (np.array([-1, -1]), 'y')])
        path = str(tmp_path / 'model.hdc')
        save_prototype_model(model, path)
        loaded = load_prototype_model(path)
        assert loaded.classes == model.classes
        assert np.array_equal(loaded.prototypes, model.prototypes)

    def test_linear_model(self, tmp_path):
        model = winnow_train([(np.array([1, 0, 1]), 1), (np.array([0, 1, 0]), -1)])
        path = str(tmp_path / 'winnow.hdc')
        save_linear_model(model, path)
        loaded = load_linear_model(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.threshold == model.threshold

    def test_encoder_rebuilds_from_parameters(self, tmp_path):
        enc = PositionIdEncoder.create(n=3, bins=6, d=256, seed=8)
        path = str(tmp_path / 'enc.hdc')
        save_encoder(enc, path)
        X = np.array([[0.1, 0.5, 0.9]])
        assert read_header(path)['payload_bytes'] == 0
        assert np.array_equal(load_encoder(path).encode_matrix(X), enc.encode_matrix(X))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
