"""
Tests for CSV ingestion.
"""
import sys

import numpy as np
import pytest

from src.constants import DatasetError
from src.datasets import NORMALIZE_MINMAX, ingest_csv, minmax_normalize


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name='data.csv'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return _write


class TestIngest:
    """Header detection, label coding and column selection."""

    def test_header_and_labels(self, write_csv):
        path = write_csv("a,b,label\n0.1,2,cat\n0.3,4,dog\n0.2,6,cat\n")
        ds = ingest_csv(path, label_column='label')
        assert ds.feature_names == ['a', 'b']
        assert ds.features.tolist() == [[0.1, 2.0], [0.3, 4.0], [0.2, 6.0]]
        assert ds.labels.tolist() == [0, 1, 0]
        assert ds.label_coding == {'cat': 0, 'dog': 1}
        assert ds.summary()['labels'] == 2

    def test_headerless_file(self, write_csv):
        ds = ingest_csv(write_csv("1,2,0\n3,4,1\n"), label_column=2)
        assert ds.feature_names == ['0', '1']
        assert ds.rows == 2 and ds.n == 2
        assert ds.labels.tolist() == [0, 1]

    def test_feature_selection(self, write_csv):
        ds = ingest_csv(write_csv("x,y,z\n1,2,3\n4,5,6\n"), feature_columns=['z', 'x'])
        assert ds.features.tolist() == [[3.0, 1.0], [6.0, 4.0]]
        assert ds.labels is None

    def test_minmax(self, write_csv):
        ds = ingest_csv(write_csv("1,5\n3,5\n2,5\n"), normalize=NORMALIZE_MINMAX)
        assert ds.features.tolist() == [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]


class TestIngestErrors:
    """Malformed input is reported, never guessed around."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            ingest_csv(str(tmp_path / 'absent.csv'))

    def test_empty_file(self, write_csv):
        with pytest.raises(DatasetError):
            ingest_csv(write_csv(""))

    def test_ragged_rows(self, write_csv):
        with pytest.raises(DatasetError):
            ingest_csv(write_csv("1,2\n3,4,5\n"))

    def test_non_numeric_feature(self, write_csv):
        with pytest.raises(DatasetError):
            ingest_csv(write_csv("x,y\n1,2\n3,abc\n"))

    def test_unknown_column(self, write_csv):
        with pytest.raises(DatasetError):
            ingest_csv(write_csv("x,y\n1,2\n"), label_column='label')
        with pytest.raises(DatasetError):
            ingest_csv(write_csv("1,2\n3,4\n"), label_column=5)

    def test_unknown_normalization(self, write_csv):
        with pytest.raises(DatasetError):
            ingest_csv(write_csv("1,2\n3,4\n"), normalize='zscore')


class TestMinmax:
    def test_constant_column_maps_to_zero(self):
        out = minmax_normalize(np.array([[2.0, 1.0], [4.0, 1.0]]))
        assert out.tolist() == [[0.0, 0.0], [1.0, 0.0]]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
