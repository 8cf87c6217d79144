"""
CSV ingestion for the Euclidean encoders and learners.
"""
# Standard library imports
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Union

# Third-party imports
import numpy as np
import pandas as pd

# Local application imports
from .constants import DatasetError

logger = logging.getLogger(__name__)

NORMALIZE_NONE = 'none'
NORMALIZE_MINMAX = 'minmax'


@dataclass
class Dataset:
    """Numeric feature matrix with optional integer-coded labels."""
    features: np.ndarray
    feature_names: List[str]
    labels: Optional[np.ndarray] = None
    label_coding: Dict[Hashable, int] = field(default_factory=dict)
    source: str = ''

    @property
    def rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def n(self) -> int:
        return int(self.features.shape[1])

    def summary(self) -> Dict[str, object]:
        return {'source': self.source, 'rows': self.rows, 'features': self.n,
                'labels': len(self.label_coding) if self.labels is not None else 0,
                'label_coding': {str(k): v for k, v in self.label_coding.items()}}


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except (TypeError, ValueError):
        return False
    return True


def _looks_like_header(raw: pd.DataFrame) -> bool:
    """
    The first row is a header when it has a non-numeric cell above numeric data,
    or when it has no numeric cell at all.
    """
    first = raw.iloc[0].tolist()
    if not any(_is_number(cell) for cell in first):
        return True
    body = raw.iloc[1:]
    for position, cell in enumerate(first):
        if not _is_number(cell) and len(body) and all(_is_number(v) for v in body.iloc[:, position]):
            return True
    return False


def _read_raw(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise DatasetError(f"No such file: '{path}'")
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True,
                          keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"'{path}' is empty") from None
    except pd.errors.ParserError as e:
        raise DatasetError(f"'{path}' has ragged rows: {e}") from e
    if raw.empty:
        raise DatasetError(f"'{path}' is empty")
    if raw.isna().any().any() or (raw == '').any().any():
        raise DatasetError(f"'{path}' has ragged rows or empty cells")
    return raw


def minmax_normalize(features: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns map to 0."""
    lo = features.min(axis=0)
    span = features.max(axis=0) - lo
    constant = span == 0
    if np.any(constant):
        logger.warning(f"Min-max normalization: {int(constant.sum())} constant column(s) mapped to 0")
    return np.where(constant, 0.0, (features - lo) / np.where(constant, 1.0, span))


def ingest_csv(path: str, label_column: Optional[Union[int, str]] = None,
               feature_columns: Optional[Sequence[Union[int, str]]] = None,
               normalize: str = NORMALIZE_NONE) -> Dataset:
    """
    Read a rectangular numeric CSV with an optional header row.

    Args:
        path: CSV file
        label_column: Column (name or 0-based position) holding class labels;
                      labels are coded 0, 1, ... by first appearance
        feature_columns: Columns to use as features (default: all but the label)
        normalize: 'none' or 'minmax'

    Returns:
        Dataset: features as float64

    Raises:
        DatasetError: missing or empty file, ragged rows, non-numeric cells,
                      unknown columns or an unknown normalization
    """
    raw = _read_raw(path)
    if _looks_like_header(raw):
        names = [str(c).strip() for c in raw.iloc[0].tolist()]
        raw = raw.iloc[1:].reset_index(drop=True)
    else:
        names = [str(i) for i in range(raw.shape[1])]
    if raw.empty:
        raise DatasetError(f"'{path}' has a header but no data rows")
    raw.columns = names

    def resolve(column: Union[int, str]) -> str:
        if isinstance(column, int) or (isinstance(column, str) and column.isdigit() and column not in names):
            position = int(column)
            if not 0 <= position < len(names):
                raise DatasetError(f"Column {column} out of range (file has {len(names)})")
            return names[position]
        if column not in names:
            raise DatasetError(f"Unknown column '{column}'")
        return column

    label_name = resolve(label_column) if label_column is not None else None
    if feature_columns is not None:
        feature_names = [resolve(c) for c in feature_columns]
    else:
        feature_names = [c for c in names if c != label_name]
    if not feature_names:
        raise DatasetError("No feature columns selected")

    try:
        features = raw[feature_names].apply(pd.to_numeric, errors='raise').to_numpy(dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise DatasetError(f"Non-numeric feature cell in '{path}': {e}") from e

    labels = None
    coding: Dict[Hashable, int] = {}
    if label_name is not None:
        codes = pd.factorize(raw[label_name].str.strip(), sort=False)
        labels = codes[0].astype(np.int64)
        coding = {label: i for i, label in enumerate(codes[1].tolist())}

    if normalize == NORMALIZE_MINMAX:
        features = minmax_normalize(features)
    elif normalize != NORMALIZE_NONE:
        raise DatasetError(f"Unknown normalization '{normalize}'")

    dataset = Dataset(features=features, feature_names=feature_names, labels=labels,
                      label_coding=coding, source=path)
    logger.info(f"Ingested {path}: {dataset.rows} rows, {dataset.n} features, "
                f"{len(coding)} label values")
    return dataset


__all__ = [
    'Dataset',
    'ingest_csv',
    'minmax_normalize',
    'NORMALIZE_NONE',
    'NORMALIZE_MINMAX',
]
