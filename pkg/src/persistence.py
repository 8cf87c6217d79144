"""
Container files for codebooks, encodings, models and encoder parameters.

Every object is written to one self-describing file:
    line 1   HDC-CONTAINER
    line 2   JSON header (format version, object type, shape, parameters,
             payload layout, byte length and blake2b checksum)
    rest     raw little-endian payload

Payload layouts:
    bipolar  numpy.packbits over the row-major matrix, bit 1 <=> +1
    real     <f8
    integer  <i8
    sparse   <u4 per-row counts followed by the <u4 index lists
    none     empty payload (parameters only)
"""
# Standard library imports
import hashlib
import json
import logging
import os
from typing import Any, Dict, Tuple, Union

# Third-party imports
import numpy as np
from scipy import sparse as sp

# Local application imports
from .codebook import Codebook, from_matrix
from .constants import CodebookKind, ContainerFormat, ContainerFormatError, Storage
from .euclid import EuclidEncoder, build_encoder
from .hdcore import Hypervector
from .learn import LinearModel, PrototypeModel
from .setmem import EncodedSet

logger = logging.getLogger(__name__)

LAYOUT_BIPOLAR = 'bipolar'
LAYOUT_REAL = 'real'
LAYOUT_INTEGER = 'integer'
LAYOUT_SPARSE = 'sparse'
LAYOUT_NONE = 'none'


# ============================================================================
# PAYLOAD CODECS
# ============================================================================

def _encode_matrix(matrix: Union[np.ndarray, sp.csr_matrix], layout: str) -> bytes:
    if layout == LAYOUT_BIPOLAR:
        return np.packbits((np.asarray(matrix) > 0).astype(np.uint8).ravel()).tobytes()
    if layout == LAYOUT_REAL:
        return np.ascontiguousarray(matrix, dtype='<f8').tobytes()
    if layout == LAYOUT_INTEGER:
        return np.ascontiguousarray(matrix, dtype='<i8').tobytes()
    if layout == LAYOUT_SPARSE:
        csr = sp.csr_matrix(matrix)
        csr.sort_indices()
        counts = np.diff(csr.indptr).astype('<u4')
        return counts.tobytes() + csr.indices.astype('<u4').tobytes()
    if layout == LAYOUT_NONE:
        return b''
    raise ContainerFormatError(f"Unknown payload layout '{layout}'")


def _decode_matrix(payload: bytes, layout: str, rows: int, cols: int) -> Union[np.ndarray, sp.csr_matrix]:
    try:
        if layout == LAYOUT_BIPOLAR:
            bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=rows * cols)
            return (2 * bits.astype(np.int8) - 1).reshape(rows, cols)
        if layout == LAYOUT_REAL:
            return np.frombuffer(payload, dtype='<f8').astype(np.float64).reshape(rows, cols)
        if layout == LAYOUT_INTEGER:
            return np.frombuffer(payload, dtype='<i8').astype(np.int64).reshape(rows, cols)
        if layout == LAYOUT_SPARSE:
            counts = np.frombuffer(payload[:4 * rows], dtype='<u4').astype(np.int64)
            indices = np.frombuffer(payload[4 * rows:], dtype='<u4').astype(np.int64)
            if indices.size != int(counts.sum()):
                raise ContainerFormatError("Sparse payload index count does not match the row counts")
            indptr = np.concatenate([[0], np.cumsum(counts)])
            if indices.size and (indices.max() >= cols):
                raise ContainerFormatError("Sparse payload index out of range")
            return sp.csr_matrix((np.ones(indices.size, dtype=np.int8), indices, indptr),
                                 shape=(rows, cols))
    except ValueError as e:
        raise ContainerFormatError(f"Payload does not match its header: {e}") from e
    raise ContainerFormatError(f"Unknown payload layout '{layout}'")


def _layout_for_storage(storage: str) -> str:
    return {
        Storage.BIPOLAR: LAYOUT_BIPOLAR,
        Storage.REAL: LAYOUT_REAL,
        Storage.INTEGER: LAYOUT_INTEGER,
        Storage.SPARSE: LAYOUT_SPARSE,
    }[storage]


# ============================================================================
# CONTAINER I/O
# ============================================================================

def _payload_hash(payload: bytes) -> str:
    return hashlib.blake2b(payload, digest_size=16).hexdigest()


def _write_container(path: str, header: Dict[str, Any], payload: bytes) -> None:
    header = dict(header)
    header['version'] = ContainerFormat.VERSION
    header['payload_bytes'] = len(payload)
    header['payload_hash'] = _payload_hash(payload)
    try:
        with open(path, 'wb') as f:
            f.write(ContainerFormat.MAGIC + b'\n')
            f.write(json.dumps(header, sort_keys=True).encode('utf-8') + b'\n')
            f.write(payload)
    except OSError as e:
        logger.error(f"Failed to write container '{path}': {e}")
        raise
    logger.info(f"Saved {header.get('object')} to {path} ({len(payload)} payload bytes)")


def read_header(path: str) -> Dict[str, Any]:
    """Header of a container file without decoding its payload."""
    return _read_container(path, with_payload=False)[0]


def _read_container(path: str, with_payload: bool = True) -> Tuple[Dict[str, Any], bytes]:
    if not os.path.exists(path):
        raise ContainerFormatError(f"No container file at '{path}'")
    with open(path, 'rb') as f:
        magic = f.readline().rstrip(b'\n')
        if magic != ContainerFormat.MAGIC:
            raise ContainerFormatError(f"'{path}' is not a container file (bad magic)")
        try:
            header = json.loads(f.readline().decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ContainerFormatError(f"Corrupt container header in '{path}': {e}") from e
        if header.get('version') != ContainerFormat.VERSION:
            raise ContainerFormatError(f"Unsupported container version {header.get('version')}")
        payload = f.read() if with_payload else b''
    if with_payload and len(payload) != header.get('payload_bytes'):
        raise ContainerFormatError(
            f"Truncated payload in '{path}': {len(payload)} of {header.get('payload_bytes')} bytes")
    if with_payload and _payload_hash(payload) != header.get('payload_hash'):
        raise ContainerFormatError(f"Payload checksum mismatch in '{path}'")
    logger.debug(f"Read {header.get('object')} header from {path}")
    return header, payload


def _expect(header: Dict[str, Any], object_type: str) -> None:
    if header.get('object') != object_type:
        raise ContainerFormatError(f"Expected a {object_type} container, found {header.get('object')}")


# ============================================================================
# CODEBOOKS
# ============================================================================

def _codebook_layout(cb: Codebook) -> str:
    if cb.kind == CodebookKind.SPARSE:
        return LAYOUT_SPARSE
    if cb.kind == CodebookKind.GAUSSIAN:
        return LAYOUT_REAL
    if cb.kind == CodebookKind.ORTHOGONAL:
        return LAYOUT_INTEGER
    return LAYOUT_BIPOLAR


def save_codebook(cb: Codebook, path: str) -> None:
    layout = _codebook_layout(cb)
    header = dict(cb.params())
    header.update({
        'object': 'Codebook',
        'layout': layout,
        'identity_hash': cb.identity_hash,
        # mu_emp is quadratic in m, so only already-computed stats are recorded
        'stats': cb.stats.to_dict() if 'stats' in vars(cb) else None,
    })
    _write_container(path, header, _encode_matrix(cb.matrix, layout))


def load_codebook(path: str) -> Codebook:
    """
    Raises:
        ContainerFormatError: corrupt file, wrong object type or identity hash mismatch
    """
    header, payload = _read_container(path)
    _expect(header, 'Codebook')
    matrix = _decode_matrix(payload, header['layout'], int(header['m']), int(header['d']))
    cb = from_matrix(header['kind'], matrix, seed=int(header['seed']), p=header.get('p'),
                     sigma=header.get('sigma'), fixed_weight=bool(header.get('fixed_weight', False)))
    if cb.identity_hash != header.get('identity_hash'):
        raise ContainerFormatError(f"Codebook identity hash mismatch in '{path}'")
    logger.info(f"Loaded {cb} from {path}")
    return cb


# ============================================================================
# HYPERVECTORS AND ENCODED SETS
# ============================================================================

def _vector_header(h: Hypervector) -> Dict[str, Any]:
    return {'storage': h.storage, 'd': h.dim, 'bound': h.bound,
            'layout': _layout_for_storage(h.storage)}


def _vector_payload(h: Hypervector) -> bytes:
    layout = _layout_for_storage(h.storage)
    if h.is_sparse:
        row = sp.csr_matrix((np.ones(h.data.size, dtype=np.int8), h.data,
                             np.array([0, h.data.size])), shape=(1, h.dim))
        return _encode_matrix(row, layout)
    return _encode_matrix(h.data[None, :], layout)


def _vector_from(header: Dict[str, Any], payload: bytes) -> Hypervector:
    d = int(header['d'])
    matrix = _decode_matrix(payload, header['layout'], 1, d)
    storage = header['storage']
    if storage == Storage.SPARSE:
        return Hypervector(np.sort(matrix.indices).astype(np.int64), d, Storage.SPARSE)
    row = np.asarray(matrix)[0]
    if storage == Storage.BIPOLAR:
        return Hypervector(row.astype(np.int8), d, Storage.BIPOLAR, 1)
    if storage == Storage.INTEGER:
        return Hypervector.integer(row, bound=int(header['bound']))
    return Hypervector(row.astype(np.float64), d, Storage.REAL)


def save_hypervector(h: Hypervector, path: str) -> None:
    header = _vector_header(h)
    header['object'] = 'Hypervector'
    _write_container(path, header, _vector_payload(h))


def load_hypervector(path: str) -> Hypervector:
    header, payload = _read_container(path)
    _expect(header, 'Hypervector')
    return _vector_from(header, payload)


def save_encoded_set(es: EncodedSet, path: str) -> None:
    header = _vector_header(es.vector)
    header.update({'object': 'EncodedSet', 'codebook_id': es.codebook_id,
                   'bundling': es.bundling, 'threshold': es.threshold,
                   's_declared': es.s_declared, 'n_items': es.n_items})
    _write_container(path, header, _vector_payload(es.vector))


def load_encoded_set(path: str) -> EncodedSet:
    header, payload = _read_container(path)
    _expect(header, 'EncodedSet')
    return EncodedSet(vector=_vector_from(header, payload), codebook_id=header['codebook_id'],
                      bundling=header['bundling'], threshold=header.get('threshold'),
                      s_declared=header.get('s_declared'), n_items=int(header.get('n_items', 0)))


# ============================================================================
# MODELS AND ENCODERS
# ============================================================================

def _json_label(label: Any) -> Any:
    return label.item() if isinstance(label, np.generic) else label


def save_prototype_model(model: PrototypeModel, path: str) -> None:
    integral = np.issubdtype(model.prototypes.dtype, np.integer)
    layout = LAYOUT_INTEGER if integral else LAYOUT_REAL
    header = {'object': 'PrototypeModel', 'classes': [_json_label(c) for c in model.classes],
              'counts': [int(c) for c in model.counts], 'd': model.d,
              'epoch_mistakes': list(model.epoch_mistakes), 'layout': layout}
    _write_container(path, header, _encode_matrix(model.prototypes, layout))


def load_prototype_model(path: str) -> PrototypeModel:
    header, payload = _read_container(path)
    _expect(header, 'PrototypeModel')
    classes = tuple(header['classes'])
    prototypes = _decode_matrix(payload, header['layout'], len(classes), int(header['d']))
    return PrototypeModel(classes=classes, prototypes=np.array(prototypes),
                          counts=np.array(header['counts'], dtype=np.int64),
                          epoch_mistakes=tuple(header.get('epoch_mistakes', ())))


def save_linear_model(model: LinearModel, path: str) -> None:
    header = {'object': 'LinearModel', 'kind': model.kind, 'threshold': model.threshold,
              'mistake_count': model.mistake_count, 'balanced': model.balanced,
              'factor': model.factor, 'd': int(model.weights.size), 'layout': LAYOUT_REAL}
    _write_container(path, header, _encode_matrix(model.weights[None, :], LAYOUT_REAL))


def load_linear_model(path: str) -> LinearModel:
    header, payload = _read_container(path)
    _expect(header, 'LinearModel')
    weights = _decode_matrix(payload, LAYOUT_REAL, 1, int(header['d']))[0]
    return LinearModel(kind=header['kind'], weights=np.array(weights),
                       threshold=float(header['threshold']),
                       mistake_count=int(header['mistake_count']),
                       balanced=bool(header['balanced']), factor=float(header['factor']))


def save_encoder(enc: EuclidEncoder, path: str) -> None:
    """Encoders are seed-deterministic, so only their parameters are stored."""
    header = {'object': 'EuclidEncoder', 'params': enc.params(), 'layout': LAYOUT_NONE}
    _write_container(path, header, b'')


def load_encoder(path: str) -> EuclidEncoder:
    header, _ = _read_container(path)
    _expect(header, 'EuclidEncoder')
    return build_encoder(header['params'])


__all__ = [
    'read_header',
    'save_codebook',
    'load_codebook',
    'save_hypervector',
    'load_hypervector',
    'save_encoded_set',
    'load_encoded_set',
    'save_prototype_model',
    'load_prototype_model',
    'save_linear_model',
    'load_linear_model',
    'save_encoder',
    'load_encoder',
]
