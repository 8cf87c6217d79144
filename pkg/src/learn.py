"""
Learning on hypervector encodings.

- PrototypeModel: one bundled prototype per class, nearest-prototype prediction
  by norm-normalized inner product, multiclass perceptron fine-tuning
- LinearModel: binary perceptron and Winnow (multiplicative updates, factor 2)
- separating_function: the closest-pair midpoint classifier in encoded space
- sparse_separator_experiment: k summed random-projection rows as a sparse
  linear separator of margin-gamma data
"""
# Standard library imports
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

# Third-party imports
import numpy as np
from scipy.spatial.distance import cdist

# Local application imports
from .config import config
from .constants import Calibration, Distance, ModelError, ResourceLimitError
from .euclid import EuclidEncoder, encoded_distances, fit_distortion, input_distances
from .hdcore import Hypervector
from .utils import derive_seed, make_rng, require_positive_int

logger = logging.getLogger(__name__)

Example = Tuple[Union[Hypervector, np.ndarray], Hashable]


def _as_array(h: Union[Hypervector, np.ndarray]) -> np.ndarray:
    if isinstance(h, Hypervector):
        return h.to_dense()
    return np.asarray(h)


# ============================================================================
# PROTOTYPES
# ============================================================================

@dataclass(frozen=True, eq=False)
class PrototypeModel:
    """
    Class prototypes, one row per class.

    Classes are kept in sorted order so the model does not depend on the order
    of the training stream. Integer encodings accumulate exactly in int64.
    """
    classes: Tuple[Hashable, ...]
    prototypes: np.ndarray
    counts: np.ndarray
    epoch_mistakes: Tuple[int, ...] = ()

    @property
    def d(self) -> int:
        return int(self.prototypes.shape[1])

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.prototypes.astype(np.float64), axis=1)

    def index_of(self, label: Hashable) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise ModelError(f"Unknown class label {label!r}") from None

    def prototype(self, label: Hashable) -> Hypervector:
        row = self.prototypes[self.index_of(label)]
        if np.issubdtype(row.dtype, np.integer):
            return Hypervector.integer(row)
        return Hypervector.real(row)


def _accumulator(rows: Sequence[np.ndarray]) -> np.dtype:
    return np.dtype(np.int64) if all(np.issubdtype(r.dtype, np.integer) for r in rows) else np.dtype(np.float64)


def train_prototypes(stream: Iterable[Example]) -> PrototypeModel:
    """
    Bundle the encodings of each class into its prototype.

    Raises:
        ModelError: empty stream or inconsistent dimensions
    """
    examples = [(_as_array(h), label) for h, label in stream]
    if not examples:
        raise ModelError("Cannot train prototypes on an empty stream")
    d = examples[0][0].shape[0]
    if any(x.shape != (d,) for x, _ in examples):
        raise ModelError("Training encodings have inconsistent dimensions")

    try:
        classes = tuple(sorted({label for _, label in examples}))
    except TypeError:
        raise ModelError("Class labels must be mutually comparable") from None
    dtype = _accumulator([x for x, _ in examples])
    prototypes = np.zeros((len(classes), d), dtype=dtype)
    counts = np.zeros(len(classes), dtype=np.int64)
    position = {c: i for i, c in enumerate(classes)}
    for x, label in examples:
        prototypes[position[label]] += x.astype(dtype)
        counts[position[label]] += 1

    logger.info(f"Trained {len(classes)} prototypes from {len(examples)} examples (d={d})")
    return PrototypeModel(classes=classes, prototypes=prototypes, counts=counts)


def prototype_add(model: PrototypeModel, h: Union[Hypervector, np.ndarray], label: Hashable) -> PrototypeModel:
    """Online update: bundle one more example into its class prototype (new classes are added)."""
    x = _as_array(h)
    if x.shape != (model.d,):
        raise ModelError(f"Example has dimension {x.shape[-1]}, model has d={model.d}")
    dtype = _accumulator([model.prototypes, x])
    prototypes = model.prototypes.astype(dtype)
    counts = model.counts.copy()
    classes = model.classes
    if label not in classes:
        classes = tuple(sorted(classes + (label,)))
        idx = classes.index(label)
        prototypes = np.insert(prototypes, idx, 0, axis=0)
        counts = np.insert(counts, idx, 0)
    idx = classes.index(label)
    prototypes[idx] += x.astype(dtype)
    counts[idx] += 1
    return PrototypeModel(classes=classes, prototypes=prototypes, counts=counts,
                          epoch_mistakes=model.epoch_mistakes)


def _scores(model: PrototypeModel, X: np.ndarray) -> np.ndarray:
    norms = model.norms
    raw = X.astype(np.float64) @ model.prototypes.astype(np.float64).T
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms > 0, raw / safe, -np.inf)


def predict(model: PrototypeModel, h: Union[Hypervector, np.ndarray]) -> Hashable:
    """
    argmax_k <c_k, h> / |c_k|; ties go to the lowest class index.

    Raises:
        ModelError: the model has no classes
    """
    if not model.classes:
        raise ModelError("Cannot predict with an empty model")
    x = _as_array(h)
    if x.shape != (model.d,):
        raise ModelError(f"Query has dimension {x.shape[-1]}, model has d={model.d}")
    return model.classes[int(np.argmax(_scores(model, x[None, :])[0]))]


def predict_batch(model: PrototypeModel, X: np.ndarray) -> List[Hashable]:
    """predict() for every row of X."""
    if not model.classes:
        raise ModelError("Cannot predict with an empty model")
    winners = np.argmax(_scores(model, np.atleast_2d(X)), axis=1)
    return [model.classes[int(i)] for i in winners]


def perceptron_finetune(model: PrototypeModel, stream: Sequence[Example], epochs: int,
                        rate: float = 1.0) -> PrototypeModel:
    """
    Multiclass perceptron passes over the stream.

    On a mistake (prediction y_hat != y) the example is added to prototype y and
    subtracted from prototype y_hat. Training stops early after an epoch
    without mistakes.

    Raises:
        ModelError: epochs < 1 or a label the model does not know
    """
    require_positive_int('epochs', epochs, ModelError)
    examples = [(_as_array(h), model.index_of(label)) for h, label in stream]
    integral = rate == int(rate) and np.issubdtype(model.prototypes.dtype, np.integer) and all(
        np.issubdtype(x.dtype, np.integer) for x, _ in examples)
    dtype = np.int64 if integral else np.float64
    prototypes = model.prototypes.astype(dtype)
    step = int(rate) if integral else float(rate)
    history: List[int] = list(model.epoch_mistakes)

    for epoch in range(epochs):
        mistakes = 0
        for x, y in examples:
            current = PrototypeModel(model.classes, prototypes, model.counts)
            y_hat = int(np.argmax(_scores(current, x[None, :])[0]))
            if y_hat != y:
                prototypes[y] += step * x.astype(dtype)
                prototypes[y_hat] -= step * x.astype(dtype)
                mistakes += 1
        history.append(mistakes)
        logger.debug(f"Perceptron epoch {epoch + 1}: {mistakes} mistakes")
        if mistakes == 0:
            break

    return PrototypeModel(classes=model.classes, prototypes=prototypes, counts=model.counts.copy(),
                          epoch_mistakes=tuple(history))


def accuracy(model: Union[PrototypeModel, 'LinearModel'], stream: Iterable[Example]) -> float:
    """Fraction of examples whose prediction matches the label."""
    examples = list(stream)
    if not examples:
        raise ModelError("Accuracy of an empty stream is undefined")
    if isinstance(model, PrototypeModel):
        hits = sum(predict(model, h) == label for h, label in examples)
    else:
        hits = sum(linear_predict(model, h) == label for h, label in examples)
    return hits / len(examples)


# ============================================================================
# LINEAR MODELS
# ============================================================================

PERCEPTRON = 'perceptron'
WINNOW = 'winnow'


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    Binary linear threshold unit.

    Winnow keeps strictly positive weights over {0,1} features; bipolar inputs
    are mapped to ((1+v)/2, (1-v)/2) so negative evidence gets its own weights.
    """
    kind: str
    weights: np.ndarray
    threshold: float
    mistake_count: int = 0
    balanced: bool = False
    factor: float = Calibration.WINNOW_FACTOR
    mistakes_per_example: Tuple[int, ...] = field(default=(), repr=False)

    def features(self, x: np.ndarray) -> np.ndarray:
        if self.kind == WINNOW:
            return _winnow_features(x, self.balanced)
        return x.astype(np.float64)

    def score(self, x: np.ndarray) -> float:
        return float(np.dot(self.weights, self.features(x)))


def _check_label(label: Any) -> int:
    if label not in (-1, 1):
        raise ModelError(f"Labels must be -1 or +1, got {label!r}")
    return int(label)


def _winnow_features(x: np.ndarray, balanced: bool) -> np.ndarray:
    x = x.astype(np.float64)
    if balanced:
        return np.concatenate([(1.0 + x) / 2.0, (1.0 - x) / 2.0])
    return x


def linear_predict(model: LinearModel, h: Union[Hypervector, np.ndarray]) -> int:
    """+1 when the score clears the threshold (Winnow: >=, perceptron: >), else -1."""
    score = model.score(_as_array(h))
    if model.kind == WINNOW:
        return 1 if score >= model.threshold else -1
    return 1 if score > model.threshold else -1


def winnow_train(stream: Iterable[Example], threshold: Optional[float] = None,
                 factor: float = Calibration.WINNOW_FACTOR, epochs: int = 1) -> LinearModel:
    """
    Winnow with promotion / demotion by `factor` on mistakes.

    Inputs are {0,1} vectors or bipolar vectors (mapped with complement
    features). Weights start at 1 and the default threshold is half the feature
    count.

    Raises:
        ModelError: labels outside {-1, +1}, empty stream or non-binary inputs
    """
    require_positive_int('epochs', epochs, ModelError)
    examples = [(_as_array(h), _check_label(label)) for h, label in stream]
    if not examples:
        raise ModelError("Cannot train Winnow on an empty stream")
    balanced = any(np.any(x < 0) for x, _ in examples)
    if any(np.any((x != 0) & (x != 1) & (x != -1)) for x, _ in examples):
        raise ModelError("Winnow inputs must be binary {0,1} or bipolar {-1,+1}")

    width = examples[0][0].shape[0] * (2 if balanced else 1)
    weights = np.ones(width, dtype=np.float64)
    theta = float(width) / 2.0 if threshold is None else float(threshold)
    mistakes = 0
    trace: List[int] = []

    for _ in range(epochs):
        for x, y in examples:
            feats = _winnow_features(x, balanced)
            y_hat = 1 if float(np.dot(weights, feats)) >= theta else -1
            if y_hat != y:
                active = feats > 0
                if y == 1:
                    weights[active] *= factor
                else:
                    weights[active] /= factor
                mistakes += 1
            trace.append(mistakes)

    logger.debug(f"Winnow finished with {mistakes} mistakes over {len(trace)} examples")
    return LinearModel(kind=WINNOW, weights=weights, threshold=theta, mistake_count=mistakes,
                       balanced=balanced, factor=factor, mistakes_per_example=tuple(trace))


def perceptron_train(stream: Iterable[Example], epochs: int = 1, rate: float = 1.0) -> LinearModel:
    """
    Binary perceptron: w += rate y x and threshold -= rate y on every mistake.

    A mistake is y (w.x - threshold) <= 0, so the all-zero start errs once.
    """
    require_positive_int('epochs', epochs, ModelError)
    examples = [(_as_array(h).astype(np.float64), _check_label(label)) for h, label in stream]
    if not examples:
        raise ModelError("Cannot train a perceptron on an empty stream")
    weights = np.zeros(examples[0][0].shape[0], dtype=np.float64)
    theta = 0.0
    mistakes = 0
    trace: List[int] = []
    for _ in range(epochs):
        for x, y in examples:
            if y * (float(np.dot(weights, x)) - theta) <= 0:
                weights += rate * y * x
                theta -= rate * y
                mistakes += 1
            trace.append(mistakes)
    return LinearModel(kind=PERCEPTRON, weights=weights, threshold=theta, mistake_count=mistakes,
                       mistakes_per_example=tuple(trace))


# ============================================================================
# SEPARATION GUARANTEES
# ============================================================================

@dataclass(frozen=True, eq=False)
class SeparatingFunction:
    """
    f(h) = <h, phi(p) - phi(q)> - (|phi(p)|^2 - |phi(q)|^2) / 2 for the closest cross pair (p, q).

    condition_met records whether the measured beta/alpha (squared distances)
    is below |p - q|^2 / 2, the sufficient condition for f to separate.
    """
    p_index: int
    q_index: int
    direction: np.ndarray
    offset: float
    half_gap: float
    beta_over_alpha: float

    @property
    def condition_met(self) -> bool:
        return self.beta_over_alpha < self.half_gap

    def __call__(self, h: Union[Hypervector, np.ndarray]) -> float:
        return float(np.dot(_as_array(h).astype(np.float64), self.direction)) - self.offset

    def evaluate(self, H: np.ndarray) -> np.ndarray:
        return np.asarray(H, dtype=np.float64) @ self.direction - self.offset

    def to_dict(self) -> Dict[str, Any]:
        return {'p_index': self.p_index, 'q_index': self.q_index, 'half_gap': self.half_gap,
                'beta_over_alpha': self.beta_over_alpha, 'condition_met': self.condition_met}


def separating_function(P: Sequence[Sequence[float]], Q: Sequence[Sequence[float]],
                        enc: EuclidEncoder) -> SeparatingFunction:
    """
    Build the midpoint classifier between the encodings of the closest pair.

    Distortion is measured over every pair of distinct points in P and Q with
    squared Euclidean distances on both sides.

    Raises:
        ModelError: empty or overlapping point sets
    """
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if P.size == 0 or Q.size == 0:
        raise ModelError("Both point sets must be non-empty")
    cross = cdist(P, Q, 'sqeuclidean')
    i, j = np.unravel_index(int(np.argmin(cross)), cross.shape)
    if cross[i, j] == 0:
        raise ModelError("Point sets overlap (zero cross distance)")

    HP = enc.encode_matrix(P).astype(np.float64)
    HQ = enc.encode_matrix(Q).astype(np.float64)
    direction = HP[i] - HQ[j]
    offset = 0.5 * (float(np.dot(HP[i], HP[i])) - float(np.dot(HQ[j], HQ[j])))

    points = np.vstack([P, Q])
    codes = np.vstack([HP, HQ])
    dx = input_distances(points, points, Distance.SQ_EUCLID)
    dh = encoded_distances(codes, codes, Distance.SQ_EUCLID)
    upper = np.triu_indices(points.shape[0], k=1)
    mask = dx[upper] > 0
    report = fit_distortion(dx[upper][mask], dh[upper][mask], Distance.SQ_EUCLID, Distance.SQ_EUCLID)

    return SeparatingFunction(p_index=int(i), q_index=int(j), direction=direction, offset=offset,
                              half_gap=0.5 * float(cross[i, j]),
                              beta_over_alpha=report.beta_over_alpha)


@dataclass(frozen=True)
class SparseSeparatorTrial:
    """One draw of the sparse-separator construction."""
    d: int
    separated: bool
    summed_correlation: float
    min_selected_rho: float
    rho_required: float
    single_row_event: bool
    single_row_separates: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'d': self.d, 'separated': self.separated,
                'summed_correlation': self.summed_correlation,
                'min_selected_rho': self.min_selected_rho, 'rho_required': self.rho_required,
                'single_row_event': self.single_row_event,
                'single_row_separates': self.single_row_separates}


def sparse_separator_dimension(n: int, k: int, gamma: float, multiplier: float = 1.0) -> int:
    """ceil(multiplier * k * exp(n / (2 k gamma^2)))."""
    exponent = n / (2.0 * k * gamma * gamma)
    if exponent > 700:
        return int(np.iinfo(np.int64).max)
    return max(1, int(math.ceil(multiplier * k * math.exp(exponent))))


def margin_data(n: int, gamma: float, points: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unit vectors with |x_1| >= gamma, labelled by the sign of x_1.

    The separating direction is the first standard basis vector.
    """
    signs = np.where(rng.random(points) < 0.5, -1.0, 1.0)
    first = rng.uniform(gamma, 1.0, size=points)
    rest = rng.standard_normal((points, n - 1))
    norms = np.linalg.norm(rest, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rest = rest / norms * np.sqrt(1.0 - first ** 2)[:, None]
    X = np.hstack([(signs * first)[:, None], rest])
    return X, signs.astype(np.int64)


def sparse_separator_trial(n: int, k: int, gamma: float, seed: int, multiplier: float = 1.0,
                           points: int = 200, inject_planted: bool = False,
                           max_dimension: Optional[int] = None) -> SparseSeparatorTrial:
    """
    Sample Phi with unit rows, pick the k rows most correlated with the planted
    direction and test whether their sum separates margin-gamma data.

    Raises:
        ModelError: gamma outside (0, 1), k < 1 or n < 2
        ResourceLimitError: the required d exceeds the configured cap
    """
    require_positive_int('k', k, ModelError)
    require_positive_int('n', n, ModelError, minimum=2)
    if not 0.0 < gamma < 1.0:
        raise ModelError(f"Margin gamma must lie in (0, 1), got {gamma}")
    cap = config.MAX_SPARSE_SEPARATOR_DIMENSION if max_dimension is None else max_dimension
    d = sparse_separator_dimension(n, k, gamma, multiplier)
    if d > cap:
        raise ResourceLimitError(
            f"Sparse separator needs d={d} (n={n}, k={k}, gamma={gamma}) but the cap is {cap}")

    rng = make_rng(seed, 'sparse-separator')
    rows = rng.standard_normal((d, n))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    if inject_planted:
        rows[0] = 0.0
        rows[0, 0] = 1.0
    X, y = margin_data(n, gamma, points, rng)

    corr = rows[:, 0]
    take = min(k, d)
    chosen = np.argsort(-corr, kind='stable')[:take]
    summed = rows[chosen].sum(axis=0)
    norm = float(np.linalg.norm(summed))
    summed_corr = float(summed[0]) / norm if norm > 0 else 0.0
    separated = bool(np.all(np.sign(X @ summed) == y))

    best = int(np.argmax(corr))
    single_event = bool(corr[best] > 1.0 - gamma * gamma / 2.0)
    single_separates = bool(np.all(np.sign(X @ rows[best]) == y))
    return SparseSeparatorTrial(d=d, separated=separated, summed_correlation=summed_corr,
                                min_selected_rho=float(corr[chosen].min()),
                                rho_required=1.0 / (gamma * math.sqrt(k)),
                                single_row_event=single_event,
                                single_row_separates=single_separates)


def sparse_separator_experiment(n: int, k: int, gamma: float, trials: int, seed: int,
                                multiplier: float = 1.0, points: int = 200,
                                inject_planted: bool = False,
                                max_dimension: Optional[int] = None) -> Dict[str, Any]:
    """
    Repeat sparse_separator_trial and summarize.

    Returns:
        dict: success_rate, single_row_rate, observed minimum rho among the
              selected rows, the required rho, d and the per-trial rows
    """
    require_positive_int('trials', trials, ModelError)
    results = [sparse_separator_trial(n, k, gamma, derive_seed(seed, "trial", t), multiplier, points,
                                      inject_planted, max_dimension) for t in range(trials)]
    summary = {
        'n': n, 'k': k, 'gamma': gamma, 'd': results[0].d, 'trials': trials,
        'success_rate': float(np.mean([r.separated for r in results])),
        'single_row_rate': float(np.mean([r.single_row_event for r in results])),
        'min_selected_rho': float(min(r.min_selected_rho for r in results)),
        'rho_required': results[0].rho_required,
        'trials_detail': [r.to_dict() for r in results],
    }
    logger.info(f"Sparse separator n={n} k={k} gamma={gamma}: success {summary['success_rate']:.3f}")
    return summary


__all__ = [
    'PrototypeModel',
    'LinearModel',
    'SeparatingFunction',
    'SparseSeparatorTrial',
    'train_prototypes',
    'prototype_add',
    'predict',
    'predict_batch',
    'perceptron_finetune',
    'accuracy',
    'linear_predict',
    'winnow_train',
    'perceptron_train',
    'separating_function',
    'sparse_separator_dimension',
    'margin_data',
    'sparse_separator_trial',
    'sparse_separator_experiment',
]
