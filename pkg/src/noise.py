"""
Corruption models for encoded vectors and the decoding-margin predicates.

Passive models draw the noise vector from a seeded distribution:
- awgn: i.i.d. N(0, sigma^2) per coordinate
- uniform_integer: i.i.d. uniform integers in [-c, c]
- ternary_flip: -1 / 0 / +1 with probabilities theta/2, 1-theta, theta/2, applied
  to a sparse binary vector and truncated back to {0, 1}

Adversarial models spend a norm budget against one target symbol:
- adversarial_l2: delta = -omega L phi(target) / |phi(target)|
- adversarial_l1: unit pushes against phi(target) on the coordinates of its
  largest magnitude until |delta|_1 reaches the budget

A corruption delta is rho-bounded when max_a |<phi(a), delta>| <= rho. Decoding
of a set of size s is guaranteed while 1/2 - s mu - rho / L^2 > 0.
"""
# Standard library imports
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Union

# Third-party imports
import numpy as np

# Local application imports
from .codebook import Codebook
from .constants import NoiseModel, NoiseModelError, Storage
from .hdcore import Hypervector
from .utils import make_rng, require_positive_int, require_probability

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseSpec:
    """
    One corruption model and its parameter.

    `param` is sigma for awgn, c for uniform_integer, theta for ternary_flip,
    omega (a multiple of L) for adversarial_l2 and the L1 budget for
    adversarial_l1.
    """
    model: str
    param: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in NoiseModel.ALL:
            raise NoiseModelError(f"Unknown noise model '{self.model}'")
        if self.param < 0:
            raise NoiseModelError(f"Noise parameter must be >= 0, got {self.param}")
        if self.model == NoiseModel.TERNARY_FLIP and self.param > 1:
            raise NoiseModelError(f"Flip probability must lie in [0, 1], got {self.param}")
        if self.model == NoiseModel.UNIFORM_INTEGER and self.param != int(self.param):
            raise NoiseModelError(f"Uniform integer noise range must be an integer, got {self.param}")

    @classmethod
    def awgn(cls, sigma: float, seed: int = 0) -> 'NoiseSpec':
        return cls(NoiseModel.AWGN, float(sigma), seed)

    @classmethod
    def uniform_integer(cls, c: int, seed: int = 0) -> 'NoiseSpec':
        return cls(NoiseModel.UNIFORM_INTEGER, float(c), seed)

    @classmethod
    def ternary_flip(cls, theta: float, seed: int = 0) -> 'NoiseSpec':
        return cls(NoiseModel.TERNARY_FLIP, float(theta), seed)

    @classmethod
    def adversarial_l2(cls, omega: float) -> 'NoiseSpec':
        return cls(NoiseModel.ADVERSARIAL_L2, float(omega))

    @classmethod
    def adversarial_l1(cls, budget: float) -> 'NoiseSpec':
        return cls(NoiseModel.ADVERSARIAL_L1, float(budget))

    @property
    def is_adversarial(self) -> bool:
        return self.model in NoiseModel.ADVERSARIAL

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NoiseSpec':
        return cls(model=str(data['model']), param=float(data['param']), seed=int(data.get('seed', 0)))


# ============================================================================
# APPLYING NOISE
# ============================================================================

def _target_vector(cb: Optional[Codebook], target: Optional[int], spec: NoiseSpec) -> np.ndarray:
    if cb is None or target is None:
        raise NoiseModelError(f"{spec.model} needs a codebook and a target symbol")
    if not 0 <= int(target) < cb.m:
        raise NoiseModelError(f"Target {target} out of range [0, {cb.m})")
    return cb.vector(int(target)).to_dense().astype(np.float64)


def _awgn(h: Hypervector, spec: NoiseSpec) -> Hypervector:
    if h.is_sparse:
        raise NoiseModelError("AWGN needs a dense vector; promote the sparse vector first")
    rng = make_rng(spec.seed, 'noise', spec.model)
    noisy = h.data.astype(np.float64) + rng.normal(0.0, spec.param, size=h.dim)
    return Hypervector(noisy, h.dim, Storage.REAL)


def _uniform_integer(h: Hypervector, spec: NoiseSpec) -> Hypervector:
    if h.storage not in (Storage.BIPOLAR, Storage.INTEGER):
        raise NoiseModelError(f"Uniform integer noise applies to integer or bipolar bundles, not {h.storage}")
    c = int(spec.param)
    rng = make_rng(spec.seed, 'noise', spec.model)
    shift = rng.integers(-c, c + 1, size=h.dim)
    return Hypervector.integer(h.data.astype(np.int64) + shift, bound=int(h.bound or 1) + c)


def _ternary_flip(h: Hypervector, spec: NoiseSpec) -> Hypervector:
    if not h.is_sparse:
        raise NoiseModelError(f"Ternary flips apply to sparse binary vectors, not {h.storage}")
    rng = make_rng(spec.seed, 'noise', spec.model)
    u = rng.random(h.dim)
    theta = spec.param
    delta = np.where(u < theta / 2.0, -1, np.where(u < theta, 1, 0))
    noisy = np.clip(h.to_dense().astype(np.int64) + delta, 0, 1)
    return Hypervector(np.flatnonzero(noisy).astype(np.int64), h.dim, Storage.SPARSE)


def _adversarial_l2(h: Hypervector, spec: NoiseSpec, cb: Optional[Codebook],
                    target: Optional[int]) -> Hypervector:
    if h.is_sparse:
        raise NoiseModelError("L2 adversary produces real vectors; promote the sparse vector first")
    phi = _target_vector(cb, target, spec)
    norm = float(np.linalg.norm(phi))
    if norm == 0:
        return h
    L = cb.stats.L
    delta = -spec.param * L * phi / norm
    return Hypervector(h.data.astype(np.float64) + delta, h.dim, Storage.REAL)


def _l1_amounts(order: np.ndarray, budget: float, d: int, integral: bool) -> np.ndarray:
    amounts = np.zeros(d, dtype=np.float64)
    k = order.size
    if k == 0 or budget <= 0:
        return amounts
    units = math.floor(budget) if integral else budget
    full, rest = divmod(units, k)
    amounts[order] = full
    whole = int(rest)
    amounts[order[:whole]] += 1
    if not integral and rest - whole > 0 and whole < k:
        amounts[order[whole]] += rest - whole
    return amounts


def _adversarial_l1(h: Hypervector, spec: NoiseSpec, cb: Optional[Codebook],
                    target: Optional[int]) -> Hypervector:
    phi = _target_vector(cb, target, spec)
    magnitude = np.abs(phi)

    if h.is_sparse:
        # only coordinates set in both h and phi(target) lower the target's score
        current = h.to_dense().astype(np.int64)
        candidates = np.flatnonzero((current > 0) & (magnitude > 0))
        take = candidates[:int(math.floor(spec.param))]
        current[take] = 0
        return Hypervector(np.flatnonzero(current).astype(np.int64), h.dim, Storage.SPARSE)

    order = np.argsort(-magnitude, kind='stable')
    order = order[magnitude[order] > 0]
    integral = h.storage in (Storage.BIPOLAR, Storage.INTEGER)
    amounts = _l1_amounts(order, spec.param, h.dim, integral)
    delta = -np.sign(phi) * amounts
    if integral:
        push = int(amounts.max()) if amounts.size else 0
        return Hypervector.integer(h.data.astype(np.int64) + delta.astype(np.int64),
                                   bound=int(h.bound or 1) + push)
    return Hypervector(h.data.astype(np.float64) + delta, h.dim, Storage.REAL)


def apply_noise(h: Hypervector, spec: NoiseSpec, target: Optional[int] = None,
                cb: Optional[Codebook] = None) -> Hypervector:
    """
    Corrupted copy of h.

    Args:
        h: Encoded vector
        spec: Noise model, parameter and seed
        target: Symbol the adversarial models attack
        cb: Codebook supplying phi(target) and L

    Returns:
        Hypervector: h itself when the parameter is zero, otherwise a new vector

    Raises:
        NoiseModelError: model incompatible with h's storage, or an adversarial
                         model without a target
    """
    if spec.is_adversarial and (target is None or cb is None):
        raise NoiseModelError(f"{spec.model} needs a codebook and a target symbol")
    if spec.param == 0:
        return h
    if spec.model == NoiseModel.AWGN:
        return _awgn(h, spec)
    if spec.model == NoiseModel.UNIFORM_INTEGER:
        return _uniform_integer(h, spec)
    if spec.model == NoiseModel.TERNARY_FLIP:
        return _ternary_flip(h, spec)
    if spec.model == NoiseModel.ADVERSARIAL_L2:
        return _adversarial_l2(h, spec, cb, target)
    return _adversarial_l1(h, spec, cb, target)


def noise_delta(original: Hypervector, corrupted: Hypervector) -> np.ndarray:
    """Realized corruption corrupted - original as a float64 array."""
    if original.dim != corrupted.dim:
        raise NoiseModelError(f"Dimension mismatch: {original.dim} vs {corrupted.dim}")
    return corrupted.to_dense().astype(np.float64) - original.to_dense().astype(np.float64)


# ============================================================================
# MARGINS AND TOLERANCES
# ============================================================================

def rho_bound(cb: Codebook, delta: Union[Hypervector, np.ndarray]) -> float:
    """Smallest rho for which delta is rho-bounded: max_a |<phi(a), delta>|."""
    return float(np.max(np.abs(cb.scores(delta))))


def _mu(cb: Codebook, mu: Optional[float]) -> float:
    if mu is not None:
        return float(mu)
    if cb.stats.mu_emp is None:
        raise NoiseModelError("Codebook incoherence unavailable (need at least two codewords)")
    return cb.stats.mu_emp


def decoding_margin(cb: Codebook, s: int, rho: float, mu: Optional[float] = None) -> float:
    """1/2 - s mu - rho / L^2; decoding is guaranteed while this is positive."""
    require_positive_int('s', s, NoiseModelError)
    return 0.5 - s * _mu(cb, mu) - rho / float(cb.norms_sq.min())


def awgn_rho_bound(sigma: float, L: float, m: int, delta: float) -> float:
    """High-probability rho for AWGN corruption: sigma L sqrt(2 ln(2m / delta))."""
    return sigma * L * math.sqrt(2.0 * math.log(2.0 * m / delta))


def l1_budget(cb: Codebook, omega: float, s: int) -> float:
    """
    Adversarial L1 budget for a tolerance omega.

    Dense bundles of s codewords: omega s d. Sparse binary sets: omega d.
    """
    if cb.is_sparse:
        return omega * cb.d
    return omega * s * cb.d


def _density(cb: Codebook) -> float:
    if cb.p is not None:
        return cb.p
    return float(cb.norms_sq.mean()) / cb.d


def tolerance(cb: Codebook, s: int, delta: float, model: str, mu: Optional[float] = None) -> float:
    """
    Largest noise parameter of `model` for which decoding stays guaranteed.

    Uses the measured incoherence of cb unless mu is given. A non-positive
    result means no noise level is covered.

    Raises:
        NoiseModelError: unknown model or invalid arguments
    """
    require_positive_int('s', s, NoiseModelError)
    require_probability('delta', delta, NoiseModelError)
    mu = _mu(cb, mu)
    log_term = math.log(2.0 * cb.m / delta)
    slack = 0.5 - s * mu

    if model == NoiseModel.AWGN:
        return cb.stats.L / math.sqrt(2.0 * log_term) * slack
    if model == NoiseModel.UNIFORM_INTEGER:
        return math.sqrt(cb.d / (2.0 * log_term)) * slack
    if model == NoiseModel.TERNARY_FLIP:
        return 0.5 - 2.0 * s * mu - math.sqrt(log_term / (2.0 * cb.d * _density(cb)))
    if model == NoiseModel.ADVERSARIAL_L2:
        return slack
    if model == NoiseModel.ADVERSARIAL_L1:
        if cb.is_sparse:
            return _density(cb) * slack
        return 1.0 / (2.0 * s) - mu
    raise NoiseModelError(f"Unknown noise model '{model}'")


__all__ = [
    'NoiseSpec',
    'apply_noise',
    'noise_delta',
    'rho_bound',
    'decoding_margin',
    'awgn_rho_bound',
    'l1_budget',
    'tolerance',
]
