"""
Experiment registry, typed parameters and the trial runner.
"""
# Standard library imports
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

# Third-party imports
from tqdm import tqdm

# Local application imports
from ..config import config
from ..constants import ConfigError, ResourceLimitError
from ..datasets import Dataset
from ..reporting import ExperimentReport
from ..utils import derive_seed

logger = logging.getLogger(__name__)

T = TypeVar('T')

_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


# ============================================================================
# PARAMETERS
# ============================================================================

@dataclass(frozen=True)
class Param:
    """
    One typed experiment parameter.

    Values arrive as strings from the command line or an INI file and are
    converted with `parse`.
    """
    name: str
    kind: type
    default: Any
    help: str = ''
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    choices: Optional[Tuple[str, ...]] = None

    def parse(self, raw: Any) -> Any:
        try:
            if self.kind is bool:
                value = raw if isinstance(raw, bool) else self._parse_bool(str(raw))
            elif self.kind is int:
                value = int(raw) if not isinstance(raw, float) or raw.is_integer() else None
                if value is None:
                    raise ValueError(raw)
            else:
                value = self.kind(raw)
        except (TypeError, ValueError):
            raise ConfigError(
                f"Parameter '{self.name}' expects {self.kind.__name__}, got {raw!r}") from None

        if self.minimum is not None and value < self.minimum:
            raise ConfigError(f"Parameter '{self.name}' must be >= {self.minimum}, got {value}")
        if self.maximum is not None and value > self.maximum:
            raise ConfigError(f"Parameter '{self.name}' must be <= {self.maximum}, got {value}")
        if self.choices is not None and value not in self.choices:
            raise ConfigError(
                f"Parameter '{self.name}' must be one of {', '.join(self.choices)}, got {value!r}")
        return value

    @staticmethod
    def _parse_bool(text: str) -> bool:
        lowered = text.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(text)


SEED = Param('seed', int, 0, 'Base seed; every trial derives its own seed from it', minimum=0)


# ============================================================================
# RUN CONTEXT
# ============================================================================

@dataclass
class RunContext:
    """Execution settings shared by every runner."""
    seed: int = 0
    workers: int = 1
    progress: bool = False
    allow_large: bool = False
    data: Optional[Dataset] = None

    def trial_seed(self, *labels: Any) -> int:
        return derive_seed(self.seed, *labels)

    def require_dimension(self, d: int, what: str = 'd') -> int:
        if not self.allow_large and d > config.MAX_DIMENSION:
            raise ResourceLimitError(
                f"{what}={d} exceeds the dimension cap {config.MAX_DIMENSION} (use --allow-large)")
        return d

    def require_trials(self, trials: int, what: str = 'trials') -> int:
        if not self.allow_large and trials > config.MAX_TRIALS:
            raise ResourceLimitError(
                f"{what}={trials} exceeds the trial cap {config.MAX_TRIALS} (use --allow-large)")
        return trials

    def require_alphabet(self, m: int) -> int:
        if not self.allow_large and m > config.MAX_ALPHABET:
            raise ResourceLimitError(
                f"m={m} exceeds the alphabet cap {config.MAX_ALPHABET} (use --allow-large)")
        return m

    def map_trials(self, fn: Callable[[int], T], trials: int, desc: str = 'trials') -> List[T]:
        """
        Run fn(0), ..., fn(trials - 1) and return the results in trial order.

        Each trial must derive its randomness from its index alone, so the
        results do not depend on the number of workers.
        """
        bar = dict(total=trials, desc=desc, disable=not self.progress, leave=False)
        if self.workers <= 1 or trials <= 1:
            return [fn(t) for t in tqdm(range(trials), **bar)]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(tqdm(pool.map(fn, range(trials)), **bar))


# ============================================================================
# REGISTRY
# ============================================================================

Runner = Callable[[Dict[str, Any], RunContext], ExperimentReport]


@dataclass(frozen=True)
class Experiment:
    """A named runner and its parameter schema."""
    name: str
    summary: str
    params: Tuple[Param, ...]
    runner: Runner
    uses_data: bool = False

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise ConfigError(f"Experiment '{self.name}' has no parameter '{name}'")

    def resolve(self, raw: Mapping[str, Any]) -> Dict[str, Any]:
        """
        Defaults overridden by `raw`, every value converted to its declared type.

        Raises:
            ConfigError: unknown parameter or a value that does not parse
        """
        known = {p.name for p in self.params}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"Unknown parameter(s) for '{self.name}': {', '.join(unknown)}")
        resolved = {}
        for p in self.params:
            resolved[p.name] = p.parse(raw[p.name]) if p.name in raw else p.default
        return resolved


REGISTRY: Dict[str, Experiment] = {}
ALIASES: Dict[str, str] = {'set-decode': 'set-decode-uniform'}


def register(name: str, summary: str, params: Sequence[Param],
             uses_data: bool = False) -> Callable[[Runner], Runner]:
    """Decorator adding a runner to the registry; the seed parameter is added automatically."""
    def wrap(runner: Runner) -> Runner:
        if name in REGISTRY:
            raise ConfigError(f"Experiment '{name}' registered twice")
        REGISTRY[name] = Experiment(name, summary, (SEED,) + tuple(params), runner, uses_data)
        return runner
    return wrap


def get_experiment(name: str) -> Experiment:
    """Look up a runner by name or alias."""
    key = ALIASES.get(name, name)
    if key not in REGISTRY:
        raise ConfigError(f"Unknown experiment '{name}' (see 'hdc list')")
    return REGISTRY[key]


def run_experiment(name: str, raw_params: Mapping[str, Any], workers: int = 1,
                   progress: bool = False, allow_large: bool = False,
                   data: Optional[Dataset] = None) -> ExperimentReport:
    """
    Validate parameters, enforce the resource caps and run one experiment.

    Raises:
        ConfigError: unknown experiment or parameter, or a dataset given to a
                     runner that takes none
        ResourceLimitError: a cap was exceeded without allow_large
    """
    experiment = get_experiment(name)
    params = experiment.resolve(raw_params)
    if data is not None and not experiment.uses_data:
        raise ConfigError(f"Experiment '{experiment.name}' does not accept --data")

    ctx = RunContext(seed=params['seed'], workers=max(1, int(workers)), progress=progress,
                     allow_large=allow_large, data=data)
    if 'trials' in params:
        ctx.require_trials(params['trials'])
    if 'm' in params:
        ctx.require_alphabet(params['m'])
    if params.get('d'):
        ctx.require_dimension(params['d'])

    logger.info(f"Running {experiment.name} with {params}")
    report = experiment.runner(params, ctx)
    logger.info(f"{experiment.name} finished: {'passed' if report.passed else 'FAILED'} "
                f"({len(report.rows)} rows, {len(report.checks)} checks)")
    return report


__all__ = [
    'Param',
    'RunContext',
    'Experiment',
    'REGISTRY',
    'ALIASES',
    'register',
    'get_experiment',
    'run_experiment',
]
