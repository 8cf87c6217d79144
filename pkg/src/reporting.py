"""
Report writers for experiment runs.

Per-trial rows go to CSV or JSON-lines; the summary (every check with its
measured value and bound, plus informational metrics) always goes to CSV.
Both files start with a banner line carrying the run parameters and a
timestamp unless the banner is switched off, so reruns diff cleanly.
"""
# Standard library imports
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

# Third-party imports
import pandas as pd

# Local application imports
from .constants import ConfigError, OutputFormat

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ['quantity', 'measured', 'bound', 'relation', 'passed', 'hard']


# ============================================================================
# REPORT MODEL
# ============================================================================

@dataclass(frozen=True)
class Check:
    """
    A measured quantity compared against the bound it must respect.

    Attributes:
        name: Quantity being checked
        measured: Observed value
        bound: Value from the guarantee
        relation: '<=', '>=' or '=='
        hard: True for deterministic guarantees (zero tolerance)
    """
    name: str
    measured: float
    bound: float
    relation: str = '<='
    hard: bool = False

    @property
    def passed(self) -> bool:
        if self.relation == '<=':
            return self.measured <= self.bound
        if self.relation == '>=':
            return self.measured >= self.bound
        if self.relation == '==':
            return self.measured == self.bound
        raise ConfigError(f"Unknown relation '{self.relation}'")

    def to_row(self) -> Dict[str, Any]:
        return {'quantity': self.name, 'measured': self.measured, 'bound': self.bound,
                'relation': self.relation, 'passed': self.passed, 'hard': self.hard}


@dataclass
class ExperimentReport:
    """Everything one experiment run produced."""
    experiment: str
    params: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_checks(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def summary_rows(self) -> List[Dict[str, Any]]:
        rows = [c.to_row() for c in self.checks]
        for name, value in self.metrics.items():
            rows.append({'quantity': name, 'measured': value, 'bound': None,
                         'relation': 'info', 'passed': None, 'hard': None})
        return rows


# ============================================================================
# WRITERS
# ============================================================================

def banner_line(report: ExperimentReport, timestamp: Optional[datetime] = None) -> str:
    """One-line description of the run: experiment, parameters and a timestamp."""
    stamp = (timestamp or datetime.now()).strftime('%Y-%m-%d %H:%M:%S')
    params = json.dumps(report.params, sort_keys=True, default=str)
    return f"hdc {report.experiment} {params} generated {stamp}"


def _frame(rows: List[Dict[str, Any]], columns: Optional[List[str]] = None) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    if columns is not None:
        frame = frame.reindex(columns=columns)
    return frame


def write_rows(path: str, rows: List[Dict[str, Any]], fmt: str = OutputFormat.CSV,
               banner: Optional[str] = None, columns: Optional[List[str]] = None) -> str:
    """
    Write rows as CSV or JSON-lines.

    Args:
        path: Destination file
        rows: Flat dictionaries, one per row
        fmt: 'csv' or 'jsonl'
        banner: Optional first line ('# ...' for CSV, a JSON object for JSON-lines)
        columns: Column order (defaults to first-appearance order)

    Returns:
        str: The path written

    Raises:
        ConfigError: unknown format
        OSError: the file cannot be written
    """
    if fmt not in (OutputFormat.CSV, OutputFormat.JSONL):
        raise ConfigError(f"Unknown output format '{fmt}' (expected csv or jsonl)")
    frame = _frame(rows, columns)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            if fmt == OutputFormat.CSV:
                if banner is not None:
                    f.write(f"# {banner}\n")
                frame.to_csv(f, index=False, lineterminator='\n')
            else:
                if banner is not None:
                    f.write(json.dumps({'banner': banner}) + '\n')
                if not frame.empty:
                    f.write(frame.to_json(orient='records', lines=True, double_precision=15))
                    f.write('\n')
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise

    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def report_paths(directory: str, experiment: str, fmt: str) -> Tuple[str, str]:
    """(trial file, summary file) for an experiment inside `directory`."""
    suffix = 'jsonl' if fmt == OutputFormat.JSONL else 'csv'
    return (os.path.join(directory, f"{experiment}.trials.{suffix}"),
            os.path.join(directory, f"{experiment}.summary.csv"))


def write_report(report: ExperimentReport, directory: str, fmt: str = OutputFormat.CSV,
                 banner: bool = True, timestamp: Optional[datetime] = None) -> Tuple[str, str]:
    """
    Write the per-trial rows and the summary of a run.

    Returns:
        tuple: (trial file path, summary file path)
    """
    trials_path, summary_path = report_paths(directory, report.experiment, fmt)
    header = banner_line(report, timestamp) if banner else None
    write_rows(trials_path, report.rows, fmt, header)
    write_rows(summary_path, report.summary_rows(), OutputFormat.CSV, header, SUMMARY_COLUMNS)
    return trials_path, summary_path


def format_report(report: ExperimentReport) -> str:
    """Plain-text summary table: each check's measured value next to its bound."""
    lines = [f"Experiment: {report.experiment}"]
    if report.checks:
        frame = _frame([c.to_row() for c in report.checks], SUMMARY_COLUMNS)
        frame['passed'] = frame['passed'].map({True: 'ok', False: 'FAILED'})
        lines.append(frame.to_string(index=False))
    if report.metrics:
        lines.append('')
        width = max(len(k) for k in report.metrics)
        for name, value in report.metrics.items():
            shown = f"{value:.6g}" if isinstance(value, float) else str(value)
            lines.append(f"  {name.ljust(width)}  {shown}")
    lines.append('')
    lines.append('RESULT: ' + ('PASSED' if report.passed else
                               f"FAILED ({len(report.failed_checks)} check(s))"))
    return '\n'.join(lines)


__all__ = [
    'Check',
    'ExperimentReport',
    'banner_line',
    'write_rows',
    'report_paths',
    'write_report',
    'format_report',
    'SUMMARY_COLUMNS',
]
