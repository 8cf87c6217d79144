#!/usr/bin/env python3
"""
Test runner script - runs the test files module by module and reports a summary.

Files run in dependency order (algebra first, CLI last) so the first failure
points at the lowest broken layer.

Usage:
    python run_tests.py                 # Run everything
    python run_tests.py setmem noise    # Only tests/test_setmem.py and tests/test_noise.py
    python run_tests.py -q              # Summary only, output shown for failing files
    python run_tests.py -x              # Stop at the first failing file
"""
import os
import re
import subprocess
import sys
from pathlib import Path

# Lower layers first
MODULE_ORDER = [
    'hdcore',
    'codebook',
    'setmem',
    'structures',
    'noise',
    'euclid',
    'learn',
    'persistence',
    'datasets',
    'config',
    'reporting',
    'experiments',
    'cli',
]

COUNT_PATTERN = re.compile(r'(\d+) (passed|failed|skipped|error)')


def select_files(names):
    """Test files for the requested modules; unknown names are reported and ignored."""
    wanted = names or MODULE_ORDER
    files = []
    for name in wanted:
        if name not in MODULE_ORDER:
            print(f"Unknown module '{name}' (expected one of: {', '.join(MODULE_ORDER)})")
            continue
        files.append(Path('tests') / f'test_{name}.py')
    return files


def parse_counts(output):
    counts = {'passed': 0, 'failed': 0, 'skipped': 0, 'error': 0}
    for number, kind in COUNT_PATTERN.findall(output or ''):
        counts[kind] = int(number)
    return counts


def run_tests(names=None, quiet=False, stop_early=False):
    """Run the selected test files and print per-file and total counts."""
    project_root = Path(__file__).parent
    os.chdir(project_root)

    env = os.environ.copy()
    pythonpath = env.get('PYTHONPATH', '')
    env['PYTHONPATH'] = str(project_root) + (os.pathsep + pythonpath if pythonpath else '')
    env['PYTHONIOENCODING'] = 'utf-8'

    results = []
    print("=" * 60)
    print("RUNNING TESTS")
    print("=" * 60)

    for test_file in select_files(names):
        if not test_file.exists():
            print(f"\nSkipping {test_file} (not found)")
            continue
        if not quiet:
            print(f"\n{'-' * 60}\nRunning: {test_file}\n{'-' * 60}")

        result = subprocess.run(
            [sys.executable, '-m', 'pytest', str(test_file), '-q' if quiet else '-v'],
            capture_output=True,
            text=True,
            env=env
        )
        counts = parse_counts(result.stdout)
        success = result.returncode == 0
        results.append((test_file, success, counts))

        if not quiet or not success:
            print(result.stdout)
            if result.stderr:
                print(result.stderr)
        if stop_early and not success:
            break

    print("\n" + "=" * 60)
    print("TEST SUMMARY")
    print("=" * 60)
    for test_file, success, counts in results:
        status = "PASSED" if success else "FAILED"
        print(f"  {status:<7} {str(test_file):<32} "
              f"{counts['passed']} passed, {counts['failed']} failed, {counts['skipped']} skipped")

    totals = {k: sum(c[k] for _, _, c in results) for k in ('passed', 'failed', 'skipped', 'error')}
    failed_files = sum(1 for _, s, _ in results if not s)
    print("-" * 60)
    print(f"Tests: {totals['passed']} passed, {totals['failed']} failed, "
          f"{totals['skipped']} skipped, {totals['error']} errors")
    print(f"Files: {len(results) - failed_files} passed, {failed_files} failed")
    print("=" * 60)
    return failed_files == 0 and bool(results)


if __name__ == '__main__':
    args = sys.argv[1:]
    quiet = '-q' in args
    stop_early = '-x' in args
    names = [a for a in args if not a.startswith('-')]

    success = run_tests(names, quiet=quiet, stop_early=stop_early)
    sys.exit(0 if success else 1)
