"""Acceptance criteria 1-8; a summary line per criterion is printed after the run.

Criterion 8 executes criteria 1-7 a second time in a fresh interpreter (with
a different hash seed) and compares the digests of all search outputs.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import acceptance_suite as suite

RESULTS: dict[int, suite.Outcome] = {}
LINES: list[str] = []


def outcome(n: int) -> suite.Outcome:
    if n not in RESULTS:
        RESULTS[n] = suite.CRITERIA[n]()
    return RESULTS[n]


def report(n: int, out: suite.Outcome) -> None:
    line = f"criterion {n}: {'PASS' if out.passed else 'FAIL'}  {out.detail}"
    LINES.append(line)
    print(line)
    assert out.passed, "; ".join(out.failures[:5]) or out.detail


@pytest.mark.parametrize("n", range(1, 8))
def test_criterion(n):
    report(n, outcome(n))


def test_criterion_8_determinism():
    first = {str(n): outcome(n).digest for n in suite.CRITERIA}
    env = dict(os.environ, PYTHONHASHSEED="12345")
    here = Path(__file__).parent
    proc = subprocess.run([sys.executable, str(here / "acceptance_suite.py")], env=env, cwd=here,
                          capture_output=True, text=True, check=True)
    second = json.loads(proc.stdout.strip().splitlines()[-1])
    differ = sorted(int(n) for n in first if first[n] != second[n])
    detail = "criteria 1-7 outputs identical across two executions" if not differ else f"digests differ for {differ}"
    report(8, suite.Outcome(not differ, detail, failures=[detail] if differ else []))


if __name__ == "__main__":
    for n, fn in suite.CRITERIA.items():
        out = fn()
        print(f"criterion {n}: {'PASS' if out.passed else 'FAIL'}  {out.detail}", flush=True)
