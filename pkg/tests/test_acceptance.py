"""Acceptance gate: every numbered criterion must pass.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail
line per criterion; the same registry backs ``fop selftest``.
"""

import pytest

from fop.selftest import CRITERIA, run_criterion


@pytest.mark.parametrize(
    "crit", CRITERIA, ids=[f"criterion_{c.number:02d}_{c.slug}" for c in CRITERIA]
)
def test_criterion(crit):
    result = run_criterion(crit)
    mark = "PASS" if result.passed else "FAIL"
    print(f"[{result.number:2d}] {mark}  {result.title}  {result.detail}")
    assert result.passed, f"criterion {result.number} failed: {result.detail}"
