"""Acceptance criteria 1-11, each at its full sample size.

The terminal summary prints one PASS/FAIL line per criterion. Failures are
real: see the README section on known gaps.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from renyi_qsvt.suites import ALL_SUITES


@pytest.mark.acceptance
@pytest.mark.parametrize("k", sorted(ALL_SUITES))
def test_criterion(k):
    res = ALL_SUITES[k]()
    ACCEPTANCE_LINES[k] = (res.passed, f"{res.name}: {res.summary} ({res.seconds:.1f}s)")
    print(f"criterion {k}: {'PASS' if res.passed else 'FAIL'} {res.summary}")
    assert res.passed, res.summary
