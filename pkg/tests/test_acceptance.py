"""Acceptance battery: every release-gating criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete, or ``couplex golden-suite`` for the same battery outside pytest.
"""

import pytest

from couplex.golden import run_criterion, suite_ids


@pytest.mark.parametrize("ident", suite_ids())
def test_criterion(ident):
    result = run_criterion(ident)
    line = "%s %s (%.1fs): %s" % (
        "PASS" if result.passed else "FAIL",
        result.ident,
        result.seconds,
        result.detail,
    )
    print(line)
    assert result.passed, line
