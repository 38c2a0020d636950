"""One test per acceptance criterion; each prints a single PASS/FAIL line.

The lines are also collected into an "acceptance criteria" section of the
terminal summary, so they show up without ``-s``.
"""

import pytest

from wgqed.verify import CHECKS, run_check


@pytest.mark.parametrize("criterion", sorted(CHECKS))
def test_criterion(criterion, record_property):
    check = run_check(criterion, threads=4)
    record_property("acceptance_line", check.line())
    print("\n" + check.line())
    assert check.passed, check.line()
