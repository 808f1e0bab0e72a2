"""The nine acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line; the same lines are repeated in the
terminal summary at the end of the run.
"""

import pytest

from holonomy.verification import CRITERIA, format_table, run_criterion, warm_up

ACCEPTANCE_LINES = []


@pytest.fixture(scope="module", autouse=True)
def _compiled():
    # runtime limits apply to the computation, not to first-call compilation
    warm_up()


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"{c.number}-{c.title}" for c in CRITERIA])
def test_criterion(crit):
    res = run_criterion(crit)
    line = f"{'PASS' if res.passed else 'FAIL'}  criterion {res.number} {res.title} ({res.runtime_s:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, "\n" + format_table([res])
