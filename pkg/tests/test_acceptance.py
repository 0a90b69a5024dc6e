"""Acceptance criteria 1-9, run at their stated sizes and tolerances with seed 1.

Each test prints one PASS/FAIL line; the lines are also collected into a
summary block at the end of the pytest run.
"""

import pytest

from leader_election.acceptance import CHECKS, DEFAULT_SEED


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, acceptance_log):
    result = CHECKS[number](seed=DEFAULT_SEED)
    print(result.line())
    for d in result.details:
        print("   ", d)
    acceptance_log.append(result.line())
    assert result.passed, result.line() + "\n" + "\n".join(result.details)
