"""Acceptance criteria 1-10, one test each; every test prints its PASS/FAIL line."""
import pytest

from extremal_dare.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
