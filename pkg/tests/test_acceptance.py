"""Acceptance criteria; run with ``pytest tests/test_acceptance.py -s`` to see one line per criterion."""
import pytest

from relayqkd.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = CRITERIA[number]()
    print(result.line())
    assert result.passed, result.line()
