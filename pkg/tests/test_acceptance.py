"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test prints one PASS/FAIL line; the lines are repeated in the terminal
summary (see conftest.py).
"""

from __future__ import annotations

import json

import pytest

from quasitree import acceptance

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number):
    result = getattr(acceptance, f"criterion_{number}")()
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, json.dumps(result.detail, indent=1, default=str)[:4000]
