"""One test per acceptance criterion; each records its PASS/FAIL line for the summary."""

import pytest

from conftest import ACCEPTANCE_LINES
from mchcasimir.acceptance import CHECKS


@pytest.mark.parametrize("fn", [c[2] for c in CHECKS], ids=[f"criterion_{c[0]}_{c[1]}" for c in CHECKS])
def test_criterion(fn):
    res = fn()
    ACCEPTANCE_LINES.append(res.line())
    print(res.line())
    assert res.passed, res.line()
