"""Acceptance gate: every bundled criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail
line per criterion with the measured margins. The same scenarios back
the `trapnls verify` command.
"""

import pytest

from trapnls.catalog import CATALOG


@pytest.fixture(scope="module")
def output_root(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance"))


@pytest.mark.parametrize("name", list(CATALOG))
def test_acceptance_criterion(name, output_root):
    result = CATALOG[name](output_root)
    print(result.summary_line())
    assert result.passed, result.summary_line()
