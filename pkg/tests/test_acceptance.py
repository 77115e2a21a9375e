"""Full-profile acceptance run: one pass/fail line per criterion.

Select with ``pytest -m acceptance -s``. Worker count comes from
``LAPSPEC_THREADS`` (default 0, meaning every core).
"""
import os

import pytest

from lapspec.verify import CRITERIA, run_criterion

THREADS = int(os.environ.get("LAPSPEC_THREADS", "0"))

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number, "full", threads=THREADS)
    with capsys.disabled():
        print("\n" + res.line())
        for key, value in res.extra.items():
            if key == "components":
                for line in value:
                    print(f"    {line}")
            else:
                print(f"    {key}: {value}")
    assert res.passed, res.report.summary()
