"""The nine acceptance criteria; one PASS/FAIL line is printed per criterion."""
import pytest

from takiff.acceptance import CRITERIA, run


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    r = run(number)
    with capsys.disabled():
        print("\n" + r.line())
    failed = [f"{name}: {detail}" for name, ok, detail in r.checks if not ok]
    assert r.passed, "; ".join(failed) or f"took {r.seconds:.1f}s, budget {r.limit}s"
