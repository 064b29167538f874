import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bellperm.gates import get_tables  # noqa: E402


@pytest.fixture(scope="session")
def tables():
    return get_tables()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance summary ------------------------------------------------------------------

_ACCEPTANCE: dict[str, list[tuple[str, str]]] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    criterion, title = marker.args
    if call.excinfo is None:
        outcome = "PASS"
    elif item.get_closest_marker("xfail") and not call.excinfo.errisinstance(pytest.skip.Exception):
        outcome = "FAIL (expected)"
    else:
        outcome = "FAIL"
    notes = [str(v) for k, v in item.user_properties if k == "detail"]
    if notes:
        outcome += " (" + ", ".join(notes) + ")"
    _ACCEPTANCE.setdefault(criterion, []).append((title, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=int):
        parts = _ACCEPTANCE[criterion]
        ok = all(outcome.startswith("PASS") for _, outcome in parts)
        detail = "; ".join(f"{title}: {outcome}" for title, outcome in parts)
        tr.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  [{detail}]")
