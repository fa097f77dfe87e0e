import string

import pytest

from morphlex.core import AlphabetConfig


@pytest.fixture
def latin_cfg():
    return AlphabetConfig(frozenset(string.ascii_lowercase + "äöšž"), support_m=0)


def write(tmp_path, name, text, encoding="utf-8"):
    path = tmp_path / name
    path.write_bytes(text.encode(encoding) if isinstance(text, str) else text)
    return path


# -- acceptance summary -------------------------------------------------------
# Tests marked ``criterion("A<n>")`` are tallied; the terminal summary prints
# one PASS/FAIL line per criterion (a criterion fails if any of its tests do).

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    name, title = marker.args
    ok, detail = _CRITERIA.get(name, (True, title))
    _CRITERIA[name] = (ok and rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n[1:])):
        ok, title = _CRITERIA[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {title}")
