"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    if hasattr(rep, "wasxfail"):
        status = "XFAIL" if rep.skipped else "XPASS"
        detail = f"{detail} [{rep.wasxfail}]" if detail else rep.wasxfail
    else:
        status = "PASS" if rep.passed else "FAIL"
    _results.setdefault(mark.args[0], []).append((item.name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        for name, status, detail in _results[n]:
            terminalreporter.write_line(f"criterion {n:2d}  {status:5s}  {name}: {detail}")
