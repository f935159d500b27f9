import mpmath as mp
import pytest


@pytest.fixture(autouse=True)
def _mp_precision():
    # comparisons of 256-bit results must not round to doubles
    old = mp.mp.prec
    mp.mp.prec = 256
    yield
    mp.mp.prec = old


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        mark = _CRITERIA.get(report.nodeid)
        if mark is not None:
            mark["outcome"] = report.outcome


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = {"n": m.args[0], "title": m.args[1], "outcome": "not run"}


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_CRITERIA.values(), key=lambda r: r["n"]):
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(rec["outcome"], rec["outcome"].upper())
        terminalreporter.write_line(f"criterion {rec['n']:2d}  {verdict:7s} {rec['title']}")
