import pytest

_results: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    cid, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        verdict = "PASS" if rep.passed else "FAIL"
        _results[cid] = (verdict, title)
        print(f"\nACCEPTANCE {cid}: {verdict} - {title}")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_results, key=lambda c: (int(c.rstrip("*")), c)):
        verdict, title = _results[cid]
        terminalreporter.write_line(f"[{verdict}] criterion {cid}: {title}")
