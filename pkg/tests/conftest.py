import pytest

# criterion id -> (description, outcome, seconds)
ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    cid, text = mark.args
    prev = ACCEPTANCE.get(cid, (text, "passed", 0.0))
    state = prev[1]
    if rep.failed:
        state = "failed"
    elif rep.skipped and state == "passed":
        state = "skipped"
    ACCEPTANCE[cid] = (text, state, prev[2] + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        text, state, secs = ACCEPTANCE[cid]
        tag = {"passed": "PASS", "failed": "FAIL"}.get(state, "SKIP")
        tr.write_line(f"[{tag}] criterion {cid}: {text} ({secs:.2f} s)")
