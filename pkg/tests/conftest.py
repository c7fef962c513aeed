import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "setup" and call.excinfo is not None:
        _criteria.append((marker.args[0], "FAIL", "setup error"))
    elif call.when == "call":
        name = marker.args[0]
        detail = getattr(item.module, "DETAILS", {}).get(name, "")
        if call.excinfo is not None:
            reason = call.excinfo.exconly().splitlines()[0][:160]
            detail = f"{detail} ({reason})" if detail else reason
        _criteria.append((name, "PASS" if call.excinfo is None else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _criteria:
        line = f"{status} {name}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
