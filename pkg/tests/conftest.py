import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_OUTCOMES: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _OUTCOMES[mark.args[0]].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        failed = [name for name, o in results if o == "failed"]
        skipped = [name for name, o in results if o == "skipped"]
        verdict = "FAIL" if failed else ("PASS" if len(skipped) < len(results) else "SKIP")
        line = f"criterion {n}: {verdict} ({len(results) - len(failed) - len(skipped)}/{len(results)} passed"
        line += f", {len(skipped)} skipped)" if skipped else ")"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
