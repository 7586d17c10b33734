"""Collects acceptance-criterion outcomes and prints one line per criterion."""

_results: dict[int, tuple[str, list[bool]]] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    failed_setup = call.when == "setup" and call.excinfo is not None
    if call.when != "call" and not failed_setup:
        return
    number, title = mark.args
    _results.setdefault(number, (title, []))[1].append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, outcomes = _results[number]
        verdict = "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}  {verdict}  {title}")
