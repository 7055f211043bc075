"""Shared fixtures and the acceptance-summary terminal hook."""
import numpy as np
import pytest


def pytest_configure(config):
    config._acceptance_results = []


@pytest.fixture
def acceptance_log(request):
    """Append (number, title, detail) tuples; PASS/FAIL comes from the test outcome."""
    results = request.config._acceptance_results
    entries = []

    def log(number, title, detail=""):
        entry = {"number": number, "title": title, "detail": detail,
                 "nodeid": request.node.nodeid}
        entries.append(entry)
        results.append(entry)

    yield log


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    results = getattr(item.config, "_acceptance_results", [])
    for entry in results:
        if entry["nodeid"] == item.nodeid and "passed" not in entry:
            entry["passed"] = call.excinfo is None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(results, key=lambda e: e["number"]):
        status = "PASS" if entry.get("passed") else "FAIL"
        line = f"criterion {entry['number']:>2}: {status}  {entry['title']}"
        if entry["detail"]:
            line += f"  [{entry['detail']}]"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture
def chain_file(tmp_path):
    """Write rows to a CSV file, return its path."""

    def write(rows, name="chain.csv", header=None, raw=None):
        path = tmp_path / name
        if raw is not None:
            path.write_text(raw)
            return str(path)
        lines = []
        if header:
            lines.append(header)
        for row in np.atleast_2d(np.asarray(rows, dtype=float)):
            lines.append(",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    return write
