import pathlib

import pytest

from cudfmoo.mooml.parser import parse_program
from cudfmoo.text import load_document

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "cudfmoo" / "data"

# criterion number -> (title, outcome); filled by test_acceptance.py
ACCEPTANCE = {}


def data_path(name: str) -> pathlib.Path:
    return DATA / name


def program_text(name: str) -> str:
    return (DATA / (name if name.endswith(".moo") else name + ".moo")).read_text(encoding="utf-8")


def load_program(name: str):
    return parse_program(program_text(name))


def load_doc(name: str):
    return load_document(DATA / (name if name.endswith(".cudf") else name + ".cudf"))


@pytest.fixture
def sample_doc():
    return load_doc("sample.cudf")


def pytest_runtest_logreport(report):
    criterion = getattr(report, "criterion", None)
    if criterion is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            outcome = "XFAIL" if report.outcome == "skipped" else "XPASS"
        else:
            outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        ACCEPTANCE[criterion] = (report.criterion_title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args[0]
        report.criterion_title = marker.args[1]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=str):
        title, outcome = ACCEPTANCE[key]
        terminalreporter.write_line(f"{outcome:5}  criterion {key}: {title}")
