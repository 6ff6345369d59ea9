import re

import pytest

# criterion label -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")


@pytest.fixture
def record():
    def _record(label: str, ok: bool, detail: str) -> None:
        ACCEPTANCE[label] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
        assert ok, f"criterion {label}: {detail}"

    return _record
