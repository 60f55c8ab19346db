"""Shared fixtures and the per-criterion acceptance summary."""

import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for one acceptance criterion.

    Several checks may report under the same name; the criterion passes only
    if all of them do. The return value is the verdict of this check. The
    line is printed immediately (visible with ``-s``) and repeated in the
    terminal summary so it survives output capture.
    """

    def record(name: str, ok: bool, detail: str = ""):
        prev = _ACCEPTANCE.get(name)
        if prev is None:
            _ACCEPTANCE[name] = (ok, detail)
        else:
            _ACCEPTANCE[name] = (ok and prev[0], f"{prev[1]}; {detail}")
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[1])):
        ok, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
