import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


class _Recorder:
    def __call__(self, criterion: int, passed: bool, detail: str):
        _RESULTS[criterion] = (bool(passed), detail)
        return passed


@pytest.fixture
def record():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
