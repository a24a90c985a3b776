import contextlib

import pytest

_RESULTS_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = {}


class _Record:
    detail = ""


@pytest.fixture
def acceptance(request):
    """Context manager recording one acceptance criterion as PASS or FAIL."""
    results = request.config.stash[_RESULTS_KEY]

    @contextlib.contextmanager
    def run(number: int, title: str):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            results[number] = (False, title, f"{type(exc).__name__}: {exc}".splitlines()[0][:160])
            raise
        results[number] = (True, title, rec.detail)

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS_KEY, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        ok, title, detail = results[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
