import pytest

# criterion number -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def record(request):
    """Record one acceptance line: ``record(number, passed, detail)``."""
    results = request.config.stash[ACCEPTANCE]

    def put(number: int, passed: bool, detail: str) -> bool:
        # a criterion checked by several tests passes only if every part does
        if number in results:
            before, text = results[number]
            passed, detail = before and passed, f"{text}; {detail}"
        results[number] = (bool(passed), detail)
        return bool(passed)

    return put


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
