import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _clear_seed_env(monkeypatch):
    # tests pick their own seeds; a stray env var must not leak in
    monkeypatch.delenv("P2DGL_SEED", raising=False)
    yield


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict_line(request):
    """Record one PASS/FAIL line for the acceptance summary, then assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
