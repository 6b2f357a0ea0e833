import sys
from pathlib import Path

import pytest

from hoinfo.dist import SystemShape
from hoinfo.models import gen_random

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def record(request):
    """Log one PASS/FAIL line for the terminal summary, then assert."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def _record(label, ok, detail=""):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
        assert ok, f"{label}: {detail}"

    return _record


def random_dists(k, seed0=1000, target=False, ns=(3, 4, 5), cards=(2, 3)):
    out = []
    for i in range(k):
        n = ns[i % len(ns)]
        c = cards[(i // len(ns)) % len(cards)]
        out.append(gen_random(SystemShape.from_cards([c] * n, target=target), seed0 + i))
    return out


@pytest.fixture(scope="session")
def corpus():
    return random_dists(60)


@pytest.fixture(scope="session")
def corpus_with_target():
    return random_dists(60, seed0=5000, target=True)
