import random

import pytest

from itervote.domain import IssueDomain, PreferenceProfile, Ranking

# Acceptance tests append "criterion N: PASS|FAIL ..." lines here; they are
# echoed in the terminal summary so they show up even when output is captured.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_ranking(domain: IssueDomain, rng: random.Random) -> Ranking:
    order = list(range(domain.size))
    rng.shuffle(order)
    return Ranking(domain, tuple(order))


def random_profile(n: int, domain: IssueDomain, rng: random.Random) -> PreferenceProfile:
    return PreferenceProfile(domain, tuple(random_ranking(domain, rng) for _ in range(n)))


def random_votes(n: int, domain: IssueDomain, rng: random.Random):
    return tuple(tuple(rng.randrange(s) for s in domain.sizes) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(12345)
