import numpy as np
import pytest

from topiclink.corpus import corpus_from_records

# TINY: a={1,2}, b={1..4}, c={1..6}, d={3,5}, e={1,2,3}
TINY_TAGS = {
    "a": [1, 2],
    "b": [1, 2, 3, 4],
    "c": [1, 2, 3, 4, 5, 6],
    "d": [3, 5],
    "e": [1, 2, 3],
}


def tiny_records(drop=()):
    recs = []
    for tag, users in TINY_TAGS.items():
        if tag in drop:
            continue
        for t, u in enumerate(users):
            recs.append((tag, str(u), 100 + t))
    return recs


@pytest.fixture
def tiny():
    return corpus_from_records(tiny_records())


@pytest.fixture
def tiny_no_e():
    return corpus_from_records(tiny_records(drop=("e",)))


def random_corpus(rng, n_users, n_tags, p_tag=0.2, p_edge=0.1, max_weight=1):
    """Small random corpus; every user gets at least one hashtag."""
    adoptions = []
    for u in range(n_users):
        tags = np.flatnonzero(rng.random(n_tags) < p_tag)
        if tags.size == 0:
            tags = [int(rng.integers(n_tags))]
        for h in tags:
            adoptions.append((f"h{h}", str(u), int(rng.integers(0, 1000))))
    edges = []
    for u in range(n_users):
        for v in range(n_users):
            if u != v and rng.random() < p_edge:
                edges.append((str(u), str(v), int(rng.integers(1, max_weight + 1))))
    return corpus_from_records(adoptions, edges)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
