from __future__ import annotations

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from xenotree import Digraph, TwoStructure
from xenotree.generate import GenSpec, random_tree

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)

ACCEPTANCE_LINES: list[str] = []


@st.composite
def structures(draw, min_n=1, max_n=6, max_labels=3):
    n = draw(st.integers(min_n, max_n))
    k = draw(st.integers(1, max_labels))
    alphabet = tuple(str(i) for i in range(k))
    codes = np.array(
        draw(st.lists(st.integers(0, k - 1), min_size=n * n, max_size=n * n)), dtype=np.int32
    ).reshape(n, n)
    return TwoStructure(tuple(f"v{i}" for i in range(n)), alphabet, codes)


@st.composite
def digraphs(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    adj = np.array(bits, dtype=bool).reshape(n, n)
    return Digraph.from_matrix([f"v{i}" for i in range(n)], adj)


@st.composite
def event_trees(draw, max_leaves=16, max_labels=4):
    spec = GenSpec(
        leaves=draw(st.integers(1, max_leaves)),
        labels=draw(st.integers(1, max_labels)),
        seed=draw(st.integers(0, 2**32 - 1)),
        caterpillar=draw(st.floats(0, 1)),
        symmetric=draw(st.booleans()),
    )
    return random_tree(spec)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
