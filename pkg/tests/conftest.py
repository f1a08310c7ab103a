import numpy as np
import pytest

from fuzzclust import build_similarity, parse_edge_list

# the 7-node, 8-edge example graph (1-based ids as printed)
SEVEN_NODE_EDGES = [(1, 2), (2, 3), (2, 4), (3, 4), (4, 5), (4, 6), (5, 6), (6, 7)]

SEVEN_NODE_S = np.array([
    [1, 1, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0],
    [0, 1, 1, 1, 1, 1, 0],
    [0, 0, 0, 1, 1, 1, 0],
    [0, 0, 0, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 1, 1],
], dtype=float)

# reference memberships of the three 7-node scenarios, rounded to 4 decimals
X1_REF = np.array([
    [0.8835, 1.0, 0.9096, 0.5202, 0.1163, 0.0, 0.0906],
    [0.1165, 0.0, 0.0904, 0.4798, 0.8837, 1.0, 0.9094],
])
X2_REF = np.array([
    [0.1308, 0.6435, 0.8692, 1.0, 0.8692, 0.6435, 0.1308],
    [0.8692, 0.3565, 0.1308, 0.0, 0.1308, 0.3565, 0.8692],
])
X3_REF = np.full((2, 7), 0.5)


def seven_node_text():
    return "".join(f"{u} {v}\n" for u, v in SEVEN_NODE_EDGES)


def random_symmetric(rng, n, density=0.1, weighted=False):
    A = (rng.uniform(size=(n, n)) < density).astype(float)
    if weighted:
        A *= rng.uniform(0.1, 2.0, size=(n, n))
    A = np.triu(A, 1)
    A = A + A.T
    np.fill_diagonal(A, 1.0)
    return A


def random_membership(rng, C, N):
    X = rng.dirichlet(np.ones(C), size=N).T
    return np.ascontiguousarray(X)


@pytest.fixture
def seven_graph():
    g, _ = parse_edge_list(seven_node_text().splitlines())
    return g


@pytest.fixture
def seven_S(seven_graph):
    return build_similarity(seven_graph)


@pytest.fixture
def seven_file(tmp_path):
    p = tmp_path / "seven.txt"
    p.write_text(seven_node_text())
    return p


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
