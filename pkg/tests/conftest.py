import numpy as np
import pytest

from seqembed.graph import Graph


def random_graph(rng: np.random.Generator, n: int, edge_prob: float,
                 weighted: bool = False) -> Graph:
    """Erdos-Renyi helper used by property-style tests."""
    g = Graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                w = float(rng.uniform(0.1, 2.0)) if weighted else 1.0
                g.add_edge(u, v, w)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
