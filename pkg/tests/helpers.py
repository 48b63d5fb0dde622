"""Shared fixture graphs for the test suite."""
from __future__ import annotations

import functools
import math

import networkx as nx
import numpy as np

from ugcluster import UncertainGraph, exact_table, parse_graph
from ugcluster.generators import random_graph

G1 = parse_graph("2 1\n1 2 0.5\n")
G2 = parse_graph("3 2\n1 2 0.5\n2 3 0.5\n")
G3 = parse_graph("3 3\n1 2 0.5\n2 3 0.5\n1 3 0.5\n")


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


@functools.lru_cache(maxsize=None)
def atlas_fixtures(max_n: int = 6) -> tuple[UncertainGraph, ...]:
    """Every connected simple graph on 1..max_n nodes with seeded edge probabilities."""
    out = []
    for idx, h in enumerate(nx.graph_atlas_g()):
        n = h.number_of_nodes()
        if n == 0 or n > max_n or not nx.is_connected(h):
            continue
        rng = np.random.default_rng(idx)
        edges = tuple((u + 1, v + 1, round(float(rng.uniform(0.1, 0.95)), 3)) for u, v in sorted(h.edges()))
        out.append(UncertainGraph(n, edges))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def table_of(g: UncertainGraph):
    return exact_table(g)


def small_random_graphs(count: int, seed: int, max_n: int = 8, max_m: int = 12, connected=False):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(1, min(max_m, n * (n - 1) // 2) + 1))
        out.append(random_graph(rng, n, m, connected=connected))
    return out
