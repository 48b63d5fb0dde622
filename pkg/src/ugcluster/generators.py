"""Synthetic uncertain graphs for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .graph import UncertainGraph


def _check_p(p):
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"edge probability {p} outside (0, 1]")


def path(n: int, p: float = 0.5) -> UncertainGraph:
    if n < 1:
        raise ParameterError("n must be positive")
    _check_p(p)
    return UncertainGraph(n, tuple((i, i + 1, p) for i in range(1, n)))


def cycle(n: int, p: float = 0.5) -> UncertainGraph:
    if n < 3:
        raise ParameterError("a cycle needs n >= 3")
    _check_p(p)
    return UncertainGraph(n, tuple((i, i + 1, p) for i in range(1, n)) + ((1, n, p),))


def grid(rows: int, cols: int, p: float = 0.5) -> UncertainGraph:
    if rows < 1 or cols < 1:
        raise ParameterError("grid dimensions must be positive")
    _check_p(p)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c + 1
            if c + 1 < cols:
                edges.append((v, v + 1, p))
            if r + 1 < rows:
                edges.append((v, v + cols, p))
    return UncertainGraph(rows * cols, tuple(edges))


def erdos_renyi(n: int, density: float, pmin: float = 0.1, pmax: float = 0.9, seed: int = 0) -> UncertainGraph:
    """G(n, density) with edge probabilities uniform on [pmin, pmax].

    Probabilities are rounded to 6 decimals so the edge-list text is short
    and round-trips exactly.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    if not (0.0 <= density <= 1.0):
        raise ParameterError("density must lie in [0, 1]")
    if not (0.0 < pmin <= pmax <= 1.0):
        raise ParameterError("need 0 < pmin <= pmax <= 1")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < density:
                p = max(1e-6, round(float(rng.uniform(pmin, pmax)), 6))
                edges.append((u, v, min(p, 1.0)))
    return UncertainGraph(n, tuple(edges))


def random_graph(rng: np.random.Generator, n: int, m: int, pmin: float = 0.05, pmax: float = 1.0, connected=False) -> UncertainGraph:
    """``m`` distinct edges on ``n`` nodes; optionally a random spanning tree first."""
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    m = min(m, len(pairs))
    chosen: list[tuple[int, int]] = []
    if connected and n > 1:
        order = rng.permutation(n) + 1
        for i in range(1, n):
            a, b = int(order[i]), int(order[rng.integers(0, i)])
            chosen.append((min(a, b), max(a, b)))
    rest = [pr for pr in pairs if pr not in set(chosen)]
    extra = max(0, m - len(chosen))
    idx = rng.choice(len(rest), size=min(extra, len(rest)), replace=False) if extra else []
    chosen += [rest[i] for i in idx]
    return UncertainGraph(n, tuple((u, v, float(rng.uniform(pmin, pmax))) for u, v in chosen))


MODELS = {
    "path": path,
    "cycle": cycle,
    "grid": grid,
    "erdos-renyi-probabilistic": erdos_renyi,
}
