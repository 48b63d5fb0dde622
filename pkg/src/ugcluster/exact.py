"""Exact connection probabilities by enumerating edge subsets.

Only feasible for small graphs; the enumeration is restricted to the
uncertain edges (p < 1) of the component holding the queried nodes, so the
cap applies to that count rather than to ``m``.
"""
from __future__ import annotations

import itertools
import math
import os
import threading

import numpy as np

from .errors import CapExceededError, ParameterError
from .graph import ConnectivityTable, UncertainGraph
from .sampling import component_labels

DEFAULT_EDGE_CAP = 24
DEFAULT_SUBSET_CAP = 2_000_000
CHUNK_BITS = 16
TIE_TOL = 1e-12


def default_edge_cap() -> int:
    return int(os.environ.get("UGCLUSTER_EXACT_CAP", DEFAULT_EDGE_CAP))


def _component_edges(g: UncertainGraph, comp: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    us, vs, ps = g.edge_arrays
    inside = np.isin(us, comp)
    local = np.full(g.n, -1, dtype=np.int64)
    local[comp] = np.arange(len(comp))
    return local[us[inside]], local[vs[inside]], ps[inside]


def _worlds(us, vs, ps, nc, cap):
    """Yield ``(labels, probs)`` chunks covering every world of a component."""
    certain = ps >= 1.0
    unc = np.flatnonzero(~certain)
    mu = len(unc)
    if mu > cap:
        raise CapExceededError(
            f"exact enumeration needs 2^{mu} worlds (cap 2^{cap}); use sampling instead"
        )
    total = 1 << mu
    step = 1 << min(mu, CHUNK_BITS)
    bits = np.arange(mu, dtype=np.int64)
    pu = ps[unc]
    for start in range(0, total, step):
        masks = np.arange(start, start + step, dtype=np.int64)
        on = ((masks[:, None] >> bits[None, :]) & 1).astype(bool)
        present = np.empty((step, len(ps)), dtype=bool)
        present[:, certain] = True
        present[:, unc] = on
        factors = np.where(on, pu[None, :], 1.0 - pu[None, :])
        # sorting makes the product independent of edge order
        probs = np.prod(np.sort(factors, axis=1), axis=1) if mu else np.ones(step)
        yield component_labels(nc, us, vs, present), probs


def _pair_probs(g: UncertainGraph, comp: np.ndarray, pairs, cap) -> dict:
    us, vs, ps = _component_edges(g, comp)
    local = {int(x): i for i, x in enumerate(comp)}
    parts: dict = {pr: [] for pr in pairs}
    for labels, probs in _worlds(us, vs, ps, len(comp), cap):
        for a, b in pairs:
            sel = labels[:, local[a]] == labels[:, local[b]]
            parts[(a, b)].append(math.fsum(probs[sel].tolist()))
    return {pr: min(1.0, math.fsum(v)) for pr, v in parts.items()}


def exact_pr_connect(g: UncertainGraph, u: int, v: int, cap: int | None = None) -> float:
    """Probability that ``u`` and ``v`` are connected, by full enumeration."""
    cap = default_edge_cap() if cap is None else cap
    if not (1 <= u <= g.n and 1 <= v <= g.n):
        raise ParameterError("node id out of range")
    if u == v:
        return 1.0
    comps = g.components
    if comps[u - 1] != comps[v - 1]:
        return 0.0
    comp = np.flatnonzero(comps == comps[u - 1])
    return _pair_probs(g, comp, [(u - 1, v - 1)], cap)[(u - 1, v - 1)]


class ExactOracle:
    """All-pairs exact connectivity, filled on first use."""

    def __init__(self, graph: UncertainGraph, cap: int | None = None):
        self.graph = graph
        self.cap = default_edge_cap() if cap is None else cap
        self._table: ConnectivityTable | None = None
        self._lock = threading.Lock()

    def table(self) -> ConnectivityTable:
        with self._lock:
            if self._table is None:
                self._table = self._compute()
        return self._table

    def pr(self, u: int, v: int) -> float:
        return self.table().lookup(u, v)

    def _compute(self) -> ConnectivityTable:
        g = self.graph
        out = np.eye(g.n)
        comps = g.components
        for lab in np.unique(comps):
            comp = np.flatnonzero(comps == lab)
            if len(comp) < 2:
                continue
            pairs = [(int(a), int(b)) for a, b in itertools.combinations(comp, 2)]
            for (a, b), p in _pair_probs(g, comp, pairs, self.cap).items():
                out[a, b] = out[b, a] = p
        return ConnectivityTable(out, "exact", 1)


def exact_table(g: UncertainGraph, cap: int | None = None) -> ConnectivityTable:
    return ExactOracle(g, cap).table()


def _as_table(g, table):
    if table is None:
        return exact_table(g)
    if isinstance(table, ExactOracle):
        return table.table()
    return table


def _brute_force(g, k, table, score, cap):
    if not (1 <= k <= g.n):
        raise ParameterError("need 1 <= k <= n")
    count = math.comb(g.n, k)
    if count > cap:
        raise CapExceededError(f"C({g.n},{k}) = {count} subsets exceeds cap {cap}")
    probs = _as_table(g, table).probs
    best_c, best_v = None, -math.inf
    # lexicographic order: a later subset must win by more than the tolerance
    for combo in itertools.combinations(range(g.n), k):
        val = score(probs[list(combo)].max(axis=0))
        if val > best_v + TIE_TOL:
            best_c, best_v = combo, val
    return tuple(c + 1 for c in best_c), best_v


def brute_force_kmedian(g: UncertainGraph, k: int, table=None, cap: int = DEFAULT_SUBSET_CAP):
    """Optimal k-median centers and value by exhausting all k-subsets."""
    return _brute_force(g, k, table, lambda best: math.fsum(best.tolist()) / g.n, cap)


def brute_force_kcenter(g: UncertainGraph, k: int, table=None, cap: int = DEFAULT_SUBSET_CAP):
    """Optimal k-center centers and value by exhausting all k-subsets."""
    return _brute_force(g, k, table, lambda best: float(best.min()), cap)
