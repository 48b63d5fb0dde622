"""Greedy and lazy-greedy maximisation of monotone submodular set functions.

Objectives are small stateful objects holding the current selection: ``gain(u)``
returns the marginal gain of ``u`` and ``add(u)`` commits it. Every call to
``gain`` counts as one evaluation.

Integer weight matrices (sample co-occurrence counts) give exact gains. Float
sums go through ``math.fsum``, which is correctly rounded and therefore
independent of summation order, so equal gains compare equal and ties fall
to the smallest node ID everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import ParameterError


def _total(arr: np.ndarray):
    if arr.dtype.kind in "iu":
        return int(arr.sum())
    return math.fsum(arr.tolist())


class Objective:
    evaluations = 0

    def __init__(self, n: int):
        self.n = n
        self.selected: list[int] = []

    def gain(self, u: int):
        raise NotImplementedError

    def add(self, u: int) -> None:
        self.selected.append(u)

    @property
    def value(self):
        raise NotImplementedError


class CoverageObjective(Objective):
    """``g(C) = sum_v max_{c in C} weights[c, v]`` (the k-median objective)."""

    def __init__(self, weights: np.ndarray):
        super().__init__(weights.shape[0])
        self.weights = weights
        self.best = np.zeros(self.n, dtype=weights.dtype)
        self.evaluations = 0

    def gain(self, u: int):
        self.evaluations += 1
        return _total(np.maximum(self.weights[u - 1] - self.best, 0))

    def add(self, u: int) -> None:
        super().add(u)
        np.maximum(self.best, self.weights[u - 1], out=self.best)

    @property
    def value(self):
        return _total(self.best)


class ThresholdObjective(Objective):
    """``g(C) = sum_v min(cap, max_{c in C} weights[c, v])``.

    With ``cap = q`` (or ``q * |R|`` on counts) this is the potential used by
    the bi-criteria k-center search.
    """

    def __init__(self, weights: np.ndarray, cap: float):
        super().__init__(weights.shape[0])
        self.weights = weights
        self.cap = float(cap)
        self.best = np.zeros(self.n, dtype=float)
        self.evaluations = 0

    def gain(self, u: int):
        self.evaluations += 1
        row = self.weights[u - 1]
        mask = row > self.best
        if not mask.any():
            return 0.0
        old = np.minimum(self.cap, self.best[mask])
        new = np.minimum(self.cap, row[mask].astype(float))
        return math.fsum((new - old).tolist())

    def add(self, u: int) -> None:
        super().add(u)
        np.maximum(self.best, self.weights[u - 1], out=self.best)

    @property
    def value(self):
        return math.fsum(np.minimum(self.cap, self.best).tolist())


class SetFunctionObjective(Objective):
    """Adapter for an arbitrary set function ``g(frozenset) -> float``."""

    def __init__(self, fn: Callable[[frozenset], float], n: int = 0):
        super().__init__(n)
        self.fn = fn
        self.evaluations = 0
        self._current = fn(frozenset())

    def gain(self, u: int):
        self.evaluations += 1
        return self.fn(frozenset(self.selected) | {u}) - self._current

    def add(self, u: int) -> None:
        super().add(u)
        self._current = self.fn(frozenset(self.selected))

    @property
    def value(self):
        return self._current


def best_candidate(candidates: Iterable[int], g: Objective) -> tuple[int, float]:
    """Full scan for the largest marginal gain; smallest ID wins ties."""
    best_u, best_gain = None, None
    for u in sorted(candidates):
        x = g.gain(u)
        if best_gain is None or x > best_gain:
            best_u, best_gain = u, x
    if best_u is None:
        raise ParameterError("no candidates left")
    return best_u, best_gain


def greedy(universe: Iterable[int], k: int, g) -> list[int]:
    """Pick ``k`` elements by steepest marginal gain, in selection order.

    ``g`` is an :class:`Objective` or a plain set function.
    """
    universe = sorted(set(universe))
    if k > len(universe):
        raise ParameterError(f"k={k} exceeds universe size {len(universe)}")
    if not isinstance(g, Objective):
        g = SetFunctionObjective(g)
    remaining = set(universe)
    picked = []
    while len(picked) < k:
        u, _ = best_candidate(remaining, g)
        g.add(u)
        remaining.discard(u)
        picked.append(u)
    return picked


@dataclass
class LazyState:
    """Candidates ordered by a cached upper bound on their marginal gain."""

    order: list[int]
    ub: dict[int, float]
    objective: Objective
    evaluations: int = 0
    refreshes: list[int] = field(default_factory=list)

    @property
    def selected(self) -> list[int]:
        return self.objective.selected

    def key(self, v: int):
        return (-self.ub[v], v)


def _lazy_state(ub: np.ndarray, objective: Objective) -> LazyState:
    ubd = {v: ub[v - 1].item() for v in range(1, len(ub) + 1)}
    order = sorted(ubd, key=lambda v: (-ubd[v], v))
    return LazyState(order, ubd, objective)


def get_next_node(state: LazyState) -> tuple[int, LazyState]:
    """Pop the candidate with the largest true marginal gain.

    Walks down the list refreshing bounds until a refreshed node still beats
    the cached bound of its successor, then re-sorts. If a stale node ends up
    on top (possible only through the ID tie-break) the walk repeats, so the
    result always equals a full scan with smallest-ID tie-breaking.
    """
    w = state.order
    if not w:
        raise ParameterError("no candidates left")
    fresh: set[int] = set()
    g = state.objective
    before = g.evaluations
    while True:
        for i, node in enumerate(w):
            if node not in fresh:
                state.ub[node] = g.gain(node)
                fresh.add(node)
            if i + 1 == len(w) or state.key(node) < state.key(w[i + 1]):
                break
        w.sort(key=state.key)
        if w[0] in fresh:
            break
    u = w.pop(0)
    g.add(u)
    spent = g.evaluations - before
    state.evaluations += spent
    state.refreshes.append(spent)
    return u, state


def lazy_greedy(state: LazyState, k: int, first: int | None = None) -> list[int]:
    picked = [] if first is None else [first]
    while len(picked) < k and state.order:
        u, state = get_next_node(state)
        picked.append(u)
    return picked


def coverage_first_node(counts: np.ndarray, size_sums: np.ndarray) -> tuple[int, LazyState]:
    """Seed a lazy k-median run from per-node component-size sums.

    ``size_sums[v]`` equals the gain of ``v`` on the empty set, so the head
    is taken without any objective evaluation.
    """
    state = _lazy_state(size_sums, CoverageObjective(counts))
    u = state.order.pop(0)
    state.objective.add(u)
    return u, state


def threshold_first_node(counts: np.ndarray, size_sums: np.ndarray, cap: float) -> tuple[int, LazyState]:
    """Seed a lazy run of the capped potential; size sums are valid upper bounds."""
    state = _lazy_state(size_sums, ThresholdObjective(counts, cap))
    return get_next_node(state)
