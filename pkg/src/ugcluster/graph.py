"""Uncertain graphs, clusterings and the objectives evaluated on them.

Nodes are exposed as 1-based integer IDs. Internally every array is
indexed from 0, so node ``v`` lives at position ``v - 1``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import GraphFormatError, ParameterError


@dataclass(frozen=True)
class UncertainGraph:
    """Undirected graph whose edges exist independently with probability ``p``.

    ``edges`` holds ``(u, v, p)`` triples with ``u < v``, sorted.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError("graph needs at least one node")
        seen = set()
        canon = []
        for u, v, p in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}")
            if u > v:
                u, v = v, u
            if u < 1 or v > self.n:
                raise GraphFormatError(f"node id out of range in edge ({u}, {v})")
            if not (0.0 < p <= 1.0):
                raise GraphFormatError(f"probability {p} out of range (0, 1]")
            if (u, v) in seen:
                raise GraphFormatError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            canon.append((u, v, float(p)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-based endpoint arrays and the probability array."""
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), np.zeros(0)
        us, vs, ps = zip(*self.edges)
        return (
            np.asarray(us, dtype=np.int64) - 1,
            np.asarray(vs, dtype=np.int64) - 1,
            np.asarray(ps, dtype=float),
        )

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Per-node tuple of incident edge indices (index 0 is node 1)."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, v, _) in enumerate(self.edges):
            inc[u - 1].append(i)
            inc[v - 1].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def components(self) -> np.ndarray:
        """Connected component label per node of the fully-realised graph."""
        from .sampling import component_labels

        present = np.ones((1, self.m), dtype=bool)
        return component_labels(self.n, self.edge_arrays[0], self.edge_arrays[1], present)[0]

    @property
    def log_edge_product(self) -> float:
        """ln of the product of all edge probabilities."""
        return math.fsum(math.log(p) for _, _, p in self.edges)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines += [f"{u} {v} {p!r}" for u, v, p in self.edges]
        return "\n".join(lines) + "\n"

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def relabel(self, perm: Mapping[int, int]) -> "UncertainGraph":
        """Copy of the graph with node ``v`` renamed to ``perm[v]``."""
        return UncertainGraph(self.n, tuple((perm[u], perm[v], p) for u, v, p in self.edges))


def parse_graph(text: str) -> UncertainGraph:
    """Parse the ``n m`` / ``u v p`` edge-list format.

    Blank lines and lines starting with ``#`` are ignored. Errors report the
    offending line number.
    """
    header = None
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise GraphFormatError("header must be 'n m'", lineno)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise GraphFormatError("header must hold two integers", lineno) from None
            if header[0] < 1 or header[1] < 0:
                raise GraphFormatError("header counts out of range", lineno)
            continue
        if len(parts) != 3:
            raise GraphFormatError("edge line must be 'u v p'", lineno)
        try:
            u, v, p = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphFormatError("malformed edge line", lineno) from None
        n = header[0]
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"node id out of range [1, {n}]", lineno)
        if u == v:
            raise GraphFormatError("self-loop edges are not supported", lineno)
        if not (0.0 < p <= 1.0) or math.isnan(p):
            raise GraphFormatError(f"probability {parts[2]} out of range (0, 1]", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((key[0], key[1], p))
    if header is None:
        raise GraphFormatError("empty document")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    return UncertainGraph(header[0], tuple(edges))


@dataclass(frozen=True)
class ConnectivityTable:
    """All-pairs connection probabilities, exact or estimated.

    ``weights`` is the matrix algorithms compare on. For estimated tables it
    holds integer co-occurrence counts and ``scale`` is the sample count, so
    ties between candidates are exact; probabilities are ``weights / scale``.
    """

    weights: np.ndarray
    source: str = "exact"
    scale: int = 1

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("connectivity table must be square")
        w.setflags(write=False)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def samples(self) -> int | None:
        return self.scale if self.source == "estimated" else None

    @cached_property
    def probs(self) -> np.ndarray:
        p = self.weights / self.scale if self.scale != 1 else self.weights.astype(float)
        p.setflags(write=False)
        return p

    def lookup(self, u: int, v: int) -> float:
        return float(self.probs[u - 1, v - 1])

    @classmethod
    def from_probs(cls, probs) -> "ConnectivityTable":
        return cls(np.array(probs, dtype=float), "exact", 1)

    def to_pairs(self) -> list[list]:
        n = self.n
        return [[u, v, float(self.probs[u - 1, v - 1])] for u in range(1, n + 1) for v in range(u + 1, n + 1)]


@dataclass(frozen=True)
class ClusteringSignature:
    """A clustering given by its member -> center map.

    ``assignment[v]`` is the center of the cluster holding ``v``; the set of
    links is ``{(assignment[v], v)}``.
    """

    centers: tuple[int, ...]
    assignment: Mapping[int, int] = field(hash=False)

    def __post_init__(self):
        centers = tuple(sorted(set(self.centers)))
        object.__setattr__(self, "centers", centers)
        if not centers:
            raise ParameterError("a clustering needs at least one center")
        members = sorted(self.assignment)
        if members != list(range(1, len(members) + 1)):
            raise ParameterError("members must be exactly the nodes 1..n")
        cset = set(centers)
        for v, c in self.assignment.items():
            if c not in cset:
                raise ParameterError(f"node {v} linked to non-center {c}")
        for c in centers:
            if self.assignment.get(c) != c:
                raise ParameterError(f"center {c} is not in its own cluster")

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def links(self) -> list[tuple[int, int]]:
        return [(self.assignment[v], v) for v in range(1, self.n + 1)]

    def clusters(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {c: [] for c in self.centers}
        for v in range(1, self.n + 1):
            out[self.assignment[v]].append(v)
        return out

    def to_dict(self, table: ConnectivityTable | None = None) -> dict:
        d = {
            "centers": list(self.centers),
            "assignment": {str(v): self.assignment[v] for v in range(1, self.n + 1)},
        }
        if table is not None:
            d["km"] = km_value(table, self)
            d["kc"] = kc_value(table, self)
        return d


def _link_probs(table: ConnectivityTable, sig: ClusteringSignature) -> np.ndarray:
    if sig.n != table.n:
        raise ParameterError(f"signature covers {sig.n} nodes, table has {table.n}")
    idx = np.arange(sig.n)
    cen = np.array([sig.assignment[v] for v in range(1, sig.n + 1)]) - 1
    return table.probs[cen, idx]


def km_value(table: ConnectivityTable, sig: ClusteringSignature) -> float:
    """Mean connection probability over the links of ``sig``."""
    return math.fsum(_link_probs(table, sig).tolist()) / sig.n


def kc_value(table: ConnectivityTable, sig: ClusteringSignature) -> float:
    """Smallest connection probability over the links of ``sig``."""
    return float(_link_probs(table, sig).min())


def assign_clusters(table: ConnectivityTable, centers: Iterable[int]) -> ClusteringSignature:
    """Link every node to its best-connected center.

    Ties go to the smallest center ID, and centers always keep themselves.
    """
    cs = sorted(set(int(c) for c in centers))
    if not cs:
        raise ParameterError("center set is empty")
    n = table.n
    if cs[0] < 1 or cs[-1] > n:
        raise ParameterError("center outside the node range")
    rows = table.weights[np.asarray(cs) - 1]
    # argmax returns the first maximum, i.e. the smallest center id
    best = np.argmax(rows, axis=0)
    assignment = {v: cs[int(best[v - 1])] for v in range(1, n + 1)}
    for c in cs:
        assignment[c] = c
    return ClusteringSignature(tuple(cs), assignment)


def coverage(table: ConnectivityTable, centers: Iterable[int]) -> float:
    """Sum over nodes of the best connection probability to ``centers``."""
    cs = np.asarray(sorted(set(centers))) - 1
    best = table.probs[cs].max(axis=0)
    return math.fsum(best.tolist())
