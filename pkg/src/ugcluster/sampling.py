"""Possible-world sampling and the estimators built on it.

A world is stored only as a component labelling: ``labels[w, i]`` is the
smallest 0-based node index in the component holding node ``i + 1``.
Every estimator reduces to "are these two nodes in the same component".

World ``j`` of stream ``s`` under seed ``seed`` is a fixed function of
``(seed, s, j)``: worlds are generated in blocks of ``BLOCK`` from a
``SeedSequence`` keyed on the block index, so a pool drawn in one call or
in many calls (or in parallel) is identical.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import GraphFormatError, ParameterError
from .graph import ClusteringSignature, ConnectivityTable, UncertainGraph, kc_value, km_value

BLOCK = 1024


def component_labels(n: int, us: np.ndarray, vs: np.ndarray, present: np.ndarray) -> np.ndarray:
    """Canonical component labels for a batch of edge subsets.

    ``present`` is a ``(W, m)`` boolean matrix; returns a ``(W, n)`` int32
    array where each node is labelled by the smallest node index of its
    component in that world.
    """
    present = np.asarray(present, dtype=bool)
    w = present.shape[0]
    if w == 0:
        return np.zeros((0, n), dtype=np.int32)
    if present.shape[1] == 0 or not present.any():
        return np.tile(np.arange(n, dtype=np.int32), (w, 1))
    offs = (np.arange(w, dtype=np.int64) * n)[:, None]
    rows = (offs + us[None, :])[present]
    cols = (offs + vs[None, :])[present]
    size = w * n
    adj = sparse.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    _, lab = connected_components(adj, directed=False)
    _, first = np.unique(lab, return_index=True)
    return (first[lab] % n).reshape(w, n).astype(np.int32)


@dataclass(frozen=True)
class PossibleWorld:
    """One sampled deterministic subgraph, kept as its component labelling."""

    labels: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def component_size(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for lab in self.labels:
            sizes[lab] = sizes.get(lab, 0) + 1
        return sizes

    def connected(self, u: int, v: int) -> bool:
        return self.labels[u - 1] == self.labels[v - 1]


def draw_world(g: UncertainGraph, rng: np.random.Generator) -> PossibleWorld:
    """Keep each edge independently with its probability, in edge order."""
    us, vs, ps = g.edge_arrays
    present = (rng.random(g.m) < ps)[None, :]
    return PossibleWorld(tuple(int(x) for x in component_labels(g.n, us, vs, present)[0]))


class SampleSet:
    """An ordered multiset of possible worlds of one graph."""

    def __init__(self, labels: np.ndarray, fingerprint: str = "", seed: int | None = None):
        labels = np.ascontiguousarray(labels, dtype=np.int32)
        if labels.ndim != 2:
            raise ValueError("labels must be a (worlds, nodes) array")
        labels.setflags(write=False)
        self.labels = labels
        self.fingerprint = fingerprint
        self.seed = seed

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __repr__(self) -> str:
        return f"SampleSet(worlds={len(self)}, n={self.n}, seed={self.seed})"

    @property
    def n(self) -> int:
        return self.labels.shape[1]

    @property
    def worlds(self) -> list[PossibleWorld]:
        return [PossibleWorld(tuple(int(x) for x in row)) for row in self.labels]

    @classmethod
    def from_worlds(cls, worlds: Sequence[PossibleWorld], fingerprint: str = "") -> "SampleSet":
        return cls(np.array([w.labels for w in worlds], dtype=np.int32), fingerprint)

    @classmethod
    def from_edge_masks(cls, g: UncertainGraph, masks) -> "SampleSet":
        """Worlds given explicitly as boolean edge-presence rows."""
        masks = np.asarray(masks, dtype=bool).reshape(-1, g.m)
        us, vs, _ = g.edge_arrays
        return cls(component_labels(g.n, us, vs, masks), g.fingerprint)

    def extend(self, other: "SampleSet") -> "SampleSet":
        if len(self) and other.n != self.n:
            raise ValueError("cannot merge samples of different graphs")
        if self.fingerprint and other.fingerprint and self.fingerprint != other.fingerprint:
            raise ValueError("cannot merge samples of different graphs")
        if not len(self):
            return other
        return SampleSet(np.vstack([self.labels, other.labels]), self.fingerprint or other.fingerprint, self.seed)

    def _require(self):
        if len(self) == 0:
            raise ParameterError("sample set is empty")

    @cached_property
    def pair_counts(self) -> np.ndarray:
        """``counts[u, v]`` = number of worlds where u and v are connected."""
        self._require()
        w, n = self.labels.shape
        cols = (np.arange(w, dtype=np.int64)[:, None] * n + self.labels).ravel()
        rows = np.tile(np.arange(n), w)
        ind = sparse.csr_matrix((np.ones(w * n, dtype=np.int64), (rows, cols)), shape=(n, w * n))
        counts = np.asarray((ind @ ind.T).todense(), dtype=np.int64)
        counts.setflags(write=False)
        return counts

    @cached_property
    def size_sums(self) -> np.ndarray:
        """Per node, the total size of its component summed over worlds."""
        self._require()
        w, n = self.labels.shape
        flat = (np.arange(w, dtype=np.int64)[:, None] * n + self.labels).ravel()
        sizes = np.bincount(flat, minlength=w * n)
        out = sizes[flat].reshape(w, n).sum(axis=0)
        out.setflags(write=False)
        return out

    def table(self) -> ConnectivityTable:
        return ConnectivityTable(self.pair_counts, "estimated", len(self))

    # binary cache -------------------------------------------------------

    MAGIC = b"UGSS"
    VERSION = 1

    def save(self, path) -> None:
        fp = bytes.fromhex(self.fingerprint) if self.fingerprint else b"\0" * 32
        seed = -1 if self.seed is None else self.seed
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(struct.pack("<I32sqQI", self.VERSION, fp, seed, len(self), self.n))
            fh.write(self.labels.astype("<i4").tobytes())

    @classmethod
    def load(cls, path, graph: UncertainGraph | None = None) -> "SampleSet":
        with open(path, "rb") as fh:
            if fh.read(4) != cls.MAGIC:
                raise GraphFormatError("not a sample cache file")
            version, fp, seed, count, n = struct.unpack("<I32sqQI", fh.read(struct.calcsize("<I32sqQI")))
            if version != cls.VERSION:
                raise GraphFormatError(f"unsupported sample cache version {version}")
            data = np.frombuffer(fh.read(), dtype="<i4")
        if data.size != count * n:
            raise GraphFormatError("truncated sample cache")
        fingerprint = fp.hex() if fp != b"\0" * 32 else ""
        if graph is not None and fingerprint and fingerprint != graph.fingerprint:
            raise GraphFormatError("sample cache was drawn from a different graph")
        return cls(data.reshape(count, n).astype(np.int32), fingerprint, None if seed < 0 else seed)


class WorldSampler:
    """Deterministic stream of possible worlds for one graph."""

    def __init__(self, g: UncertainGraph, seed: int, stream: int = 0):
        self.graph = g
        self.seed = int(seed)
        self.stream = int(stream)
        self.position = 0
        self._cache: tuple[int, np.ndarray] | None = None

    def _block(self, b: int) -> np.ndarray:
        if self._cache is not None and self._cache[0] == b:
            return self._cache[1]
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, b))
        rng = np.random.default_rng(ss)
        present = rng.random((BLOCK, self.graph.m)) < self.graph.edge_arrays[2]
        self._cache = (b, present)
        return present

    def masks(self, start: int, stop: int) -> np.ndarray:
        """Edge-presence rows for worlds ``start .. stop - 1``."""
        out = np.empty((stop - start, self.graph.m), dtype=bool)
        j = start
        while j < stop:
            b, off = divmod(j, BLOCK)
            take = min(BLOCK - off, stop - j)
            out[j - start : j - start + take] = self._block(b)[off : off + take]
            j += take
        return out

    def draw(self, count: int) -> SampleSet:
        """The next ``count`` worlds of the stream."""
        if count < 0:
            raise ParameterError("sample count must be non-negative")
        g = self.graph
        us, vs, _ = g.edge_arrays
        labels = component_labels(g.n, us, vs, self.masks(self.position, self.position + count))
        self.position += count
        return SampleSet(labels, g.fingerprint, self.seed)


def sample_worlds(g: UncertainGraph, count: int, seed: int, stream: int = 0) -> SampleSet:
    return WorldSampler(g, seed, stream).draw(count)


# estimators -----------------------------------------------------------------


def pr_hat(r: SampleSet, u: int, v: int) -> float:
    """Fraction of worlds in which ``u`` and ``v`` are connected."""
    r._require()
    if u == v:
        return 1.0
    return int(np.count_nonzero(r.labels[:, u - 1] == r.labels[:, v - 1])) / len(r)


def km_hat(r: SampleSet, sig: ClusteringSignature) -> float:
    return km_value(r.table(), sig)


def kc_hat(r: SampleSet, sig: ClusteringSignature) -> float:
    return kc_value(r.table(), sig)


def _center_rows(r: SampleSet, c: Iterable[int]) -> np.ndarray:
    cs = sorted(set(int(x) for x in c))
    if not cs:
        raise ParameterError("center set is empty")
    return r.pair_counts[np.asarray(cs) - 1]


def f_hat(r: SampleSet, v: int, c: Iterable[int]) -> float:
    return int(_center_rows(r, c)[:, v - 1].max()) / len(r)


def F_hat(r: SampleSet, c: Iterable[int]) -> float:
    return int(_center_rows(r, c).max(axis=0).sum()) / len(r)


def l_hat(r: SampleSet, q: float, c: Iterable[int]) -> float:
    """Sum over nodes of ``min(q, f_hat)``."""
    if not (0.0 < q <= 1.0):
        raise ParameterError("threshold q must lie in (0, 1]")
    best = _center_rows(r, c).max(axis=0) / len(r)
    return math.fsum(np.minimum(q, best).tolist())


def component_size_sum(r: SampleSet, v: int) -> float:
    """Average size of the component containing ``v``; equals F_hat(r, {v})."""
    return int(r.size_sums[v - 1]) / len(r)


# concentration bound and sample sizes ---------------------------------------


@dataclass(frozen=True)
class TailParams:
    epsilon: float
    upsilon: float
    samples: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")
        if not (0.0 <= self.upsilon <= 1.0):
            raise ParameterError("upsilon must lie in [0, 1]")
        if self.samples < 1:
            raise ParameterError("need at least one sample")


def tail_bound(p: TailParams) -> float:
    """Upper bound on Pr[mean estimate - true mean >= epsilon]."""
    return math.exp(-3.0 * p.epsilon**2 * p.samples / (2.0 * (p.epsilon + p.upsilon)))


def ln_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_unit(name, x, closed_right=False):
    ok = 0.0 < x <= 1.0 if closed_right else 0.0 < x < 1.0
    if not ok:
        raise ParameterError(f"{name}={x} outside {'(0, 1]' if closed_right else '(0, 1)'}")


def kmedian_sample_bound(n: int, k: int, epsilon: float, delta: float, opt_lower_bound: float) -> float:
    """Real-valued sample requirement for the fixed-budget k-median search."""
    if not (1 <= k <= n):
        raise ParameterError("need 1 <= k <= n")
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    _check_unit("delta", delta)
    _check_unit("opt_lower_bound", opt_lower_bound, closed_right=True)
    e = math.e
    lnc = ln_binom(n, k)
    # ln(C(n,k) + 1) without forming C(n,k)
    log_term = lnc + math.log1p(math.exp(-lnc)) - math.log(delta)
    coeff = 2 * (2 * e - 1) * (e * epsilon + 2 * e - 1) / (3 * e * e * epsilon * epsilon * opt_lower_bound)
    return coeff * log_term


def samples_for_kmedian(n: int, k: int, epsilon: float, delta: float, opt_lower_bound: float) -> int:
    return math.ceil(kmedian_sample_bound(n, k, epsilon, delta, opt_lower_bound))


def samples_for_kcenter_simple(n: int, epsilon1: float, epsilon2: float, delta: float, opt_lower_bound: float) -> int:
    """Pool size for the sampled farthest-first k-center search."""
    for name, x in (("epsilon1", epsilon1), ("epsilon2", epsilon2), ("delta", delta)):
        _check_unit(name, x)
    _check_unit("opt_lower_bound", opt_lower_bound, closed_right=True)
    if n < 2:
        return 1
    opt2 = opt_lower_bound**2
    lg = math.log(n * (n - 1) / delta)
    a = 2 * (1 + epsilon1) / (3 * epsilon1**2 * opt2)
    b = 2 * (1 - epsilon1) / (3 * epsilon2**2 * opt2)
    return math.ceil(max(a, b) * lg)


def samples_for_kcenter_bicriteria(
    n: int, k: int, epsilon3: float, epsilon: float, delta: float, opt_lower_bound: float
) -> int:
    """Pool size for the bi-criteria k-center search; scales as 1/OPT."""
    for name, x in (("epsilon3", epsilon3), ("epsilon", epsilon), ("delta", delta)):
        _check_unit(name, x)
    _check_unit("opt_lower_bound", opt_lower_bound, closed_right=True)
    if not (1 <= k <= n):
        raise ParameterError("need 1 <= k <= n")
    arg = (n * n + n - 2 * k) / (2 * delta)
    if arg <= 1.0:
        # single-node graph: nothing to estimate
        return 1
    return math.ceil(2 * (1 + epsilon3) / (3 * epsilon3**2 * (1 - epsilon) * opt_lower_bound) * math.log(arg))
