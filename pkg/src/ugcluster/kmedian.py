"""k-median solvers for uncertain graphs.

Choosing centers ``C`` and linking every node to its best-connected center
turns k-median into maximising ``F(C) = sum_v max_{c in C} Pr[c ~ v]``, a
monotone submodular function, so plain greedy is a (1 - 1/e) approximation.
Without an oracle the same greedy runs on sampled co-occurrence counts.
"""
from __future__ import annotations

import math
import time

from . import greedy as _greedy
from .errors import ParameterError
from .exact import ExactOracle
from .graph import ConnectivityTable, UncertainGraph, assign_clusters, km_value
from .greedy import CoverageObjective, LazyState, greedy
from .report import SolveReport
from .sampling import SampleSet, WorldSampler, kmedian_sample_bound, km_hat

ONE_MINUS_INV_E = 1.0 - 1.0 / math.e

__all__ = [
    "greedy",
    "get_first_node",
    "get_next_node",
    "solve_kmedian_oracle",
    "solve_kmd2_baseline",
    "search_km",
    "search_km_plus",
    "sampling_km",
]

get_next_node = _greedy.get_next_node


def _check_k(g: UncertainGraph, k: int):
    if not (1 <= k <= g.n):
        raise ParameterError(f"k={k} must lie in [1, n={g.n}]")


def _table(g, oracle) -> ConnectivityTable:
    if oracle is None:
        return ExactOracle(g).table()
    if isinstance(oracle, ExactOracle):
        return oracle.table()
    return oracle


def _exact_score(report: SolveReport, g, oracle):
    if oracle is not None:
        report.extra["exact_km"] = km_value(_table(g, oracle), report.signature)


def solve_kmedian_oracle(g: UncertainGraph, k: int, oracle=None) -> SolveReport:
    """Greedy over the exact coverage function."""
    _check_k(g, k)
    t0 = time.perf_counter()
    table = _table(g, oracle)
    obj = CoverageObjective(table.weights)
    order = greedy(g.nodes, k, obj)
    sig = assign_clusters(table, order)
    return SolveReport(
        algorithm="oracle-greedy",
        objective="km",
        signature=sig,
        table=table,
        params={"k": k},
        bounds={"guarantee": "1-1/e", "coverage": obj.value},
        evaluations=obj.evaluations,
        extra={"selection_order": order},
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )


def solve_kmd2_baseline(g: UncertainGraph, k: int, oracle=None) -> SolveReport:
    """Top-k nodes by total connectivity; coverage is at least OPT * n / k."""
    _check_k(g, k)
    t0 = time.perf_counter()
    table = _table(g, oracle)
    rows = [math.fsum(table.probs[v - 1].tolist()) for v in g.nodes]
    ranked = sorted(g.nodes, key=lambda v: (-rows[v - 1], v))
    centers = ranked[:k]
    sig = assign_clusters(table, centers)
    coverage = km_value(table, sig) * g.n
    return SolveReport(
        algorithm="kmd2",
        objective="km",
        signature=sig,
        table=table,
        params={"k": k},
        bounds={"guarantee": "1/k", "coverage": coverage, "row_sums": {v: rows[v - 1] for v in centers}},
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )


def _sample_report(name, g, k, r, sig, evaluations, oracle, extra=None, t0=None):
    rep = SolveReport(
        algorithm=name,
        objective="km",
        signature=sig,
        table=r.table(),
        params={"k": k, "seed": r.seed},
        bounds={"coverage_hat": km_hat(r, sig) * g.n},
        samples={"R": len(r)},
        evaluations=evaluations,
        extra=extra or {},
        fingerprint=g.fingerprint,
        duration=0.0 if t0 is None else time.perf_counter() - t0,
    )
    _exact_score(rep, g, oracle)
    return rep


def search_km(g: UncertainGraph, k: int, r: SampleSet, oracle=None) -> SolveReport:
    """Greedy on the sampled coverage, then link nodes by sampled connectivity."""
    _check_k(g, k)
    if len(r) == 0:
        raise ParameterError("sample set is empty")
    t0 = time.perf_counter()
    obj = CoverageObjective(r.pair_counts)
    order = greedy(g.nodes, k, obj)
    sig = assign_clusters(r.table(), order)
    return _sample_report("search", g, k, r, sig, obj.evaluations, oracle, {"selection_order": order}, t0)


def get_first_node(r: SampleSet) -> tuple[int, LazyState]:
    """Head of the lazy list, ranked by average component size."""
    if len(r) == 0:
        raise ParameterError("sample set is empty")
    return _greedy.coverage_first_node(r.pair_counts, r.size_sums)


def search_km_plus(g: UncertainGraph, k: int, r: SampleSet, oracle=None) -> SolveReport:
    """Lazy variant of :func:`search_km`; same centers, fewer evaluations."""
    _check_k(g, k)
    t0 = time.perf_counter()
    u, state = get_first_node(r)
    order = _greedy.lazy_greedy(state, k, first=u)
    sig = assign_clusters(r.table(), order)
    return _sample_report(
        "search-plus", g, k, r, sig, state.evaluations, oracle,
        {"selection_order": order, "refreshes": state.refreshes}, t0,
    )


def confidence_bounds(km_r2: float, km_r1: float, a: float, theta: int) -> tuple[float, float]:
    """Lower bound on KM of the found clustering and upper bound on OPT."""
    b = a / (6.0 * theta)
    lb = (math.sqrt(km_r2) - math.sqrt(b)) ** 2 - b
    ub = (math.sqrt(km_r1 / ONE_MINUS_INV_E + 2.0 * a / (3.0 * theta)) + math.sqrt(b)) ** 2 - b
    lb = min(1.0, max(0.0, lb))
    ub = max(lb, ub)
    return lb, ub


def sampling_km(g: UncertainGraph, k: int, epsilon: float, delta: float, seed: int = 0, oracle=None) -> SolveReport:
    """Adaptive k-median: double two sample pools until the bounds certify.

    Pool ``R1`` drives the greedy search, pool ``R2`` validates it. Stops when
    ``lb / ub >= 1 - 1/e - epsilon`` or after ``i_max`` rounds.
    """
    _check_k(g, k)
    if not (0.0 < epsilon < ONE_MINUS_INV_E):
        raise ParameterError(f"epsilon must lie in (0, {ONE_MINUS_INV_E:.4f})")
    if not (0.0 < delta < 1.0):
        raise ParameterError("delta must lie in (0, 1)")
    t0 = time.perf_counter()
    n = g.n
    opt_lb = k / n
    t_max = math.ceil(kmedian_sample_bound(n, k, epsilon, delta, opt_lb))
    t = max(1, math.ceil(t_max * epsilon**2 * k / n))
    i_max = max(1, math.ceil(math.log2(t_max / t)))
    s1, s2 = WorldSampler(g, seed, stream=1), WorldSampler(g, seed, stream=2)
    r1, r2 = s1.draw(t), s2.draw(t)
    target = ONE_MINUS_INV_E - epsilon
    trace = []
    for i in range(1, i_max + 1):
        rep = search_km(g, k, r1)
        sig = rep.signature
        a = math.log(3 * i_max / delta)
        theta = len(r1)
        lb, ub = confidence_bounds(km_hat(r2, sig), km_hat(r1, sig), a, theta)
        ratio = lb / ub if ub > 0 else 0.0
        certified = ratio >= target
        trace.append({"round": i, "theta": theta, "lb": lb, "ub": ub, "ratio": ratio, "certified": certified})
        if certified or i == i_max:
            break
        r1 = r1.extend(s1.draw(len(r1)))
        r2 = r2.extend(s2.draw(len(r2)))
    out = SolveReport(
        algorithm="adaptive",
        objective="km",
        signature=sig,
        table=r1.table(),
        params={"k": k, "epsilon": epsilon, "delta": delta, "seed": seed, "opt_lower_bound": opt_lb},
        bounds={"lb": lb, "ub": ub, "ratio": ratio, "target": target, "certified": certified},
        samples={"R1": len(r1), "R2": len(r2), "T": t, "T_max": t_max, "i_max": i_max, "rounds": len(trace)},
        evaluations=rep.evaluations,
        trace=trace,
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )
    _exact_score(out, g, oracle)
    return out
