"""k-center solvers for uncertain graphs.

Connection probabilities satisfy ``Pr[u~w] >= Pr[u~v] * Pr[v~w]``, so
``-ln Pr`` is a metric and farthest-first traversal yields
``KC >= OPT**2``. The bi-criteria searches bisect on a threshold ``q`` and
decide each midpoint with a greedy cover of the capped potential
``L(q, C) = sum_v min(q, f_v(C))``, trading extra centers for a
``(1 - eps)`` guarantee.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import greedy as _greedy
from .errors import ParameterError, SolverError
from .exact import ExactOracle
from .graph import ConnectivityTable, UncertainGraph, assign_clusters, kc_value
from .greedy import LazyState, ThresholdObjective, best_candidate
from .report import SolveReport
from .sampling import SampleSet, WorldSampler, samples_for_kcenter_bicriteria

IDENTITY_TOL = 1e-9
FEAS_TOL = 1e-12


def log_distance(p: float) -> float:
    """``-ln p``; disconnected pairs (p = 0) are infinitely far apart."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"probability {p} outside [0, 1]")
    if p == 0.0:
        return math.inf
    return 0.0 if p == 1.0 else -math.log(p)


@dataclass(frozen=True)
class KCenterEps:
    """Accuracy and confidence knobs for the k-center searches.

    Each solver expects its own relation between ``epsilon`` and the parts:
    ``search`` wants ``1-eps = (1-e1)(1-e2)``, ``guess`` wants ``eps = e1+e2``
    and ``plus`` wants ``1-eps = (1-e1)(1-e2)(1-e3)``. The constructors
    below derive ``epsilon`` from the parts.
    """

    epsilon: float
    epsilon1: float
    epsilon2: float
    epsilon3: float | None = None
    delta: float | None = None

    def __post_init__(self):
        for name in ("epsilon", "epsilon1", "epsilon2", "epsilon3", "delta"):
            x = getattr(self, name)
            if x is not None and not (0.0 < x < 1.0):
                raise ParameterError(f"{name}={x} outside (0, 1)")

    @classmethod
    def search(cls, epsilon1, epsilon2):
        return cls(1 - (1 - epsilon1) * (1 - epsilon2), epsilon1, epsilon2)

    @classmethod
    def guess(cls, epsilon1, epsilon2, delta):
        return cls(epsilon1 + epsilon2, epsilon1, epsilon2, None, delta)

    @classmethod
    def plus(cls, epsilon1, epsilon2, epsilon3, delta):
        return cls(1 - (1 - epsilon1) * (1 - epsilon2) * (1 - epsilon3), epsilon1, epsilon2, epsilon3, delta)

    @classmethod
    def even(cls, epsilon, variant, delta=None):
        """Split ``epsilon`` into equal parts satisfying ``variant``'s relation."""
        if variant == "search":
            x = 1 - math.sqrt(1 - epsilon)
            return cls(epsilon, x, x, None, delta)
        if variant == "guess":
            return cls(epsilon, epsilon / 2, epsilon / 2, None, delta)
        if variant == "plus":
            x = 1 - (1 - epsilon) ** (1 / 3)
            return cls(epsilon, x, x, x, delta)
        raise ParameterError(f"unknown variant {variant!r}")

    def check(self, variant):
        e, e1, e2, e3 = self.epsilon, self.epsilon1, self.epsilon2, self.epsilon3
        if variant == "search":
            ok = abs((1 - e) - (1 - e1) * (1 - e2)) <= IDENTITY_TOL
        elif variant == "guess":
            ok = abs(e - (e1 + e2)) <= IDENTITY_TOL
        elif variant == "plus":
            ok = e3 is not None and abs((1 - e) - (1 - e1) * (1 - e2) * (1 - e3)) <= IDENTITY_TOL
        else:
            raise ParameterError(f"unknown variant {variant!r}")
        if not ok:
            raise ParameterError(f"epsilon parts do not satisfy the {variant} relation")
        if variant != "search" and self.delta is None:
            raise ParameterError("delta is required")

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def center_budget(n: int, k: int, epsilon1: float) -> int:
    """Bi-criteria center budget ``ceil(ln(n / eps1)) * k``."""
    return math.ceil(math.log(n / epsilon1)) * k


def _table(g, oracle) -> ConnectivityTable:
    if oracle is None:
        return ExactOracle(g).table()
    if isinstance(oracle, ExactOracle):
        return oracle.table()
    return oracle


def _exact_score(report, g, oracle):
    if oracle is not None:
        report.extra["exact_kc"] = kc_value(_table(g, oracle), report.signature)


def farthest_first(weights: np.ndarray, k: int) -> list[int]:
    """Farthest-first traversal on ``-ln`` of ``weights``, seeded at node 1.

    Maximising ``-ln p`` is minimising ``p``, so the scan runs on the raw
    weights and never takes a logarithm; ties go to the smallest ID.
    """
    n = weights.shape[0]
    centers = [1]
    best = weights[0].astype(float).copy()
    chosen = np.zeros(n, dtype=bool)
    chosen[0] = True
    while len(centers) < k:
        cand = np.where(chosen, np.inf, best)
        v = int(np.argmin(cand))
        centers.append(v + 1)
        chosen[v] = True
        np.maximum(best, weights[v], out=best)
    return centers


def gonzalez(g: UncertainGraph, k: int, table=None) -> SolveReport:
    """Farthest-first k-center on a connectivity table (exact by default)."""
    if not (1 <= k <= g.n):
        raise ParameterError(f"k={k} must lie in [1, n={g.n}]")
    t0 = time.perf_counter()
    table = _table(g, table)
    centers = farthest_first(table.weights, k)
    sig = assign_clusters(table, centers)
    kc = kc_value(table, sig)
    return SolveReport(
        algorithm="gonzalez",
        objective="kc",
        signature=sig,
        table=table,
        params={"k": k},
        bounds={"radius": log_distance(kc)},
        extra={"selection_order": centers},
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )


def search_kc_1(g: UncertainGraph, k: int, r: SampleSet, oracle=None) -> SolveReport:
    """Farthest-first on sampled distances; never-connected pairs are infinitely far."""
    if len(r) == 0:
        raise ParameterError("sample set is empty")
    rep = gonzalez(g, k, r.table())
    rep.algorithm = "gonzalez-sampled"
    rep.params["seed"] = r.seed
    rep.samples = {"R": len(r)}
    _exact_score(rep, g, oracle)
    return rep


def _cover(obj, n, budget, threshold, first=None, state: LazyState | None = None):
    """Greedily add centers until ``obj.value >= threshold`` or the budget is spent."""
    picked = [] if first is None else [first]
    remaining = set(range(1, n + 1)) - set(picked)
    while obj.value < threshold and len(picked) < budget and remaining:
        if state is not None:
            u, state = _greedy.get_next_node(state)
        else:
            u, _ = best_candidate(remaining, obj)
            obj.add(u)
        picked.append(u)
        remaining.discard(u)
    return picked, obj.value >= threshold


def search_kc(g: UncertainGraph, k: int, eps: KCenterEps, table=None, max_iterations: int = 64) -> SolveReport:
    """Bi-criteria k-center with a connectivity oracle.

    Returns at most ``ceil(ln(n/eps1)) * k`` centers whose worst link is at
    least ``(1 - eps) * OPT``.
    """
    if not (1 <= k <= g.n):
        raise ParameterError(f"k={k} must lie in [1, n={g.n}]")
    eps.check("search")
    t0 = time.perf_counter()
    table = _table(g, table)
    n = g.n
    budget = center_budget(n, k, eps.epsilon1)
    log_floor = g.log_edge_product if _components(g) <= k else -math.inf
    q1, q2 = 0.0, 1.0
    best = None
    trace = []
    aborted = False
    while True:
        q = (q1 + q2) / 2
        obj = ThresholdObjective(table.weights, q * table.scale)
        thr = (n - eps.epsilon1) * q * table.scale
        picked, feasible = _cover(obj, n, budget, thr - FEAS_TOL * n)
        if feasible:
            best, q1 = picked, q
        else:
            q2 = q
        trace.append({"iteration": len(trace) + 1, "q": q, "feasible": feasible, "centers": len(picked), "potential": obj.value / table.scale})
        if q1 >= (1 - eps.epsilon2) * q2:
            break
        if len(trace) >= max_iterations or math.log(q2) < log_floor:
            aborted = True
            break
    if best is None:
        raise SolverError("no feasible threshold found")
    sig = assign_clusters(table, best)
    return SolveReport(
        algorithm="search",
        objective="kc",
        signature=sig,
        table=table,
        params={"k": k, **eps.to_dict()},
        bounds={"q1": q1, "q2": q2, "budget": budget, "aborted": aborted},
        trace=trace,
        extra={"iterations": len(trace)},
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )


def _components(g: UncertainGraph) -> int:
    return len(np.unique(g.components))


def get_first_node_1(q: float, r: SampleSet) -> tuple[int, LazyState]:
    """Best single node under the sampled potential ``L_hat(q, .)``.

    Component-size sums bound ``L_hat(q, {v})`` from above, so one lazy step
    from the empty set finds the exact argmax.
    """
    if len(r) == 0:
        raise ParameterError("sample set is empty")
    if not (0.0 < q <= 1.0):
        raise ParameterError("threshold q must lie in (0, 1]")
    return _greedy.threshold_first_node(r.pair_counts, r.size_sums, q * len(r))


def delta_schedule(delta: float, i: int) -> float:
    """Confidence spent on round ``i``; sums to ``delta`` over all rounds."""
    return 6.0 * delta / (math.pi**2 * i * i)


def sampling_kc_1(g: UncertainGraph, k: int, eps: KCenterEps, seed: int = 0, oracle=None, max_rounds: int = 40) -> SolveReport:
    """Guess OPT as 1/2, 1/4, ... until a fresh pool certifies every link."""
    if not (1 <= k <= g.n):
        raise ParameterError(f"k={k} must lie in [1, n={g.n}]")
    eps.check("guess")
    t0 = time.perf_counter()
    n, e1, e2 = g.n, eps.epsilon1, eps.epsilon2
    sampler = WorldSampler(g, seed)
    r = sampler.draw(0)
    rp = sampler.draw(0)
    trace = []
    for i in range(1, max_rounds + 1):
        q = 2.0**-i
        d_i = delta_schedule(eps.delta, i)
        r = r.extend(rp)
        lg = math.log(2 * n * (n - 1) / d_i) if n > 1 else 0.0
        ell = math.ceil(max(2 * (1 + e1) / (3 * e1**2 * q * q), 2 * (1 - e1) / (3 * e2**2 * q * q)) * lg)
        ell = max(ell, 1)
        if len(r) < ell:
            r = r.extend(sampler.draw(ell - len(r)))
        rep = search_kc_1(g, k, r)
        sig = rep.signature
        rp = sampler.draw(len(r))
        links = [(c, v) for c, v in sig.links if c != v]
        zmin = math.inf
        if links:
            a = math.log(2 * (n - k) / d_i)
            b = a / (6.0 * len(rp))
            probs = rp.table().probs
            zmin = min((math.sqrt(probs[c - 1, v - 1]) - math.sqrt(b)) ** 2 - b for c, v in links)
        trace.append({"round": i, "q": q, "R": len(r), "R_prime": len(rp), "z_min": zmin})
        if zmin >= q:
            break
    else:
        raise SolverError(f"no certified guess within {max_rounds} rounds")
    rep.algorithm = "guess"
    rep.params = {"k": k, "seed": seed, **eps.to_dict()}
    rep.bounds = {"q": q, "z_min": zmin}
    rep.samples = {"R": len(r), "R_prime": len(rp), "total": len(r) + len(rp), "rounds": len(trace)}
    rep.trace = trace
    rep.duration = time.perf_counter() - t0
    _exact_score(rep, g, oracle)
    return rep


def search_kc_plus(
    g: UncertainGraph, k: int, eps: KCenterEps, seed: int = 0, oracle=None, max_iterations: int = 64
) -> SolveReport:
    """Bi-criteria k-center from samples, growing one pool as ``q`` moves."""
    if not (1 <= k <= g.n):
        raise ParameterError(f"k={k} must lie in [1, n={g.n}]")
    eps.check("plus")
    t0 = time.perf_counter()
    n, e1, e3 = g.n, eps.epsilon1, eps.epsilon3
    budget = center_budget(n, k, e1)
    log_floor = g.log_edge_product if _components(g) <= k else -math.inf
    sampler = WorldSampler(g, seed)
    r = sampler.draw(0)
    q1, q2 = 0.0, 1.0
    best = best_sig = best_table = None
    trace = []
    aborted = False
    while True:
        i = len(trace) + 1
        q = (q1 + q2) / 2
        d_i = delta_schedule(eps.delta, i)
        ell = samples_for_kcenter_bicriteria(n, k, e3, eps.epsilon, d_i, q)
        if len(r) < ell:
            r = r.extend(sampler.draw(ell - len(r)))
        qp = (1 - e3) * q
        theta = len(r)
        thr = (n - e1) * qp * theta
        u, state = get_first_node_1(qp, r)
        picked, feasible = _cover(state.objective, n, budget, thr - FEAS_TOL * n * theta, first=u, state=state)
        if feasible:
            best, q1 = picked, q
            best_table = r.table()
            best_sig = assign_clusters(best_table, best)
        else:
            q2 = q
        trace.append({
            "iteration": i, "q": q, "ell": ell, "R": theta, "feasible": feasible,
            "centers": len(picked), "potential_hat": state.objective.value / theta, "evaluations": state.evaluations,
        })
        if q1 >= (1 - eps.epsilon2) * q2:
            break
        if len(trace) >= max_iterations or math.log(q2) < log_floor:
            aborted = True
            break
    if best is None:
        raise SolverError("no feasible threshold found")
    rep = SolveReport(
        algorithm="search-plus",
        objective="kc",
        signature=best_sig,
        table=best_table,
        params={"k": k, "seed": seed, **eps.to_dict()},
        bounds={"q1": q1, "q2": q2, "budget": budget, "aborted": aborted},
        samples={"R": len(r), "total": len(r)},
        evaluations=sum(t["evaluations"] for t in trace),
        trace=trace,
        extra={"iterations": len(trace)},
        fingerprint=g.fingerprint,
        duration=time.perf_counter() - t0,
    )
    _exact_score(rep, g, oracle)
    return rep


def expected_samples_kc_plus(n: int, epsilon: float, delta: float, opt: float) -> float:
    """Order-of-magnitude sample count for the bi-criteria sampled search.

    ``(ln(n/delta) + ln ln(1/(eps*OPT))) / (eps**2 * OPT)`` with all hidden
    constants set to one.
    """
    x = 1.0 / (epsilon * opt)
    lnln = math.log(math.log(x)) if x > math.e else 0.0
    return (math.log(n / delta) + lnln) / (epsilon**2 * opt)
