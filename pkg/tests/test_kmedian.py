import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import G2, G3, table_of
from test_graph import graphs
from ugcluster import (
    ParameterError,
    SampleSet,
    brute_force_kmedian,
    km_value,
    sample_worlds,
    sampling_km,
    search_km,
    search_km_plus,
    solve_kmd2_baseline,
    solve_kmedian_oracle,
)
from ugcluster.graph import coverage
from ugcluster.greedy import CoverageObjective, SetFunctionObjective, _lazy_state, greedy
from ugcluster.kmedian import ONE_MINUS_INV_E, confidence_bounds, get_first_node, get_next_node
from ugcluster.sampling import km_hat
from ugcluster.generators import random_graph


def exact_F(g):
    t = table_of(g)
    return lambda c: coverage(t, c) if c else 0.0


def test_greedy_picks_best_single_node():
    assert greedy(G2.nodes, 1, exact_F(G2)) == [2]


def test_greedy_second_pick_breaks_tie_by_id():
    assert greedy(G2.nodes, 2, exact_F(G2)) == [2, 1]


def test_greedy_full_universe():
    assert sorted(greedy(G3.nodes, 3, exact_F(G3))) == [1, 2, 3]


def test_greedy_coverage_objective_agrees_with_set_function():
    g = random_graph(np.random.default_rng(1), 7, 10)
    t = table_of(g)
    assert greedy(g.nodes, 4, CoverageObjective(t.weights)) == greedy(g.nodes, 4, SetFunctionObjective(exact_F(g)))


def test_oracle_greedy_examples():
    rep = solve_kmedian_oracle(G2, 1)
    assert rep.centers == (2,) and rep.value == pytest.approx(2 / 3)
    assert rep.value == pytest.approx(brute_force_kmedian(G2, 1)[1])
    assert solve_kmedian_oracle(G3, 3).value == 1.0


def test_kmd2_examples():
    rep = solve_kmd2_baseline(G2, 1)
    assert rep.centers == (2,)
    assert rep.bounds["row_sums"][2] == pytest.approx(2.0)
    assert solve_kmd2_baseline(G2, 3).centers == (1, 2, 3)


def test_k_out_of_range():
    for fn in (solve_kmedian_oracle, solve_kmd2_baseline):
        with pytest.raises(ParameterError):
            fn(G2, 0)
        with pytest.raises(ParameterError):
            fn(G2, 4)


def test_search_km_all_edges_world_picks_smallest_id():
    r = SampleSet.from_edge_masks(G2, [[True, True]])
    rep = search_km(G2, 1, r)
    assert rep.centers == (1,)
    assert rep.bounds["coverage_hat"] == 3


def test_search_km_no_edges_world():
    r = SampleSet.from_edge_masks(G3, [[False, False, False]])
    for k in (1, 2, 3):
        rep = search_km(G3, k, r)
        assert rep.centers == tuple(range(1, k + 1))
        assert km_hat(r, rep.signature) == pytest.approx(k / 3)


def test_first_node_examples():
    assert get_first_node(SampleSet.from_edge_masks(G2, [[True, True]]))[0] == 1
    only23 = SampleSet.from_edge_masks(G2, [[False, True], [False, True]])
    assert get_first_node(only23)[0] == 2
    assert get_first_node(sample_worlds(G2, 5000, seed=1))[0] == 2


def test_next_node_single_candidate():
    r = sample_worlds(G2, 10, seed=0)
    state = _lazy_state(np.array([3.0, 0.0, 0.0]), CoverageObjective(r.pair_counts))
    state.order = [3]
    assert get_next_node(state)[0] == 3
    with pytest.raises(ParameterError):
        get_next_node(state)


def test_next_node_stale_but_ordered_needs_one_evaluation():
    r = SampleSet.from_edge_masks(G2, [[False, False]])
    obj = CoverageObjective(r.pair_counts)
    # head bound 1 refreshes to 1, which still beats the cached 0.5 of node 2
    state = _lazy_state(np.array([1.0, 0.5, 0.5]), obj)
    u, state = get_next_node(state)
    assert u == 1 and state.evaluations == 1


@given(graphs(max_n=7), st.integers(1, 40), st.data())
@settings(max_examples=60, deadline=None)
def test_next_node_matches_full_scan(g, count, data):
    r = sample_worlds(g, count, seed=count)
    k = data.draw(st.integers(1, g.n))
    u, state = get_first_node(r)
    ref = CoverageObjective(r.pair_counts)
    ref.add(u)
    for _ in range(k - 1):
        v, state = get_next_node(state)
        remaining = [w for w in g.nodes if w not in ref.selected]
        gains = {w: ref.gain(w) for w in remaining}
        best = max(gains.values())
        assert v == min(w for w in remaining if gains[w] == best)
        ref.add(v)


@given(graphs(max_n=7), st.integers(1, 60), st.data())
@settings(max_examples=60, deadline=None)
def test_lazy_and_plain_search_agree(g, count, data):
    k = data.draw(st.integers(1, g.n))
    r = sample_worlds(g, count, seed=count + 1)
    a, b = search_km(g, k, r), search_km_plus(g, k, r)
    assert a.signature == b.signature
    assert b.evaluations <= g.n * k


def test_lazy_is_cheaper_on_path_k2():
    r = sample_worlds(G2, 1000, seed=2)
    assert search_km_plus(G2, 2, r).evaluations < 3 * 2


def test_lazy_all_edges_world_pops_without_resorting():
    r = SampleSet.from_edge_masks(G3, [[True, True, True]])
    rep = search_km_plus(G3, 3, r)
    # pops follow the initial list order, so re-sorting never moves anything
    assert rep.extra["selection_order"] == [1, 2, 3]
    assert rep.extra["refreshes"] == [2, 1]


@given(graphs(max_n=6), st.data())
@settings(max_examples=40, deadline=None)
def test_greedy_path_is_monotone_with_shrinking_gains(g, data):
    t = table_of(g)
    order = greedy(g.nodes, g.n, CoverageObjective(t.weights))
    values = [coverage(t, order[: i + 1]) for i in range(len(order))]
    gains = np.diff([0.0] + values)
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(gains, gains[1:]))


def test_confidence_bounds_shape():
    for km2, km1, a, theta in [(0.6, 0.7, 3.0, 100), (0.01, 0.02, 5.0, 4), (0.9, 0.9, 1.0, 10_000)]:
        lb, ub = confidence_bounds(km2, km1, a, theta)
        assert 0.0 <= lb <= min(1.0, km2)
        assert ub >= lb
        assert ub >= km1 / ONE_MINUS_INV_E or ub == lb


def test_sampling_km_round_structure():
    rep = sampling_km(G3, 1, 0.3, 0.2, seed=4)
    s = rep.samples
    assert s["R1"] == s["R2"] == s["T"] * 2 ** (s["rounds"] - 1)
    assert s["T"] == max(1, math.ceil(s["T_max"] * 0.3**2 * 1 / 3))
    assert s["i_max"] == max(1, math.ceil(math.log2(s["T_max"] / s["T"])))
    for i, row in enumerate(rep.trace):
        assert row["theta"] == s["T"] * 2**i
    assert rep.bounds["lb"] <= rep.bounds["ub"]


def test_sampling_km_is_deterministic():
    a = sampling_km(G3, 2, 0.3, 0.1, seed=9)
    b = sampling_km(G3, 2, 0.3, 0.1, seed=9)
    assert a.to_json(timing=False) == b.to_json(timing=False)


def test_sampling_km_guarantee_on_g2():
    table = table_of(G2)
    _, opt = brute_force_kmedian(G2, 1, table)
    bad = sum(km_value(table, sampling_km(G2, 1, 0.3, 0.2, seed=s).signature) < (ONE_MINUS_INV_E - 0.3) * opt for s in range(50))
    assert bad <= 0.2 * 50 + 3 * math.sqrt(50 * 0.2 * 0.8)


def test_sampling_km_exact_score():
    rep = sampling_km(G2, 1, 0.3, 0.2, seed=1, oracle=table_of(G2))
    assert rep.extra["exact_km"] == pytest.approx(km_value(table_of(G2), rep.signature))


@pytest.mark.parametrize("eps, delta", [(0.0, 0.1), (0.7, 0.1), (0.3, 0.0), (0.3, 1.0)])
def test_sampling_km_parameter_domain(eps, delta):
    with pytest.raises(ParameterError):
        sampling_km(G2, 1, eps, delta)


def test_report_value_recomputes_from_signature():
    r = sample_worlds(G3, 100, seed=3)
    rep = search_km(G3, 1, r)
    d = rep.to_dict()
    assert d["value"] == km_value(r.table(), rep.signature)
    assert d["table_source"] == "estimated" and d["table_samples"] == 100
    assert d["signature"]["km"] == d["value"]
