import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import G1, G2, G3, binomial_sigma, small_random_graphs, table_of
from test_graph import graphs
from ugcluster import GraphFormatError, ParameterError, UncertainGraph, sample_worlds
from ugcluster.graph import ClusteringSignature
from ugcluster.sampling import (
    PossibleWorld,
    SampleSet,
    TailParams,
    WorldSampler,
    F_hat,
    component_size_sum,
    draw_world,
    f_hat,
    kc_hat,
    km_hat,
    l_hat,
    pr_hat,
    samples_for_kcenter_bicriteria,
    samples_for_kcenter_simple,
    samples_for_kmedian,
    tail_bound,
)

ALL = SampleSet.from_edge_masks(G2, [[True, True]])
NONE = SampleSet.from_edge_masks(G2, [[False, False]])
BOTH = ALL.extend(NONE)
STAR2 = ClusteringSignature((2,), {1: 2, 2: 2, 3: 2})


def test_certain_edge_shares_label():
    w = draw_world(UncertainGraph(2, ((1, 2, 1.0),)), np.random.default_rng(0))
    assert w.connected(1, 2)


def test_certain_path_is_one_component():
    w = draw_world(UncertainGraph(3, ((1, 2, 1.0), (2, 3, 1.0))), np.random.default_rng(0))
    assert w.component_size == {0: 3}


def test_world_labels_are_smallest_member():
    g = UncertainGraph(5, ((2, 4, 1.0), (3, 5, 1.0)))
    assert draw_world(g, np.random.default_rng(0)).labels == (0, 1, 2, 1, 2)


def test_bernoulli_fraction():
    r = sample_worlds(G1, 100_000, seed=3)
    assert abs(pr_hat(r, 1, 2) - 0.5) <= 0.005


def test_pr_hat_examples():
    assert pr_hat(BOTH, 1, 2) == 0.5
    assert pr_hat(BOTH, 3, 3) == 1.0
    r = sample_worlds(G3, 100_000, seed=4)
    assert abs(pr_hat(r, 1, 2) - 0.625) <= 0.005


def test_km_kc_hat_examples():
    assert km_hat(ALL, STAR2) == 1.0 and kc_hat(ALL, STAR2) == 1.0
    assert km_hat(NONE, STAR2) == pytest.approx(1 / 3) and kc_hat(NONE, STAR2) == 0.0
    r = sample_worlds(G2, 100_000, seed=5)
    assert abs(km_hat(r, STAR2) - 2 / 3) <= 0.01


def test_coverage_estimates():
    assert F_hat(ALL, {1}) == 3
    assert F_hat(NONE, {2}) == 1
    r = sample_worlds(G2, 100_000, seed=6)
    assert abs(F_hat(r, {2}) - 2.0) <= 0.03
    with pytest.raises(ParameterError):
        f_hat(r, 1, [])


def test_potential_estimates():
    assert l_hat(ALL, 0.5, {2}) == 1.5
    assert l_hat(NONE, 0.5, {2}) == 0.5
    r = sample_worlds(G2, 100_000, seed=7)
    assert abs(l_hat(r, 0.75, {2}) - 1.75) <= 0.03


def test_component_size_sum_examples():
    assert component_size_sum(ALL, 1) == 3
    assert all(component_size_sum(NONE, v) == 1 for v in (1, 2, 3))
    assert component_size_sum(BOTH, 2) == 2


def test_empty_sample_set_is_rejected():
    empty = sample_worlds(G2, 0, seed=0)
    with pytest.raises(ParameterError):
        pr_hat(empty, 1, 2)


@given(st.integers(0, 2**32 - 1), st.integers(0, 3000), st.integers(0, 3000))
@settings(max_examples=25, deadline=None)
def test_world_index_contract(seed, a, b):
    """World j depends only on (seed, stream, j), however the draws are chunked."""
    lo, hi = sorted((a, b))
    whole = sample_worlds(G3, hi, seed).labels
    s = WorldSampler(G3, seed)
    parts = [s.draw(lo), s.draw(hi - lo)]
    assert np.array_equal(np.vstack([p.labels for p in parts]), whole)
    direct = WorldSampler(G3, seed).masks(lo, hi)
    assert np.array_equal(SampleSet.from_edge_masks(G3, direct).labels, whole[lo:hi])


def test_streams_are_independent():
    a = sample_worlds(G3, 500, seed=1, stream=1).labels
    b = sample_worlds(G3, 500, seed=1, stream=2).labels
    assert not np.array_equal(a, b)


@given(graphs(max_n=6), st.integers(1, 50))
@settings(max_examples=30, deadline=None)
def test_pair_counts_match_direct_count(g, count):
    r = sample_worlds(g, count, seed=count)
    for u in g.nodes:
        assert component_size_sum(r, u) == pytest.approx(sum(w.component_size[w.labels[u - 1]] for w in r.worlds) / count)
        for v in g.nodes:
            assert r.pair_counts[u - 1, v - 1] == sum(w.connected(u, v) for w in r.worlds)


def test_unbiasedness():
    """Average of many independent estimates sits within 3 sigma of the exact value."""
    for g in small_random_graphs(5, seed=31, max_m=10, connected=True):
        exact = table_of(g).probs
        reps, size = 400, 50
        big = sample_worlds(g, reps * size, seed=8).labels.reshape(reps, size, g.n)
        u, v = 0, g.n - 1
        means = (big[:, :, u] == big[:, :, v]).mean(axis=1)
        p = exact[u, v]
        assert abs(means.mean() - p) <= 3 * binomial_sigma(p, reps * size) + 1e-12


def test_cache_round_trip(tmp_path):
    r = sample_worlds(G3, 77, seed=9)
    path = tmp_path / "r.bin"
    r.save(path)
    back = SampleSet.load(path, G3)
    assert np.array_equal(back.labels, r.labels)
    assert back.seed == 9 and back.fingerprint == G3.fingerprint


def test_cache_rejects_other_graph(tmp_path):
    path = tmp_path / "r.bin"
    sample_worlds(G3, 5, seed=1).save(path)
    with pytest.raises(GraphFormatError):
        SampleSet.load(path, G2)
    path.write_bytes(b"nope")
    with pytest.raises(GraphFormatError):
        SampleSet.load(path)


def test_extend_rejects_other_graph():
    with pytest.raises(ValueError):
        sample_worlds(G3, 2, seed=0).extend(sample_worlds(G2, 2, seed=0))


def test_possible_world_view():
    w = PossibleWorld((0, 0, 2))
    assert w.n == 3 and w.connected(1, 2) and not w.connected(2, 3)


def test_tail_bound_examples():
    assert tail_bound(TailParams(0.5, 0.5, 12)) == pytest.approx(math.exp(-4.5))
    assert tail_bound(TailParams(1.0, 0.0, 2)) == pytest.approx(math.exp(-3))
    p = TailParams(0.3, 0.4, 25)
    assert tail_bound(TailParams(0.3, 0.4, 50)) == pytest.approx(tail_bound(p) ** 2)
    with pytest.raises(ParameterError):
        TailParams(0.0, 0.5, 10)


def test_kmedian_sample_size():
    assert samples_for_kmedian(3, 1, 0.5, 0.1, 2 / 3) == 52
    a = samples_for_kmedian(50, 3, 0.2, 0.1, 0.4)
    b = samples_for_kmedian(50, 3, 0.2, 0.1, 0.2)
    assert abs(b - 2 * a) <= 1
    assert samples_for_kmedian(50, 3, 0.99, 0.1, 0.2) < samples_for_kmedian(50, 3, 0.5, 0.1, 0.2)
    # large n: the binomial never overflows
    assert samples_for_kmedian(10**6, 500, 0.2, 0.1, 1e-3) > 0


def test_kcenter_sample_sizes():
    assert samples_for_kcenter_simple(3, 0.25, 0.25, 0.1, 0.5) == 219
    assert samples_for_kcenter_simple(3, 0.25, 0.25, 0.1, 1.0) < samples_for_kcenter_simple(3, 0.25, 0.25, 0.1, 0.9)
    half = samples_for_kcenter_bicriteria(10, 2, 0.2, 0.4, 0.1, 0.5)
    quarter = samples_for_kcenter_bicriteria(10, 2, 0.2, 0.4, 0.1, 0.25)
    assert abs(quarter - 2 * half) <= 1
    with pytest.raises(ParameterError):
        samples_for_kcenter_simple(3, 0.0, 0.25, 0.1, 0.5)


def test_estimates_agree_with_oracle_familywise():
    """Bonferroni-corrected z bound over every pair of 40 random graphs."""
    from scipy.stats import norm

    graphs = small_random_graphs(40, seed=77)
    zs = []
    for i, g in enumerate(graphs):
        exact = table_of(g).probs
        est = sample_worlds(g, 100_000, seed=1000 + i).table().probs
        for u in range(g.n):
            for v in range(u + 1, g.n):
                p = exact[u, v]
                se = math.sqrt(p * (1 - p) / 100_000)
                zs.append(abs(est[u, v] - p) / se if se else (0.0 if est[u, v] == p else math.inf))
    limit = norm.isf(0.001 / (2 * len(zs)))
    assert max(zs) <= limit
