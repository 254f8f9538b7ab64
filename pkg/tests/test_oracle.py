import numpy as np
import pytest

from walkim import CapacityError, DomainError, random_graph
from walkim.oracle import (
    WorldTable,
    embedded_count_distribution,
    embedded_walks_probability,
    enumerate_walks,
    exact_pair_influence,
    exact_seed_influence,
    exact_world_probability,
    influence_gap_report,
    multi_walk_probability,
    multiworld_total_probability,
    out_edge_removal_gap,
    pair_influence_bounded_reach,
    pair_influence_walks,
    pair_influence_worlds,
    simple_path_score,
    walk_probability,
    walk_score,
)
from conftest import guarded_graph, make_graph

TOL = 1e-10


# -- walk probabilities -------------------------------------------------------


def test_walk_probability_path():
    g = make_graph([(0, 1, 0.5), (1, 2, 0.4)])
    assert walk_probability(g, (0, 1, 2)) == pytest.approx(0.2, abs=1e-15)


def test_walk_probability_repeated_edge():
    # back-and-forth walk traverses (a,b) twice and (b,a) once
    g = make_graph([(0, 1, 0.5), (1, 0, 0.5)])
    assert walk_probability(g, (0, 1, 0, 1)) == pytest.approx(0.125, abs=1e-15)


def test_walk_probability_non_edge():
    g = make_graph([(0, 1, 0.5)])
    with pytest.raises(DomainError):
        walk_probability(g, (1, 0))


def test_walk_probability_matches_world_enumeration():
    for seed in range(8):
        g = guarded_graph(seed, n_lo=3, n_hi=5, m_lo=3, m_hi=4)
        L = 3
        for u in range(g.n):
            for walk in enumerate_walks(g, u, L)[:6]:
                closed = walk_probability(g, walk)
                brute = embedded_walks_probability(g, [walk], L)
                assert closed == pytest.approx(brute, abs=TOL)


def test_multi_walk_shared_edge():
    # two walks sharing edge (0,1): 0->1->2 and 0->1->3
    g = make_graph([(0, 1, 0.5), (1, 2, 0.5), (1, 3, 0.5)])
    p = multi_walk_probability(g, [(0, 1, 2), (0, 1, 3)])
    assert p == pytest.approx(0.125, abs=1e-15)


def test_multi_walk_single_equals_walk():
    g = make_graph([(0, 1, 0.3), (1, 2, 0.7)])
    w = (0, 1, 2)
    assert multi_walk_probability(g, [w]) == walk_probability(g, w)


def test_multi_walk_matches_world_enumeration():
    for seed in range(6):
        g = guarded_graph(seed + 50, n_lo=3, n_hi=5, m_lo=3, m_hi=4)
        L = 3
        walks = []
        for u in range(g.n):
            walks.extend(enumerate_walks(g, u, L)[:3])
        for pair in zip(walks, walks[2:]):
            closed = multi_walk_probability(g, pair)
            brute = embedded_walks_probability(g, list(pair), L)
            assert closed == pytest.approx(brute, abs=TOL)


# -- multi-world probabilities --------------------------------------------------


def test_world_probability_single_edge():
    g = make_graph([(0, 1, 0.5)])
    assert exact_world_probability(g, [0], 2) == pytest.approx(0.5)
    assert exact_world_probability(g, [1], 2) == pytest.approx(0.25)
    assert exact_world_probability(g, [2], 2) == pytest.approx(0.25)


def test_world_probability_bad_multiplicity():
    g = make_graph([(0, 1, 0.5)])
    with pytest.raises(DomainError):
        exact_world_probability(g, [3], 2)
    with pytest.raises(DomainError):
        exact_world_probability(g, [0, 0], 2)


def test_world_probabilities_normalize():
    for seed in range(10):
        g = guarded_graph(seed + 100, n_lo=3, n_hi=5, m_lo=2, m_hi=6)
        for L in (1, 2, 3):
            assert multiworld_total_probability(g, L) == pytest.approx(
                1.0, abs=1e-12)


def test_multiworld_guard():
    g = random_graph(10, 30, seed=0)
    with pytest.raises(CapacityError):
        multiworld_total_probability(g, 3)  # 4^30 worlds


# -- exact influence -----------------------------------------------------------


def test_pair_influence_single_edge():
    g = make_graph([(0, 1, 0.3)])
    assert exact_pair_influence(g, 0, 1) == pytest.approx(0.3, abs=TOL)
    assert exact_pair_influence(g, 0, 1, L=3) == pytest.approx(0.3, abs=TOL)


def test_pair_influence_diamond(diamond_graph):
    # two edge-disjoint two-hop paths: 1 - (1 - 0.25)^2
    want = 1.0 - (1.0 - 0.25) ** 2
    assert exact_pair_influence(diamond_graph, 0, 3) == pytest.approx(
        want, abs=TOL)
    assert exact_pair_influence(diamond_graph, 0, 3, L=2) == pytest.approx(
        want, abs=TOL)


def test_pair_influence_self():
    g = make_graph([(0, 1, 0.5), (1, 0, 0.5)])
    assert exact_pair_influence(g, 0, 0) == 1.0
    # bounded self-influence counts cycles: 0->1->0 realized with p=0.25
    assert exact_pair_influence(g, 0, 0, L=2) == pytest.approx(0.25, abs=TOL)
    assert exact_pair_influence(g, 0, 0, L=2, route="worlds") == \
        pytest.approx(0.25, abs=TOL)
    assert exact_pair_influence(g, 0, 0, L=2, route="walks") == \
        pytest.approx(0.25, abs=TOL)
    # a one-hop budget admits no cycle without self-loops
    assert exact_pair_influence(g, 0, 0, L=1) == pytest.approx(0.0, abs=TOL)


def test_pair_influence_routes_agree():
    for seed in range(10):
        g = guarded_graph(seed + 200, n_lo=5, n_hi=5, m_lo=8, m_hi=8)
        L = 3
        table = WorldTable(g, hops=L)
        for u in range(g.n):
            for v in range(g.n):
                if u == v:
                    reach = exact_pair_influence(g, u, u, L=L)
                else:
                    reach = pair_influence_bounded_reach(g, u, v, L,
                                                         table=table)
                try:
                    ie = pair_influence_walks(g, u, v, L)
                except CapacityError:
                    continue
                assert ie == pytest.approx(reach, abs=TOL)
                worlds = pair_influence_worlds(g, u, v, L)
                assert worlds == pytest.approx(reach, abs=TOL)


def test_pair_influence_bounded_converges_to_unbounded():
    for seed in range(5):
        g = guarded_graph(seed + 300, n_lo=4, n_hi=5, m_lo=4, m_hi=7)
        for u in range(g.n):
            for v in range(g.n):
                if u == v:
                    continue
                full = exact_pair_influence(g, u, v)
                bounded = pair_influence_bounded_reach(g, u, v, g.n)
                assert bounded == pytest.approx(full, abs=TOL)


def test_seed_influence_examples(chain_graph):
    g = make_graph([(0, 1, 0.3)])
    assert exact_seed_influence(g, [0]) == pytest.approx(1.3, abs=TOL)
    assert exact_seed_influence(chain_graph, [0]) == pytest.approx(
        1.75, abs=TOL)
    full = exact_seed_influence(chain_graph, [0, 1, 2])
    assert full == pytest.approx(3.0, abs=1e-12)


def test_seed_influence_guard():
    g = random_graph(12, 30, seed=1)
    with pytest.raises(CapacityError):
        exact_seed_influence(g, [0])


# -- walk scores and gaps --------------------------------------------------------


def test_walk_score_diamond(diamond_graph):
    total, per_target = walk_score(diamond_graph, 0, 2)
    assert per_target[3] == pytest.approx(0.5, abs=1e-15)
    influence = exact_pair_influence(diamond_graph, 0, 3, L=2)
    assert per_target[3] - influence == pytest.approx(0.0625, abs=TOL)


def test_walk_score_dag_equals_simple_paths():
    for seed in range(6):
        g = guarded_graph(seed + 400, n_lo=5, n_hi=7, m_lo=5, m_hi=10)
        # orient all edges upward to force a DAG (dedupe opposite pairs)
        s, t, p = g.edge_list()
        lo, hi = np.minimum(s, t), np.maximum(s, t)
        dedup = {}
        for a, b, q in zip(lo, hi, p):
            dedup.setdefault((int(a), int(b)), float(q))
        dag = make_graph(sorted((a, b, q) for (a, b), q in dedup.items()),
                         n=g.n)
        for u in range(dag.n):
            total, _ = walk_score(dag, u, 3)
            assert total == pytest.approx(simple_path_score(dag, u, 3),
                                          abs=TOL)


def test_count_distribution_identities():
    for seed in range(6):
        g = guarded_graph(seed + 500, n_lo=4, n_hi=5, m_lo=4, m_hi=7)
        L = 3
        table = WorldTable(g, hops=L)
        for u in range(g.n):
            _, per_target = walk_score(g, u, L)
            for v, w_score in per_target.items():
                dist = embedded_count_distribution(g, u, v, L)
                influence = exact_pair_influence(g, u, v, L=L)
                assert sum(dist.values()) == pytest.approx(influence, abs=TOL)
                assert sum(i * x for i, x in dist.items()) == pytest.approx(
                    w_score, abs=TOL)
                h = len(enumerate_walks(g, u, L, end=v))
                assert influence <= w_score + TOL
                assert w_score <= h * influence + TOL


def test_gap_bounds():
    for seed in range(6):
        g = guarded_graph(seed + 600, n_lo=4, n_hi=6, m_lo=5, m_hi=10)
        L = 3
        report = influence_gap_report(g, seed % g.n, L)
        p_max = report.p_max
        for v, eps in report.gaps.items():
            h = report.walk_counts[v]
            assert eps >= -TOL
            assert eps <= p_max**3 * h * 2.0**h + TOL
        # source-level interval
        total_gap = report.score_total - report.influence_total
        bound = p_max**3 * L * sum(
            h * 2.0**h for h in report.walk_counts.values())
        assert -TOL <= total_gap <= bound + TOL


def test_removal_gap_no_in_edges():
    # vertex 0 has no in-edges: removing all edges vs out-edges is identical
    g = make_graph([(0, 1, 0.5), (1, 2, 0.5)])
    rep = out_edge_removal_gap(g, 0, 3)
    for row in rep["rows"]:
        assert row["influence_gap"] == pytest.approx(0.0, abs=1e-12)
        assert row["score_gap"] == pytest.approx(0.0, abs=1e-12)


def test_removal_gap_chain():
    # chain a -> w -> c: the influence gap at a is exactly P(a, w)
    g = make_graph([(0, 1, 0.4), (1, 2, 0.5)])
    rep = out_edge_removal_gap(g, 1, 3)
    row = next(r for r in rep["rows"] if r["u"] == 0)
    assert row["influence_gap"] == pytest.approx(0.4, abs=1e-12)


def test_removal_gap_random_bounds():
    for seed in range(5):
        g = guarded_graph(seed + 700, n_lo=4, n_hi=6, m_lo=5, m_hi=8)
        for w in range(g.n):
            rep = out_edge_removal_gap(g, w, 3)
            for row in rep["rows"]:
                assert -1e-12 <= row["influence_gap"] <= 1.0 + 1e-12
                # score perturbation exceeds the hop-bounded influence
                # perturbation by at most the walk-count gap bound
                assert -TOL <= row["excess_over_bounded_reach"] \
                    <= row["excess_bound"] + TOL


def test_world_table_guard():
    with pytest.raises(CapacityError):
        WorldTable(random_graph(12, 30, seed=2))


def test_walk_enumeration_guard():
    g = make_graph([(0, 1, 0.5), (1, 0, 0.5)])
    with pytest.raises(CapacityError):
        enumerate_walks(g, 0, 40, max_walks=8)


def test_pair_influence_walks_guard():
    # dense back-and-forth structure has many walks between a pair
    edges = []
    for i in range(5):
        for j in range(5):
            if i != j:
                edges.append((i, j, 0.5))
    g = make_graph(edges)
    with pytest.raises(CapacityError):
        pair_influence_walks(g, 0, 1, 4)
