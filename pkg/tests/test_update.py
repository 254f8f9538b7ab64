import numpy as np
import pytest

from walkim import random_graph
from walkim.scores import score_est, walk_pro
from walkim.update import (
    BasicGreedy,
    LazyEngine,
    apply_basic_update,
    basic_delta_coefficients,
)
from conftest import make_graph


def residual_scores(graph, seeds, L):
    """Recompute-from-scratch oracle: out-edges of seeds removed."""
    return score_est(graph.drop_out_edges(seeds), L)


def test_worked_example_updates():
    # b -> a -> c with p = 0.5, L = 2; selecting a drops F[b] to 0.5
    g = make_graph([(0, 1, 0.5), (1, 2, 0.5)])  # b=0, a=1, c=2
    vectors = score_est(g, 2)
    assert vectors.total[0] == pytest.approx(0.75)
    cols = walk_pro(g, 2, 1)
    c, gsum = basic_delta_coefficients(g, vectors, 1, set(), cols)
    assert c[0] == pytest.approx(-0.5)
    updated, _, _ = apply_basic_update(g, vectors, 1, cols, set())
    assert updated.total[0] == pytest.approx(0.5)
    assert updated.per_hop[1][0] == pytest.approx(0.0)  # delta was -0.25


def test_coefficients_no_out_edges():
    g = make_graph([(0, 1, 0.5), (1, 2, 0.5)])
    vectors = score_est(g, 2)
    cols = walk_pro(g, 2, 2)
    c, gsum = basic_delta_coefficients(g, vectors, 2, set(), cols)
    assert c == [0.0, 0.0, 0.0]
    assert gsum == [0.0, 0.0, 0.0]


def test_coefficients_nonpositive_and_g_monotone():
    for seed in range(10):
        g = random_graph(20, 60, seed=seed)
        basic = BasicGreedy(g, 3)
        for _ in range(4):
            basic.step()
        for c_row, g_row in zip(basic.coeff_c, basic.coeff_g):
            assert all(cx <= 1e-12 for cx in c_row)
            assert all(g_row[i + 1] <= g_row[i] + 1e-12
                       for i in range(len(g_row) - 1))


def test_basic_update_matches_recompute():
    for seed in range(25):
        n = 5 + seed % 20
        m = min(12 + 3 * (seed % 8), n * (n - 1))
        g = random_graph(n, m, seed=seed)
        basic = BasicGreedy(g, 3)
        for _ in range(min(5, g.n)):
            basic.step()
            ref = residual_scores(g, basic.seeds, 3)
            for u in range(g.n):
                if u in basic.seeds:
                    continue
                assert basic.vectors.total[u] == pytest.approx(
                    ref.total[u], abs=1e-9)
                for j in range(3):
                    assert basic.vectors.per_hop[j][u] == pytest.approx(
                        ref.per_hop[j][u], abs=1e-9)


def test_basic_update_with_seed_to_seed_edge():
    # the second selected seed points at the first via edge (1, 0); the
    # residual graph must lose that edge too, which exercises the hop-0
    # coefficient term for a seed out-neighbor
    g = make_graph([
        (0, 2, 0.95), (0, 3, 0.95), (0, 4, 0.95),
        (1, 0, 0.2), (1, 2, 0.3), (1, 4, 0.6),
        (2, 3, 0.5), (3, 2, 0.4),
    ])
    basic = BasicGreedy(g, 3)
    w1 = basic.step()
    w2 = basic.step()
    assert (w1, w2) == (0, 1)
    assert g.has_edge(w2, w1)
    ref = residual_scores(g, basic.seeds, 3)
    for u in range(g.n):
        if u in basic.seeds:
            continue
        assert basic.vectors.total[u] == pytest.approx(ref.total[u],
                                                       abs=1e-12)
    # the same run through the lazy engine agrees seed by seed
    lazy = LazyEngine(g, 3)
    assert lazy.run_iteration()[0] == w1
    assert lazy.run_iteration()[0] == w2
    forced = lazy.fully_updated_scores()
    for u in range(g.n):
        if not lazy.is_seed[u]:
            assert forced[u] == pytest.approx(ref.total[u], abs=1e-12)


def test_lazy_hop_values_match_recompute():
    for seed in range(8):
        g = random_graph(20, 60, seed=100 + seed)
        lazy = LazyEngine(g, 3)
        for _ in range(4):
            lazy.run_iteration()
        t = len(lazy.seeds)
        ref = residual_scores(g, lazy.seeds, 3)
        for u in range(g.n):
            if lazy.is_seed[u]:
                continue
            for j in range(1, 4):
                assert lazy.hop_value(t + 1, j, u) == pytest.approx(
                    ref.per_hop[j - 1][u], abs=1e-9)


def test_lazy_delta_base_cases():
    g = random_graph(10, 30, seed=9)
    lazy = LazyEngine(g, 3)
    lazy.run_iteration()
    for v in range(g.n):
        assert lazy.delta_hop_value(1, 0, v) == 0.0
        assert lazy.delta_hop_value(1, 1, v) == 0.0
    # vertices with no walk into the seed see no change at any hop
    w = lazy.seeds[0]
    support = lazy.seed_columns[0].support()
    for v in range(g.n):
        if v in support or lazy.is_seed[v]:
            continue
        for j in (2, 3):
            assert lazy.delta_hop_value(1, j, v) == 0.0


def test_lazy_first_iteration_uses_initial_scores():
    g = random_graph(15, 40, seed=10)
    vectors = score_est(g, 3)
    lazy = LazyEngine(g, 3)
    w, st = lazy.run_iteration()
    assert w == int(np.argmax(vectors.total))
    assert st.score == pytest.approx(float(vectors.total.max()))


def test_lazy_matches_basic_seed_sequence():
    for seed in range(20):
        g = random_graph(6 + seed % 25, 15 + 2 * (seed % 10), seed=200 + seed)
        k = min(6, g.n)
        basic = BasicGreedy(g, 3)
        lazy = LazyEngine(g, 3)
        for _ in range(k):
            wb = basic.step()
            wl, _ = lazy.run_iteration()
            assert wb == wl


def test_lazy_skip_soundness():
    # no vertex skipped by the lazy sweep can beat the selected maximum
    for seed in range(10):
        g = random_graph(25, 80, seed=300 + seed)
        lazy = LazyEngine(g, 3)
        for _ in range(6):
            lazy.run_iteration()
            forced = lazy.fully_updated_scores()
            live = [forced[u] for u in range(g.n) if not lazy.is_seed[u]]
            if not live:
                continue
            true_max = max(live)
            assert lazy.lower_bound_f == pytest.approx(true_max, abs=1e-12)
            if lazy._next_best is not None:
                best = lazy._next_best
                assert forced[best] == pytest.approx(true_max, abs=1e-12)
                smallest = min(
                    u for u in range(g.n)
                    if not lazy.is_seed[u]
                    and forced[u] >= true_max - 1e-12)
                assert best == smallest


def test_score_monotonicity():
    for seed in range(8):
        g = random_graph(20, 70, seed=400 + seed)
        lazy = LazyEngine(g, 3)
        prev = None
        for _ in range(6):
            lazy.run_iteration()
            forced = lazy.fully_updated_scores()
            assert all(forced[u] >= -1e-12 for u in range(g.n)
                       if not lazy.is_seed[u])
            if prev is not None:
                for u in range(g.n):
                    if not lazy.is_seed[u]:
                        assert forced[u] <= prev[u] + 1e-12
            prev = forced


def test_timestamps_within_range():
    g = random_graph(30, 90, seed=11)
    lazy = LazyEngine(g, 3)
    for t in range(1, 7):
        lazy.run_iteration()
        for u in range(g.n):
            if not lazy.is_seed[u]:
                assert 1 <= lazy.tstamp[u] <= t + 1


def test_cache_eviction_keeps_latest_only():
    g = random_graph(20, 60, seed=12)
    lazy = LazyEngine(g, 3)
    for _ in range(5):
        lazy.run_iteration()
    t = len(lazy.seeds)
    lazy.hop_value(t + 1, 2, 0)
    stamp, _ = lazy.cache_f[(2, 0)]
    assert stamp == t + 1
    # an older query must not clobber the fresher cache entry
    lazy.hop_value(2, 2, 0)
    assert lazy.cache_f[(2, 0)][0] == t + 1


def test_diagnostics_shape():
    g = random_graph(15, 40, seed=13)
    lazy = LazyEngine(g, 3)
    lazy.run_iteration()
    d = lazy.diagnostics()
    assert d["iteration"] == 1
    assert sum(d["timestamp_histogram"].values()) == g.n - 1
    assert d["aux_bytes"] > 0
