"""Exact, exponential-time reference computations on tiny graphs.

Everything here enumerates explicitly: walks, base possible worlds (each
edge kept or dropped), and multi-worlds (each edge realized with a
multiplicity in 0..L, where a multiplicity alpha means the first alpha of
the L conditional copies of the edge exist). These oracles are the ground
truth that the production score and update engines are verified against,
so they deliberately share no code with them.

Guards keep runtimes in seconds: base-world enumeration needs m <= 20,
multi-world enumeration needs (L+1)^m <= 2^24, and inclusion-exclusion
over walks needs at most 20 walks between a pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

MAX_BASE_EDGES = 20
MAX_MULTI_WORLDS = 1 << 24
MAX_IE_WALKS = 20
MAX_ENUMERATED_WALKS = 1 << 18

_WORLD_CHUNK = 1 << 16


# -- walks -------------------------------------------------------------------


def validate_walk(graph, walk):
    """Check that consecutive vertices are edges; raise DomainError if not."""
    if len(walk) < 2:
        raise DomainError("a walk needs at least one edge")
    for a, b in zip(walk, walk[1:]):
        if not graph.has_edge(a, b):
            raise DomainError(f"walk uses non-edge ({a}, {b})")


def walk_probability(graph, walk):
    """Probability that a walk can be traversed, counting edge repeats.

    Equals the product over distinct edges of P(u,v)^(times traversed),
    which is the same as the plain product over the walk's steps.
    """
    validate_walk(graph, walk)
    out = 1.0
    for a, b in zip(walk, walk[1:]):
        out *= graph.edge_probability(a, b)
    return out


def multi_walk_probability(graph, walks):
    """Probability that all given walks are simultaneously traversable.

    Shared edges are charged once at the maximum multiplicity any single
    walk needs.
    """
    need = {}
    for walk in walks:
        validate_walk(graph, walk)
        seen = {}
        for a, b in zip(walk, walk[1:]):
            seen[(a, b)] = seen.get((a, b), 0) + 1
        for e, c in seen.items():
            need[e] = max(need.get(e, 0), c)
    out = 1.0
    for (a, b), c in need.items():
        out *= graph.edge_probability(a, b) ** c
    return out


def enumerate_walks(graph, u, L, excluded=frozenset(), end=None,
                    max_walks=MAX_ENUMERATED_WALKS):
    """All walks of length 1..L starting at u, as vertex tuples.

    Vertices in ``excluded`` are never entered (walks may still start at u
    even if u is excluded elsewhere). With ``end`` set, only walks ending
    there are returned; interior vertices are unrestricted apart from
    ``excluded``.
    """
    walks = []
    stack = [(u,)]
    while stack:
        walk = stack.pop()
        if len(walk) > 1 and (end is None or walk[-1] == end):
            walks.append(walk)
            if len(walks) > max_walks:
                raise CapacityError(f"more than {max_walks} walks from {u}")
        if len(walk) <= L:
            nbrs, _ = graph.out_edges(walk[-1])
            for v in nbrs:
                if int(v) not in excluded:
                    stack.append(walk + (int(v),))
    return walks


def walk_score(graph, u, L, excluded=frozenset()):
    """Sum of probabilities of all walks of length 1..L from u.

    Returns (total, per_target) where per_target[v] is the contribution of
    walks ending at v. This is the enumeration-based reference for the
    sparse power-iteration scores.
    """
    per_target = {}
    for walk in enumerate_walks(graph, u, L, excluded=excluded):
        v = walk[-1]
        per_target[v] = per_target.get(v, 0.0) + walk_probability(graph, walk)
    return sum(per_target.values()), per_target


def simple_path_score(graph, u, L):
    """Like walk_score but counting simple paths only (DAG cross-check)."""
    total = 0.0
    stack = [((u,), 1.0)]
    while stack:
        path, prob = stack.pop()
        if len(path) > 1:
            total += prob
        if len(path) <= L:
            nbrs, probs = graph.out_edges(path[-1])
            for v, p in zip(nbrs, probs):
                if int(v) not in path:
                    stack.append((path + (int(v),), prob * float(p)))
    return total


def _edge_index(graph):
    s, t, _ = graph.edge_list()
    return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(s, t))}


def walk_multiplicities(graph, walk, edge_index=None):
    """Per-edge traversal counts of a walk, over the canonical edge order."""
    if edge_index is None:
        edge_index = _edge_index(graph)
    mult = np.zeros(len(edge_index), dtype=np.int8)
    for a, b in zip(walk, walk[1:]):
        try:
            mult[edge_index[(a, b)]] += 1
        except KeyError:
            raise DomainError(f"walk uses non-edge ({a}, {b})") from None
    return mult


# -- multi-world enumeration ---------------------------------------------------


def exact_world_probability(graph, multiplicities, L):
    """Probability of one multi-world, given per-edge multiplicities.

    ``multiplicities`` is aligned with the canonical edge order; entry
    alpha in 0..L means the first alpha conditional copies of that edge
    exist. Each edge contributes P^alpha, times (1 - P) unless the edge is
    saturated at L.
    """
    alpha = np.asarray(multiplicities)
    _, _, probs = graph.edge_list()
    if len(alpha) != graph.m:
        raise DomainError("multiplicity vector length != m")
    if alpha.min(initial=0) < 0 or alpha.max(initial=0) > L:
        raise DomainError(f"multiplicity outside 0..{L}")
    out = 1.0
    for a, p in zip(alpha, probs):
        out *= float(p) ** int(a)
        if a < L:
            out *= 1.0 - float(p)
    return float(out)


def _check_multiworld_guard(m, L):
    total = (L + 1) ** m
    if total > MAX_MULTI_WORLDS:
        raise CapacityError(
            f"(L+1)^m = {total} multi-worlds exceeds {MAX_MULTI_WORLDS}")
    return total


def _world_chunks(graph, L):
    """Yield (alpha, prob) arrays over all multi-worlds, in chunks."""
    m = graph.m
    total = _check_multiworld_guard(m, L)
    _, _, probs = graph.edge_list()
    base = L + 1
    for start in range(0, total, _WORLD_CHUNK):
        stop = min(start + _WORLD_CHUNK, total)
        idx = np.arange(start, stop, dtype=np.int64)
        alpha = np.empty((stop - start, m), dtype=np.int8)
        x = idx
        for e in range(m):
            alpha[:, e] = x % base
            x = x // base
        pr = np.ones(stop - start)
        for e in range(m):
            p = float(probs[e])
            a = alpha[:, e]
            pr *= p ** a.astype(np.float64)
            pr *= np.where(a < L, 1.0 - p, 1.0)
        yield alpha, pr


def multiworld_total_probability(graph, L):
    """Sum of probabilities over every multi-world (should be 1)."""
    return float(sum(pr.sum() for _, pr in _world_chunks(graph, L)))


def embedded_walks_probability(graph, walks, L):
    """Probability that every one of ``walks`` is embedded in a random
    multi-world, by brute-force enumeration (reference for the closed
    forms)."""
    edge_index = _edge_index(graph)
    mults = [walk_multiplicities(graph, w, edge_index) for w in walks]
    total = 0.0
    for alpha, pr in _world_chunks(graph, L):
        ok = np.ones(len(alpha), dtype=bool)
        for mv in mults:
            ok &= (alpha >= mv).all(axis=1)
        total += float(pr[ok].sum())
    return total


def embedded_count_distribution(graph, u, v, L):
    """Distribution of how many u->v walks a random multi-world embeds.

    Returns a dict count -> probability mass for counts >= 1. The mass at
    count i, weighted by 1 and by i respectively, reconstructs the exact
    pair influence and the walk score.
    """
    edge_index = _edge_index(graph)
    walks = enumerate_walks(graph, u, L, end=v)
    mults = [walk_multiplicities(graph, w, edge_index) for w in walks]
    dist = {}
    for alpha, pr in _world_chunks(graph, L):
        counts = np.zeros(len(alpha), dtype=np.int64)
        for mv in mults:
            counts += (alpha >= mv).all(axis=1)
        for c in np.unique(counts):
            if c > 0:
                dist[int(c)] = dist.get(int(c), 0.0) + float(pr[counts == c].sum())
    return dist


# -- base possible worlds ------------------------------------------------------


class WorldTable:
    """Per-world reachability over all 2^m base possible worlds.

    Builds, for every vertex u, a bitmask per world of the vertices
    reachable from u (optionally within a bounded number of hops). Spread
    and pair-influence queries for arbitrary seed sets are then cheap,
    which is what makes exhaustive-optimal comparisons feasible.
    """

    def __init__(self, graph, hops=None, max_edges=MAX_BASE_EDGES):
        if graph.m > max_edges:
            raise CapacityError(
                f"{graph.m} edges exceeds the {max_edges}-edge world "
                "enumeration guard")
        if graph.n > 64:
            raise CapacityError("world table limited to 64 vertices")
        self.graph = graph
        self.n = graph.n
        m = graph.m
        count = 1 << m
        if count * max(graph.n, 1) > (1 << 24):
            raise CapacityError("world table would exceed memory guard")
        s, t, p = graph.edge_list()
        idx = np.arange(count, dtype=np.int64)
        present = np.empty((count, m), dtype=bool)
        for e in range(m):
            present[:, e] = (idx >> e) & 1 == 1
        probs = np.ones(count)
        for e in range(m):
            pe = float(p[e])
            probs *= np.where(present[:, e], pe, 1.0 - pe)
        self.world_probs = probs
        self._present = present
        self._edges = [(int(a), int(b)) for a, b in zip(s, t)]

        self.closure = np.empty((graph.n, count), dtype=np.uint64)
        limit = graph.n if hops is None else min(hops, graph.n)
        for u in range(graph.n):
            reach = np.full(count, np.uint64(1) << np.uint64(u),
                            dtype=np.uint64)
            for _ in range(limit):
                prev = reach
                reach = prev.copy()
                for e, (a, b) in enumerate(self._edges):
                    hit = present[:, e] & (
                        (prev >> np.uint64(a)) & np.uint64(1)).astype(bool)
                    reach[hit] |= np.uint64(1) << np.uint64(b)
                if np.array_equal(reach, prev):
                    break
            self.closure[u] = reach

    def seed_influence(self, seeds):
        """Expected number of vertices reachable from the seed set."""
        seeds = list(seeds)
        if not seeds:
            return 0.0
        union = self.closure[seeds[0]].copy()
        for s in seeds[1:]:
            union |= self.closure[s]
        return float(self.world_probs @ np.bitwise_count(union))

    def pair_influence(self, u, v):
        """Probability that v is reachable from u."""
        hit = (self.closure[u] >> np.uint64(v)) & np.uint64(1)
        return float(self.world_probs @ hit.astype(np.float64))

    def single_influences(self):
        """Expected spread of each singleton seed set, as an array."""
        return np.array([self.seed_influence([u]) for u in range(self.n)])


def exact_seed_influence(graph, seeds):
    """Expected cascade size from ``seeds``: sum over base worlds of
    Pr(world) * |reachable set| (seeds count themselves)."""
    return WorldTable(graph).seed_influence(seeds)


# -- pair influence, three routes ---------------------------------------------


def pair_influence_walks(graph, u, v, L):
    """Inclusion-exclusion over all u->v walks of length <= L."""
    edge_index = _edge_index(graph)
    walks = enumerate_walks(graph, u, L, end=v)
    h = len(walks)
    if h > MAX_IE_WALKS:
        raise CapacityError(
            f"{h} walks between pair exceeds inclusion-exclusion guard")
    mults = [walk_multiplicities(graph, w, edge_index) for w in walks]
    _, _, probs = graph.edge_list()
    probs = probs.astype(np.float64)
    total = 0.0
    for r in range(1, h + 1):
        sign = 1.0 if r % 2 == 1 else -1.0
        for combo in itertools.combinations(range(h), r):
            mv = mults[combo[0]]
            for i in combo[1:]:
                mv = np.maximum(mv, mults[i])
            total += sign * float(np.prod(probs ** mv))
    return total


def pair_influence_worlds(graph, u, v, L):
    """Multi-world enumeration: mass of worlds embedding any u->v walk."""
    edge_index = _edge_index(graph)
    walks = enumerate_walks(graph, u, L, end=v)
    mults = [walk_multiplicities(graph, w, edge_index) for w in walks]
    total = 0.0
    for alpha, pr in _world_chunks(graph, L):
        ok = np.zeros(len(alpha), dtype=bool)
        for mv in mults:
            ok |= (alpha >= mv).all(axis=1)
        total += float(pr[ok].sum())
    return total


def pair_influence_bounded_reach(graph, u, v, L, table=None):
    """Base-world enumeration of hop-bounded reachability.

    A world admits an embedded u->v walk of length <= L exactly when v is
    within L hops of u in that world, so this grouped enumeration equals
    the multi-world route while needing only 2^m worlds. Only valid for
    u != v; cycles need bounded_cycle_influence.
    """
    if u == v:
        raise DomainError("use bounded_cycle_influence for u == v")
    if table is None:
        table = WorldTable(graph, hops=L)
    return table.pair_influence(u, v)


def bounded_cycle_influence(graph, u, L, table=None):
    """Probability that some length-<=L walk returns to u.

    A world embeds a u->u walk of length <= L exactly when it realizes
    some out-edge (u, x) together with a path x -> u of at most L-1 hops,
    so the event reduces to hop-bounded reachability from the neighbors.
    ``table`` must be built with hops=L-1 when supplied.
    """
    if table is None:
        table = WorldTable(graph, hops=max(L - 1, 0))
    s, t, _ = graph.edge_list()
    hit = np.zeros(len(table.world_probs), dtype=bool)
    for e, (a, b) in enumerate(zip(s, t)):
        if int(a) != u:
            continue
        back = ((table.closure[int(b)] >> np.uint64(u))
                & np.uint64(1)).astype(bool)
        hit |= table._present[:, e] & back
    return float(table.world_probs @ hit.astype(np.float64))


def exact_pair_influence(graph, u, v, L=None, route="auto"):
    """Probability that u influences v.

    With L=None this is plain reachability over base possible worlds
    (v == u gives 1.0). With an integer L it is the probability that some
    walk of length <= L from u to v is realized (v == u then measures
    length-<=L cycles through u). Routes: "walks" (inclusion-exclusion),
    "worlds" (multi-world enumeration), "reach" / "auto" (hop-bounded
    base-world enumeration).
    """
    if u == v and L is None:
        return 1.0
    if L is None:
        return WorldTable(graph).pair_influence(u, v)
    if route == "walks":
        return pair_influence_walks(graph, u, v, L)
    if route == "worlds":
        return pair_influence_worlds(graph, u, v, L)
    if route in ("reach", "auto"):
        if u == v:
            return bounded_cycle_influence(graph, u, L)
        return pair_influence_bounded_reach(graph, u, v, L)
    raise ValueError(f"unknown route {route!r}")


# -- gap report ---------------------------------------------------------------


@dataclass
class InfluenceGapReport:
    """Exact per-pair walk scores vs. bounded influence for one source.

    pair_influence[v] is the probability that some length-<=L walk u->v is
    realized; walk_scores[v] sums realization probabilities over those
    walks (counting multiply-realized worlds once per walk), so the gap
    is non-negative and bounded by p_max^3 * h * 2^h per target.
    """

    source: int
    max_walk_length: int
    pair_influence: dict = field(default_factory=dict)
    walk_scores: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    walk_counts: dict = field(default_factory=dict)
    p_max: float = 0.0

    @property
    def influence_total(self):
        return sum(self.pair_influence.values())

    @property
    def score_total(self):
        return sum(self.walk_scores.values())


def influence_gap_report(graph, u, L, table=None, cycle_table=None):
    """Build the exact score-vs-influence report for source u.

    ``table`` must be hop-bounded at L and ``cycle_table`` at L-1 when
    supplied (both are built on demand otherwise).
    """
    if table is None:
        table = WorldTable(graph, hops=L)
    score_total, per_target = walk_score(graph, u, L)
    report = InfluenceGapReport(source=u, max_walk_length=L)
    report.p_max = float(graph.out_probs.max()) if graph.m else 0.0
    for v, w in per_target.items():
        if v == u:
            if cycle_table is None:
                cycle_table = WorldTable(graph, hops=max(L - 1, 0))
            inf = bounded_cycle_influence(graph, u, L, table=cycle_table)
        else:
            inf = table.pair_influence(u, v)
        report.pair_influence[v] = inf
        report.walk_scores[v] = w
        report.gaps[v] = w - inf
        report.walk_counts[v] = len(enumerate_walks(graph, u, L, end=v))
    return report


def verification_battery(graph, L):
    """Run every exact check this module supports against one small graph.

    Cross-validates the closed forms against brute-force enumeration and
    the production score/update engines against the oracles. Returns a
    JSON-friendly report with one pass/fail row per check. Raises
    CapacityError if the graph exceeds the enumeration guards.
    """
    from .scores import score_est, walk_pro
    from .update import BasicGreedy, LazyEngine

    checks = []

    def add(name, passed, detail=""):
        checks.append({"name": name, "passed": bool(passed),
                       "detail": detail})

    table = WorldTable(graph, hops=L)
    full_table = WorldTable(graph)

    total = multiworld_total_probability(graph, L)
    add("world_probabilities_sum_to_one", abs(total - 1.0) <= 1e-12,
        f"sum={total!r}")

    # closed-form walk probabilities vs enumeration
    worst = 0.0
    joint_worst = 0.0
    for u in range(graph.n):
        walks = enumerate_walks(graph, u, L)[:12]
        for walk in walks:
            closed = walk_probability(graph, walk)
            brute = embedded_walks_probability(graph, [walk], L)
            worst = max(worst, abs(closed - brute))
        for pair in zip(walks, walks[1:]):
            closed = multi_walk_probability(graph, pair)
            brute = embedded_walks_probability(graph, list(pair), L)
            joint_worst = max(joint_worst, abs(closed - brute))
    add("walk_probability_closed_form", worst <= 1e-10, f"max_err={worst:.2e}")
    add("joint_walk_probability_closed_form", joint_worst <= 1e-10,
        f"max_err={joint_worst:.2e}")

    # pair influence routes and count-distribution identities
    cycle_table = WorldTable(graph, hops=max(L - 1, 0))
    route_worst = 0.0
    ident_worst = 0.0
    gap_ok = True
    for u in range(graph.n):
        _, per_target = walk_score(graph, u, L)
        for v, w_score in per_target.items():
            walks = enumerate_walks(graph, u, L, end=v)
            if v == u:
                reach = bounded_cycle_influence(graph, u, L,
                                                table=cycle_table)
            else:
                reach = table.pair_influence(u, v)
            if len(walks) <= MAX_IE_WALKS:
                ie = pair_influence_walks(graph, u, v, L)
                route_worst = max(route_worst, abs(ie - reach))
            mw = pair_influence_worlds(graph, u, v, L)
            route_worst = max(route_worst, abs(mw - reach))
            dist = embedded_count_distribution(graph, u, v, L)
            ident_worst = max(
                ident_worst,
                abs(sum(dist.values()) - reach),
                abs(sum(i * x for i, x in dist.items()) - w_score))
            eps = w_score - reach
            h = len(walks)
            p_max = float(graph.out_probs.max()) if graph.m else 0.0
            if not (-1e-10 <= eps <= p_max ** 3 * h * 2.0 ** h + 1e-10):
                gap_ok = False
    add("pair_influence_routes_agree", route_worst <= 1e-10,
        f"max_err={route_worst:.2e}")
    add("count_distribution_identities", ident_worst <= 1e-10,
        f"max_err={ident_worst:.2e}")
    add("score_influence_gap_bounds", gap_ok)

    # removal-gap identities for every vertex
    removal_ok = True
    for w in range(graph.n):
        rep = out_edge_removal_gap(graph, w, L)
        for row in rep["rows"]:
            if not (-1e-12 <= row["influence_gap"] <= 1.0 + 1e-12):
                removal_ok = False
            if not (-1e-10 <= row["excess_over_bounded_reach"]
                    <= row["excess_bound"] + 1e-10):
                removal_ok = False
    add("out_edge_removal_gap_bounds", removal_ok)

    # production scores vs enumeration
    vectors = score_est(graph, L)
    worst = 0.0
    for u in range(graph.n):
        total_u, _ = walk_score(graph, u, L)
        worst = max(worst, abs(vectors.total[u] - total_u))
    add("score_est_matches_walk_enumeration", worst <= 1e-10,
        f"max_err={worst:.2e}")

    worst = 0.0
    for w in range(graph.n):
        cols = walk_pro(graph, L, w)
        for j in range(1, L + 1):
            ref = {}
            for u in range(graph.n):
                acc = sum(walk_probability(graph, wk)
                          for wk in enumerate_walks(graph, u, L, end=w)
                          if len(wk) == j + 1)
                if acc:
                    ref[u] = acc
            keys = set(ref) | set(cols.columns[j - 1])
            for u in keys:
                worst = max(worst, abs(ref.get(u, 0.0)
                                       - cols.columns[j - 1].get(u, 0.0)))
    add("walk_columns_match_enumeration", worst <= 1e-12,
        f"max_err={worst:.2e}")

    # incremental updates vs recompute, basic vs lazy
    k = min(3, graph.n)
    basic = BasicGreedy(graph, L)
    lazy = LazyEngine(graph, L)
    upd_worst = 0.0
    seeds_match = True
    for _ in range(k):
        wb = basic.step()
        wl, _ = lazy.run_iteration()
        seeds_match &= (wb == wl)
        residual = score_est(graph.drop_out_edges(basic.seeds), L)
        for u in range(graph.n):
            if u in basic.seeds:
                continue
            upd_worst = max(upd_worst,
                            abs(basic.vectors.total[u] - residual.total[u]))
        forced = lazy.fully_updated_scores()
        for u in range(graph.n):
            if not lazy.is_seed[u]:
                upd_worst = max(upd_worst,
                                abs(forced[u] - residual.total[u]))
    add("incremental_update_matches_recompute", upd_worst <= 1e-9,
        f"max_err={upd_worst:.2e}")
    add("basic_and_lazy_agree_on_seeds", seeds_match)

    # spread sanity: exact spread of the full vertex set is n
    add("full_seed_spread_equals_n",
        abs(full_table.seed_influence(range(graph.n)) - graph.n) <= 1e-9)

    return {
        "n": graph.n,
        "m": graph.m,
        "L": L,
        "all_passed": all(c["passed"] for c in checks),
        "checks": checks,
    }


def out_edge_removal_gap(graph, w, L):
    """Compare removing all edges of w against removing only its out-edges.

    For every u != w the influence difference equals the probability that
    u still reaches w in the out-edges-removed graph (so it lies in
    [0, 1]), while the walk-score difference equals the walk score into w.
    The two differences disagree by exactly the score-vs-influence gap at
    (u, w), which obeys the p_max^3 * h * 2^h walk-count bound. (The raw
    score difference itself does NOT obey that bound: a single length-1
    walk already gives a difference of P(u, w) > 2 p_max^3 for any
    p < 0.7, so only the difference-of-differences form is certified.)
    """
    g1 = graph.drop_all_edges([w])
    g2 = graph.drop_out_edges([w])
    t1, t2 = WorldTable(g1), WorldTable(g2)
    t2_hop = WorldTable(g2, hops=L)
    p_max = float(graph.out_probs.max()) if graph.m else 0.0
    rows = []
    for u in range(graph.n):
        if u == w:
            continue
        i1, i2 = t1.seed_influence([u]), t2.seed_influence([u])
        s1, _ = walk_score(g1, u, L)
        s2, _ = walk_score(g2, u, L)
        h_uw = len(enumerate_walks(g2, u, L, end=w))
        influence_gap = abs(i1 - i2)
        score_gap = abs(s1 - s2)
        bounded_reach = t2_hop.pair_influence(u, w) if u != w else 0.0
        rows.append({
            "u": u,
            "influence_full_removal": i1,
            "influence_out_only": i2,
            "influence_gap": influence_gap,
            "score_gap": score_gap,
            "walks_to_w": h_uw,
            "excess_over_bounded_reach": score_gap - bounded_reach,
            "excess_bound": p_max ** 3 * h_uw * 2.0 ** h_uw,
        })
    return {"w": w, "p_max": p_max, "rows": rows}
