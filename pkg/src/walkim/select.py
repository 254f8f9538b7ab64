"""Greedy seed-selection drivers.

walk_greedy is the production path: initial scores from L rounds of
propagation, then one lazy incremental update per selected seed. The
whole path is deterministic (ties resolve to the smallest internal id).
mc_greedy is the simulation baseline: CELF-style lazy re-evaluation of
Monte-Carlo marginal gains, deterministic for a fixed rng_seed.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from ._mix import mix_key
from .errors import DomainError
from .evaluate import mc_spread
from .update import LazyEngine


@dataclass
class SeedSelection:
    """Result of a greedy run, reported in external vertex labels."""

    seeds: list
    internal_seeds: list
    per_iteration: list
    config: dict
    truncated: bool = False
    wall_seconds: float = 0.0
    peak_aux_bytes: int = 0
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "seeds": list(self.seeds),
            "per_iteration": [dict(row) for row in self.per_iteration],
            "config": dict(self.config),
            "truncated": self.truncated,
            "wall_seconds": self.wall_seconds,
            "peak_aux_bytes": self.peak_aux_bytes,
        }


def walk_greedy(graph, k, L=3, collect_diagnostics=False):
    """Select k seeds by walk-score greedy with lazy incremental updates."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if L < 1:
        raise DomainError("L must be >= 1")
    if graph.n == 0:
        raise DomainError("graph has no vertices")
    truncated = k > graph.n
    rounds = min(k, graph.n)
    start = time.perf_counter()
    engine = LazyEngine(graph, L)
    peak = engine.aux_memory_bytes()
    rows = []
    for _ in range(rounds):
        w, st = engine.run_iteration()
        peak = max(peak, engine.aux_memory_bytes())
        rows.append({
            "seed": graph.to_label(w),
            "score": st.score,
            "touched": st.touched,
            "skipped": st.skipped,
            "seconds": st.seconds,
        })
    wall = time.perf_counter() - start
    return SeedSelection(
        seeds=[graph.to_label(w) for w in engine.seeds],
        internal_seeds=list(engine.seeds),
        per_iteration=rows,
        config={"algorithm": "walk-greedy", "k": k, "L": L},
        truncated=truncated,
        wall_seconds=wall,
        peak_aux_bytes=peak,
        diagnostics=engine.diagnostics() if collect_diagnostics else {},
    )


def mc_greedy(graph, k, simulations=10_000, rng_seed=0):
    """CELF-style greedy on Monte-Carlo spread estimates.

    Marginal gains are estimated by forward simulation; stale heap entries
    are re-evaluated only when they surface (submodularity makes the
    cached gain an upper bound). Every estimate draws from a stream keyed
    by (rng_seed, running evaluation id), so the full run is reproducible.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if simulations < 1:
        raise DomainError("simulations must be >= 1")
    if graph.n == 0:
        raise DomainError("graph has no vertices")
    truncated = k > graph.n
    rounds = min(k, graph.n)
    start = time.perf_counter()

    eval_id = 0

    def estimate(seed_ids):
        nonlocal eval_id
        stream = int(mix_key(rng_seed, 0xCE1F, eval_id)) & (2**63 - 1)
        eval_id += 1
        return mc_spread(graph, seed_ids, simulations, stream).mean

    heap = []
    for v in range(graph.n):
        gain = estimate([v])
        heapq.heappush(heap, (-gain, v, 0))

    seeds = []
    current_spread = 0.0
    rows = []
    while len(seeds) < rounds:
        it_start = time.perf_counter()
        evaluations = 0
        while True:
            neg_gain, v, at_round = heapq.heappop(heap)
            if at_round == len(seeds):
                break
            gain = estimate(seeds + [v]) - current_spread
            evaluations += 1
            heapq.heappush(heap, (-gain, v, len(seeds)))
        seeds.append(v)
        current_spread += -neg_gain
        rows.append({
            "seed": graph.to_label(v),
            "gain": -neg_gain,
            "evaluations": evaluations,
            "seconds": time.perf_counter() - it_start,
        })
    return SeedSelection(
        seeds=[graph.to_label(w) for w in seeds],
        internal_seeds=seeds,
        per_iteration=rows,
        config={"algorithm": "mc-greedy", "k": k,
                "simulations": simulations, "rng_seed": rng_seed},
        truncated=truncated,
        wall_seconds=time.perf_counter() - start,
    )
