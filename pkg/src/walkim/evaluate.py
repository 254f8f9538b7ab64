"""Monte-Carlo spread estimation and the robustness/timing harness.

A spread estimate runs independent cascade simulations: starting from the
seed set, each newly activated vertex gets one chance per inactive
out-neighbor, succeeding with the edge probability. Edge outcomes are
drawn lazily (only when an attempt happens), which samples the same
distribution as materializing a whole possible world up front. All draws
come from counter-based streams keyed by (rng_seed, simulation index), so
results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._mix import counter_uniforms, mix_key
from .errors import DomainError
from .graph import assign_probabilities, ProbabilityModel

_BITMASK_LIMIT_N = 64
_BITMASK_LIMIT_M = 62


@dataclass
class SpreadEstimate:
    mean: float
    fraction_of_n: float
    simulations: int
    std_error: float
    rng_seed: int

    def as_dict(self):
        return {
            "mean_spread": self.mean,
            "fraction_of_n": self.fraction_of_n,
            "simulations": self.simulations,
            "std_error": self.std_error,
            "rng_seed": self.rng_seed,
        }


def mc_spread(graph, seeds, simulations, rng_seed, threads=1):
    """Estimate the expected cascade size of ``seeds`` (internal ids).

    Small graphs (n <= 64) use a vectorized per-world path: all edge
    outcomes of a simulation are drawn at once (same distribution, the
    cascade never re-examines an edge) and reachability runs on packed
    bitmasks. Larger graphs run a frontier cascade per simulation with
    lazily drawn attempts. Either way the estimate is reproducible for a
    fixed (graph, seeds, simulations, rng_seed).
    """
    seeds = sorted(set(int(s) for s in seeds))
    if not seeds:
        raise DomainError("seed set is empty")
    for s in seeds:
        if not (0 <= s < graph.n):
            raise DomainError(f"seed id {s} out of range")
    if simulations < 1:
        raise DomainError("simulations must be >= 1")

    if graph.n <= _BITMASK_LIMIT_N and graph.m <= _BITMASK_LIMIT_M:
        total, total_sq = _simulate_bitmask(graph, seeds, 0, simulations,
                                            rng_seed)
    elif threads > 1 and simulations >= 4 * threads:
        bounds = np.linspace(0, simulations, threads + 1, dtype=int)
        total = total_sq = 0.0
        with ProcessPoolExecutor(max_workers=threads) as pool:
            jobs = [pool.submit(_simulate_frontier, graph, seeds,
                                int(lo), int(hi), rng_seed)
                    for lo, hi in zip(bounds[:-1], bounds[1:])]
            for job in jobs:
                t, tsq = job.result()
                total += t
                total_sq += tsq
    else:
        total, total_sq = _simulate_frontier(graph, seeds, 0, simulations,
                                             rng_seed)

    mean = total / simulations
    if simulations > 1:
        var = max(0.0, (total_sq - simulations * mean * mean)
                  / (simulations - 1))
    else:
        var = 0.0
    return SpreadEstimate(
        mean=mean,
        fraction_of_n=mean / graph.n if graph.n else 0.0,
        simulations=simulations,
        std_error=float(np.sqrt(var / simulations)),
        rng_seed=rng_seed,
    )


def _simulate_bitmask(graph, seeds, lo, hi, rng_seed):
    """Simulations lo..hi-1 with per-simulation full edge draws."""
    m = graph.m
    key = mix_key(rng_seed, 0xCA5CADE)
    seed_mask = 0
    for s in seeds:
        seed_mask |= 1 << s
    s_arr, t_arr, p = graph.edge_list()
    # per-vertex outgoing (edge bit, target) lists
    out = [[] for _ in range(graph.n)]
    for e, (a, b) in enumerate(zip(s_arr, t_arr)):
        out[int(a)].append((1 << e, int(b)))
    count = hi - lo
    if m:
        counters = (np.arange(lo, hi, dtype=np.int64)[:, None] * m
                    + np.arange(m, dtype=np.int64)[None, :])
        draws = counter_uniforms(key, counters) < p[None, :]
        powers = 1 << np.arange(m, dtype=np.int64)
        masks = (draws @ powers).astype(np.int64)
    else:
        masks = np.zeros(count, dtype=np.int64)
    unique, counts = np.unique(masks, return_counts=True)

    total = total_sq = 0.0
    for mask, cnt in zip(unique, counts):
        mask = int(mask)
        active = seed_mask
        frontier = list(seeds)
        while frontier:
            nxt = []
            for u in frontier:
                for bit, v in out[u]:
                    if mask & bit and not active >> v & 1:
                        active |= 1 << v
                        nxt.append(v)
            frontier = nxt
        size = bin(active).count("1")
        total += cnt * size
        total_sq += cnt * size * size
    return total, total_sq


def _simulate_frontier(graph, seeds, lo, hi, rng_seed):
    """Simulations lo..hi-1 with lazy per-attempt draws."""
    indptr = graph.out_indptr
    indices = graph.out_indices
    probs = graph.out_probs
    seeds = np.asarray(seeds, dtype=np.int64)
    total = total_sq = 0.0
    for sim in range(lo, hi):
        key = mix_key(rng_seed, 0xCA5CADE, sim)
        active = np.zeros(graph.n, dtype=bool)
        active[seeds] = True
        frontier = seeds
        drawn = 0
        while len(frontier):
            starts = indptr[frontier]
            lens = indptr[frontier + 1] - starts
            width = int(lens.sum())
            if width == 0:
                break
            pos = (np.repeat(starts + lens - np.cumsum(lens), lens)
                   + np.arange(width))
            targets = indices[pos]
            u = counter_uniforms(key, drawn + np.arange(width))
            drawn += width
            hits = (u < probs[pos]) & ~active[targets]
            frontier = np.unique(targets[hits])
            active[frontier] = True
        size = int(active.sum())
        total += size
        total_sq += size * size
    return total, total_sq


def robustness_bench(graph, kind, grid, k, L=3, rng_seed=0, warmup=True):
    """Time the walk-greedy selection across a probability-parameter grid.

    For each grid value the chosen model ("tr" varies p_t, "un" varies
    p_u) reassigns probabilities on the same topology, then one full
    selection run is timed and its peak auxiliary memory recorded. An
    untimed warmup run on the first grid value absorbs one-off costs so
    the reported ratio reflects the algorithm, not interpreter warmup.
    """
    from .select import walk_greedy

    if kind not in ("tr", "un"):
        raise DomainError("robustness grid applies to the tr or un models")
    rows = []
    for i, p in enumerate(grid):
        if kind == "tr":
            model = ProbabilityModel("tr", p_t=p, rng_seed=rng_seed)
        else:
            model = ProbabilityModel("un", p_u=p, rng_seed=rng_seed)
        annotated = assign_probabilities(graph, model)
        if warmup and i == 0:
            walk_greedy(annotated, k, L)
        t0 = time.perf_counter()
        result = walk_greedy(annotated, k, L)
        seconds = time.perf_counter() - t0
        rows.append({
            "p": float(p),
            "seconds": seconds,
            "aux_bytes": result.peak_aux_bytes,
            "seeds": result.seeds[:10],
        })
    report = {"model": kind, "k": k, "L": L, "grid": rows}
    if rows:
        times = [r["seconds"] for r in rows]
        mems = [r["aux_bytes"] for r in rows]
        report["time_ratio"] = max(times) / min(times)
        report["memory_ratio"] = max(mems) / max(1, min(mems))
    return report
