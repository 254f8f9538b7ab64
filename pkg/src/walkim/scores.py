"""Walk-probability influence scores.

score_est computes, for every vertex, the per-hop score vectors
F_1..F_L (F_j[u] = total probability of length-j walks leaving u) with L
sparse matrix-vector products, keeping every hop vector because the
incremental updater consumes them. walk_pro runs the reverse traversal
that extracts the sparse columns A^j[*, w] (length-j walk probabilities
into a target w), which is what makes seed removal a local operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ScoreVectors:
    """Dense per-hop score vectors and their sum.

    per_hop[j-1][u] holds the total probability of length-j walks from u;
    total = sum of the hop vectors.
    """

    per_hop: list
    total: np.ndarray
    max_walk_length: int

    def copy(self):
        return ScoreVectors([f.copy() for f in self.per_hop],
                            self.total.copy(), self.max_walk_length)

    def nbytes(self):
        return self.total.nbytes + sum(f.nbytes for f in self.per_hop)


def score_est(graph, L):
    """Initial scores for all vertices via L rounds of propagation.

    F_j[u] = sum over out-neighbors v of P(u,v) * F_{j-1}[v], with the
    implicit F_0 = all-ones. Accumulation uses bincount over the canonical
    edge order, so sums are bit-reproducible run to run.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    n = graph.n
    rows = np.repeat(np.arange(n, dtype=np.int64), graph.out_degrees)
    per_hop = []
    prev = np.ones(n)
    for _ in range(L):
        contrib = graph.out_probs * prev[graph.out_indices]
        cur = np.bincount(rows, weights=contrib, minlength=n)
        per_hop.append(cur)
        prev = cur
    total = np.zeros(n)
    for f in per_hop:
        total += f
    return ScoreVectors(per_hop, total, L)


@dataclass
class WalkColumnSet:
    """Sparse columns A^j[*, w] for one target w, j = 1..L.

    columns[j-1] maps vertex u to the total probability of length-j walks
    from u to w that avoid the excluded vertices; zero entries are absent.
    """

    seed: int
    columns: list

    def value(self, j, u):
        return self.columns[j - 1].get(u, 0.0)

    def support(self):
        out = set()
        for col in self.columns:
            out.update(col)
        return out

    def entry_count(self):
        return sum(len(col) for col in self.columns)


def walk_pro(graph, L, w, excluded=frozenset()):
    """Reverse level-by-level traversal from w.

    Level j holds, per vertex u, the probability mass of length-j walks
    u -> w; level j+1 extends every entry along in-edges whose source is
    not excluded (walks through already-selected seeds contribute
    nothing). Levels are accumulated in ascending vertex order for
    deterministic floating-point results; a level spilling past n/8
    occupancy switches to a dense vector for that round.
    """
    n = graph.n
    in_indptr = graph.in_indptr
    in_indices = graph.in_indices
    in_probs = graph.in_probs
    columns = []
    level = {w: 1.0}
    dense_cut = max(8, n // 8)
    for _ in range(L):
        if len(level) > dense_cut:
            acc = np.zeros(n)
            for u in sorted(level):
                val = level[u]
                s, e = in_indptr[u], in_indptr[u + 1]
                nbrs = in_indices[s:e]
                acc_part = val * in_probs[s:e]
                np.add.at(acc, nbrs, acc_part)
            if excluded:
                acc[list(excluded)] = 0.0
            nz = np.flatnonzero(acc)
            nxt = {int(v): float(acc[v]) for v in nz}
        else:
            nxt = {}
            for u in sorted(level):
                val = level[u]
                s, e = in_indptr[u], in_indptr[u + 1]
                for v, p in zip(in_indices[s:e], in_probs[s:e]):
                    v = int(v)
                    if v in excluded:
                        continue
                    nxt[v] = nxt.get(v, 0.0) + val * float(p)
        columns.append(nxt)
        level = nxt
    return WalkColumnSet(seed=w, columns=columns)
