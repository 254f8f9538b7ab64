"""Directed influence graphs in dual-CSR form.

Vertices carry arbitrary non-negative integer labels that are remapped to
dense internal ids 0..n-1 in first-appearance order; all algorithms work on
internal ids and only the CLI layer translates back. Both edge directions
are stored (out-CSR for forward cascades / score propagation, in-CSR for
reverse walk traversal), sorted by neighbor id for deterministic iteration.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from ._mix import counter_uniforms, mix_key
from .errors import DomainError, EdgeListParseError

_CACHE_MAGIC = b"WIMG"
_CACHE_VERSION = 1


class InfluenceGraph:
    """Immutable directed graph with per-edge influence probabilities.

    Attributes:
        n, m: vertex and edge counts.
        out_indptr/out_indices/out_probs: CSR over out-edges, row = source.
        in_indptr/in_indices/in_probs: CSR over in-edges, row = target.
        labels: internal id -> external label (int64 array).
        prob_model: tag of the model that assigned probabilities, or None.
    """

    __slots__ = (
        "n", "m",
        "out_indptr", "out_indices", "out_probs",
        "in_indptr", "in_indices", "in_probs",
        "labels", "prob_model", "_label_to_id",
    )

    def __init__(self, n, sources, targets, probs, labels=None, prob_model=None,
                 _skip_checks=False):
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        probs = np.asarray(probs, dtype=np.float64)
        m = len(sources)
        if not (len(targets) == len(probs) == m):
            raise ValueError("edge array lengths differ")

        if not _skip_checks:
            if m:
                if sources.min() < 0 or targets.min() < 0 \
                        or sources.max() >= n or targets.max() >= n:
                    raise DomainError("edge endpoint outside 0..n-1")
                if np.any(sources == targets):
                    bad = int(sources[sources == targets][0])
                    raise DomainError(f"self-loop on vertex {bad}")
                if np.any(probs <= 0.0) or np.any(probs > 1.0):
                    raise DomainError("edge probability outside (0, 1]")

        # canonical order: ascending (source, target)
        order = np.lexsort((targets, sources))
        sources = sources[order]
        targets = targets[order]
        probs = probs[order]
        if m and not _skip_checks:
            dup = (sources[1:] == sources[:-1]) & (targets[1:] == targets[:-1])
            if np.any(dup):
                i = int(np.flatnonzero(dup)[0])
                raise DomainError(
                    f"duplicate edge ({sources[i]}, {targets[i]})")

        self.n = int(n)
        self.m = int(m)
        self.out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sources, minlength=n), out=self.out_indptr[1:])
        self.out_indices = targets
        self.out_probs = probs

        rorder = np.lexsort((sources, targets))
        self.in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(targets, minlength=n), out=self.in_indptr[1:])
        self.in_indices = sources[rorder]
        self.in_probs = probs[rorder]

        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        if len(self.labels) != n:
            raise ValueError("labels length != n")
        self.prob_model = prob_model
        self._label_to_id = None

    # -- id mapping -------------------------------------------------------

    def _mapping(self):
        if self._label_to_id is None:
            self._label_to_id = {int(l): i for i, l in enumerate(self.labels)}
        return self._label_to_id

    def to_id(self, label):
        try:
            return self._mapping()[int(label)]
        except KeyError:
            raise DomainError(f"unknown vertex label {label}") from None

    def to_ids(self, labels):
        return [self.to_id(l) for l in labels]

    def to_label(self, vid):
        return int(self.labels[vid])

    # -- adjacency access -------------------------------------------------

    def out_edges(self, u):
        """(neighbor ids, probabilities) of out-edges of u, sorted by id."""
        s, e = self.out_indptr[u], self.out_indptr[u + 1]
        return self.out_indices[s:e], self.out_probs[s:e]

    def in_edges(self, v):
        """(neighbor ids, probabilities) of in-edges of v, sorted by id."""
        s, e = self.in_indptr[v], self.in_indptr[v + 1]
        return self.in_indices[s:e], self.in_probs[s:e]

    @property
    def out_degrees(self):
        return np.diff(self.out_indptr)

    @property
    def in_degrees(self):
        return np.diff(self.in_indptr)

    def edge_list(self):
        """(sources, targets, probs) in canonical out-CSR order."""
        sources = np.repeat(np.arange(self.n, dtype=np.int64),
                            self.out_degrees)
        return sources, self.out_indices.copy(), self.out_probs.copy()

    def edge_probability(self, u, v):
        """P(u, v), or raise DomainError if (u, v) is not an edge."""
        nbrs, probs = self.out_edges(u)
        i = np.searchsorted(nbrs, v)
        if i == len(nbrs) or nbrs[i] != v:
            raise DomainError(f"({u}, {v}) is not an edge")
        return float(probs[i])

    def has_edge(self, u, v):
        nbrs, _ = self.out_edges(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    # -- derived graphs ---------------------------------------------------

    def drop_out_edges(self, vertices):
        """Copy with all out-edges of the given internal ids removed."""
        drop = np.zeros(self.n, dtype=bool)
        drop[list(vertices)] = True
        s, t, p = self.edge_list()
        keep = ~drop[s]
        return InfluenceGraph(self.n, s[keep], t[keep], p[keep],
                              labels=self.labels, prob_model=self.prob_model,
                              _skip_checks=True)

    def drop_all_edges(self, vertices):
        """Copy with every edge incident to the given internal ids removed."""
        drop = np.zeros(self.n, dtype=bool)
        drop[list(vertices)] = True
        s, t, p = self.edge_list()
        keep = ~(drop[s] | drop[t])
        return InfluenceGraph(self.n, s[keep], t[keep], p[keep],
                              labels=self.labels, prob_model=self.prob_model,
                              _skip_checks=True)

    # -- reporting --------------------------------------------------------

    def summary(self):
        return {
            "n": self.n,
            "m": self.m,
            "avg_out_degree": (self.m / self.n) if self.n else 0.0,
            "probability_model": self.prob_model,
        }

    def csr_nbytes(self):
        """Bytes held by the dual-CSR arrays (the graph itself)."""
        return sum(a.nbytes for a in (
            self.out_indptr, self.out_indices, self.out_probs,
            self.in_indptr, self.in_indices, self.in_probs, self.labels))

    def validate(self):
        """Full invariant check; raises AssertionError on violation."""
        assert self.m == len(self.out_indices) == len(self.in_indices)
        if self.m:
            assert 0.0 < self.out_probs.min() and self.out_probs.max() <= 1.0
        out_set = set()
        for u in range(self.n):
            nbrs, probs = self.out_edges(u)
            assert np.all(np.diff(nbrs) > 0), "out adjacency not sorted/unique"
            assert not np.any(nbrs == u), "self-loop"
            for v, p in zip(nbrs, probs):
                out_set.add((u, int(v), float(p)))
        in_set = set()
        for v in range(self.n):
            nbrs, probs = self.in_edges(v)
            assert np.all(np.diff(nbrs) > 0), "in adjacency not sorted/unique"
            for u, p in zip(nbrs, probs):
                in_set.add((int(u), v, float(p)))
        assert out_set == in_set, "dual CSR views disagree"
        return True

    def __repr__(self):
        return f"InfluenceGraph(n={self.n}, m={self.m}, model={self.prob_model})"


# -- probability models ----------------------------------------------------


@dataclass(frozen=True)
class ProbabilityModel:
    """How to assign influence probabilities to edges.

    kind: "wc" (1 / in-degree of the target), "tr" (uniform pick from
    {p_t, p_t^2, p_t^3} per edge), or "un" (constant p_u).
    """

    kind: str
    p_t: float = 0.1
    p_u: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("wc", "tr", "un"):
            raise DomainError(f"unknown probability model {self.kind!r}")
        if not (0.0 < self.p_t < 1.0):
            raise DomainError("p_t must lie in (0, 1)")
        if not (0.0 < self.p_u < 1.0):
            raise DomainError("p_u must lie in (0, 1)")


def assign_probabilities(graph, model):
    """Return a copy of ``graph`` with probabilities set by ``model``.

    The trivalency assignment hashes (rng_seed, canonical edge index), so it
    is reproducible and independent of construction order.
    """
    s, t, _ = graph.edge_list()
    if model.kind == "wc":
        d_in = graph.in_degrees
        probs = 1.0 / d_in[t]
    elif model.kind == "un":
        probs = np.full(graph.m, model.p_u)
    else:  # tr
        u = counter_uniforms(mix_key(model.rng_seed, 0x7472),
                             np.arange(graph.m))
        levels = np.array([model.p_t, model.p_t**2, model.p_t**3])
        probs = levels[np.floor(u * 3.0).astype(np.int64)]
    return InfluenceGraph(graph.n, s, t, probs, labels=graph.labels,
                          prob_model=model.kind, _skip_checks=True)


# -- text edge lists --------------------------------------------------------


def load_edge_list(source):
    """Parse an edge list ("u v" or "u v p" per line) into a graph.

    ``source`` may be a path, a text stream, or an iterable of lines.
    Lines starting with '#' or '%' are comments. Missing probability
    columns default to the 1.0 placeholder (assign a model afterwards).
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r") as f:
            return load_edge_list(f)
    if isinstance(source, str):  # pragma: no cover - guarded above
        source = io.StringIO(source)

    label_ids = {}
    srcs, dsts, probs = [], [], []
    for line_no, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#%":
            continue
        parts = stripped.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(
                f"expected 'u v' or 'u v p', got {stripped!r}", line_no)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(
                f"non-integer vertex label in {stripped!r}", line_no) from None
        if a < 0 or b < 0:
            raise EdgeListParseError(
                f"negative vertex label in {stripped!r}", line_no)
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise EdgeListParseError(
                    f"bad probability in {stripped!r}", line_no) from None
            if not (0.0 < p <= 1.0):
                raise DomainError(
                    f"line {line_no}: probability {p} outside (0, 1]")
        else:
            p = 1.0
        if a == b:
            raise DomainError(f"line {line_no}: self-loop on vertex {a}")
        for lbl in (a, b):
            if lbl not in label_ids:
                label_ids[lbl] = len(label_ids)
        srcs.append(label_ids[a])
        dsts.append(label_ids[b])
        probs.append(p)

    labels = np.fromiter(label_ids.keys(), dtype=np.int64, count=len(label_ids))
    return InfluenceGraph(len(label_ids), srcs, dsts, probs, labels=labels)


def write_edge_list(graph, target):
    """Write "u v p" lines (external labels, canonical order)."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w") as f:
            write_edge_list(graph, f)
            return
    s, t, p = graph.edge_list()
    lab = graph.labels
    for a, b, q in zip(s, t, p):
        target.write(f"{lab[a]} {lab[b]} {float(q)!r}\n")


# -- binary cache ------------------------------------------------------------


def write_binary_cache(graph, path):
    """Serialize the graph to a versioned little-endian binary cache."""
    s, t, p = graph.edge_list()
    with open(path, "wb") as f:
        f.write(_CACHE_MAGIC)
        header = np.array([_CACHE_VERSION, 0, graph.n, graph.m],
                          dtype="<u8")
        f.write(header.tobytes())
        f.write(graph.labels.astype("<i8").tobytes())
        f.write(graph.out_indptr.astype("<i8").tobytes())
        f.write(t.astype("<i8").tobytes())
        f.write(p.astype("<f8").tobytes())


def read_binary_cache(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _CACHE_MAGIC:
            raise EdgeListParseError("not a graph cache file (bad magic)")
        header = np.frombuffer(f.read(32), dtype="<u8")
        version, _, n, m = (int(x) for x in header)
        if version != _CACHE_VERSION:
            raise EdgeListParseError(f"unsupported cache version {version}")
        labels = np.frombuffer(f.read(8 * n), dtype="<i8")
        indptr = np.frombuffer(f.read(8 * (n + 1)), dtype="<i8")
        targets = np.frombuffer(f.read(8 * m), dtype="<i8")
        probs = np.frombuffer(f.read(8 * m), dtype="<f8")
    sources = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    return InfluenceGraph(n, sources, targets, probs, labels=labels,
                          _skip_checks=True)


def load_graph(path):
    """Open a graph file, auto-detecting binary cache vs text edge list."""
    with open(path, "rb") as f:
        magic = f.read(4)
    if magic == _CACHE_MAGIC:
        return read_binary_cache(path)
    return load_edge_list(path)


# -- synthetic graphs --------------------------------------------------------


def random_graph(n, m, seed, p_low=0.05, p_high=0.5):
    """Uniform random simple directed graph with m edges.

    Probabilities are drawn uniformly from [p_low, p_high]; reassign with
    a ProbabilityModel if a standard assignment is wanted.
    """
    if m > n * (n - 1):
        raise DomainError(f"cannot place {m} simple directed edges on {n} vertices")
    rng = np.random.default_rng(seed)
    keys = np.empty(0, dtype=np.int64)
    want = m
    while len(keys) < m:
        extra = max(1024, int(1.3 * want))
        u = rng.integers(0, n, size=extra, dtype=np.int64)
        v = rng.integers(0, n, size=extra, dtype=np.int64)
        cand = u * n + v
        cand = cand[u != v]
        keys = np.unique(np.concatenate([keys, cand]))
        want = m - len(keys)
    pick = rng.choice(len(keys), size=m, replace=False)
    keys = keys[np.sort(pick)]
    s, t = keys // n, keys % n
    probs = rng.uniform(p_low, p_high, size=m)
    return InfluenceGraph(n, s, t, probs, _skip_checks=True)
