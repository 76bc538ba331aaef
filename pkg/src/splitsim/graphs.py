"""Graph and bipartite-instance representation, generators, and translations.

Node ids are dense integers [0, n); external ids from edge-list files are
compacted at load and kept in a mapping.  Adjacency is CSR with per-node
sorted neighbor lists, immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _csr_from_pairs(n, us, vs):
    """Build sorted CSR adjacency from undirected edge endpoint arrays."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    heads = np.concatenate([us, vs])
    tails = np.concatenate([vs, us])
    order = np.lexsort((tails, heads))
    heads = heads[order]
    tails = tails[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, heads + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, tails.astype(np.int32)


class Graph:
    """Undirected simple graph over dense node ids."""

    def __init__(self, n, indptr, indices, external_ids=None):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.degrees = np.diff(indptr)
        self.max_degree = int(self.degrees.max()) if self.n else 0
        self.external_ids = external_ids

    @classmethod
    def from_edges(cls, n, us, vs, external_ids=None):
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size:
            if us.min() < 0 or vs.min() < 0 or us.max() >= n or vs.max() >= n:
                raise GraphError("endpoint out of range")
            if np.any(us == vs):
                bad = int(us[us == vs][0])
                raise GraphError(f"self-loop at node {bad}")
            lo = np.minimum(us, vs)
            hi = np.maximum(us, vs)
            keys = np.unique(lo * np.int64(max(n, 1)) + hi)
            us = keys // max(n, 1)
            vs = keys % max(n, 1)
        indptr, indices = _csr_from_pairs(n, us, vs)
        return cls(n, indptr, indices, external_ids)

    @property
    def m(self):
        return int(self.indptr[-1]) // 2

    def neighbors(self, v):
        return self.indices[self.indptr[v]: self.indptr[v + 1]]

    def edges(self):
        """Edge endpoint arrays with u < v, in lexicographic order."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        cols = self.indices.astype(np.int64)
        keep = rows < cols
        return rows[keep], cols[keep]

    def validate(self):
        """Full-scan check of the type invariants; raises on violation."""
        for v in range(self.n):
            nb = self.neighbors(v)
            if np.any(np.diff(nb) <= 0):
                raise GraphError(f"adjacency of {v} not sorted/deduplicated")
            if np.any(nb == v):
                raise GraphError(f"self-loop at {v}")
        us, vs = self.edges()
        present = set(zip(us.tolist(), vs.tolist()))
        for v in range(self.n):
            for w in self.neighbors(v).tolist():
                if (min(v, w), max(v, w)) not in present:
                    raise GraphError("asymmetric adjacency")
        if self.n and self.max_degree != int(self.degrees.max()):
            raise GraphError("stale max-degree cache")
        return True


class BipartiteGraph:
    """Bipartite instance: left event nodes [0, nL), right variable nodes [nL, nL+nR)."""

    def __init__(self, n_left, n_right, indptr, indices):
        self.n_left = int(n_left)
        self.n_right = int(n_right)
        self.n = self.n_left + self.n_right
        self.indptr = indptr
        self.indices = indices
        self.degrees = np.diff(indptr)
        self.delta_left = int(self.degrees[: self.n_left].max()) if n_left else 0
        self.delta_right = int(self.degrees[self.n_left:].max()) if n_right else 0
        self.max_degree = max(self.delta_left, self.delta_right)

    @classmethod
    def from_edges(cls, n_left, n_right, lefts, rights):
        """Build from left-node / right-node endpoint arrays (right ids are offset)."""
        lefts = np.asarray(lefts, dtype=np.int64)
        rights = np.asarray(rights, dtype=np.int64)
        if lefts.size:
            if lefts.min() < 0 or lefts.max() >= n_left:
                raise GraphError("left endpoint out of range")
            if rights.min() < n_left or rights.max() >= n_left + n_right:
                raise GraphError("right endpoint out of range")
            keys = np.unique(lefts * np.int64(n_left + n_right) + rights)
            lefts = keys // (n_left + n_right)
            rights = keys % (n_left + n_right)
        indptr, indices = _csr_from_pairs(n_left + n_right, lefts, rights)
        return cls(n_left, n_right, indptr, indices)

    def neighbors(self, v):
        return self.indices[self.indptr[v]: self.indptr[v + 1]]

    def right_ids(self):
        return np.arange(self.n_left, self.n, dtype=np.int64)

    def validate(self):
        for v in range(self.n_left):
            nb = self.neighbors(v)
            if nb.size and (nb.min() < self.n_left):
                raise GraphError("edge inside the left side")
        for v in range(self.n_left, self.n):
            nb = self.neighbors(v)
            if nb.size and (nb.max() >= self.n_left):
                raise GraphError("edge inside the right side")
        dl = int(self.degrees[: self.n_left].max()) if self.n_left else 0
        dr = int(self.degrees[self.n_left:].max()) if self.n_right else 0
        if (dl, dr) != (self.delta_left, self.delta_right):
            raise GraphError("stale side-degree cache")
        return True


@dataclass
class GraphGenSpec:
    model: str  # gnp-capped | d-regular | edge-list-file
    n: int = 0
    degree: int = 0
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.model not in ("gnp-capped", "d-regular", "edge-list-file"):
            raise GraphError(f"unknown model {self.model!r}")
        if self.n < 0:
            raise GraphError("n must be >= 0")
        if self.model != "edge-list-file" and self.n > 0 and self.degree >= self.n:
            raise GraphError("degree target must be < n")


def load_edge_list(text: str) -> Graph:
    """Parse 'u v' lines ('#' comments allowed) into a compacted Graph."""
    us, vs = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"expected 'u v', got {raw!r}", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(f"non-integer id in {raw!r}", line_no) from None
        if u < 0 or v < 0:
            raise EdgeListParseError(f"negative id in {raw!r}", line_no)
        if u == v:
            raise EdgeListParseError(f"self-loop at id {u}", line_no)
        us.append(u)
        vs.append(v)
    if not us:
        return Graph.from_edges(0, [], [])
    ext = np.unique(np.concatenate([us, vs]))
    lookup = {int(x): i for i, x in enumerate(ext)}
    cus = np.array([lookup[u] for u in us], dtype=np.int64)
    cvs = np.array([lookup[v] for v in vs], dtype=np.int64)
    return Graph.from_edges(len(ext), cus, cvs, external_ids=ext)


def dump_edge_list(g: Graph) -> str:
    us, vs = g.edges()
    return "".join(f"{u} {v}\n" for u, v in zip(us.tolist(), vs.tolist()))


def load_bipartite(text: str) -> BipartiteGraph:
    """Parse a bipartite file: header 'bipartite nL nR', then 'u v' lines."""
    lines = text.splitlines()
    header_no = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            header_no = line_no
            break
    if header_no is None:
        raise EdgeListParseError("missing 'bipartite nL nR' header", 1)
    parts = lines[header_no - 1].split("#", 1)[0].split()
    if len(parts) != 3 or parts[0] != "bipartite":
        raise EdgeListParseError("malformed bipartite header", header_no)
    n_left, n_right = int(parts[1]), int(parts[2])
    lefts, rights = [], []
    for line_no, raw in enumerate(lines[header_no:], start=header_no + 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"expected 'u v', got {raw!r}", line_no)
        u, v = int(parts[0]), int(parts[1])
        if v < u:
            u, v = v, u
        if not (0 <= u < n_left and n_left <= v < n_left + n_right):
            raise EdgeListParseError(f"edge {u} {v} does not cross sides", line_no)
        lefts.append(u)
        rights.append(v)
    return BipartiteGraph.from_edges(n_left, n_right, lefts, rights)


def dump_bipartite(b: BipartiteGraph) -> str:
    out = [f"bipartite {b.n_left} {b.n_right}\n"]
    for v in range(b.n_left):
        for w in b.neighbors(v).tolist():
            out.append(f"{v} {w}\n")
    return "".join(out)


def _decode_pair_index(idx, n):
    """Map flat index in [0, n(n-1)/2) to the pair (u, v), u < v, row-major."""
    # row u occupies a block of (n-1-u) pairs
    u = (2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * idx)) / 2
    u = np.floor(u).astype(np.int64)
    # float roundoff can land one row off; nudge back
    first = u * (2 * n - u - 1) // 2
    over = first > idx
    u[over] -= 1
    first = u * (2 * n - u - 1) // 2
    under = idx - first > n - 2 - u
    u[under] += 1
    first = u * (2 * n - u - 1) // 2
    v = idx - first + u + 1
    return u, v


def _gen_gnp_capped(n, target, seed):
    if n < 2 or target <= 0:
        return Graph.from_edges(n, [], [])
    p = target / (n - 1)
    total = n * (n - 1) // 2
    # geometric skipping over the flat pair index, in vectorized batches
    picks = []
    pos = -1
    counter = 0
    log1p = np.log1p(-p)
    while pos < total:
        batch = max(1024, int(total * p * 0.2))
        u = rng.uniform(seed, np.arange(counter, counter + batch), 0, rng.TAG_GRAPH_GEN)
        counter += batch
        skips = 1 + np.floor(np.log1p(-u) / log1p).astype(np.int64)
        steps = pos + np.cumsum(skips)
        picks.append(steps[steps < total])
        pos = int(steps[-1])
    idx = np.concatenate(picks) if picks else np.zeros(0, dtype=np.int64)
    us, vs = _decode_pair_index(idx, n)
    # enforce the hard degree cap by dropping random incident edges
    adj = [set() for _ in range(n)]
    for u, v in zip(us.tolist(), vs.tolist()):
        adj[u].add(v)
        adj[v].add(u)
    drops = 0
    for v in range(n):
        while len(adj[v]) > target:
            nb = sorted(adj[v])
            w = nb[rng.randint(seed, v, drops, rng.TAG_GRAPH_GEN + 1, len(nb))]
            drops += 1
            adj[v].discard(w)
            adj[w].discard(v)
    us = np.array([u for u in range(n) for w in adj[u] if w > u], dtype=np.int64)
    vs = np.array([w for u in range(n) for w in adj[u] if w > u], dtype=np.int64)
    return Graph.from_edges(n, us, vs)


def _gen_d_regular(n, d, seed):
    if n * d % 2 != 0:
        raise GraphError("d-regular graph needs n*d even")
    if d == 0 or n == 0:
        return Graph.from_edges(n, [], [])
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    keys = rng.mix(seed, np.arange(stubs.size), 0, rng.TAG_GRAPH_GEN)
    stubs = stubs[np.argsort(keys, kind="stable")]
    us = stubs[0::2].copy()
    vs = stubs[1::2].copy()
    # pairing may create self-loops or duplicates; repair by partner swaps
    npairs = us.size
    attempt = 0
    while True:
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        keys = lo * np.int64(n) + hi
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        dup = np.zeros(npairs, dtype=bool)
        dup[order[1:]] = sorted_keys[1:] == sorted_keys[:-1]
        bad = np.flatnonzero((us == vs) | dup)
        if bad.size == 0:
            break
        attempt += 1
        if attempt > 200 + 10 * npairs:
            raise GraphError("d-regular pairing failed to converge")
        swap_with = rng.randint(seed, bad, attempt, rng.TAG_GRAPH_GEN + 2, npairs)
        for b, s in zip(bad.tolist(), swap_with.tolist()):
            vs[b], vs[s] = vs[s], vs[b]
    return Graph.from_edges(n, us, vs)


def generate(spec: GraphGenSpec) -> Graph:
    """Deterministic-in-seed graph generation for the supported models."""
    if spec.model == "edge-list-file":
        with open(spec.path, "r", encoding="utf-8") as fh:
            return load_edge_list(fh.read())
    if spec.model == "d-regular":
        return _gen_d_regular(spec.n, spec.degree, spec.seed)
    return _gen_gnp_capped(spec.n, spec.degree, spec.seed)


def to_bipartite_split_instance(g: Graph) -> BipartiteGraph:
    """Split a plain graph into event (left) and variable (right) copies.

    Left copy i is adjacent to right copy j exactly when ij is an edge, so
    both copies of v keep degree d(v) and the side maxima equal the graph's
    max degree.
    """
    us, vs = g.edges()
    lefts = np.concatenate([us, vs])
    rights = np.concatenate([vs, us]) + g.n
    return BipartiteGraph.from_edges(g.n, g.n, lefts, rights)


def edge_incidence_instance(g: Graph) -> BipartiteGraph:
    """Events are the vertices, variables are the edges (each of degree 2)."""
    us, vs = g.edges()
    m = us.size
    eids = np.arange(m, dtype=np.int64) + g.n
    lefts = np.concatenate([us, vs])
    rights = np.concatenate([eids, eids])
    return BipartiteGraph.from_edges(g.n, m, lefts, rights)


def induced_subgraph(g: Graph, nodes=None, edges=None):
    """Induced subgraph on a node set, or the graph spanned by an edge set.

    Returns (subgraph, node_map) where node_map[i] is the original id of
    subgraph node i.
    """
    if (nodes is None) == (edges is None):
        raise GraphError("pass exactly one of nodes= or edges=")
    if nodes is not None:
        keep = np.unique(np.asarray(list(nodes), dtype=np.int64)) if len(nodes) else np.zeros(0, np.int64)
        if keep.size and (keep.min() < 0 or keep.max() >= g.n):
            raise GraphError("unknown node id in keep set")
        us, vs = g.edges()
        inside = np.zeros(g.n, dtype=bool)
        inside[keep] = True
        sel = inside[us] & inside[vs]
        us, vs = us[sel], vs[sel]
    else:
        all_us, all_vs = g.edges()
        eids = np.asarray(list(edges), dtype=np.int64) if len(edges) else np.zeros(0, np.int64)
        if eids.size and (eids.min() < 0 or eids.max() >= all_us.size):
            raise GraphError("unknown edge id in keep set")
        us, vs = all_us[eids], all_vs[eids]
        keep = np.unique(np.concatenate([us, vs])) if eids.size else np.zeros(0, np.int64)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    sub = Graph.from_edges(keep.size, remap[us], remap[vs])
    return sub, keep
