"""Synchronous round-based execution with LOCAL/CONGEST accounting.

Structural primitives (components, balls, cluster decomposition) live here
too, shared by the algorithm modules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core, rng


class SimError(RuntimeError):
    pass


class RoundCapExceeded(SimError):
    def __init__(self, report):
        super().__init__(f"round cap exceeded after {report.rounds} rounds")
        self.report = report


class ClusterColorBudget(SimError):
    def __init__(self, achieved, budget):
        super().__init__(f"cluster coloring needs {achieved} colors, budget {budget}")
        self.achieved = achieved
        self.budget = budget


@dataclass
class SimMode:
    model: str = "LOCAL"  # LOCAL | CONGEST
    bandwidth_bits: int | None = None  # CONGEST only; default 4*log2(n)

    def __post_init__(self):
        if self.model not in ("LOCAL", "CONGEST"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "CONGEST" and self.bandwidth_bits is not None and self.bandwidth_bits < 1:
            raise ValueError("bandwidth_bits must be >= 1")

    def budget(self, n: int) -> int | None:
        if self.model == "LOCAL":
            return None
        if self.bandwidth_bits is not None:
            return self.bandwidth_bits
        return max(1, math.ceil(4 * math.log2(max(n, 2))))


LOCAL = SimMode("LOCAL")
CONGEST = SimMode("CONGEST")


@dataclass
class RunReport:
    rounds: int = 0
    bits_total: int = 0
    bits_max_edge_round: int = 0
    violations: int = 0
    seed: int = 0
    payload: dict = field(default_factory=dict)

    def add_round(self, per_edge_bits: int, n_messages: int, budget: int | None):
        """Account one synchronous round where n_messages directed messages of
        per_edge_bits each are sent."""
        self.rounds += 1
        if n_messages <= 0 or per_edge_bits <= 0:
            return
        self.bits_total += per_edge_bits * n_messages
        self.bits_max_edge_round = max(self.bits_max_edge_round, per_edge_bits)
        if budget is not None and per_edge_bits > budget:
            self.violations += n_messages

    def merge(self, other: "RunReport"):
        self.rounds += other.rounds
        self.bits_total += other.bits_total
        self.bits_max_edge_round = max(self.bits_max_edge_round, other.bits_max_edge_round)
        self.violations += other.violations

    def to_json(self) -> str:
        doc = {
            "rounds": self.rounds,
            "bits_total": self.bits_total,
            "bits_max_edge_round": self.bits_max_edge_round,
            "violations": self.violations,
            "seed": self.seed,
            "payload": self.payload,
        }
        return json.dumps(doc, sort_keys=True)


def payload_bits(payload) -> int:
    """Message size accounting: ints by bit length, bytes/str by 8 per char."""
    if payload is None:
        return 0
    if payload is True or payload is False:
        return 1
    if isinstance(payload, (int, np.integer)):
        return max(1, int(payload).bit_length())
    if isinstance(payload, float):
        return 64
    if isinstance(payload, (bytes, str)):
        return 8 * len(payload)
    if isinstance(payload, (list, tuple)):
        return sum(payload_bits(x) for x in payload)
    raise TypeError(f"cannot size payload of type {type(payload).__name__}")


def run_protocol(g, program, mode: SimMode, seed: int, max_rounds: int = 10_000,
                 node_salts: dict | None = None) -> RunReport:
    """Execute a per-node state machine in synchronous rounds.

    Message delivery is a barrier: everything sent in round r is visible in
    the inboxes of round r+1 and never earlier.  Per-node randomness comes
    from a stream keyed by (seed, node, round); `node_salts` can rebind a
    node's stream id, which must not affect any other component.
    """
    n = g.n
    budget = mode.budget(n)
    report = RunReport(seed=seed)
    states = [program.init(v, g) for v in range(n)]
    halted = [program.halted(v, states[v]) for v in range(n)]
    inboxes: list[list] = [[] for _ in range(n)]
    rnd = 0
    while not all(halted):
        if rnd >= max_rounds:
            report.rounds = rnd
            raise RoundCapExceeded(report)
        outboxes: list[dict] = [{} for _ in range(n)]
        for v in range(n):
            if halted[v]:
                continue
            salt = node_salts.get(v, v) if node_salts else v
            stream = rng.NodeStream(seed, salt, rnd)
            states[v], out = program.step(v, states[v], inboxes[v], stream, g)
            if out:
                nb = set(g.neighbors(v).tolist())
                for w, payload in out.items():
                    if w not in nb:
                        raise SimError(f"node {v} sent to non-neighbor {w}")
                outboxes[v] = out
        # barrier: deliver after every node computed
        round_bits = 0
        round_msgs = 0
        max_bits = 0
        inboxes = [[] for _ in range(n)]
        for v in range(n):
            for w in sorted(outboxes[v]):
                b = payload_bits(outboxes[v][w])
                round_bits += b
                round_msgs += 1
                max_bits = max(max_bits, b)
                inboxes[w].append((v, outboxes[v][w]))
        report.rounds += 1
        report.bits_total += round_bits
        report.bits_max_edge_round = max(report.bits_max_edge_round, max_bits)
        if budget is not None:
            for v in range(n):
                for w in outboxes[v]:
                    if payload_bits(outboxes[v][w]) > budget:
                        report.violations += 1
        rnd += 1
        for v in range(n):
            if not halted[v]:
                halted[v] = program.halted(v, states[v])
    return report


def connected_components(g, subset=None):
    """Maximal connected pieces of g[subset], as sorted node arrays."""
    mask = np.zeros(g.n, dtype=bool)
    if subset is None:
        mask[:] = True
    else:
        idx = np.asarray(list(subset), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= g.n):
            raise ValueError("subset contains unknown node ids")
        mask[idx] = True
    labels = _core.cc_labels(g.indptr, g.indices, mask)
    ncomp = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    return [np.flatnonzero(labels == c) for c in range(ncomp)]


def ball(g, v: int, r: int):
    """All nodes at hop distance <= r from v."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    dist = _core.bfs_dist(g.indptr, g.indices, np.array([v], dtype=np.int64), r)
    return np.flatnonzero(dist >= 0)


@dataclass
class ClusterDecomposition:
    clusters: list  # list of sorted node arrays
    centers: list
    colors: list  # per-cluster color in [q_colors]
    q_colors: int
    separation: int
    radius_bound: int

    def color_classes(self):
        out = [[] for _ in range(self.q_colors)]
        for i, c in enumerate(self.colors):
            out[c].append(i)
        return out


def cluster_decompose(g, node_set, separation: int, q_colors: int,
                      radius_bound: int) -> ClusterDecomposition:
    """Ball-carving decomposition of `node_set` with greedy cluster coloring.

    Clusters are BFS balls (radius <= radius_bound) carved inside the yet
    uncovered part of the set, centered at the smallest uncovered id.  The
    cluster graph (clusters within `separation` hops in g) is colored
    greedily by ascending center id; needing more than q_colors fails so the
    caller can retry with a larger budget.
    """
    if separation < 1 or q_colors < 1:
        raise ValueError("separation and q_colors must be >= 1")
    target = np.zeros(g.n, dtype=bool)
    idx = np.asarray(list(node_set), dtype=np.int64)
    target[idx] = True
    remaining = target.copy()
    clusters = []
    centers = []
    while remaining.any():
        center = int(np.flatnonzero(remaining)[0])
        dist = _core.bfs_dist(g.indptr, g.indices, np.array([center], dtype=np.int64),
                              radius_bound, allowed=remaining)
        members = np.flatnonzero(dist >= 0)
        clusters.append(members)
        centers.append(center)
        remaining[members] = False
    # cluster adjacency: within `separation` hops in the host graph
    owner = np.full(g.n, -1, dtype=np.int64)
    for i, members in enumerate(clusters):
        owner[members] = i
    colors = []
    for i, members in enumerate(clusters):
        dist = _core.bfs_dist(g.indptr, g.indices, members, separation)
        near = np.unique(owner[(dist >= 0) & (owner >= 0)])
        used = {colors[j] for j in near if j < i}
        color = next(c for c in range(len(clusters) + 1) if c not in used)
        colors.append(color)
    achieved = max(colors) + 1 if colors else 0
    if achieved > q_colors:
        raise ClusterColorBudget(achieved, q_colors)
    return ClusterDecomposition(clusters, centers, colors, q_colors, separation, radius_bound)
