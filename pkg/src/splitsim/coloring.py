"""Applications: (1+eps)Delta edge coloring and (L,T)-list coloring.

Edge coloring partitions the edge set in up to two levels (uniform groups,
then bipartite splitting of each group's edge-incidence instance) and colors
every low-degree part with its own disjoint palette via a centralized
Vizing-fan base colorer.  List coloring sparsifies lists by bipartite
splitting, amplifies the list-vs-color-degree ratio with an activation
nibble, and finishes with Moser-Tardos on the pairwise conflict events.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core, lll, rng, sim, splitting
from .graphs import Graph, GraphError, edge_incidence_instance, generate, GraphGenSpec

log = logging.getLogger(__name__)


class ColoringError(RuntimeError):
    pass


class NibbleRetryExceeded(ColoringError):
    def __init__(self, iteration, violators):
        super().__init__(f"nibble iteration {iteration}: retry cap exceeded; "
                         f"{len(violators)} nodes violate a factor bound")
        self.violators = violators


class EmptyListError(ColoringError):
    pass


def _color_degree_counts(graph: Graph, lists, live_mask=None):
    """Vectorized color degrees.

    Returns (universe, membership, counts) where membership[v, j] says color
    universe[j] is in v's (live) list and counts[v, j] is the number of live
    neighbors whose lists contain universe[j].
    """
    n = graph.n
    live = np.ones(n, dtype=bool) if live_mask is None else live_mask
    sizes = np.array([lists[v].size if live[v] else 0 for v in range(n)], dtype=np.int64)
    total = int(sizes.sum())
    if total == 0:
        empty = np.zeros((n, 0), dtype=np.int64)
        return np.zeros(0, dtype=np.int64), empty.astype(bool), empty
    flat = np.concatenate([lists[v] for v in range(n) if live[v] and lists[v].size])
    universe = np.unique(flat)
    rows = np.repeat(np.arange(n, dtype=np.int64), sizes)
    cols = np.searchsorted(universe, flat)
    membership = np.zeros((n, universe.size), dtype=bool)
    membership[rows, cols] = True
    counts = np.zeros((n, universe.size), dtype=np.int64)
    us, vs = graph.edges()
    if us.size:
        for heads, tails in ((us, vs), (vs, us)):
            order = np.argsort(heads, kind="stable")
            h = heads[order]
            starts = np.flatnonzero(np.r_[True, h[1:] != h[:-1]])
            sums = np.add.reduceat(membership[tails[order]].astype(np.int64), starts, axis=0)
            counts[h[starts]] += sums
    return universe, membership, counts


def default_big_threshold(n: int) -> float:
    return math.log(max(n, 3)) ** 3


def default_small_threshold(n: int) -> float:
    return max(2.0, math.log(max(math.log(max(n, 3)), 2.0)) ** 3)


# ---------------------------------------------------------------------------
# edge coloring

@dataclass
class EdgeColoring:
    us: np.ndarray
    vs: np.ndarray
    colors: np.ndarray
    palette: int
    stages: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "palette": self.palette,
            "colors": [[int(u), int(v), int(c)] for u, v, c in
                       zip(self.us.tolist(), self.vs.tolist(), self.colors.tolist())],
        }, sort_keys=True)


def vizing_base_color(g: Graph) -> EdgeColoring:
    """Proper edge coloring with at most Delta+1 colors, computed centrally."""
    us, vs = g.edges()
    colors = _core.vizing_color(g.n, us, vs)
    palette = int(np.unique(colors).size) if colors.size else 0
    return EdgeColoring(us=us, vs=vs, colors=colors, palette=palette)


def edge_color(g: Graph, eps: float, mode: sim.SimMode | None = None, seed: int = 0,
               c_level2: float = 2.0 ** -8, big_threshold: float | None = None,
               small_threshold: float | None = None, split_kwargs: dict | None = None):
    """Two-level edge-set partition, then disjoint-palette base coloring.

    Level 1 assigns edges to k uniform groups (only when Delta is above the
    polylog threshold).  Level 2 splits each group's edge-incidence instance
    into k' parts by bipartite splitting with eps' = eps/6.  Every resulting
    part is colored by the Vizing-fan base colorer with its own palette.
    Returns (EdgeColoring, RunReport); stage degrees and the color-count
    chain live in EdgeColoring.stages.
    """
    if not (0 < eps <= 1):
        raise ColoringError("eps must be in (0, 1]")
    mode = mode or sim.SimMode("LOCAL")
    n = g.n
    delta = g.max_degree
    big = default_big_threshold(n) if big_threshold is None else big_threshold
    small = default_small_threshold(n) if small_threshold is None else small_threshold
    eps1 = eps / 6.0
    report = sim.RunReport(seed=seed)
    us, vs = g.edges()
    m = us.size
    stages = {"delta": delta, "eps": eps, "delta0": math.ceil(6.0 / eps),
              "big_threshold": big, "small_threshold": small}

    if m == 0:
        coloring = EdgeColoring(us=us, vs=vs, colors=np.zeros(0, dtype=np.int32), palette=0,
                                stages={**stages, "k": 0, "k_prime": [], "base_direct": True})
        return coloring, report

    # level 1: uniform edge groups, only needed above the polylog regime
    if delta > big:
        k = max(1, int((eps1 ** 2) * delta / (9.0 * math.log(max(n, 3)))))
    else:
        k = 1
    group = (rng.mix(seed, np.arange(m, dtype=np.int64), 0, rng.TAG_EDGE_GROUP)
             % np.uint64(k)).astype(np.int64) if k > 1 else np.zeros(m, dtype=np.int64)
    if k > 1:
        report.add_round(max(1, math.ceil(math.log2(k))), 0, mode.budget(n))
    stages["k"] = k

    colors = np.full(m, -1, dtype=np.int64)
    offset = 0
    group_deltas = []
    part_deltas = []
    part_palettes = []
    k_primes = []
    for i in range(k):
        in_group = np.flatnonzero(group == i)
        gi = Graph.from_edges(n, us[in_group], vs[in_group])
        delta_i = gi.max_degree
        group_deltas.append(delta_i)
        # level 2: bipartite split of the edge-incidence instance
        if delta_i > small:
            lnln = math.log(max(math.log(max(n, 3)), 2.0))
            k_formula = int(c_level2 * (eps1 ** 4) * delta_i / (lnln ** 2))
            k_validity = int((1 + eps1) * delta_i * eps / 6.0)
            k_prime = max(1, min(k_formula, k_validity))
        else:
            k_prime = 1
        k_primes.append(k_prime)
        gi_us, gi_vs = gi.edges()
        if k_prime > 1:
            inst = edge_incidence_instance(gi)
            params = splitting.SplitParams(k=k_prime, eps=eps1, mode=mode,
                                           **(split_kwargs or {}))
            part_assign, sub_report = splitting.k_split(inst, params,
                                                        seed=rng.child_seed(seed, 100 + i))
            report.merge(sub_report)
            edge_part = part_assign.parts[gi.n + np.arange(gi_us.size, dtype=np.int64)]
        else:
            edge_part = np.zeros(gi_us.size, dtype=np.int64)
        # base case: disjoint palette per part
        for jp in range(k_prime):
            sel = np.flatnonzero(edge_part == jp)
            sub_us, sub_vs = gi_us[sel], gi_vs[sel]
            sub_deg = (np.bincount(sub_us, minlength=n) + np.bincount(sub_vs, minlength=n))
            dpp = int(sub_deg.max()) if sel.size else 0
            part_deltas.append(dpp)
            sub_colors = _core.vizing_color(n, sub_us, sub_vs)
            used = int(sub_colors.max()) + 1 if sel.size else 0
            part_palettes.append(used)
            # map back onto the global edge order
            orig = in_group[_match_edges(us[in_group], vs[in_group], sub_us, sub_vs)]
            colors[orig] = offset + sub_colors
            offset += used
    palette_used = int(np.unique(colors).size)
    stages.update({
        "k_prime": k_primes,
        "group_deltas": group_deltas,
        "part_deltas": part_deltas,
        "part_palettes": part_palettes,
        "palette_allocated": offset,
        "base_direct": k == 1 and all(kp == 1 for kp in k_primes),
    })
    stages["chain"] = _chain_values(stages, eps, delta)
    coloring = EdgeColoring(us=us, vs=vs, colors=colors, palette=palette_used, stages=stages)
    report.payload = {"palette": palette_used, "stages_chain_holds": stages["chain"]["holds"]}
    return coloring, report


def _match_edges(g_us, g_vs, sub_us, sub_vs):
    """Positions of (sub_us, sub_vs) pairs inside the (g_us, g_vs) pair list."""
    nmax = int(max(g_us.max(), g_vs.max())) + 1 if g_us.size else 1
    keys = g_us * nmax + g_vs
    order = np.argsort(keys, kind="stable")
    sub_keys = sub_us * nmax + sub_vs
    pos = np.searchsorted(keys[order], sub_keys)
    return order[pos]


def _chain_values(stages, eps, delta):
    """The color-count chain k*k'*(1+eps/6)*Delta'' <= ... <= (1+eps)*Delta."""
    k = stages["k"]
    vals = {}
    max_delta2 = max(stages["part_deltas"]) if stages["part_deltas"] else 0
    max_kp = max(stages["k_prime"]) if stages["k_prime"] else 1
    lhs = k * max_kp * (1 + eps / 6.0) * max_delta2
    max_delta1 = max(stages["group_deltas"]) if stages["group_deltas"] else 0
    mid = (1 + eps / 6.0) ** 2 * k * max_delta1
    mid2 = (1 + eps / 6.0) ** 3 * delta
    rhs = (1 + eps) * delta
    vals["lhs"] = lhs
    vals["mid"] = mid
    vals["mid2"] = mid2
    vals["rhs"] = rhs
    vals["holds"] = bool(lhs <= rhs + 1e-9)
    return vals


def defective_color(g: Graph, k: int, eps: float, seed: int = 0,
                    mode: sim.SimMode | None = None, **split_kwargs):
    """Vertex splitting read as a coloring: part index is the color."""
    params = splitting.SplitParams(k=k, eps=eps, mode=mode or sim.SimMode("LOCAL"),
                                   **split_kwargs)
    assignment, report = splitting.k_split(g, params, seed=seed)
    return assignment.parts.copy(), report


# ---------------------------------------------------------------------------
# list coloring

class ListInstance:
    """(L, T)-list coloring instance.

    Lists are trimmed to exactly L colors at build (unless trim=False);
    edges between nodes with disjoint lists are dropped; per-(node, color)
    color degrees are bounded by T.
    """

    def __init__(self, graph: Graph, lists, L=None, trim=True, validate=True):
        lists = [np.unique(np.asarray(c, dtype=np.int64)) for c in lists]
        if len(lists) != graph.n:
            raise ColoringError("need one color list per node")
        sizes = np.array([c.size for c in lists], dtype=np.int64)
        if L is None:
            L = int(sizes.min()) if len(lists) else 0
        if validate and len(lists) and sizes.min() < L:
            raise ColoringError(f"some list has fewer than L={L} colors")
        if trim:
            lists = [c[:L] for c in lists]
        self.lists = lists
        self.L = L
        # drop edges whose endpoint lists do not intersect
        us, vs = graph.edges()
        if us.size:
            flat = np.concatenate([c for c in lists if c.size]) if any(c.size for c in lists) \
                else np.zeros(0, dtype=np.int64)
            universe = np.unique(flat)
            membership = np.zeros((graph.n, universe.size), dtype=bool)
            for v in range(graph.n):
                if lists[v].size:
                    membership[v, np.searchsorted(universe, lists[v])] = True
            keep = (membership[us] & membership[vs]).any(axis=1)
        else:
            keep = np.zeros(0, dtype=bool)
        self.graph = Graph.from_edges(graph.n, us[keep], vs[keep])
        self._color_sets = [set(c.tolist()) for c in lists]
        self.T = self._recount_T()

    def color_set(self, v) -> set:
        return self._color_sets[v]

    def color_degree(self, v, c) -> int:
        return sum(1 for w in self.graph.neighbors(v).tolist() if c in self._color_sets[w])

    def color_degrees(self):
        """Dense recount: per node, color degrees aligned with the node's list."""
        universe, membership, counts = _color_degree_counts(self.graph, self.lists)
        out = []
        for v in range(self.graph.n):
            idx = np.searchsorted(universe, self.lists[v])
            out.append(counts[v, idx] if self.lists[v].size else np.zeros(0, dtype=np.int64))
        return out

    def _recount_T(self) -> int:
        universe, membership, counts = _color_degree_counts(self.graph, self.lists)
        if universe.size == 0:
            return 0
        own = np.where(membership, counts, 0)
        return int(own.max())

    def to_text(self) -> str:
        out = [f"lists {self.graph.n}\n"]
        for v in range(self.graph.n):
            cs = " ".join(str(int(c)) for c in self.lists[v])
            out.append(f"{v}: {cs}\n")
        us, vs = self.graph.edges()
        for u, v in zip(us.tolist(), vs.tolist()):
            out.append(f"edge {u} {v}\n")
        return "".join(out)

    @classmethod
    def from_text(cls, text: str, trim=True):
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].startswith("lists "):
            raise ColoringError("missing 'lists n' header")
        n = int(lines[0].split()[1])
        lists = [None] * n
        edges = []
        for ln in lines[1:]:
            if ln.startswith("edge "):
                _, u, v = ln.split()
                edges.append((int(u), int(v)))
                continue
            head, _, rest = ln.partition(":")
            v = int(head)
            lists[v] = [int(x) for x in rest.split()]
        if any(c is None for c in lists):
            raise ColoringError("missing list line for some node")
        us = [u for u, _ in edges]
        vs = [v for _, v in edges]
        return cls(Graph.from_edges(n, us, vs), lists, trim=trim)


def make_list_instance(n: int, L: int, T: int, seed: int, model: str = "shared") -> ListInstance:
    """Synthetic (L, T) instances.

    'shared': one common palette of L colors on a T-regular graph, so every
    color degree is exactly T.  'random': random L-subsets of a 3L/2 palette
    on a T-regular graph, color degrees <= T enforced by dropping colors.
    """
    g = generate(GraphGenSpec("d-regular", n, T, seed))
    if model == "shared":
        lists = [np.arange(L, dtype=np.int64) for _ in range(n)]
        return ListInstance(g, lists)
    if model != "random":
        raise ColoringError(f"unknown list model {model!r}")
    universe = max(L + L // 2, L + 1)
    lists = []
    for v in range(n):
        keys = rng.mix(seed, np.arange(universe, dtype=np.int64), v, rng.TAG_SPARSIFY)
        lists.append(np.sort(np.argsort(keys)[: L + max(2, L // 10)]).astype(np.int64))
    inst = ListInstance(g, lists, L=L + max(2, L // 10), validate=False)
    # enforce the color-degree cap by dropping over-T colors, then trim to L
    for v in range(inst.graph.n):
        degs = np.array([inst.color_degree(v, int(c)) for c in inst.lists[v]])
        keep = inst.lists[v][degs <= T]
        if keep.size < L:
            raise ColoringError("random model failed to meet the color-degree cap; reseed")
        inst.lists[v] = keep
    return ListInstance(inst.graph, inst.lists, L=L)


def list_sparsify(inst: ListInstance, k: int, eps: float, seed: int,
                  mode: sim.SimMode | None = None, big_threshold: float | None = None,
                  split_kwargs: dict | None = None) -> ListInstance:
    """Shrink lists and color degrees by ~k while roughly keeping their ratio.

    Above the polylog list-size threshold each color is kept independently
    with probability 1/k (zero rounds).  Below it, the bipartite splitting
    instance over (node, color) pairs is split with eps/100 and part 0 is
    kept as the new lists.
    """
    if inst.T >= inst.L:
        raise ColoringError("sparsification needs T < L")
    if k == 1:
        return ListInstance(inst.graph, inst.lists, L=inst.L)
    mode = mode or sim.SimMode("LOCAL")
    n = inst.graph.n
    big = default_big_threshold(n) if big_threshold is None else big_threshold
    pair_base = np.zeros(n + 1, dtype=np.int64)
    pair_base[1:] = np.cumsum([c.size for c in inst.lists])
    if inst.L > big:
        new_lists = []
        for v in range(n):
            pair_ids = pair_base[v] + np.arange(inst.lists[v].size, dtype=np.int64)
            kept = inst.lists[v][(rng.mix(seed, pair_ids, 0, rng.TAG_SPARSIFY) % np.uint64(k)) == 0]
            if kept.size == 0:
                raise EmptyListError(f"node {v} lost every color (k too aggressive)")
            new_lists.append(kept)
        return ListInstance(inst.graph, new_lists, trim=False)
    # bipartite route: right nodes are (v, c) pairs; left events are the
    # per-node list-size events and the per-(node, color) color-degree events
    n_pairs = int(pair_base[-1])
    pair_of = {}
    for v in range(n):
        for i, c in enumerate(inst.lists[v].tolist()):
            pair_of[(v, int(c))] = int(pair_base[v] + i)
    lefts = []
    rights = []
    # B_v events: ids [0, n)
    for v in range(n):
        for i in range(inst.lists[v].size):
            lefts.append(v)
            rights.append(n + n_pairs + pair_base[v] + i)
    # B_{v,c} events: ids [n, n + n_pairs)
    us, vs = inst.graph.edges()
    for u, v in zip(us.tolist(), vs.tolist()):
        for c in np.intersect1d(inst.lists[u], inst.lists[v]).tolist():
            lefts.append(n + pair_of[(v, int(c))])
            rights.append(n + n_pairs + pair_of[(u, int(c))])
            lefts.append(n + pair_of[(u, int(c))])
            rights.append(n + n_pairs + pair_of[(v, int(c))])
    from .graphs import BipartiteGraph
    b = BipartiteGraph.from_edges(n + n_pairs, n_pairs, lefts, rights)
    params = splitting.SplitParams(k=k, eps=eps / 100.0, mode=mode, **(split_kwargs or {}))
    assignment, _ = splitting.k_split(b, params, seed=rng.child_seed(seed, 7, rng.TAG_SPARSIFY))
    pair_parts = assignment.parts[b.n_left + np.arange(n_pairs, dtype=np.int64)]
    new_lists = []
    for v in range(n):
        sel = pair_parts[pair_base[v]: pair_base[v + 1]] == 0
        kept = inst.lists[v][sel]
        if kept.size == 0:
            raise EmptyListError(f"node {v} lost every color (k too aggressive)")
        new_lists.append(kept)
    return ListInstance(inst.graph, new_lists, trim=False)


# ---------------------------------------------------------------------------
# Reed-Sudakov amplification nibble

@dataclass
class NibbleState:
    inst: ListInstance
    iteration: int
    colored: np.ndarray  # color id or -1
    live_lists: list  # per node np arrays; empty for colored nodes
    g_param: float  # g: the initial T
    delta: float
    retry_cap: int = 100
    accepted: int = 0

    @classmethod
    def start(cls, inst: ListInstance, delta: float, g_param: float | None = None,
              retry_cap: int = 100):
        g = float(inst.T) if g_param is None else float(g_param)
        return cls(inst=inst, iteration=0,
                   colored=np.full(inst.graph.n, -1, dtype=np.int64),
                   live_lists=[c.copy() for c in inst.lists],
                   g_param=g, delta=delta, retry_cap=retry_cap)

    def live_nodes(self):
        return np.flatnonzero(self.colored < 0)

    def activation_p(self) -> float:
        lng = math.log(self.g_param) if self.g_param > 1 else 0.0
        return 1.0 if lng <= 1.0 else 1.0 / lng

    def factor_list(self) -> float:
        return 1.0 - 1.0 / ((1.0 + 3.0 * self.delta / 4.0) * math.log(self.g_param)) \
            if self.g_param > 1 else 0.0

    def factor_colordeg(self) -> float:
        return 1.0 - 1.0 / ((1.0 + self.delta / 4.0) * math.log(self.g_param)) \
            if self.g_param > 1 else 1.0

    def max_color_degrees(self):
        """Recounted per-node max color degree among live neighbors."""
        live = self.colored < 0
        universe, membership, counts = _color_degree_counts(self.inst.graph, self.live_lists, live)
        if universe.size == 0:
            return np.zeros(self.inst.graph.n, dtype=np.int64)
        own = np.where(membership, counts, 0)
        return own.max(axis=1)

    def ratio(self) -> float:
        live = self.live_nodes()
        if live.size == 0:
            return math.inf
        min_list = min(self.live_lists[v].size for v in live.tolist())
        max_cd = int(self.max_color_degrees().max()) if live.size else 0
        return math.inf if max_cd == 0 else min_list / max_cd


def rs_nibble_iteration(state: NibbleState, seed: int) -> NibbleState:
    """One accepted activation-nibble iteration (rejection over bad events).

    Active live nodes pick a uniform color from their list; a pick becomes a
    permanent color when no neighbor picked the same color, and kept colors
    are removed from neighbors' lists.  The iteration is re-run with fresh
    randomness until no node violates either per-node factor bound.
    """
    p = state.activation_p()
    live = state.live_nodes()
    t_before = state.max_color_degrees()
    l_before = np.array([state.live_lists[v].size for v in range(state.inst.graph.n)])
    for v in live.tolist():
        if l_before[v] < (1.0 + state.delta) * t_before[v]:
            raise ColoringError(
                f"nibble precondition broken at node {v}: |L|={l_before[v]} < (1+delta)*T={t_before[v]}")
    f1 = state.factor_list()
    f2 = state.factor_colordeg()
    g_graph = state.inst.graph
    last_violators = []
    for trial in range(state.retry_cap):
        stream = state.iteration * 100_000 + trial
        active = live[(rng.uniform(seed, live, stream, rng.TAG_NIBBLE) < p)] if live.size else live
        picks = {}
        for v in active.tolist():
            lst = state.live_lists[v]
            idx = int(rng.mix(seed, v, stream + 1, rng.TAG_NIBBLE) % np.uint64(lst.size))
            picks[v] = int(lst[idx])
        kept = {}
        for v, c in picks.items():
            if all(picks.get(w) != c for w in g_graph.neighbors(v).tolist()):
                kept[v] = c
        new_colored = state.colored.copy()
        new_lists = [lst.copy() for lst in state.live_lists]
        for v, c in kept.items():
            new_colored[v] = c
            new_lists[v] = new_lists[v][:0]
            for w in g_graph.neighbors(v).tolist():
                if new_colored[w] < 0:
                    new_lists[w] = new_lists[w][new_lists[w] != c]
        candidate = NibbleState(inst=state.inst, iteration=state.iteration + 1,
                                colored=new_colored, live_lists=new_lists,
                                g_param=state.g_param, delta=state.delta,
                                retry_cap=state.retry_cap, accepted=state.accepted + 1)
        # bad events, recounted on still-live nodes
        t_after = candidate.max_color_degrees()
        violators = []
        for v in candidate.live_nodes().tolist():
            if new_lists[v].size < f1 * l_before[v]:
                violators.append(v)
            elif t_after[v] > f2 * t_before[v]:
                violators.append(v)
        if not violators:
            return candidate
        last_violators = violators
    raise NibbleRetryExceeded(state.iteration, last_violators)


def amplify_iterations(c_target: float, delta: float, g_param: float) -> int:
    return math.ceil((5.0 / delta) * math.log(c_target) * math.log(g_param))


def amplify_ratio(inst_or_state, c_target: float, delta: float, seed: int,
                  retry_cap: int = 100) -> NibbleState:
    """Run r = ceil((5/delta) ln C ln g) accepted nibble iterations.

    Raises if a live node's list empties; the resulting ratio is recorded by
    the caller's recount (NibbleState.ratio)."""
    state = inst_or_state if isinstance(inst_or_state, NibbleState) \
        else NibbleState.start(inst_or_state, delta, retry_cap=retry_cap)
    if state.g_param <= 1.0:
        return state  # no color degrees to amplify against
    r = amplify_iterations(c_target, delta, state.g_param)
    for i in range(r):
        state = rs_nibble_iteration(state, rng.child_seed(seed, i, rng.TAG_NIBBLE))
        for v in state.live_nodes().tolist():
            if state.live_lists[v].size == 0:
                raise EmptyListError(f"live node {v} has an empty list after iteration {i}")
    return state


# ---------------------------------------------------------------------------
# full list-coloring pipeline

def _reed_mt_solve(state: NibbleState, seed: int, max_rounds: int = 10_000):
    """Finish the live nodes by Moser-Tardos over pairwise color conflicts."""
    live = state.live_nodes()
    colors = state.colored.copy()
    if live.size == 0:
        return colors
    index = {int(v): i for i, v in enumerate(live.tolist())}
    domains = np.array([max(1, state.live_lists[v].size) for v in live.tolist()], dtype=np.int64)
    events = []
    us, vs = state.inst.graph.edges()
    for u, v in zip(us.tolist(), vs.tolist()):
        if colors[u] >= 0 or colors[v] >= 0:
            continue
        shared = np.intersect1d(state.live_lists[u], state.live_lists[v])
        for c in shared.tolist():
            iu = int(np.searchsorted(state.live_lists[u], c))
            iv = int(np.searchsorted(state.live_lists[v], c))
            events.append(lll.LllEvent(scope=(index[u], index[v]), struct=("pair", iu, iv)))
    inst = lll.LllInstance(domains, events)
    values = lll.moser_tardos(inst, rng.child_seed(seed, 99, rng.TAG_NIBBLE), max_rounds)
    for v, i in index.items():
        lst = state.live_lists[v]
        if lst.size == 0:
            raise EmptyListError(f"live node {v} reached the final solve with no colors")
        colors[v] = int(lst[int(values[i])])
    return colors


def list_color(inst: ListInstance, delta: float, mode: sim.SimMode | None = None,
               seed: int = 0, c_target: float = 6.0, c_sparsify: float = 2.0 ** -19,
               big_threshold: float | None = None, small_threshold: float | None = None,
               retry_cap: int = 100, split_kwargs: dict | None = None):
    """Sparsify per the size regime, amplify the ratio to C, then solve.

    Requires L >= (1+delta)*T.  Returns the per-node color array.
    """
    if inst.L < (1.0 + delta) * inst.T:
        raise ColoringError(f"need L >= (1+delta)T, got L={inst.L}, T={inst.T}")
    mode = mode or sim.SimMode("LOCAL")
    n = inst.graph.n
    big = default_big_threshold(n) if big_threshold is None else big_threshold
    small = default_small_threshold(n) if small_threshold is None else small_threshold
    stage = 0
    while inst.L > big and stage < 1:
        k = max(1, int(inst.L / big))
        if k == 1:
            break
        inst = list_sparsify(inst, k, eps=min(1.0, delta / 10.0), seed=rng.child_seed(seed, 11),
                             mode=mode, big_threshold=big, split_kwargs=split_kwargs)
        stage += 1
    if inst.L > small:
        k = max(1, int(c_sparsify * (delta / 10.0) ** 4 * inst.L / math.log(max(inst.L, 3))))
        if k > 1:
            inst = list_sparsify(inst, k, eps=min(1.0, delta / 10.0),
                                 seed=rng.child_seed(seed, 12), mode=mode,
                                 big_threshold=big, split_kwargs=split_kwargs)
    state = NibbleState.start(inst, delta, retry_cap=retry_cap)
    if state.ratio() < c_target and inst.T > 1:
        state = amplify_ratio(state, c_target, delta, rng.child_seed(seed, 13),
                              retry_cap=retry_cap)
    return _reed_mt_solve(state, seed)


def reed_criterion_report(L: int, T: int) -> lll.CriterionReport:
    """The existence criterion for the pairwise-conflict formulation."""
    p = 1.0 / (L * L)
    d = 2 * L * T
    poly = {c: p * d ** c for c in (1, 2, 8, 11)}
    return lll.CriterionReport(d=d, p_max=p, poly=poly,
                               epd_lt_1=(math.e * p * d < 1.0), f_of_d=p * d)
