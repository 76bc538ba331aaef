"""FastShattering k-vertex splitting with retraction and freezing.

The pipeline: a q-divide schedules the variable nodes into q slots; slots are
processed sequentially, sampling uniform parts for live slot members; an
event node whose per-part count among live slot-j neighbors deviates from
its live-degree mean by more than the threshold retracts the whole slot
batch in its neighborhood and freezes nearby unassigned later-slot nodes.
Frozen nodes form per-slot LLL instances completed post hoc (Moser-Tardos in
LOCAL, cluster-sequential parallel racing in CONGEST).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core, divide, lll, rng, sim
from .graphs import BipartiteGraph, Graph, to_bipartite_split_instance

log = logging.getLogger(__name__)

PHASE_NONE = -1
PHASE_PRE = 0
PHASE_POST = 1
PHASE_ZERO = 2

_PHASE_CODES = {PHASE_PRE: "pre", PHASE_POST: "post", PHASE_ZERO: "zero-round"}


class SplitError(RuntimeError):
    pass


class SplitSolverError(SplitError):
    def __init__(self, slot_j, component_nodes, cause):
        super().__init__(f"post-shattering solve failed (slot {slot_j}): {cause}")
        self.slot_j = slot_j
        self.component_nodes = component_nodes
        self.cause = cause


@dataclass
class SplitParams:
    k: int
    eps: float
    c_pre: float = 1.0  # multiplier on the threshold eps^2*Delta_L/(72 k)
    c_strict: float = 1.0 / 8.0  # admissibility constant for k <= c*eps^4*Delta_L/ln(Delta)
    strict: bool = False
    mode: sim.SimMode = field(default_factory=lambda: sim.SimMode("LOCAL"))
    q_colors: int | None = None  # CONGEST cluster colors; default 2*ln(ln(n))
    ell: int | None = None  # CONGEST parallel instances; default 6*ln(n)
    mt_max_rounds: int | None = None
    retries: int = 2
    zero_round_auto: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise SplitError("k must be >= 1")
        if not (0 < self.eps <= 1):
            raise SplitError("eps must be in (0, 1]")

    @property
    def q(self) -> int:
        return math.ceil(24.0 / self.eps)

    def z_raw(self, delta_left: int) -> float:
        return self.c_pre * self.eps ** 2 * delta_left / (72.0 * self.k)

    def z_clamped(self, delta_left: int) -> float:
        raw = self.z_raw(delta_left)
        if raw < 1.0:
            log.warning("threshold z=%.4f below 1; clamping to 1 (Delta_L=%d, k=%d, eps=%.3f)",
                        raw, delta_left, self.k, self.eps)
            return 1.0
        return raw

    def admissible_k(self, delta_left: int) -> float:
        if delta_left < 2:
            return 0.0
        return self.c_strict * self.eps ** 4 * delta_left / math.log(delta_left)


@dataclass
class PartAssignment:
    k: int
    parts: np.ndarray  # -1 = unassigned; event-only nodes of bipartite instances stay -1
    phase: np.ndarray  # PHASE_* codes
    slot: np.ndarray  # slot the assignment happened in (-1 for zero-round)
    frozen_slot: np.ndarray  # j of the Bad_j a node was frozen into, -1 otherwise

    @classmethod
    def empty(cls, n, k):
        return cls(k=k,
                   parts=np.full(n, -1, dtype=np.int64),
                   phase=np.full(n, PHASE_NONE, dtype=np.int8),
                   slot=np.full(n, -1, dtype=np.int64),
                   frozen_slot=np.full(n, -1, dtype=np.int64))

    def complete(self, variables) -> bool:
        return bool((self.parts[variables] >= 0).all())

    def to_json(self) -> str:
        prov = [_PHASE_CODES.get(int(p), "unassigned") for p in self.phase]
        return json.dumps({"k": self.k, "parts": self.parts.tolist(), "provenance": prov},
                          sort_keys=True)


@dataclass
class ShatterTrace:
    q: int
    k: int
    z_pre: float
    z_post: float
    z_raw: float
    freeze_radius: int
    budget_third: float  # eps*Delta_L/(3k), the per-phase deviation budget
    triggered: list = field(default_factory=list)  # per slot: event node ids
    retracted: list = field(default_factory=list)  # per slot: variable ids
    frozen: list = field(default_factory=list)  # per slot: variable ids (distance freeze)
    live_deg: list = field(default_factory=list)  # per slot: live degree per event row
    schedule_slots: np.ndarray | None = None

    def bad_sets(self):
        return [np.union1d(r, f) for r, f in zip(self.retracted, self.frozen)]

    def sum_z_pre_raw(self) -> float:
        return self.q * self.z_raw


def _variables(inst: BipartiteGraph):
    return np.arange(inst.n_left, inst.n, dtype=np.int64)


def one_retraction_violations(inst: BipartiteGraph, trace: ShatterTrace) -> np.ndarray:
    """Nodes that saw neighbors retracted in more than one slot (must be none)."""
    seen = np.zeros(inst.n, dtype=np.int64)
    marker = np.full(inst.n, -1, dtype=np.int64)
    for retracted in trace.retracted:
        if len(retracted) == 0:
            continue
        marker[:] = -1
        marker[np.asarray(retracted, dtype=np.int64)] = 0
        counts = _core.part_counts(inst.indptr, inst.indices, marker, 1, inst.n)
        seen += (counts[:, 0] > 0).astype(np.int64)
    return np.flatnonzero(seen > 1)


def frozen_set_violations(inst: BipartiteGraph, trace: ShatterTrace) -> np.ndarray:
    """Later-slot unassigned variables within the freeze radius of a trigger
    that ended up in no bad set (must be none)."""
    schedule_slots = trace.schedule_slots
    in_bad = np.zeros(inst.n, dtype=bool)
    for bad in trace.bad_sets():
        if len(bad):
            in_bad[np.asarray(bad, dtype=np.int64)] = True
    missing = []
    for j, triggered in enumerate(trace.triggered):
        if len(triggered) == 0:
            continue
        dist = _core.bfs_dist(inst.indptr, inst.indices, np.asarray(triggered, dtype=np.int64),
                              trace.freeze_radius)
        near = np.flatnonzero(dist >= 0)
        near = near[near >= inst.n_left]
        later = near[schedule_slots[near] > j]
        missing.append(later[~in_bad[later]])
    return np.unique(np.concatenate(missing)) if missing else np.zeros(0, dtype=np.int64)


def zero_round_split(g, k: int, eps: float, seed: int) -> PartAssignment:
    """Uniform independent part per variable node; no communication."""
    if isinstance(g, BipartiteGraph):
        variables = _variables(g)
        n = g.n
    else:
        variables = np.arange(g.n, dtype=np.int64)
        n = g.n
    out = PartAssignment.empty(n, k)
    out.parts[variables] = (rng.mix(seed, variables, 0, rng.TAG_ZERO_ROUND) % np.uint64(k)).astype(np.int64)
    out.phase[variables] = PHASE_ZERO
    return out


def fast_shattering(inst: BipartiteGraph, params: SplitParams, seed: int,
                    freeze_radius: int = 3):
    """Slot-sequential pre-shattering phase.

    Returns (partial PartAssignment, ShatterTrace, RunReport).  Always yields
    a partial assignment; frozen nodes accumulate in the trace's bad sets.
    """
    k = params.k
    q = params.q
    delta_l = inst.delta_left
    if params.strict:
        bound = params.admissible_k(delta_l)
        if k > bound:
            raise SplitError(f"strict mode: k={k} exceeds c*eps^4*Delta_L/ln(Delta)={bound:.3f}")
    elif k > params.admissible_k(delta_l):
        log.warning("k=%d exceeds the analyzed admissibility bound %.3f (permissive mode)",
                    k, params.admissible_k(delta_l))
    z = params.z_clamped(delta_l)
    trace = ShatterTrace(
        q=q, k=k, z_pre=z, z_post=z, z_raw=params.z_raw(delta_l),
        freeze_radius=freeze_radius,
        budget_third=params.eps * delta_l / (3.0 * k),
    )
    # the embedded divide uses the degree-local thresholds: at q = 24/eps the
    # uniform 8*Delta/q collapses below 1 on desk-scale degrees and its
    # post-shattering constraints become unsatisfiable; the local floor of
    # 48 ln(Delta) keeps them feasible
    div_mode = "local" if delta_l >= 2 else "uniform"
    schedule, divide_report = divide.q_divide(
        inst, divide.DivideParams(q=q, threshold_mode=div_mode, ell=params.ell),
        params.mode, rng.child_seed(seed, 1))
    trace.schedule_slots = schedule.slots.copy()
    report = sim.RunReport(seed=seed)
    report.merge(divide_report)
    budget = params.mode.budget(inst.n)
    part_bits = max(1, math.ceil(math.log2(max(k, 2))))

    out = PartAssignment.empty(inst.n, k)
    variables = _variables(inst)
    nrows = inst.n_left
    labels = np.full(inst.n, -1, dtype=np.int64)
    for j in range(q):
        slot_vars = variables[schedule.slots[variables] == j]
        live = slot_vars[out.frozen_slot[slot_vars] < 0]
        trace.triggered.append(np.zeros(0, dtype=np.int64))
        trace.retracted.append(np.zeros(0, dtype=np.int64))
        trace.frozen.append(np.zeros(0, dtype=np.int64))
        if live.size == 0:
            trace.live_deg.append(np.zeros(nrows, dtype=np.int64))
            continue
        tpart = (rng.mix(seed, live, j, rng.TAG_SHATTER) % np.uint64(k)).astype(np.int64)
        labels[:] = -1
        labels[live] = tpart
        counts = _core.part_counts(inst.indptr, inst.indices, labels, k, nrows)
        d_hat = counts.sum(axis=1)
        trace.live_deg.append(d_hat)
        report.add_round(part_bits, int(inst.degrees[live].sum()), budget)
        dev = np.abs(counts - (d_hat / k)[:, None]).max(axis=1)
        triggered = np.flatnonzero(dev > z)
        report.add_round(1, int(inst.degrees[triggered].sum()) if triggered.size else 0, budget)
        if triggered.size:
            trace.triggered[j] = triggered
            live_mask = np.zeros(inst.n, dtype=bool)
            live_mask[live] = True
            nb = np.unique(np.concatenate([inst.neighbors(t) for t in triggered.tolist()]))
            retracted = nb[live_mask[nb]]
            trace.retracted[j] = retracted
            out.frozen_slot[retracted] = j
            dist = _core.bfs_dist(inst.indptr, inst.indices, triggered, freeze_radius)
            near = np.flatnonzero(dist >= 0)
            near = near[near >= inst.n_left]  # variable side only
            later = near[(schedule.slots[near] > j) & (out.frozen_slot[near] < 0)]
            trace.frozen[j] = later
            out.frozen_slot[later] = j
            for _ in range(freeze_radius):
                report.add_round(1, int(inst.degrees[triggered].sum()), budget)
            survivors = live[out.frozen_slot[live] < 0]
        else:
            survivors = live
        keep = tpart[out.frozen_slot[live] < 0]
        out.parts[survivors] = keep
        out.phase[survivors] = PHASE_PRE
        out.slot[survivors] = j
    report.payload = {
        "q": q,
        "z_pre": z,
        "frozen_total": int((out.frozen_slot >= 0).sum()),
        "triggered_total": int(sum(len(t) for t in trace.triggered)),
        "divide": divide_report.payload,
    }
    return out, trace, report


def _component_instances(inst, bad_j, z_post, k):
    """Split the slot-j post-shattering problem into connected components.

    Yields (component nodes, component variables, LllInstance).
    """
    mask = np.zeros(inst.n, dtype=bool)
    mask[bad_j] = True
    dist = _core.bfs_dist(inst.indptr, inst.indices, bad_j, 1)
    mask |= dist >= 0
    comp_labels = _core.cc_labels(inst.indptr, inst.indices, mask)
    ncomp = int(comp_labels.max()) + 1 if mask.any() else 0
    in_bad = np.zeros(inst.n, dtype=bool)
    in_bad[bad_j] = True
    for c in range(ncomp):
        comp = np.flatnonzero(comp_labels == c)
        comp_vars = comp[in_bad[comp]]
        var_index = {int(v): i for i, v in enumerate(comp_vars.tolist())}
        events = []
        for v in comp.tolist():
            if v >= inst.n_left:
                continue
            scope = tuple(var_index[w] for w in inst.neighbors(v).tolist() if w in var_index)
            if scope:
                events.append(lll.LllEvent(scope=scope, struct=("dev", k, float(z_post)), host=v))
        yield comp, comp_vars, lll.LllInstance(np.full(comp_vars.size, k, dtype=np.int64), events)


def _mt_cap(params: SplitParams, nvars: int) -> int:
    if params.mt_max_rounds is not None:
        return params.mt_max_rounds
    # generous on small components, fail fast on huge (imploded) instances
    return 10_000 if nvars <= 2_000 else 300


def post_shatter_local(inst: BipartiteGraph, bad_sets, params: SplitParams, seed: int,
                       assignment: PartAssignment, report: sim.RunReport | None = None):
    """Complete the assignment by solving each slot's LLL per component."""
    k = params.k
    z_post = params.z_clamped(inst.delta_left)
    budget = params.mode.budget(inst.n)
    max_comp = 0
    for j, bad_j in enumerate(bad_sets):
        bad_j = np.asarray(bad_j, dtype=np.int64)
        if bad_j.size == 0:
            continue
        for comp_idx, (comp, comp_vars, comp_inst) in enumerate(
                _component_instances(inst, bad_j, z_post, k)):
            max_comp = max(max_comp, int(comp.size))
            cap = _mt_cap(params, comp_vars.size)
            values, iters = _solve_with_retries(
                comp_inst, params, seed, j, j * 100_003 + comp_idx, comp_vars, cap)
            assignment.parts[comp_vars] = values
            assignment.phase[comp_vars] = PHASE_POST
            assignment.slot[comp_vars] = j
            if report is not None:
                part_bits = max(1, math.ceil(math.log2(max(k, 2))))
                msgs = int(inst.degrees[comp_vars].sum())
                for _ in range(iters):
                    report.add_round(part_bits, msgs, budget)
                    report.add_round(1, msgs, budget)
                    report.add_round(1, msgs, budget)
    if report is not None:
        report.payload["max_bad_component"] = max_comp
    return assignment


def _solve_with_retries(comp_inst, params, seed, slot_j, tag_int, comp_vars, cap):
    last = None
    for attempt in range(params.retries + 1):
        sub_seed = rng.child_seed(seed, tag_int * 10 + attempt, rng.TAG_MT)
        values, iters, violated = lll.moser_tardos_run(comp_inst, sub_seed, cap)
        if not violated:
            return values, iters
        last = lll.LllUnsolved(len(violated), iters)
    raise SplitSolverError(slot_j, comp_vars.tolist(), last)


def post_shatter_congest(inst: BipartiteGraph, bad_sets, params: SplitParams, seed: int,
                         assignment: PartAssignment, report: sim.RunReport | None = None,
                         budget_per_instance: float | None = None):
    """CONGEST completion: cluster-sequential solving per slot instance.

    Each component is decomposed into distance-3 separated clusters with Q
    colors; colors are processed sequentially and every cluster is solved by
    racing ell parallel bounded Moser-Tardos instances.  Per-cluster
    discrepancy budgets are the per-instance budget split evenly over the Q
    colors, so the union meets the instance budget.
    """
    k = params.k
    n = inst.n
    q_colors = params.q_colors or max(1, math.ceil(2 * math.log(max(math.log(max(n, 3)), 2.0))))
    ell = params.ell or max(1, math.ceil(6 * math.log(max(n, 2))))
    if budget_per_instance is None:
        # standalone contract: the component's total budget is eps*Delta_L/k
        budget_per_instance = params.eps * inst.delta_left / k
    z_cluster = max(1.0, budget_per_instance / q_colors)
    bw = params.mode.budget(n)
    for j, bad_j in enumerate(bad_sets):
        bad_j = np.asarray(bad_j, dtype=np.int64)
        if bad_j.size == 0:
            continue
        mask = np.zeros(n, dtype=bool)
        mask[bad_j] = True
        dist = _core.bfs_dist(inst.indptr, inst.indices, bad_j, 1)
        mask |= dist >= 0
        comp_labels = _core.cc_labels(inst.indptr, inst.indices, mask)
        ncomp = int(comp_labels.max()) + 1 if mask.any() else 0
        in_bad = np.zeros(n, dtype=bool)
        in_bad[bad_j] = True
        for comp_idx in range(ncomp):
            comp = np.flatnonzero(comp_labels == comp_idx)
            decomp = _decompose_with_retry(inst, comp, q_colors)
            owner = np.full(n, -1, dtype=np.int64)
            for ci, members in enumerate(decomp.clusters):
                owner[members] = ci
            for color, cluster_ids in enumerate(decomp.color_classes()):
                for ci in cluster_ids:
                    cluster_vars = decomp.clusters[ci]
                    cluster_vars = cluster_vars[in_bad[cluster_vars] & (assignment.parts[cluster_vars] < 0)]
                    if cluster_vars.size == 0:
                        continue
                    var_index = {int(v): i for i, v in enumerate(cluster_vars.tolist())}
                    events = []
                    ev_nodes = np.unique(np.concatenate(
                        [inst.neighbors(v) for v in cluster_vars.tolist()]))
                    for v in ev_nodes.tolist():
                        scope = tuple(var_index[w] for w in inst.neighbors(v).tolist() if w in var_index)
                        if scope:
                            events.append(lll.LllEvent(
                                scope=scope, struct=("dev", k, float(z_cluster)), host=v))
                    cl_inst = lll.LllInstance(np.full(cluster_vars.size, k, dtype=np.int64), events)
                    tag_int = (j * 100_003 + comp_idx) * 1009 + ci
                    values = _parallel_with_retries(cl_inst, params, seed, j, tag_int, ell, cluster_vars)
                    assignment.parts[cluster_vars] = values
                    assignment.phase[cluster_vars] = PHASE_POST
                    assignment.slot[cluster_vars] = j
                    if report is not None:
                        rounds = lll.default_rounds_per_instance(cl_inst.size)
                        part_bits = max(1, math.ceil(math.log2(max(k, 2))))
                        msgs = int(inst.degrees[cluster_vars].sum())
                        for _ in range(rounds):
                            report.add_round(ell * part_bits, msgs, bw)
                            report.add_round(ell, msgs, bw)
                        report.add_round(max(1, math.ceil(math.log2(ell + 1))), msgs, bw)
    return assignment


def _decompose_with_retry(inst, comp, q_colors):
    radius = 3
    for _ in range(12):
        try:
            return sim.cluster_decompose(inst, comp, separation=3, q_colors=q_colors,
                                         radius_bound=radius)
        except sim.ClusterColorBudget:
            radius *= 2
    # single giant cluster always fits one color
    return sim.cluster_decompose(inst, comp, separation=3, q_colors=q_colors,
                                 radius_bound=max(2 * inst.n, 4))


def _parallel_with_retries(cl_inst, params, seed, slot_j, tag_int, ell, cluster_vars):
    last = None
    for attempt in range(params.retries + 1):
        sub_seed = rng.child_seed(seed, tag_int * 10 + attempt, rng.TAG_PARALLEL)
        try:
            return lll.parallel_instances_solve(cl_inst, ell, sub_seed)
        except lll.NoWinningInstance as exc:
            last = exc
    raise SplitSolverError(slot_j, cluster_vars.tolist(), last)


def k_split(g, params: SplitParams, mode: sim.SimMode | None = None, seed: int = 0):
    """Full k-vertex splitting: zero-round in the high-degree regime, else
    FastShattering plus post-shattering completion.

    Plain graphs are translated to the bipartite splitting instance (each
    node becomes an event copy and a variable copy) and the result is
    projected back.  Returns (PartAssignment, RunReport).
    """
    if mode is not None:
        params.mode = mode
    if isinstance(g, BipartiteGraph):
        inst = g
        native = True
        n_comm = g.n
    else:
        inst = to_bipartite_split_instance(g)
        native = False
        n_comm = g.n
    delta_l = inst.delta_left
    report = sim.RunReport(seed=seed)
    zero_bound = params.eps ** 2 * delta_l / (9.0 * math.log(max(n_comm, 3)))
    if params.zero_round_auto and params.k <= zero_bound:
        assignment = zero_round_split(inst, params.k, params.eps, seed)
        report.payload = {"dispatch": "zero-round", "zero_bound": zero_bound}
        trace = None
    else:
        # radius 3 in the instance graph covers every variable within two
        # instance hops of a trigger-adjacent event, which is what the
        # one-retraction argument needs on either side; using it for
        # translated instances too keeps the plain and bipartite paths
        # byte-identical
        assignment, trace, report = fast_shattering(inst, params, seed, freeze_radius=3)
        bad_sets = trace.bad_sets()
        if params.mode.model == "CONGEST":
            post_shatter_congest(inst, bad_sets, params, seed, assignment, report,
                                 budget_per_instance=params.z_clamped(delta_l))
        else:
            post_shatter_local(inst, bad_sets, params, seed, assignment, report)
        report.payload["dispatch"] = "fast-shattering"
        report.payload["bad_sizes"] = [int(len(b)) for b in bad_sets]
    variables = _variables(inst)
    if not assignment.complete(variables):
        raise SplitError("assignment incomplete after post-shattering")
    if native:
        out = assignment
    else:
        out = PartAssignment.empty(g.n, params.k)
        right = np.arange(g.n, dtype=np.int64) + g.n
        out.parts = assignment.parts[right].copy()
        out.phase = assignment.phase[right].copy()
        out.slot = assignment.slot[right].copy()
        out.frozen_slot = assignment.frozen_slot[right].copy()
    return out, report
