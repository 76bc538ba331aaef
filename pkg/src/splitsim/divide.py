"""q-divide algorithms: zero-round, shattering-based, bipartite, degree-local.

A q-divide partitions the variable nodes into q buckets so that every event
node has at most z(v) neighbors in each bucket, with z(v) = 8*Delta/q
uniformly or the degree-local variant max(8*d(v)/q, 48*ln Delta).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core, lll, rng, sim
from .graphs import BipartiteGraph

log = logging.getLogger(__name__)


class DivideError(RuntimeError):
    pass


class DivideSolverError(DivideError):
    def __init__(self, slot_or_comp, component_nodes, cause):
        super().__init__(f"post-shattering solve failed on component {slot_or_comp}: {cause}")
        self.component_nodes = component_nodes
        self.cause = cause


@dataclass
class DivideParams:
    q: int
    threshold_mode: str = "uniform"  # uniform | local
    strictness: str = "permissive"  # strict | permissive for q <= Delta/(6 ln Delta)
    ell: int | None = None  # CONGEST parallel instances; default ceil(6 ln n)
    mt_max_rounds: int = 10_000
    retries: int = 2

    def __post_init__(self):
        if self.q < 1:
            raise DivideError("q must be >= 1")
        if self.threshold_mode not in ("uniform", "local"):
            raise DivideError(f"unknown threshold mode {self.threshold_mode!r}")
        if self.strictness not in ("strict", "permissive"):
            raise DivideError(f"unknown strictness {self.strictness!r}")


@dataclass
class Schedule:
    q: int
    slots: np.ndarray  # per-node slot in [q]; -1 = unassigned; events-only nodes stay -1
    thresholds: np.ndarray  # per-event-node z(v)

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "slots": self.slots.tolist()}, sort_keys=True)


def _sides(g):
    """(event ids, variable ids, event row count) for plain or bipartite instances."""
    if isinstance(g, BipartiteGraph):
        events = np.arange(g.n_left, dtype=np.int64)
        variables = np.arange(g.n_left, g.n, dtype=np.int64)
        delta_events = g.delta_left
    else:
        events = np.arange(g.n, dtype=np.int64)
        variables = events
        delta_events = g.max_degree
    return events, variables, delta_events


def local_thresholds(g, q: int) -> np.ndarray:
    """Degree-local thresholds: 8d(v)/q for d(v) >= 6q*ln(Delta), else 48*ln(Delta)."""
    events, _, delta = _sides(g)
    if delta < 2:
        raise DivideError("local thresholds need Delta >= 2")
    ln_d = math.log(delta)
    d = g.degrees[events].astype(np.float64)
    z = np.where(d >= 6 * q * ln_d, 8.0 * d / q, 48.0 * ln_d)
    out = np.zeros(g.n, dtype=np.float64)
    out[events] = _clamp_thresholds(z, q, delta)
    return out


def _clamp_thresholds(z, q, delta):
    # integer bucket counts make sub-1 thresholds unsatisfiable (any occupied
    # bucket would violate); clamp to 1, mirroring the splitting-threshold clamp
    if np.any(z < 1.0):
        log.warning("divide threshold below 1 for q=%d, Delta=%d; clamping to 1", q, delta)
        return np.maximum(z, 1.0)
    return z


def uniform_thresholds(g, q: int) -> np.ndarray:
    events, _, delta = _sides(g)
    out = np.zeros(g.n, dtype=np.float64)
    out[events] = _clamp_thresholds(np.full(events.size, 8.0 * delta / q), q, delta)
    return out


def _thresholds(g, params: DivideParams) -> np.ndarray:
    if params.threshold_mode == "local":
        return local_thresholds(g, params.q)
    return uniform_thresholds(g, params.q)


def zero_round_divide(g, q: int, seed: int) -> Schedule:
    """Every variable node picks one of the q buckets independently u.a.r."""
    _, variables, _ = _sides(g)
    slots = np.full(g.n, -1, dtype=np.int64)
    slots[variables] = (rng.mix(seed, variables, 1, rng.TAG_ZERO_ROUND) % np.uint64(q)).astype(np.int64)
    return Schedule(q=q, slots=slots, thresholds=uniform_thresholds(g, q))


def _overfull_pairs(g, events, slots, thresholds, nbuckets):
    """(event, bucket) keys where the bucket count exceeds the event threshold."""
    nrows = int(events[-1]) + 1 if events.size else 0
    if nrows == 0:
        return np.zeros(0, dtype=np.int64), None
    counts_rows = np.repeat(np.arange(nrows, dtype=np.int64), np.diff(g.indptr[: nrows + 1]))
    nb = g.indices[: g.indptr[nrows]].astype(np.int64)
    lab = slots[nb]
    keep = lab >= 0
    keys = counts_rows[keep] * nbuckets + lab[keep]
    ukeys, counts = np.unique(keys, return_counts=True)
    over = counts > thresholds[ukeys // nbuckets]
    return ukeys[over], (counts_rows, nb, lab, keep)


def q_divide(g, params: DivideParams, mode: sim.SimMode, seed: int):
    """Two-phase q-divide: sample into the first half of the buckets, deselect
    overfull buckets, then solve the leftovers into the last half per
    component as bucket-cap LLLs.

    Returns (Schedule, RunReport).
    """
    events, variables, delta = _sides(g)
    q = params.q
    if params.strictness == "strict":
        bound = delta / (6 * math.log(delta)) if delta >= 2 else 0.0
        if q > bound:
            raise DivideError(f"strict mode: q={q} exceeds Delta/(6 ln Delta)={bound:.2f}")
    else:
        bound = delta / (6 * math.log(delta)) if delta >= 2 else 0.0
        if q > bound:
            log.warning("q=%d exceeds the analyzed bound Delta/(6 ln Delta)=%.2f", q, bound)
    thresholds = _thresholds(g, params)
    budget = mode.budget(g.n)
    report = sim.RunReport(seed=seed)

    pre_buckets = math.ceil(q / 2)
    slots = np.full(g.n, -1, dtype=np.int64)
    slots[variables] = (rng.mix(seed, variables, 0, rng.TAG_DIVIDE_P1) % np.uint64(pre_buckets)).astype(np.int64)
    # one announcement round: every variable tells neighbors its slot
    slot_bits = max(1, math.ceil(math.log2(max(q, 2))))
    n_var_msgs = int(g.degrees[variables].sum())
    report.add_round(slot_bits, n_var_msgs, budget)

    over_keys, edge_view = _overfull_pairs(g, events, slots, thresholds, q)
    deselected_total = 0
    if over_keys.size:
        counts_rows, nb, lab, keep = edge_view
        edge_keys = counts_rows[keep] * q + lab[keep]
        hit = np.isin(edge_keys, over_keys)
        victims = np.unique(nb[keep][hit])
        deselected_total = int(victims.size)
        slots[victims] = -1
        report.add_round(1, int(hit.sum()), budget)  # deselect notifications
    else:
        report.add_round(1, 0, budget)

    payload = {"deselected": deselected_total, "phase2_components": 0,
               "phase2_vars": 0, "mt_iterations": 0}
    unassigned = variables[slots[variables] < 0]
    if unassigned.size:
        post_buckets = q - pre_buckets
        if post_buckets == 0:
            raise DivideError("deselection occurred but q < 2 leaves no post bucket")
        mask = np.zeros(g.n, dtype=bool)
        mask[unassigned] = True
        dist = _core.bfs_dist(g.indptr, g.indices, unassigned, 1)
        mask |= dist >= 0
        comp_labels = _core.cc_labels(g.indptr, g.indices, mask)
        ncomp = int(comp_labels.max()) + 1
        payload["phase2_components"] = ncomp
        payload["phase2_vars"] = int(unassigned.size)
        is_unassigned = np.zeros(g.n, dtype=bool)
        is_unassigned[unassigned] = True
        ell = params.ell or max(1, math.ceil(6 * math.log(max(g.n, 2))))
        max_iters = 0
        for comp_idx in range(ncomp):
            comp = np.flatnonzero(comp_labels == comp_idx)
            comp_vars = comp[is_unassigned[comp]]
            var_index = {int(v): i for i, v in enumerate(comp_vars.tolist())}
            evs = []
            for v in comp.tolist():
                if isinstance(g, BipartiteGraph) and v >= g.n_left:
                    continue
                scope = tuple(var_index[w] for w in g.neighbors(v).tolist() if w in var_index)
                if scope:
                    evs.append(lll.LllEvent(scope=scope, struct=("cap", float(thresholds[v])), host=v))
            inst = lll.LllInstance(np.full(comp_vars.size, post_buckets, dtype=np.int64), evs)
            values, iters = _solve_component(inst, mode, seed, comp_idx, params, ell, comp_vars)
            max_iters = max(max_iters, iters)
            slots[comp_vars] = pre_buckets + values
        payload["mt_iterations"] = max_iters
        per_round = ell * slot_bits if mode.model == "CONGEST" else slot_bits
        for _ in range(max_iters):
            report.add_round(per_round, int(g.degrees[unassigned].sum()), budget)
            report.add_round(ell if mode.model == "CONGEST" else 1, int(g.degrees[unassigned].sum()), budget)
            report.add_round(ell if mode.model == "CONGEST" else 1, int(g.degrees[unassigned].sum()), budget)
    report.payload = payload
    return Schedule(q=q, slots=slots, thresholds=thresholds), report


def _solve_component(inst, mode, seed, comp_idx, params, ell, comp_vars):
    last_error = None
    for attempt in range(params.retries + 1):
        sub_seed = rng.child_seed(seed, comp_idx * 1000 + attempt, rng.TAG_DIVIDE_P2)
        try:
            if mode.model == "CONGEST":
                values = lll.parallel_instances_solve(inst, ell, sub_seed)
                return values, lll.default_rounds_per_instance(inst.size)
            values, iters, violated = lll.moser_tardos_run(inst, sub_seed, params.mt_max_rounds)
            if not violated:
                return values, iters
            last_error = lll.LllUnsolved(len(violated), iters)
        except lll.NoWinningInstance as exc:
            last_error = exc
    raise DivideSolverError(comp_idx, comp_vars.tolist(), last_error)
