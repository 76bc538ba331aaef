"""Constructive Lovász Local Lemma engine.

Instances carry finite-domain variables and bad events over variable scopes.
The Moser-Tardos solver resamples the scoped variables of violated events
that are local id-minima in the dependency graph restricted to violated
events.  Draws come from per-(variable, epoch) streams, so the generic
engine and the vectorized fast path (for structured deviation events)
produce identical executions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import graphs, rng

BRUTE_FORCE_CAP = 2 ** 20


class LllError(RuntimeError):
    pass


class LllUnsolved(LllError):
    def __init__(self, violated_count, iterations):
        super().__init__(
            f"moser_tardos cap hit after {iterations} iterations, {violated_count} events still violated")
        self.violated_count = violated_count
        self.iterations = iterations


class NoWinningInstance(LllError):
    pass


class BruteForceCap(LllError):
    pass


UNSATISFIABLE = "unsatisfiable"


@dataclass
class LllEvent:
    """Bad event over a variable scope.

    `predicate(vals)` gets the scoped values in scope order and returns True
    when the event is violated.  `struct` optionally describes the predicate
    so the vectorized engine can evaluate it:

      ("dev", k, z)      max part count among scope deviates from len/k by > z
      ("cap", z)         some value occurs more than z times in the scope
      ("pair", iu, iv)   scope is (u, v); violated iff vals == (iu, iv)
    """
    scope: tuple
    predicate: object = None
    struct: tuple | None = None
    p: float | None = None
    host: int = -1

    def violated(self, values) -> bool:
        vals = [values[v] for v in self.scope]
        if self.struct is not None:
            kind = self.struct[0]
            if kind == "dev":
                _, k, z = self.struct
                counts = np.bincount(vals, minlength=k)
                return bool(np.abs(counts - len(vals) / k).max() > z)
            if kind == "cap":
                z = self.struct[1]
                if not vals:
                    return False
                return int(np.bincount(vals).max()) > z
            if kind == "pair":
                return vals[0] == self.struct[1] and vals[1] == self.struct[2]
            raise LllError(f"unknown struct kind {kind!r}")
        return bool(self.predicate(vals))


@dataclass
class LllInstance:
    domains: np.ndarray  # per-variable domain size
    events: list
    hosts: np.ndarray | None = None  # per-variable host node
    weights: list | None = None  # optional per-variable sampling weights

    def __post_init__(self):
        self.domains = np.asarray(self.domains, dtype=np.int64)
        if self.domains.size and self.domains.min() < 1:
            raise LllError("every variable needs a nonempty domain")
        for ev in self.events:
            for v in ev.scope:
                if not (0 <= v < self.nvars):
                    raise LllError(f"event scope references unknown variable {v}")

    @property
    def nvars(self) -> int:
        return int(self.domains.size)

    @property
    def size(self) -> int:
        return self.nvars + len(self.events)

    def domain_product(self) -> int:
        out = 1
        for d in self.domains.tolist():
            out *= d
        return out


def _draw(inst: LllInstance, seed: int, var: int, epoch: int) -> int:
    if inst.weights is not None and inst.weights[var] is not None:
        u = rng.uniform(seed, var, epoch, rng.TAG_MT)
        w = np.asarray(inst.weights[var], dtype=np.float64)
        cdf = np.cumsum(w / w.sum())
        return int(np.searchsorted(cdf, u, side="right"))
    return int(rng.mix(seed, var, epoch, rng.TAG_MT) % np.uint64(int(inst.domains[var])))


def _draw_vec(inst: LllInstance, seed: int, vars_arr, epochs) -> np.ndarray:
    h = rng.mix(seed, vars_arr, epochs, rng.TAG_MT)
    return (h % inst.domains[vars_arr].astype(np.uint64)).astype(np.int64)


def sample_all(inst: LllInstance, seed: int, epochs=None) -> np.ndarray:
    epochs = np.zeros(inst.nvars, dtype=np.int64) if epochs is None else epochs
    if inst.weights is None:
        vars_arr = np.arange(inst.nvars, dtype=np.int64)
        return _draw_vec(inst, seed, vars_arr, epochs)
    return np.array([_draw(inst, seed, v, int(epochs[v])) for v in range(inst.nvars)], dtype=np.int64)


def evaluate_events(inst: LllInstance, values) -> list:
    """Ids of violated events under a complete assignment."""
    return [i for i, ev in enumerate(inst.events) if ev.violated(values)]


def dependency_graph(inst: LllInstance) -> graphs.Graph:
    """One node per event; edge iff the scopes share a variable."""
    by_var = {}
    for i, ev in enumerate(inst.events):
        for v in set(ev.scope):
            by_var.setdefault(v, []).append(i)
    pairs = set()
    for evs in by_var.values():
        for a in range(len(evs)):
            for b in range(a + 1, len(evs)):
                pairs.add((evs[a], evs[b]))
    us = [a for a, _ in pairs]
    vs = [b for _, b in pairs]
    return graphs.Graph.from_edges(len(inst.events), us, vs)


def _violated_minima(inst: LllInstance, violated: list) -> list:
    """Violated events that are local id-minima among violated neighbors."""
    if not violated:
        return []
    vio = sorted(violated)
    min_per_var = {}
    for i in vio:
        for v in inst.events[i].scope:
            if v not in min_per_var or i < min_per_var[v]:
                min_per_var[v] = i
    return [i for i in vio if all(min_per_var[v] == i for v in inst.events[i].scope)]


class _StructEngine:
    """Vectorized evaluation for instances whose events are all structured.

    Produces the same violated sets, minima, and draws as the generic loop.
    """

    def __init__(self, inst: LllInstance):
        self.inst = inst
        nev = len(inst.events)
        scope_lens = np.array([len(ev.scope) for ev in inst.events], dtype=np.int64)
        self.indptr = np.zeros(nev + 1, dtype=np.int64)
        np.cumsum(scope_lens, out=self.indptr[1:])
        self.vars = np.concatenate([np.asarray(ev.scope, dtype=np.int64) for ev in inst.events]) \
            if nev else np.zeros(0, dtype=np.int64)
        self.dev_groups = {}  # k -> (event ids, z array)
        cap_ids, cap_z = [], []
        pair_ids, pair_u, pair_v, pair_iu, pair_iv = [], [], [], [], []
        for i, ev in enumerate(inst.events):
            kind = ev.struct[0]
            if kind == "dev":
                _, k, z = ev.struct
                self.dev_groups.setdefault(int(k), ([], []))
                self.dev_groups[int(k)][0].append(i)
                self.dev_groups[int(k)][1].append(float(z))
            elif kind == "cap":
                cap_ids.append(i)
                cap_z.append(float(ev.struct[1]))
            elif kind == "pair":
                pair_ids.append(i)
                pair_u.append(ev.scope[0])
                pair_v.append(ev.scope[1])
                pair_iu.append(ev.struct[1])
                pair_iv.append(ev.struct[2])
            else:
                raise LllError(f"unknown struct kind {kind!r}")
        self.dev = []
        for k, (ids, zs) in self.dev_groups.items():
            ids = np.array(ids, dtype=np.int64)
            lens = scope_lens[ids]
            gp = np.zeros(ids.size + 1, dtype=np.int64)
            np.cumsum(lens, out=gp[1:])
            gv = np.concatenate([self.vars[self.indptr[i]: self.indptr[i + 1]] for i in ids]) \
                if ids.size else np.zeros(0, dtype=np.int64)
            rows = np.repeat(np.arange(ids.size, dtype=np.int64), lens)
            self.dev.append((k, ids, np.array(zs), gp, gv, rows, lens.astype(np.float64)))
        self.cap_ids = np.array(cap_ids, dtype=np.int64)
        self.cap_z = np.array(cap_z, dtype=np.float64)
        if self.cap_ids.size:
            lens = scope_lens[self.cap_ids]
            self.cap_indptr = np.zeros(self.cap_ids.size + 1, dtype=np.int64)
            np.cumsum(lens, out=self.cap_indptr[1:])
            self.cap_vars = np.concatenate(
                [self.vars[self.indptr[i]: self.indptr[i + 1]] for i in self.cap_ids]).astype(np.int32)
        self.pair_ids = np.array(pair_ids, dtype=np.int64)
        self.pair_u = np.array(pair_u, dtype=np.int64)
        self.pair_v = np.array(pair_v, dtype=np.int64)
        self.pair_iu = np.array(pair_iu, dtype=np.int64)
        self.pair_iv = np.array(pair_iv, dtype=np.int64)
        self.nev = nev

    def violated_mask(self, values) -> np.ndarray:
        from . import _core

        out = np.zeros(self.nev, dtype=bool)
        for k, ids, zs, gp, gv, rows, lens in self.dev:
            if ids.size == 0:
                continue
            counts = np.bincount(rows * k + values[gv], minlength=ids.size * k).reshape(ids.size, k)
            dev = np.abs(counts - (lens / k)[:, None]).max(axis=1)
            out[ids] = dev > zs
        if self.cap_ids.size:
            maxc, _ = _core.max_bucket_count(self.cap_indptr, self.cap_vars, values, self.cap_ids.size)
            out[self.cap_ids] = maxc > self.cap_z
        if self.pair_ids.size:
            out[self.pair_ids] = (values[self.pair_u] == self.pair_iu) & (values[self.pair_v] == self.pair_iv)
        return out

    def minima(self, violated_mask) -> np.ndarray:
        vio = np.flatnonzero(violated_mask)
        if vio.size == 0:
            return vio
        lens = self.indptr[vio + 1] - self.indptr[vio]
        vars_cat = np.concatenate([self.vars[self.indptr[i]: self.indptr[i + 1]] for i in vio.tolist()])
        owner = np.repeat(vio, lens)
        min_per_var = np.full(self.inst.nvars, self.nev, dtype=np.int64)
        np.minimum.at(min_per_var, vars_cat, owner)
        starts = np.zeros(vio.size, dtype=np.int64)
        starts[1:] = np.cumsum(lens)[:-1]
        seg_min = np.minimum.reduceat(min_per_var[vars_cat], starts)
        return vio[seg_min == vio]


def moser_tardos_run(inst: LllInstance, seed: int, max_rounds: int):
    """Capped Moser-Tardos; returns (values, iterations, violated_ids)."""
    fast = inst.weights is None and inst.events and all(ev.struct is not None for ev in inst.events)
    if fast:
        return _moser_tardos_fast(inst, seed, max_rounds)
    epochs = np.zeros(inst.nvars, dtype=np.int64)
    values = sample_all(inst, seed, epochs)
    iterations = 0
    while True:
        violated = evaluate_events(inst, values)
        if not violated or iterations >= max_rounds:
            return values, iterations, violated
        iterations += 1
        for i in _violated_minima(inst, violated):
            for v in inst.events[i].scope:
                epochs[v] += 1
                values[v] = _draw(inst, seed, v, int(epochs[v]))


def _moser_tardos_fast(inst: LllInstance, seed: int, max_rounds: int):
    eng = _StructEngine(inst)
    epochs = np.zeros(inst.nvars, dtype=np.int64)
    values = sample_all(inst, seed, epochs)
    iterations = 0
    while True:
        mask = eng.violated_mask(values)
        if not mask.any() or iterations >= max_rounds:
            return values, iterations, np.flatnonzero(mask).tolist()
        iterations += 1
        minima = eng.minima(mask)
        touched = np.concatenate(
            [eng.vars[eng.indptr[i]: eng.indptr[i + 1]] for i in minima.tolist()])
        epochs[touched] += 1
        values[touched] = _draw_vec(inst, seed, touched, epochs[touched])


def moser_tardos(inst: LllInstance, seed: int, max_rounds: int = 10_000) -> np.ndarray:
    """Resample violated local-minima events until no event is violated."""
    values, iterations, violated = moser_tardos_run(inst, seed, max_rounds)
    if violated:
        raise LllUnsolved(len(violated), iterations)
    return values


def default_rounds_per_instance(size: int, factor: int = 8) -> int:
    return math.ceil(factor * math.log(size + 2))


def parallel_instances_solve(inst: LllInstance, ell: int, seed: int,
                             rounds_per_instance: int | None = None) -> np.ndarray:
    """Race `ell` independent bounded Moser-Tardos executions.

    Each event owner computes the bit vector of instances that satisfy it;
    the bitwise AND over events yields the winning instances, and the
    assignment of the lowest-index winner is returned.
    """
    if ell < 1:
        raise LllError("need at least one parallel instance")
    if rounds_per_instance is None:
        rounds_per_instance = default_rounds_per_instance(inst.size)
    winner_values = None
    winner = -1
    satisfied_bits = np.zeros(ell, dtype=bool)
    for t in range(ell):
        sub_seed = rng.child_seed(seed, t, rng.TAG_PARALLEL)
        values, _, violated = moser_tardos_run(inst, sub_seed, rounds_per_instance)
        satisfied_bits[t] = not violated
        if not violated and winner < 0:
            winner = t
            winner_values = values
    if winner < 0:
        raise NoWinningInstance(f"none of {ell} instances satisfied all events")
    return winner_values


def brute_force_solve(inst: LllInstance, cap: int = BRUTE_FORCE_CAP):
    """Exhaustive lexicographic search; the desk-scale oracle.

    Returns the first assignment violating no event, or UNSATISFIABLE.
    """
    if inst.domain_product() > cap:
        raise BruteForceCap(f"domain product exceeds cap {cap}")
    values = np.zeros(inst.nvars, dtype=np.int64)
    domains = inst.domains
    while True:
        if not evaluate_events(inst, values):
            return values
        # next assignment in lexicographic order, last variable fastest
        pos = inst.nvars - 1
        while pos >= 0:
            values[pos] += 1
            if values[pos] < domains[pos]:
                break
            values[pos] = 0
            pos -= 1
        if pos < 0:
            return UNSATISFIABLE


@dataclass
class CriterionReport:
    d: int
    p_max: float
    poly: dict = field(default_factory=dict)  # c -> p_max * d**c
    epd_lt_1: bool = False
    f_of_d: float | None = None

    def to_dict(self):
        return {"d": self.d, "p_max": self.p_max, "poly": self.poly,
                "epd_lt_1": self.epd_lt_1, "f_of_d": self.f_of_d}


def criterion_report(inst: LllInstance, f=None) -> CriterionReport:
    """Dependency degree and p*d^c diagnostics; caller supplies p bounds."""
    ps = [ev.p for ev in inst.events if ev.p is not None]
    if len(ps) != len(inst.events):
        raise LllError("criterion_report needs a p bound on every event")
    dep = dependency_graph(inst)
    d = dep.max_degree
    p_max = max(ps) if ps else 0.0
    poly = {c: p_max * d ** c for c in (1, 2, 8, 11)}
    return CriterionReport(
        d=d,
        p_max=p_max,
        poly=poly,
        epd_lt_1=(math.e * p_max * d < 1),
        f_of_d=(None if f is None else f(d)),
    )
