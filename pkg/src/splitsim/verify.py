"""Independent checkers for every output artifact.

Checkers recompute degrees and counts from raw adjacency, never from
algorithm caches or traces, and are pure functions of (instance, artifact).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .graphs import BipartiteGraph


class CheckError(ValueError):
    pass


@dataclass
class CheckReport:
    passed: bool
    kind: str
    worst_id: int = -1
    worst_value: float = 0.0
    bound: float = 0.0
    max_value: float = 0.0
    mean_value: float = 0.0
    histogram: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "pass": self.passed,
            "kind": self.kind,
            "worst": {"id": self.worst_id, "value": self.worst_value, "bound": self.bound},
            "max": self.max_value,
            "mean": self.mean_value,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "detail": self.detail,
        }
        return json.dumps(doc, sort_keys=True)


def _histogram(values) -> dict:
    vals, counts = np.unique(np.asarray(values), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def _event_rows(inst):
    return inst.n_left if isinstance(inst, BipartiteGraph) else inst.n


def _summary(report: CheckReport, values, bound, offenders):
    values = np.asarray(values, dtype=np.float64)
    if values.size:
        report.max_value = float(values.max())
        report.mean_value = float(values.mean())
        worst = int(values.argmax())
        report.worst_id = worst
        report.worst_value = float(values[worst])
        report.histogram = _histogram(np.floor(values).astype(np.int64))
    report.bound = float(bound) if np.isscalar(bound) else float(np.asarray(bound).max())
    report.passed = not bool(np.any(offenders))
    if np.any(offenders):
        bad = int(np.flatnonzero(offenders)[0])
        report.worst_id = int(np.asarray(values).argmax()) if values.size else bad
    return report


def check_divide(inst, schedule, thresholds=None) -> CheckReport:
    """Every event node has at most z(v) neighbors in every bucket."""
    nrows = _event_rows(inst)
    slots = np.asarray(schedule.slots, dtype=np.int64)
    if isinstance(inst, BipartiteGraph):
        variables = np.arange(inst.n_left, inst.n)
    else:
        variables = np.arange(inst.n)
    if np.any(slots[variables] < 0) or (variables.size and np.any(slots[variables] >= schedule.q)):
        raise CheckError("schedule is not completed")
    z = np.asarray(thresholds if thresholds is not None else schedule.thresholds, dtype=np.float64)
    maxc, argb = _core.max_bucket_count(inst.indptr, inst.indices, slots, nrows)
    offenders = maxc > z[:nrows]
    report = CheckReport(passed=True, kind="divide")
    report.detail = {"q": schedule.q, "buckets_used": int(len(np.unique(slots[variables]))) if variables.size else 0}
    _summary(report, maxc, z[:nrows] if nrows else 0.0, offenders)
    if offenders.any():
        bad = int(np.flatnonzero(offenders)[0])
        report.worst_id = bad
        report.worst_value = float(maxc[bad])
        report.bound = float(z[bad])
        report.detail["offender_bucket"] = int(argb[bad])
    return report


def check_split(inst, parts, k: int, eps: float, delta_left=None) -> CheckReport:
    """Every event node v and part i: | |N(v) & V_i| - d(v)/k | <= eps*Delta_L/k."""
    nrows = _event_rows(inst)
    parts = np.asarray(parts, dtype=np.int64)
    if isinstance(inst, BipartiteGraph):
        variables = np.arange(inst.n_left, inst.n)
    else:
        variables = np.arange(inst.n)
    if variables.size and (np.any(parts[variables] < 0) or np.any(parts[variables] >= k)):
        raise CheckError("assignment is not complete")
    if delta_left is None:
        delta_left = inst.delta_left if isinstance(inst, BipartiteGraph) else inst.max_degree
    bound = eps * delta_left / k
    counts = _core.part_counts(inst.indptr, inst.indices, parts, k, nrows)
    degs = np.diff(inst.indptr[: nrows + 1]).astype(np.float64)
    dev = np.abs(counts - (degs / k)[:, None]).max(axis=1) if nrows else np.zeros(0)
    offenders = dev > bound
    report = CheckReport(passed=True, kind="split")
    report.detail = {"k": k, "eps": eps, "delta_left": int(delta_left)}
    _summary(report, dev, bound, offenders)
    if offenders.any():
        bad = int(dev.argmax())
        report.worst_id = bad
        report.worst_value = float(dev[bad])
    return report


def check_edge_coloring(g, coloring, budget: float) -> CheckReport:
    """Properness (incident edges differ) plus palette size <= budget."""
    us, vs, colors = coloring.us, coloring.vs, np.asarray(coloring.colors, dtype=np.int64)
    if colors.size and colors.min() < 0:
        raise CheckError("coloring is not complete")
    heads = np.concatenate([us, vs])
    cols2 = np.concatenate([colors, colors])
    order = np.lexsort((cols2, heads))
    h, c = heads[order], cols2[order]
    clash = (h[1:] == h[:-1]) & (c[1:] == c[:-1])
    palette_used = int(np.unique(colors).size) if colors.size else 0
    offenders = np.zeros(1, dtype=bool)
    worst = -1
    if clash.any():
        offenders[0] = True
        worst = int(h[1:][clash][0])
    report = CheckReport(passed=not clash.any() and palette_used <= budget, kind="edge-coloring")
    report.worst_id = worst
    report.bound = float(budget)
    report.max_value = float(palette_used)
    report.mean_value = float(palette_used)
    report.detail = {"palette_used": palette_used, "proper": not bool(clash.any())}
    report.histogram = _histogram(colors) if colors.size and colors.size <= 100_000 else {}
    return report


def check_list_coloring(inst, coloring) -> CheckReport:
    """Every node's color is from its original list; no monochromatic edge."""
    colors = np.asarray(coloring, dtype=np.int64)
    g = inst.graph
    if colors.size != g.n or (g.n and colors.min() < 0):
        raise CheckError("coloring is not complete")
    from_list = np.array([int(colors[v]) in inst.color_set(v) for v in range(g.n)])
    us, vs = g.edges()
    mono = colors[us] == colors[vs]
    ok = bool(from_list.all()) and not bool(mono.any())
    report = CheckReport(passed=ok, kind="list-coloring")
    report.detail = {
        "off_list_nodes": int((~from_list).sum()),
        "monochromatic_edges": int(mono.sum()),
    }
    if not from_list.all():
        report.worst_id = int(np.flatnonzero(~from_list)[0])
    elif mono.any():
        report.worst_id = int(us[mono][0])
    return report


def check_defective(g, colors, k: int, eps: float) -> CheckReport:
    """Defective-coloring alias: each color class induces degree <= (1+eps)*Delta/k."""
    colors = np.asarray(colors, dtype=np.int64)
    if g.n and (colors.size != g.n or colors.min() < 0):
        raise CheckError("coloring is not complete")
    bound = (1.0 + eps) * g.max_degree / k
    counts = _core.part_counts(g.indptr, g.indices, colors, max(k, 1), g.n)
    defect = counts[np.arange(g.n), colors] if g.n else np.zeros(0, dtype=np.int64)
    offenders = defect > bound
    report = CheckReport(passed=True, kind="defective")
    report.detail = {"k": k, "eps": eps}
    return _summary(report, defect, bound, offenders)


@dataclass
class ComponentStats:
    sizes_per_set: list
    max_size: int
    histogram: dict

    def to_json(self) -> str:
        return json.dumps({
            "max_size": self.max_size,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "per_set_max": [max(s) if s else 0 for s in self.sizes_per_set],
        }, sort_keys=True)


def component_stats(g, bad_sets) -> ComponentStats:
    """Component sizes of g[Bad_j + N(Bad_j)] for each bad set."""
    sizes_per_set = []
    all_sizes = []
    for bad in bad_sets:
        bad = np.asarray(list(bad), dtype=np.int64)
        if bad.size == 0:
            sizes_per_set.append([])
            continue
        mask = np.zeros(g.n, dtype=bool)
        mask[bad] = True
        dist = _core.bfs_dist(g.indptr, g.indices, bad, 1)
        mask |= dist >= 0
        labels = _core.cc_labels(g.indptr, g.indices, mask)
        sizes = np.bincount(labels[labels >= 0]).tolist()
        sizes_per_set.append(sizes)
        all_sizes.extend(sizes)
    return ComponentStats(
        sizes_per_set=sizes_per_set,
        max_size=max(all_sizes) if all_sizes else 0,
        histogram=_histogram(all_sizes) if all_sizes else {},
    )


def chernoff_bound(n_vars: float, k: float, z: float) -> float:
    """Deviation bound 2*exp(-z^2*k/(3N)) for a sum of N Bernoulli(1/k) variables."""
    if z > n_vars / k:
        raise CheckError("bound needs z <= N/k")
    return 2.0 * math.exp(-(z * z) * k / (3.0 * n_vars))
