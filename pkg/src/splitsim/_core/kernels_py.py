"""Pure numpy/Python implementations of the hot kernels.

The compiled backend in ``_kernels_cy`` mirrors these functions exactly; both
must produce bit-identical outputs (see tests/test_backends.py).  Keep the two
in sync when changing semantics.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"


def _ragged_neighbors(indptr, indices, frontier):
    """Concatenated neighbor lists of `frontier` nodes."""
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return indices[:0]
    ends = np.cumsum(counts)
    flat = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts) + np.repeat(starts, counts)
    return indices[flat]


def part_counts(indptr, indices, labels, k, nrows):
    """For each row v < nrows, count neighbors with each label in [0, k).

    Neighbors with negative labels are ignored.
    """
    sub = indices[: indptr[nrows]]
    lab = labels[sub]
    rows = np.repeat(np.arange(nrows, dtype=np.int64), np.diff(indptr[: nrows + 1]))
    keep = lab >= 0
    flat = rows[keep] * k + lab[keep]
    counts = np.bincount(flat, minlength=nrows * k)
    return counts.reshape(nrows, k)


def max_bucket_count(indptr, indices, labels, nrows):
    """Per row: (max neighbor count in any bucket, smallest bucket attaining it).

    Rows whose neighbors all have negative labels get (0, -1).  Avoids the
    nrows x nbuckets matrix, so the bucket count can be large.
    """
    sub = indices[: indptr[nrows]]
    all_lab = labels[sub]
    rows = np.repeat(np.arange(nrows, dtype=np.int64), np.diff(indptr[: nrows + 1]))
    keep = all_lab >= 0
    rows = rows[keep]
    lab = all_lab[keep].astype(np.int64)
    maxc = np.zeros(nrows, dtype=np.int64)
    argb = np.full(nrows, -1, dtype=np.int64)
    if rows.size == 0:
        return maxc, argb
    nbuckets = int(lab.max()) + 1
    keys = rows * nbuckets + lab
    ukeys, counts = np.unique(keys, return_counts=True)
    urows = ukeys // nbuckets
    ubuckets = ukeys % nbuckets
    np.maximum.at(maxc, urows, counts)
    at_max = counts == maxc[urows]
    big = np.full(nrows, nbuckets, dtype=np.int64)
    np.minimum.at(big, urows[at_max], ubuckets[at_max])
    has = maxc > 0
    argb[has] = big[has]
    return maxc, argb


def bfs_dist(indptr, indices, sources, max_dist, allowed=None):
    """Multi-source BFS hop distances, -1 where unreached within max_dist.

    If `allowed` is given, the search never enters nodes outside the mask
    (sources outside the mask are dropped).
    """
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    sources = np.asarray(sources, dtype=np.int64)
    if allowed is not None and sources.size:
        sources = sources[allowed[sources]]
    if sources.size == 0:
        return dist
    frontier = np.unique(sources)
    dist[frontier] = 0
    depth = 0
    while frontier.size and depth < max_dist:
        depth += 1
        nb = _ragged_neighbors(indptr, indices, frontier)
        nb = nb[dist[nb] < 0]
        if allowed is not None and nb.size:
            nb = nb[allowed[nb]]
        if nb.size == 0:
            break
        frontier = np.unique(nb)
        dist[frontier] = depth
    return dist


def cc_labels(indptr, indices, mask):
    """Connected-component labels within the induced subgraph on `mask`.

    Labels are consecutive ints assigned in ascending order of each
    component's smallest node id; nodes outside the mask get -1.
    """
    n = len(indptr) - 1
    labels = np.full(n, -1, dtype=np.int32)
    current = 0
    for start in range(n):
        if not mask[start] or labels[start] >= 0:
            continue
        labels[start] = current
        frontier = np.array([start], dtype=np.int64)
        while frontier.size:
            nb = _ragged_neighbors(indptr, indices, frontier)
            nb = nb[(labels[nb] < 0) & mask[nb]]
            if nb.size == 0:
                break
            frontier = np.unique(nb)
            labels[frontier] = current
        current += 1
    return labels


def vizing_color(n, us, vs):
    """Proper edge coloring of a simple graph with at most Delta+1 colors.

    Misra-Gries fan construction: for each uncolored edge, build a maximal
    fan, invert the alternating cd-path through the fan center, rotate a
    valid fan prefix, and color its last edge.  Edges are processed in input
    order and every choice takes the smallest admissible color, so the output
    is deterministic.
    """
    m = len(us)
    color = np.full(m, -1, dtype=np.int32)
    if m == 0:
        return color
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    deg = np.bincount(us, minlength=n) + np.bincount(vs, minlength=n)
    delta = int(deg.max())
    nc = delta + 1
    at = np.full(n * nc, -1, dtype=np.int64)  # at[v*nc+c] = edge colored c at v

    def free(x):
        base = x * nc
        for col in range(nc):
            if at[base + col] < 0:
                return col
        raise AssertionError("no free color; degree bookkeeping broken")

    def set_color(e2, col):
        old = color[e2]
        a, b = us[e2], vs[e2]
        if old >= 0:
            at[a * nc + old] = -1
            at[b * nc + old] = -1
        color[e2] = col
        if col >= 0:
            at[a * nc + col] = e2
            at[b * nc + col] = e2

    for e in range(m):
        u = int(us[e])
        v = int(vs[e])
        # maximal fan of u starting at v; fan_edges[i] joins u and fan[i]
        fan = [v]
        fan_edges = [e]
        fan_set = {v}
        while True:
            tip = fan[-1] * nc
            nxt_w = -1
            nxt_e = -1
            for col in range(nc):
                if at[tip + col] < 0:  # col free on fan tip
                    e2 = at[u * nc + col]
                    if e2 >= 0:
                        w = int(us[e2] ^ vs[e2] ^ u)
                        if w not in fan_set:
                            nxt_w = w
                            nxt_e = e2
                            break
            if nxt_w < 0:
                break
            fan.append(nxt_w)
            fan_edges.append(int(nxt_e))
            fan_set.add(nxt_w)
        c = free(u)
        d = free(fan[-1])
        if c != d:
            # walk the cd-path from u (colors alternating d, c), then flip it
            path = []
            x = u
            want = d
            while True:
                e2 = int(at[x * nc + want])
                if e2 < 0:
                    break
                path.append(e2)
                x = int(us[e2] ^ vs[e2] ^ x)
                want = c + d - want
            # clear first: flipping in place would corrupt slots shared by
            # consecutive path edges
            old_cols = [int(color[e2]) for e2 in path]
            for e2 in path:
                set_color(e2, -1)
            for e2, oc in zip(path, old_cols):
                set_color(e2, c + d - oc)
        # smallest fan prefix that is still a fan (post-inversion colors) and
        # whose tip has d free; Misra-Gries guarantees one exists
        w_idx = -1
        for i in range(len(fan)):
            if i > 0:
                col_i = color[fan_edges[i]]
                if at[fan[i - 1] * nc + col_i] >= 0:
                    break  # prefix fan property broken from here on
            if at[fan[i] * nc + d] < 0:
                w_idx = i
                break
        if w_idx < 0:
            raise AssertionError("Misra-Gries invariant broken: no rotatable prefix")
        # rotate: shift colors one step toward the uncolored edge
        for i in range(w_idx):
            col_next = color[fan_edges[i + 1]]
            set_color(fan_edges[i + 1], -1)
            set_color(fan_edges[i], col_next)
        set_color(fan_edges[w_idx], d)
    return color
