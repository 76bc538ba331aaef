# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Semantics must match kernels_py exactly (bit-identical outputs); the parity
tests in tests/test_backends.py enforce this.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cy"


def part_counts(indptr, indices, labels, k, nrows):
    cdef cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int32_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t nr = nrows
    cdef Py_ssize_t kk = k
    out = np.zeros((nr, kk), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    cdef Py_ssize_t v, j
    cdef cnp.int64_t l
    for v in range(nr):
        for j in range(ip[v], ip[v + 1]):
            l = lab[idx[j]]
            if l >= 0:
                o[v, l] += 1
    return out


def max_bucket_count(indptr, indices, labels, nrows):
    cdef cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int32_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t nr = nrows
    maxc_arr = np.zeros(nr, dtype=np.int64)
    argb_arr = np.full(nr, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] maxc = maxc_arr
    cdef cnp.int64_t[::1] argb = argb_arr
    cdef cnp.int64_t nbuckets = 0
    cdef Py_ssize_t i, v, j, t
    for i in range(lab.shape[0]):
        if lab[i] + 1 > nbuckets:
            nbuckets = lab[i] + 1
    if nbuckets == 0:
        return maxc_arr, argb_arr
    cdef cnp.int64_t *scratch = <cnp.int64_t *> malloc(nbuckets * sizeof(cnp.int64_t))
    cdef cnp.int64_t *touched = <cnp.int64_t *> malloc(nbuckets * sizeof(cnp.int64_t))
    if scratch == NULL or touched == NULL:
        if scratch != NULL:
            free(scratch)
        if touched != NULL:
            free(touched)
        raise MemoryError()
    cdef Py_ssize_t ntouched
    cdef cnp.int64_t l, best, bestb
    try:
        for i in range(nbuckets):
            scratch[i] = 0
        for v in range(nr):
            ntouched = 0
            for j in range(ip[v], ip[v + 1]):
                l = lab[idx[j]]
                if l < 0:
                    continue
                if scratch[l] == 0:
                    touched[ntouched] = l
                    ntouched += 1
                scratch[l] += 1
            best = 0
            bestb = -1
            for t in range(ntouched):
                l = touched[t]
                if scratch[l] > best or (scratch[l] == best and l < bestb):
                    best = scratch[l]
                    bestb = l
                scratch[l] = 0
            if best > 0:
                maxc[v] = best
                argb[v] = bestb
    finally:
        free(scratch)
        free(touched)
    return maxc_arr, argb_arr


def bfs_dist(indptr, indices, sources, max_dist, allowed=None):
    cdef cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int32_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.int64_t[::1] src = np.ascontiguousarray(sources, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    dist_arr = np.full(n, -1, dtype=np.int32)
    cdef cnp.int32_t[::1] dist = dist_arr
    cdef cnp.uint8_t[::1] ok
    cdef bint has_mask = allowed is not None
    if has_mask:
        ok = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef cnp.int64_t *queue = <cnp.int64_t *> malloc(max(n, 1) * sizeof(cnp.int64_t))
    if queue == NULL:
        raise MemoryError()
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t i, j
    cdef cnp.int64_t v, w
    cdef cnp.int32_t md = <cnp.int32_t> max_dist if max_dist < 2147483647 else 2147483647
    try:
        for i in range(src.shape[0]):
            v = src[i]
            if has_mask and ok[v] == 0:
                continue
            if dist[v] < 0:
                dist[v] = 0
                queue[tail] = v
                tail += 1
        while head < tail:
            v = queue[head]
            head += 1
            if dist[v] >= md:
                continue
            for j in range(ip[v], ip[v + 1]):
                w = idx[j]
                if dist[w] >= 0:
                    continue
                if has_mask and ok[w] == 0:
                    continue
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1
    finally:
        free(queue)
    return dist_arr


def cc_labels(indptr, indices, mask):
    cdef cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int32_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.uint8_t[::1] ok = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = ip.shape[0] - 1
    labels_arr = np.full(n, -1, dtype=np.int32)
    cdef cnp.int32_t[::1] labels = labels_arr
    cdef cnp.int64_t *queue = <cnp.int64_t *> malloc(max(n, 1) * sizeof(cnp.int64_t))
    if queue == NULL:
        raise MemoryError()
    cdef Py_ssize_t head, tail, j
    cdef cnp.int64_t v, w
    cdef cnp.int32_t current = 0
    cdef Py_ssize_t start
    try:
        for start in range(n):
            if ok[start] == 0 or labels[start] >= 0:
                continue
            labels[start] = current
            queue[0] = start
            head = 0
            tail = 1
            while head < tail:
                v = queue[head]
                head += 1
                for j in range(ip[v], ip[v + 1]):
                    w = idx[j]
                    if labels[w] < 0 and ok[w] != 0:
                        labels[w] = current
                        queue[tail] = w
                        tail += 1
            current += 1
    finally:
        free(queue)
    return labels_arr


def vizing_color(n, us, vs):
    cdef cnp.int64_t[::1] u_arr = np.ascontiguousarray(us, dtype=np.int64)
    cdef cnp.int64_t[::1] v_arr = np.ascontiguousarray(vs, dtype=np.int64)
    cdef Py_ssize_t m = u_arr.shape[0]
    cdef Py_ssize_t nn = n
    color_arr = np.full(m, -1, dtype=np.int32)
    if m == 0:
        return color_arr
    cdef cnp.int32_t[::1] color = color_arr
    deg_np = np.bincount(np.asarray(us, dtype=np.int64), minlength=n) + \
        np.bincount(np.asarray(vs, dtype=np.int64), minlength=n)
    cdef cnp.int64_t delta = int(deg_np.max())
    cdef cnp.int64_t nc = delta + 1
    at_arr = np.full(nn * nc, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] at = at_arr
    in_fan_arr = np.zeros(nn, dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_fan = in_fan_arr
    cdef cnp.int64_t *fan = <cnp.int64_t *> malloc((delta + 2) * sizeof(cnp.int64_t))
    cdef cnp.int64_t *fan_edges = <cnp.int64_t *> malloc((delta + 2) * sizeof(cnp.int64_t))
    cdef cnp.int64_t *path = <cnp.int64_t *> malloc((nn + 1) * sizeof(cnp.int64_t))
    cdef cnp.int32_t *old_cols = <cnp.int32_t *> malloc((nn + 1) * sizeof(cnp.int32_t))
    if fan == NULL or fan_edges == NULL or path == NULL or old_cols == NULL:
        if fan != NULL: free(fan)
        if fan_edges != NULL: free(fan_edges)
        if path != NULL: free(path)
        if old_cols != NULL: free(old_cols)
        raise MemoryError()
    cdef Py_ssize_t e, i, t, fan_len, path_len
    cdef cnp.int64_t u, v, w, tip, e2, nxt_w, nxt_e, x
    cdef cnp.int64_t c, d, col, want, col_i, col_next, a, b
    cdef cnp.int32_t old
    cdef Py_ssize_t w_idx
    try:
        for e in range(m):
            u = u_arr[e]
            v = v_arr[e]
            # maximal fan of u starting at v
            fan[0] = v
            fan_edges[0] = e
            in_fan[v] = 1
            fan_len = 1
            while True:
                tip = fan[fan_len - 1] * nc
                nxt_w = -1
                nxt_e = -1
                for col in range(nc):
                    if at[tip + col] < 0:
                        e2 = at[u * nc + col]
                        if e2 >= 0:
                            w = u_arr[e2] ^ v_arr[e2] ^ u
                            if in_fan[w] == 0:
                                nxt_w = w
                                nxt_e = e2
                                break
                if nxt_w < 0:
                    break
                fan[fan_len] = nxt_w
                fan_edges[fan_len] = nxt_e
                in_fan[nxt_w] = 1
                fan_len += 1
            # smallest free colors on u and on the fan tip
            c = -1
            for col in range(nc):
                if at[u * nc + col] < 0:
                    c = col
                    break
            d = -1
            tip = fan[fan_len - 1] * nc
            for col in range(nc):
                if at[tip + col] < 0:
                    d = col
                    break
            if c != d:
                # collect the cd-path from u, then flip it (clear before set)
                path_len = 0
                x = u
                want = d
                while True:
                    e2 = at[x * nc + want]
                    if e2 < 0:
                        break
                    path[path_len] = e2
                    path_len += 1
                    x = u_arr[e2] ^ v_arr[e2] ^ x
                    want = c + d - want
                for i in range(path_len):
                    e2 = path[i]
                    old_cols[i] = color[e2]
                    a = u_arr[e2]
                    b = v_arr[e2]
                    at[a * nc + old_cols[i]] = -1
                    at[b * nc + old_cols[i]] = -1
                    color[e2] = -1
                for i in range(path_len):
                    e2 = path[i]
                    col = c + d - old_cols[i]
                    color[e2] = <cnp.int32_t> col
                    a = u_arr[e2]
                    b = v_arr[e2]
                    at[a * nc + col] = e2
                    at[b * nc + col] = e2
            # smallest valid fan prefix whose tip has d free
            w_idx = -1
            for i in range(fan_len):
                if i > 0:
                    col_i = color[fan_edges[i]]
                    if at[fan[i - 1] * nc + col_i] >= 0:
                        break
                if at[fan[i] * nc + d] < 0:
                    w_idx = i
                    break
            if w_idx < 0:
                raise AssertionError("Misra-Gries invariant broken: no rotatable prefix")
            # rotate prefix toward the uncolored edge
            for i in range(w_idx):
                e2 = fan_edges[i + 1]
                col_next = color[e2]
                a = u_arr[e2]
                b = v_arr[e2]
                at[a * nc + col_next] = -1
                at[b * nc + col_next] = -1
                color[e2] = -1
                e2 = fan_edges[i]
                old = color[e2]
                a = u_arr[e2]
                b = v_arr[e2]
                if old >= 0:
                    at[a * nc + old] = -1
                    at[b * nc + old] = -1
                color[e2] = <cnp.int32_t> col_next
                at[a * nc + col_next] = e2
                at[b * nc + col_next] = e2
            e2 = fan_edges[w_idx]
            old = color[e2]
            a = u_arr[e2]
            b = v_arr[e2]
            if old >= 0:
                at[a * nc + old] = -1
                at[b * nc + old] = -1
            color[e2] = <cnp.int32_t> d
            at[a * nc + d] = e2
            at[b * nc + d] = e2
            # reset fan membership
            for i in range(fan_len):
                in_fan[fan[i]] = 0
    finally:
        free(fan)
        free(fan_edges)
        free(path)
        free(old_cols)
    return color_arr
