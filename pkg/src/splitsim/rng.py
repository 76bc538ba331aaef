"""Deterministic counter-based randomness.

All randomness in the package flows through splitmix64-style hashing of
(seed, id, tag, counter) tuples.  This gives per-node random streams that are
independent of execution order: resampling node u never perturbs draws made
for node v, which the simulator invariants rely on.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)

# stream tags; values are arbitrary but frozen (changing them changes all outputs)
TAG_GRAPH_GEN = 1
TAG_DIVIDE_P1 = 2
TAG_DIVIDE_P2 = 3
TAG_SHATTER = 4
TAG_ZERO_ROUND = 5
TAG_MT = 6
TAG_PARALLEL = 7
TAG_NIBBLE = 8
TAG_SPARSIFY = 9
TAG_EDGE_GROUP = 10
TAG_PROTOCOL = 11
TAG_CHILD = 12
TAG_BENCH = 13


def _u64(x) -> np.uint64:
    return np.uint64(int(x) & _MASK)


def _finalize(z):
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


def _step(h, x):
    return _finalize((h ^ x) + _GOLDEN)


def mix(seed: int, a, b=0, c=0):
    """Hash (seed, a, b, c) to uint64; `a` and `b` may be arrays of non-negative ints."""
    a = np.asarray(a, dtype=np.uint64) if np.ndim(a) else _u64(a)
    b = np.asarray(b, dtype=np.uint64) if np.ndim(b) else _u64(b)
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        h = _finalize(_u64(seed) + _GOLDEN)
        h = _step(h, a)
        h = _step(h, b)
        h = _step(h, _u64(c))
    return h


def randint(seed: int, a, b, c, m: int):
    """Deterministic draw in [0, m) for stream position (seed, a, b, c)."""
    h = mix(seed, a, b, c) % np.uint64(m)
    return h.astype(np.int64) if np.ndim(a) else int(h)


def uniform(seed: int, a, b=0, c=0):
    """Deterministic float in [0, 1) for stream position (seed, a, b, c)."""
    h = mix(seed, a, b, c) >> _U11
    return h.astype(np.float64) * 2.0**-53 if np.ndim(a) else float(h) * 2.0**-53


def child_seed(seed: int, index: int, tag: int = TAG_CHILD) -> int:
    """Documented seed-split function: all subordinate seeds derive from here."""
    return int(mix(seed, index, tag, 0) & np.uint64(0x7FFFFFFFFFFFFFFF))


class NodeStream:
    """Per-(seed, node, round) stream with a call counter, for protocol programs."""

    def __init__(self, seed: int, node: int, rnd: int):
        self._seed = seed
        self._node = node
        self._round = rnd
        self._count = 0

    def _next(self):
        h = mix(self._seed, self._node, self._round, self._count)
        self._count += 1
        return h

    def randint(self, m: int) -> int:
        return int(self._next() % np.uint64(m))

    def random(self) -> float:
        return float(self._next() >> _U11) * 2.0**-53
