"""Second-order (p, q)-biased random walks and their training contexts.

The transition rule follows node2vec: from the current node, each neighbor
x gets unnormalized mass w(cur, x) * alpha, where alpha is 1/p when x is
the previous node, 1 when x is adjacent to the previous node, and 1/q
otherwise (uniform in the edge weights on the first step).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph
from .rng import kernel_seed


class DeadEndError(ValueError):
    """Raised when a transition distribution is requested at a dead end."""


@dataclass(frozen=True)
class WalkConfig:
    """Walk hyper-parameters: return bias p, in-out bias q, walk length,
    context window, and walks per node."""

    p: float = 0.5
    q: float = 1.0
    walk_length: int = 80
    window: int = 8
    walks_per_node: int = 10

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError(f"p and q must be positive, got p={self.p} q={self.q}")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.walk_length < self.window:
            raise ValueError(
                f"walk_length {self.walk_length} shorter than window {self.window}"
            )
        if self.walks_per_node < 0:
            raise ValueError("walks_per_node must be >= 0")


@dataclass
class WalkContext:
    """One training window: a center node and the following positives."""

    center: int
    positives: np.ndarray


def step_distribution(g: Graph, prev, cur: int, cfg: WalkConfig) -> np.ndarray:
    """Transition probabilities from cur, aligned with g.neighbors(cur) order.

    ``prev`` is None on the first step of a walk, which makes the step a
    plain weighted transition.
    """
    nbrs, wgts = g.neighbors(cur)
    if not nbrs:
        raise DeadEndError(f"node {cur} has no neighbors")
    w = np.asarray(wgts, dtype=np.float64)
    if prev is None:
        mass = w.copy()
    else:
        alpha = np.empty(len(nbrs), dtype=np.float64)
        for k, x in enumerate(nbrs):
            if x == prev:
                alpha[k] = 1.0 / cfg.p
            elif g.has_edge(prev, x):
                alpha[k] = 1.0
            else:
                alpha[k] = 1.0 / cfg.q
        mass = w * alpha
    total = mass.sum()
    if total <= 0.0:
        raise DeadEndError(f"all transition mass from node {cur} is zero")
    return mass / total


@njit(cache=True)
def _sorted_contains(indices, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) // 2
        v = indices[mid]
        if v == x:
            return True
        if v < x:
            lo = mid + 1
        else:
            hi = mid
    return False


@njit(cache=True)
def _walk_kernel(indptr, indices, weights, start, length, p, q, seed):
    np.random.seed(seed)
    walk = np.empty(length, dtype=np.int64)
    walk[0] = start
    prev = -1
    cur = start
    n = 1
    while n < length:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        deg = hi - lo
        if deg == 0:
            break
        cum = np.empty(deg, dtype=np.float64)
        total = 0.0
        if prev < 0:
            for k in range(deg):
                total += weights[lo + k]
                cum[k] = total
        else:
            plo = indptr[prev]
            phi = indptr[prev + 1]
            for k in range(deg):
                x = indices[lo + k]
                if x == prev:
                    a = 1.0 / p
                elif _sorted_contains(indices, plo, phi, x):
                    a = 1.0
                else:
                    a = 1.0 / q
                total += weights[lo + k] * a
                cum[k] = total
        if total <= 0.0:
            break
        u = np.random.random() * total
        k = np.searchsorted(cum, u, side="right")
        if k >= deg:
            k = deg - 1
        nxt = indices[lo + k]
        walk[n] = nxt
        prev = cur
        cur = nxt
        n += 1
    return walk[:n]


def random_walk(g: Graph, start: int, cfg: WalkConfig, rng: np.random.Generator) -> np.ndarray:
    """Sample one biased walk from start; consumes one draw from rng.

    An isolated start yields a length-1 walk. Every other node reached has
    at least the incoming edge, so walks only truncate at zero-mass steps.
    """
    if not 0 <= start < g.node_count:
        raise ValueError(f"start node {start} out of range")
    indptr, indices, weights = g.csr()
    return _walk_kernel(
        indptr, indices, weights, start, cfg.walk_length, cfg.p, cfg.q, kernel_seed(rng)
    )


def context_arrays(walk: np.ndarray, window: int):
    """Slice a walk into (centers, positives) arrays.

    Returns centers of shape (n,) and positives of shape (n, window - 1)
    with n = max(0, len(walk) - window + 1); context i covers
    walk[i : i + window] with walk[i] as the center.
    """
    walk = np.asarray(walk, dtype=np.int64)
    n = len(walk) - window + 1
    if n <= 0:
        return np.empty(0, dtype=np.int64), np.empty((0, window - 1), dtype=np.int64)
    view = np.lib.stride_tricks.sliding_window_view(walk, window)
    return np.ascontiguousarray(view[:n, 0]), np.ascontiguousarray(view[:n, 1:])


def contexts(walk, window: int) -> list[WalkContext]:
    """Slice a walk into WalkContext objects (empty when the walk is short)."""
    centers, positives = context_arrays(np.asarray(walk), window)
    return [WalkContext(int(c), p) for c, p in zip(centers, positives)]


def dump_walks(walks, path):
    """Write walks one per line as space-separated node ids."""
    with open(path, "w") as fh:
        for walk in walks:
            fh.write(" ".join(str(int(n)) for n in walk) + "\n")


def load_walks(path) -> list[np.ndarray]:
    walks = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                walks.append(np.array([int(t) for t in line.split()], dtype=np.int64))
    return walks
