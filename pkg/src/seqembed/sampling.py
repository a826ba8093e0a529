"""Node appearance frequencies and O(1) weighted negative sampling.

Negative-sample ids are drawn from a Walker alias table built over node
appearance counts accumulated across every processed walk. The table is
O(n) to build and O(1) per draw.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass
class AliasTable:
    """Alias-method sampler state: per-slot acceptance probability and
    alternate node id."""

    prob: np.ndarray
    alias: np.ndarray

    @property
    def size(self) -> int:
        return self.prob.size


@njit(cache=True)
def _alias_fill(scaled, prob, alias):
    n = scaled.size
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    n_small = 0
    n_large = 0
    for i in range(n):
        if scaled[i] < 1.0:
            small[n_small] = i
            n_small += 1
        else:
            large[n_large] = i
            n_large += 1
    while n_small > 0 and n_large > 0:
        n_small -= 1
        n_large -= 1
        s = small[n_small]
        l = large[n_large]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[n_small] = l
            n_small += 1
        else:
            large[n_large] = l
            n_large += 1
    while n_large > 0:
        n_large -= 1
        i = large[n_large]
        prob[i] = 1.0
        alias[i] = i
    while n_small > 0:
        n_small -= 1
        i = small[n_small]
        prob[i] = 1.0
        alias[i] = i


def build_alias(weights) -> AliasTable:
    """Build an alias table sampling i with probability weights[i]/sum."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d array")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("at least one weight must be positive")
    scaled = w * (w.size / total)
    prob = np.empty(w.size, dtype=np.float64)
    alias = np.empty(w.size, dtype=np.int64)
    _alias_fill(scaled, prob, alias)
    return AliasTable(prob=prob, alias=alias)


def alias_sample(table: AliasTable, rng: np.random.Generator, size=None):
    """Draw node ids: one uniform slot pick plus one Bernoulli per draw."""
    if size is None:
        i = int(rng.integers(table.size))
        return i if rng.random() < table.prob[i] else int(table.alias[i])
    idx = rng.integers(0, table.size, size=size)
    u = rng.random(size=size)
    return np.where(u < table.prob[idx], idx, table.alias[idx])


def reconstructed_distribution(table: AliasTable) -> np.ndarray:
    """Exact per-node sampling probability implied by the (prob, alias) slots."""
    p = table.prob.copy()
    np.add.at(p, table.alias, 1.0 - table.prob)
    return p / table.size


class FrequencyCounter:
    """Per-node appearance counts accumulated over every walk processed."""

    def __init__(self, node_count: int):
        self.counts = np.zeros(node_count, dtype=np.int64)
        self.total = 0

    def record_walk(self, walk):
        np.add.at(self.counts, walk, 1)
        self.total += len(walk)


@dataclass(frozen=True)
class TablePolicy:
    """Alias-table refresh cadence: rebuild every ``refresh_every`` edge
    additions, or never when None."""

    refresh_every: int | None = 1

    def __post_init__(self):
        if self.refresh_every is not None and self.refresh_every < 1:
            raise ValueError("refresh_every must be >= 1 or None")


def negatives_for_walk(table, n_contexts, n_positives, ns, mode, rng):
    """Negative ids for one walk, shaped (n_contexts, n_positives, ns).

    ``fresh`` draws independent negatives for every positive; ``shared``
    draws one pool of ns ids and reuses it for every positive of every
    context in the walk. Collisions with positives or centers are kept.
    """
    if ns < 1:
        raise ValueError("ns must be >= 1")
    if mode == "fresh":
        return alias_sample(table, rng, size=(n_contexts, n_positives, ns))
    if mode == "shared":
        pool = alias_sample(table, rng, size=ns)
        return np.broadcast_to(pool, (n_contexts, n_positives, ns))
    raise ValueError(f"unknown negatives mode {mode!r}")


class NegativeSampler:
    """Counter + alias table + refresh policy, wired for a training run.

    Before any walk is seen the table is uniform so early negatives exist;
    afterwards weights are counts ** exponent (raw counts by default), so
    unseen nodes stay unsampleable once the table reflects real counts.
    """

    def __init__(self, node_count, ns=10, policy: TablePolicy | None = None,
                 exponent: float = 1.0, mode: str = "fresh"):
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        if mode not in ("fresh", "shared"):
            raise ValueError(f"unknown negatives mode {mode!r}")
        self.counter = FrequencyCounter(node_count)
        self.policy = policy if policy is not None else TablePolicy(1)
        self.ns = ns
        self.exponent = exponent
        self.mode = mode
        self.table = build_alias(np.ones(node_count))
        self.edge_additions = 0
        self.edge_rebuilds = 0
        self.rebuild_count = 0

    def observe_walk(self, walk):
        self.counter.record_walk(walk)

    def rebuild(self):
        """Rebuild the table from current counts (uniform until counts exist)."""
        if self.counter.total > 0:
            weights = self.counter.counts.astype(np.float64) ** self.exponent
        else:
            weights = np.ones(self.counter.counts.size)
        self.table = build_alias(weights)
        self.rebuild_count += 1

    def notify_edge_added(self) -> bool:
        """Advance the edge-addition counter; rebuild when the policy fires."""
        self.edge_additions += 1
        k = self.policy.refresh_every
        if k is not None and self.edge_additions % k == 0:
            self.rebuild()
            self.edge_rebuilds += 1
            return True
        return False

    def negatives(self, rng, n_contexts, n_positives):
        return negatives_for_walk(self.table, n_contexts, n_positives, self.ns, self.mode, rng)
