"""Sequentially trainable skip-gram via recursive least squares (OS-ELM).

The model keeps output-side weights beta (d x V) and an inverse-correlation
state P (d x d). In tied mode the hidden activation for a center node is
mu * beta[:, center], so beta doubles as the embedding; random_alpha mode
uses a fixed random input matrix instead, as in classic OS-ELM.

Two update schedules are provided: per-context recursion (context_update /
train_walk) and the dataflow variant (walk_update_dataflow) that freezes
(P, beta) for a whole walk, accumulates their differences per context, and
commits once at the end.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

SINGULAR_EPS = 1e-12

_NO_ALPHA = np.zeros((1, 1))


class SingularUpdateError(RuntimeError):
    """Plain-denominator update hit |H P H^T| below the singularity cutoff."""


@dataclass
class OselmModel:
    # beta is held transposed in memory ((V, d) C-order) so column access
    # in the training kernels is contiguous; the attribute stays (d, V).
    beta: np.ndarray
    p: np.ndarray
    mu: float
    mode: str = "tied"
    alpha: np.ndarray | None = None
    regularized: bool = True
    skipped_updates: int = 0
    _dbeta_t: np.ndarray | None = field(default=None, repr=False)
    _touch_flag: np.ndarray | None = field(default=None, repr=False)
    _touch_idx: np.ndarray | None = field(default=None, repr=False)

    @property
    def dims(self) -> int:
        return self.beta.shape[0]

    @property
    def node_count(self) -> int:
        return self.beta.shape[1]

    @property
    def beta_t(self) -> np.ndarray:
        return self.beta.T

    def _scratch(self):
        if self._dbeta_t is None:
            self._dbeta_t = np.zeros((self.node_count, self.dims))
            self._touch_flag = np.zeros(self.node_count, dtype=np.bool_)
            self._touch_idx = np.empty(self.node_count, dtype=np.int64)
        return self._dbeta_t, self._touch_flag, self._touch_idx

    def _alpha_or_dummy(self):
        return self.alpha if self.alpha is not None else _NO_ALPHA


@dataclass
class TrainDelta:
    """Per-walk accumulated differences: dense dP and sparse beta columns."""

    d_p: np.ndarray
    d_beta: dict[int, np.ndarray]


def init_model(d: int, v: int, mu: float = 0.01, mode: str = "tied", seed: int = 0,
               p0_scale: float = 1.0, regularized: bool = True) -> OselmModel:
    """Fresh model: P = p0_scale * I, beta ~ U[-0.5/d, 0.5/d].

    Tied mode needs nonzero beta, otherwise every hidden activation would
    stay zero; random_alpha mode additionally fixes a U[-1, 1] input matrix.
    """
    if d < 1 or v < 2:
        raise ValueError(f"need d >= 1 and v >= 2, got d={d} v={v}")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if p0_scale <= 0:
        raise ValueError(f"p0_scale must be positive, got {p0_scale}")
    if mode not in ("tied", "random_alpha"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    beta = np.asfortranarray(rng.uniform(-0.5 / d, 0.5 / d, size=(d, v)))
    p = p0_scale * np.eye(d)
    alpha = rng.uniform(-1.0, 1.0, size=(v, d)) if mode == "random_alpha" else None
    return OselmModel(beta=beta, p=p, mu=mu, mode=mode, alpha=alpha, regularized=regularized)


def hidden_activation(m: OselmModel, center: int) -> np.ndarray:
    """Hidden-layer output for a one-hot center input (bias 0, identity G)."""
    if m.mode == "tied":
        return m.mu * m.beta[:, center]
    return m.alpha[center].copy()


def _assemble_context(positives, negatives):
    """Interleave samples as [pos_0, its negatives..., pos_1, ...]."""
    positives = np.asarray(positives, dtype=np.int64)
    negatives = np.asarray(negatives, dtype=np.int64)
    npos = positives.shape[0]
    ns = negatives.shape[-1]
    cols = np.empty(npos * (ns + 1), dtype=np.int64)
    view = cols.reshape(npos, ns + 1)
    view[:, 0] = positives
    view[:, 1:] = negatives
    targets = np.zeros(npos * (ns + 1))
    targets[:: ns + 1] = 1.0
    return cols, targets


def _assemble_walk(positives, negatives):
    nctx, npos = positives.shape
    ns = negatives.shape[-1]
    cols = np.empty((nctx, npos * (ns + 1)), dtype=np.int64)
    view = cols.reshape(nctx, npos, ns + 1)
    view[:, :, 0] = positives
    view[:, :, 1:] = negatives
    targets = np.zeros(npos * (ns + 1))
    targets[:: ns + 1] = 1.0
    return cols, targets


def context_update(m: OselmModel, ctx, negatives, regularized: bool | None = None) -> OselmModel:
    """One recursion step for a single context (reference implementation).

    Errors are measured against the pre-update beta; duplicate sampled
    columns accumulate additively; columns never sampled stay untouched.
    Raises SingularUpdateError in plain-denominator mode when |H P H^T|
    falls below the cutoff (the model is left unchanged).
    """
    reg = m.regularized if regularized is None else regularized
    h = hidden_activation(m, ctx.center)
    cols, targets = _assemble_context(ctx.positives, negatives)

    pht = m.p @ h
    s = float(h @ pht)
    if reg:
        denom = 1.0 + s
    else:
        if abs(s) < SINGULAR_EPS:
            raise SingularUpdateError(f"|H P H^T| = {abs(s):.3e} below cutoff")
        denom = s
    errs = targets - h @ m.beta[:, cols]
    m.p -= np.outer(pht, pht) * (1.0 / denom)
    pnht = m.p @ h
    delta = np.zeros_like(m.beta)
    np.add.at(delta.T, cols, errs[:, None] * pnht[None, :])
    m.beta += delta
    return m


@njit(cache=True, fastmath=True)
def _matvec(mat, vec, out):
    n0, n1 = mat.shape
    for i in range(n0):
        acc = 0.0
        for j in range(n1):
            acc += mat[i, j] * vec[j]
        out[i] = acc


@njit(cache=True, fastmath=True)
def _dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@njit(cache=True, fastmath=True)
def _sample_errors(beta_t, h, cols_row, targets, e):
    d = h.shape[0]
    for k in range(cols_row.shape[0]):
        col = cols_row[k]
        acc = 0.0
        for i in range(d):
            acc += h[i] * beta_t[col, i]
        e[k] = targets[k] - acc


@njit(cache=True)
def _walk_kernel(p, beta_t, mu, tied, alpha, centers, cols, targets, regularized,
                 dataflow, dbeta_t, touch_flag, touch_idx):
    """Train one walk in either schedule; returns skipped-context count.

    Sequential (dataflow=False): P and beta commit after every context.
    Dataflow (dataflow=True): P and beta stay frozen while the deltas
    accumulate, with one commit after the last context; the P delta is a
    rank-k sum of the per-context terms, applied in a single pass.
    dbeta_t/touch_* are reusable scratch buffers, left cleared on return.

    beta_t is beta transposed, (V, d) C-order, so sampled columns are
    contiguous rows. P_new @ h is taken as pht * (1 - s/denom), which the
    rank-1 update form implies.
    """
    d = p.shape[0]
    nctx = centers.shape[0]
    spc = targets.shape[0]
    h = np.empty(d)
    pht = np.empty(d)
    scaled = np.empty(d)
    pnht = np.empty(d)
    e = np.empty(spc)
    phts = np.empty((nctx, d))
    scaleds = np.empty((nctx, d))
    n_rank = 0
    n_touch = 0
    skipped = 0
    for c in range(nctx):
        ctr = centers[c]
        if tied:
            for i in range(d):
                h[i] = mu * beta_t[ctr, i]
        else:
            for i in range(d):
                h[i] = alpha[ctr, i]
        _matvec(p, h, pht)
        s = _dot(h, pht)
        if regularized:
            denom = 1.0 + s
        else:
            if abs(s) < SINGULAR_EPS:
                skipped += 1
                continue
            denom = s
        sinv = 1.0 / denom
        factor = 1.0 - s * sinv
        for i in range(d):
            scaled[i] = pht[i] * (-sinv)
            pnht[i] = pht[i] * factor

        _sample_errors(beta_t, h, cols[c], targets, e)

        if dataflow:
            for i in range(d):
                phts[n_rank, i] = pht[i]
                scaleds[n_rank, i] = scaled[i]
            n_rank += 1
        else:
            for i in range(d):
                pi = pht[i]
                for j in range(d):
                    p[i, j] += pi * scaled[j]

        for k in range(spc):
            col = cols[c, k]
            if not touch_flag[col]:
                touch_flag[col] = True
                touch_idx[n_touch] = col
                n_touch += 1
            ek = e[k]
            for i in range(d):
                dbeta_t[col, i] += pnht[i] * ek

        if not dataflow:
            # commit this context's column updates and clear the scratch
            for t in range(n_touch):
                col = touch_idx[t]
                for i in range(d):
                    beta_t[col, i] += dbeta_t[col, i]
                    dbeta_t[col, i] = 0.0
                touch_flag[col] = False
            n_touch = 0

    if dataflow:
        rowacc = np.empty(d)
        for i in range(d):
            for j in range(d):
                rowacc[j] = 0.0
            for t in range(n_rank):
                pi = phts[t, i]
                for j in range(d):
                    rowacc[j] += pi * scaleds[t, j]
            for j in range(d):
                p[i, j] += rowacc[j]
        for t in range(n_touch):
            col = touch_idx[t]
            for i in range(d):
                beta_t[col, i] += dbeta_t[col, i]
                dbeta_t[col, i] = 0.0
            touch_flag[col] = False
    return skipped


def train_walk(m: OselmModel, centers, positives, negatives,
               regularized: bool | None = None) -> int:
    """Sequential per-context training over one walk; returns skipped count."""
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        return 0
    reg = m.regularized if regularized is None else regularized
    cols, targets = _assemble_walk(np.asarray(positives), np.asarray(negatives))
    dbeta_t, flag, idx = m._scratch()
    skipped = _walk_kernel(m.p, m.beta_t, m.mu, m.mode == "tied", m._alpha_or_dummy(),
                           centers, cols, targets, reg, False, dbeta_t, flag, idx)
    m.skipped_updates += skipped
    return skipped


def walk_update_dataflow(m: OselmModel, centers, positives, negatives,
                         regularized: bool | None = None) -> int:
    """Dataflow-scheduled training over one walk; returns skipped count.

    All per-context stages read the P and beta frozen at walk start; the
    accumulated dP and sparse dbeta commit once after the last context.
    """
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        return 0
    reg = m.regularized if regularized is None else regularized
    cols, targets = _assemble_walk(np.asarray(positives), np.asarray(negatives))
    dbeta_t, flag, idx = m._scratch()
    skipped = _walk_kernel(m.p, m.beta_t, m.mu, m.mode == "tied", m._alpha_or_dummy(),
                           centers, cols, targets, reg, True, dbeta_t, flag, idx)
    m.skipped_updates += skipped
    return skipped


def accumulate_walk_delta(m: OselmModel, contexts, negatives_per_context,
                          regularized: bool | None = None) -> TrainDelta:
    """Reference dataflow accumulation: the per-walk delta without applying it.

    Stage order per context: hidden activation and errors against the
    frozen beta, dP against the frozen P, and beta deltas through the
    context-local P (frozen P plus this context's own rank-1 term).
    """
    reg = m.regularized if regularized is None else regularized
    d_p = np.zeros_like(m.p)
    d_beta: dict[int, np.ndarray] = {}
    for ctx, negs in zip(contexts, negatives_per_context):
        h = hidden_activation(m, ctx.center)
        cols, targets = _assemble_context(ctx.positives, negs)
        pht = m.p @ h
        s = float(h @ pht)
        if reg:
            denom = 1.0 + s
        else:
            if abs(s) < SINGULAR_EPS:
                continue
            denom = s
        update = np.outer(pht, pht) * (1.0 / denom)
        d_p -= update
        p_local = m.p - update
        pnht = p_local @ h
        errs = targets - h @ m.beta[:, cols]
        for col, err in zip(cols, errs):
            vec = d_beta.setdefault(int(col), np.zeros(m.dims))
            vec += pnht * err
    return TrainDelta(d_p=d_p, d_beta=d_beta)


def apply_delta(m: OselmModel, delta: TrainDelta) -> OselmModel:
    m.p += delta.d_p
    for col, vec in delta.d_beta.items():
        m.beta[:, col] += vec
    return m


def dense_update(m: OselmModel, h, targets, regularized: bool | None = None) -> OselmModel:
    """One recursion step supervising every output column at once.

    Takes the hidden vector directly, so fixed-H training (the classic
    least-squares setting) can drive the same recursion.
    """
    reg = m.regularized if regularized is None else regularized
    h = np.asarray(h, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    pht = m.p @ h
    s = float(h @ pht)
    if reg:
        denom = 1.0 + s
    else:
        if abs(s) < SINGULAR_EPS:
            raise SingularUpdateError(f"|H P H^T| = {abs(s):.3e} below cutoff")
        denom = s
    errs = targets - h @ m.beta
    m.p -= np.outer(pht, pht) * (1.0 / denom)
    m.beta += np.outer(m.p @ h, errs)
    return m


def embedding_snapshot(m: OselmModel) -> np.ndarray:
    """Copy of the input-side weights as a (V, d) embedding matrix."""
    if m.mode == "tied":
        return np.ascontiguousarray(m.beta_t * m.mu)
    return m.alpha.copy()


def parameter_count(m: OselmModel) -> dict:
    """Entry counts: trainable beta, recursion state P, fixed input weights."""
    d, v = m.dims, m.node_count
    fixed = v * d if m.mode == "random_alpha" else 0
    total = d * v + d * d + fixed
    return {
        "trainable": d * v,
        "state": d * d,
        "fixed": fixed,
        "total": total,
        "bytes": total * 8,
    }
