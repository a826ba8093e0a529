"""Baseline skip-gram with negative sampling trained by plain SGD."""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .oselm import _assemble_context, _assemble_walk


@dataclass
class SgdModel:
    """Input/output weight matrices (both V x d); w_in is the embedding."""

    w_in: np.ndarray
    w_out: np.ndarray
    lr: float

    @property
    def dims(self) -> int:
        return self.w_in.shape[1]

    @property
    def node_count(self) -> int:
        return self.w_in.shape[0]


def init_sgd(d: int, v: int, lr: float = 0.01, seed: int = 0) -> SgdModel:
    """w_in ~ U[-0.5/d, 0.5/d], w_out zero (word2vec convention)."""
    if d < 1 or v < 2:
        raise ValueError(f"need d >= 1 and v >= 2, got d={d} v={v}")
    if lr < 0:
        raise ValueError(f"lr must be nonnegative, got {lr}")
    rng = np.random.default_rng(seed)
    w_in = rng.uniform(-0.5 / d, 0.5 / d, size=(v, d))
    w_out = np.zeros((v, d))
    return SgdModel(w_in=w_in, w_out=w_out, lr=lr)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_loss(center_vec, out_vecs, targets) -> float:
    """Negative-sampling loss for one center against its samples."""
    x = out_vecs @ center_vec
    targets = np.asarray(targets, dtype=np.float64)
    # log sigma(x) = -logaddexp(0, -x), stable for large |x|
    return float(np.sum(targets * np.logaddexp(0.0, -x)
                        + (1.0 - targets) * np.logaddexp(0.0, x)))


def sgns_gradients(center_vec, out_vecs, targets):
    """Analytic gradients of sgns_loss at a fixed point.

    Returns (loss, grad wrt center_vec, grad wrt out_vecs).
    """
    out_vecs = np.asarray(out_vecs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    x = out_vecs @ center_vec
    g = _sigmoid(x) - targets
    grad_center = g @ out_vecs
    grad_out = g[:, None] * center_vec[None, :]
    return sgns_loss(center_vec, out_vecs, targets), grad_center, grad_out


def sgd_context_update(m: SgdModel, ctx, negatives) -> SgdModel:
    """One SGNS step over a context (reference implementation).

    Samples are visited in order; each output row updates immediately
    while the center-row gradient accumulates (against the pre-update
    output rows) and applies once after the sample loop.
    """
    cols, targets = _assemble_context(ctx.positives, negatives)
    center = ctx.center
    cgrad = np.zeros(m.dims)
    for col, y in zip(cols, targets):
        g = _sigmoid(float(m.w_in[center] @ m.w_out[col])) - y
        cgrad += g * m.w_out[col]
        m.w_out[col] -= m.lr * g * m.w_in[center]
    m.w_in[center] -= m.lr * cgrad
    return m


@njit(cache=True, fastmath=True)
def _sgd_walk_kernel(w_in, w_out, lr, centers, cols, targets):
    d = w_in.shape[1]
    nctx = centers.shape[0]
    spc = targets.shape[0]
    cgrad = np.empty(d)
    for c in range(nctx):
        ctr = centers[c]
        for i in range(d):
            cgrad[i] = 0.0
        for k in range(spc):
            col = cols[c, k]
            x = 0.0
            for i in range(d):
                x += w_in[ctr, i] * w_out[col, i]
            g = 1.0 / (1.0 + np.exp(-x)) - targets[k]
            glr = g * lr
            for i in range(d):
                cgrad[i] += g * w_out[col, i]
                w_out[col, i] -= glr * w_in[ctr, i]
        for i in range(d):
            w_in[ctr, i] -= lr * cgrad[i]


def train_walk(m: SgdModel, centers, positives, negatives) -> int:
    """SGNS training over one walk's contexts, in walk order."""
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        return 0
    cols, targets = _assemble_walk(np.asarray(positives), np.asarray(negatives))
    _sgd_walk_kernel(m.w_in, m.w_out, m.lr, centers, cols, targets)
    return 0


def sgd_embedding_snapshot(m: SgdModel) -> np.ndarray:
    """Copy of the input-side weights (V, d)."""
    return m.w_in.copy()


def sgd_parameter_count(m: SgdModel) -> dict:
    d, v = m.dims, m.node_count
    total = 2 * v * d
    return {"trainable": total, "state": 0, "fixed": 0, "total": total, "bytes": total * 8}
