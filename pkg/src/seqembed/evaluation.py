"""Downstream node classification: one-vs-rest logistic regression, micro/macro F1."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .rng import substream


@dataclass
class LabeledSplit:
    """Features, labels, and a deterministic 90/10 train/test partition."""

    features: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int


def make_split(features, labels, seed: int, train_fraction: float = 0.9) -> LabeledSplit:
    """Uniform random split: floor(train_fraction * V) train nodes, rest test."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on node count")
    n = features.shape[0]
    n_train = int(train_fraction * n)
    perm = np.random.default_rng(seed).permutation(n)
    return LabeledSplit(features=features, labels=labels,
                        train_idx=np.sort(perm[:n_train]),
                        test_idx=np.sort(perm[n_train:]), seed=seed)


@dataclass
class OvrLogisticModel:
    """K binary logistic models over standardized features; argmax predicts."""

    weights: np.ndarray          # (K, d)
    bias: np.ndarray             # (K,)
    feat_mean: np.ndarray
    feat_std: np.ndarray

    def predict(self, features) -> np.ndarray:
        z = (np.asarray(features, dtype=np.float64) - self.feat_mean) / self.feat_std
        return np.argmax(z @ self.weights.T + self.bias, axis=1)


def train_ovr_logreg(split: LabeledSplit, epochs: int = 200, lr: float = 0.1,
                     l2: float = 1e-4, batch_size: int = 64) -> OvrLogisticModel:
    """Minibatch SGD on K one-vs-rest logistic losses jointly.

    Features are standardized per dimension with train-split statistics.
    A class absent from the train split trains on all-negative data (a
    warning is emitted).
    """
    x = split.features[split.train_idx]
    y = split.labels[split.train_idx]
    k = int(split.labels.max()) + 1
    if k < 2:
        raise ValueError("need at least 2 classes")
    missing = set(range(k)) - set(np.unique(y).tolist())
    if missing:
        warnings.warn(f"classes {sorted(missing)} absent from train split; "
                      "trained on all-negative data")

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0.0] = 1.0
    xs = (x - mean) / std
    onehot = np.zeros((xs.shape[0], k))
    onehot[np.arange(xs.shape[0]), y] = 1.0

    w = np.zeros((k, xs.shape[1]))
    b = np.zeros(k)
    rng = substream(split.seed, "logreg")
    n = xs.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            xb = xs[idx]
            prob = 1.0 / (1.0 + np.exp(-(xb @ w.T + b)))
            err = prob - onehot[idx]
            w -= lr * ((err.T @ xb) / idx.size + l2 * w)
            b -= lr * err.mean(axis=0)
    return OvrLogisticModel(weights=w, bias=b, feat_mean=mean, feat_std=std)


@dataclass
class F1Report:
    """Micro/macro F1 plus per-class precision, recall, F1, and support."""

    micro_f1: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray

    def as_dict(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "support": self.support.tolist(),
        }


def f1_scores(predictions, truth, num_classes: int | None = None) -> F1Report:
    """Confusion-matrix F1: micro from global TP/FP/FN, macro as the
    unweighted per-class mean (zero-division scores 0)."""
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truth, dtype=np.int64)
    if pred.size == 0 or pred.shape != true.shape:
        raise ValueError("predictions and truth must be equal-length and nonempty")
    k = num_classes if num_classes is not None else int(max(pred.max(), true.max())) + 1
    cm = np.bincount(true * k + pred, minlength=k * k).reshape(k, k).astype(np.float64)
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp

    def safe_div(a, b):
        out = np.zeros_like(a)
        np.divide(a, b, out=out, where=b > 0)
        return out

    precision = safe_div(tp, tp + fp)
    recall = safe_div(tp, tp + fn)
    f1 = safe_div(2 * precision * recall, precision + recall)
    micro = float(safe_div(np.array([2 * tp.sum()]),
                           np.array([2 * tp.sum() + fp.sum() + fn.sum()]))[0])
    return F1Report(micro_f1=micro, macro_f1=float(f1.mean()),
                    precision=precision, recall=recall, f1=f1,
                    support=cm.sum(axis=1).astype(np.int64))


@dataclass
class EvalSummary:
    """Mean and spread of F1 over repeated trials."""

    micro_mean: float
    micro_std: float
    macro_mean: float
    macro_std: float
    reports: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "micro_f1_mean": self.micro_mean,
            "micro_f1_std": self.micro_std,
            "macro_f1_mean": self.macro_mean,
            "macro_f1_std": self.macro_std,
            "trials": len(self.reports),
        }


def evaluate_embedding(features, labels, trials: int = 3, seed: int = 0,
                       epochs: int = 200, lr: float = 0.1, l2: float = 1e-4) -> EvalSummary:
    """Average test F1 over trials, re-splitting per trial.

    ``features`` is one (V, d) matrix reused every trial, or a sequence of
    per-trial matrices (the caller retrains the embedding per trial).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(features, np.ndarray):
        per_trial = [features] * trials
    else:
        per_trial = list(features)
        if len(per_trial) != trials:
            raise ValueError(f"got {len(per_trial)} feature matrices for {trials} trials")
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1
    reports = []
    for t, feats in enumerate(per_trial):
        split_seed = int(substream(seed, f"trial{t}", "split").integers(2**63))
        split = make_split(feats, labels, seed=split_seed)
        clf = train_ovr_logreg(split, epochs=epochs, lr=lr, l2=l2)
        pred = clf.predict(split.features[split.test_idx])
        reports.append(f1_scores(pred, split.labels[split.test_idx], num_classes=k))
    micro = np.array([r.micro_f1 for r in reports])
    macro = np.array([r.macro_f1 for r in reports])
    return EvalSummary(micro_mean=float(micro.mean()), micro_std=float(micro.std()),
                       macro_mean=float(macro.mean()), macro_std=float(macro.std()),
                       reports=reports)
