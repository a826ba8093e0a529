import numpy as np
import pytest

from seqembed.evaluation import (EvalSummary, evaluate_embedding, f1_scores,
                                 make_split, train_ovr_logreg)


def brute_force_f1(pred, true, k):
    """Independent confusion-matrix oracle."""
    per_class = []
    for c in range(k):
        tp = sum(1 for p, t in zip(pred, true) if p == c and t == c)
        fp = sum(1 for p, t in zip(pred, true) if p == c and t != c)
        fn = sum(1 for p, t in zip(pred, true) if p != c and t == c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_class.append((prec, rec, f1))
    correct = sum(1 for p, t in zip(pred, true) if p == t)
    micro = correct / len(pred)
    macro = sum(f for _, _, f in per_class) / k
    return micro, macro, per_class


def test_hand_worked_two_class_case():
    report = f1_scores([0, 0], [0, 1])
    assert report.micro_f1 == 0.5
    assert abs(report.macro_f1 - 1 / 3) < 1e-15
    assert abs(report.f1[0] - 2 / 3) < 1e-15
    assert report.f1[1] == 0.0


def test_all_correct():
    report = f1_scores([0, 1, 2, 1], [0, 1, 2, 1])
    assert report.micro_f1 == 1.0
    assert report.macro_f1 == 1.0


def test_single_class_truth_all_predicted():
    report = f1_scores([1, 1, 1], [1, 1, 1], num_classes=2)
    assert report.micro_f1 == 1.0
    # the absent class contributes zero to the macro mean
    assert report.macro_f1 == 0.5


def test_empty_and_mismatched_inputs_rejected():
    with pytest.raises(ValueError):
        f1_scores([], [])
    with pytest.raises(ValueError):
        f1_scores([1, 2], [1])


def test_micro_equals_accuracy(rng):
    for _ in range(30):
        n = int(rng.integers(1, 80))
        k = int(rng.integers(2, 7))
        pred = rng.integers(0, k, n)
        true = rng.integers(0, k, n)
        report = f1_scores(pred, true, num_classes=k)
        assert report.micro_f1 == np.mean(pred == true)


def test_matches_brute_force_oracle(rng):
    for _ in range(25):
        n = int(rng.integers(2, 60))
        k = int(rng.integers(2, 6))
        pred = rng.integers(0, k, n)
        true = rng.integers(0, k, n)
        report = f1_scores(pred, true, num_classes=k)
        micro, macro, per_class = brute_force_f1(pred.tolist(), true.tolist(), k)
        assert abs(report.micro_f1 - micro) < 1e-12
        assert abs(report.macro_f1 - macro) < 1e-12
        for c, (prec, rec, f1) in enumerate(per_class):
            assert abs(report.precision[c] - prec) < 1e-12
            assert abs(report.recall[c] - rec) < 1e-12
            assert abs(report.f1[c] - f1) < 1e-12


def test_split_sizes_and_determinism(rng):
    feats = rng.normal(size=(101, 4))
    labels = rng.integers(0, 3, 101)
    a = make_split(feats, labels, seed=5)
    b = make_split(feats, labels, seed=5)
    c = make_split(feats, labels, seed=6)
    assert len(a.train_idx) == 90 and len(a.test_idx) == 11
    assert np.array_equal(a.train_idx, b.train_idx)
    assert not np.array_equal(a.train_idx, c.train_idx)
    combined = np.sort(np.concatenate([a.train_idx, a.test_idx]))
    assert np.array_equal(combined, np.arange(101))


def test_linearly_separable_toy_reaches_perfect_accuracy(rng):
    n = 200
    labels = (np.arange(n) >= n // 2).astype(int)
    feats = rng.normal(size=(n, 3)) * 0.2
    feats[:, 0] += np.where(labels == 1, 3.0, -3.0)
    split = make_split(feats, labels, seed=0)
    clf = train_ovr_logreg(split, epochs=100)
    pred = clf.predict(feats[split.test_idx])
    assert np.mean(pred == labels[split.test_idx]) == 1.0


def test_zero_epochs_predicts_single_class(rng):
    n = 120
    labels = np.concatenate([np.zeros(80, dtype=int), np.ones(40, dtype=int)])
    feats = rng.normal(size=(n, 4))
    split = make_split(feats, labels, seed=1)
    clf = train_ovr_logreg(split, epochs=0)
    pred = clf.predict(feats[split.test_idx])
    assert len(set(pred.tolist())) == 1  # untrained scores tie; argmax is constant
    report = f1_scores(pred, labels[split.test_idx], num_classes=2)
    majority_rate = np.mean(labels[split.test_idx] == pred[0])
    assert report.micro_f1 == majority_rate


def test_identical_features_macro_at_most_micro(rng):
    n = 90
    labels = np.concatenate([np.zeros(70, dtype=int), np.ones(20, dtype=int)])
    feats = np.ones((n, 3))
    split = make_split(feats, labels, seed=2)
    clf = train_ovr_logreg(split, epochs=20)
    pred = clf.predict(feats[split.test_idx])
    report = f1_scores(pred, labels[split.test_idx], num_classes=2)
    assert report.macro_f1 <= report.micro_f1 + 1e-12


def test_missing_class_warns(rng):
    feats = rng.normal(size=(40, 3))
    labels = np.zeros(40, dtype=int)
    labels[-1] = 1
    split = next(make_split(feats, labels, seed=s) for s in range(50)
                 if 39 in make_split(feats, labels, seed=s).test_idx)
    with pytest.warns(UserWarning):
        train_ovr_logreg(split, epochs=1)


def test_evaluate_single_trial_equals_report(rng):
    feats = rng.normal(size=(60, 5))
    labels = rng.integers(0, 3, 60)
    summary = evaluate_embedding(feats, labels, trials=1, seed=4, epochs=5)
    assert isinstance(summary, EvalSummary)
    assert len(summary.reports) == 1
    assert summary.micro_mean == summary.reports[0].micro_f1
    assert summary.micro_std == 0.0


def test_evaluate_identical_feature_lists(rng):
    feats = rng.normal(size=(60, 5))
    labels = rng.integers(0, 3, 60)
    one = evaluate_embedding(feats, labels, trials=3, seed=4, epochs=5)
    two = evaluate_embedding([feats, feats, feats], labels, trials=3, seed=4, epochs=5)
    assert one.micro_mean == two.micro_mean
    assert one.micro_std == two.micro_std


def test_evaluate_reports_spread(rng):
    feats = [rng.normal(size=(60, 5)) for _ in range(3)]
    labels = rng.integers(0, 3, 60)
    summary = evaluate_embedding(feats, labels, trials=3, seed=4, epochs=5)
    micro = np.array([r.micro_f1 for r in summary.reports])
    assert abs(summary.micro_std - micro.std()) < 1e-12


def test_evaluate_validation(rng):
    feats = rng.normal(size=(30, 4))
    labels = rng.integers(0, 2, 30)
    with pytest.raises(ValueError):
        evaluate_embedding(feats, labels, trials=0)
    with pytest.raises(ValueError):
        evaluate_embedding([feats], labels, trials=2)
