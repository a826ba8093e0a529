import numpy as np
import pytest

from seqembed.oselm import (OselmModel, SingularUpdateError, accumulate_walk_delta,
                            apply_delta, context_update, dense_update,
                            embedding_snapshot, hidden_activation, init_model,
                            parameter_count, train_walk, walk_update_dataflow)
from seqembed.walks import WalkContext


def random_walk_batch(rng, v, nctx=6, npos=3, ns=4):
    centers = rng.integers(0, v, nctx)
    positives = rng.integers(0, v, (nctx, npos))
    negatives = rng.integers(0, v, (nctx, npos, ns))
    return centers, positives, negatives


def test_init_shapes_and_defaults():
    m = init_model(32, 2708)
    assert m.beta.shape == (32, 2708)
    assert m.p.shape == (32, 32)
    assert np.array_equal(m.p, np.eye(32))
    assert m.alpha is None
    assert np.all(np.abs(m.beta) <= 0.5 / 32)


def test_init_p0_scale():
    m = init_model(4, 10, p0_scale=3.5)
    assert np.array_equal(m.p, 3.5 * np.eye(4))


def test_init_deterministic():
    a = init_model(8, 50, seed=99, mode="random_alpha")
    b = init_model(8, 50, seed=99, mode="random_alpha")
    assert np.array_equal(a.beta, b.beta)
    assert np.array_equal(a.alpha, b.alpha)


def test_init_validation():
    with pytest.raises(ValueError):
        init_model(0, 10)
    with pytest.raises(ValueError):
        init_model(4, 1)
    with pytest.raises(ValueError):
        init_model(4, 10, mu=0.0)
    with pytest.raises(ValueError):
        init_model(4, 10, p0_scale=-1.0)
    with pytest.raises(ValueError):
        init_model(4, 10, mode="both")


def test_hidden_activation_scaling():
    m = init_model(4, 6, mu=0.01, seed=0)
    m.beta[:, 2] = 1.0
    assert np.allclose(hidden_activation(m, 2), 0.01)
    m2 = init_model(4, 6, mu=0.02, seed=0)
    assert np.allclose(hidden_activation(m2, 3), 2 * hidden_activation(m, 3))


def test_hidden_activation_random_mode_ignores_beta():
    m = init_model(4, 6, mode="random_alpha", seed=1)
    before = hidden_activation(m, 3)
    m.beta[:] = 0.0
    assert np.array_equal(hidden_activation(m, 3), before)
    assert np.array_equal(before, m.alpha[3])


def test_worked_one_dimensional_example():
    # P=1, mu=1, beta=[2 | 0], center node 0, positive node 1, no negatives:
    # H=2, s=4, denom=5, P_new=0.2, e=1, beta[:,1] += 0.2*2*1 = 0.4
    m = OselmModel(beta=np.asfortranarray([[2.0, 0.0]]), p=np.array([[1.0]]), mu=1.0)
    ctx = WalkContext(center=0, positives=np.array([1]))
    context_update(m, ctx, np.empty((1, 0), dtype=np.int64))
    assert np.allclose(m.p, 0.2)
    assert np.allclose(m.beta, [[2.0, 0.4]])


def test_zero_error_leaves_beta_but_updates_p():
    m = init_model(3, 8, mu=1.0, seed=2)
    ctx = WalkContext(center=1, positives=np.array([4]))
    h = hidden_activation(m, 1)
    m.beta[:, 4] = 0.0
    m.beta[:, 4] += h / (h @ h)  # prediction exactly 1 for column 4
    beta_before = m.beta.copy()
    p_before = m.p.copy()
    context_update(m, ctx, np.empty((1, 0), dtype=np.int64))
    assert np.allclose(m.beta, beta_before, atol=1e-12)
    assert not np.allclose(m.p, p_before)


def test_full_label_updates_match_ridge_solution():
    rng = np.random.default_rng(5)
    for d, v, n, p0 in [(4, 9, 30, 1.0), (8, 16, 50, 2.0), (2, 5, 12, 0.5)]:
        m = init_model(d, v, mu=1.0, seed=3, p0_scale=p0)
        m.beta[:] = 0.0
        feats = rng.normal(size=(n, d))
        targets = rng.normal(size=(n, v))
        for i in range(n):
            dense_update(m, feats[i], targets[i])
        ridge = np.linalg.solve(feats.T @ feats + np.eye(d) / p0, feats.T @ targets)
        assert np.abs(m.beta - ridge).max() < 1e-6


def test_train_walk_matches_repeated_context_updates(rng):
    d, v = 8, 40
    centers, positives, negatives = random_walk_batch(rng, v)
    fast = init_model(d, v, mu=0.05, seed=7)
    ref = init_model(d, v, mu=0.05, seed=7)
    train_walk(fast, centers, positives, negatives)
    for i in range(len(centers)):
        context_update(ref, WalkContext(int(centers[i]), positives[i]), negatives[i])
    assert np.allclose(fast.beta, ref.beta, rtol=1e-12, atol=1e-14)
    assert np.allclose(fast.p, ref.p, rtol=1e-12, atol=1e-14)


def test_dataflow_kernel_matches_reference_delta(rng):
    d, v = 6, 30
    centers, positives, negatives = random_walk_batch(rng, v)
    fast = init_model(d, v, mu=0.05, seed=8)
    ref = init_model(d, v, mu=0.05, seed=8)
    walk_update_dataflow(fast, centers, positives, negatives)
    ctxs = [WalkContext(int(c), p) for c, p in zip(centers, positives)]
    delta = accumulate_walk_delta(ref, ctxs, list(negatives))
    apply_delta(ref, delta)
    assert np.allclose(fast.beta, ref.beta, rtol=1e-12, atol=1e-14)
    assert np.allclose(fast.p, ref.p, rtol=1e-12, atol=1e-14)
    assert set(delta.d_beta) == set(np.unique(negatives) if False else
                                    np.unique(np.concatenate([positives.ravel(),
                                                              negatives.ravel()])))


def test_dataflow_equals_sequential_on_single_context(rng):
    d, v = 5, 20
    centers, positives, negatives = random_walk_batch(rng, v, nctx=1)
    a = init_model(d, v, mu=0.03, seed=9)
    b = init_model(d, v, mu=0.03, seed=9)
    train_walk(a, centers, positives, negatives)
    walk_update_dataflow(b, centers, positives, negatives)
    assert np.array_equal(a.beta, b.beta)
    assert np.array_equal(a.p, b.p)


def test_dataflow_differs_from_sequential_on_multiple_contexts():
    rng = np.random.default_rng(3)
    d, v = 4, 12
    centers = np.array([0, 1])
    positives = np.array([[2, 3], [4, 5]])
    negatives = rng.integers(6, 12, (2, 2, 3))
    a = init_model(d, v, mu=0.5, seed=10)
    b = init_model(d, v, mu=0.5, seed=10)
    train_walk(a, centers, positives, negatives)
    walk_update_dataflow(b, centers, positives, negatives)
    assert np.linalg.norm(a.beta - b.beta) > 0


def test_only_sampled_columns_change(rng):
    d, v = 6, 50
    centers, positives, negatives = random_walk_batch(rng, v, nctx=3)
    m = init_model(d, v, seed=11)
    before = m.beta.copy()
    train_walk(m, centers, positives, negatives)
    sampled = set(np.concatenate([positives.ravel(), negatives.ravel()]).tolist())
    for col in range(v):
        if col in sampled:
            continue
        assert np.array_equal(m.beta[:, col], before[:, col])


def test_p_stays_symmetric_over_many_updates(rng):
    d, v = 8, 60
    m = init_model(d, v, mu=0.1, seed=12)
    for _ in range(140):  # 140 walks x 72 contexts > 1e4 rank-1 updates
        centers, positives, negatives = random_walk_batch(rng, v, nctx=72, npos=2, ns=3)
        train_walk(m, centers, positives, negatives)
    assert np.abs(m.p - m.p.T).max() < 1e-8
    assert np.all(np.isfinite(m.p)) and np.all(np.isfinite(m.beta))


def test_regularized_mode_never_skips(rng):
    d, v = 4, 30
    m = init_model(d, v, mu=0.2, seed=13)
    skipped = 0
    for _ in range(50):
        centers, positives, negatives = random_walk_batch(rng, v)
        skipped += train_walk(m, centers, positives, negatives)
    assert skipped == 0
    assert m.skipped_updates == 0
    # P stays positive semidefinite, so 1 + H P H^T >= 1 throughout
    assert np.linalg.eigvalsh(m.p).min() > -1e-10


def test_plain_denominator_singularity():
    m = init_model(3, 10, mu=1.0, seed=14, regularized=False)
    m.beta[:, 0] = 1e-13  # H P H^T below the cutoff
    ctx = WalkContext(center=0, positives=np.array([1]))
    with pytest.raises(SingularUpdateError):
        context_update(m, ctx, np.empty((1, 0), dtype=np.int64))
    # walk-level path skips and reports instead of raising
    skipped = train_walk(m, np.array([0]), np.array([[1]]),
                         np.empty((1, 1, 0), dtype=np.int64))
    assert skipped == 1
    assert m.skipped_updates == 1


def test_plain_denominator_annihilates_beta_step():
    # without the +1, P_new @ H is exactly zero, so beta cannot move
    m = init_model(4, 10, mu=1.0, seed=15, regularized=False)
    before = m.beta.copy()
    ctx = WalkContext(center=0, positives=np.array([1, 2]))
    context_update(m, ctx, np.empty((2, 0), dtype=np.int64))
    assert np.allclose(m.beta, before, atol=1e-12)


def test_snapshot_bound_and_purity(rng):
    d, v = 8, 30
    m = init_model(d, v, mu=0.01, seed=16)
    snap = embedding_snapshot(m)
    assert snap.shape == (v, d)
    assert np.abs(snap).max() <= 0.01 * 0.5 / d + 1e-15
    copy = snap.copy()
    centers, positives, negatives = random_walk_batch(rng, v)
    train_walk(m, centers, positives, negatives)
    assert np.array_equal(snap, copy)


def test_snapshot_is_scaled_beta_transpose():
    # power-of-two mu so the rescaling is exact in floating point
    m = init_model(5, 12, mu=0.03125, seed=17)
    assert np.array_equal(embedding_snapshot(m) * (1 / 0.03125), m.beta.T)
    r = init_model(5, 12, mu=0.03125, seed=17, mode="random_alpha")
    assert np.array_equal(embedding_snapshot(r), r.alpha)


def test_parameter_count():
    m = init_model(32, 2708)
    counts = parameter_count(m)
    assert counts["trainable"] == 86656
    assert counts["state"] == 1024
    assert counts["total"] == 87680
    assert counts["bytes"] == 701440
    # same order of magnitude as the published 0.376 MB figure
    assert 0.1 < counts["bytes"] / (0.376 * 1024 * 1024) < 10
    r = init_model(32, 2708, mode="random_alpha")
    assert parameter_count(r)["fixed"] == 86656


def test_proposed_smaller_than_baseline_for_all_d_below_v():
    from seqembed.sgd import init_sgd, sgd_parameter_count

    for d, v in [(1, 2), (8, 64), (32, 2708), (96, 100)]:
        prop = parameter_count(init_model(d, v))["total"]
        orig = sgd_parameter_count(init_sgd(d, v))["total"]
        assert prop < orig
