import numpy as np
import pytest

from seqembed.sampling import (AliasTable, FrequencyCounter, NegativeSampler,
                               TablePolicy, alias_sample, build_alias,
                               negatives_for_walk, reconstructed_distribution)

# chi-square critical value at the 0.001 level for 4 degrees of freedom
CHI2_CRIT_DF4_P001 = 18.4668


def test_two_slot_table_exact():
    table = build_alias([1.0, 3.0])
    rec = reconstructed_distribution(table)
    assert abs(rec[1] - 0.75) < 1e-15
    assert abs(rec[0] - 0.25) < 1e-15


def test_uniform_weights_need_no_alias():
    table = build_alias(np.ones(7))
    assert np.all(table.prob == 1.0)


def test_zero_weight_node_unsampleable():
    table = build_alias([0.0, 5.0])
    rec = reconstructed_distribution(table)
    assert rec[0] == 0.0
    assert rec[1] == 1.0
    draws = alias_sample(table, np.random.default_rng(0), size=1000)
    assert np.all(draws == 1)


def test_invalid_weights_rejected():
    with pytest.raises(ValueError):
        build_alias([0.0, 0.0])
    with pytest.raises(ValueError):
        build_alias([])
    with pytest.raises(ValueError):
        build_alias([1.0, -0.5])


def test_reconstruction_invariant_random_weights(rng):
    for _ in range(200):
        n = int(rng.integers(1, 60))
        w = rng.uniform(0.0, 10.0, size=n)
        if w.sum() == 0:
            w[0] = 1.0
        table = build_alias(w)
        assert np.abs(reconstructed_distribution(table) - w / w.sum()).max() < 1e-12


def test_single_node_table():
    table = build_alias([2.5])
    assert alias_sample(table, np.random.default_rng(1)) == 0


def test_million_draws_frequency():
    table = build_alias([1.0, 3.0])
    draws = alias_sample(table, np.random.default_rng(9), size=1_000_000)
    assert abs(np.mean(draws == 1) - 0.75) < 0.002


def test_chi_square_goodness_of_fit(rng):
    weights = rng.uniform(0.2, 3.0, size=5)
    table = build_alias(weights)
    n = 1_000_000
    draws = alias_sample(table, np.random.default_rng(31), size=n)
    observed = np.bincount(draws, minlength=5)
    expected = n * weights / weights.sum()
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_CRIT_DF4_P001


def test_shared_negatives_identical_across_contexts(rng):
    table = build_alias(np.ones(50))
    negs = negatives_for_walk(table, n_contexts=73, n_positives=7, ns=10,
                              mode="shared", rng=rng)
    assert negs.shape == (73, 7, 10)
    assert np.all(negs == negs[0, 0])


def test_fresh_negatives_independent(rng):
    table = build_alias(np.ones(500))
    negs = negatives_for_walk(table, n_contexts=4, n_positives=7, ns=10,
                              mode="fresh", rng=rng)
    assert negs.shape == (4, 7, 10)
    # 280 draws over 500 uniform nodes: all-equal pools are (astronomically) unlikely
    assert not np.all(negs == negs[0, 0])


def test_negatives_validation(rng):
    table = build_alias(np.ones(5))
    with pytest.raises(ValueError):
        negatives_for_walk(table, 1, 1, 0, "fresh", rng)
    with pytest.raises(ValueError):
        negatives_for_walk(table, 1, 1, 3, "sometimes", rng)


def test_error_terms_per_context_arithmetic(rng):
    # window 8 and 10 negatives: 7 positives, each with 1 + 10 targets
    from seqembed.oselm import _assemble_context

    table = build_alias(np.ones(20))
    negs = negatives_for_walk(table, 1, 7, 10, "fresh", rng)
    cols, targets = _assemble_context(np.arange(7), negs[0])
    assert cols.shape == (77,)
    assert targets.sum() == 7.0  # one positive target per window slot


def test_counter_total_matches_walk_lengths(rng):
    counter = FrequencyCounter(30)
    total = 0
    for _ in range(20):
        walk = rng.integers(0, 30, size=int(rng.integers(1, 50)))
        counter.record_walk(walk)
        total += len(walk)
    assert counter.total == total
    assert counter.counts.sum() == total


def test_table_policy_validation():
    with pytest.raises(ValueError):
        TablePolicy(0)
    TablePolicy(None)
    TablePolicy(10)


@pytest.mark.parametrize("k,additions", [(1, 17), (3, 17), (5, 100), (7, 6)])
def test_refresh_count_matches_policy(k, additions):
    sampler = NegativeSampler(10, ns=2, policy=TablePolicy(k))
    sampler.observe_walk(np.array([1, 2, 3]))
    for _ in range(additions):
        sampler.notify_edge_added()
    assert sampler.edge_rebuilds == additions // k


def test_never_policy_never_rebuilds():
    sampler = NegativeSampler(10, ns=2, policy=TablePolicy(None))
    sampler.observe_walk(np.array([1, 2]))
    for _ in range(500):
        sampler.notify_edge_added()
    assert sampler.edge_rebuilds == 0


def test_sampler_starts_uniform_then_tracks_counts(rng):
    sampler = NegativeSampler(4, ns=1)
    assert np.all(sampler.table.prob == 1.0)  # uniform seed table
    sampler.observe_walk(np.array([1, 1, 1, 2]))
    sampler.rebuild()
    rec = reconstructed_distribution(sampler.table)
    assert rec[0] == 0.0 and rec[3] == 0.0
    assert abs(rec[1] - 0.75) < 1e-12


def test_sampler_exponent():
    sampler = NegativeSampler(3, ns=1, exponent=0.75)
    sampler.observe_walk(np.array([0] * 16 + [1]))
    sampler.rebuild()
    rec = reconstructed_distribution(sampler.table)
    assert abs(rec[0] / rec[1] - 8.0) < 1e-9  # (16/1) ** 0.75
    with pytest.raises(ValueError):
        NegativeSampler(3, exponent=0.0)
