import numpy as np
import pytest

from cfmatch import (ScenarioConfig, Matching, best_channel, min_distance,
                     canonical, gca, da_m2m, swap_matching, STRATEGIES,
                     get_strategy, evaluate_network, as_eval_context,
                     GameCounters, ChannelRealization)

from helpers import (small_config, random_channels, channels_from_vectors,
                     random_demands, check_matching_valid)


def _demands(num_ues, value=3e7):
    return np.full(num_ues, value)


def test_best_channel_picks_argmax():
    gains = np.array([[0.1, 0.9, 0.5],
                      [0.7, 0.2, 0.7]])
    ch = ChannelRealization(gains=gains,
                            vectors=np.sqrt(gains)[:, :, None].astype(complex),
                            distances=np.ones_like(gains))
    cfg = small_config(3, 2)
    m = best_channel(ch, _demands(2), cfg)
    expected = np.array([[False, True, False],
                         [True, False, False]])  # tie at 0.7 -> lower index
    np.testing.assert_array_equal(m.assoc, expected)
    assert m.association_count() == 2


def test_min_distance_picks_nearest():
    gains = np.array([[0.1, 0.9], [0.5, 0.2]])
    dists = np.array([[5.0, 50.0], [50.0, 5.0]])
    ch = ChannelRealization(gains=gains,
                            vectors=np.sqrt(gains)[:, :, None].astype(complex),
                            distances=dists)
    cfg = small_config(2, 2)
    m = min_distance(ch, _demands(2), cfg)
    np.testing.assert_array_equal(m.assoc, np.eye(2, dtype=bool))


def test_distance_and_gain_orders_can_differ():
    # shadowing can make the nearest AP a poor channel; the two schemes
    # must rank independently
    gains = np.array([[0.1, 0.9]])
    dists = np.array([[5.0, 50.0]])
    ch = ChannelRealization(gains=gains,
                            vectors=np.sqrt(gains)[:, :, None].astype(complex),
                            distances=dists)
    cfg = small_config(2, 1)
    bc = best_channel(ch, _demands(1), cfg)
    md = min_distance(ch, _demands(1), cfg)
    assert bc.ue_clusters[0] == [1]
    assert md.ue_clusters[0] == [0]


def test_canonical_all_pairs():
    cfg = small_config(4, 3)
    ch = random_channels(np.random.default_rng(1), 3, 4, 1)
    m = canonical(ch, _demands(3), cfg)
    assert m.association_count() == 12
    assert all(len(l) == 3 for l in m.ap_loads)
    assert all(len(c) == 4 for c in m.ue_clusters)


def test_gca_threshold_window():
    # 30 dB window: gains within a factor 1000 of the row max stay
    gains = np.array([[1e-6, 2e-9, 0.9e-9],
                      [1e-7, 1e-7, 1e-13]])
    ch = ChannelRealization(gains=gains,
                            vectors=np.sqrt(gains)[:, :, None].astype(complex),
                            distances=np.ones_like(gains))
    cfg = small_config(3, 2, noise_var=1e-2)  # noise high: no pruning gain
    m = gca(ch, _demands(2), cfg)
    assert m.ue_clusters[0] == [0, 1]   # 0.9e-9 is below 1e-6/1000
    assert m.ue_clusters[1] == [0, 1]


def test_gca_infinite_window_is_canonical():
    cfg = small_config(3, 2, power_diff_threshold=float("inf"))
    ch = random_channels(np.random.default_rng(3), 2, 3, 1)
    m = gca(ch, _demands(2), cfg)
    assert m.association_count() == 6


def test_gca_zero_window_is_best_channel():
    cfg = small_config(4, 3, power_diff_threshold=0.0, noise_var=1e-2)
    ch = random_channels(np.random.default_rng(4), 3, 4, 1)
    m = gca(ch, _demands(3), cfg)
    b = best_channel(ch, _demands(3), cfg)
    np.testing.assert_array_equal(m.assoc, b.assoc)


def _gca_pruning_instance():
    """Find an instance where exactly one AP removal raises the worst
    spectral efficiency and no second removal improves further."""
    rng = np.random.default_rng(19)
    for _ in range(500):
        ch = random_channels(rng, 2, 3, 1)
        cfg = small_config(3, 2, noise_var=10.0 ** rng.uniform(-9, -7))
        demands = _demands(2)
        floor = ch.gains.max(axis=1) / 10.0 ** (cfg.power_diff_threshold / 10.0)
        assoc = ch.gains >= floor[:, None]
        ctx = as_eval_context(ch, cfg)

        def worst_se(a):
            ev = ctx.evaluate_assoc(a, demands)
            return float(np.log2(1.0 + ev.sinr).min())

        base = worst_se(assoc)
        active = np.flatnonzero(assoc.any(axis=0))
        improvements = {}
        for m in active:
            trial = assoc.copy()
            trial[:, m] = False
            improvements[int(m)] = worst_se(trial) - base
        positive = {m: g for m, g in improvements.items() if g > 0}
        if len(positive) != 1:
            continue
        only_m = next(iter(positive))
        pruned = assoc.copy()
        pruned[:, only_m] = False
        base2 = worst_se(pruned)
        second = [worst_se(np.where(np.arange(3)[None, :] == m2, False, pruned))
                  for m2 in np.flatnonzero(pruned.any(axis=0))]
        if all(v <= base2 for v in second):
            return ch, cfg, demands, pruned
    raise AssertionError("search found no single-prune instance")


def test_gca_prunes_harmful_ap():
    ch, cfg, demands, expected = _gca_pruning_instance()
    m = gca(ch, demands, cfg)
    np.testing.assert_array_equal(m.assoc, expected)


def test_da_exact_count_at_defaults():
    cfg = ScenarioConfig(seed=0)
    rng = np.random.default_rng(0)
    ch = random_channels(rng, 20, 50, 2)
    m, counters = da_m2m(ch, random_demands(rng, cfg), cfg)
    assert m.association_count() == min(50 * 12, 20 * 8) == 160
    check_matching_valid(m, cfg)
    assert counters.da_iterations >= 1


def test_da_everyone_gets_top_choices_without_contention():
    # AP quota >= K means no rejection: each UE holds its best APs
    cfg = small_config(5, 3, ap_quota=3, ue_quota=2)
    ch = random_channels(np.random.default_rng(6), 3, 5, 1)
    m, _ = da_m2m(ch, _demands(3), cfg)
    for k in range(3):
        top2 = list(np.argsort(-ch.gains[k], kind="stable")[:2])
        assert sorted(m.ue_clusters[k]) == sorted(int(x) for x in top2)


def test_da_single_pair():
    cfg = small_config(1, 1, ap_quota=1, ue_quota=1)
    ch = random_channels(np.random.default_rng(7), 1, 1, 1)
    m, _ = da_m2m(ch, _demands(1), cfg)
    assert m.association_count() == 1


def test_da_respects_quotas_randomized():
    rng = np.random.default_rng(8)
    for _ in range(60):
        num_ues = int(rng.integers(1, 8))
        num_aps = int(rng.integers(1, 8))
        cfg = small_config(num_aps, num_ues,
                          ap_quota=int(rng.integers(1, num_ues + 1)),
                          ue_quota=int(rng.integers(1, num_aps + 1)))
        ch = random_channels(rng, num_ues, num_aps, 1)
        m, _ = da_m2m(ch, _demands(num_ues), cfg)
        check_matching_valid(m, cfg)
        # with full-length lists the count hits the quota bound exactly
        assert m.association_count() == min(num_aps * cfg.ap_quota,
                                            num_ues * cfg.ue_quota)


def test_swap_fixed_point_on_symmetric_instance():
    h = 1e-4 + 0j
    vectors = np.full((2, 2, 1), h)
    ch = channels_from_vectors(vectors)
    cfg = small_config(2, 2, ap_quota=1, ue_quota=1, noise_var=1e-9)
    m = Matching.from_assoc(np.eye(2, dtype=bool))
    counters = GameCounters()
    out = swap_matching(m, ch, _demands(2, 1e9), cfg, counters)
    np.testing.assert_array_equal(out.assoc, m.assoc)
    assert counters.swap_count == 0


def test_swap_crosses_misassigned_pairs():
    # UE 0's strong AP is 1 and UE 1's is 0, but they start uncrossed;
    # the only admissible swap crosses them and helps both
    vectors = np.zeros((2, 2, 1), dtype=complex)
    vectors[0, 0, 0] = 1e-5
    vectors[0, 1, 0] = 9e-4
    vectors[1, 0, 0] = 8e-4
    vectors[1, 1, 0] = 1e-5
    ch = channels_from_vectors(vectors)
    cfg = small_config(2, 2, ap_quota=1, ue_quota=1, noise_var=1e-9)
    demands = _demands(2, 1e9)
    start = Matching.from_assoc(np.eye(2, dtype=bool))
    before = evaluate_network(start, ch, demands, cfg)
    counters = GameCounters()
    out = swap_matching(start, ch, demands, cfg, counters)
    after = evaluate_network(out, ch, demands, cfg)
    np.testing.assert_array_equal(out.assoc,
                                  np.array([[False, True], [True, False]]))
    assert counters.swap_count == 1
    assert after.kappa[0] > before.kappa[0]
    assert after.kappa[1] > before.kappa[1]


def test_swap_preserves_structure_and_sum():
    rng = np.random.default_rng(9)
    for _ in range(25):
        num_ues = int(rng.integers(2, 6))
        num_aps = int(rng.integers(2, 6))
        cfg = small_config(num_aps, num_ues,
                          ap_quota=int(rng.integers(1, num_ues + 1)),
                          ue_quota=int(rng.integers(1, num_aps + 1)),
                          noise_var=1e-7)
        ch = random_channels(rng, num_ues, num_aps, 1)
        m, counters = da_m2m(ch, _demands(num_ues, 1e8), cfg)
        demands = rng.choice([5e6, 3e7, 1e8], size=num_ues)
        before = evaluate_network(m, ch, demands, cfg)
        out = swap_matching(m, ch, demands, cfg, counters)
        after = evaluate_network(out, ch, demands, cfg)
        assert after.kappa.sum() >= before.kappa.sum()
        assert counters.swap_count <= cfg.ue_quota * num_ues ** 2
        # swaps trade APs one-for-one: every load and cluster size kept
        assert [len(l) for l in out.ap_loads] == [len(l) for l in m.ap_loads]
        assert [len(c) for c in out.ue_clusters] == [len(c) for c in m.ue_clusters]
        check_matching_valid(out, cfg)


def test_registry_contents():
    assert set(STRATEGIES) == {"ea", "da", "da-smp", "bc", "md", "cs", "gca"}
    for name in STRATEGIES:
        fn = get_strategy(name)
        assert callable(fn)
    with pytest.raises(ValueError, match="unknown strategy"):
        get_strategy("EA")


def test_registry_uniform_signature():
    cfg = small_config(3, 2)
    rng = np.random.default_rng(12)
    ch = random_channels(rng, 2, 3, 1)
    demands = _demands(2)
    for name in STRATEGIES:
        matching, counters = get_strategy(name)(ch, demands, cfg)
        assert isinstance(matching, Matching)
        assert isinstance(counters, GameCounters)
        matching.check_consistent()
