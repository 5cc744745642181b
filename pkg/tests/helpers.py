"""Shared builders and checkers for randomized test instances."""

import numpy as np

from cfmatch import (ChannelRealization, ScenarioConfig, Matching,
                     build_preferences, associate, as_eval_context)


def small_config(num_aps, num_ues, antennas_per_ap=1, **overrides):
    """ScenarioConfig for tiny instances; quotas default to full size."""
    params = dict(num_aps=num_aps, num_ues=num_ues,
                  antennas_per_ap=antennas_per_ap,
                  ap_quota=num_ues, ue_quota=num_aps, num_steps=1)
    params.update(overrides)
    return ScenarioConfig(**params)


def random_channels(rng, num_ues, num_aps, antennas):
    """Random realization with gains spread over a few orders of
    magnitude; distances drawn independently so distance- and
    gain-based orderings genuinely differ."""
    gains = 10.0 ** rng.uniform(-9.0, -6.0, size=(num_ues, num_aps))
    shape = (num_ues, num_aps, antennas)
    alpha = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    vectors = alpha * np.sqrt(gains)[:, :, None]
    distances = rng.uniform(1.0, 300.0, size=(num_ues, num_aps))
    return ChannelRealization(gains=gains, vectors=vectors, distances=distances)


def channels_from_vectors(vectors):
    """Wrap explicit channel vectors; gains follow their energy."""
    vectors = np.asarray(vectors, dtype=complex)
    gains = np.abs(vectors) ** 2
    gains = gains.mean(axis=2)
    distances = 1.0 / np.sqrt(gains)
    return ChannelRealization(gains=gains, vectors=vectors, distances=distances)


def random_demands(rng, config):
    return rng.choice(np.asarray(config.demand_set, float), size=config.num_ues)


def records_by_strategy(records):
    grouped = {}
    for rec in records:
        grouped.setdefault(rec.strategy, []).append(rec)
    return grouped


def check_partition(partition, num_ues):
    """All five sets disjoint and covering every UE."""
    sets = partition.sets()
    union = set()
    total = 0
    for s in sets:
        union |= s
        total += len(s)
    assert union == set(range(num_ues))
    assert total == num_ues


def check_matching_valid(matching, config):
    """Definition-level validity: consistent views, quotas respected."""
    matching.check_consistent()
    assert not matching.quota_violation(config.ap_quota, config.ue_quota)


def replay_ea_trace(channels, demands, config, trace, final_assoc):
    """Re-derive the game from its commit trace, asserting the
    favorable-pair rule at every evolution commit.

    Checks, per evolution commit: the UE sat inside the AP's
    remaining-quota window, its own satisfaction strictly rose, and the
    summed satisfaction over UEs served at commit time did not drop.
    The replayed matching must equal the game's final matching.
    """
    ctx = as_eval_context(channels, config)
    demands = np.asarray(demands, dtype=float)
    state = build_preferences(ctx.channels.gains, config)
    matching = Matching.empty(ctx.num_ues, ctx.num_aps)
    evolve_commits = 0
    for kind, k, m in trace:
        if kind == "evolve":
            assert k in state.ap_prefs[m][:state.ap_quota[m]]
            before = ctx.evaluate_assoc(matching.assoc, demands)
            served = matching.assoc.any(axis=1)
            associate(k, m, state, matching)
            after = ctx.evaluate_assoc(matching.assoc, demands)
            assert after.kappa[k] > before.kappa[k]
            assert float(after.kappa[served].sum()) >= float(before.kappa[served].sum())
            evolve_commits += 1
        else:
            associate(k, m, state, matching)
    np.testing.assert_array_equal(matching.assoc, final_assoc)
    return evolve_commits
