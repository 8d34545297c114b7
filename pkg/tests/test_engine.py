"""Engine tests: initialization statistics, action semantics, determinism."""

import dataclasses
import math
import time

import numpy as np
import pytest

from fragnet.engine import (
    ActionOutcome,
    SimConfig,
    agent_action,
    init_state,
    run,
    select_source,
    step,
)
from fragnet.metrics import mean_intergroup_cultural_distance, weak_components
from fragnet.model import Agent, BehavioralAttributes, DiversityParams, Group


def make_state(
    n_agents=4,
    dims=2,
    edges=(),
    cultures=None,
    d=0.5,
    r_s=0.5,
    r_w=0.5,
    seed=0,
    **config_kwargs,
):
    """Edgeless custom state with uniform attributes; edges added explicitly."""
    config = SimConfig(
        group_size=n_agents // 2,
        dims=dims,
        intra_density=0.0,
        inter_density=0.0,
        diversity=DiversityParams(mean_d=d, mean_rs=r_s, mean_rw=r_w),
        iterations=0,
        seed=seed,
        **config_kwargs,
    )
    state = init_state(config)
    if cultures is not None:
        state.cultures[:] = np.asarray(cultures, dtype=float)
    for source, target, weight in edges:
        state.network.add_edge(source, target, weight)
    return state


# -- initialization -----------------------------------------------------------


def test_init_is_deterministic_for_a_seed():
    config = SimConfig(seed=123)
    assert init_state(config) == init_state(config)
    assert init_state(config) != init_state(SimConfig(seed=124))


def test_init_edge_count_within_binomial_bounds():
    # expected 2*(50*49*0.2) + 2*(50*50*0.02) = 1080 directed edges,
    # sd = sqrt(2*2450*0.2*0.8 + 2*2500*0.02*0.98) ~ 29.7
    expected = 1080.0
    sd = math.sqrt(2 * 2450 * 0.2 * 0.8 + 2 * 2500 * 0.02 * 0.98)
    for seed in range(12):
        state = init_state(SimConfig(seed=seed))
        assert abs(state.network.edge_count - expected) < 4 * sd


def test_init_group_labels_and_culture_centers():
    state = init_state(SimConfig(seed=5))
    g = state.config.group_size
    assert all(a.group is Group.A for a in state.agents[:g])
    assert all(a.group is Group.B for a in state.agents[g:])
    # group means sit near the configured centers
    mean_a = state.cultures[:g].mean(axis=0)
    mean_b = state.cultures[g:].mean(axis=0)
    assert abs(mean_a[0] - 0.0) < 0.1 and abs(mean_b[0] - 3.0) < 0.1
    assert np.all(np.abs(mean_a[1:]) < 0.1) and np.all(np.abs(mean_b[1:]) < 0.1)


def test_init_weights_respect_floor_and_agent_culture_views():
    state = init_state(SimConfig(seed=9))
    for source, target, weight in state.network.edges():
        assert source != target
        assert 0.01 <= weight < 1.0
    # Agent.culture is a live view into the culture matrix
    agent = state.agents[3]
    state.cultures[3, 0] = 42.0
    assert agent.culture[0] == 42.0


def test_init_cross_to_within_distance_ratio_plausible():
    # full 100-seed statistics are in the acceptance suite
    ratios = []
    for seed in range(5):
        state = init_state(SimConfig(seed=seed))
        g = state.config.group_size
        a, b = state.cultures[:g], state.cultures[g:]
        cross = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)).mean()
        within = []
        for block in (a, b):
            diff = block[:, None, :] - block[None, :, :]
            dist = np.sqrt((diff**2).sum(-1))
            within.append(dist[np.triu_indices(g, k=1)].mean())
        ratios.append(cross / np.mean(within))
    assert 6.0 < np.mean(ratios) < 8.0


# -- source selection ---------------------------------------------------------


def test_select_source_single_in_neighbor_local_branch():
    state = make_state(edges=[(2, 0, 0.7)], local_select_prob=1.0)
    for _ in range(20):
        result = select_source(state, 0)
        assert result == (2, False)


def test_select_source_weight_proportional_frequencies():
    state = make_state(edges=[(1, 0, 0.9), (2, 0, 0.1)], local_select_prob=1.0)
    rng = np.random.default_rng(777)
    counts = {1: 0, 2: 0}
    for _ in range(10_000):
        source, created = select_source(state, 0, rng)
        assert not created
        counts[source] += 1
    assert counts[1] / 10_000 == pytest.approx(0.9, abs=0.02)
    assert counts[2] / 10_000 == pytest.approx(0.1, abs=0.02)


def test_select_source_global_branch_creates_minimal_edge():
    # no in-neighbors for node 0, but 0 -> 1 puts it in a 2-node component
    state = make_state(edges=[(0, 1, 0.5)], local_select_prob=1.0)
    result = select_source(state, 0)
    assert result == (1, True)
    assert state.network.weight(1, 0) == 0.01


def test_select_source_global_branch_reuses_existing_edge():
    state = make_state(edges=[(1, 0, 0.5)], local_select_prob=0.0)
    source, created = select_source(state, 0)
    assert source == 1 and not created
    assert state.network.weight(1, 0) == 0.5


def test_select_source_singleton_component_skips():
    state = make_state(edges=[(1, 2, 0.5)])
    assert select_source(state, 0) is None


def test_select_source_skip_consumes_no_randomness():
    state = make_state()
    before = state.rng.bit_generator.state
    assert select_source(state, 0) is None
    assert state.rng.bit_generator.state == before


# -- single agent actions -----------------------------------------------------


def test_agent_action_identical_cultures_always_accepts():
    cultures = [[1.0, 2.0]] * 4
    state = make_state(edges=[(1, 0, 0.5)], cultures=cultures, local_select_prob=1.0)
    culture_before = state.cultures[0].copy()
    w = 0.5
    for _ in range(10):
        outcome = agent_action(state, 0)
        assert outcome is ActionOutcome.ACCEPTED
        assert np.array_equal(state.cultures[0], culture_before)
        new_w = state.network.weight(1, 0)
        assert new_w > w
        w = new_w


def test_agent_action_rejection_prunes_fresh_minimal_edge():
    # distance 40 with d=0.5 makes acceptance ~2^-80: certain rejection,
    # and weakening 0.01 lands below the prune threshold
    cultures = [[0.0, 0.0], [40.0, 0.0], [0.0, 1.0], [0.0, 2.0]]
    state = make_state(edges=[(1, 0, 0.01)], cultures=cultures, local_select_prob=1.0)
    outcome = agent_action(state, 0)
    assert outcome is ActionOutcome.REJECTED
    assert (1, 0) not in state.network
    assert np.array_equal(state.cultures[0], [0.0, 0.0])


def test_agent_action_zero_rate_leaves_weight_unchanged():
    cultures = [[0.0, 0.0], [40.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    state = make_state(
        edges=[(1, 0, 0.25), (2, 0, 0.25)],
        cultures=cultures,
        r_w=0.0,
        local_select_prob=1.0,
    )
    for _ in range(10):
        outcome = agent_action(state, 0)
        assert outcome in (ActionOutcome.ACCEPTED, ActionOutcome.REJECTED)
        assert state.network.weight(1, 0) == 0.25
        assert state.network.weight(2, 0) == 0.25


def test_agent_action_skipped_on_isolated_agent():
    state = make_state()
    assert agent_action(state, 0) is ActionOutcome.SKIPPED


# -- step ---------------------------------------------------------------------


def test_step_equals_one_agent_action_per_agent_in_id_order():
    config = SimConfig(group_size=10, seed=31)
    fast = init_state(config)
    slow = init_state(config)
    for _ in range(5):
        step(fast)
        for focal in range(config.n_agents):
            agent_action(slow, focal)
    assert np.array_equal(fast.cultures, slow.cultures)
    assert fast.network == slow.network
    assert fast.rng.bit_generator.state == slow.rng.bit_generator.state
    assert fast.iteration == 5


def test_step_on_empty_network_only_advances_iteration():
    state = make_state(n_agents=6)
    cultures_before = state.cultures.copy()
    rng_before = state.rng.bit_generator.state
    step(state)
    assert state.iteration == 1
    assert np.array_equal(state.cultures, cultures_before)
    assert state.network.edge_count == 0
    assert state.rng.bit_generator.state == rng_before


def test_step_is_deterministic_from_equal_states():
    state_a = init_state(SimConfig(group_size=10, seed=77))
    state_b = state_a.copy()
    assert state_a == state_b
    step(state_a)
    step(state_b)
    assert state_a == state_b


def test_step_shuffled_order_changes_trajectory_but_not_determinism():
    base = SimConfig(group_size=10, seed=88)
    shuffled = dataclasses.replace(base, shuffle_agent_order=True)
    a1, _ = run(dataclasses.replace(base, iterations=20))
    a2, _ = run(dataclasses.replace(base, iterations=20))
    b1, _ = run(dataclasses.replace(shuffled, iterations=20))
    b2, _ = run(dataclasses.replace(shuffled, iterations=20))
    assert a1 == a2 and b1 == b2
    assert not np.array_equal(a1.cultures, b1.cultures)


# -- full runs ----------------------------------------------------------------


def test_run_zero_iterations_reports_initial_metrics():
    _, result = run(SimConfig(seed=1, iterations=0))
    assert 2.9 < result.cd < 3.2
    assert result.component_count == 1
    assert result.spl is not None and result.spl > 1.0
    assert result.wall_ms == 0


def test_run_is_deterministic():
    config = SimConfig(group_size=15, iterations=30, seed=4242)
    state_a, result_a = run(config)
    state_b, result_b = run(config)
    assert result_a == result_b
    assert state_a == state_b


def test_run_invariants_hold_on_final_state():
    config = SimConfig(iterations=60, seed=2024, diversity=DiversityParams(0.2, 0.2, 0.2))
    initial = init_state(config)
    lo = initial.cultures.min(axis=0) - 1e-9
    hi = initial.cultures.max(axis=0) + 1e-9
    state, result = run(config)
    # node set and labels fixed; weights within bounds; no self-loops
    assert [a.group for a in state.agents] == [a.group for a in initial.agents]
    for source, target, weight in state.network.edges():
        assert source != target
        assert config.prune_threshold <= weight < 1.0
    # every culture update is a convex combination, so the componentwise
    # envelope of the initial cultures can never be escaped
    assert np.all(state.cultures >= lo) and np.all(state.cultures <= hi)
    assert result.edge_count == state.network.edge_count
    assert result.component_count == len(weak_components(state.network))
    assert result.cd == mean_intergroup_cultural_distance(state)


def test_run_records_timing_only_on_request():
    config = SimConfig(group_size=10, iterations=5, seed=3)
    _, untimed = run(config)
    _, timed = run(config, record_timing=True)
    assert untimed.wall_ms == 0
    assert timed.wall_ms >= 0
    assert dataclasses.replace(timed, wall_ms=0) == untimed


def test_run_default_config_budget():
    start = time.perf_counter()
    run(SimConfig(seed=17))
    assert time.perf_counter() - start < 1.0


def test_run_snapshot_sink_called_at_expected_iterations():
    seen = []
    run(
        SimConfig(group_size=10, iterations=10, seed=6),
        snapshot_every=4,
        snapshot_sink=lambda state: seen.append(state.iteration),
    )
    assert seen == [0, 4, 8, 10]


def test_sim_config_validation_names_offending_field():
    with pytest.raises(ValueError, match="group_size"):
        SimConfig(group_size=1)
    with pytest.raises(ValueError, match="intra_density"):
        SimConfig(intra_density=1.5)
    with pytest.raises(ValueError, match="new_edge_weight"):
        SimConfig(new_edge_weight=0.005)
    with pytest.raises(ValueError, match="iterations"):
        SimConfig(iterations=-1)
    with pytest.raises(ValueError, match="seed"):
        SimConfig(seed=-5)
