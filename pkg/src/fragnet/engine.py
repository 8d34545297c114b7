"""Simulation engine: network initialization and the sequential action loop.

A run starts from two structurally and culturally distant groups and then
repeatedly lets every agent, in ascending id order, pick an information
source, accept or reject its culture, and adjust the connecting edge
weight.  All randomness flows through one generator owned by the state, so
a (config, seed) pair fully determines the trajectory.

Random-stream layout (fixed; changing it changes trajectories):

* ``init_state``: culture noise matrix, then per-agent attribute triples
  (d, r_s, r_w), then the adjacency mask, then edge weights including
  redraws of sub-threshold values.
* per action: one uniform for the local-vs-global branch (only when the
  focal agent has in-neighbors), one uniform for the weighted source pick
  (local branch) or one integer for the uniform component pick (global
  branch), then one uniform for the accept/reject decision.  A skipped
  action (singleton component, no in-neighbors) consumes no randomness.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from .metrics import (
    RunResult,
    average_shortest_path_length,
    mean_intergroup_cultural_distance,
    weak_components,
)
from .model import (
    Agent,
    BehavioralAttributes,
    DiversityParams,
    Group,
    Network,
    _logistic,
    _logit,
    acceptance_probability,
    mix_culture,
    reinforce_weight,
    sample_attributes,
    weaken_weight,
)

__all__ = [
    "SimConfig",
    "SimState",
    "ActionOutcome",
    "init_state",
    "select_source",
    "agent_action",
    "step",
    "run",
]

_MAX_SEED = 2**64


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulation run."""

    group_size: int = 50
    dims: int = 10
    intra_density: float = 0.20
    inter_density: float = 0.02
    center_separation: float = 3.0
    culture_noise_sd: float = 0.1
    diversity: DiversityParams = field(default_factory=DiversityParams)
    iterations: int = 500
    local_select_prob: float = 0.99
    new_edge_weight: float = 0.01
    prune_threshold: float = 0.01
    shuffle_agent_order: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.group_size < 2:
            raise ValueError(f"group_size must be >= 2, got {self.group_size}")
        if self.dims < 1:
            raise ValueError(f"dims must be >= 1, got {self.dims}")
        for name in ("intra_density", "inter_density", "local_select_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {p}")
        if not (math.isfinite(self.center_separation) and self.center_separation >= 0.0):
            raise ValueError(f"center_separation must be finite and >= 0, got {self.center_separation}")
        if not (math.isfinite(self.culture_noise_sd) and self.culture_noise_sd >= 0.0):
            raise ValueError(f"culture_noise_sd must be finite and >= 0, got {self.culture_noise_sd}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0.0 < self.prune_threshold < 1.0:
            raise ValueError(f"prune_threshold must lie in (0, 1), got {self.prune_threshold}")
        if not self.prune_threshold <= self.new_edge_weight < 1.0:
            raise ValueError(
                "new_edge_weight must lie in [prune_threshold, 1), got "
                f"{self.new_edge_weight}"
            )
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_agents(self) -> int:
        return 2 * self.group_size


@dataclass(eq=False)
class SimState:
    """Mutable state of a run: agents, cultures, network, iteration, rng.

    ``cultures`` is the (n_agents x dims) matrix of cultural vectors and is
    the single source of truth; every ``Agent.culture`` is a live row view
    into it.  The matrix is only mutated in place, never rebound.
    """

    config: SimConfig
    agents: List[Agent]
    network: Network
    cultures: np.ndarray
    iteration: int
    rng: np.random.Generator

    def copy(self) -> "SimState":
        cultures = self.cultures.copy()
        agents = [Agent(a.id, a.group, cultures[a.id], a.attrs) for a in self.agents]
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng.bit_generator.state
        return SimState(self.config, agents, self.network.copy(), cultures, self.iteration, rng)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimState):
            return NotImplemented
        return (
            self.config == other.config
            and self.iteration == other.iteration
            and np.array_equal(self.cultures, other.cultures)
            and self.network == other.network
            and [(a.group, a.attrs) for a in self.agents]
            == [(a.group, a.attrs) for a in other.agents]
            and self.rng.bit_generator.state == other.rng.bit_generator.state
        )


class ActionOutcome(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    SKIPPED = "skipped"


def init_state(config: SimConfig) -> SimState:
    """Build the initial two-group state, fully determined by ``config.seed``.

    Group A sits at the origin of the cultural space, group B at
    ``center_separation`` along the first axis (the dynamics are invariant
    under isometries, so the placement is arbitrary).  Each agent gets its
    group center plus i.i.d. normal noise per component.  Every ordered pair
    (source, target) receives an edge independently, with the intra- or
    inter-group density as probability; weights are uniform on (0, 1) with
    sub-threshold values redrawn so the initial network satisfies the weight
    floor without losing density.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_agents
    g = config.group_size

    centers = np.zeros((n, config.dims))
    centers[g:, 0] = config.center_separation
    cultures = centers + rng.normal(0.0, config.culture_noise_sd, size=(n, config.dims))

    attrs = [sample_attributes(config.diversity, rng) for _ in range(n)]

    same_group = np.zeros((n, n), dtype=bool)
    same_group[:g, :g] = True
    same_group[g:, g:] = True
    prob = np.where(same_group, config.intra_density, config.inter_density)
    np.fill_diagonal(prob, 0.0)
    mask = rng.random((n, n)) < prob

    pairs = np.argwhere(mask)  # rows (source, target) in row-major order
    weights = rng.random(len(pairs))
    while True:
        low = weights < config.prune_threshold
        if not low.any():
            break
        weights[low] = rng.random(int(low.sum()))

    network = Network(n, min_weight=config.prune_threshold)
    for (source, target), w in zip(pairs, weights):
        network.add_edge(int(source), int(target), float(w))

    agents = [
        Agent(i, Group.A if i < g else Group.B, cultures[i], attrs[i])
        for i in range(n)
    ]
    return SimState(config, agents, network, cultures, 0, rng)


def _weighted_pick(weights: dict, u: float) -> int:
    """Pick a key with probability proportional to its value; u is uniform on [0, 1)."""
    x = u * sum(weights.values())
    acc = 0.0
    for key, w in weights.items():
        acc += w
        if x < acc:
            return key
    return key  # guard against accumulated rounding


def _acceptance(dist: float, d: float) -> float:
    p = 0.5 ** (dist / d)
    return p if p > 0.0 else math.nextafter(0.0, 1.0)


def select_source(
    state: SimState, focal: int, rng: Optional[np.random.Generator] = None
) -> Optional[Tuple[int, bool]]:
    """Choose an information source for ``focal``; may create a new edge.

    With probability ``local_select_prob`` (and at least one in-neighbor)
    the source is drawn from the in-neighbors proportionally to edge weight.
    Otherwise -- the rare global branch, or the fallback for agents without
    in-neighbors -- it is drawn uniformly from the focal agent's weakly
    connected component, excluding the focal agent itself.  A missing edge
    source -> focal is then created at ``new_edge_weight``.

    Returns (source, created_edge), or None when the focal agent sits in a
    singleton component and the turn is skipped.
    """
    if rng is None:
        rng = state.rng
    net = state.network
    config = state.config
    in_edges = net.in_edges(focal)
    if in_edges and rng.random() < config.local_select_prob:
        return _weighted_pick(in_edges, rng.random()), False
    component = net.component_of(focal)
    if len(component) == 1:
        return None
    candidates = sorted(component)
    candidates.remove(focal)
    source = int(candidates[rng.integers(len(candidates))])
    created = source not in in_edges
    if created:
        net.add_edge(source, focal, config.new_edge_weight)
    return source, created


def agent_action(
    state: SimState, focal: int, rng: Optional[np.random.Generator] = None
) -> ActionOutcome:
    """Run one agent's turn: source selection, accept/reject, weight update.

    On acceptance the focal culture moves toward the source by its own
    mixing rate and the used edge is reinforced; on rejection the culture is
    untouched and the edge weakened.  Either way the edge is removed
    immediately if its weight falls below the prune threshold.
    """
    if rng is None:
        rng = state.rng
    selection = select_source(state, focal, rng)
    if selection is None:
        return ActionOutcome.SKIPPED
    source, _ = selection
    config = state.config
    net = state.network
    a = state.agents[focal].attrs
    v_focal = state.cultures[focal]
    v_source = state.cultures[source]
    p = acceptance_probability(v_focal, v_source, a.d)
    w = net.weight(source, focal)
    if rng.random() < p:
        state.cultures[focal] = mix_culture(v_focal, v_source, a.r_s)
        new_w = reinforce_weight(w, a.r_w)
        outcome = ActionOutcome.ACCEPTED
    else:
        new_w = weaken_weight(w, a.r_w)
        outcome = ActionOutcome.REJECTED
    if new_w < config.prune_threshold:
        net.remove_edge(source, focal)
    else:
        net.set_weight(source, focal, new_w)
    return outcome


def _act(
    net: Network,
    cultures: List[List[float]],
    attr_d: List[float],
    attr_rs: List[float],
    attr_rw: List[float],
    focal: int,
    rng: np.random.Generator,
    p_local: float,
    new_edge_weight: float,
    prune_threshold: float,
) -> None:
    """One agent turn on the list representation; semantics of agent_action.

    This is the hot path: `step` executes it ~n_agents * iterations times,
    so it works on plain lists/dicts and scalar math only.  Any change here
    must keep the random-draw order and arithmetic identical to
    ``select_source``/``agent_action``.
    """
    in_edges = net._in[focal]
    if in_edges and rng.random() < p_local:
        source = _weighted_pick(in_edges, rng.random())
    else:
        component = net.component_of(focal)
        if len(component) == 1:
            return
        candidates = sorted(component)
        candidates.remove(focal)
        source = int(candidates[rng.integers(len(candidates))])
        if source not in in_edges:
            net.add_edge(source, focal, new_edge_weight)
    v_focal = cultures[focal]
    v_source = cultures[source]
    p = _acceptance(math.dist(v_focal, v_source), attr_d[focal])
    w = in_edges[source]
    if rng.random() < p:
        r_s = attr_rs[focal]
        keep = 1.0 - r_s
        cultures[focal] = [keep * x + r_s * y for x, y in zip(v_focal, v_source)]
        new_w = _logistic(_logit(w) + attr_rw[focal])
    else:
        new_w = _logistic(_logit(w) - attr_rw[focal])
    if new_w < prune_threshold:
        net.remove_edge(source, focal)
    else:
        in_edges[source] = new_w  # weight stays in [prune, 1) by construction


def step(state: SimState) -> SimState:
    """Advance the state by one iteration: one action per agent, in id order.

    Updates are applied in place immediately, so later agents in the same
    iteration see the cultures and weights already modified by earlier ones.
    With ``shuffle_agent_order`` the order is a fresh random permutation per
    iteration (one extra block of randomness) instead of ascending ids.
    """
    config = state.config
    rng = state.rng
    net = state.network
    agents = state.agents
    cultures = state.cultures.tolist()
    attr_d = [a.attrs.d for a in agents]
    attr_rs = [a.attrs.r_s for a in agents]
    attr_rw = [a.attrs.r_w for a in agents]
    if config.shuffle_agent_order:
        order = rng.permutation(len(agents)).tolist()
    else:
        order = range(len(agents))
    p_local = config.local_select_prob
    new_w = config.new_edge_weight
    prune = config.prune_threshold
    for focal in order:
        _act(net, cultures, attr_d, attr_rs, attr_rw, focal, rng, p_local, new_w, prune)
    state.cultures[:] = cultures
    state.iteration += 1
    return state


def run(
    config: SimConfig,
    *,
    record_timing: bool = False,
    snapshot_every: int = 0,
    snapshot_sink: Optional[Callable[[SimState], None]] = None,
) -> Tuple[SimState, RunResult]:
    """Initialize, iterate, and measure one full simulation run.

    The returned RunResult echoes the seed and diversity settings and
    carries the outcome metrics of the final state.  ``wall_ms`` is 0 unless
    ``record_timing`` is set: run records are byte-reproducible by default,
    and real timings would break that.

    With ``snapshot_every`` k > 0, ``snapshot_sink`` is invoked on the state
    at iteration 0, after every k-th iteration, and at the final iteration.
    """
    start = time.perf_counter()
    state = init_state(config)
    if snapshot_every > 0 and snapshot_sink is not None:
        snapshot_sink(state)
    for _ in range(config.iterations):
        step(state)
        if snapshot_every > 0 and snapshot_sink is not None:
            if state.iteration % snapshot_every == 0 or state.iteration == config.iterations:
                snapshot_sink(state)
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    result = RunResult(
        sigma_d=config.diversity.sigma_d,
        sigma_rs=config.diversity.sigma_rs,
        sigma_rw=config.diversity.sigma_rw,
        run_index=0,
        seed=config.seed,
        cd=mean_intergroup_cultural_distance(state),
        spl=average_shortest_path_length(state.network),
        edge_count=state.network.edge_count,
        component_count=len(weak_components(state.network)),
        wall_ms=elapsed_ms if record_timing else 0,
    )
    return state, result
