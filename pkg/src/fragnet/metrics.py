"""Outcome measures over a simulation state and its network.

Two quantities summarize a finished run: the mean cultural distance
between the two initial groups (``cd``) and the mean shortest path length
of the undirected, unweighted view of the network (``spl``).  High cd with
high spl marks a culturally fragmented society, low/low a fully
assimilated one; spl is undefined whenever the network is disconnected and
such runs are excluded from path-length statistics downstream.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from .model import Group, Network

if TYPE_CHECKING:  # pragma: no cover
    from .engine import SimState

__all__ = [
    "RunResult",
    "mean_intergroup_cultural_distance",
    "weak_components",
    "average_shortest_path_length",
]


@dataclass(frozen=True)
class RunResult:
    """Per-run outcome record.

    ``spl`` is None exactly when the final network is disconnected
    (``component_count`` > 1).  ``wall_ms`` is informational only and is 0
    unless timing was explicitly requested (see ``engine.run``).
    """

    sigma_d: float
    sigma_rs: float
    sigma_rw: float
    run_index: int
    seed: int
    cd: float
    spl: Optional[float]
    edge_count: int
    component_count: int
    wall_ms: int


def mean_intergroup_cultural_distance(state: "SimState") -> float:
    """Mean Euclidean distance over all cross-group agent pairs.

    Uses the immutable group labels assigned at initialization, not the
    evolved cultural positions, to partition the agents.
    """
    idx_a = [a.id for a in state.agents if a.group is Group.A]
    idx_b = [a.id for a in state.agents if a.group is Group.B]
    if not idx_a or not idx_b:
        raise ValueError("both groups must be nonempty")
    group_a = state.cultures[idx_a]
    group_b = state.cultures[idx_b]
    diff = group_a[:, None, :] - group_b[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=2)).mean())


def weak_components(net: Network) -> List[List[int]]:
    """Partition of all nodes into weakly connected components.

    Edge direction is ignored.  Components are returned as sorted lists,
    ordered by their smallest member.
    """
    seen = [False] * net.n
    components: List[List[int]] = []
    for start in range(net.n):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        members = [start]
        while queue:
            node = queue.pop()
            for other in net.neighbors(node):
                if not seen[other]:
                    seen[other] = True
                    queue.append(other)
                    members.append(other)
        members.sort()
        components.append(members)
    return components


def average_shortest_path_length(net: Network) -> Optional[float]:
    """Mean hop count over all node pairs of the undirected, unweighted view.

    Returns None when any pair is unreachable (disconnected network), which
    callers treat as "excluded from path-length statistics".  Weights and
    edge directions play no role.
    """
    n = net.n
    if n < 2:
        return None
    adjacency = [net.neighbors(i) for i in range(n)]
    total = 0  # exact integer sum of all pairwise hop counts
    for source in range(n):
        dist = [-1] * n
        dist[source] = 0
        reached = 1
        queue = deque([source])
        while queue:
            node = queue.popleft()
            next_hop = dist[node] + 1
            for other in adjacency[node]:
                if dist[other] < 0:
                    dist[other] = next_hop
                    total += next_hop
                    reached += 1
                    queue.append(other)
        if reached < n:
            return None
    return total / (n * (n - 1))
