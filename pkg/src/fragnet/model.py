"""Core types and elementary update rules of the adaptive culture network.

An agent carries a position in a continuous cultural space plus three
personal behavioral attributes:

* ``d``   -- cultural tolerance: the distance at which it accepts foreign
  culture with probability one half,
* ``r_s`` -- how far it moves toward an accepted culture (convex mixing
  weight),
* ``r_w`` -- how strongly it reinforces or weakens a social tie after an
  interaction (additive step in logit space).

Everything in this module is a pure function of its inputs (plus an
explicit random generator where sampling is involved); the iteration loop
lives in :mod:`fragnet.engine`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Sequence, Set, Tuple

import numpy as np

__all__ = [
    "TOLERANCE_FLOOR",
    "Group",
    "CulturalVector",
    "BehavioralAttributes",
    "Agent",
    "Network",
    "DiversityParams",
    "euclidean_distance",
    "acceptance_probability",
    "mix_culture",
    "reinforce_weight",
    "weaken_weight",
    "sample_attributes",
]

# Hard floor on cultural tolerance: the acceptance rule divides by d, so a
# zero or negative tolerance is meaningless.
TOLERANCE_FLOOR = 0.01

# A cultural state is a 1-D float vector; length is fixed by the simulation
# config (10 by default).
CulturalVector = np.ndarray


class Group(str, Enum):
    """Initial group label of an agent; immutable over a whole run."""

    A = "A"
    B = "B"


@dataclass(frozen=True)
class BehavioralAttributes:
    """Per-agent behavioral attributes (d, r_s, r_w)."""

    d: float
    r_s: float
    r_w: float

    def __post_init__(self) -> None:
        if not (self.d >= TOLERANCE_FLOOR and math.isfinite(self.d)):
            raise ValueError(f"tolerance d must be >= {TOLERANCE_FLOOR}, got {self.d}")
        if not (0.0 <= self.r_s <= 1.0):
            raise ValueError(f"culture change rate r_s must lie in [0, 1], got {self.r_s}")
        if not (self.r_w >= 0.0 and math.isfinite(self.r_w)):
            raise ValueError(f"weight change rate r_w must be >= 0, got {self.r_w}")


@dataclass(frozen=True)
class Agent:
    """One social constituent.

    ``culture`` is a live view into the owning state's culture matrix, so it
    always reflects the current cultural position.  ``group`` is the label
    assigned at initialization and never changes; the cross-group distance
    metric is defined over these initial labels.
    """

    id: int
    group: Group
    culture: CulturalVector
    attrs: BehavioralAttributes


@dataclass(frozen=True)
class DiversityParams:
    """Population means and standard deviations of the behavioral attributes."""

    sigma_d: float = 0.0
    sigma_rs: float = 0.0
    sigma_rw: float = 0.0
    mean_d: float = 0.5
    mean_rs: float = 0.5
    mean_rw: float = 0.5

    def __post_init__(self) -> None:
        for name in ("sigma_d", "sigma_rs", "sigma_rw"):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite value >= 0, got {value}")
        for name in ("mean_d", "mean_rs", "mean_rw"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


class Network:
    """Directed weighted graph over ``n`` nodes with fast in-neighbor lookup.

    Edge (source j -> target i) carries the intensity with which i draws
    culture from j.  Stored weights always lie in ``[min_weight, 1)``;
    callers remove an edge instead of storing a weight below the floor.
    Self-loops are rejected.
    """

    __slots__ = ("n", "min_weight", "_in", "_out", "_und", "_edge_count")

    def __init__(self, n: int, min_weight: float = 0.01):
        if n < 1:
            raise ValueError("node count must be >= 1")
        self.n = n
        self.min_weight = min_weight
        self._in: List[Dict[int, float]] = [dict() for _ in range(n)]
        self._out: List[Set[int]] = [set() for _ in range(n)]
        # Undirected multiplicity view (1 or 2 per unordered pair), kept
        # incrementally so component searches need no union building.
        self._und: List[Dict[int, int]] = [dict() for _ in range(n)]
        self._edge_count = 0

    # -- mutation ---------------------------------------------------------

    def add_edge(self, source: int, target: int, weight: float) -> None:
        if source == target:
            raise ValueError("self-loops are not allowed")
        if (source, target) in self:
            raise ValueError(f"edge {source}->{target} already exists")
        self._check_weight(weight)
        self._in[target][source] = weight
        self._out[source].add(target)
        self._und[source][target] = self._und[source].get(target, 0) + 1
        self._und[target][source] = self._und[target].get(source, 0) + 1
        self._edge_count += 1

    def set_weight(self, source: int, target: int, weight: float) -> None:
        if source not in self._in[target]:
            raise KeyError(f"no edge {source}->{target}")
        self._check_weight(weight)
        self._in[target][source] = weight

    def remove_edge(self, source: int, target: int) -> None:
        del self._in[target][source]
        self._out[source].discard(target)
        for a, b in ((source, target), (target, source)):
            count = self._und[a][b]
            if count == 1:
                del self._und[a][b]
            else:
                self._und[a][b] = count - 1
        self._edge_count -= 1

    def _check_weight(self, weight: float) -> None:
        if not (self.min_weight <= weight < 1.0):
            raise ValueError(
                f"edge weight must lie in [{self.min_weight}, 1), got {weight}"
            )

    # -- queries ----------------------------------------------------------

    def __contains__(self, edge: Tuple[int, int]) -> bool:
        source, target = edge
        return source in self._in[target]

    def weight(self, source: int, target: int) -> float:
        return self._in[target][source]

    def in_edges(self, target: int) -> Dict[int, float]:
        """Mapping source -> weight of all in-edges of ``target`` (do not mutate)."""
        return self._in[target]

    def out_targets(self, source: int) -> Set[int]:
        return self._out[source]

    def neighbors(self, node: int) -> Sequence[int]:
        """Nodes adjacent to ``node`` when edge direction is ignored."""
        return list(self._und[node])

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        """All edges as (source, target, weight), sorted for reproducible output."""
        for target in range(self.n):
            for source in sorted(self._in[target]):
                yield source, target, self._in[target][source]

    def component_of(self, node: int) -> Set[int]:
        """Weakly connected component containing ``node`` (direction ignored)."""
        seen = {node}
        stack = [node]
        und = self._und
        while stack:
            current = stack.pop()
            for other in und[current]:
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        return seen

    def copy(self) -> "Network":
        clone = Network(self.n, self.min_weight)
        clone._in = [dict(d) for d in self._in]
        clone._out = [set(s) for s in self._out]
        clone._und = [dict(d) for d in self._und]
        clone._edge_count = self._edge_count
        return clone

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.n == other.n and self._in == other._in

    def __repr__(self) -> str:
        return f"Network(n={self.n}, edges={self._edge_count})"


# -- elementary update rules -----------------------------------------------


def euclidean_distance(v_i: Sequence[float], v_j: Sequence[float]) -> float:
    """Euclidean distance between two cultural vectors of equal length."""
    if len(v_i) != len(v_j):
        raise ValueError(f"dimension mismatch: {len(v_i)} vs {len(v_j)}")
    return math.dist(v_i, v_j)


def acceptance_probability(
    v_i: Sequence[float], v_j: Sequence[float], d: float
) -> float:
    """Probability that culture ``v_j`` is accepted by an agent at ``v_i``.

    Halves for every ``d`` of cultural distance::

        P = (1/2) ** (|v_i - v_j| / d)

    so it equals 1 for identical cultures and 0.5 at distance exactly ``d``.
    The result is clamped away from zero so it stays in (0, 1] even when the
    power underflows.
    """
    if d < TOLERANCE_FLOOR:
        raise ValueError(f"tolerance d must be >= {TOLERANCE_FLOOR}, got {d}")
    dist = euclidean_distance(v_i, v_j)
    p = 0.5 ** (dist / d)
    return p if p > 0.0 else math.nextafter(0.0, 1.0)


def mix_culture(
    v_i: CulturalVector, v_j: Sequence[float], r_s: float
) -> CulturalVector:
    """Move ``v_i`` toward ``v_j`` by mixing rate ``r_s``: (1-r_s)*v_i + r_s*v_j."""
    if len(v_i) != len(v_j):
        raise ValueError(f"dimension mismatch: {len(v_i)} vs {len(v_j)}")
    if not (0.0 <= r_s <= 1.0):
        raise ValueError(f"mixing rate r_s must lie in [0, 1], got {r_s}")
    keep = 1.0 - r_s
    return keep * np.asarray(v_i, dtype=float) + r_s * np.asarray(v_j, dtype=float)


def _logit(w: float) -> float:
    return math.log(w / (1.0 - w))


def _logistic(y: float) -> float:
    # Evaluate with exp of a non-positive argument only, so large |y| cannot
    # overflow; round away from the closed endpoints to keep the result in
    # the open interval.
    if y >= 0.0:
        value = 1.0 / (1.0 + math.exp(-y))
    else:
        e = math.exp(y)
        value = e / (1.0 + e)
    if value <= 0.0:
        return math.nextafter(0.0, 1.0)
    if value >= 1.0:
        return math.nextafter(1.0, 0.0)
    return value


def reinforce_weight(w: float, r_w: float) -> float:
    """Strengthen an edge weight by ``r_w`` in logit space; stays in (0, 1)."""
    if not 0.0 < w < 1.0:
        raise ValueError(f"edge weight must lie in (0, 1), got {w}")
    if r_w < 0.0:
        raise ValueError(f"weight change rate r_w must be >= 0, got {r_w}")
    return _logistic(_logit(w) + r_w)


def weaken_weight(w: float, r_w: float) -> float:
    """Weaken an edge weight by ``r_w`` in logit space; stays in (0, 1)."""
    if not 0.0 < w < 1.0:
        raise ValueError(f"edge weight must lie in (0, 1), got {w}")
    if r_w < 0.0:
        raise ValueError(f"weight change rate r_w must be >= 0, got {r_w}")
    return _logistic(_logit(w) - r_w)


def sample_attributes(
    params: DiversityParams, rng: np.random.Generator
) -> BehavioralAttributes:
    """Draw one agent's behavioral attributes.

    Each attribute is an independent normal draw with the configured mean
    and standard deviation, clamped into its valid range afterwards:
    d to [0.01, inf), r_s to [0, 1], r_w to [0, inf).  With all sigmas zero
    the means are returned exactly.  Clamping (rather than redrawing) keeps
    sampling single-pass and reproducible; at large sigmas the realized
    post-clamp moments therefore deviate from the nominal (mean, sigma).
    """
    d = rng.normal(params.mean_d, params.sigma_d)
    r_s = rng.normal(params.mean_rs, params.sigma_rs)
    r_w = rng.normal(params.mean_rw, params.sigma_rw)
    return BehavioralAttributes(
        d=max(d, TOLERANCE_FLOOR),
        r_s=min(max(r_s, 0.0), 1.0),
        r_w=max(r_w, 0.0),
    )
