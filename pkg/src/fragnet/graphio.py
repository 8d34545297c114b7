"""Serialization of network states: JSON records, edge lists, and DOT.

The JSON network record is the interchange form used by run records,
snapshots, and ``--export-final``; the plain-text edge list and DOT file
are for external visualization tools.

Edge-list format (one item per line, full float precision)::

    # fragnet network v1
    # node <id> <group> <d> <r_s> <r_w> <culture_0> <culture_1>
    # edge <source> <target> <weight>
    node 0 A 0.5 0.5 0.5 0.0123 -0.0456
    edge 0 3 0.4219
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Tuple, Union

from .metrics import (
    average_shortest_path_length,
    mean_intergroup_cultural_distance,
    weak_components,
)
from .model import Network

if TYPE_CHECKING:  # pragma: no cover
    from .engine import SimState

__all__ = [
    "network_record",
    "snapshot_record",
    "network_from_record",
    "write_edge_list",
    "write_dot",
    "load_edge_list",
]

_FORMAT_HEADER = "# fragnet network v1"


def network_record(state: "SimState") -> dict:
    """JSON-ready description of the current network and node attributes."""
    nodes = []
    for agent in state.agents:
        nodes.append(
            {
                "id": agent.id,
                "group": agent.group.value,
                "d": agent.attrs.d,
                "r_s": agent.attrs.r_s,
                "r_w": agent.attrs.r_w,
                "culture": [float(x) for x in state.cultures[agent.id]],
            }
        )
    edges = [
        {"source": source, "target": target, "weight": weight}
        for source, target, weight in state.network.edges()
    ]
    return {"directed": True, "n": state.network.n, "nodes": nodes, "edges": edges}


def snapshot_record(state: "SimState") -> dict:
    """One trajectory snapshot: iteration, outcome metrics, full network."""
    return {
        "iteration": state.iteration,
        "cd": mean_intergroup_cultural_distance(state),
        "spl": average_shortest_path_length(state.network),
        "edge_count": state.network.edge_count,
        "component_count": len(weak_components(state.network)),
        "network": network_record(state),
    }


def network_from_record(record: dict) -> Network:
    """Rebuild a Network from a JSON record (weights must respect the floor)."""
    weights = [edge["weight"] for edge in record["edges"]]
    floor = min([0.01] + weights)
    net = Network(int(record["n"]), min_weight=floor)
    for edge in record["edges"]:
        net.add_edge(int(edge["source"]), int(edge["target"]), float(edge["weight"]))
    return net


def _node_line(node: dict) -> str:
    culture = node["culture"]
    return (
        f"node {node['id']} {node['group']} {node['d']!r} {node['r_s']!r} "
        f"{node['r_w']!r} {culture[0]!r} {culture[1]!r}"
    )


def write_edge_list(record: dict, path: Union[str, Path]) -> None:
    """Write the documented plain-text export of a network record."""
    lines = [
        _FORMAT_HEADER,
        "# node <id> <group> <d> <r_s> <r_w> <culture_0> <culture_1>",
        "# edge <source> <target> <weight>",
    ]
    for node in record["nodes"]:
        lines.append(_node_line(node))
    for edge in record["edges"]:
        lines.append(f"edge {edge['source']} {edge['target']} {edge['weight']!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_dot(record: dict, path: Union[str, Path]) -> None:
    """Write the network record as a DOT digraph for graphviz-style tools."""
    lines = ["digraph fragnet {"]
    for node in record["nodes"]:
        culture = node["culture"]
        lines.append(
            f'  {node["id"]} [group="{node["group"]}", d={node["d"]!r}, '
            f'r_s={node["r_s"]!r}, r_w={node["r_w"]!r}, '
            f"c0={culture[0]!r}, c1={culture[1]!r}];"
        )
    for edge in record["edges"]:
        lines.append(
            f'  {edge["source"]} -> {edge["target"]} [weight={edge["weight"]!r}];'
        )
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path: Union[str, Path]) -> Tuple[Network, List[dict]]:
    """Parse an edge-list export back into a Network plus node attribute rows.

    Weights survive the round trip exactly (repr formatting).
    """
    nodes: List[dict] = []
    edges: List[Tuple[int, int, float]] = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "node" and len(parts) == 8:
            nodes.append(
                {
                    "id": int(parts[1]),
                    "group": parts[2],
                    "d": float(parts[3]),
                    "r_s": float(parts[4]),
                    "r_w": float(parts[5]),
                    "culture": [float(parts[6]), float(parts[7])],
                }
            )
        elif parts[0] == "edge" and len(parts) == 4:
            edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
        else:
            raise ValueError(f"line {line_no}: unrecognized record {line!r}")
    if not nodes:
        raise ValueError("no node lines found")
    n = max(node["id"] for node in nodes) + 1
    floor = min([0.01] + [w for _, _, w in edges])
    network = Network(n, min_weight=floor)
    for source, target, weight in edges:
        network.add_edge(source, target, weight)
    return network, nodes
