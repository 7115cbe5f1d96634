"""Social graph: conformity influence, community detection, clustering metric.

The graph is the substrate for endogenous alignment: roles are anchored to
nodes, neighbor behavior biases each agent's action distribution, and the
clustering coefficient / community partition are the observable structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import WorldError

MAX_PROPAGATION_ROUNDS = 100


@dataclass
class SocialGraph:
    """Undirected weighted graph over agent ids; weights in (0, 1]."""

    nodes: set[str] = field(default_factory=set)
    _adj: dict[str, dict[str, float]] = field(default_factory=dict)

    def add_node(self, node: str) -> None:
        self.nodes.add(node)
        self._adj.setdefault(node, {})

    def weight(self, a: str, b: str) -> float:
        """Edge weight, 0.0 if absent."""
        return self._adj.get(a, {}).get(b, 0.0)

    def neighbors(self, node: str) -> dict[str, float]:
        return dict(self._adj.get(node, {}))

    def edges(self) -> list[tuple[str, str, float]]:
        """All edges as (a, b, w) with a < b, sorted."""
        out = []
        for a in sorted(self._adj):
            for b, w in sorted(self._adj[a].items()):
                if a < b:
                    out.append((a, b, w))
        return out

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [{"a": a, "b": b, "w": w} for a, b, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SocialGraph":
        graph = cls()
        for node in payload.get("nodes", []):
            graph.add_node(str(node))
        for edge in payload.get("edges", []):
            update_edge(graph, str(edge["a"]), str(edge["b"]), float(edge["w"]))
        return graph


def update_edge(graph: SocialGraph, a: str, b: str, w: float) -> SocialGraph:
    """Set (or, with w=0, remove) the undirected edge a-b. Self-loops are invalid."""
    if a == b:
        raise WorldError(f"self-loop edge on node '{a}'")
    if not 0.0 <= w <= 1.0:
        raise WorldError(f"edge weight {w} for {a}-{b} outside [0, 1]")
    graph.add_node(a)
    graph.add_node(b)
    if w == 0.0:
        graph._adj[a].pop(b, None)
        graph._adj[b].pop(a, None)
    else:
        graph._adj[a][b] = w
        graph._adj[b][a] = w
    return graph


def _binarized_neighbors(graph: SocialGraph, tau: float) -> dict[str, list[str]]:
    return {
        node: sorted(peer for peer, w in graph.neighbors(node).items() if w >= tau)
        for node in sorted(graph.nodes)
    }


def clustering_coefficient(graph: SocialGraph, tau: float = 0.3) -> float:
    """Average local clustering over all nodes of the tau-binarized graph.

    Local coefficient of node i is 2*e_i / (k_i*(k_i-1)) where e_i counts edges
    among i's neighbors; nodes with degree < 2 contribute 0. Empty graph -> 0.
    """
    if not 0.0 <= tau <= 1.0:
        raise WorldError(f"binarization threshold {tau} outside [0, 1]")
    if not graph.nodes:
        return 0.0
    adj = _binarized_neighbors(graph, tau)
    total = 0.0
    for node, peers in adj.items():
        k = len(peers)
        if k < 2:
            continue
        linked = 0
        for i, p in enumerate(peers):
            p_set = set(adj[p])
            linked += sum(1 for q in peers[i + 1 :] if q in p_set)
        total += 2.0 * linked / (k * (k - 1))
    return total / len(graph.nodes)


@dataclass(frozen=True)
class CommunityPartition:
    """Total labeling of nodes; the community holding the smallest node id
    gets the smallest label, so equal partitions serialize identically."""

    labels: dict[str, int]

    def communities(self) -> list[list[str]]:
        groups: dict[int, list[str]] = {}
        for node in sorted(self.labels):
            groups.setdefault(self.labels[node], []).append(node)
        return [groups[label] for label in sorted(groups)]

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self.labels.items()))


def detect_communities(graph: SocialGraph, tau: float = 0.3) -> CommunityPartition:
    """Synchronous weighted label propagation on the tau-binarized graph.

    Every node starts labeled with its own id. Each round, all nodes
    simultaneously adopt the label with the highest summed neighbor weight
    (ties break toward the smallest label); isolated nodes keep their label.
    Runs to a fixed point or 100 rounds, then canonicalizes labels.
    """
    if not 0.0 <= tau <= 1.0:
        raise WorldError(f"binarization threshold {tau} outside [0, 1]")
    nodes = sorted(graph.nodes)
    labels: dict[str, str] = {node: node for node in nodes}
    qualifying = {
        node: sorted((peer, w) for peer, w in graph.neighbors(node).items() if w >= tau)
        for node in nodes
    }
    for _ in range(MAX_PROPAGATION_ROUNDS):
        nxt: dict[str, str] = {}
        for node in nodes:
            votes: dict[str, float] = {}
            for peer, w in qualifying[node]:
                votes[labels[peer]] = votes.get(labels[peer], 0.0) + w
            if not votes:
                nxt[node] = labels[node]
            else:
                best = max(votes.values())
                nxt[node] = min(lbl for lbl, v in votes.items() if v == best)
        if nxt == labels:
            break
        labels = nxt

    # Canonical relabeling: communities ordered by their smallest member.
    rep: dict[str, str] = {}
    for node in nodes:
        lbl = labels[node]
        if lbl not in rep or node < rep[lbl]:
            rep[lbl] = node
    ordered = sorted(set(rep.values()))
    canonical = {leader: index for index, leader in enumerate(ordered)}
    return CommunityPartition({node: canonical[rep[labels[node]]] for node in nodes})


def conformity_term(
    graph: SocialGraph, agent: str, last_actions: dict[str, str]
) -> dict[str, float]:
    """Weighted fraction of neighbors that took each action last tick.

    Values lie in [0, 1] and sum to at most 1; empty map when the agent has
    no neighbors or no neighbor acted.
    """
    if agent not in graph.nodes:
        raise WorldError(f"agent '{agent}' not in social graph")
    neighbors = graph.neighbors(agent)
    total = sum(neighbors.values())
    if total == 0.0:
        return {}
    term: dict[str, float] = {}
    for peer in sorted(neighbors):
        action = last_actions.get(peer)
        if action is not None:
            term[action] = term.get(action, 0.0) + neighbors[peer] / total
    return term


def role_alignment_bias(value_bias: dict[str, float], beta: float) -> dict[str, float]:
    """Scale a role's endogenous value-bias vector by the anchor gain beta."""
    if beta < 0:
        raise WorldError(f"anchor gain beta must be >= 0, got {beta}")
    return {tag: beta * score for tag, score in sorted(value_bias.items())}
