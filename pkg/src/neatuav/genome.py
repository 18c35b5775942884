"""Genome encoding and feed-forward evaluation for the neuroevolution engine.

A genome is a variable-topology neural network described by two gene sets:
node genes (id, kind, bias) and connection genes (innovation number, endpoints,
weight, enabled flag). Innovation numbers are historical markings handed out by
a shared :class:`InnovationTracker` so that structurally identical additions
made anywhere in the population within one generation carry the same marker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

INPUT = "input"
HIDDEN = "hidden"
OUTPUT = "output"


@dataclass
class NodeGene:
    id: int
    kind: str  # "input" | "hidden" | "output"
    bias: float = 0.0


@dataclass
class ConnectionGene:
    innovation: int
    src: int
    dst: int
    weight: float
    enabled: bool = True


class InnovationTracker:
    """Hands out innovation numbers and node ids shared across a generation.

    The registry maps a (src, dst) endpoint pair to the innovation number it
    received when first created in the current generation; asking again for the
    same pair returns the same number. Splitting the same connection gene in
    two different genomes likewise yields the same new node id. Counters only
    ever move forward, so markers stay unique across the whole run even though
    the registries are cleared at every generation turnover.
    """

    def __init__(self):
        self.registry: dict[tuple[int, int], int] = {}
        self.split_registry: dict[int, int] = {}
        self.next_innovation = 0
        self.next_node_id = 0

    def connection_innovation(self, src: int, dst: int) -> int:
        key = (src, dst)
        found = self.registry.get(key)
        if found is not None:
            return found
        marker = self.next_innovation
        self.next_innovation += 1
        self.registry[key] = marker
        return marker

    def node_for_split(self, innovation: int) -> int:
        """New node id for splitting the connection gene with this marker."""
        found = self.split_registry.get(innovation)
        if found is not None:
            return found
        node_id = self.next_node_id
        self.next_node_id += 1
        self.split_registry[innovation] = node_id
        return node_id

    def claim_node_ids(self, count: int) -> None:
        """Reserve the first `count` ids for the fixed input/output nodes."""
        self.next_node_id = max(self.next_node_id, count)

    def claim_innovations(self, count: int) -> None:
        """Move the innovation counter past markers minted elsewhere."""
        self.next_innovation = max(self.next_innovation, count)

    def reset_generation(self) -> None:
        """Forget this generation's structural additions; counters persist."""
        self.registry.clear()
        self.split_registry.clear()


@dataclass
class Genome:
    """One network: node genes keyed by id, connection genes by innovation."""

    nodes: dict[int, NodeGene]
    connections: dict[int, ConnectionGene]
    state_dim: int
    action_dim: int
    fitness: float | None = None

    def input_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes.values() if n.kind == INPUT)

    def output_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes.values() if n.kind == OUTPUT)

    def hidden_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes.values() if n.kind == HIDDEN)

    def has_edge(self, src: int, dst: int) -> bool:
        return any(c.src == src and c.dst == dst for c in self.connections.values())

    def enabled_connections(self) -> list[ConnectionGene]:
        return [c for c in self.connections.values() if c.enabled]

    def copy(self) -> "Genome":
        return Genome(
            nodes={i: NodeGene(n.id, n.kind, n.bias) for i, n in self.nodes.items()},
            connections={
                k: ConnectionGene(c.innovation, c.src, c.dst, c.weight, c.enabled)
                for k, c in self.connections.items()
            },
            state_dim=self.state_dim,
            action_dim=self.action_dim,
            fitness=self.fitness,
        )


def toposort(genome: Genome) -> list[int]:
    """Node ids in dependency order over enabled connections.

    Raises ValueError if the enabled digraph has a cycle (corrupt genome).
    """
    indeg = {nid: 0 for nid in genome.nodes}
    succ: dict[int, list[int]] = {nid: [] for nid in genome.nodes}
    for conn in genome.connections.values():
        if conn.enabled:
            succ[conn.src].append(conn.dst)
            indeg[conn.dst] += 1
    ready = sorted(nid for nid, d in indeg.items() if d == 0)
    order: list[int] = []
    while ready:
        nid = ready.pop(0)
        order.append(nid)
        inserted = False
        for nxt in sorted(succ[nid]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
                inserted = True
        if inserted:
            ready.sort()
    if len(order) != len(genome.nodes):
        raise ValueError("enabled-connection digraph has a cycle")
    return order


def is_acyclic(genome: Genome, include_disabled: bool = False) -> bool:
    """True when the connection digraph is cycle-free.

    With include_disabled the full gene digraph is checked, which is the
    stronger invariant mutation maintains (see evolution.add_connection).
    """
    indeg = {nid: 0 for nid in genome.nodes}
    succ: dict[int, list[int]] = {nid: [] for nid in genome.nodes}
    for conn in genome.connections.values():
        if conn.enabled or include_disabled:
            succ[conn.src].append(conn.dst)
            indeg[conn.dst] += 1
    ready = [nid for nid, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        nid = ready.pop()
        seen += 1
        for nxt in succ[nid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    return seen == len(genome.nodes)


class FeedForwardNetwork:
    """Compiled evaluator for one genome.

    Nodes are grouped into longest-path levels; each level is a dense matrix
    acting on everything computed before it, so a forward pass is a couple of
    small matmuls instead of a per-connection Python loop. Instances keep a
    scratch buffer, so one instance must not be activated concurrently;
    evaluations build their own network.
    """

    def __init__(self, genome: Genome):
        order = toposort(genome)
        inputs = genome.input_ids()
        outputs = genome.output_ids()
        level = {nid: 0 for nid in inputs}
        incoming: dict[int, list[ConnectionGene]] = {nid: [] for nid in genome.nodes}
        for conn in genome.connections.values():
            if conn.enabled:
                incoming[conn.dst].append(conn)
        for nid in order:
            if genome.nodes[nid].kind == INPUT:
                continue
            preds = incoming[nid]
            level[nid] = 1 + max((level[c.src] for c in preds), default=0)

        self.n_inputs = len(inputs)
        pos = {nid: i for i, nid in enumerate(inputs)}
        by_level: dict[int, list[int]] = {}
        for nid, lv in level.items():
            if genome.nodes[nid].kind != INPUT:
                by_level.setdefault(lv, []).append(nid)

        self._layers = []
        offset = len(inputs)
        for lv in sorted(by_level):
            rows = sorted(by_level[lv])
            start = offset
            mat = np.zeros((len(rows), start))
            bias = np.empty(len(rows))
            relu = np.empty(len(rows), dtype=bool)
            for r, nid in enumerate(rows):
                pos[nid] = offset
                offset += 1
                node = genome.nodes[nid]
                bias[r] = node.bias
                relu[r] = node.kind == HIDDEN
                for conn in incoming[nid]:
                    mat[r, pos[conn.src]] += conn.weight
            scratch = np.empty(len(rows))
            self._layers.append(
                (mat, bias, bool(relu.any()), relu, start, offset, scratch)
            )
        self._size = offset
        self._buf = np.empty(offset)
        self._out_pos = np.array([pos[nid] for nid in outputs], dtype=np.intp)

    def activate(self, inputs) -> np.ndarray:
        if len(inputs) != self.n_inputs:
            raise ValueError(
                f"expected {self.n_inputs} inputs, got {len(inputs)}"
            )
        buf = self._buf
        buf[: self.n_inputs] = inputs
        for mat, bias, any_relu, relu, start, end, vals in self._layers:
            np.dot(mat, buf[:start], out=vals)
            vals += bias
            if any_relu:
                np.maximum(vals, 0.0, out=vals, where=relu)
            buf[start:end] = vals
        return buf[self._out_pos]


def activate(genome: Genome, inputs) -> np.ndarray:
    """Evaluate the genome on one input vector.

    Hidden nodes apply relu(weighted sum + bias); output nodes are identity,
    so action components can be signed. Output values come back in output-id
    order. Disabled connections contribute nothing.
    """
    return FeedForwardNetwork(genome).activate(inputs)


def genome_to_dict(genome: Genome) -> dict:
    return {
        "state_dim": genome.state_dim,
        "action_dim": genome.action_dim,
        "fitness": genome.fitness,
        "nodes": [
            {"id": n.id, "kind": n.kind, "bias": n.bias}
            for n in sorted(genome.nodes.values(), key=lambda n: n.id)
        ],
        "connections": [
            {
                "innovation": c.innovation,
                "from": c.src,
                "to": c.dst,
                "weight": c.weight,
                "enabled": c.enabled,
            }
            for c in sorted(genome.connections.values(), key=lambda c: c.innovation)
        ],
    }


def genome_from_dict(data: dict) -> Genome:
    nodes = {
        int(n["id"]): NodeGene(int(n["id"]), n["kind"], float(n["bias"]))
        for n in data["nodes"]
    }
    connections = {
        int(c["innovation"]): ConnectionGene(
            int(c["innovation"]),
            int(c["from"]),
            int(c["to"]),
            float(c["weight"]),
            bool(c["enabled"]),
        )
        for c in data["connections"]
    }
    fitness = data.get("fitness")
    return Genome(
        nodes=nodes,
        connections=connections,
        state_dim=int(data["state_dim"]),
        action_dim=int(data["action_dim"]),
        fitness=None if fitness is None else float(fitness),
    )


def save_genome(genome: Genome, path) -> None:
    with open(path, "w") as fh:
        json.dump(genome_to_dict(genome), fh, indent=1)
        fh.write("\n")


def load_genome(path) -> Genome:
    with open(path) as fh:
        return genome_from_dict(json.load(fh))
