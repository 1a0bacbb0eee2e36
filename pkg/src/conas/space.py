"""DAG cell search space: encoder bits, edges, connectivity, and counting.

Every possible (predecessor, operation) edge into every intermediate node of
every cell kind carries one encoder bit; +1 activates the edge.  The bit
layout is frozen: kind-major, then intermediate node ascending, then
predecessor ascending, then operation ascending.  Node indexing is global:
input nodes come first, then intermediates; the output node carries no bits
(it concatenates the intermediates structurally).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .validation import check_encoding

DARTS_EDGES_PER_CELL = 14  # fixed edge count of a 7-node DARTS cell


@dataclass(frozen=True)
class CellSpec:
    """Shape of the cell DAG: node count, operation labels, and cell kinds.

    nodes counts inputs, intermediates, and the single output node; CNN cells
    use two inputs, RNN cells one (set inputs accordingly).
    """

    nodes: int
    operations: tuple[str, ...]
    kinds: tuple[str, ...] = ("normal", "reduce")
    inputs: int = 2

    def __post_init__(self):
        object.__setattr__(self, "operations", tuple(str(o) for o in self.operations))
        object.__setattr__(self, "kinds", tuple(str(k) for k in self.kinds))
        if not self.operations:
            raise ValueError("at least one operation is required")
        if not self.kinds:
            raise ValueError("at least one cell kind is required")
        if len(set(self.kinds)) != len(self.kinds):
            raise ValueError("cell kinds must be distinct")
        if self.inputs < 1:
            raise ValueError("at least one input node is required")
        if self.nodes < self.inputs + 2:
            raise ValueError(
                f"need at least {self.inputs + 2} nodes "
                f"({self.inputs} inputs, one intermediate, one output)"
            )

    @property
    def intermediates(self) -> int:
        return self.nodes - self.inputs - 1

    def predecessors(self, node: int) -> int:
        """Number of possible predecessors of intermediate node (inputs plus earlier intermediates)."""
        if not 0 <= node < self.intermediates:
            raise ValueError(f"intermediate node {node} out of range")
        return self.inputs + node

    @property
    def edges_per_kind(self) -> int:
        return len(self.operations) * sum(self.inputs + j for j in range(self.intermediates))

    @property
    def edge_count(self) -> int:
        """Total encoder length across all cell kinds."""
        return len(self.kinds) * self.edges_per_kind

    def to_json_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "inputs": self.inputs,
            "operations": list(self.operations),
            "kinds": list(self.kinds),
            "edges": self.edge_count,
        }


def edge_count(spec: CellSpec) -> int:
    return spec.edge_count


@dataclass(frozen=True, order=True)
class EdgeRef:
    """One choice-block edge: (cell kind, target intermediate, predecessor node, operation)."""

    kind: int
    node: int
    predecessor: int
    op: int


def index_to_edge(spec: CellSpec, i: int) -> EdgeRef:
    if not 0 <= i < spec.edge_count:
        raise ValueError(f"bit index {i} out of range for {spec.edge_count} edges")
    kind, rem = divmod(i, spec.edges_per_kind)
    ops = len(spec.operations)
    for node in range(spec.intermediates):
        block = spec.predecessors(node) * ops
        if rem < block:
            predecessor, op = divmod(rem, ops)
            return EdgeRef(kind, node, predecessor, op)
        rem -= block
    raise AssertionError("unreachable: index within edge_count must land in a block")


def edge_to_index(spec: CellSpec, edge: EdgeRef) -> int:
    if not 0 <= edge.kind < len(spec.kinds):
        raise ValueError(f"kind {edge.kind} out of range")
    if not 0 <= edge.node < spec.intermediates:
        raise ValueError(f"intermediate node {edge.node} out of range")
    if not 0 <= edge.predecessor < spec.predecessors(edge.node):
        raise ValueError(f"predecessor {edge.predecessor} invalid for node {edge.node}")
    if not 0 <= edge.op < len(spec.operations):
        raise ValueError(f"operation {edge.op} out of range")
    ops = len(spec.operations)
    offset = edge.kind * spec.edges_per_kind
    offset += ops * sum(spec.predecessors(t) for t in range(edge.node))
    return offset + edge.predecessor * ops + edge.op


@dataclass(frozen=True)
class Cell:
    """A decoded sub-graph: active edges grouped by cell kind, in bit order."""

    spec: CellSpec
    edges: tuple[tuple[EdgeRef, ...], ...]

    def encode(self) -> np.ndarray:
        alpha = np.full(self.spec.edge_count, -1, dtype=np.int8)
        for kind_edges in self.edges:
            for edge in kind_edges:
                alpha[edge_to_index(self.spec, edge)] = 1
        return alpha

    def active_edge_count(self) -> int:
        return sum(len(kind_edges) for kind_edges in self.edges)

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "edges": [
                [self.spec.kinds[e.kind], e.node, e.predecessor, self.spec.operations[e.op]]
                for kind_edges in self.edges
                for e in kind_edges
            ],
        }


def decode_cell(spec: CellSpec, alpha) -> Cell:
    """Cell whose active edges are exactly the +1 bits of the encoder."""
    alpha = check_encoding(alpha, spec.edge_count)
    per_kind: list[list[EdgeRef]] = [[] for _ in spec.kinds]
    for i in np.flatnonzero(alpha == 1):
        edge = index_to_edge(spec, int(i))
        per_kind[edge.kind].append(edge)
    return Cell(spec, tuple(tuple(edges) for edges in per_kind))


def validate_connectivity(cell: Cell) -> list[tuple[int, int]]:
    """(kind, intermediate) pairs lacking any active incoming edge; empty means connected."""
    spec = cell.spec
    have = {(e.kind, e.node) for kind_edges in cell.edges for e in kind_edges}
    return [
        (kind, node)
        for kind in range(len(spec.kinds))
        for node in range(spec.intermediates)
        if (kind, node) not in have
    ]


def repair_connectivity(alpha, spec: CellSpec, seed) -> np.ndarray:
    """Activate one random incoming edge for every disconnected intermediate node.

    Nodes are scanned kind-major then node-ascending; already connected nodes
    are untouched, so the repair is idempotent and never deactivates an edge.
    """
    alpha = check_encoding(alpha, spec.edge_count).copy()
    rng = np.random.default_rng(seed)
    ops = len(spec.operations)
    for kind in range(len(spec.kinds)):
        for node in range(spec.intermediates):
            base = kind * spec.edges_per_kind
            base += ops * sum(spec.predecessors(t) for t in range(node))
            count = spec.predecessors(node) * ops
            block = alpha[base : base + count]
            if not (block == 1).any():
                block[int(rng.integers(count))] = 1
    return alpha


def count_configurations(edges: int, active: int) -> int:
    """Exact binomial coefficient C(edges, active)."""
    if edges < 0 or not 0 <= active <= edges:
        raise ValueError(f"need 0 <= active <= edges, got active={active}, edges={edges}")
    return math.comb(edges, active)


def darts_configuration_count(operations: int) -> int:
    """Configurations of a pair of 7-node DARTS cells with the given operation count."""
    if operations < 1:
        raise ValueError("at least one operation is required")
    return ((operations + 1) ** DARTS_EDGES_PER_CELL) ** 2


def format_scientific(value: int, sig_figs: int = 2) -> str:
    """Scientific rendering of an integer at the given number of significant figures."""
    if sig_figs < 1:
        raise ValueError("sig_figs must be at least 1")
    d = Decimal(int(value))
    if d == 0:
        return "0e0"
    sign = "-" if d < 0 else ""
    d = abs(d)
    exponent = d.adjusted()
    quantum = Decimal(1).scaleb(1 - sig_figs)
    mantissa = d.scaleb(-exponent).quantize(quantum, rounding=ROUND_HALF_EVEN)
    if mantissa >= 10:
        mantissa = (mantissa / 10).quantize(quantum, rounding=ROUND_HALF_EVEN)
        exponent += 1
    return f"{sign}{mantissa}e{exponent}"
