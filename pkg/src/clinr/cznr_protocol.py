"""CZ noise reduction: graph-state injection with stabilizer checks.

A CZ-only circuit is a graph (edges = CZ gates mod 2).  Register layout
(2n+1 qubits): block one = 0..n-1 (input), block two = n..2n-1 (graph-state
ancillas), check ancilla = 2n.  Per sub-sequence: prepare |+>^n on block two,
apply the sub-sequence's CZ gates there, measure r stabilizers drawn
uniformly from the graph-state group (restart on unexpected outcomes), apply
CX controlled on block two targeting block one, measure block one, and apply
the outcome-dependent injection correction on block two, which becomes the
output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Operation, split_circuit
from .framesim import (
    RunStats,
    _STREAM_CHECKS,
    child_rng,
    run_protocol,
)
from .clinr_protocol import ClinrParams, _f2_rank, _symplectic_vectors
from .noise import NoiseModel
from .pauli import PauliString
from .protocol import (
    ProtocolPlan,
    SegmentPlan,
    build_check_spec,
    build_phase,
)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph: n vertices, edges as sorted (u, v) pairs."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v}) for {self.n} vertices")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        canon = frozenset((min(u, v), max(u, v)) for u, v in edges)
        return cls(n, canon)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)


def circuit_to_graph(circuit: Circuit) -> Graph:
    """Reduce a CZ-only circuit to its graph (CZ is self-inverse, so mod 2)."""
    counts: dict[tuple[int, int], int] = {}
    for o in circuit.ops:
        if o.kind != "CZ":
            raise ValueError(f"CZ-only circuit required, found {o.kind}")
        key = (min(o.qubits), max(o.qubits))
        counts[key] = counts.get(key, 0) + 1
    edges = {e for e, c in counts.items() if c % 2}
    return Graph.from_edges(circuit.n, edges)


def graph_to_circuit(graph: Graph) -> Circuit:
    """CZ sequence for a graph, edges in lexicographic order (they commute)."""
    return Circuit(graph.n, tuple(Operation("CZ", e) for e in graph.sorted_edges()))


def graph_state_stabilizers(graph: Graph) -> list[PauliString]:
    """Generators X_v prod_{u in N(v)} Z_u of the graph state, all +1."""
    out = []
    for v in range(graph.n):
        p = PauliString.single(graph.n, v, "X")
        for u in graph.neighbors(v):
            p = p * PauliString.single(graph.n, u, "Z")
        out.append(p)
    return out


def injection_correction(graph: Graph, outcomes) -> PauliString:
    """Product over fired outcomes of X_{n+i} prod_{j in N(i)} Z_{n+j}.

    Returned on n qubits indexed as block two (qubit i = ancilla n+i)."""
    outcomes = list(outcomes)
    if len(outcomes) != graph.n:
        raise ValueError(f"need {graph.n} outcome bits, got {len(outcomes)}")
    gens = graph_state_stabilizers(graph)
    acc = PauliString.identity(graph.n)
    for i, bit in enumerate(outcomes):
        if bit:
            acc = acc * gens[i]
    return acc


def sample_graph_checks(
    graph: Graph, r: int, rng: np.random.Generator
) -> list[PauliString]:
    """r independent elements uniform over the 2^n graph-state group."""
    gens = graph_state_stabilizers(graph)
    n = graph.n
    if r > n:
        raise ValueError(f"cannot draw {r} independent elements from {n} generators")
    if r == 0:
        return []
    while True:
        coeffs = rng.integers(0, 2, size=(r, n))
        vectors = [int(sum(int(c) << j for j, c in enumerate(row))) for row in coeffs]
        if _f2_rank(vectors) < r:
            continue
        out = []
        for row in coeffs:
            acc = PauliString.identity(n)
            for j, c in enumerate(row):
                if c:
                    acc = acc * gens[j]
            out.append(acc)
        if _f2_rank(_symplectic_vectors(out)) != r:
            continue
        return out


def parse_graph(text: str) -> Graph:
    """Edge-list format: header ``graph <n>`` then ``edge u v`` lines."""
    n = None
    edges = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "graph" or len(fields) != 2:
                raise ValueError(f"line {line_no}: expected header 'graph <n>'")
            n = int(fields[1])
            continue
        if fields[0] != "edge" or len(fields) != 3:
            raise ValueError(f"line {line_no}: expected 'edge u v'")
        u, v = int(fields[1]), int(fields[2])
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"line {line_no}: bad edge ({u}, {v})")
        edges.append((u, v))
    if n is None:
        raise ValueError("missing 'graph <n>' header")
    return Graph.from_edges(n, edges)


def serialize_graph(graph: Graph) -> str:
    lines = [f"graph {graph.n}"]
    for u, v in graph.sorted_edges():
        lines.append(f"edge {u} {v}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CznrPlanMaker:
    circuit: Circuit
    params: ClinrParams
    seed: int

    def __call__(self, batch_idx: int) -> ProtocolPlan:
        return build_cznr_plan(
            self.circuit,
            self.params,
            check_rng=child_rng(self.seed, _STREAM_CHECKS, batch_idx),
        )


def build_cznr_plan(
    circuit: Circuit, params: ClinrParams, check_rng: np.random.Generator
) -> ProtocolPlan:
    if any(o.kind != "CZ" for o in circuit.ops):
        raise ValueError("CZNR applies to CZ-only circuits")
    if params.strategy != "uniform":
        raise ValueError("CZNR has only the uniform check strategy")
    n = circuit.n
    register = 2 * n + 1
    ancilla = 2 * n
    scope = params.idle_scope
    block2 = tuple(range(n, 2 * n))
    segments = []
    for sub in split_circuit(circuit, params.t):
        graph = circuit_to_graph(sub)
        plus_ops = [Operation("P+", (n + i,)) for i in range(n)]
        cz_ops = [Operation("CZ", tuple(q + n for q in o.qubits)) for o in sub.ops]
        prep_phases = (
            build_phase(register, plus_ops, scope),
            build_phase(register, cz_ops, scope),
        )

        checks_n = sample_graph_checks(graph, params.r, check_rng)
        checks = tuple(
            build_check_spec(register, p.embedded(register, block2), ancilla, scope)
            for p in checks_n
        )

        finish_ops = [Operation("CX", (n + i, i)) for i in range(n)]
        measured = tuple(range(n))
        for q in measured:
            finish_ops.append(Operation("M", (q,)))
        finish_phase = build_phase(register, finish_ops, scope)

        gens = graph_state_stabilizers(graph)
        corr_gens = tuple(g.embedded(register, block2) for g in gens)
        corr_phase = build_phase(
            register, [Operation("X", (q,)) for q in block2], scope
        )

        segments.append(
            SegmentPlan(
                prep_phases=prep_phases,
                checks=checks,
                finish_phase=finish_phase,
                measured=measured,
                corr_gens=corr_gens,
                corr_phase=corr_phase,
                output_block=block2,
                logical_ops=sub.ops,
            )
        )
    return ProtocolPlan(n=n, register=register, segments=tuple(segments))


def run_cznr(
    circuit: Circuit,
    params: ClinrParams,
    model: NoiseModel,
    shots: int,
    seed: int,
    engine: str = "vector",
) -> RunStats:
    """Monte-Carlo estimate of the CZNR implementation of a CZ sequence."""
    maker = CznrPlanMaker(circuit, params, seed)
    return run_protocol(
        maker,
        model,
        shots,
        seed,
        batch_size=params.batch_size,
        max_restarts=params.max_restarts,
        engine=engine,
    )
