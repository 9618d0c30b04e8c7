"""The CliNR_{t,r} protocol: teleported sub-circuits with random stabilizer checks.

Register layout (3n+1 qubits, fixed coordinates; software relabeling between
sub-circuits): block one = qubits 0..n-1 (input), block two = n..2n-1,
block three = 2n..3n-1, ancilla = 3n.

Each sub-circuit C_i runs as: prepare n Bell pairs across blocks two/three
(3 noisy operations per pair), apply C_i to block three, measure r random
stabilizers of the resource state sequentially via the ancilla (restart the
resource on any unexpected outcome), then teleport block one into block
three with CX_{i,n+i}+H_i, measure blocks one and two, and apply the n
single-qubit outcome-dependent correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Operation, split_circuit
from .framesim import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_RESTARTS,
    RunStats,
    _STREAM_CHECKS,
    child_rng,
    run_protocol,
)
from .noise import NoiseModel
from .pauli import PauliString, propagate
from .protocol import (
    Phase,
    ProtocolPlan,
    SegmentPlan,
    build_check_spec,
    build_phase,
)

STRATEGIES = ("uniform", "bell")


@dataclass(frozen=True)
class ClinrParams:
    """Protocol knobs: sub-circuit count t, checks per sub-circuit r, strategy."""

    t: int = 1
    r: int = 1
    strategy: str = "uniform"
    batch_size: int = DEFAULT_BATCH_SIZE
    max_restarts: int = DEFAULT_MAX_RESTARTS
    idle_scope: str = "zone"

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be >= 1")


def resource_generators(sub_circuit: Circuit) -> list[PauliString]:
    """Stabilizer generators of (I (x) C_i)|Bell>^n on 2n qubits.

    Coordinates: block two = 0..n-1, block three = n..2n-1.  Generator pairs
    are X_i * prop(X_{n+i}) and Z_i * prop(Z_{n+i}) with prop conjugating
    through C_i acting on block three.
    """
    n = sub_circuit.n
    shifted = Circuit(
        2 * n, [Operation(o.kind, tuple(q + n for q in o.qubits)) for o in sub_circuit.ops]
    )
    gens = []
    for i in range(n):
        for letter in ("X", "Z"):
            half = PauliString.single(2 * n, i, letter)
            image = propagate(shifted, PauliString.single(2 * n, n + i, letter))
            gens.append(half * image)
    return gens


def _f2_rank(vectors: list[int]) -> int:
    rank = 0
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
            rank += 1
    return rank


def _symplectic_vectors(paulis) -> list[int]:
    return [p.x | (p.z << p.n) for p in paulis]


def sample_uniform_checks(
    gens: list[PauliString], r: int, rng: np.random.Generator
) -> list[PauliString]:
    """r independent elements drawn uniformly from the generated group.

    A uniform r x 2n binary coefficient matrix is applied to the generators;
    rank-deficient draws are rejected and resampled, so every returned set is
    F2-independent (and in particular identity-free).
    """
    k = len(gens)
    if r > k:
        raise ValueError(f"cannot draw {r} independent elements from {k} generators")
    if r == 0:
        return []
    while True:
        coeffs = rng.integers(0, 2, size=(r, k))
        vectors = [
            int(sum(int(c) << j for j, c in enumerate(row))) for row in coeffs
        ]
        if _f2_rank(vectors) < r:
            continue
        out = []
        for row in coeffs:
            acc = PauliString.identity(gens[0].n)
            for j, c in enumerate(row):
                if c:
                    acc = acc * gens[j]
            out.append(acc)
        return out


def bell_check_pool(sub_circuit: Circuit) -> list[PauliString]:
    """The 3n propagated images of the weight-2 Bell stabilizers XX, ZZ, -YY."""
    n = sub_circuit.n
    gens = resource_generators(sub_circuit)
    pool = []
    for i in range(n):
        gx, gz = gens[2 * i], gens[2 * i + 1]
        pool.extend([gx, gz, gx * gz])
    return pool


def sample_bell_checks(
    sub_circuit: Circuit, r: int, rng: np.random.Generator
) -> list[PauliString]:
    """r distinct pool elements, uniform subject to F2 independence.

    Every element has weight at most n+1: one Bell-pair letter on block two
    plus an image confined to block three.
    """
    n = sub_circuit.n
    if r > 2 * n:
        raise ValueError("r cannot exceed 2n")
    if r == 0:
        return []
    pool = bell_check_pool(sub_circuit)
    while True:
        idx = rng.choice(len(pool), size=r, replace=False)
        chosen = [pool[int(i)] for i in idx]
        if _f2_rank(_symplectic_vectors(chosen)) == r:
            return chosen


def check_subcircuit(pauli: PauliString, ancilla: int) -> list[Operation]:
    """Operation list measuring one stabilizer via the ancilla (weight+3 ops)."""
    from .protocol import check_measurement_ops

    return list(check_measurement_ops(pauli, ancilla))


def q_correction(sub_circuit: Circuit, outcomes) -> PauliString:
    """Teleportation correction Q on block three from the 2n outcome bits.

    Bits 0..n-1 are block-one outcomes (gating propagated-Z factors), bits
    n..2n-1 block-two outcomes (gating propagated-X factors).
    """
    n = sub_circuit.n
    outcomes = list(outcomes)
    if len(outcomes) != 2 * n:
        raise ValueError(f"need 2n={2 * n} outcome bits, got {len(outcomes)}")
    acc = PauliString.identity(n)
    for i in range(n):
        if outcomes[n + i]:
            acc = acc * propagate(sub_circuit, PauliString.single(n, i, "X"))
        if outcomes[i]:
            acc = acc * propagate(sub_circuit, PauliString.single(n, i, "Z"))
    return acc


@dataclass(frozen=True)
class ClinrPlanMaker:
    """Callable plan factory: draws fresh checks per batch, keyed by batch index."""

    circuit: Circuit
    params: ClinrParams
    seed: int

    def __call__(self, batch_idx: int) -> ProtocolPlan:
        return build_clinr_plan(
            self.circuit,
            self.params,
            check_rng=child_rng(self.seed, _STREAM_CHECKS, batch_idx),
        )


def build_clinr_plan(
    circuit: Circuit, params: ClinrParams, check_rng: np.random.Generator
) -> ProtocolPlan:
    if not circuit.is_clifford():
        raise ValueError("CliNR applies to Clifford circuits only")
    n = circuit.n
    register = 3 * n + 1
    ancilla = 3 * n
    scope = params.idle_scope
    segments = []
    for sub in split_circuit(circuit, params.t):
        bell_ops = []
        for i in range(n):
            bell_ops.append(Operation("P+", (n + i,)))
            bell_ops.append(Operation("P0", (2 * n + i,)))
            bell_ops.append(Operation("CX", (n + i, 2 * n + i)))
        apply_ops = [
            Operation(o.kind, tuple(q + 2 * n for q in o.qubits)) for o in sub.ops
        ]
        # Bell preparation and sub-circuit application are separate protocol
        # stages: while C_i runs on block three, block two is parked.
        prep_phases = (
            build_phase(register, bell_ops, scope),
            build_phase(register, apply_ops, scope),
        )

        if params.strategy == "uniform":
            checks_2n = sample_uniform_checks(
                resource_generators(sub), params.r, check_rng
            )
        else:
            checks_2n = sample_bell_checks(sub, params.r, check_rng)
        block23 = tuple(range(n, 3 * n))
        checks = tuple(
            build_check_spec(register, p.embedded(register, block23), ancilla, scope)
            for p in checks_2n
        )

        finish_ops = []
        for i in range(n):
            finish_ops.append(Operation("CX", (i, n + i)))
            finish_ops.append(Operation("H", (i,)))
        measured = tuple(range(2 * n))
        for q in measured:
            finish_ops.append(Operation("M", (q,)))
        finish_phase = build_phase(register, finish_ops, scope)

        block3 = tuple(range(2 * n, 3 * n))
        corr_gens = []
        for q in measured:
            if q < n:  # block-one outcome gates the propagated-Z factor
                img = propagate(sub, PauliString.single(n, q, "Z"))
            else:  # block-two outcome gates the propagated-X factor
                img = propagate(sub, PauliString.single(n, q - n, "X"))
            corr_gens.append(img.embedded(register, block3))
        corr_phase = build_phase(
            register, [Operation("X", (q,)) for q in block3], scope
        )

        segments.append(
            SegmentPlan(
                prep_phases=prep_phases,
                checks=checks,
                finish_phase=finish_phase,
                measured=measured,
                corr_gens=tuple(corr_gens),
                corr_phase=corr_phase,
                output_block=block3,
                logical_ops=sub.ops,
            )
        )
    return ProtocolPlan(n=n, register=register, segments=tuple(segments))


def run_clinr(
    circuit: Circuit,
    params: ClinrParams,
    model: NoiseModel,
    shots: int,
    seed: int,
    engine: str = "vector",
) -> RunStats:
    """Monte-Carlo estimate of the CliNR implementation of ``circuit``."""
    maker = ClinrPlanMaker(circuit, params, seed)
    return run_protocol(
        maker,
        model,
        shots,
        seed,
        batch_size=params.batch_size,
        max_restarts=params.max_restarts,
        engine=engine,
    )
