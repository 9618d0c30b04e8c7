"""Shared protocol plan IR consumed by the frame engines and the tableau oracle.

A plan describes one teleportation-based implementation run in fixed register
coordinates: the input state always occupies qubits 0..n-1 at segment start,
each segment prepares a resource, measures its checks (restarting the
resource on any unexpected outcome), teleports, measures, and applies an
outcome-dependent Pauli correction; the segment output block is then
relabeled back onto qubits 0..n-1 in software.

Idle noise is attached per ASAP layer within a phase's *zone*:

- ``idle_scope="zone"`` (default): the zone is the set of qubits the phase's
  operations touch.  Qubits outside the zone are parked and suffer no idle
  noise while the phase runs; this models resource preparation and checking
  happening away from the stored input.
- ``idle_scope="register"``: every register qubit not touched by a layer is
  idle, the most pessimistic reading.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Operation, schedule_layers
from .pauli import PauliString

IDLE_SCOPES = ("zone", "register")


@dataclass(frozen=True)
class Phase:
    """An op list with precomputed layers and per-layer idle qubits."""

    ops: tuple[Operation, ...]
    layers: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def size(self) -> int:
        return len(self.ops)

    def support(self) -> set[int]:
        out: set[int] = set()
        for o in self.ops:
            out.update(o.qubits)
        return out


def build_phase(register: int, ops, idle_scope: str = "zone", zone=None) -> Phase:
    """Layer the ops and attach idle qubits per layer according to the scope."""
    if idle_scope not in IDLE_SCOPES:
        raise ValueError(f"idle_scope must be one of {IDLE_SCOPES}")
    ops = tuple(ops)
    if not ops:
        return Phase(ops, ())
    circuit = Circuit(register, ops)
    layer_indices = schedule_layers(circuit)
    if zone is None:
        zone = circuit.touched_qubits() if idle_scope == "zone" else set(range(register))
    zone = sorted(zone)
    layers = []
    for indices in layer_indices:
        touched = {q for i in indices for q in ops[i].qubits}
        idle = tuple(q for q in zone if q not in touched)
        layers.append((tuple(indices), idle))
    return Phase(ops, tuple(layers))


@dataclass(frozen=True)
class CheckSpec:
    """One sequential stabilizer measurement: its circuit, Pauli and expected bit."""

    pauli: PauliString  # register-wide, signed
    expected: int  # noiseless outcome bit (1 iff the stabilizer sign is -1)
    phase: Phase


@dataclass(frozen=True)
class SegmentPlan:
    prep_phases: tuple[Phase, ...]  # resource preparation stages, e.g. Bell prep then C_i
    checks: tuple[CheckSpec, ...]
    finish_phase: Phase  # teleport unitaries + outcome measurements
    measured: tuple[int, ...]  # qubits measured in finish_phase, outcome order
    corr_gens: tuple[PauliString, ...]  # per measured qubit: fold-in Pauli (register-wide)
    corr_phase: Phase  # the noisy single-qubit correction slots
    output_block: tuple[int, ...]
    logical_ops: tuple[Operation, ...] = ()  # net logical action, block-one coords

    @property
    def prep_ops(self) -> int:
        return sum(p.size for p in self.prep_phases)

    @property
    def attempt_ops(self) -> int:
        return self.prep_ops + sum(c.phase.size for c in self.checks)

    @property
    def finish_ops(self) -> int:
        return self.finish_phase.size + self.corr_phase.size

    def ops_until_check(self, check_idx: int) -> int:
        """Ops executed when check ``check_idx`` is the first to fail."""
        return self.prep_ops + sum(
            self.checks[i].phase.size for i in range(check_idx + 1)
        )


@dataclass(frozen=True)
class ProtocolPlan:
    n: int  # logical width
    register: int
    segments: tuple[SegmentPlan, ...]

    def max_qubits(self) -> int:
        touched: set[int] = set(range(self.n))
        for seg in self.segments:
            for ph in seg.prep_phases:
                touched |= ph.support()
            for c in seg.checks:
                touched |= c.phase.support()
            touched |= seg.finish_phase.support()
            touched |= seg.corr_phase.support()
        return max(touched) + 1


def check_measurement_ops(pauli: PauliString, ancilla: int) -> tuple[Operation, ...]:
    """Sequential measurement of a Pauli via one ancilla.

    |+> prep on the ancilla, one controlled-letter per support qubit, then H
    and measure: weight(P) + 3 operations.
    """
    if pauli.weight == 0:
        raise ValueError("cannot measure an identity check")
    ops = [Operation("P+", (ancilla,))]
    for q in pauli.support():
        ops.append(Operation("C" + pauli.letter(q), (ancilla, q)))
    ops.append(Operation("H", (ancilla,)))
    ops.append(Operation("M", (ancilla,)))
    return tuple(ops)


def build_check_spec(
    register: int, pauli: PauliString, ancilla: int, idle_scope: str = "zone"
) -> CheckSpec:
    ops = check_measurement_ops(pauli, ancilla)
    phase = build_phase(register, ops, idle_scope)
    return CheckSpec(pauli=pauli, expected=0 if pauli.sign > 0 else 1, phase=phase)


def direct_plan(circuit: Circuit, idle_scope: str = "zone") -> ProtocolPlan:
    """The trivial implementation C' = C as a one-segment plan."""
    n = circuit.n
    phase = build_phase(n, circuit.ops, idle_scope, zone=set(range(n)))
    seg = SegmentPlan(
        prep_phases=(phase,),
        checks=(),
        finish_phase=Phase((), ()),
        measured=(),
        corr_gens=(),
        corr_phase=Phase((), ()),
        output_block=tuple(range(n)),
        logical_ops=circuit.ops,
    )
    return ProtocolPlan(n=n, register=n, segments=(seg,))
