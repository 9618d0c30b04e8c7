"""Independent tableau-based protocol executor.

This is the oracle side of the dual-route check: it runs protocol plans as
literal quantum circuits on a stabilizer tableau, inserting sampled faults as
explicit Pauli gates and deciding restarts from actual measurement outcomes,
with no Pauli-frame shortcuts.  Teleportation outcomes are genuinely random
here and corrections are applied from the reported bits, exactly as hardware
would.

Failure is operator-level: the protocol runs on the register half of n Bell
pairs (a Choi input), and the run fails iff the joint (reference, output)
state differs from the ideal one, which detects every non-identity output
error exactly.  A stabilizer-input variant is provided for the noiseless
construction-equivalence checks.

For Monte-Carlo scale the executor can skip segments whose sampled fault
pattern is empty (``shortcut=True``): a fault-free segment acts as the ideal
sub-circuit, which the literal noiseless mode verifies exactly elsewhere in
the test suite.  Fault sampling is identical in both modes, so the shortcut
changes nothing statistically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Operation
from .framesim import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_RESTARTS,
    RunStats,
    _Accumulator,
    _batch_sizes,
    child_rng,
)
from .noise import NoiseModel
from .pauli import PauliString
from .protocol import Phase, ProtocolPlan, SegmentPlan
from .tableau import StabilizerTableau, states_equal_on, subsystem_stabilizers

_STREAM_ORACLE = 7

_LETTERS_1Q = ("X", "Y", "Z")
import itertools as _it

_LETTERS_2Q = tuple(p for p in _it.product("IXYZ", repeat=2) if p != ("I", "I"))


class _NoisyPhaseRunner:
    """Executes one phase on the tableau, injecting a pre-drawn fault pattern.

    ``noise_only`` runs the phase as fault slots without applying the ops
    themselves; the correction phase uses it because its actual Pauli letters
    are computed from the reported outcomes and applied separately.
    """

    def __init__(
        self, sim: "_TableauShot", phase: Phase, op_mask, idle_mask, noise_only=False
    ):
        self.sim = sim
        self.phase = phase
        self.op_mask = op_mask
        self.idle_mask = idle_mask
        self.noise_only = noise_only

    def run(self, on_measure=None):
        sim = self.sim
        idle_cursor = 0
        for op_idxs, idle in self.phase.layers:
            for i in op_idxs:
                o = self.phase.ops[i]
                if o.kind == "M":
                    out = sim.tab.measure(sim.pos[o.qubits[0]], sim.rng)
                    if self.op_mask[i]:
                        out ^= 1
                    if on_measure is not None:
                        on_measure(o.qubits[0], out)
                else:
                    if not self.noise_only:
                        sim.apply_mapped(o)
                    if self.op_mask[i]:
                        sim.inject_fault(o)
            for q in idle:
                if self.idle_mask[idle_cursor]:
                    sim.inject_idle(q)
                idle_cursor += 1


class _TableauShot:
    def __init__(self, plan: ProtocolPlan, model: NoiseModel, rng, n_ref: int):
        self.plan = plan
        self.model = model
        self.rng = rng
        self.total = plan.register + n_ref
        self.tab = StabilizerTableau(self.total)
        self.pos = list(range(plan.register))

    def apply_mapped(self, o: Operation):
        pos = self.pos
        if len(o.qubits) == 2:
            self.tab.apply_kind(o.kind, pos[o.qubits[0]], pos[o.qubits[1]], self.rng)
        else:
            self.tab.apply_kind(o.kind, pos[o.qubits[0]], rng=self.rng)

    def apply_logical(self, ops):
        for o in ops:
            self.apply_mapped(o)

    def inject_fault(self, o: Operation):
        rng, tab = self.rng, self.tab
        if o.is_two_qubit():
            lc, lt = _LETTERS_2Q[int(rng.integers(15))]
            for letter, q in ((lc, o.qubits[0]), (lt, o.qubits[1])):
                if letter != "I":
                    tab.apply_kind(letter, self.pos[q])
        else:
            letter = _LETTERS_1Q[int(rng.integers(3))]
            tab.apply_kind(letter, self.pos[o.qubits[0]])

    def inject_idle(self, q: int):
        letter = _LETTERS_1Q[int(self.rng.integers(3))]
        self.tab.apply_kind(letter, self.pos[q])

    def relabel(self, seg: SegmentPlan):
        n = self.plan.n
        new_front = [self.pos[q] for q in seg.output_block]
        out_set = set(seg.output_block)
        rest = [self.pos[q] for q in range(self.plan.register) if q not in out_set]
        self.pos = new_front + rest


@dataclass
class OracleShotRecord:
    failure: bool
    ops: int
    restarts_by_segment: tuple[int, ...]
    aborted: bool


class _SegmentNoise:
    """Concatenated fault-location rates for one segment, drawn in two calls."""

    def __init__(self, seg: SegmentPlan, model: NoiseModel):
        self.attempt_phases = list(seg.prep_phases) + [c.phase for c in seg.checks]
        self.n_prep = len(seg.prep_phases)
        self.finish_phases = [seg.finish_phase, seg.corr_phase]

        def concat(phases):
            rates = []
            idle_counts = []
            op_slices = []
            idle_slices = []
            pos = 0
            for ph in phases:
                op_slices.append((pos, pos + len(ph.ops)))
                rates.extend(model.rate_for(o) for o in ph.ops)
                pos += len(ph.ops)
            ipos = 0
            for ph in phases:
                count = sum(len(idle) for _, idle in ph.layers)
                idle_slices.append((ipos, ipos + count))
                idle_counts.append(count)
                ipos += count
            return np.array(rates, dtype=float), op_slices, sum(idle_counts), idle_slices

        (self.attempt_rates, self.attempt_op_slices,
         self.attempt_idle_total, self.attempt_idle_slices) = concat(self.attempt_phases)
        (self.finish_rates, self.finish_op_slices,
         self.finish_idle_total, self.finish_idle_slices) = concat(self.finish_phases)

    def draw(self, which: str, model: NoiseModel, rng):
        """One batched draw; returns (dirty, op_mask, idle_mask)."""
        if which == "attempt":
            rates, idle_total = self.attempt_rates, self.attempt_idle_total
        else:
            rates, idle_total = self.finish_rates, self.finish_idle_total
        op_mask = rng.random(len(rates)) < rates if len(rates) else _EMPTY_MASK
        if model.p_idle > 0 and idle_total:
            idle_mask = rng.random(idle_total) < model.p_idle
        else:
            idle_mask = np.zeros(idle_total, dtype=bool)
        dirty = bool(op_mask.any() or (idle_mask.any() if idle_total else False))
        return dirty, op_mask, idle_mask

    def phase_patterns(self, which: str, op_mask, idle_mask):
        if which == "attempt":
            phases, op_sl, idle_sl = (
                self.attempt_phases, self.attempt_op_slices, self.attempt_idle_slices
            )
        else:
            phases, op_sl, idle_sl = (
                self.finish_phases, self.finish_op_slices, self.finish_idle_slices
            )
        return [
            (ph, op_mask[a:b], idle_mask[c:d])
            for ph, (a, b), (c, d) in zip(phases, op_sl, idle_sl)
        ]


_EMPTY_MASK = np.zeros(0, dtype=bool)


class _PlanNoise:
    """Per-plan cache of fault-location rate vectors."""

    def __init__(self, plan: ProtocolPlan, model: NoiseModel):
        self.model = model
        self.segments = [_SegmentNoise(seg, model) for seg in plan.segments]


def run_oracle_shot(
    plan: ProtocolPlan,
    model: NoiseModel,
    rng: np.random.Generator,
    noise_cache: _PlanNoise,
    input_ops: tuple[Operation, ...] | None,
    reference_gens_logical: tuple[PauliString, ...],
    n_ref: int,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    shortcut: bool = True,
) -> OracleShotRecord:
    """One literal protocol execution; see module docstring.

    ``input_ops`` is a noiseless preparation applied to block one before the
    protocol (None selects the Choi input across ``n_ref`` reference qubits).
    ``reference_gens_logical`` are the target-state stabilizers on the
    comparison block in logical coordinates (reference qubits first, then the
    output block).
    """
    n = plan.n
    model_rates = noise_cache
    sim: _TableauShot | None = None

    def materialize():
        nonlocal sim
        if sim is not None:
            return
        sim = _TableauShot(plan, model, rng, n_ref)
        if input_ops is None:
            for i in range(n):
                r = plan.register + i
                sim.tab.apply(Operation("H", (r,)))
                sim.tab.apply(Operation("CX", (r, i)))
        else:
            for o in input_ops:
                sim.tab.apply(Operation(o.kind, o.qubits), sim.rng)
        for ops in pending_logical:
            sim.apply_logical(ops)
        pending_logical.clear()

    pending_logical: list[tuple[Operation, ...]] = []
    ops_count = 0
    restarts = [0] * len(plan.segments)
    aborted = False
    any_literal = False

    for si, seg in enumerate(plan.segments):
        seg_noise = model_rates.segments[si]
        n_prep = seg_noise.n_prep
        attempt = 0
        passed_clean = False
        while True:
            attempt += 1
            if attempt > max_restarts:
                aborted = True
                break
            dirty, op_mask, idle_mask = seg_noise.draw("attempt", model, rng)
            if not dirty and shortcut and sim is None:
                # fault-free attempt on fresh resource: passes all checks
                ops_count += seg.attempt_ops
                passed_clean = True
                break
            materialize()
            any_literal = True
            failed_at = None
            patterns = seg_noise.phase_patterns("attempt", op_mask, idle_mask)
            for entry in patterns[:n_prep]:
                _NoisyPhaseRunner(sim, *entry).run()
            for ci, (ph, om, im) in enumerate(patterns[n_prep:]):
                hit = []
                _NoisyPhaseRunner(sim, ph, om, im).run(
                    on_measure=lambda q, out: hit.append(out)
                )
                if hit[-1] != seg.checks[ci].expected:
                    failed_at = ci
                    break
            if failed_at is None:
                ops_count += seg.attempt_ops
                break
            ops_count += seg.ops_until_check(failed_at)
            restarts[si] += 1
        if aborted:
            break

        fin_dirty, fin_op, fin_idle = seg_noise.draw("finish", model, rng)
        if passed_clean and not fin_dirty and shortcut and sim is None:
            pending_logical.append(seg.logical_ops)
            ops_count += seg.finish_ops
            continue
        materialize()
        any_literal = True
        if passed_clean:
            # resource was fault-free but we still must execute it literally
            zeros_op = np.zeros(len(seg_noise.attempt_rates), dtype=bool)
            zeros_idle = np.zeros(seg_noise.attempt_idle_total, dtype=bool)
            for ph, om, im in seg_noise.phase_patterns("attempt", zeros_op, zeros_idle):
                _NoisyPhaseRunner(sim, ph, om, im).run(on_measure=lambda q, o: None)
        outcomes: dict[int, int] = {}
        f_pat, c_pat = seg_noise.phase_patterns("finish", fin_op, fin_idle)
        _NoisyPhaseRunner(sim, *f_pat).run(on_measure=outcomes.__setitem__)
        correction = PauliString.identity(plan.register)
        for k, q in enumerate(seg.measured):
            if outcomes[q]:
                correction = correction * seg.corr_gens[k]
        for q in range(plan.register):
            letter = correction.letter(q)
            if letter != "I":
                sim.tab.apply_kind(letter, sim.pos[q])
        _NoisyPhaseRunner(sim, *c_pat, noise_only=True).run()
        ops_count += seg.finish_ops
        sim.relabel(seg)

    if aborted:
        return OracleShotRecord(False, ops_count, tuple(restarts), True)
    if sim is None or not any_literal:
        return OracleShotRecord(False, ops_count, tuple(restarts), False)
    # compare the (reference, output) state against the ideal one
    cmp_phys = tuple(range(plan.register, plan.register + n_ref)) + tuple(
        sim.pos[q] for q in range(n)
    )
    failure = False
    for g in reference_gens_logical:
        embedded = g.embedded(sim.total, cmp_phys)
        if sim.tab.expectation(embedded) != 1:
            failure = True
            break
    return OracleShotRecord(failure, ops_count, tuple(restarts), False)


def build_reference_gens(
    plan: ProtocolPlan, input_ops: tuple[Operation, ...] | None, n_ref: int
) -> tuple[PauliString, ...]:
    """Stabilizers of the ideal output on (reference qubits, output block)."""
    n = plan.n
    total = plan.register + n_ref
    ref = StabilizerTableau(total)
    rng = np.random.default_rng(0)  # reference prep must be deterministic
    if input_ops is None:
        for i in range(n):
            r = plan.register + i
            ref.apply(Operation("H", (r,)))
            ref.apply(Operation("CX", (r, i)))
    else:
        for o in input_ops:
            ref.apply(Operation(o.kind, o.qubits), rng)
    for seg in plan.segments:
        for o in seg.logical_ops:
            ref.apply(o, rng)
    block = tuple(range(plan.register, total)) + tuple(range(n))
    return subsystem_stabilizers(ref, block)


def run_protocol_oracle(
    make_plan,
    model: NoiseModel,
    shots: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    input_circuit: Circuit | None = None,
    shortcut: bool = True,
) -> RunStats:
    """Monte-Carlo estimate from the tableau oracle (Choi input by default)."""
    acc = None
    input_ops = None
    if input_circuit is not None:
        input_ops = input_circuit.ops
    n_ref = 0
    for batch_idx, count in enumerate(_batch_sizes(shots, batch_size)):
        plan = make_plan(batch_idx)
        if acc is None:
            n_ref = plan.n if input_circuit is None else 0
            acc = _Accumulator(len(plan.segments), plan.max_qubits())
            ref_gens = build_reference_gens(plan, input_ops, n_ref)
        noise_cache = _PlanNoise(plan, model)
        rng = child_rng(seed, _STREAM_ORACLE, batch_idx)
        for _ in range(count):
            rec = run_oracle_shot(
                plan,
                model,
                rng,
                noise_cache,
                input_ops,
                ref_gens,
                n_ref,
                max_restarts=max_restarts,
                shortcut=shortcut,
            )
            acc.add_shot(rec.failure, rec.ops, rec.restarts_by_segment, rec.aborted)
    return acc.finalize()


def noiseless_output_equals(
    plan: ProtocolPlan,
    input_circuit: Circuit,
    seed: int = 0,
) -> bool:
    """Exact check: the noiseless literal protocol maps the given stabilizer
    input to the same state as applying the logical circuit directly.

    Also asserts that every noiseless stabilizer check reports its expected
    outcome (a wrong check construction restarts forever otherwise).
    """
    model = NoiseModel.uniform(0.0)
    noise_cache = _PlanNoise(plan, model)
    rng = child_rng(seed, _STREAM_ORACLE, 0)
    n = plan.n

    sim = _TableauShot(plan, model, rng, 0)
    for o in input_circuit.ops:
        sim.tab.apply(Operation(o.kind, o.qubits), sim.rng)
    for si, seg in enumerate(plan.segments):
        seg_noise = noise_cache.segments[si]
        zeros_op = np.zeros(len(seg_noise.attempt_rates), dtype=bool)
        zeros_idle = np.zeros(seg_noise.attempt_idle_total, dtype=bool)
        patterns = seg_noise.phase_patterns("attempt", zeros_op, zeros_idle)
        for entry in patterns[: seg_noise.n_prep]:
            _NoisyPhaseRunner(sim, *entry).run()
        for ci, (ph, om, im) in enumerate(patterns[seg_noise.n_prep :]):
            hit: list[int] = []
            _NoisyPhaseRunner(sim, ph, om, im).run(
                on_measure=lambda q, out: hit.append(out)
            )
            if hit[-1] != seg.checks[ci].expected:
                raise AssertionError(
                    f"noiseless check {ci} of segment {si} returned {hit[-1]}, "
                    f"expected {seg.checks[ci].expected}"
                )
        outcomes: dict[int, int] = {}
        f_zero_op = np.zeros(len(seg_noise.finish_rates), dtype=bool)
        f_zero_idle = np.zeros(seg_noise.finish_idle_total, dtype=bool)
        f_pat, c_pat = seg_noise.phase_patterns("finish", f_zero_op, f_zero_idle)
        _NoisyPhaseRunner(sim, *f_pat).run(on_measure=outcomes.__setitem__)
        correction = PauliString.identity(plan.register)
        for k, q in enumerate(seg.measured):
            if outcomes[q]:
                correction = correction * seg.corr_gens[k]
        for q in range(plan.register):
            letter = correction.letter(q)
            if letter != "I":
                sim.tab.apply_kind(letter, sim.pos[q])
        _NoisyPhaseRunner(sim, *c_pat, noise_only=True).run()
        sim.relabel(seg)

    ref = StabilizerTableau(n)
    rng2 = np.random.default_rng(seed)
    for o in input_circuit.ops:
        ref.apply(o, rng2)
    for seg in plan.segments:
        for o in seg.logical_ops:
            ref.apply(o, rng2)
    out_block = tuple(sim.pos[q] for q in range(n))
    return states_equal_on(sim.tab, out_block, ref, tuple(range(n)))
