"""Pauli-frame Monte Carlo engines.

The frame is the net Pauli by which a noisy execution differs from the
noiseless reference; signs are irrelevant.  Preparations reset the frame on
their qubit, unitaries conjugate it, measurements report the reference
outcome XOR the frame's X component XOR a sampled flip, and classically
controlled corrections fold the outcome-difference Pauli back into the frame.
A run fails when the final frame restricted to the output block is not the
identity.

Two engines share the plan IR: a scalar single-shot executor (the readable
reference, also the contract for :func:`run_shot`) and a vectorized executor
that advances a whole batch of shots through each operation at once.  Both
are deterministic given (seed, config) independent of worker count because
randomness is keyed by batch index.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Operation
from .noise import NoiseModel, sample_fault, sample_idle_faults
from .protocol import Phase, ProtocolPlan, SegmentPlan, direct_plan

Z95 = 1.959963984540054

DEFAULT_MAX_RESTARTS = 10_000
DEFAULT_BATCH_SIZE = 1000

# stream tags for splittable seeding
_STREAM_FAULTS = 1
_STREAM_OUTCOMES = 2
_STREAM_CHECKS = 3


def child_rng(seed: int, *path: int) -> np.random.Generator:
    """Deterministic child generator for (seed, path); splittable and stable."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def wilson_interval(failures: int, shots: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    if not 0 <= failures <= shots:
        raise ValueError("failures must lie in [0, shots]")
    z2 = Z95 * Z95
    phat = failures / shots
    denom = 1.0 + z2 / shots
    center = (phat + z2 / (2 * shots)) / denom
    half = (Z95 / denom) * math.sqrt(phat * (1 - phat) / shots + z2 / (4 * shots * shots))
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == shots else min(1.0, center + half)
    return (lo, hi)


@dataclass(frozen=True)
class RunStats:
    """Aggregated Monte-Carlo outputs for one configuration."""

    shots: int
    failures: int
    aborts: int
    p_log: float
    ci_lo: float
    ci_hi: float
    mean_ops: float
    sem_ops: float
    max_qubits: int
    restarts: int
    restarts_by_segment: tuple[int, ...]

    @property
    def completed(self) -> int:
        return self.shots - self.aborts


class _Accumulator:
    def __init__(self, segments: int, max_qubits: int):
        self.shots = 0
        self.failures = 0
        self.aborts = 0
        self.ops_sum = 0.0
        self.ops_sq = 0.0
        self.restarts_by_segment = [0] * segments
        self.max_qubits = max_qubits

    def add_shot(self, failure: bool, ops: int, restarts_by_seg, aborted: bool):
        self.shots += 1
        if aborted:
            self.aborts += 1
        else:
            self.failures += int(failure)
            self.ops_sum += ops
            self.ops_sq += ops * ops
        for i, r in enumerate(restarts_by_seg):
            self.restarts_by_segment[i] += r

    def add_batch(self, failures, aborts, count, ops_sum, ops_sq, restarts_by_seg):
        self.shots += count
        self.failures += failures
        self.aborts += aborts
        self.ops_sum += ops_sum
        self.ops_sq += ops_sq
        for i, r in enumerate(restarts_by_seg):
            self.restarts_by_segment[i] += r

    def finalize(self) -> RunStats:
        completed = self.shots - self.aborts
        if completed <= 0:
            raise RuntimeError("no completed shots (all aborted)")
        p = self.failures / completed
        lo, hi = wilson_interval(self.failures, completed)
        mean = self.ops_sum / completed
        var = max(0.0, self.ops_sq / completed - mean * mean)
        sem = math.sqrt(var / completed)
        return RunStats(
            shots=self.shots,
            failures=self.failures,
            aborts=self.aborts,
            p_log=p,
            ci_lo=lo,
            ci_hi=hi,
            mean_ops=mean,
            sem_ops=sem,
            max_qubits=self.max_qubits,
            restarts=sum(self.restarts_by_segment),
            restarts_by_segment=tuple(self.restarts_by_segment),
        )


# ---------------------------------------------------------------------------
# scalar engine
# ---------------------------------------------------------------------------


def _frame_unitary(x: int, z: int, op: Operation) -> tuple[int, int]:
    kind = op.kind
    if kind == "H":
        (q,) = op.qubits
        b = 1 << q
        xb, zb = x & b, z & b
        if bool(xb) != bool(zb):
            x ^= b
            z ^= b
    elif kind in ("S", "SDG"):
        (q,) = op.qubits
        b = 1 << q
        z ^= x & b
    elif kind in ("X", "Y", "Z"):
        pass
    elif kind == "CX":
        c, t = op.qubits
        if x & (1 << c):
            x ^= 1 << t
        if z & (1 << t):
            z ^= 1 << c
    elif kind == "CZ":
        c, t = op.qubits
        if x & (1 << c):
            z ^= 1 << t
        if x & (1 << t):
            z ^= 1 << c
    elif kind == "CY":
        c, t = op.qubits
        bt = 1 << t
        z ^= x & bt
        x2, z2 = _frame_unitary(x, z, Operation("CX", (c, t)))
        x, z = x2, z2
        z ^= x & bt
    else:
        raise ValueError(f"not a unitary: {kind}")
    return x, z


def _inject_pauli(x: int, z: int, fault, qubits) -> tuple[int, int]:
    for i, q in enumerate(qubits):
        if (fault.x >> i) & 1:
            x ^= 1 << q
        if (fault.z >> i) & 1:
            z ^= 1 << q
    return x, z


@dataclass
class ShotRecord:
    """Trace of one protocol shot from the scalar executor."""

    failure: bool
    ops: int
    restarts_by_segment: tuple[int, ...]
    aborted: bool
    outcomes: tuple[int, ...]  # reported outcome bits in execution order
    frame_x: int
    frame_z: int


class _ScalarShot:
    def __init__(self, model: NoiseModel, fault_rng, outcome_rng):
        self.model = model
        self.fault_rng = fault_rng
        self.outcome_rng = outcome_rng
        self.x = 0
        self.z = 0
        self.outcomes: list[int] = []

    def run_phase(self, phase: Phase, on_measure=None, reference=None):
        model, rng = self.model, self.fault_rng
        for op_idxs, idle in phase.layers:
            for i in op_idxs:
                o = phase.ops[i]
                if o.is_prep():
                    b = ~(1 << o.qubits[0])
                    self.x &= b
                    self.z &= b
                    fault = sample_fault(o, model, rng)
                    if fault is not None:
                        self.x, self.z = _inject_pauli(self.x, self.z, fault, o.qubits)
                elif o.is_measure():
                    q = o.qubits[0]
                    delta = (self.x >> q) & 1
                    if sample_fault(o, model, rng) is True:
                        delta ^= 1
                    ref = reference(q) if reference else int(self.outcome_rng.integers(2))
                    self.outcomes.append(ref ^ delta)
                    if on_measure is not None:
                        on_measure(q, delta)
                else:
                    self.x, self.z = _frame_unitary(self.x, self.z, o)
                    fault = sample_fault(o, model, rng)
                    if fault is not None:
                        self.x, self.z = _inject_pauli(self.x, self.z, fault, o.qubits)
            if idle and model.p_idle > 0:
                for q, letter in sample_idle_faults((), idle, model, rng):
                    if letter != "Z":
                        self.x ^= 1 << q
                    if letter != "X":
                        self.z ^= 1 << q


def run_shot(
    plan: ProtocolPlan,
    model: NoiseModel,
    fault_rng: np.random.Generator,
    outcome_rng: np.random.Generator | None = None,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
) -> ShotRecord:
    """Execute one shot of a protocol plan with the scalar frame engine."""
    if outcome_rng is None:
        outcome_rng = np.random.default_rng(0)
    state = _ScalarShot(model, fault_rng, outcome_rng)
    n = plan.n
    ops_count = 0
    restarts = [0] * len(plan.segments)
    aborted = False
    for si, seg in enumerate(plan.segments):
        attempt = 0
        while True:
            attempt += 1
            if attempt > max_restarts:
                aborted = True
                break
            failed_at = None
            for phase in seg.prep_phases:
                state.run_phase(phase)
            for ci, check in enumerate(seg.checks):
                hit = []
                state.run_phase(
                    check.phase,
                    on_measure=lambda q, d: hit.append(d),
                    reference=lambda q, c=check: c.expected,
                )
                if hit and hit[-1]:
                    failed_at = ci
                    break
            if failed_at is None:
                ops_count += seg.attempt_ops
                break
            ops_count += seg.ops_until_check(failed_at)
            restarts[si] += 1
        if aborted:
            break
        deltas: dict[int, int] = {}
        state.run_phase(seg.finish_phase, on_measure=deltas.__setitem__)
        for k, q in enumerate(seg.measured):
            if deltas.get(q):
                g = seg.corr_gens[k]
                state.x ^= g.x
                state.z ^= g.z
        state.run_phase(seg.corr_phase)
        ops_count += seg.finish_ops
        # relabel the output block onto qubits 0..n-1, drop the rest
        nx = nz = 0
        for i, q in enumerate(seg.output_block):
            nx |= ((state.x >> q) & 1) << i
            nz |= ((state.z >> q) & 1) << i
        state.x, state.z = nx, nz
    mask = (1 << n) - 1
    failure = bool((state.x | state.z) & mask) and not aborted
    return ShotRecord(
        failure=failure,
        ops=ops_count,
        restarts_by_segment=tuple(restarts),
        aborted=aborted,
        outcomes=tuple(state.outcomes),
        frame_x=state.x,
        frame_z=state.z,
    )


# ---------------------------------------------------------------------------
# vectorized engine
# ---------------------------------------------------------------------------

_TWO_Q_TABLE = None


def _two_q_table():
    global _TWO_Q_TABLE
    if _TWO_Q_TABLE is None:
        import itertools

        pairs = [p for p in itertools.product("IXYZ", repeat=2) if p != ("I", "I")]
        xc = np.array([p[0] in "XY" for p in pairs])
        zc = np.array([p[0] in "YZ" for p in pairs])
        xt = np.array([p[1] in "XY" for p in pairs])
        zt = np.array([p[1] in "YZ" for p in pairs])
        _TWO_Q_TABLE = (xc, zc, xt, zt)
    return _TWO_Q_TABLE


def _vec_inject_1q(X, Z, q, p, rng):
    if p <= 0.0:
        return
    mask = rng.random(len(X)) < p
    k = int(mask.sum())
    if not k:
        return
    letters = rng.integers(0, 3, size=k)
    X[mask, q] ^= letters != 2
    Z[mask, q] ^= letters != 0


def _vec_inject_2q(X, Z, c, t, p, rng):
    if p <= 0.0:
        return
    mask = rng.random(len(X)) < p
    k = int(mask.sum())
    if not k:
        return
    xc, zc, xt, zt = _two_q_table()
    idx = rng.integers(0, 15, size=k)
    X[mask, c] ^= xc[idx]
    Z[mask, c] ^= zc[idx]
    X[mask, t] ^= xt[idx]
    Z[mask, t] ^= zt[idx]


def _vec_idle(X, Z, idle_qubits, p_idle, rng, alive=None):
    if p_idle <= 0.0 or not idle_qubits:
        return
    rows = np.flatnonzero(alive) if alive is not None else np.arange(len(X))
    if not len(rows):
        return
    k = len(idle_qubits)
    slots = len(rows) * k
    nf = int(rng.binomial(slots, p_idle))
    if not nf:
        return
    # distinct uniform slots by rejection (nf << slots in every sane regime)
    pos = np.unique(rng.integers(0, slots, size=nf))
    while len(pos) < nf:
        extra = rng.integers(0, slots, size=nf - len(pos))
        pos = np.unique(np.concatenate([pos, extra]))
    r = rows[pos // k]
    q = np.asarray(idle_qubits)[pos % k]
    letters = rng.integers(0, 3, size=nf)
    X[r, q] ^= letters != 2
    Z[r, q] ^= letters != 0


def _vec_apply_phase(X, Z, phase: Phase, model: NoiseModel, rng, alive=None, measure_sink=None):
    """Advance a compact batch through one phase.

    ``measure_sink``: optional callable(qubit, delta_vector) invoked at each
    measurement with the outcome-difference bits (frame X component XOR flip).
    """
    for op_idxs, idle in phase.layers:
        for i in op_idxs:
            o = phase.ops[i]
            kind = o.kind
            if kind == "CX":
                c, t = o.qubits
                X[:, t] ^= X[:, c]
                Z[:, c] ^= Z[:, t]
                _vec_inject_2q(X, Z, c, t, model.p2, rng)
            elif kind == "CZ":
                c, t = o.qubits
                Z[:, t] ^= X[:, c]
                Z[:, c] ^= X[:, t]
                _vec_inject_2q(X, Z, c, t, model.p2, rng)
            elif kind == "CY":
                c, t = o.qubits
                Z[:, t] ^= X[:, t]
                X[:, t] ^= X[:, c]
                Z[:, c] ^= Z[:, t]
                Z[:, t] ^= X[:, t]
                _vec_inject_2q(X, Z, c, t, model.p2, rng)
            elif kind == "H":
                q = o.qubits[0]
                tmp = X[:, q].copy()
                X[:, q] = Z[:, q]
                Z[:, q] = tmp
                _vec_inject_1q(X, Z, q, model.p1, rng)
            elif kind in ("S", "SDG"):
                q = o.qubits[0]
                Z[:, q] ^= X[:, q]
                _vec_inject_1q(X, Z, q, model.p1, rng)
            elif kind in ("X", "Y", "Z"):
                _vec_inject_1q(X, Z, o.qubits[0], model.p1, rng)
            elif kind in ("P0", "P+"):
                q = o.qubits[0]
                X[:, q] = False
                Z[:, q] = False
                _vec_inject_1q(X, Z, q, model.p1, rng)
            elif kind == "M":
                q = o.qubits[0]
                delta = X[:, q].copy()
                if model.p_meas > 0.0:
                    delta ^= rng.random(len(X)) < model.p_meas
                if measure_sink is not None:
                    measure_sink(q, delta)
            else:
                raise ValueError(f"unsupported op {kind}")
        _vec_idle(X, Z, idle, model.p_idle, rng, alive)


def _vec_run_attempt(seg: SegmentPlan, X, Z, model, rng):
    """One resource attempt on a compact batch: returns (ops, failed_at)."""
    B = len(X)
    for phase in seg.prep_phases:
        _vec_apply_phase(X, Z, phase, model, rng)
    failed_at = np.full(B, -1, dtype=np.int64)
    alive = np.ones(B, dtype=bool)
    for ci, check in enumerate(seg.checks):
        sink: list = []
        _vec_apply_phase(
            X, Z, check.phase, model, rng, alive=alive,
            measure_sink=lambda q, d: sink.append(d),
        )
        delta = sink[-1]
        newly = alive & delta
        failed_at[newly] = ci
        alive &= ~delta
    ops = np.full(B, seg.attempt_ops, dtype=np.int64)
    for ci in range(len(seg.checks)):
        ops[failed_at == ci] = seg.ops_until_check(ci)
    return ops, failed_at


def _vec_run_finish(seg: SegmentPlan, X, Z, model, rng):
    deltas: dict[int, np.ndarray] = {}
    _vec_apply_phase(X, Z, seg.finish_phase, model, rng, measure_sink=deltas.__setitem__)
    for k, q in enumerate(seg.measured):
        d = deltas[q]
        if not d.any():
            continue
        g = seg.corr_gens[k]
        for qq in range(g.n):
            if (g.x >> qq) & 1:
                X[d, qq] ^= True
            if (g.z >> qq) & 1:
                Z[d, qq] ^= True
    _vec_apply_phase(X, Z, seg.corr_phase, model, rng)


def _run_batch_vector(plan: ProtocolPlan, model, rng, batch: int, max_restarts: int):
    n, register = plan.n, plan.register
    X = np.zeros((batch, register), dtype=bool)
    Z = np.zeros((batch, register), dtype=bool)
    ops = np.zeros(batch, dtype=np.int64)
    aborted = np.zeros(batch, dtype=bool)
    restarts_by_seg = [0] * len(plan.segments)
    for si, seg in enumerate(plan.segments):
        pending = ~aborted
        attempt = 0
        while pending.any():
            attempt += 1
            if attempt > max_restarts:
                aborted |= pending
                break
            idx = np.flatnonzero(pending)
            Xs, Zs = X[idx], Z[idx]
            ops_s, failed_at = _vec_run_attempt(seg, Xs, Zs, model, rng)
            X[idx], Z[idx] = Xs, Zs
            ops[idx] += ops_s
            failed = failed_at >= 0
            restarts_by_seg[si] += int(failed.sum())
            pending = pending.copy()
            pending[idx] = failed
        _vec_run_finish(seg, X, Z, model, rng)
        ops[~aborted] += seg.finish_ops
        out = list(seg.output_block)
        X[:, :n] = X[:, out]
        Z[:, :n] = Z[:, out]
        X[:, n:] = False
        Z[:, n:] = False
    failure = (X[:, :n] | Z[:, :n]).any(axis=1) & ~aborted
    ok = ~aborted
    return (
        int(failure.sum()),
        int(aborted.sum()),
        batch,
        float(ops[ok].sum()),
        float((ops[ok].astype(float) ** 2).sum()),
        restarts_by_seg,
    )


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


def _worker_count() -> int:
    env = os.environ.get("CLINR_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def _batch_sizes(shots: int, batch_size: int) -> list[int]:
    full, rem = divmod(shots, batch_size)
    return [batch_size] * full + ([rem] if rem else [])


def _run_one_batch(args):
    make_plan, model, seed, batch_idx, count, max_restarts, engine = args
    plan = make_plan(batch_idx)
    if engine == "vector":
        rng = child_rng(seed, _STREAM_FAULTS, batch_idx)
        return _run_batch_vector(plan, model, rng, count, max_restarts), plan
    acc_failures = acc_aborts = 0
    ops_sum = ops_sq = 0.0
    restarts = [0] * len(plan.segments)
    for s in range(count):
        frng = child_rng(seed, _STREAM_FAULTS, batch_idx, s)
        orng = child_rng(seed, _STREAM_OUTCOMES, batch_idx, s)
        rec = run_shot(plan, model, frng, orng, max_restarts)
        if rec.aborted:
            acc_aborts += 1
        else:
            acc_failures += int(rec.failure)
            ops_sum += rec.ops
            ops_sq += rec.ops * rec.ops
        for i, r in enumerate(rec.restarts_by_segment):
            restarts[i] += r
    return (acc_failures, acc_aborts, count, ops_sum, ops_sq, restarts), plan


def run_protocol(
    make_plan,
    model: NoiseModel,
    shots: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    engine: str = "vector",
) -> RunStats:
    """Monte-Carlo estimate for a protocol described by ``make_plan(batch_idx)``.

    ``make_plan`` is invoked once per batch of ``batch_size`` shots and may
    re-draw stabilizer checks (keyed by the batch index), matching batched
    check re-selection.  Engines: "vector" (default) or "scalar".
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if engine not in ("vector", "scalar"):
        raise ValueError("engine must be 'vector' or 'scalar'")
    sizes = _batch_sizes(shots, batch_size)
    tasks = [
        (make_plan, model, seed, i, c, max_restarts, engine)
        for i, c in enumerate(sizes)
    ]
    workers = _worker_count()
    acc = None
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one_batch, tasks))
    else:
        results = [_run_one_batch(t) for t in tasks]
    for counts, plan in results:
        if acc is None:
            acc = _Accumulator(len(plan.segments), plan.max_qubits())
        acc.add_batch(*counts)
    return acc.finalize()


@dataclass(frozen=True)
class ConstantPlanMaker:
    """Plan factory for protocols without per-batch randomness (picklable)."""

    plan: ProtocolPlan

    def __call__(self, _batch_idx: int) -> ProtocolPlan:
        return self.plan


def run_direct(
    circuit: Circuit,
    model: NoiseModel,
    shots: int,
    seed: int,
    idle_scope: str = "zone",
    engine: str = "vector",
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> RunStats:
    """Direct implementation C' = C under circuit-level noise."""
    if not circuit.is_clifford():
        raise ValueError("run_direct expects a Clifford circuit")
    plan = direct_plan(circuit, idle_scope)
    return run_protocol(
        ConstantPlanMaker(plan), model, shots, seed, batch_size=batch_size, engine=engine
    )
