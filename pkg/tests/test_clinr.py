import dataclasses
import itertools
import math

import numpy as np
import pytest

from clinr.circuit import Circuit, op
from clinr.cliffords import sample_random_clifford_circuit
from clinr.clinr_protocol import (
    ClinrParams,
    ClinrPlanMaker,
    bell_check_pool,
    build_clinr_plan,
    check_subcircuit,
    q_correction,
    resource_generators,
    run_clinr,
    sample_bell_checks,
    sample_uniform_checks,
    _f2_rank,
    _symplectic_vectors,
)
from clinr.framesim import _ScalarShot, child_rng, run_shot
from clinr.noise import NoiseModel
from clinr.oracle import noiseless_output_equals, run_protocol_oracle
from clinr.pauli import PauliString, commutes
from clinr.protocol import build_check_spec
from clinr.tableau import StabilizerTableau, tableau_from_circuit
from clinr.bounds import clinr_bound


def bell_resource_tableau(sub: Circuit) -> StabilizerTableau:
    """(I (x) C)|Bell>^n on 2n qubits: block two = 0..n-1, block three = n..2n-1."""
    n = sub.n
    ops = []
    for i in range(n):
        ops.append(op("H", i))
        ops.append(op("CX", i, n + i))
    for o in sub.ops:
        ops.append(type(o)(o.kind, tuple(q + n for q in o.qubits)))
    return tableau_from_circuit(Circuit(2 * n, ops))


class TestResourceGenerators:
    def test_empty_circuit_gives_bell_generators(self):
        gens = resource_generators(Circuit(1, []))
        assert gens[0] == PauliString.from_label("XX")
        assert gens[1] == PauliString.from_label("ZZ")

    def test_cx_propagation_example(self):
        # C = CX(0->1) on block three: X-type generator of pair 0 picks up the target
        gens = resource_generators(Circuit(2, [op("CX", 0, 1)]))
        assert gens[0] == PauliString.from_label("XIXX")

    def test_generators_stabilize_resource_state(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 6))
            sub = sample_random_clifford_circuit(n, rng)
            tab = bell_resource_tableau(sub)
            for gen in resource_generators(sub):
                assert tab.is_stabilized_by(gen)

    def test_generators_commute_and_have_full_rank(self, rng):
        sub = sample_random_clifford_circuit(3, rng)
        gens = resource_generators(sub)
        for a, b in itertools.combinations(gens, 2):
            assert commutes(a, b)
        assert _f2_rank(_symplectic_vectors(gens)) == 6


class TestUniformChecks:
    def test_r_zero_empty(self, rng):
        assert sample_uniform_checks(resource_generators(Circuit(2, [])), 0, rng) == []

    def test_r_exceeding_rank_rejected(self, rng):
        gens = resource_generators(Circuit(2, []))
        with pytest.raises(ValueError):
            sample_uniform_checks(gens, 5, rng)

    def test_single_check_uniform_over_nonidentity_elements(self, rng):
        # n=2 resource on 4 qubits: group has 2^4 elements, 15 non-identity
        gens = resource_generators(Circuit(2, [op("H", 0)]))
        counts = {}
        draws = 150_000
        for _ in range(draws):
            (c,) = sample_uniform_checks(gens, 1, rng)
            counts[(c.x, c.z, c.sign)] = counts.get((c.x, c.z, c.sign), 0) + 1
        assert len(counts) == 15
        expected = draws / 15
        sigma = math.sqrt(draws * (1 / 15) * (14 / 15))
        for key, c in counts.items():
            assert abs(c - expected) < 4.5 * sigma, key

    def test_draws_are_independent_sets(self, rng):
        gens = resource_generators(sample_random_clifford_circuit(3, rng))
        for _ in range(50):
            checks = sample_uniform_checks(gens, 3, rng)
            assert _f2_rank(_symplectic_vectors(checks)) == 3

    def test_checks_stabilize_resource(self, rng):
        sub = sample_random_clifford_circuit(3, rng)
        tab = bell_resource_tableau(sub)
        for _ in range(20):
            for c in sample_uniform_checks(resource_generators(sub), 2, rng):
                assert tab.is_stabilized_by(c)


def enumerate_group(gens):
    n = gens[0].n
    out = []
    for bits in range(2 ** len(gens)):
        acc = PauliString.identity(n)
        for j, gp in enumerate(gens):
            if (bits >> j) & 1:
                acc = acc * gp
        out.append(acc)
    return out


class TestDetectionStatistics:
    def test_anticommuting_error_detected_by_exactly_half_the_group(self, rng):
        # exhaustive over the full 2^(2n) group, n <= 3
        for n in (1, 2, 3):
            sub = sample_random_clifford_circuit(n, rng)
            group = enumerate_group(resource_generators(sub))
            for _ in range(30):
                e = PauliString(
                    2 * n,
                    int(rng.integers(0, 4**n)),
                    int(rng.integers(0, 4**n)),
                )
                hits = sum(not commutes(e, s) for s in group)
                assert hits in (0, len(group) // 2)

    def test_rank_conditioned_miss_probability_by_enumeration(self):
        # P(all r checks miss) for rank-r draws is
        # prod_i (2^(2n-1) - 2^i) / (2^(2n) - 2^i), strictly below 2^-r.
        gens = resource_generators(Circuit(1, []))  # n=1: group of 4 on 2 qubits
        dim = 2
        error = PauliString.from_label("XI")  # anticommutes with ZZ
        for r in (1, 2):
            total = misses = 0
            for rows in itertools.product(range(1, 4), repeat=r):
                vecs = list(rows)
                if _f2_rank(vecs) < r:
                    continue
                total += 1
                syndrome = []
                for row in rows:
                    acc = PauliString.identity(dim)
                    for j in range(2):
                        if (row >> j) & 1:
                            acc = acc * gens[j]
                    syndrome.append(0 if commutes(error, acc) else 1)
                misses += not any(syndrome)
            expected = 1.0
            for i in range(r):
                expected *= (2 ** (2 * 1 - 1) - 2**i) / (2 ** (2 * 1) - 2**i)
            assert misses / total == pytest.approx(expected)
            assert misses / total < 2.0**-r


class TestBellChecks:
    def test_empty_circuit_pool_is_weight_two(self, rng):
        checks = sample_bell_checks(Circuit(3, []), 3, rng)
        assert all(c.weight == 2 for c in checks)

    def test_pool_size_three_per_pair(self):
        assert len(bell_check_pool(Circuit(5, []))) == 15

    def test_weight_bound(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 6))
            sub = sample_random_clifford_circuit(n, rng)
            for c in sample_bell_checks(sub, min(2 * n, 4), rng):
                assert c.weight <= n + 1

    def test_checks_stabilize_resource(self, rng):
        sub = sample_random_clifford_circuit(4, rng)
        tab = bell_resource_tableau(sub)
        for _ in range(10):
            for c in sample_bell_checks(sub, 3, rng):
                assert tab.is_stabilized_by(c)


class TestCheckSubcircuit:
    def test_single_z_check(self):
        p = PauliString.single(4, 2, "Z")
        ops = check_subcircuit(p, ancilla=3)
        assert [o.kind for o in ops] == ["P+", "CZ", "H", "M"]
        assert ops[1].qubits == (3, 2)

    def test_full_weight_check_op_count(self):
        n = 3
        p = PauliString.from_label("XZYXZY")  # weight 2n = 6
        ops = check_subcircuit(p, ancilla=6)
        assert len(ops) == 2 * n + 3 + n - n  # weight + 3 = 9
        assert len(ops) == p.weight + 3

    def test_noiseless_measurement_outcomes(self, rng):
        # measuring a true stabilizer of the resource returns 0;
        # after an anticommuting error it returns 1
        sub = sample_random_clifford_circuit(2, rng)
        n = sub.n
        gens = resource_generators(sub)
        (check,) = sample_uniform_checks(gens, 1, rng)
        register = 2 * n + 1
        anc = 2 * n
        # build resource on qubits 0..2n-1 then measure check via ancilla
        tab = StabilizerTableau(register)
        for i in range(n):
            tab.apply(op("H", i))
            tab.apply(op("CX", i, n + i))
        for o in sub.ops:
            tab.apply(type(o)(o.kind, tuple(q + n for q in o.qubits)))
        spec = build_check_spec(register, check.embedded(register, range(2 * n)), anc)
        clean = 0
        for o in spec.phase.ops:
            out = tab.apply(o, rng)
            if o.is_measure():
                clean = out
        assert clean == spec.expected
        # inject an anticommuting error and re-measure
        bad = None
        while bad is None:
            e = PauliString(2 * n, int(rng.integers(0, 4**n)), int(rng.integers(0, 4**n)))
            if not commutes(e, check):
                bad = e
        tab.apply_pauli(bad.embedded(register, range(2 * n)))
        for o in spec.phase.ops:
            out = tab.apply(o, rng)
            if o.is_measure():
                assert out == spec.expected ^ 1

    def test_identity_check_rejected(self):
        with pytest.raises(ValueError):
            check_subcircuit(PauliString.identity(3), ancilla=0)


class TestQCorrection:
    def test_all_zero_outcomes(self):
        c = Circuit(2, [op("H", 0)])
        assert q_correction(c, [0, 0, 0, 0]).is_identity()

    def test_block_one_outcome_gives_z(self):
        c = Circuit(1, [])
        assert q_correction(c, [1, 0]).to_label() == "Z"

    def test_block_two_outcome_gives_x(self):
        c = Circuit(1, [])
        assert q_correction(c, [0, 1]).to_label() == "X"

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            q_correction(Circuit(1, []), [0])


class TestRunClinr:
    def test_noiseless_zero_everything(self, rng):
        c = sample_random_clifford_circuit(3, rng)
        params = ClinrParams(t=2, r=2)
        stats = run_clinr(c, params, NoiseModel.uniform(0.0), 300, seed=5)
        assert stats.p_log == 0.0
        assert stats.restarts == 0
        assert stats.aborts == 0
        assert stats.max_qubits == 3 * 3 + 1

    def test_noiseless_op_count_formula(self, rng):
        # per segment: 8n + s0 + sum(weight+3) over drawn checks
        c = sample_random_clifford_circuit(2, rng)
        params = ClinrParams(t=1, r=2, strategy="uniform", batch_size=1000)
        maker = ClinrPlanMaker(c, params, seed=11)
        plan = maker(0)
        expected = 0
        for seg in plan.segments:
            expected += 8 * plan.n + len(seg.logical_ops) + sum(
                cs.pauli.weight + 3 for cs in seg.checks
            )
        stats = run_clinr(c, params, NoiseModel.uniform(0.0), 100, seed=11)
        assert stats.mean_ops == expected

    def test_twenty_seven_op_example(self):
        # n=2, s0=4, r=1 with a full-weight check, p=0, t=1 -> 27 executed ops
        c = Circuit(2, [op("H", 0), op("S", 1), op("CX", 0, 1), op("H", 1)])
        params = ClinrParams(t=1, r=1)
        plan = build_clinr_plan(c, params, check_rng=np.random.default_rng(0))
        seg = plan.segments[0]
        full = None
        gens = resource_generators(c)
        rng = np.random.default_rng(1)
        while full is None:
            (cand,) = sample_uniform_checks(gens, 1, rng)
            if cand.weight == 4:
                full = cand
        spec = build_check_spec(plan.register, full.embedded(plan.register, range(2, 6)), 6)
        seg = dataclasses.replace(seg, checks=(spec,))
        assert seg.attempt_ops + seg.finish_ops == 27

    def test_omega_q_is_three_n_plus_one(self, rng):
        for n in (2, 4):
            c = sample_random_clifford_circuit(n, rng)
            stats = run_clinr(
                c, ClinrParams(t=1, r=1), NoiseModel.uniform(1e-3), 500, seed=n
            )
            assert stats.max_qubits == 3 * n + 1

    def test_restart_isolation_structural(self, rng):
        # nothing executed before the teleport CNOTs touches block one
        c = sample_random_clifford_circuit(3, rng)
        plan = build_clinr_plan(
            c, ClinrParams(t=2, r=2), check_rng=np.random.default_rng(3)
        )
        block1 = set(range(plan.n))
        for seg in plan.segments:
            for ph in seg.prep_phases:
                assert not (ph.support() & block1)
                # zone scoping: block one is parked (no idle) during those phases
                for _, idle in ph.layers:
                    assert not (set(idle) & block1)
            for check in seg.checks:
                assert not (check.phase.support() & block1)

    def test_restart_isolation_behavioral(self, rng):
        # a block-one frame survives any number of noisy attempt executions
        c = sample_random_clifford_circuit(2, rng)
        plan = build_clinr_plan(
            c, ClinrParams(t=1, r=2), check_rng=np.random.default_rng(4)
        )
        seg = plan.segments[0]
        model = NoiseModel.uniform(0.05)
        for trial in range(30):
            state = _ScalarShot(model, child_rng(9, trial), child_rng(10, trial))
            state.x, state.z = 0b01, 0b10  # X on qubit 0, Z on qubit 1
            for ph in seg.prep_phases:
                state.run_phase(ph)
            for check in seg.checks:
                state.run_phase(check.phase, on_measure=lambda q, d: None)
            assert state.x & 0b11 == 0b01
            assert state.z & 0b11 == 0b10

    def test_zero_rejection_with_abort_reporting(self, rng):
        # pathological noise: restarts hit the cap and are reported, never dropped
        c = sample_random_clifford_circuit(2, rng)
        params = ClinrParams(t=1, r=2, max_restarts=3)
        stats = run_clinr(c, params, NoiseModel.uniform(0.25), 2_000, seed=6)
        assert stats.aborts > 0
        assert stats.shots == 2_000
        assert stats.completed == stats.shots - stats.aborts

    def test_bound_consistency_smoke(self, rng):
        n, t, r, p = 2, 1, 2, 1e-3
        c = sample_random_clifford_circuit(n, np.random.default_rng(8))
        rep = clinr_bound(n, c.size, t, r, p)
        assert rep.p_log_bound < 0.9
        stats = run_clinr(
            c,
            ClinrParams(t=t, r=r, strategy="uniform"),
            NoiseModel.uniform(p),
            50_000,
            seed=7,
        )
        assert stats.ci_hi <= rep.p_log_bound

    def test_gate_overhead_capped_by_bound(self, rng):
        n, t, r, p = 3, 2, 1, 1e-3
        c = sample_random_clifford_circuit(n, np.random.default_rng(12))
        rep = clinr_bound(n, c.size, t, r, p)
        stats = run_clinr(
            c,
            ClinrParams(t=t, r=r, strategy="uniform"),
            NoiseModel.uniform(p),
            20_000,
            seed=13,
        )
        measured = stats.mean_ops / c.size
        slack = 1.96 * stats.sem_ops / c.size
        assert measured - slack <= rep.omega_g_bound

    def test_seed_determinism(self, rng):
        c = sample_random_clifford_circuit(3, rng)
        params = ClinrParams(t=2, r=1, strategy="bell")
        model = NoiseModel.realistic(1e-3)
        a = run_clinr(c, params, model, 3_000, seed=21)
        b = run_clinr(c, params, model, 3_000, seed=21)
        assert a == b

    def test_engines_agree(self, rng):
        c = sample_random_clifford_circuit(3, rng)
        params = ClinrParams(t=1, r=1, strategy="uniform")
        model = NoiseModel.uniform(3e-3)
        sv = run_clinr(c, params, model, 30_000, seed=31)
        ss = run_clinr(c, params, model, 15_000, seed=32, engine="scalar")
        so = run_protocol_oracle(ClinrPlanMaker(c, params, 33), model, 15_000, seed=33)
        for other in (ss, so):
            sigma = math.sqrt(
                sv.p_log * (1 - sv.p_log) / sv.shots
                + other.p_log * (1 - other.p_log) / other.shots
            )
            assert abs(sv.p_log - other.p_log) < 4 * sigma


class TestNoiselessEquivalence:
    def test_output_matches_direct_application(self, rng):
        for trial in range(6):
            n = int(rng.integers(2, 5))
            c = sample_random_clifford_circuit(n, rng)
            for t, r in ((1, 0), (2, 1), (1, 2)):
                plan = build_clinr_plan(
                    c,
                    ClinrParams(t=t, r=r, strategy="bell" if trial % 2 else "uniform"),
                    check_rng=np.random.default_rng(trial),
                )
                w = Circuit(plan.register, sample_random_clifford_circuit(n, rng).ops)
                assert noiseless_output_equals(plan, w, seed=trial)
