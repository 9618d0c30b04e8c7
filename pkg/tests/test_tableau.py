import numpy as np
import pytest

from clinr.circuit import Circuit, op
from clinr.pauli import PauliString, propagate
from clinr.tableau import (
    StabilizerTableau,
    canonical_generators,
    states_equal_on,
    subsystem_stabilizers,
    tableau_from_circuit,
)

from matrix_oracle import circuit_matrix, pauli_matrix
from test_pauli import random_clifford_ops


class TestBasics:
    def test_initial_state_stabilized_by_z(self):
        tab = StabilizerTableau(2)
        assert tab.is_stabilized_by(PauliString.from_label("ZI"))
        assert tab.is_stabilized_by(PauliString.from_label("IZ"))
        assert tab.expectation(PauliString.from_label("ZI", sign=-1)) == -1
        assert tab.expectation(PauliString.from_label("XI")) == 0

    def test_h_turns_stabilizer_into_x(self):
        tab = StabilizerTableau(1)
        tab.apply(op("H", 0))
        assert tab.stabilizers()[0] == PauliString.from_label("X")

    def test_bell_pair_stabilizers(self):
        tab = tableau_from_circuit(Circuit(2, [op("H", 0), op("CX", 0, 1)]))
        assert tab.is_stabilized_by(PauliString.from_label("XX"))
        assert tab.is_stabilized_by(PauliString.from_label("ZZ"))
        assert tab.is_stabilized_by(PauliString.from_label("YY", sign=-1))


class TestMeasurement:
    def test_measure_zero_state_deterministic(self):
        tab = StabilizerTableau(1)
        assert tab.measure(0, None) == 0

    def test_measure_plus_state_random_then_repeatable(self):
        counts = 0
        trials = 10_000
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            tab = StabilizerTableau(1)
            tab.apply(op("H", 0))
            first = tab.measure(0, rng)
            second = tab.measure(0, rng)
            assert second == first
            counts += first
        # frequency 0.5 within 3 sigma of a fair binomial
        sigma = 0.5 / np.sqrt(trials)
        assert abs(counts / trials - 0.5) < 3 * sigma

    def test_prep_resets_qubit(self, rng):
        tab = tableau_from_circuit(Circuit(2, [op("H", 0), op("CX", 0, 1)]))
        tab.apply(op("P0", 0), rng)
        assert tab.is_stabilized_by(PauliString.from_label("ZI"))

    def test_prep_plus(self, rng):
        tab = StabilizerTableau(1)
        tab.apply(op("P+", 0), rng)
        assert tab.is_stabilized_by(PauliString.from_label("X"))

    def test_measurement_statistics_vs_statevector(self, rng):
        # Born-rule check on random 2-qubit stabilizer states.
        for trial in range(20):
            ops = random_clifford_ops(rng, 2, 8)
            c = Circuit(2, ops)
            u = circuit_matrix(c)
            psi = u[:, 0]
            p1_exact = float(np.sum(np.abs(psi[np.arange(4) & 1 == 1]) ** 2))
            shots = 400
            ones = 0
            for s in range(shots):
                tab = tableau_from_circuit(c)
                ones += tab.measure(0, np.random.default_rng((trial, s)))
            if p1_exact in (0.0, 1.0):
                assert ones == shots * p1_exact
            else:
                assert abs(ones / shots - p1_exact) < 4 * np.sqrt(0.25 / shots)


class TestAgainstPropagation:
    def test_stabilizer_rows_match_propagated_z(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 6))
            c = Circuit(n, random_clifford_ops(rng, n, 25))
            tab = tableau_from_circuit(c)
            for i in range(n):
                expected = propagate(c, PauliString.single(n, i, "Z"))
                assert tab.row_pauli(n + i) == expected

    def test_destabilizer_rows_match_propagated_x(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 5))
            c = Circuit(n, random_clifford_ops(rng, n, 20))
            tab = tableau_from_circuit(c)
            for i in range(n):
                expected = propagate(c, PauliString.single(n, i, "X"))
                got = tab.row_pauli(i)
                assert (got.x, got.z) == (expected.x, expected.z)

    def test_expectation_vs_statevector(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 4))
            c = Circuit(n, random_clifford_ops(rng, n, 12))
            tab = tableau_from_circuit(c)
            psi = circuit_matrix(c)[:, 0]
            p = PauliString(
                n, int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)),
                int(rng.choice([1, -1])),
            )
            exact = np.vdot(psi, pauli_matrix(p) @ psi).real
            assert tab.expectation(p) == pytest.approx(exact, abs=1e-9)


class TestCanonicalForms:
    def test_canonical_is_generating_set_invariant(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 5))
            c = Circuit(n, random_clifford_ops(rng, n, 20))
            stabs = tableau_from_circuit(c).stabilizers()
            shuffled = list(stabs)
            rng.shuffle(shuffled)
            # multiply a random pair to change the generating set, not the group
            shuffled[0] = shuffled[0] * shuffled[-1]
            assert canonical_generators(stabs) == canonical_generators(shuffled)

    def test_subsystem_extraction_of_product_state(self, rng):
        c = Circuit(3, [op("H", 0), op("CX", 0, 1)])
        tab = tableau_from_circuit(c)
        sub = subsystem_stabilizers(tab, (2,))
        assert sub == (PauliString.from_label("Z"),)

    def test_subsystem_rejects_entangled_block(self):
        tab = tableau_from_circuit(Circuit(2, [op("H", 0), op("CX", 0, 1)]))
        with pytest.raises(ValueError):
            subsystem_stabilizers(tab, (0,))

    def test_states_equal_on_relabeled_blocks(self, rng):
        ops = random_clifford_ops(rng, 2, 10)
        t1 = tableau_from_circuit(Circuit(4, ops))
        shifted = [type(o)(o.kind, tuple(q + 2 for q in o.qubits)) for o in ops]
        t2 = tableau_from_circuit(Circuit(4, shifted))
        assert states_equal_on(t1, (0, 1), t2, (2, 3))
        assert states_equal_on(t1, (2, 3), t2, (0, 1))  # both |00>
