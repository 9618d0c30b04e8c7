import itertools

import numpy as np
import pytest

from clinr.circuit import Circuit, op
from clinr.cliffords import (
    CliffordElement,
    circuit_to_element,
    sample_clifford,
    sample_gate_sequence,
    sample_random_clifford_circuit,
    sym_inner,
    synthesize,
)


def enumerate_group_order(n: int) -> int:
    """Brute-force count of (symplectic matrix, phase) pairs for tiny n."""
    dim = 2 * n
    count = 0
    vectors = range(1, 1 << dim)

    def extend(rows):
        nonlocal count
        k = len(rows) // 2
        if k == n:
            count += 1 << dim  # phase choices
            return
        for a in vectors:
            if any(sym_inner(a, r, n) for r in rows):
                continue
            for b in vectors:
                if sym_inner(a, b, n) != 1:
                    continue
                if any(sym_inner(b, r, n) for r in rows):
                    continue
                extend(rows + [a, b])

    extend([])
    return count


class TestGroupOrders:
    def test_enumerated_orders_match_formula(self):
        # |C_n| = 2^(n^2+2n) * prod_j (4^j - 1), mod global phase
        assert enumerate_group_order(1) == 24
        formula = lambda n: 2 ** (n * n + 2 * n) * int(
            np.prod([4**j - 1 for j in range(1, n + 1)])
        )
        assert formula(1) == 24
        assert formula(2) == 11520


class TestSampleClifford:
    def test_deterministic_given_seed(self):
        a = sample_clifford(4, np.random.default_rng(7))
        b = sample_clifford(4, np.random.default_rng(7))
        assert a == b

    def test_symplectic_invariant(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 7))
            assert sample_clifford(n, rng).is_symplectic()

    def test_n1_hits_all_24_elements(self, rng):
        seen = {sample_clifford(1, rng).key() for _ in range(3000)}
        assert len(seen) == 24

    def test_n1_roughly_uniform(self, rng):
        counts = {}
        trials = 24_000
        for _ in range(trials):
            k = sample_clifford(1, rng).key()
            counts[k] = counts.get(k, 0) + 1
        assert len(counts) == 24
        expected = trials / 24
        for c in counts.values():
            assert abs(c - expected) < 6 * np.sqrt(expected)

    def test_rejects_n0(self):
        with pytest.raises(ValueError):
            sample_clifford(0, np.random.default_rng(0))


class TestSynthesize:
    def test_identity_element(self):
        n = 3
        rows = tuple(1 << i for i in range(n)) + tuple(1 << (n + i) for i in range(n))
        e = CliffordElement(n, rows, 0)
        c = synthesize(e)
        assert all(o.kind in ("X", "Y", "Z") for o in c.ops)
        assert circuit_to_element(c) == e

    def test_pauli_phases_only(self):
        n = 2
        rows = tuple(1 << i for i in range(n)) + tuple(1 << (n + i) for i in range(n))
        e = CliffordElement(n, rows, 0b0110)
        c = synthesize(e)
        assert circuit_to_element(c) == e

    def test_single_cx_element(self):
        target = circuit_to_element(Circuit(2, [op("CX", 0, 1)]))
        c = synthesize(target)
        assert circuit_to_element(c) == target

    def test_random_elements_round_trip_exactly(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 7))
            e = sample_clifford(n, rng)
            c = synthesize(e)
            assert c.is_clifford()
            assert set(o.kind for o in c.ops) <= {"H", "S", "SDG", "CX", "X", "Y", "Z"}
            assert circuit_to_element(c) == e

    def test_size_scales_quadratically(self, rng):
        # record the constant c in s <= c * n^2 for random elements
        for n in (4, 8, 16):
            sizes = [synthesize(sample_clifford(n, rng)).size for _ in range(10)]
            assert max(sizes) <= 3.0 * n * n + 4 * n


class TestSampleGateSequence:
    def test_empty(self):
        c = sample_gate_sequence(3, 0, np.random.default_rng(0))
        assert c.size == 0

    def test_deterministic(self):
        a = sample_gate_sequence(4, 50, np.random.default_rng(3))
        b = sample_gate_sequence(4, 50, np.random.default_rng(3))
        assert a == b

    def test_kind_frequencies(self, rng):
        s = 30_000
        c = sample_gate_sequence(2, s, rng)
        counts = {k: 0 for k in ("H", "S", "CX")}
        for o in c.ops:
            counts[o.kind] += 1
        sigma = np.sqrt(s * (1 / 3) * (2 / 3))
        for k in counts:
            assert abs(counts[k] - s / 3) < 4 * sigma

    def test_qubit_pairs_distinct_and_uniform(self, rng):
        c = sample_gate_sequence(3, 9_000, rng)
        pair_counts = {}
        for o in c.ops:
            if o.kind == "CX":
                assert o.qubits[0] != o.qubits[1]
                pair_counts[o.qubits] = pair_counts.get(o.qubits, 0) + 1
        assert set(pair_counts) == set(itertools.permutations(range(3), 2))

    def test_rejects_small_register(self):
        with pytest.raises(ValueError):
            sample_gate_sequence(1, 5, np.random.default_rng(0))


class TestRandomCliffordCircuit:
    def test_circuit_realizes_sampled_element(self, rng):
        c = sample_random_clifford_circuit(5, np.random.default_rng(11))
        d = sample_random_clifford_circuit(5, np.random.default_rng(11))
        assert c == d
        assert c.is_clifford()
