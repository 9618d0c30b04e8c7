"""Uniform random Clifford sampling, synthesis into {H, S, CX}, gate sequences.

A Clifford element (mod global phase) is a symplectic 2n x 2n binary matrix
plus 2n phase bits.  Rows are stored as 2n-bit integers (x part in bits
0..n-1, z part in bits n..2n-1): row i is the image of X_i under conjugation,
row n+i the image of Z_i.

Sampling builds a uniformly random symplectic basis pair by pair (draw a
nonzero vector, draw a symplectic partner, project the residual space), which
is exactly uniform over the group; phase bits are uniform on top.  Uniformity
is validated against the enumerated group orders 24 (n=1) and 11520 (n=2) in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Operation
from .pauli import PauliString, conjugate_through


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def _rand_bits(rng: np.random.Generator, bits: int) -> int:
    """Uniform integer in [0, 2**bits); safe for widths beyond int64."""
    nbytes = (bits + 7) // 8
    value = int.from_bytes(rng.bytes(nbytes), "little")
    return value & ((1 << bits) - 1)


def sym_inner(u: int, v: int, n: int) -> int:
    """Symplectic form <u,v> = u_x.v_z + u_z.v_x over F2 on 2n-bit vectors."""
    mask = (1 << n) - 1
    return _parity((u & mask) & (v >> n)) ^ _parity((u >> n) & (v & mask))


def _vector_to_pauli(v: int, n: int, sign: int = 1) -> PauliString:
    mask = (1 << n) - 1
    return PauliString(n, v & mask, v >> n, sign)


def _pauli_to_vector(p: PauliString) -> int:
    return p.x | (p.z << p.n)


@dataclass(frozen=True)
class CliffordElement:
    """Symplectic matrix rows plus phase bits; see module docstring."""

    n: int
    rows: tuple[int, ...]
    phases: int

    def __post_init__(self):
        if len(self.rows) != 2 * self.n:
            raise ValueError("need 2n rows")

    def x_image(self, i: int) -> PauliString:
        sign = -1 if (self.phases >> i) & 1 else 1
        return _vector_to_pauli(self.rows[i], self.n, sign)

    def z_image(self, i: int) -> PauliString:
        sign = -1 if (self.phases >> (self.n + i)) & 1 else 1
        return _vector_to_pauli(self.rows[self.n + i], self.n, sign)

    def is_symplectic(self) -> bool:
        n = self.n
        for i in range(2 * n):
            for j in range(i, 2 * n):
                expected = 1 if j == i + n else 0
                if sym_inner(self.rows[i], self.rows[j], n) != expected:
                    return False
        return True

    def key(self) -> tuple:
        """Hashable identity of the group element (mod global phase)."""
        return (self.n, self.rows, self.phases)


def sample_clifford(n: int, rng: np.random.Generator) -> CliffordElement:
    """Sample uniformly from the n-qubit Clifford group mod global phase."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = 2 * n
    pairs: list[tuple[int, int]] = []

    def project(v: int) -> int:
        # remove components along found pairs so v lies in their symplectic complement
        for a, b in pairs:
            if sym_inner(v, b, n):
                v ^= a
            if sym_inner(v, a, n):
                v ^= b
        return v

    for _ in range(n):
        while True:
            a = project(_rand_bits(rng, dim))
            if a:
                break
        partner = None
        for j in range(dim):
            c = project(1 << j)
            if sym_inner(a, c, n):
                partner = c
                break
        u = project(_rand_bits(rng, dim))
        b = u if sym_inner(a, u, n) else u ^ partner
        pairs.append((a, b))

    rows = tuple(p[0] for p in pairs) + tuple(p[1] for p in pairs)
    phases = _rand_bits(rng, dim)
    return CliffordElement(n, rows, phases)


def circuit_to_element(circuit: Circuit) -> CliffordElement:
    """Tableau action of a Clifford circuit as a CliffordElement."""
    if not circuit.is_clifford():
        raise ValueError("circuit must be unitary-only")
    n = circuit.n
    rows = []
    phases = 0
    images = [PauliString.single(n, i, "X") for i in range(n)] + [
        PauliString.single(n, i, "Z") for i in range(n)
    ]
    for idx, start in enumerate(images):
        img = start
        for o in circuit.ops:
            img = conjugate_through(o, img)
        rows.append(_pauli_to_vector(img))
        if img.sign < 0:
            phases |= 1 << idx
    return CliffordElement(n, tuple(rows), phases)


def synthesize(element: CliffordElement) -> Circuit:
    """Synthesize a circuit over {H, S, CX} (+SDG, Paulis) realizing the element.

    Gaussian-elimination style tableau sweep: conjugate the element's images
    to the identity tableau one qubit at a time, then invert the gate list and
    prepend a Pauli layer fixing the residual signs.  Gate count is O(n^2);
    the measured constant is about 1.6 n^2 for uniform random elements (see
    README).
    """
    n = element.n
    rows = [element.x_image(i) for i in range(n)] + [element.z_image(i) for i in range(n)]
    applied: list[Operation] = []

    def apply(kind: str, *qubits: int):
        g = Operation(kind, qubits)
        applied.append(g)
        for i in range(2 * n):
            rows[i] = conjugate_through(g, rows[i])

    def reduce_row_to_x(j: int, row_idx: int):
        # make rows[row_idx] equal +/-X_j using ops on columns >= j
        r = rows[row_idx]
        if not any((r.x >> k) & 1 for k in range(j, n)):
            k = next(k for k in range(j, n) if (r.z >> k) & 1)
            apply("H", k)
            r = rows[row_idx]
        if not (r.x >> j) & 1:
            k = next(k for k in range(j + 1, n) if (r.x >> k) & 1)
            apply("CX", k, j)
            r = rows[row_idx]
        for k in range(j + 1, n):
            if (r.x >> k) & 1:
                apply("CX", j, k)
        r = rows[row_idx]
        if (r.z >> j) & 1:
            apply("S", j)
        r = rows[row_idx]
        for k in range(j + 1, n):
            if (r.z >> k) & 1:
                apply("H", k)
                apply("CX", j, k)

    for j in range(n):
        reduce_row_to_x(j, j)
        rz = rows[n + j]
        if (rz.x, rz.z) != (0, 1 << j):  # already +/-Z_j: skip the H sandwich
            apply("H", j)
            reduce_row_to_x(j, n + j)
            apply("H", j)

    # rows are now +/-X_i and +/-Z_i; fix signs with a leading Pauli layer
    inverse = {"H": "H", "CX": "CX", "S": "SDG", "SDG": "S"}
    ops: list[Operation] = []
    for i in range(n):
        if rows[n + i].sign < 0:  # Z_i image flipped -> X_i factor
            ops.append(Operation("X", (i,)))
        if rows[i].sign < 0:  # X_i image flipped -> Z_i factor
            ops.append(Operation("Z", (i,)))
    for g in reversed(applied):
        ops.append(Operation(inverse[g.kind], g.qubits))
    return Circuit(n, tuple(ops))


def sample_random_clifford_circuit(n: int, rng: np.random.Generator) -> Circuit:
    """Uniform random Clifford, synthesized; the standard experiment input."""
    return synthesize(sample_clifford(n, rng))


def sample_gate_sequence(n: int, s: int, rng: np.random.Generator) -> Circuit:
    """s gates drawn uniformly from {H, S, CX} on uniformly chosen qubits."""
    if n < 2:
        raise ValueError("gate sequences need n >= 2 (CX needs two qubits)")
    if s < 0:
        raise ValueError("s must be >= 0")
    kinds = ("H", "S", "CX")
    ops = []
    for _ in range(s):
        kind = kinds[int(rng.integers(3))]
        if kind == "CX":
            c = int(rng.integers(n))
            t = int(rng.integers(n - 1))
            if t >= c:
                t += 1
            ops.append(Operation("CX", (c, t)))
        else:
            ops.append(Operation(kind, (int(rng.integers(n)),)))
    return Circuit(n, tuple(ops))
