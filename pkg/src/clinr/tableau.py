"""Destabilizer/stabilizer tableau simulation with bit-packed integer columns.

Rows 0..n-1 are destabilizers, rows n..2n-1 stabilizers, row 2n is scratch.
Instead of storing rows, each qubit keeps two integers whose bit r is the
x resp. z entry of row r, so single-qubit and controlled-Pauli updates are
O(1) integer operations across all rows at once.  Signs live in one integer
(bit r set = row r carries -1); the usual mod-4 phase bookkeeping of row
products is done bit-parallel with a two-bit counter pair.

This module is the reference simulator: it backs noiseless protocol checks
and the fault-injection oracle that the frame engine is validated against.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Operation
from .pauli import PauliString, commutes


class StabilizerTableau:
    """Mutable stabilizer state of n qubits, initialized to |0...0>."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("tableau needs at least one qubit")
        self.n = n
        # destabilizer i = X_i (bit i), stabilizer i = Z_i (bit n+i)
        self.x_cols = [1 << q for q in range(n)]
        self.z_cols = [1 << (n + q) for q in range(n)]
        self.signs = 0

    # -- row access -------------------------------------------------------

    def row_pauli(self, row: int) -> PauliString:
        x = z = 0
        for q in range(self.n):
            x |= ((self.x_cols[q] >> row) & 1) << q
            z |= ((self.z_cols[q] >> row) & 1) << q
        sign = -1 if (self.signs >> row) & 1 else 1
        return PauliString(self.n, x, z, sign)

    def stabilizers(self) -> list[PauliString]:
        return [self.row_pauli(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row_pauli(i) for i in range(self.n)]

    # -- unitary updates ---------------------------------------------------

    def _h(self, q: int):
        x, z = self.x_cols[q], self.z_cols[q]
        self.signs ^= x & z
        self.x_cols[q], self.z_cols[q] = z, x

    def _s(self, q: int):
        x, z = self.x_cols[q], self.z_cols[q]
        self.signs ^= x & z
        self.z_cols[q] = z ^ x

    def _sdg(self, q: int):
        x, z = self.x_cols[q], self.z_cols[q]
        self.signs ^= x & ~z
        self.z_cols[q] = z ^ x

    def _cx(self, c: int, t: int):
        xc, zc = self.x_cols[c], self.z_cols[c]
        xt, zt = self.x_cols[t], self.z_cols[t]
        self.signs ^= xc & zt & ~(xt ^ zc)
        self.x_cols[t] = xt ^ xc
        self.z_cols[c] = zc ^ zt

    def _cz(self, c: int, t: int):
        xc, zc = self.x_cols[c], self.z_cols[c]
        xt, zt = self.x_cols[t], self.z_cols[t]
        self.signs ^= xc & xt & (zc ^ zt)
        self.z_cols[t] = zt ^ xc
        self.z_cols[c] = zc ^ xt

    def apply_kind(self, kind: str, q0: int, q1: int | None = None, rng=None):
        """Fast-path apply without constructing an Operation."""
        if kind == "H":
            self._h(q0)
        elif kind == "S":
            self._s(q0)
        elif kind == "SDG":
            self._sdg(q0)
        elif kind == "X":
            self.signs ^= self.z_cols[q0]
        elif kind == "Z":
            self.signs ^= self.x_cols[q0]
        elif kind == "Y":
            self.signs ^= self.x_cols[q0] ^ self.z_cols[q0]
        elif kind == "CX":
            self._cx(q0, q1)
        elif kind == "CZ":
            self._cz(q0, q1)
        elif kind == "CY":
            self._sdg(q1)
            self._cx(q0, q1)
            self._s(q1)
        elif kind == "M":
            return self.measure(q0, rng)
        elif kind == "P0":
            out = self.measure(q0, rng)
            if out:
                self.signs ^= self.z_cols[q0]  # X correction
        elif kind == "P+":
            self.apply_kind("P0", q0, rng=rng)
            self._h(q0)
        else:
            raise ValueError(f"unsupported op {kind}")
        return None

    def apply(self, op: Operation, rng: np.random.Generator | None = None) -> int | None:
        """Apply one operation; measurements return the outcome bit."""
        if len(op.qubits) == 2:
            return self.apply_kind(op.kind, op.qubits[0], op.qubits[1], rng)
        return self.apply_kind(op.kind, op.qubits[0], rng=rng)

    def apply_circuit(self, circuit: Circuit, rng: np.random.Generator | None = None):
        for o in circuit.ops:
            self.apply(o, rng)
        return self

    def apply_pauli(self, p: PauliString, positions=None):
        """Multiply a Pauli error into the state (its sign is irrelevant here)."""
        qubits = positions if positions is not None else range(p.n)
        for i, q in enumerate(qubits):
            xb, zb = (p.x >> i) & 1, (p.z >> i) & 1
            if xb and zb:
                self.apply(Operation("Y", (q,)))
            elif xb:
                self.apply(Operation("X", (q,)))
            elif zb:
                self.apply(Operation("Z", (q,)))

    # -- measurement -------------------------------------------------------

    def _rowsum_into(self, mask: int, pivot: int):
        """Row update rows[j] <- rows[j] * rows[pivot] for all j in mask."""
        sp = (self.signs >> pivot) & 1
        hi = self.signs & mask
        if sp:
            hi ^= mask
        lo = 0
        for q in range(self.n):
            xcol, zcol = self.x_cols[q], self.z_cols[q]
            x1 = (xcol >> pivot) & 1
            z1 = (zcol >> pivot) & 1
            if not (x1 or z1):
                continue
            if x1 and z1:
                pos = zcol & ~xcol & mask
                neg = xcol & ~zcol & mask
            elif x1:
                pos = zcol & xcol & mask
                neg = zcol & ~xcol & mask
            else:
                pos = xcol & ~zcol & mask
                neg = xcol & zcol & mask
            hi ^= lo & pos
            lo ^= pos
            hi ^= ~lo & neg
            lo ^= neg
        # Destabilizer-row phases are bookkeeping and may legitimately go
        # imaginary; only stabilizer and scratch rows must stay Hermitian.
        meaningful = (((1 << self.n) - 1) << self.n) | (1 << (2 * self.n))
        if lo & mask & meaningful:
            raise AssertionError("row product phase is imaginary; tableau corrupted")
        self.signs = (self.signs & ~mask) | (hi & mask)
        for q in range(self.n):
            if (self.x_cols[q] >> pivot) & 1:
                self.x_cols[q] ^= mask
            if (self.z_cols[q] >> pivot) & 1:
                self.z_cols[q] ^= mask

    def measure(self, q: int, rng: np.random.Generator | None = None) -> int:
        """Measure Z on qubit q; random outcomes require an rng."""
        n = self.n
        stab_mask = ((1 << n) - 1) << n
        anti = self.x_cols[q] & stab_mask
        if anti:
            if rng is None:
                raise ValueError("random measurement outcome requires an rng")
            pivot = (anti & -anti).bit_length() - 1
            others = (self.x_cols[q] & ~(1 << pivot)) & ((1 << (2 * n)) - 1)
            if others:
                self._rowsum_into(others, pivot)
            # move pivot row to its destabilizer slot, set stabilizer to +/- Z_q
            src, dst = pivot, pivot - n
            for qq in range(n):
                xb = (self.x_cols[qq] >> src) & 1
                zb = (self.z_cols[qq] >> src) & 1
                self.x_cols[qq] = (self.x_cols[qq] & ~(1 << dst)) | (xb << dst)
                self.z_cols[qq] = (self.z_cols[qq] & ~(1 << dst)) | (zb << dst)
                self.x_cols[qq] &= ~(1 << src)
                self.z_cols[qq] &= ~(1 << src)
            sb = (self.signs >> src) & 1
            self.signs = (self.signs & ~(1 << dst)) | (sb << dst)
            outcome = int(rng.integers(0, 2))
            self.z_cols[q] |= 1 << src
            self.signs = (self.signs & ~(1 << src)) | (outcome << src)
            return outcome
        # deterministic: accumulate product of stabilizers into scratch row
        scratch = 1 << (2 * n)
        for qq in range(n):
            self.x_cols[qq] &= ~scratch
            self.z_cols[qq] &= ~scratch
        self.signs &= ~scratch
        for i in range(n):
            if (self.x_cols[q] >> i) & 1:
                self._rowsum_into(scratch, n + i)
        return (self.signs >> (2 * n)) & 1

    # -- group queries -----------------------------------------------------

    def anticommutation_mask(self, p: PauliString) -> int:
        """Bit r set iff row r anticommutes with p (column-parallel)."""
        acc = 0
        for q in range(self.n):
            if (p.x >> q) & 1:
                acc ^= self.z_cols[q]
            if (p.z >> q) & 1:
                acc ^= self.x_cols[q]
        return acc

    def expectation(self, p: PauliString) -> int:
        """<P> for the current state: +1, -1, or 0 if P anticommutes with the group."""
        if p.n != self.n:
            raise ValueError("Pauli width does not match tableau")
        anti = self.anticommutation_mask(p)
        if anti & (((1 << self.n) - 1) << self.n):
            return 0
        acc = PauliString.identity(self.n)
        combo = anti & ((1 << self.n) - 1)
        while combo:
            i = (combo & -combo).bit_length() - 1
            combo &= combo - 1
            acc = acc * self.row_pauli(self.n + i)
        if (acc.x, acc.z) != (p.x, p.z):
            raise AssertionError("commuting Pauli not generated by stabilizer group")
        return 1 if acc.sign == p.sign else -1

    def is_stabilized_by(self, p: PauliString) -> bool:
        return self.expectation(p) == 1


def tableau_apply(tab: StabilizerTableau, op: Operation, rng=None):
    """Functional-style wrapper over :meth:`StabilizerTableau.apply`."""
    tab.apply(op, rng)
    return tab


def tableau_measure(tab: StabilizerTableau, q: int, rng) -> int:
    return tab.measure(q, rng)


def tableau_from_circuit(circuit: Circuit, rng=None) -> StabilizerTableau:
    """Evolve |0...0> through a circuit."""
    tab = StabilizerTableau(circuit.n)
    tab.apply_circuit(circuit, rng)
    return tab


def canonical_generators(paulis: list[PauliString], qubits=None) -> tuple[PauliString, ...]:
    """Canonical (RREF) form of a signed generating set, for group comparison.

    Columns are visited in order (x_q, z_q) over ``qubits`` (default all, in
    index order); rows combine by Pauli multiplication so signs stay exact.
    Two generating sets of the same signed group canonicalize identically.
    """
    if not paulis:
        return ()
    n = paulis[0].n
    if qubits is None:
        qubits = range(n)
    rows = list(paulis)
    pivots: list[tuple[int, PauliString]] = []
    done = 0
    for q in qubits:
        for part in ("x", "z"):
            col = 1 << q
            bit = lambda r: (r.x if part == "x" else r.z) & col
            pivot_idx = next((i for i in range(done, len(rows)) if bit(rows[i])), None)
            if pivot_idx is None:
                continue
            rows[done], rows[pivot_idx] = rows[pivot_idx], rows[done]
            for i in range(len(rows)):
                if i != done and bit(rows[i]):
                    rows[i] = rows[i] * rows[done]
            done += 1
    # drop identity rows (sign must be +1 for a consistent group)
    out = []
    for r in rows:
        if r.x == 0 and r.z == 0:
            if r.sign != 1:
                raise ValueError("generating set contains -identity")
            continue
        out.append(r)
    return tuple(out)


def subsystem_stabilizers(tab: StabilizerTableau, block: tuple[int, ...]) -> tuple[PauliString, ...]:
    """Canonical stabilizers of the reduced state on ``block`` qubits.

    Requires the block to be disentangled from the rest (true at protocol
    output, where all other qubits have been measured or re-prepared); raises
    if fewer than len(block) block-supported generators exist.
    """
    n = tab.n
    others = tuple(q for q in range(n) if q not in block)
    rows = canonical_generators(tab.stabilizers(), qubits=tuple(others) + tuple(block))
    others_mask = 0
    for q in others:
        others_mask |= 1 << q
    supported = [r for r in rows if (r.x | r.z) & others_mask == 0]
    if len(supported) < len(block):
        raise ValueError("block is entangled with the rest of the register")
    restricted = [r.restricted_to(block) for r in supported]
    return canonical_generators(restricted)


def states_equal_on(
    tab1: StabilizerTableau,
    block1: tuple[int, ...],
    tab2: StabilizerTableau,
    block2: tuple[int, ...],
) -> bool:
    """Exact equality of reduced stabilizer states (letters and signs)."""
    return subsystem_stabilizers(tab1, block1) == subsystem_stabilizers(tab2, block2)
