"""Sign-tracked n-qubit Pauli operators in symplectic (x|z) bit-vector form.

A Pauli operator is stored as two integer bit masks (bit q set means the
operator acts with X resp. Z on qubit q) plus a sign in {+1, -1}.  Y is the
letter with both bits set.  Global phases of i are never stored: products of
anticommuting Paulis drop one factor of i (see :func:`PauliString.__mul__`),
which is safe because detection and frame logic only ever consume the letter
pattern and the +/- sign of Hermitian group elements.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Operation

_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


@dataclass(frozen=True)
class PauliString:
    """A signed Pauli operator on ``n`` qubits.

    Attributes:
        n: Number of qubits.
        x: Integer bit mask of X components.
        z: Integer bit mask of Z components.
        sign: +1 or -1.
    """

    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be nonnegative")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bit mask exceeds qubit count")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliString":
        """Build from a letter string, e.g. ``"XIZ"`` (qubit 0 first)."""
        x = z = 0
        for q, ch in enumerate(label):
            try:
                xb, zb = _LETTERS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(label), x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        """A single-qubit letter embedded in an n-qubit register."""
        xb, zb = _LETTERS[letter]
        return cls(n, xb << qubit, zb << qubit, sign)

    def to_label(self) -> str:
        return "".join(
            _BITS_TO_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in range(self.n)
        )

    def letter(self, qubit: int) -> str:
        return _BITS_TO_LETTER[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    @property
    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.sign == 1

    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(q for q in range(self.n) if (m >> q) & 1)

    def commutes_with(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("cannot multiply Paulis of different lengths")
        # Per-qubit phase bookkeeping: writing each letter as i^(x&z) X^x Z^z,
        # the product P*Q picks up i-powers from Z_P passing X_Q plus the
        # recombination of XZ pairs into letters.  Total exponent mod 4:
        x1, z1, x2, z2 = self.x, self.z, other.x, other.z
        x3, z3 = x1 ^ x2, z1 ^ z2
        # i-exponent = x1&z1 + x2&z2 - x3&z3 + 2*(z1&x2), accumulated per qubit.
        e = (
            bin(x1 & z1).count("1")
            + bin(x2 & z2).count("1")
            - bin(x3 & z3).count("1")
            + 2 * bin(z1 & x2).count("1")
        ) % 4
        # For commuting inputs e is even; an odd e means the true product is
        # +/- i times a Pauli and we drop one i (documented convention).
        sign = self.sign * other.sign * (1 if e // 2 == 0 else -1)
        return PauliString(self.n, x3, z3, sign)

    def restricted_to(self, qubits) -> "PauliString":
        """Letters on the given qubits, re-indexed in their order; sign kept."""
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << i
            z |= ((self.z >> q) & 1) << i
        return PauliString(len(tuple(qubits)), x, z, self.sign)

    def embedded(self, n: int, positions) -> "PauliString":
        """Embed into an n-qubit register, qubit i -> positions[i]."""
        x = z = 0
        for i, q in enumerate(positions):
            x |= ((self.x >> i) & 1) << q
            z |= ((self.z >> i) & 1) << q
        return PauliString(n, x, z, self.sign)

    def __repr__(self):
        s = "+" if self.sign > 0 else "-"
        return f"PauliString({s}{self.to_label()})"


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff the symplectic inner product x_p.z_q + z_p.x_q vanishes mod 2."""
    if p.n != q.n:
        raise ValueError("cannot compare Paulis of different lengths")
    return _parity(p.x & q.z) == _parity(p.z & q.x)


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Operator product p*q (see :meth:`PauliString.__mul__` for the sign rule)."""
    return p * q


# Letter-level conjugation rules U P U^dag for the unitary op alphabet.
# Frame simulators use the same rules on bit masks; signs only matter here.


def conjugate_through(op: Operation, p: PauliString) -> PauliString:
    """Conjugate ``p`` by a unitary operation: returns U p U^dag.

    Supports H, S, SDG, X, Y, Z, CX, CY, CZ.  Preparations and measurements
    are not unitaries and are rejected.
    """
    if not op.is_unitary():
        raise ValueError(f"cannot conjugate through non-unitary op {op.kind}")
    x, z, sign = p.x, p.z, p.sign
    kind = op.kind
    if kind in ("X", "Y", "Z"):
        (q,) = op.qubits
        xb, zb = (x >> q) & 1, (z >> q) & 1
        if kind == "X" and zb:
            sign = -sign
        elif kind == "Z" and xb:
            sign = -sign
        elif kind == "Y" and xb ^ zb:
            sign = -sign
        return PauliString(p.n, x, z, sign)
    if kind == "H":
        (q,) = op.qubits
        b = 1 << q
        xb, zb = x & b, z & b
        if xb and zb:
            sign = -sign
        x = (x & ~b) | (zb and b)
        z = (z & ~b) | (xb and b)
        return PauliString(p.n, x, z, sign)
    if kind == "S":
        (q,) = op.qubits
        b = 1 << q
        if x & b and z & b:  # Y -> -X
            sign = -sign
        z ^= (x & b)
        return PauliString(p.n, x, z, sign)
    if kind == "SDG":
        (q,) = op.qubits
        b = 1 << q
        if (x & b) and not (z & b):  # X -> -Y
            sign = -sign
        z ^= (x & b)
        return PauliString(p.n, x, z, sign)
    if kind == "CX":
        c, t = op.qubits
        bc, bt = 1 << c, 1 << t
        xc, zc = x & bc, z & bc
        xt, zt = x & bt, z & bt
        # sign flips iff X on control, Z on target, and (X on target) == (Z on control)
        if xc and zt and (bool(xt) == bool(zc)):
            sign = -sign
        if xc:
            x ^= bt
        if zt:
            z ^= bc
        return PauliString(p.n, x, z, sign)
    if kind == "CZ":
        c, t = op.qubits
        bc, bt = 1 << c, 1 << t
        if (x & bc) and (x & bt) and (bool(z & bc) != bool(z & bt)):
            sign = -sign
        if x & bc:
            z ^= bt
        if x & bt:
            z ^= bc
        return PauliString(p.n, x, z, sign)
    if kind == "CY":
        # CY = (I x S) CX (I x Sdg) as an operator product.
        c, t = op.qubits
        out = conjugate_through(Operation("SDG", (t,)), p)
        out = conjugate_through(Operation("CX", (c, t)), out)
        return conjugate_through(Operation("S", (t,)), out)
    raise ValueError(f"no conjugation rule for {kind}")


def propagate(circuit, p: PauliString, from_index: int = 0) -> PauliString:
    """Push a Pauli through ops ``from_index ..`` of a Clifford circuit, in order."""
    if not circuit.is_clifford():
        raise ValueError("propagate requires a Clifford (unitary-only) circuit")
    out = p
    for op in circuit.ops[from_index:]:
        out = conjugate_through(op, out)
    return out
