"""Circuit IR: typed operations over indexed qubits, text serialization, scheduling.

The operation alphabet is preparations (``P0`` -> |0>, ``P+`` -> |+>),
single-qubit Clifford unitaries (H, S, SDG, X, Y, Z), controlled-Paulis
(CX, CY, CZ, control first) and single-qubit measurement (``M``).

Text format (one item per line, UTF-8)::

    qubits <n>
    H 0
    CX 0 1       # control 0, target 1
    M 1

``#`` starts a comment, blank lines are ignored.  parse/serialize round-trip
bit-exactly on normalized files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PREP_KINDS = ("P0", "P+")
UNITARY_1Q_KINDS = ("H", "S", "SDG", "X", "Y", "Z")
TWO_QUBIT_KINDS = ("CX", "CY", "CZ")
MEASURE_KIND = "M"
ALL_KINDS = PREP_KINDS + UNITARY_1Q_KINDS + TWO_QUBIT_KINDS + (MEASURE_KIND,)


class CircuitParseError(ValueError):
    """Raised on malformed circuit text; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Operation:
    """One typed operation: a kind plus 1 or 2 qubit indices (control first)."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown operation kind {self.kind!r}")
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} requires two distinct qubits")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be nonnegative")

    def is_unitary(self) -> bool:
        return self.kind in UNITARY_1Q_KINDS or self.kind in TWO_QUBIT_KINDS

    def is_prep(self) -> bool:
        return self.kind in PREP_KINDS

    def is_measure(self) -> bool:
        return self.kind == MEASURE_KIND

    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS


def op(kind: str, *qubits: int) -> Operation:
    """Shorthand constructor: ``op("CX", 0, 1)``."""
    return Operation(kind, tuple(qubits))


@dataclass(frozen=True)
class Circuit:
    """An ordered operation list over an n-qubit register; size s = len(ops)."""

    n: int
    ops: tuple[Operation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("circuit needs at least one qubit")
        object.__setattr__(self, "ops", tuple(self.ops))
        for o in self.ops:
            if max(o.qubits) >= self.n:
                raise ValueError(
                    f"operation {o.kind} {o.qubits} exceeds register of {self.n} qubits"
                )

    @property
    def size(self) -> int:
        return len(self.ops)

    def is_clifford(self) -> bool:
        """True iff the circuit is unitary-only (no preparations or measurements)."""
        return all(o.is_unitary() for o in self.ops)

    def touched_qubits(self) -> set[int]:
        out: set[int] = set()
        for o in self.ops:
            out.update(o.qubits)
        return out

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.n, self.ops + other.ops)


def parse_circuit(text: str) -> Circuit:
    """Parse the line format into a Circuit, reporting errors with line numbers."""
    n = None
    ops: list[Operation] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "qubits" or len(fields) != 2:
                raise CircuitParseError(line_no, "expected header 'qubits <n>'")
            try:
                n = int(fields[1])
            except ValueError:
                raise CircuitParseError(line_no, f"bad qubit count {fields[1]!r}")
            if n < 1:
                raise CircuitParseError(line_no, "qubit count must be positive")
            continue
        kind = fields[0]
        if kind not in ALL_KINDS:
            raise CircuitParseError(line_no, f"unknown mnemonic {kind!r}")
        arity = 2 if kind in TWO_QUBIT_KINDS else 1
        if len(fields) - 1 != arity:
            raise CircuitParseError(
                line_no, f"{kind} takes {arity} qubit(s), got {len(fields) - 1}"
            )
        try:
            qubits = tuple(int(f) for f in fields[1:])
        except ValueError:
            raise CircuitParseError(line_no, f"bad qubit index in {line!r}")
        if any(q < 0 or q >= n for q in qubits):
            raise CircuitParseError(line_no, f"qubit index out of range 0..{n - 1}")
        try:
            ops.append(Operation(kind, qubits))
        except ValueError as exc:
            raise CircuitParseError(line_no, str(exc))
    if n is None:
        raise CircuitParseError(1, "missing 'qubits <n>' header")
    return Circuit(n, tuple(ops))


def serialize_circuit(circuit: Circuit) -> str:
    """Normalized text form; parse(serialize(c)) == c and bytes are stable."""
    lines = [f"qubits {circuit.n}"]
    for o in circuit.ops:
        lines.append(" ".join([o.kind, *map(str, o.qubits)]))
    return "\n".join(lines) + "\n"


def schedule_layers(circuit: Circuit) -> list[list[int]]:
    """Greedy as-soon-as-possible layering.

    Returns a list of layers, each a list of indices into ``circuit.ops``.
    Ops within a layer act on disjoint qubits and per-qubit op order is
    preserved; depth is at most s and at least the max per-qubit op count.
    """
    ready_at = [0] * circuit.n
    layers: list[list[int]] = []
    for idx, o in enumerate(circuit.ops):
        layer = max(ready_at[q] for q in o.qubits)
        if layer == len(layers):
            layers.append([])
        layers[layer].append(idx)
        for q in o.qubits:
            ready_at[q] = layer + 1
    return layers


def split_circuit(circuit: Circuit, t: int) -> list[Circuit]:
    """Split into t consecutive parts with sizes ceil(s/t) then ceil(s/t)-1.

    With s0 = ceil(s/t): if t divides s every part has size s0; otherwise the
    first s mod t parts have size s0 and the rest s0 - 1.  Parts may be empty
    when t > s.  Concatenating the parts reproduces the circuit.
    """
    if t < 1:
        raise ValueError("part count t must be >= 1")
    s = circuit.size
    s0 = -(-s // t)  # ceil
    rem = s % t
    sizes = [s0] * t if rem == 0 else [s0] * rem + [s0 - 1] * (t - rem)
    parts = []
    pos = 0
    for size in sizes:
        parts.append(Circuit(circuit.n, circuit.ops[pos : pos + size]))
        pos += size
    return parts
