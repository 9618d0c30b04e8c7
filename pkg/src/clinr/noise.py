"""Circuit-level stochastic Pauli noise.

Fault placement convention: every fault follows the operation it is attached
to.  Single-qubit operations (preparations included) suffer X, Y or Z with
probability p1/3 each; two-qubit operations suffer one of the 15 non-identity
two-qubit Paulis with probability p2/15 each; measurement outcomes flip with
probability p_meas; each idle qubit in a layer suffers X, Y or Z with
probability p_idle/3 each.  Faults at distinct locations are independent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Operation
from .pauli import PauliString

_LETTERS_1Q = ("X", "Y", "Z")
# all 15 non-identity letter pairs on (control, target)
_LETTERS_2Q = tuple(
    p for p in itertools.product("IXYZ", repeat=2) if p != ("I", "I")
)

_MODES = ("uniform", "realistic")


@dataclass(frozen=True)
class NoiseModel:
    """Per-operation-class fault rates.

    ``uniform(p)`` gives every operation the same rate p and noiseless idling;
    ``realistic(p2)`` uses p1 = p_meas = p_idle = p2/10 for single-qubit
    operations, measurements and idle steps.
    """

    p1: float
    p2: float
    p_meas: float
    p_idle: float

    def __post_init__(self):
        for name in ("p1", "p2", "p_meas", "p_idle"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @classmethod
    def uniform(cls, p: float) -> "NoiseModel":
        return cls(p1=p, p2=p, p_meas=p, p_idle=0.0)

    @classmethod
    def realistic(cls, p2: float) -> "NoiseModel":
        return cls(p1=p2 / 10, p2=p2, p_meas=p2 / 10, p_idle=p2 / 10)

    @classmethod
    def from_dict(cls, cfg: dict) -> "NoiseModel":
        """Build from JSON-style keys; explicit keys override mode defaults.

        Keys: ``mode`` ("uniform" | "realistic"), ``p`` (uniform base rate),
        ``p2`` (realistic base rate), plus optional overrides ``p1``,
        ``p_meas``, ``p_idle``.  Unknown keys are rejected.
        """
        known = {"mode", "p", "p2", "p1", "p_meas", "p_idle"}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown noise config keys: {sorted(unknown)}")
        mode = cfg.get("mode", "uniform")
        if mode not in _MODES:
            raise ValueError(f"noise mode must be one of {_MODES}, got {mode!r}")
        if mode == "uniform":
            if "p" not in cfg:
                raise ValueError("uniform noise needs key 'p'")
            model = cls.uniform(float(cfg["p"]))
        else:
            if "p2" not in cfg:
                raise ValueError("realistic noise needs key 'p2'")
            model = cls.realistic(float(cfg["p2"]))
        overrides = {
            k: float(cfg[k]) for k in ("p1", "p_meas", "p_idle") if k in cfg
        }
        if mode == "uniform" and "p2" in cfg:
            overrides["p2"] = float(cfg["p2"])
        return replace(model, **overrides) if overrides else model

    def rate_for(self, op: Operation) -> float:
        if op.is_two_qubit():
            return self.p2
        if op.is_measure():
            return self.p_meas
        return self.p1

    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_meas == self.p_idle == 0.0


def sample_fault(op: Operation, model: NoiseModel, rng: np.random.Generator):
    """Sample the fault following one operation.

    Returns None (no fault), True (measurement outcome flip), or a
    PauliString on the op's support (qubit order = op.qubits).
    """
    if op.is_measure():
        return True if rng.random() < model.p_meas else None
    if op.is_two_qubit():
        if rng.random() >= model.p2:
            return None
        lc, lt = _LETTERS_2Q[int(rng.integers(15))]
        return PauliString.from_label(lc + lt)
    if rng.random() >= model.p1:
        return None
    return PauliString.from_label(_LETTERS_1Q[int(rng.integers(3))])


def sample_idle_faults(
    active_qubits,
    total_qubits,
    model: NoiseModel,
    rng: np.random.Generator,
) -> list[tuple[int, str]]:
    """Idle faults for one layer: every non-active qubit of ``total_qubits``
    independently suffers X/Y/Z with probability p_idle/3 each."""
    if model.p_idle == 0.0:
        return []
    active = set(active_qubits)
    out = []
    for q in total_qubits:
        if q in active:
            continue
        if rng.random() < model.p_idle:
            out.append((q, _LETTERS_1Q[int(rng.integers(3))]))
    return out
