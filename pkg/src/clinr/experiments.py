"""Experiment orchestration: runs, sweeps, grids, and CSV persistence.

Reproducibility contract: (config, master seed) determines every output byte.
Each unit of work gets a sub-seed derived by hashing its coordinates
(mode, n, p2, alpha, circuit index) with the master seed; the sub-seed is
recorded in its CSV row for audit.  Rows are emitted in a fixed nested order
regardless of how the work is scheduled.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from .bounds import choose_t_by_estimate, two_qubit_fraction
from .circuit import Circuit, parse_circuit, serialize_circuit
from .cliffords import (
    sample_clifford,
    sample_gate_sequence,
    synthesize,
)
from .clinr_protocol import ClinrParams, run_clinr
from .cznr_protocol import graph_to_circuit, parse_graph, run_cznr
from .framesim import RunStats, child_rng, run_direct, wilson_interval
from .noise import NoiseModel

CSV_HEADER = (
    "mode,n,alpha,s,t,r,p2,p1,shots,seed,circuit_idx,plog,ci_lo,ci_hi,"
    "mean_ops,omega_g,restart_rate,aborts"
)

AGGREGATE_IDX = -1


def subseed(master: int, *coords) -> int:
    """64-bit sub-seed from hashed coordinates; stable across runs/platforms."""
    text = ":".join([str(master), *map(str, coords)])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ResultRow:
    mode: str
    n: int
    alpha: float | None
    s: int
    t: int | None
    r: int | None
    p2: float
    p1: float
    shots: int
    seed: int
    circuit_idx: int
    plog: float
    ci_lo: float
    ci_hi: float
    mean_ops: float
    omega_g: float
    restart_rate: float
    aborts: int

    def to_csv(self) -> str:
        return ",".join(
            _fmt(v)
            for v in (
                self.mode,
                self.n,
                self.alpha,
                self.s,
                self.t,
                self.r,
                self.p2,
                self.p1,
                self.shots,
                self.seed,
                self.circuit_idx,
                self.plog,
                self.ci_lo,
                self.ci_hi,
                self.mean_ops,
                self.omega_g,
                self.restart_rate,
                self.aborts,
            )
        )


def write_csv(rows, path: str, append: bool = False):
    new_file = not (append and os.path.exists(path))
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8", newline="") as fh:
        if new_file:
            fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv() + "\n")


def _check_keys(cfg: dict, allowed: set[str], where: str):
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown {where} config keys: {sorted(unknown)}")


@dataclass(frozen=True)
class ProtocolConfig:
    """t/r may be explicit integers or "auto" (budgeted t, r = floor(log2(s/n)))."""

    t: int | str = "auto"
    r: int | str = "auto"
    strategy: str = "bell"
    batch_size: int = 1000
    max_restarts: int = 10_000
    idle_scope: str = "zone"
    omega_budget: float = 2.0

    @classmethod
    def from_dict(cls, cfg: dict) -> "ProtocolConfig":
        _check_keys(
            cfg,
            {"t", "r", "strategy", "batch_size", "max_restarts", "idle_scope",
             "omega_budget"},
            "protocol",
        )
        return cls(**cfg)

    def resolve(self, circuit: Circuit, model: NoiseModel, kind: str) -> ClinrParams:
        n, s = circuit.n, circuit.size
        if isinstance(self.r, str):
            if self.r != "auto":
                raise ValueError(f"bad r value {self.r!r}")
            r = max(1, math.floor(math.log2(s / n))) if s > n else 1
        else:
            r = self.r
        if isinstance(self.t, str):
            if self.t != "auto":
                raise ValueError(f"bad t value {self.t!r}")
            strategy = self.strategy if kind == "clinr" else "uniform"
            t = choose_t_by_estimate(
                n, s, r, model, two_qubit_fraction(circuit), self.omega_budget,
                strategy, kind,
            )
        else:
            t = self.t
        return ClinrParams(
            t=t,
            r=r,
            strategy=self.strategy if kind == "clinr" else "uniform",
            batch_size=self.batch_size,
            max_restarts=self.max_restarts,
            idle_scope=self.idle_scope,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "direct"
    noise: dict = field(default_factory=lambda: {"mode": "uniform", "p": 1e-3})
    circuit: dict = field(default_factory=dict)
    shots: int = 10_000
    seed: int = 0
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    sweep: dict = field(default_factory=dict)
    output: str | None = None

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentConfig":
        _check_keys(
            cfg,
            {"mode", "noise", "circuit", "shots", "seed", "protocol", "sweep",
             "output"},
            "top-level",
        )
        out = dict(cfg)
        if "protocol" in out:
            out["protocol"] = ProtocolConfig.from_dict(out["protocol"])
        if "noise" in out:
            NoiseModel.from_dict(out["noise"])  # validate keys early
        if "sweep" in out:
            _check_keys(
                out["sweep"],
                {"n", "p2", "alpha", "circuits_per_point", "shots"},
                "sweep",
            )
        if "circuit" in out:
            _check_keys(
                out["circuit"], {"kind", "path", "n", "alpha", "s", "seed"}, "circuit"
            )
        obj = cls(**out)
        if obj.shots < 1:
            raise ValueError("shots must be >= 1")
        if obj.mode not in ("direct", "clinr", "cznr"):
            raise ValueError(f"unknown mode {obj.mode!r}")
        return obj

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def model(self) -> NoiseModel:
        return NoiseModel.from_dict(self.noise)


def load_circuit(spec: dict) -> Circuit:
    kind = spec.get("kind")
    if kind == "file":
        with open(spec["path"], encoding="utf-8") as fh:
            return parse_circuit(fh.read())
    if kind == "graph-file":
        with open(spec["path"], encoding="utf-8") as fh:
            return graph_to_circuit(parse_graph(fh.read()))
    if kind == "random-clifford":
        rng = child_rng(int(spec.get("seed", 0)), 0xC11F)
        return synthesize(sample_clifford(int(spec["n"]), rng))
    if kind == "random-sequence":
        n = int(spec["n"])
        if "s" in spec:
            s = int(spec["s"])
        else:
            s = round(n ** float(spec["alpha"]))
        rng = child_rng(int(spec.get("seed", 0)), 0x5E9)
        return sample_gate_sequence(n, s, rng)
    raise ValueError(f"unknown circuit kind {kind!r}")


def _run_mode(
    mode: str,
    circuit: Circuit,
    model: NoiseModel,
    proto: ProtocolConfig,
    shots: int,
    seed: int,
) -> tuple[RunStats, ClinrParams | None]:
    if mode == "direct":
        return (
            run_direct(circuit, model, shots, seed, idle_scope=proto.idle_scope),
            None,
        )
    params = proto.resolve(circuit, model, mode)
    if mode == "clinr":
        return run_clinr(circuit, params, model, shots, seed), params
    if mode == "cznr":
        return run_cznr(circuit, params, model, shots, seed), params
    raise ValueError(f"unknown mode {mode!r}")


def _row(
    mode, circuit, model, stats: RunStats, params, seed, circuit_idx, alpha=None
) -> ResultRow:
    return ResultRow(
        mode=mode,
        n=circuit.n,
        alpha=alpha,
        s=circuit.size,
        t=params.t if params else None,
        r=params.r if params else None,
        p2=model.p2,
        p1=model.p1,
        shots=stats.shots,
        seed=seed,
        circuit_idx=circuit_idx,
        plog=stats.p_log,
        ci_lo=stats.ci_lo,
        ci_hi=stats.ci_hi,
        mean_ops=stats.mean_ops,
        omega_g=stats.mean_ops / circuit.size if circuit.size else 0.0,
        restart_rate=stats.restarts / stats.shots,
        aborts=stats.aborts,
    )


def run_single(config: ExperimentConfig) -> list[ResultRow]:
    """One (mode, circuit, noise) run; the `run` subcommand."""
    circuit = load_circuit(config.circuit)
    model = config.model()
    seed = subseed(config.seed, config.mode, circuit.n, model.p2, "single", 0)
    stats, params = _run_mode(
        config.mode, circuit, model, config.protocol, config.shots, seed
    )
    alpha = config.circuit.get("alpha") if config.circuit else None
    return [_row(config.mode, circuit, model, stats, params, seed, 0, alpha)]


def _aggregate(rows: list[ResultRow], mode, n, alpha, model, master_seed) -> ResultRow:
    shots = sum(r.shots for r in rows)
    failures = round(sum(r.plog * (r.shots - r.aborts) for r in rows))
    completed = sum(r.shots - r.aborts for r in rows)
    plog = failures / completed
    lo, hi = wilson_interval(failures, completed)
    mean_s = sum(r.s for r in rows) / len(rows)
    mean_ops = sum(r.mean_ops for r in rows) / len(rows)
    return ResultRow(
        mode=mode,
        n=n,
        alpha=alpha,
        s=round(mean_s),
        t=rows[0].t,
        r=rows[0].r,
        p2=model.p2,
        p1=model.p1,
        shots=shots,
        seed=master_seed,
        circuit_idx=AGGREGATE_IDX,
        plog=plog,
        ci_lo=lo,
        ci_hi=hi,
        mean_ops=mean_ops,
        omega_g=mean_ops / mean_s if mean_s else 0.0,
        restart_rate=sum(r.restart_rate * r.shots for r in rows) / shots,
        aborts=sum(r.aborts for r in rows),
    )


def sweep_rows(config: ExperimentConfig) -> list[ResultRow]:
    """Direct-vs-CliNR sweep over (n, p2) on random Clifford circuits."""
    sw = config.sweep
    ns = sw.get("n")
    p2s = sw.get("p2")
    if not ns or not p2s:
        raise ValueError("sweep needs non-empty 'n' and 'p2' axes")
    per_point = int(sw.get("circuits_per_point", 10))
    # full profile: 1e5 shots per mode; the CLI --desk flag caps this at 1e4
    shots = int(sw.get("shots", 100_000))
    rows: list[ResultRow] = []
    for n in ns:
        circuits = []
        for ci in range(per_point):
            rng = child_rng(subseed(config.seed, "circuit", n, ci))
            circuits.append(synthesize(sample_clifford(int(n), rng)))
        for p2 in p2s:
            base = dict(config.noise) if config.noise.get("mode") == "realistic" else {
                "mode": "realistic"
            }
            base["p2"] = p2
            model = NoiseModel.from_dict(base)
            for mode in ("direct", "clinr"):
                mode_rows = []
                for ci, circuit in enumerate(circuits):
                    seed = subseed(config.seed, mode, n, p2, ci)
                    stats, params = _run_mode(
                        mode, circuit, model, config.protocol, shots, seed
                    )
                    mode_rows.append(
                        _row(mode, circuit, model, stats, params, seed, ci)
                    )
                rows.extend(mode_rows)
                rows.append(
                    _aggregate(mode_rows, mode, int(n), None, model, config.seed)
                )
    return rows


def grid_rows(config: ExperimentConfig) -> list[ResultRow]:
    """Shape grid over (n, alpha) with s = round(n^alpha) random gate sequences."""
    sw = config.sweep
    ns = sw.get("n")
    alphas = sw.get("alpha")
    if not ns or not alphas:
        raise ValueError("grid needs non-empty 'n' and 'alpha' axes")
    p2s = sw.get("p2") or [config.model().p2]
    if len(p2s) != 1:
        raise ValueError("grid wants a single p2 value")
    per_point = int(sw.get("circuits_per_point", 5))
    shots = int(sw.get("shots", 100_000))
    model = NoiseModel.from_dict({"mode": "realistic", "p2": p2s[0]})
    rows: list[ResultRow] = []
    for n in ns:
        for alpha in alphas:
            s = max(1, round(int(n) ** float(alpha)))
            circuits = []
            for ci in range(per_point):
                rng = child_rng(subseed(config.seed, "seq", n, alpha, ci))
                circuits.append(sample_gate_sequence(int(n), s, rng))
            per_mode: dict[str, ResultRow] = {}
            for mode in ("direct", "clinr"):
                mode_rows = []
                for ci, circuit in enumerate(circuits):
                    seed = subseed(config.seed, mode, n, alpha, ci)
                    stats, params = _run_mode(
                        mode, circuit, model, config.protocol, shots, seed
                    )
                    mode_rows.append(
                        _row(mode, circuit, model, stats, params, seed, ci, float(alpha))
                    )
                rows.extend(mode_rows)
                agg = _aggregate(
                    mode_rows, mode, int(n), float(alpha), model, config.seed
                )
                per_mode[mode] = agg
                rows.append(agg)
            d, c = per_mode["direct"], per_mode["clinr"]
            delta = d.plog - c.plog
            half = math.sqrt(
                ((d.ci_hi - d.ci_lo) / 2) ** 2 + ((c.ci_hi - c.ci_lo) / 2) ** 2
            )
            rows.append(
                ResultRow(
                    mode="delta",
                    n=int(n),
                    alpha=float(alpha),
                    s=s,
                    t=c.t,
                    r=c.r,
                    p2=model.p2,
                    p1=model.p1,
                    shots=d.shots + c.shots,
                    seed=config.seed,
                    circuit_idx=AGGREGATE_IDX,
                    plog=delta,
                    ci_lo=delta - half,
                    ci_hi=delta + half,
                    mean_ops=c.mean_ops,
                    omega_g=c.omega_g,
                    restart_rate=c.restart_rate,
                    aborts=d.aborts + c.aborts,
                )
            )
    return rows


def sample_circuit_file(n: int, seed: int, path: str) -> Circuit:
    """The `sample` subcommand: synthesize a random Clifford to a file."""
    if n < 1:
        raise ValueError("n must be >= 1")
    circuit = synthesize(sample_clifford(n, child_rng(seed, 0xC11F)))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_circuit(circuit))
    return circuit
