"""Command-line interface: sample, run, bounds, sweep, grid.

Every subcommand accepts ``--config file.json`` with individual flags
overriding config values.  Worker count for Monte-Carlo batches is capped by
the CLINR_THREADS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import asymptotic_bound, clinr_bound, cznr_bound, single_stage_bound
from .experiments import (
    CSV_HEADER,
    ExperimentConfig,
    grid_rows,
    run_single,
    sample_circuit_file,
    sweep_rows,
    write_csv,
)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _build_experiment_config(args, base: dict) -> ExperimentConfig:
    cfg = dict(base)
    if getattr(args, "mode", None):
        cfg["mode"] = args.mode
    if getattr(args, "shots", None):
        cfg["shots"] = args.shots
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    noise = dict(cfg.get("noise", {}))
    if getattr(args, "p", None) is not None:
        noise = {"mode": "uniform", "p": args.p}
    if getattr(args, "p2", None) is not None:
        noise = {"mode": "realistic", "p2": args.p2}
    if noise:
        cfg["noise"] = noise
    circuit = dict(cfg.get("circuit", {}))
    if getattr(args, "circuit", None):
        path = args.circuit
        kind = "graph-file" if path.endswith(".graph") else "file"
        circuit = {"kind": kind, "path": path}
    if getattr(args, "random_clifford", None):
        circuit = {"kind": "random-clifford", "n": args.random_clifford,
                   "seed": cfg.get("seed", 0)}
    if circuit:
        cfg["circuit"] = circuit
    proto = dict(cfg.get("protocol", {}))
    for key in ("t", "r", "strategy", "batch_size", "max_restarts", "idle_scope"):
        value = getattr(args, key, None)
        if value is not None:
            proto[key] = value
    if getattr(args, "budget", None) is not None:
        proto["omega_budget"] = args.budget
    if proto:
        cfg["protocol"] = proto
    if getattr(args, "output", None):
        cfg["output"] = args.output
    return ExperimentConfig.from_dict(cfg)


def _int_or_auto(text: str):
    return text if text == "auto" else int(text)


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--shots", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--p", type=float, help="uniform noise rate")
    sub.add_argument("--p2", type=float, help="realistic-mode two-qubit rate")
    sub.add_argument("-o", "--output", help="CSV output path")
    sub.add_argument("--t", type=_int_or_auto)
    sub.add_argument("--r", type=_int_or_auto)
    sub.add_argument("--strategy", choices=("uniform", "bell"))
    sub.add_argument("--batch-size", dest="batch_size", type=int)
    sub.add_argument("--max-restarts", dest="max_restarts", type=int)
    sub.add_argument("--idle-scope", dest="idle_scope", choices=("zone", "register"))
    sub.add_argument("--budget", type=float, help="omega_g budget for auto t")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clinr",
        description="Clifford/CZ noise reduction: circuits, Monte Carlo, bounds",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_sample = subs.add_parser("sample", help="sample a random Clifford circuit file")
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("-o", "--output", required=True)

    p_run = subs.add_parser("run", help="one Monte-Carlo run, row(s) appended to CSV")
    p_run.add_argument("--mode", choices=("direct", "clinr", "cznr"))
    p_run.add_argument("--circuit", help="circuit file (.graph for edge lists)")
    p_run.add_argument("--random-clifford", type=int, metavar="N",
                       help="use a sampled random Clifford on N qubits")
    _add_common(p_run)

    p_bounds = subs.add_parser("bounds", help="evaluate closed-form bounds as JSON")
    p_bounds.add_argument(
        "--family", choices=("clinr", "cznr", "single-stage", "asymptotic"), default="clinr"
    )
    int_list = lambda text: [int(v) for v in text.split(",")]
    float_list = lambda text: [float(v) for v in text.split(",")]
    p_bounds.add_argument("--n", type=int_list, required=True,
                          help="value or comma-separated sweep list")
    p_bounds.add_argument("--s", type=int_list)
    p_bounds.add_argument("--s0", type=int_list)
    p_bounds.add_argument("--t", type=int_list, default=[1])
    p_bounds.add_argument("--r", type=int_list, default=[1])
    p_bounds.add_argument("--p", type=float_list, required=True)
    p_bounds.add_argument("--csv", action="store_true",
                          help="emit CSV rows over the parameter sweep")
    p_bounds.add_argument("-o", "--output")

    p_sweep = subs.add_parser("sweep", help="direct-vs-CliNR sweep over (n, p2)")
    _add_common(p_sweep)
    p_sweep.add_argument("--desk", action="store_true",
                         help="desk profile: 1e4 shots, n capped at 15")

    p_grid = subs.add_parser("grid", help="(n, alpha) shape grid of delta p_log")
    _add_common(p_grid)
    p_grid.add_argument("--desk", action="store_true",
                        help="desk profile: 1e4 shots, n capped at 15")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _evaluate_bound(family, n, s, s0, t, r, p) -> dict:
    if family == "asymptotic":
        if s0 is None:
            raise ValueError("asymptotic bounds need --s0")
        value = asymptotic_bound(n, s0, t, r, p)
        return {"family": family, "value": value, "n": n, "s0": s0, "t": t,
                "r": r, "p": p}
    if s is None:
        raise ValueError("bounds need --s")
    if family == "clinr":
        report = clinr_bound(n, s, t, r, p)
    elif family == "cznr":
        report = cznr_bound(n, s, t, r, p)
    else:
        report = single_stage_bound(n, s, r, p)
    return {"family": family, **report.to_dict()}


def _run_bounds(args) -> int:
    import itertools

    sizes = args.s0 if args.family == "asymptotic" else args.s
    if sizes is None:
        raise ValueError("bounds need --s (or --s0 for the asymptotic family)")
    combos = list(itertools.product(args.n, sizes, args.t, args.r, args.p))
    payloads = []
    for n, size, t, r, p in combos:
        s = None if args.family == "asymptotic" else size
        s0 = size if args.family == "asymptotic" else None
        payloads.append(_evaluate_bound(args.family, n, s, s0, t, r, p))
    if args.csv or len(payloads) > 1:
        keys = sorted({k for pl in payloads for k in pl})
        lines = [",".join(keys)]
        for pl in payloads:
            lines.append(",".join(str(pl.get(k, "")) for k in keys))
        text = "\n".join(lines)
    else:
        text = json.dumps(payloads[0], indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _dispatch(args) -> int:
    if args.command == "sample":
        circuit = sample_circuit_file(args.n, args.seed, args.output)
        print(f"wrote {args.output}: n={circuit.n} s={circuit.size}")
        return 0

    if args.command == "bounds":
        return _run_bounds(args)

    base = _load_config(args.config)
    if getattr(args, "desk", False):
        sweep = dict(base.get("sweep", {}))
        sweep["shots"] = min(int(sweep.get("shots", 10_000)), 10_000)
        if "n" in sweep:
            kept = [n for n in sweep["n"] if n <= 15]
            if len(kept) < len(sweep["n"]):
                print("desk profile: dropping sweep points with n > 15",
                      file=sys.stderr)
            sweep["n"] = kept
        base["sweep"] = sweep
    config = _build_experiment_config(args, base)
    if args.command == "run":
        rows = run_single(config)
    elif args.command == "sweep":
        rows = sweep_rows(config)
    elif args.command == "grid":
        rows = grid_rows(config)
    else:
        raise ValueError(f"unknown command {args.command!r}")

    aborts = sum(r.aborts for r in rows)
    if aborts:
        print(f"warning: {aborts} aborted shots (max_restarts hit)", file=sys.stderr)
    if config.output:
        write_csv(rows, config.output, append=(args.command == "run"))
        print(f"wrote {len(rows)} rows to {config.output}")
    else:
        print(CSV_HEADER)
        for row in rows:
            print(row.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
