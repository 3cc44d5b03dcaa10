"""Command-line frontend.

Subcommands::

    bounds    optimal allocation and scalar bound for one configuration,
              with the sequential baseline and advantage ratio
    table1    full sequential/simultaneous comparison table as CSV
    measure   build a projector set and report its Fisher-information gap
    simulate  Monte-Carlo covariance check, optionally swept over shots

Every output file is accompanied by a ``<name>.manifest.json`` sidecar
recording the exact argument vector, parameters, seed, and tool version;
re-running the recorded argv reproduces the data file byte for byte.
The output directory defaults to $MULTIPHASE_OUTDIR, then the working
directory.  Exit codes: 0 success, 2 usage error, 3 numerical failure,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import optimal_all_pairs, optimal_common, optimal_ring, optimize_numeric
from .costs import cost_all_pairs, cost_common, cost_ring
from .errors import InvariantViolation, NumericalFailure
from .fock import NoonProbe
from .measurement import (
    DEFAULT_EPSILONS,
    build_ghz_set,
    build_hadamard_d3,
    build_humphreys_set,
    extrapolate_cfim,
)
from .montecarlo import SimConfig, default_offsets, run, sweep_shots, variance_scaling_exponent
from .qfim import qfim_noon, restrict
from .strategies import build_report, sequential_bound

USAGE_ERROR = 2
NUMERICAL_ERROR = 3
INVARIANT_ERROR = 4

CSV_SCHEMAS = {
    "bounds": "multiphase.bounds.v1",
    "table1": "multiphase.table1.v1",
    "sweep": "multiphase.sweep.v1",
    "trials": "multiphase.trials.v1",
}


# ---------------------------------------------------------------------------
# serialization

def _format_float(value, sig: int) -> str:
    return format(float(value), f".{sig}g")


def _json_fragment(obj, indent: int = 0) -> str:
    # hand-rolled so floats carry 17 significant digits (round-trip safe)
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json_fragment(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{_json_fragment(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        return _format_float(obj, 17)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_json(path: Path, obj) -> None:
    path.write_text(_json_fragment(obj) + "\n")


def _csv_cell(value, sig: int) -> str:
    if isinstance(value, (float, np.floating, Fraction)):
        return _format_float(value, sig)
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def write_csv(path: Path, schema: str, columns, rows, sig: int = 12) -> None:
    lines = [f"# schema: {schema}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(v, sig) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path: Path, command: str, argv, parameters, seed) -> None:
    manifest = {
        "schema": "multiphase.manifest.v1",
        "command": command,
        "argv": list(argv),
        "parameters": parameters,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_json(path.with_name(path.name + ".manifest.json"), manifest)


def _outdir(args) -> Path:
    base = args.outdir or os.environ.get("MULTIPHASE_OUTDIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _matrix(values) -> list:
    return [[float(x) for x in row] for row in np.atleast_2d(np.asarray(values, dtype=float))]


# ---------------------------------------------------------------------------
# argument handling

def _floats(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _ints(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip()]


def _config_tokens(argv):
    """Expand a --config file into CLI tokens placed before the explicit
    flags, so explicit flags override the file."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    tokens = []
    for raw in Path(known.config).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "config":
            continue
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    # argv[0] is the subcommand; config tokens go right after it
    return argv[:1] + tokens + argv[1:]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiphase",
        description="Precision bounds and optimal measurements for multimode phase estimation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying flag defaults")
    common.add_argument("--outdir", help="output directory (default $MULTIPHASE_OUTDIR or '.')")
    common.add_argument("--output", help="output file name override")
    common.add_argument("--full-precision", action="store_true",
                        help="serialize CSV numbers with 17 significant digits")

    p = sub.add_parser("bounds", parents=[common],
                       help="optimal allocation and bound for one configuration")
    p.add_argument("--d", type=int, required=True, help="number of phases besides the reference")
    p.add_argument("--resource", choices=("classical", "quantum"), default="classical")
    p.add_argument("--energy", type=float, help="mean photon number (classical resource)")
    p.add_argument("--photons", type=int, help="photon number N (quantum resource)")
    p.add_argument("--cost", choices=("common", "ring", "all_pairs"), default="common")
    p.add_argument("--weights", type=_floats,
                   help="comma-separated cost weights (d values for common, d+1 for ring)")
    p.add_argument("--check-numeric", action="store_true",
                   help="cross-check the closed form with the projected-descent optimizer")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("table1", parents=[common],
                       help="sequential vs simultaneous comparison table (E = N = 1)")
    p.add_argument("--d-max", type=int, default=8)

    p = sub.add_parser("measure", parents=[common],
                       help="build a projector set and report the Fisher-information gap")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--photons", type=int, default=1)
    p.add_argument("--set", dest="set_kind", choices=("humphreys", "ghz", "hadamard"),
                   required=True)
    p.add_argument("--eps", type=_floats, default=list(DEFAULT_EPSILONS),
                   help="offset magnitudes for the extrapolation, comma separated")

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte-Carlo covariance check of a probe/measurement pair")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--photons", type=int, default=1)
    p.add_argument("--probe", choices=("ghz", "common"), default="ghz")
    p.add_argument("--set", dest="set_kind", choices=("humphreys", "ghz", "hadamard"),
                   default="ghz")
    p.add_argument("--offsets", type=_floats, help="true offsets in radians, comma separated")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", type=_ints,
                   help="ascending shot counts for a 1/M scaling sweep")
    p.add_argument("--per-trial-csv", action="store_true",
                   help="also write the per-trial estimates")
    return parser


# ---------------------------------------------------------------------------
# subcommands

def _resource_amount(args):
    if args.resource == "classical":
        if args.photons is not None:
            raise ValueError("--photons applies to the quantum resource; use --energy")
        return float(args.energy) if args.energy is not None else 1.0
    if args.energy is not None:
        raise ValueError("--energy applies to the classical resource; use --photons")
    n = args.photons if args.photons is not None else 1
    if n < 1:
        raise ValueError("--photons must be a positive integer")
    return n


def _cmd_bounds(args, argv) -> int:
    amount = _resource_amount(args)
    if args.cost == "common":
        alloc = optimal_common(args.d, 1.0, args.weights)
        cost = cost_common(args.d, args.weights)
    elif args.cost == "ring":
        alloc = optimal_ring(args.d, 1.0, args.weights)
        cost = cost_ring(args.d, args.weights)
    else:
        if args.weights is not None:
            raise ValueError("the all-pairs cost takes no weights")
        alloc = optimal_all_pairs(args.d, 1.0)
        cost = cost_all_pairs(args.d)

    # closed forms computed at unit resource, then rescaled
    scale = amount * amount if args.resource == "quantum" else amount
    energies = alloc.energies * amount
    bound = alloc.achieved_bound / scale
    seq_value, seq_note = sequential_bound(args.d, amount, args.resource, args.cost)

    numeric_block = None
    if args.check_numeric:
        family = "noon" if args.resource == "quantum" else "coherent"
        numeric = optimize_numeric(args.d, amount, cost, probe_family=family)
        numeric_block = {
            "energies": [float(e) for e in numeric.energies],
            "bound": numeric.achieved_bound,
            "iterations": numeric.iterations,
            "relative_gap": abs(numeric.achieved_bound - bound) / bound,
        }

    report = {
        "schema": "multiphase.bounds.v1",
        "d": args.d,
        "resource": args.resource,
        "cost": args.cost,
        "amount": amount,
        "weights": args.weights,
        "energies": [float(e) for e in energies],
        "bound": bound,
        "sequential_bound": float(seq_value),
        "sequential_note": seq_note,
        "advantage_ratio": float(seq_value) / bound,
        "numeric_check": numeric_block,
    }

    path = _outdir(args) / (args.output
                            or f"bounds_d{args.d}_{args.resource}_{args.cost}.{args.format}")
    if args.format == "json":
        write_json(path, report)
    else:
        sig = 17 if args.full_precision else 12
        columns = ("d", "resource", "cost", "amount", "bound", "sequential_bound",
                   "sequential_note", "advantage_ratio", "energies")
        row = (args.d, args.resource, args.cost, amount, bound, float(seq_value), seq_note,
               float(seq_value) / bound,
               ";".join(_format_float(e, sig) for e in energies))
        write_csv(path, CSV_SCHEMAS["bounds"], columns, [row], sig)
    _write_manifest(path, "bounds", argv, report, seed=None)
    print(path)
    return 0


def _cmd_table1(args, argv) -> int:
    report = build_report(args.d_max)
    rows = [
        (row.resource, row.schedule, row.cost, row.d, float(row.total_variance), row.note)
        for row in report.rows
    ]
    path = _outdir(args) / (args.output or f"table1_dmax{args.d_max}.csv")
    write_csv(path, CSV_SCHEMAS["table1"],
              ("resource", "schedule", "cost", "d", "total_variance", "strategy_note"),
              rows, 17 if args.full_precision else 12)
    _write_manifest(path, "table1", argv, {"d_max": args.d_max}, seed=None)
    print(path)
    return 0


def _build_set(set_kind: str, d: int, photons: int):
    if set_kind == "humphreys":
        return build_humphreys_set(d, photons)
    if set_kind == "ghz":
        return build_ghz_set(d, photons)
    if d != 3:
        raise ValueError("the hadamard set exists only for d = 3")
    return build_hadamard_d3(photons)


def _matched_probe(set_kind: str, d: int, photons: int) -> NoonProbe:
    if set_kind == "humphreys":
        return NoonProbe.common_optimal(d, photons)
    return NoonProbe.ghz(d, photons)


def _cmd_measure(args, argv) -> int:
    mset = _build_set(args.set_kind, args.d, args.photons)
    probe = _matched_probe(args.set_kind, args.d, args.photons)
    extrapolated, per_eps = extrapolate_cfim(mset, probe, args.eps)
    target = restrict(qfim_noon(probe), 0).entries

    def gap(matrix):
        return float(np.linalg.norm(matrix - target, "nuc") / np.linalg.norm(target, "nuc"))

    report = {
        "schema": "multiphase.measure.v1",
        "d": args.d,
        "photons": args.photons,
        "set": args.set_kind,
        "probe_weights": [float(w) for w in probe.branch_weights],
        "vectors": _matrix(mset.vectors.real),
        "epsilons": list(args.eps),
        "per_epsilon_gaps": [gap(r.matrix) for r in per_eps],
        "cfim_extrapolated": _matrix(extrapolated),
        "restricted_qfim": _matrix(target),
        "relative_gap_trace_norm": gap(extrapolated),
        "statuses": [r.status for r in per_eps],
    }
    path = _outdir(args) / (args.output
                            or f"measure_d{args.d}_N{args.photons}_{args.set_kind}.json")
    write_json(path, report)
    _write_manifest(path, "measure", argv,
                    {k: report[k] for k in ("d", "photons", "set", "epsilons")}, seed=None)
    print(path)
    return NUMERICAL_ERROR if any(r.status != "ok" for r in per_eps) else 0


def _sim_result_block(result) -> dict:
    return {
        "cost_ratios": {k: float(v) for k, v in result.cost_ratios.items()},
        "empirical_covariance": _matrix(result.empirical_covariance),
        "predicted_covariance": _matrix(result.predicted_covariance),
        "bias": [float(b) for b in result.estimator_bias],
        "outcome_totals": [int(t) for t in result.outcome_totals],
        "mle_failures": result.mle_failures,
        "shots": result.shots_per_trial,
        "status": result.status,
    }


def _cmd_simulate(args, argv) -> int:
    mset = _build_set(args.set_kind, args.d, args.photons)
    if args.probe == "ghz":
        probe = NoonProbe.ghz(args.d, args.photons)
    else:
        probe = NoonProbe.common_optimal(args.d, args.photons)
    offsets = np.asarray(args.offsets if args.offsets else default_offsets(args.d), dtype=float)

    config = SimConfig(probe, mset, offsets, args.shots, args.trials, args.seed)
    result = run(config)

    summary = {
        "schema": "multiphase.simulate.v1",
        "d": args.d,
        "photons": args.photons,
        "probe": args.probe,
        "set": args.set_kind,
        "offsets": [float(o) for o in offsets],
        "shots": args.shots,
        "trials": args.trials,
        "seed": args.seed,
        "result": _sim_result_block(result),
    }
    parameters = {k: summary[k] for k in
                  ("d", "photons", "probe", "set", "offsets", "shots", "trials", "seed")}

    path = _outdir(args) / (args.output
                            or f"simulate_d{args.d}_{args.set_kind}_seed{args.seed}.json")
    sig = 17 if args.full_precision else 12

    sweep_results = []
    if args.sweep:
        sweep_results = sweep_shots(config, args.sweep)
        costs = (("common", cost_common(args.d)), ("ring", cost_ring(args.d)),
                 ("all_pairs", cost_all_pairs(args.d)))
        columns = ["shots"]
        for kind, _ in costs:
            columns += [f"tr_{kind}_empirical", f"tr_{kind}_predicted"]
        rows = []
        for res in sweep_results:
            row = [res.shots_per_trial]
            for _, cost in costs:
                row.append(float(np.trace(cost.matrix @ res.empirical_covariance)))
                row.append(float(np.trace(cost.matrix @ res.predicted_covariance)))
            rows.append(row)
        sweep_path = path.with_name(path.stem + "_sweep.csv")
        write_csv(sweep_path, CSV_SCHEMAS["sweep"], columns, rows, sig)
        _write_manifest(sweep_path, "simulate", argv, parameters, seed=args.seed)
        summary["sweep"] = {
            "shots": list(args.sweep),
            "ring_scaling_exponent": variance_scaling_exponent(
                sweep_results, cost_ring(args.d).matrix),
            "results": [_sim_result_block(r) for r in sweep_results],
        }

    if args.per_trial_csv:
        trial_path = path.with_name(path.stem + "_trials.csv")
        write_csv(trial_path, CSV_SCHEMAS["trials"],
                  ["trial"] + [f"offset_{i + 1}" for i in range(args.d)],
                  [[t] + [float(x) for x in row] for t, row in enumerate(result.estimates)],
                  sig)
        _write_manifest(trial_path, "simulate", argv, parameters, seed=args.seed)

    write_json(path, summary)
    _write_manifest(path, "simulate", argv, parameters, seed=args.seed)
    print(path)
    bad = result.status != "ok" or any(r.status != "ok" for r in sweep_results)
    return NUMERICAL_ERROR if bad else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        merged = _config_tokens(argv)
    except (OSError, ValueError) as exc:
        print(f"error reading config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        args = parser.parse_args(merged)
    except SystemExit as exc:
        return int(exc.code or 0)

    handlers = {
        "bounds": _cmd_bounds,
        "table1": _cmd_table1,
        "measure": _cmd_measure,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args, argv)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return INVARIANT_ERROR
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def entry_point() -> None:
    sys.exit(main())
