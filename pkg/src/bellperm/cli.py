"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 invalid input (circuit, code or
table file), 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import re
import sys
from pathlib import Path

from . import __version__
from . import bench
from . import circuit as ci
from .ecc import StabilizerCode, get_code
from .exact import ExactCapError, propagate, run_exact
from .gates import GateTables, TableIntegrityError, derive_tables, get_tables
from .metrics import MetricsReport
from .montecarlo import run_monte_carlo
from .noise import NoiseConfig
from .optimize import COST_KINDS, CostFunction, SearchConfig, optimize

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INTERNAL = 0, 2, 3, 4

BUILTIN_CIRCUITS = (
    "single_selection_z", "single_selection_x", "single_selection_y",
    "double_selection_zx", "double_selection_xz", "manual_5to2",
    "hashing_<n>_<k>", "identity_<k>",
)


class InvalidInput(Exception):
    pass


def builtin_circuit(name: str, tables: GateTables) -> ci.Circuit:
    m = re.fullmatch(r"single_selection_([xyz])", name)
    if m:
        return ci.build_single_selection(m.group(1).upper(), tables)
    m = re.fullmatch(r"double_selection_(zx|xz)", name)
    if m:
        return ci.build_double_selection(m.group(1).upper())
    if name == "manual_5to2":
        return ci.build_manual_5to2()
    m = re.fullmatch(r"hashing_(\d+)_(\d+)", name)
    if m:
        return ci.build_truncated_hashing(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"identity_(\d+)", name)
    if m:
        return ci.build_identity(int(m.group(1)))
    raise KeyError(name)


def resolve_circuit(spec: str, tables: GateTables) -> ci.Circuit:
    """A circuit file path or a built-in circuit name."""
    path = Path(spec)
    if path.exists():
        return ci.deserialize(path.read_text(), tables.hash)
    try:
        return builtin_circuit(spec, tables)
    except KeyError:
        raise InvalidInput(f"{spec!r} is neither a circuit file nor a built-in ({', '.join(BUILTIN_CIRCUITS)})")


# Argument types ---------------------------------------------------------------------


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} must be >= 0")
    return v


def _float_list(text: str) -> list[float]:
    try:
        values = [_probability(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str) -> list[int]:
    values = [_positive_int(t) for t in text.split(",") if t.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_noise_flags(p: argparse.ArgumentParser, sweep: bool = False) -> None:
    kind = _float_list if sweep else _probability
    p.add_argument("--f-in", type=kind, default=[0.9] if sweep else 0.9, help="raw-pair fidelity")
    p.add_argument("--p2", type=kind, default=[0.99] if sweep else 0.99, help="two-pair gate success probability")
    p.add_argument("--eta", type=kind, default=None, help="measurement verdict fidelity (default: p2)")
    p.add_argument("--measurement-model", choices=("joint", "local"), default="joint")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tables", default=None, help="gate-table file (default: $BELLPERM_TABLES or derive)")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellperm", description="Bell-pair purification circuits on the Bell-code diagonal.")
    parser.add_argument("--version", action="version", version=f"bellperm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive-tables", help="derive and write the gate tables")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="metrics of one circuit")
    p.add_argument("circuit", help="circuit file or built-in name")
    _add_noise_flags(p)
    _add_common(p)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--exact", action="store_true", help="exact propagation instead of Monte Carlo")
    p.add_argument("--code", default=None, help="five_qubit, eleven_qubit or a code file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--dump-distribution", default=None, help="with --exact: write the full distribution here")

    p = sub.add_parser("optimize", help="genetic search for a circuit")
    _add_noise_flags(p)
    _add_common(p)
    p.add_argument("--cost", choices=COST_KINDS, default="f_out")
    p.add_argument("--code", default=None)
    p.add_argument("--mi-weight", type=float, default=1.0)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--r", type=_positive_int, default=None, help="registers (default k + 2)")
    p.add_argument("--n-max", type=_positive_int, default=None, help="raw pairs (default 2k + 2)")
    p.add_argument("--length-max", type=_nonneg_int, default=12)
    p.add_argument("--population", type=_positive_int, default=100)
    p.add_argument("--generations", type=_nonneg_int, default=200)
    p.add_argument("--patience", type=_positive_int, default=20)
    p.add_argument("--eval-samples", type=_positive_int, default=10_000)
    p.add_argument("--final-samples", type=_positive_int, default=100_000)
    p.add_argument("--all-gates", action="store_true", help="search all 11520 gates, not only good ones")
    p.add_argument("--log", default=None, help="per-generation CSV log")
    p.add_argument("--report", default=None, help="final metrics JSON")

    p = sub.add_parser("benchmark", help="per-gate time versus register size")
    p.add_argument("--sizes", type=_int_list, default=list(bench.DEFAULT_SIZES))
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="evaluate circuits over a noise grid")
    p.add_argument("circuits", nargs="+", help="circuit files or built-in names")
    _add_noise_flags(p, sweep=True)
    _add_common(p)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--code", default=None)
    return parser


# Output helpers ---------------------------------------------------------------------


OUTPUT_ARGS = ("func", "out", "log", "report", "dump_distribution")


def manifest(args: argparse.Namespace, tables: GateTables | None = None, code: StabilizerCode | None = None) -> dict:
    """Everything needed to rerun a command. Deterministic: no timestamps.

    Output destinations are left out so that identical runs written to
    different files produce identical bytes.
    """
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in OUTPUT_ARGS}
    doc = {"command": args.command, "config": cfg, "tool_version": __version__}
    if tables is not None:
        doc["table_hash"] = tables.hash
    if code is not None:
        doc["code"] = {"name": code.name, "fingerprint": code.fingerprint()}
    return doc


def _emit(text: str, out: str | None, man: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    if man is not None:
        side = dict(man, created=datetime.datetime.now(datetime.timezone.utc).isoformat())
        Path(out + ".manifest.json").write_text(json.dumps(side, indent=1, sort_keys=True) + "\n")


def _csv_text(fieldnames, rows, man_ref: str | None) -> str:
    buf = io.StringIO()
    if man_ref:
        buf.write(f"# manifest: {man_ref}\n")
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _noise(f_in, p2, eta, model) -> NoiseConfig:
    return NoiseConfig(f_in=f_in, p2=p2, eta=eta, measurement_model=model)


def _load_code(spec: str | None) -> StabilizerCode | None:
    if spec is None:
        return None
    try:
        return get_code(spec)
    except ValueError as exc:
        raise InvalidInput(str(exc))


def _evaluate(c, noise, args, tables, code) -> MetricsReport:
    if args.exact:
        return run_exact(c, noise, tables, code=code)
    return run_monte_carlo(c, noise, args.samples, args.seed, tables, code=code, threads=args.threads)


# Commands ---------------------------------------------------------------------------


def cmd_derive_tables(args) -> int:
    tables = derive_tables()
    tables.save(args.out)
    counts = tables.counts()
    print(f"wrote {args.out}: sha256 {tables.hash}; " + ", ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    tables = get_tables(args.tables)
    c = resolve_circuit(args.circuit, tables)
    code = _load_code(args.code)
    noise = _noise(args.f_in, args.p2, args.eta, args.measurement_model)
    rep = _evaluate(c, noise, args, tables, code)
    man = manifest(args, tables, code)
    if args.dump_distribution:
        if not args.exact:
            raise InvalidInput("--dump-distribution needs --exact")
        Path(args.dump_distribution).write_text(propagate(c, noise, tables).distribution().to_text())
    if args.format == "json":
        doc = dict(rep.to_dict(), manifest=man)
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        ref = Path(args.out).name + ".manifest.json" if args.out else None
        text = _csv_text(MetricsReport.CSV_FIELDS, [rep.csv_row()], ref)
    _emit(text, args.out, man)
    return EXIT_OK


def cmd_optimize(args) -> int:
    tables = get_tables(args.tables)
    code = _load_code(args.code)
    if args.cost.startswith("f_l") and code is None:
        raise _Usage(f"--cost {args.cost} needs --code")
    if code is not None and args.k != code.n_phys:
        raise _Usage(f"--k {args.k} does not match {code.name} (needs {code.n_phys} output pairs)")
    r = args.r or args.k + 2
    n_max = args.n_max or 2 * args.k + 2
    try:
        cfg = SearchConfig(
            k=args.k, r=r, max_n=n_max, max_length=args.length_max, population_size=args.population,
            max_generations=args.generations, patience=args.patience, eval_samples=args.eval_samples,
            final_eval_samples=args.final_samples, seed=args.seed, good_gates_only=not args.all_gates,
            threads=args.threads,
        )
    except ValueError as exc:
        raise _Usage(str(exc))
    noise = _noise(args.f_in, args.p2, args.eta, args.measurement_model)
    res = optimize(cfg, noise, CostFunction(args.cost, code, args.mi_weight), tables)
    man = manifest(args, tables, code)
    _emit(ci.serialize(res.circuit, tables.hash), args.out, man)
    if args.log:
        res.log.write_csv(args.log)
    if args.report:
        Path(args.report).write_text(json.dumps(dict(res.report.to_dict(), search_cost=res.cost, manifest=man),
                                                indent=1, sort_keys=True) + "\n")
    print(f"best cost {res.cost:.6f}; final f_out {res.report.f_out:.6f}; "
          f"n={res.circuit.n} length={res.circuit.length}", file=sys.stderr)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if len(args.sizes) < 2:
        raise _Usage("--sizes needs at least two entries")
    rows = bench.run_benchmark(args.sizes, args.reps)
    fields = ["n", "diagonal_cython_ns", "diagonal_python_ns", "tableau_ns"]
    text = _csv_text(fields, [{f: getattr(r, f) for f in fields} for r in rows], None)
    _emit(text, args.out)
    print(f"diagonal ratio {bench.ratio([r.diagonal_cython_ns or r.diagonal_python_ns for r in rows]):.2f}x, "
          f"tableau ratio {bench.ratio([r.tableau_ns for r in rows]):.1f}x", file=sys.stderr)
    return EXIT_OK


SWEEP_METRICS = ("p_success", "f_out", "f_a", "f_l", "f_l_decoder", "mutual_info")
SWEEP_FIELDS = ("circuit", "f_in", "p2", "eta", "metric", "value", "stderr", "samples", "error")


def cmd_sweep(args) -> int:
    tables = get_tables(args.tables)
    code = _load_code(args.code)
    etas = args.eta if args.eta is not None else [None]
    rows = []
    for spec in args.circuits:
        try:
            c = resolve_circuit(spec, tables)
        except (InvalidInput, ci.CircuitFormatError, ValueError) as exc:
            rows.append(dict(circuit=spec, error=str(exc)))
            continue
        for f_in in args.f_in:
            for p2 in args.p2:
                for eta in etas:
                    base = dict(circuit=spec, f_in=f_in, p2=p2, eta=p2 if eta is None else eta)
                    try:
                        rep = _evaluate(c, _noise(f_in, p2, eta, args.measurement_model), args, tables, code)
                    except (ValueError, ExactCapError) as exc:
                        rows.append(dict(base, error=str(exc)))
                        continue
                    for metric in SWEEP_METRICS:
                        value = getattr(rep, metric)
                        if value is None or (isinstance(value, float) and math.isnan(value)):
                            continue
                        se = getattr(rep, metric + "_se", None)
                        rows.append(dict(base, metric=metric, value=value,
                                         stderr=None if rep.exact else se,
                                         samples="exact" if rep.exact else rep.sample_count, error=""))
    man = manifest(args, tables, code)
    ref = Path(args.out).name + ".manifest.json" if args.out else None
    _emit(_csv_text(SWEEP_FIELDS, rows, ref), args.out, man)
    return EXIT_OK


class _Usage(Exception):
    pass


COMMANDS = {
    "derive-tables": cmd_derive_tables,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "benchmark": cmd_benchmark,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"bellperm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TableIntegrityError as exc:
        print(f"bellperm: table integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ci.CircuitValidationError as exc:
        print(f"bellperm: invalid circuit:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidInput, ci.CircuitFormatError, ExactCapError, ValueError, OSError) as exc:
        print(f"bellperm: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AssertionError as exc:
        print(f"bellperm: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
