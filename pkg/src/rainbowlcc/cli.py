"""Command-line entry point: ``rainbowlcc <subcommand> [options]``.

Exit codes: 0 success, 1 validation failure, 2 I/O or parse error, 3 search
budget exhausted without a required witness, 4 precondition violation.

Every run that writes ``--csv PATH`` also writes ``PATH.manifest.json``;
``rainbowlcc replay PATH.manifest.json`` re-runs it and compares the CSV bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .compress import CompressConfig, compress_one, reference_bound, targets_for
from .errors import ConsistencyError, ContractionError, FormatError, GenerationError, PreconditionError
from .generate import gen_constraint_kernel, gen_hadamard, gen_hadamard_ldc, gen_hypercube_graph
from .gf import BitRow
from .instance import LccInstance, LdcInstance, effective_delta, read_instance, validate_lcc, validate_ldc, write_instance
from .ldc import approx_span, contraction_step, sparse_span, span_size_reference, weight
from .rainbow import (
    DEFAULT_BUDGET,
    Found,
    direct_sum_graph,
    find_rainbow_cycle,
    find_rainbow_even_cover,
    lift_cycle_to_cover,
    read_graph,
    verify_even_cover,
    verify_rainbow_cycle,
    write_graph,
)
from .rng import derive_seed, make_rng

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_BUDGET, EXIT_PRECONDITION = 0, 1, 2, 3, 4

COMPRESS_COLUMNS = ["x_id", "initial_len", "final_len", "rounds", "cycles_found", "budget_spent", "seed"]
LDC_COLUMNS = ["x_id", "w_initial", "steps", "retries_total", "I_size", "verified"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    """Everything needed to regenerate a CSV: the argument vector, the seed and the input digest."""

    subcommand: str
    argv: list[str]
    config: dict
    seed: int
    tool_version: str
    instance_digest: str | None
    csv_sha256: str
    parallel: int
    started: str
    elapsed_s: float

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path: Path) -> RunManifest:
        try:
            return cls(**json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise FormatError(f"{path}: not a run manifest ({exc})") from exc


def manifest_path(csv_path: str | Path) -> Path:
    return Path(str(csv_path) + ".manifest.json")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- output helpers


class Output:
    def __init__(self, args: argparse.Namespace):
        self.quiet = args.quiet
        self.as_json = args.json

    def say(self, text: str) -> None:
        if not self.quiet and not self.as_json:
            print(text)

    def result(self, payload: dict, text: str) -> None:
        if self.as_json:
            print(json.dumps(payload, sort_keys=True, default=_json_default))
        elif not self.quiet:
            print(text)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _csv_bytes(columns: Sequence[str], rows: Sequence[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row[c] for c in columns})
    return buf.getvalue().encode("utf-8")


def _emit_csv(args: argparse.Namespace, columns: Sequence[str], rows: Sequence[dict], started: float,
              instance_path: str | None) -> None:
    if not args.csv:
        return
    data = _csv_bytes(columns, rows)
    path = Path(args.csv)
    try:
        path.write_bytes(data)
        manifest = RunManifest(
            subcommand=args.command if not getattr(args, "ldc_command", None) else f"ldc {args.ldc_command}",
            argv=list(args._argv),
            config={k: v for k, v in sorted(vars(args).items()) if not k.startswith("_") and k != "func"},
            seed=args.seed,
            tool_version=__version__,
            instance_digest=file_digest(instance_path) if instance_path else None,
            csv_sha256=hashlib.sha256(data).hexdigest(),
            parallel=getattr(args, "parallel", 1) or 1,
            started=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
            elapsed_s=round(time.time() - started, 3),
        )
        manifest.write(manifest_path(path))
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _load_instance(path: str):
    try:
        return read_instance(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc


def _require_lcc(inst) -> LccInstance:
    if not isinstance(inst, LccInstance):
        raise PreconditionError("this subcommand needs an LCC instance")
    return inst


def _require_ldc(inst) -> LdcInstance:
    if not isinstance(inst, LdcInstance):
        raise PreconditionError("this subcommand needs an LDC instance")
    return inst


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from exc


# ---------------------------------------------------------------- subcommands


def cmd_gen(args, out: Output) -> int:
    if args.gen_command == "hadamard":
        obj = gen_hadamard(args.k, args.seed, args.delta, args.retries)
    elif args.gen_command == "kernel":
        targets = range(args.n) if args.targets == "all" else [int(t) for t in args.targets.split(",") if t]
        obj = gen_constraint_kernel(args.n, targets, args.per_target, args.seed)
    elif args.gen_command == "hadamard-ldc":
        obj = gen_hadamard_ldc(args.k, args.q)
    else:
        obj = gen_hypercube_graph(args.d)
    try:
        if hasattr(obj, "n_vertices"):
            if args.out:
                write_graph(obj, args.out)
            else:
                print(json.dumps(obj.to_dict(), separators=(",", ":")))
            summary = {"kind": "graph", "n": obj.n_vertices, "edges": len(obj.edges)}
        else:
            if args.out:
                write_instance(obj, args.out)
            else:
                from .instance import instance_to_dict

                print(json.dumps(instance_to_dict(obj), separators=(",", ":")))
            summary = {"kind": type(obj).__name__, "n": obj.n, "k": obj.k, "delta": effective_delta(obj) if obj.matchings else None}
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    if args.out:
        out.result(summary, f"wrote {args.out}: " + ", ".join(f"{k}={v}" for k, v in summary.items()))
    return EXIT_OK


def cmd_validate(args, out: Output) -> int:
    inst = _load_instance(args.instance)
    if isinstance(inst, LccInstance):
        report = validate_lcc(inst, strict=not args.lenient)
    else:
        report = validate_ldc(inst)
    out.result(report.to_dict(), str(report))
    if not report.passed:
        for failure in report.failures():
            print(f"counterexample [{failure.name}]: {json.dumps(failure.counterexample, default=_json_default)}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _outcome_code(outcome) -> int:
    return EXIT_BUDGET if outcome.status == "BudgetExhausted" else EXIT_OK


def cmd_rainbow(args, out: Output) -> int:
    try:
        g = read_graph(args.graph)
    except OSError as exc:
        raise CliError(f"cannot read {args.graph}: {exc}", EXIT_IO) from exc
    outcome = find_rainbow_cycle(g, args.budget)
    payload = {"outcome": outcome.status, "nodes_expanded": outcome.nodes_expanded}
    text = f"{outcome.status} (nodes expanded: {outcome.nodes_expanded})"
    if isinstance(outcome, Found):
        cyc = outcome.witness
        ok = verify_rainbow_cycle(g, cyc)
        payload.update(vertices=list(cyc.vertices), edges=list(cyc.edges), colors=list(cyc.colors), verified=ok)
        text += f"\nlength {cyc.length}: vertices {list(cyc.vertices)} colors {list(cyc.colors)} verified={ok}"
        if not ok:
            raise ConsistencyError("search returned a cycle that fails verification")
    out.result(payload, text)
    return _outcome_code(outcome)


def _instance_matchings(inst) -> dict[int, list[tuple[int, ...]]]:
    return {i: list(m) for i, m in inst.matchings.items() if len(m)}


def cmd_even_cover(args, out: Output) -> int:
    inst = _load_instance(args.instance)
    matchings = _instance_matchings(inst)
    outcome = find_rainbow_even_cover(matchings, args.budget)
    payload = {"outcome": outcome.status, "nodes_expanded": outcome.nodes_expanded}
    text = f"{outcome.status} (nodes expanded: {outcome.nodes_expanded})"
    if isinstance(outcome, Found):
        cover = outcome.witness
        ok = verify_even_cover(cover, matchings)
        payload.update(cover=[[c, list(e)] for c, e in cover.edges], verified=ok)
        text += f"\nsize {cover.size}: " + " ".join(f"{c}:{list(e)}" for c, e in cover.edges) + f" verified={ok}"
    out.result(payload, text)
    return _outcome_code(outcome)


def cmd_direct_sum(args, out: Output) -> int:
    inst = _load_instance(args.instance)
    matchings = _instance_matchings(inst)
    ds = direct_sum_graph(matchings, args.ell, inst.n, args.cap)
    if args.out:
        try:
            write_graph(ds.graph, args.out)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    outcome = find_rainbow_cycle(ds.graph, args.budget)
    payload = {
        "vertices": ds.graph.n_vertices,
        "edges": len(ds.graph.edges),
        "removed": ds.removed,
        "outcome": outcome.status,
        "nodes_expanded": outcome.nodes_expanded,
    }
    text = (f"direct-sum graph: {ds.graph.n_vertices} subsets, {len(ds.graph.edges)} edges kept, "
            f"{ds.removed} removed; {outcome.status}")
    if isinstance(outcome, Found):
        cover = lift_cycle_to_cover(outcome.witness, ds)
        payload.update(cycle_length=outcome.witness.length, cover=[[c, list(e)] for c, e in cover.edges])
        text += f"\ncycle length {outcome.witness.length}; even cover " + " ".join(f"{c}:{list(e)}" for c, e in cover.edges)
    out.result(payload, text)
    return _outcome_code(outcome)


def _compress_cfg(args) -> CompressConfig:
    return CompressConfig(
        p=args.p,
        min_part_size=args.min_part_size,
        budget=args.budget,
        max_rounds=args.max_rounds,
        seed=args.seed,
    )


def _compress_job(job):
    path, x_id, bits, cfg = job
    return compress_one(read_instance(path), x_id, bits, cfg)


def _run_compress_rows(args, inst: LccInstance, xs: list[int], cfg: CompressConfig) -> list[dict]:
    if args.parallel and args.parallel > 1 and len(xs) > 1:
        jobs = [(args.instance, x_id, bits, cfg) for x_id, bits in enumerate(xs)]
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            rows = list(pool.map(_compress_job, jobs, chunksize=max(1, len(jobs) // (4 * args.parallel))))
    else:
        rows = [compress_one(inst, x_id, bits, cfg) for x_id, bits in enumerate(xs)]
    return sorted(rows, key=lambda r: r["x_id"])


def _summary_text(rows: list[dict], inst: LccInstance) -> str:
    finals = [r["final_len"] for r in rows]
    hist: dict[int, int] = {}
    for f in finals:
        hist[f] = hist.get(f, 0) + 1
    bound = reference_bound(inst)
    return (f"{len(rows)} targets; initial max {max(r['initial_len'] for r in rows)}; final max {max(finals)}, "
            f"mean {sum(finals) / len(finals):.3f}; histogram {dict(sorted(hist.items()))}; "
            f"reference delta^-2 log2 n log2 log2 n = {bound:.1f}")


def cmd_compress(args, out: Output) -> int:
    started = time.time()
    inst = _require_lcc(_load_instance(args.instance))
    if args.x is not None:
        try:
            xs = [BitRow.from_hex(args.x, inst.k).bits]
        except ValueError as exc:
            raise CliError(f"bad --x: {exc}", EXIT_IO) from exc
    else:
        xs = targets_for(inst, "sample", args.samples, args.seed)
    rows = _run_compress_rows(args, inst, xs, _compress_cfg(args))
    _emit_csv(args, COMPRESS_COLUMNS, rows, started, args.instance)
    out.result({"rows": rows}, _summary_text(rows, inst))
    return EXIT_OK


def cmd_cover(args, out: Output) -> int:
    started = time.time()
    inst = _require_lcc(_load_instance(args.instance))
    xs = targets_for(inst, args.mode, args.count, args.seed)
    rows = _run_compress_rows(args, inst, xs, _compress_cfg(args))
    _emit_csv(args, COMPRESS_COLUMNS, rows, started, args.instance)
    finals = [r["final_len"] for r in rows]
    out.result(
        {"count": len(rows), "max": max(finals), "mean": sum(finals) / len(finals), "bound": reference_bound(inst)},
        _summary_text(rows, inst),
    )
    return EXIT_OK


def _ldc_targets(args, ldc: LdcInstance) -> list[np.ndarray]:
    if args.x is not None:
        try:
            x = np.array([int(v) for v in args.x.split(",")], dtype=np.int64)
        except ValueError as exc:
            raise CliError(f"bad --x: {exc}", EXIT_IO) from exc
        return [x]
    rng = make_rng(args.seed, "ldc-targets")
    xs = []
    while len(xs) < args.samples:
        x = rng.integers(0, ldc.q, size=ldc.k)
        if x.any():
            xs.append(x)
    return xs


def cmd_ldc(args, out: Output) -> int:
    started = time.time()
    ldc = _require_ldc(_load_instance(args.instance))
    retry = None if args.budget == DEFAULT_BUDGET else args.budget
    rows = []
    for x_id, x in enumerate(_ldc_targets(args, ldc)):
        seed = derive_seed(args.seed, "x", x_id)
        if args.ldc_command == "contract":
            res = contraction_step(ldc, x, seed, retry)
            check = (x + res.g1 * ldc.rows[res.a1] + res.g2 * ldc.rows[res.a2]) % ldc.q
            ok = bool(np.array_equal(check, res.x_new)) and res.weight <= res.target
            rows.append({"x_id": x_id, "w_initial": weight(x), "steps": 1, "retries_total": res.attempts,
                         "I_size": len({res.a1, res.a2}), "verified": ok})
        else:
            span = (sparse_span if args.mode == "exact" else approx_span)(ldc, x, seed, retry)
            y = np.zeros(ldc.k, dtype=np.int64)
            for i, c in span.coeffs.items():
                y = (y + c * ldc.rows[i]) % ldc.q
            dist = weight((x - y) % ldc.q)
            ok = dist == 0 if args.mode == "exact" else dist <= ldc.k // 4
            rows.append({"x_id": x_id, "w_initial": weight(x), "steps": span.steps,
                         "retries_total": span.retries_total, "I_size": len(span.indices), "verified": ok})
    _emit_csv(args, LDC_COLUMNS, rows, started, args.instance)
    ref = span_size_reference(ldc.k, effective_delta(ldc), ldc.q)
    bad = [r["x_id"] for r in rows if not r["verified"]]
    out.result(
        {"rows": rows, "reference_I_size": ref},
        f"{len(rows)} targets; max steps {max(r['steps'] for r in rows)}; max |I| {max(r['I_size'] for r in rows)} "
        f"(reference {ref}); verified {len(rows) - len(bad)}/{len(rows)}",
    )
    return EXIT_INVALID if bad else EXIT_OK


def cmd_bench(args, out: Output) -> int:
    started = time.time()
    rows = []
    for k in range(args.k_min, args.k_max + 1):
        t0 = time.perf_counter()
        inst = gen_hadamard(k, args.seed)
        t1 = time.perf_counter()
        report = validate_lcc(inst)
        t2 = time.perf_counter()
        rows.append({"k": k, "n": inst.n, "delta": str(effective_delta(inst)), "valid": report.passed,
                     "gen_s": round(t1 - t0, 4), "validate_s": round(t2 - t1, 4)})
    _emit_csv(args, ["k", "n", "delta", "valid", "gen_s", "validate_s"], rows, started, None)
    text = "\n".join(f"k={r['k']:2d} n={r['n']:5d} delta={r['delta']:>6} valid={r['valid']} "
                     f"gen {r['gen_s']:.3f}s validate {r['validate_s']:.3f}s" for r in rows)
    out.result({"rows": rows}, text)
    return EXIT_OK if all(r["valid"] for r in rows) else EXIT_INVALID


def cmd_replay(args, out: Output) -> int:
    manifest = RunManifest.read(Path(args.manifest))
    argv = list(manifest.argv)
    if "--csv" not in argv:
        raise CliError("manifest has no --csv argument", EXIT_IO)
    pos = argv.index("--csv") + 1
    original = argv[pos]
    target = args.out or original + ".replay"
    argv[pos] = target
    instance = manifest.config.get("instance")
    if manifest.instance_digest and instance and file_digest(instance) != manifest.instance_digest:
        raise CliError(f"instance {instance} changed since the manifest was written", EXIT_IO)
    if manifest.parallel > 1:
        out.say("note: original run used --parallel; replaying with the same setting")
    code = main(argv + ["--quiet"])
    if code != EXIT_OK:
        return code
    digest = file_digest(target)
    same = digest == manifest.csv_sha256
    out.result({"replayed": target, "identical": same, "sha256": digest},
               f"replayed into {target}: {'identical' if same else 'DIFFERS'} (sha256 {digest[:16]})")
    return EXIT_OK if same else EXIT_INVALID


# ---------------------------------------------------------------- parser


def _global_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="master seed; sub-operations derive their own streams (default 0)")
    g.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help=f"search budget in node expansions, or retry budget for ldc (default {DEFAULT_BUDGET})")
    g.add_argument("--out", default=None, help="output file for generated instances, graphs or replayed CSVs")
    g.add_argument("--csv", default=None, help="write per-target rows to this CSV plus a manifest next to it")
    g.add_argument("--json", action="store_true", help="print machine-readable JSON instead of text")
    g.add_argument("--quiet", action="store_true", help="print nothing on success")
    return parent


def _compress_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="LCC instance JSON file")
    p.add_argument("--p", type=int, default=None, help="number of parts (default ceil(4/delta), clipped)")
    p.add_argument("--min-part-size", type=int, default=8, help="smallest part size (default 8)")
    p.add_argument("--max-rounds", type=int, default=8, help="consecutive failed reseeded steps before stopping (default 8)")
    p.add_argument("--parallel", type=int, default=1, help="worker processes across targets (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(prog="rainbowlcc", description="Rainbow-cycle compression toolkit for linear LCCs and LDCs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate an instance or graph")
    gsub = gen.add_subparsers(dest="gen_command", required=True, metavar="KIND")
    p = gsub.add_parser("hadamard", help="Hadamard code as a 3-LCC", parents=[parent])
    p.add_argument("--k", type=int, required=True, help="message length; n = 2^k")
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 4), help="target matching density (default 1/4)")
    p.add_argument("--retries", type=int, default=32, help="packing attempts (default 32)")
    p = gsub.add_parser("kernel", help="random local checks, code = their null space", parents=[parent])
    p.add_argument("--n", type=int, required=True, help="block length")
    p.add_argument("--targets", default="all", help="'all' or comma-separated target indices (default all)")
    p.add_argument("--per-target", type=int, required=True, help="triples per target")
    p = gsub.add_parser("hadamard-ldc", help="Hadamard 2-LDC over F_q", parents=[parent])
    p.add_argument("--k", type=int, required=True, help="message length; n = q^k")
    p.add_argument("--q", type=int, default=2, help="prime field size (default 2)")
    p = gsub.add_parser("hypercube", help="hypercube graph colored by direction", parents=[parent])
    p.add_argument("--d", type=int, required=True, help="dimension")
    for name, action in gsub.choices.items():
        action.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check an instance file", parents=[parent])
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--lenient", action="store_true", help="do not require a matching for every index")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rainbow", help="search a colored graph for a rainbow cycle", parents=[parent])
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.set_defaults(func=cmd_rainbow)

    p = sub.add_parser("even-cover", help="search an instance's matchings for a rainbow even cover", parents=[parent])
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.set_defaults(func=cmd_even_cover)

    p = sub.add_parser("direct-sum", help="direct-sum graph, rainbow cycle, lifted even cover", parents=[parent])
    p.add_argument("--instance", required=True, help="instance JSON file with even-size hyperedges")
    p.add_argument("--ell", type=int, required=True, help="subset size")
    p.add_argument("--cap", type=int, default=DEFAULT_BUDGET, help=f"limit on subsets and edges (default {DEFAULT_BUDGET})")
    p.set_defaults(func=cmd_direct_sum)

    p = sub.add_parser("compress", help="compress representations of targets", parents=[parent])
    _compress_flags(p)
    p.add_argument("--x", default=None, help="single target as little-endian hex; otherwise sample")
    p.add_argument("--samples", type=int, default=16, help="number of sampled targets (default 16)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("cover", help="covering-radius experiment over all or sampled targets", parents=[parent])
    _compress_flags(p)
    p.add_argument("--mode", choices=["exhaustive", "sample"], default="exhaustive", help="enumerate F_2^k or sample")
    p.add_argument("--count", type=int, default=64, help="sample size in sample mode (default 64)")
    p.set_defaults(func=cmd_cover)

    ldc = sub.add_parser("ldc", help="2-LDC weight contraction experiments")
    lsub = ldc.add_subparsers(dest="ldc_command", required=True, metavar="ACTION")
    for name, text in (("contract", "one contraction step per target"), ("span", "iterate contraction to a span")):
        p = lsub.add_parser(name, help=text, parents=[parent])
        p.add_argument("--instance", required=True, help="LDC instance JSON file")
        p.add_argument("--x", default=None, help="single target as comma-separated residues; otherwise sample")
        p.add_argument("--samples", type=int, default=16, help="number of sampled nonzero targets (default 16)")
        if name == "span":
            p.add_argument("--mode", choices=["exact", "approx"], default="exact", help="exact span or within k/4")
        p.set_defaults(func=cmd_ldc)

    p = sub.add_parser("bench", help="time Hadamard generation and validation", parents=[parent])
    p.add_argument("--k-min", type=int, default=2, help="smallest k (default 2)")
    p.add_argument("--k-max", type=int, default=10, help="largest k (default 10)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-run a manifest and compare CSV bytes", parents=[parent])
    p.add_argument("manifest", help="manifest JSON written next to a CSV")
    p.set_defaults(func=cmd_replay)
    return parser


def iter_parsers(parser: argparse.ArgumentParser, prefix: tuple[str, ...] = ()):
    """Yield ``(path, parser)`` for the parser and every nested subcommand."""
    yield prefix, parser
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, child in action.choices.items():
                yield from iter_parsers(child, prefix + (name,))


def help_selftest(parser: argparse.ArgumentParser | None = None) -> list[str]:
    """Problems found by parsing each subcommand's help text for its own flags (empty when all documented)."""
    parser = parser or build_parser()
    problems = []
    for path, p in iter_parsers(parser):
        text = p.format_help()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                continue
            names = action.option_strings or [action.dest]
            for name in names:
                if name not in text:
                    problems.append(f"{' '.join(path) or 'rainbowlcc'}: {name} missing from help")
            if not action.help:
                problems.append(f"{' '.join(path) or 'rainbowlcc'}: {names[0]} has no description")
    return problems


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._argv = [a for a in argv if a != "--quiet"] if args.command != "replay" else argv
    out = Output(args)
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PreconditionError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ContractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
