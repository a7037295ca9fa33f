"""Command-line entry point: ``idforge <subcommand> ...``.

Exit codes: 0 success / pass / found / satisfiable, 1 fail / none /
unsatisfiable, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .algebra import ResourceLimitError
from .encoder import ModelError, decode, encode, export_dimacs, load_cnf, parse_model, solve_instance
from .identities import (
    ColoringParseError,
    enumerate_identities,
    equivalent,
    j_identities,
    parse_coloring,
    realizes,
)
from .sampler import CellConflictError, sampler_report
from .statement import StatementParams, dump_witness, load_witness, search_witness, verify_witness

SCHEMA_VERSION = 1
MAX_R = 5


class UsageError(Exception):
    pass


def _emit(args, payload: dict, table: str) -> None:
    if args.format == "json":
        payload = {"schemaVersion": SCHEMA_VERSION, **payload}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(table.rstrip("\n") + "\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("ID_FORGE_THREADS", "1")
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"ID_FORGE_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("thread count must be at least 1")
    return n


def _load_params(path: str) -> StatementParams:
    try:
        return StatementParams.from_json(json.loads(_read(path)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad parameter file {path}: {exc}") from None


def cmd_identities(args) -> int:
    if not 2 <= args.r <= MAX_R:
        raise UsageError(f"--r must lie in 2..{MAX_R}")
    depth = args.r if args.depth is None else args.depth
    if args.mode == "j":
        if depth < 1 or 2**depth < args.r or depth > 8:
            raise UsageError(f"--depth must satisfy 2^depth >= r and depth <= 8")
        found = j_identities(args.r, depth)
    else:
        found = enumerate_identities(args.r)
    lines = [f"{len(found)} identities (r={args.r}, mode={args.mode}"
             + (f", depth={depth})" if args.mode == "j" else ")")]
    lines += [f"  {ident}" for ident in found]
    payload = {"r": args.r, "mode": args.mode, "count": len(found),
               "identities": [str(i) for i in found]}
    if args.mode == "j":
        payload["depth"] = depth
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_check(args) -> int:
    try:
        a = parse_coloring(_read(args.a))
        b = parse_coloring(_read(args.b))
    except ColoringParseError as exc:
        raise UsageError(str(exc)) from None
    ab, ba = realizes(a, b), realizes(b, a)
    eq = ab and ba
    table = f"A realizes B: {ab}\nB realizes A: {ba}\nequivalent:   {eq}"
    _emit(args, {"aRealizesB": ab, "bRealizesA": ba, "equivalent": eq}, table)
    return 0


def _load_witness_file(path: str):
    try:
        return load_witness(_read(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad witness file {path}: {exc}") from None


def cmd_verify(args) -> int:
    params, witness = _load_witness_file(args.witness)
    report = verify_witness(params, witness)
    _emit(args, {"report": report.to_json()}, report.to_table())
    return 0 if report.passed else 1


def cmd_search(args) -> int:
    params = _load_params(args.params)
    found = search_witness(params, args.budget, workers=_threads(args))
    if found is None:
        _emit(args, {"found": False, "witness": None},
              f"no witness with at most {args.budget} generators")
        return 1
    text = dump_witness(params, found)
    if args.out:
        _write(args.out, text)
    payload = {"found": True, "witness": json.loads(text)}
    _emit(args, payload, "witness found\n" + ("" if args.out else text))
    return 0


def cmd_sample(args) -> int:
    params, witness = _load_witness_file(args.witness)
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    subset = tuple(int(v) for v in args.subset.split(",")) if args.subset else None
    if subset is not None and (len(subset) != params.r or len(set(subset)) != params.r
                               or not all(0 <= v < params.kappa for v in subset)):
        raise UsageError(f"--subset needs {params.r} distinct vertices below {params.kappa}")
    if args.level is not None and args.level not in params.levels:
        raise UsageError(f"--level must lie in 1..{params.lam}")
    report = verify_witness(params, witness)
    if not report.condition_passed("C3") or not report.structural_ok:
        raise UsageError("witness fails C1-C3; level colorings are undefined")
    out = sampler_report(params, witness, args.trials, args.seed, subset, args.level)
    lines = [f"{'pair':<8}{'colors':<20}stabilizedAt"]
    for row in out["pairs"]:
        w = f"{row['w'][0]},{row['w'][1]}"
        lines.append(f"{w:<8}{str(row['colors']):<20}{row['stabilizedAt']}")
    real = out["realization"]
    if real:
        lines.append(
            f"\nrealization on P={real['P']} at L={real['L']}: freq={real['freq']:.4f} "
            f"exact={real['exact']:.4f} (trials={real['trials']}, seed={real['seed']})"
        )
    out.pop("schemaVersion")
    _emit(args, out, "\n".join(lines))
    return 0


def cmd_encode(args) -> int:
    params = _load_params(args.params)
    cnf = encode(params, args.budget, pool=args.pool)
    _write(args.out, export_dimacs(cnf))
    _emit(args, {"variables": cnf.num_vars, "clauses": len(cnf.clauses), "out": args.out},
          f"wrote {args.out}: {cnf.num_vars} variables, {len(cnf.clauses)} clauses")
    return 0


def cmd_solve(args) -> int:
    try:
        cnf = load_cnf(_read(args.cnf))
    except ValueError as exc:
        raise UsageError(f"bad CNF file {args.cnf}: {exc}") from None
    model = solve_instance(cnf)
    if model is None:
        if args.out:
            _write(args.out, "s UNSATISFIABLE\n")
        _emit(args, {"satisfiable": False}, "UNSATISFIABLE")
        return 1
    line = " ".join(map(str, model)) + " 0\n"
    if args.out:
        _write(args.out, line)
    _emit(args, {"satisfiable": True, "model": model}, "SATISFIABLE" + ("" if args.out else "\n" + line))
    return 0


def cmd_decode(args) -> int:
    try:
        cnf = load_cnf(_read(args.cnf))
        model = parse_model(_read(args.model))
        witness = decode(model, cnf)
    except ModelError as exc:
        _emit(args, {"decoded": False, "error": str(exc)}, f"decode failed: {exc}")
        return 1
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = dump_witness(cnf.params, witness)
    if args.out:
        _write(args.out, text)
    report = verify_witness(cnf.params, witness)
    payload = {"decoded": True, "witness": json.loads(text), "report": report.to_json()}
    _emit(args, payload, report.to_table())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table",
                        help="output format (default: %(default)s)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap; falls back to $ID_FORGE_THREADS, then 1")

    parser = argparse.ArgumentParser(prog="idforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("identities", parents=[common], formatter_class=fmt,
                       help="list identities of a given size")
    p.add_argument("--r", type=int, required=True, help="identity size (2..5)")
    p.add_argument("--mode", choices=("all", "j"), default="all",
                   help="all identities, or those realized by the binary-tree meet coloring")
    p.add_argument("--depth", type=int, default=None, help="branch length for --mode j (default: r)")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("check", parents=[common], formatter_class=fmt,
                       help="realization between two coloring files")
    p.add_argument("a", help="coloring file A (lines 'i j c')")
    p.add_argument("b", help="coloring file B")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", parents=[common], formatter_class=fmt, help="check C1-C5 for a witness")
    p.add_argument("witness", help="witness JSON file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", parents=[common], formatter_class=fmt,
                       help="exhaustive witness search on tiny parameters")
    p.add_argument("params", help="parameter JSON file (identity, kappa, lambda, g, f)")
    p.add_argument("--budget", type=int, default=2, help="maximum number of generators")
    p.add_argument("--out", help="write the witness JSON here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sample", parents=[common], formatter_class=fmt,
                       help="sample level colorings at random points")
    p.add_argument("witness", help="witness JSON file")
    p.add_argument("--trials", type=int, default=10000, help="number of sampled points")
    p.add_argument("--seed", type=int, required=True, help="RNG seed (required)")
    p.add_argument("--subset", help="comma-separated r-subset P (default: 0..r-1)")
    p.add_argument("--level", type=int, help="level L for the realization estimate (default: lambda)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("encode", parents=[common], formatter_class=fmt, help="write the DIMACS encoding")
    p.add_argument("params", help="parameter JSON file")
    p.add_argument("--budget", type=int, default=2, help="maximum number of generators")
    p.add_argument("--out", required=True, help="DIMACS output path")
    p.add_argument("--pool", choices=("slot", "term-tuple"), default="slot",
                   help="propositional variable pool layout")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", parents=[common], formatter_class=fmt,
                       help="run the built-in DPLL solver on an exported CNF")
    p.add_argument("cnf", help="DIMACS file written by 'encode'")
    p.add_argument("--out", help="write the model line here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decode", parents=[common], formatter_class=fmt,
                       help="decode a solver model into a witness and verify it")
    p.add_argument("cnf", help="DIMACS file written by 'encode' (carries the variable legend)")
    p.add_argument("model", help="model file: space-separated literals, or 'v' lines")
    p.add_argument("--out", help="write the witness JSON here")
    p.set_defaults(func=cmd_decode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads(args)
        return args.func(args)
    except (UsageError, ResourceLimitError, CellConflictError) as exc:
        print(f"idforge {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
