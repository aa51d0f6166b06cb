"""``polydecomp`` command line: gen, decompose, verify, stats, bench.

Exit codes: 0 success/verified, 2 decomposition failure (or a triple that
does not compose), 1 usage or input error.  Logs go to stderr; with
``--json`` stdout carries exactly one JSON document.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench, linalg, oracles
from .decomposer import decompose_homogeneous, decompose_underdetermined, fdpmp4, verify
from .errors import DecompositionFailure, PolyDecompError
from .field import FieldCtx
from .instancegen import GenSpec, dump, gen_2r_keypair, gen_decomposable, gen_rank_deficient, load, serialize

log = logging.getLogger("polydecomp")

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _field(text: str) -> FieldCtx:
    try:
        return FieldCtx.parse(text)
    except (ValueError, PolyDecompError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _n_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}; use 6..12 or 5,6,7") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--out", type=Path, help="write the result file here")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="polydecomp", description="Decompose quartic polynomial systems f = g o h.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a decomposable instance (.psys.json)")
    g.add_argument("--field", type=_field, default=FieldCtx.gf(65537))
    g.add_argument("--n", type=_positive, required=True)
    g.add_argument("--u", type=_positive)
    g.add_argument("--seed", type=_nonneg, default=0)
    g.add_argument("--homogeneous", action="store_true")
    g.add_argument("--kind", choices=["decomposable", "rank-deficient", "2r"], default="decomposable")
    g.add_argument("--k", type=_positive, help="span dimension for --kind rank-deficient")
    g.add_argument("--d-g", type=_positive, default=2)
    g.add_argument("--d-h", type=_positive, default=2)
    g.add_argument("--witness", action="store_true", help="also write g and h next to --out")

    d = sub.add_parser("decompose", parents=[common], help="decompose a .psys.json system")
    d.add_argument("input", type=Path)
    d.add_argument("--seed", type=_nonneg, default=0)
    d.add_argument("--d", type=_nonneg, help="multiplier degree for u < n systems")
    d.add_argument("--method", choices=["auto", "fdpmp4", "homogeneous", "underdetermined"], default="auto")

    v = sub.add_parser("verify", parents=[common], help="check that g o h = f")
    v.add_argument("f", type=Path)
    v.add_argument("g", type=Path)
    v.add_argument("h", type=Path)

    s = sub.add_parser("stats", parents=[common], help="run a Monte Carlo campaign (.report.json)")
    s.add_argument("--campaign", choices=sorted(oracles.CAMPAIGNS), default="conjy")
    s.add_argument("--field", type=_field, default=FieldCtx.gf(65537))
    s.add_argument("--n", type=_positive, default=5)
    s.add_argument("--trials", type=_positive, default=100)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--d", type=_positive, default=1, help="d' for the power campaign")
    s.add_argument("--d-h", type=_positive, default=3, help="form degree for the power campaign")
    s.add_argument("--override", action="store_true", help="run power outside its hypotheses")
    s.add_argument("--workers", type=_positive, default=1)

    b = sub.add_parser("bench", parents=[common], help="time FDPMP4 over a range of n")
    b.add_argument("--field", type=_field, default=FieldCtx.gf(65537))
    b.add_argument("--n", type=_n_range, default=list(range(6, 13)), help="e.g. 6..12 or 5,7,9")
    b.add_argument("--seed", type=_nonneg, default=0)
    b.add_argument("--trials", type=_positive, default=1, help="repetitions per n (median reported)")
    b.add_argument("--backend", choices=["cython", "python"], help="elimination kernel to use")
    b.add_argument("--kernels", action="store_true", help="also compare the available kernels")
    return p


# -- output helpers --------------------------------------------------------------------

def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        json.dump(payload, sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    else:
        print(text)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    log.info("wrote %s", path)


def _witness_path(out: Path, tag: str) -> Path:
    name = out.name
    stem = name[: -len(".psys.json")] if name.endswith(".psys.json") else out.stem
    return out.with_name(f"{stem}.{tag}.psys.json")


# -- subcommands -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    ctx = args.field
    if args.kind == "2r":
        key = gen_2r_keypair(ctx, args.n, args.seed)
        f, g, h = key.public, key.outer, key.inner
    else:
        spec = GenSpec(ctx, args.n, args.u, args.homogeneous, args.d_g, args.d_h, args.seed)
        if args.kind == "rank-deficient":
            if args.k is None:
                raise UsageError("--kind rank-deficient needs --k")
            f, g, h = gen_rank_deficient(spec, args.k)
        else:
            f, g, h = gen_decomposable(spec)
    files = {}
    if args.out:
        dump(f, args.out)
        files["f"] = str(args.out)
        if args.witness:
            for tag, sys_ in (("g", g), ("h", h)):
                path = _witness_path(args.out, tag)
                dump(sys_, path)
                files[tag] = str(path)
    elif args.witness:
        raise UsageError("--witness needs --out")
    payload = {"seed": args.seed, "field": str(ctx), "n": args.n, "kind": args.kind, "files": files}
    if not args.out:
        payload["f"] = f.to_json()
    if files:
        text = "\n".join([f"seed: {args.seed}", *(f"{k}: {v}" for k, v in files.items())])
    else:
        text = serialize(f).decode()
        log.info("seed %d", args.seed)
    _emit(args, payload, text)
    return EXIT_OK


def _run_decompose(f, args):
    method = args.method
    u, n = len(f), f.nvars
    if method == "auto":
        if u < n:
            method = "underdetermined"
        elif f.is_homogeneous(4):
            method = "homogeneous"
        else:
            method = "fdpmp4"
    if method == "underdetermined":
        return decompose_underdetermined(f, 1 if args.d is None else args.d, seed=args.seed)
    if method == "homogeneous":
        return decompose_homogeneous(f, seed=args.seed)
    return fdpmp4(f, seed=args.seed)


def cmd_decompose(args) -> int:
    f = load(args.input)
    try:
        res = _run_decompose(f, args)
    except DecompositionFailure as exc:
        payload = {"verified": False, "seed": args.seed, "input": str(args.input), "stage": exc.stage,
                   "error": str(exc), "diagnostics": _jsonable(exc.diagnostics)}
        if args.out:
            _write_json(args.out, payload)
        _emit(args, payload, f"FAILURE at stage {exc.stage}: {exc} (seed {args.seed})")
        return EXIT_FAILURE
    payload = res.to_json()
    payload["seed"] = args.seed
    payload["input"] = str(args.input)
    if args.out:
        _write_json(args.out, payload)
    lines = [f"verified: {res.verified} (method {res.method}, seed {args.seed})",
             f"factor space dim {res.factor_space_dim}, padding {res.padding_used}, "
             f"conjecture1_held {res.conjecture1_held}"]
    lines += [f"h{i} = {p}" for i, p in enumerate(res.h)]
    lines += [f"g{i} = {p}" for i, p in enumerate(res.g)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if res.verified else EXIT_FAILURE


def cmd_verify(args) -> int:
    f, g, h = load(args.f), load(args.g), load(args.h)
    if not (f.ctx == g.ctx == h.ctx):
        raise UsageError("f, g and h must share a field")
    if g.nvars != len(h) or h.nvars != f.nvars:
        raise UsageError(f"arity mismatch: g takes {g.nvars} inputs, h has {len(h)} components")
    v = verify(f, g, h)
    payload = {"equal": v.equal, "degree_proper": v.degree_proper}
    _emit(args, payload, f"equal: {v.equal}\ndegree_proper: {v.degree_proper}")
    return EXIT_OK if v.equal else EXIT_FAILURE


def cmd_stats(args) -> int:
    report = oracles.run_campaign(
        args.campaign, n=args.n, ctx=args.field, trials=args.trials, seed=args.seed,
        workers=args.workers, d_h=args.d_h, d_prime=args.d, override=args.override,
    )
    payload = report.to_json()
    if args.out:
        _write_json(args.out, payload)
    _emit(args, payload, report.table())
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.backend:
        linalg.set_backend(args.backend)
    report = bench.bench_scaling(args.n, args.field, seed=args.seed, reps=args.trials)
    text = bench.format_scaling(report)
    if args.kernels:
        report["kernels"] = bench.bench_kernels(seed=args.seed)
        text += "\n" + bench.format_kernels(report["kernels"])
    if args.out:
        _write_json(args.out, report)
    _emit(args, report, text)
    return EXIT_OK


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=str))


COMMANDS = {"gen": cmd_gen, "decompose": cmd_decompose, "verify": cmd_verify, "stats": cmd_stats, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"polydecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"polydecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PolyDecompError, ValueError, OSError) as exc:
        print(f"polydecomp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
