"""Compare the compiled and pure-Python elimination kernels.

Runs the raw RREF/matmul comparison on random matrices, then the FDPMP4
scaling sweep under each available backend.

    python3 benchmarks/bench_kernels.py [--n 6..10] [--json out.json]
"""

import argparse
import json

from polydecomp import linalg
from polydecomp.bench import bench_kernels, bench_scaling, format_kernels, format_scaling
from polydecomp.field import FieldCtx


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="6..10")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="write the full report here")
    args = ap.parse_args()
    lo, hi = (int(x) for x in args.n.split(".."))

    report = {"kernels": bench_kernels(seed=args.seed), "scaling": {}}
    print(format_kernels(report["kernels"]))
    for name in linalg.available_backends():
        with linalg.use_backend(name):
            rep = bench_scaling(range(lo, hi + 1), FieldCtx.gf(65537), seed=args.seed)
        report["scaling"][name] = rep
        print()
        print(format_scaling(rep))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=1)


if __name__ == "__main__":
    main()
