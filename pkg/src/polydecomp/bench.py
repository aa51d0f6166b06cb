"""Timing harness: per-stage FDPMP4 timings over a range of ``n`` and kernel comparisons."""

from __future__ import annotations

import time
from statistics import median

import numpy as np

from . import linalg
from .decomposer import fdpmp4
from .errors import DecompositionFailure
from .field import FieldCtx
from .instancegen import GenSpec, gen_decomposable


def loglog_slope(ns, totals) -> float:
    """Least-squares slope of ``log(total)`` against ``log(n)``."""
    if len(ns) < 2:
        return float("nan")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(totals, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def time_instance(ctx: FieldCtx, n: int, seed: int) -> dict:
    f, _, _ = gen_decomposable(GenSpec(ctx, n, seed=seed))
    t0 = time.perf_counter()
    try:
        res = fdpmp4(f, seed=seed)
        stages, verified = res.stage_timings_ms, res.verified
    except DecompositionFailure as exc:
        stages, verified = exc.diagnostics.get("stage_timings_ms", {}), False
    total = (time.perf_counter() - t0) * 1e3
    return {"n": n, "seed": seed, "total_ms": total, "stages_ms": dict(stages), "verified": verified}


def bench_scaling(ns, ctx: FieldCtx, seed: int = 0, reps: int = 1) -> dict:
    """Median FDPMP4 timings for each ``n``; seeds ``seed .. seed+reps-1``."""
    rows = []
    for n in ns:
        runs = [time_instance(ctx, n, seed + r) for r in range(reps)]
        stages = {}
        for name in runs[0]["stages_ms"]:
            stages[name] = median(r["stages_ms"].get(name, 0.0) for r in runs)
        rows.append({
            "n": n,
            "total_ms": median(r["total_ms"] for r in runs),
            "stages_ms": stages,
            "verified": sum(r["verified"] for r in runs),
            "reps": reps,
        })
    return {
        "field": str(ctx),
        "seed": seed,
        "backend": linalg.get_backend(),
        "rows": rows,
        "slope": loglog_slope([r["n"] for r in rows], [r["total_ms"] for r in rows]),
    }


def format_scaling(report: dict) -> str:
    names = []
    for r in report["rows"]:
        for k in r["stages_ms"]:
            if k not in names:
                names.append(k)
    head = ["n", "total_ms", *names, "verified"]
    lines = []
    for r in report["rows"]:
        lines.append([str(r["n"]), f"{r['total_ms']:.1f}",
                      *(f"{r['stages_ms'].get(k, 0.0):.1f}" for k in names), f"{r['verified']}/{r['reps']}"])
    widths = [max(len(x) for x in col) for col in zip(head, *lines)]
    out = ["  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in [head, *lines]]
    out.append(f"log-log slope of total time vs n: {report['slope']:.2f}  "
               f"(field {report['field']}, backend {report['backend']}, seed {report['seed']})")
    return "\n".join(out)


def bench_kernels(shapes=((200, 300), (400, 500)), p: int = 65537, seed: int = 0, reps: int = 3) -> list[dict]:
    """Wall-clock RREF and matmul time of every available kernel on random matrices."""
    ctx = FieldCtx.gf(p)
    rng = np.random.default_rng(seed)
    out = []
    for r, c in shapes:
        a = rng.integers(0, p, size=(r, c), dtype=np.int64)
        b = rng.integers(0, p, size=(c, r), dtype=np.int64)
        row = {"shape": [r, c], "p": p}
        results = {}
        for name in linalg.available_backends():
            with linalg.use_backend(name):
                t_rref = min(_timeit(lambda: linalg.rref_array(ctx, a)) for _ in range(reps))
                t_mm = min(_timeit(lambda: linalg.matmul_array(ctx, a, b)) for _ in range(reps))
                results[name] = (linalg.rref_array(ctx, a)[0], linalg.matmul_array(ctx, a, b))
            row[f"{name}_rref_ms"] = t_rref * 1e3
            row[f"{name}_matmul_ms"] = t_mm * 1e3
        vals = list(results.values())
        row["agree"] = all(np.array_equal(v[0], vals[0][0]) and np.array_equal(v[1], vals[0][1]) for v in vals)
        if "cython" in results:
            row["rref_speedup"] = row["python_rref_ms"] / max(row["cython_rref_ms"], 1e-9)
        out.append(row)
    return out


def format_kernels(rows: list[dict]) -> str:
    lines = []
    for row in rows:
        parts = [f"{row['shape'][0]}x{row['shape'][1]} mod {row['p']}:"]
        for k, v in row.items():
            if k.endswith("_ms"):
                parts.append(f"{k}={v:.1f}")
        if "rref_speedup" in row:
            parts.append(f"rref_speedup={row['rref_speedup']:.2f}x")
        parts.append(f"agree={row['agree']}")
        lines.append(" ".join(parts))
    return "\n".join(lines)


def _timeit(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0

