"""Command-line front end: gen, solve, estimate, bench."""

from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import (
    DEFAULT_OMEGA,
    WXL_CONSTANT,
    NonTerminating,
    cost_pxl,
    k_sweep,
    reproduce_table1,
)
from .field import FieldError, make_field
from .macaulay import build_block_macaulay
from .polyring import KOutOfRange, QuadraticSystem, random_system
from .pxl import linearize1, pxl_solve
from .xl import ConfigError, ResourceLimit, SolverConfig, Status, hybrid_solve, xl_solve

EXIT_SOLVED, EXIT_NO_SOLUTION, EXIT_ERROR = 0, 1, 2


def parse_q(text: str):
    """'7', '16', '2^4' or 'GF(256)' -> FieldContext."""
    t = text.strip().upper().removeprefix("GF(").removesuffix(")")
    if "^" in t:
        p, r = (int(x) for x in t.split("^"))
        return make_field(p, r)
    q = int(t)
    if q < 2:
        raise FieldError(f"invalid field order {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    r, rest = 0, q
    while rest % p == 0:
        rest //= p
        r += 1
    if rest != 1:
        raise FieldError(f"{q} is not a prime power")
    return make_field(p, r)


def parse_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def artifact_version() -> str:
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else __version__


def _split_timings(stats: dict) -> tuple[dict, dict]:
    """Separate wall-clock fields so manifests compare equal across runs."""
    timings: dict = {}

    def strip(obj, path):
        if isinstance(obj, dict):
            out = {}
            for k, v in obj.items():
                if isinstance(k, str) and (k.endswith("seconds") or k == "elapsed"):
                    timings[f"{path}{k}"] = v
                else:
                    out[k] = strip(v, f"{path}{k}.")
            return out
        if isinstance(obj, list):
            return [strip(v, f"{path}{i}.") for i, v in enumerate(obj)]
        return obj

    return strip(stats, ""), timings


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Status):
        return x.value
    return str(x)


# -- commands --------------------------------------------------------------------


def cmd_gen(args) -> int:
    ctx = parse_q(args.q)
    if args.planted and args.n > args.m:
        raise ConfigError("planted instances need n <= m")
    sys_ = random_system(ctx, args.n, args.m, np.random.default_rng(args.seed), planted=args.planted)
    if args.planted and not sys_.is_root(sys_.planted):
        raise AssertionError("planted point is not a root")
    text = json.dumps(sys_.to_dict(), indent=1) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_SOLVED


def _int_or_auto(v: str):
    return None if v == "auto" else int(v)


def cmd_solve(args) -> int:
    inst = Path(args.instance)
    sys_ = QuadraticSystem.from_json(inst.read_text())
    algo = args.algo.lower()
    cfg = SolverConfig(algorithm=algo, k=_int_or_auto(args.k), D=_int_or_auto(args.degree), seed=args.seed,
                       jobs=args.jobs, trace=args.trace, max_columns=args.max_columns)
    if algo == "pxl" and cfg.k is not None and not 1 <= cfg.k < sys_.n:
        raise ConfigError(f"PXL requires 1 <= k < n (got k={cfg.k})")
    if algo in ("hxl", "hwxl") and cfg.k is not None and not 1 <= cfg.k < sys_.n:
        raise ConfigError(f"hybrid solvers require 1 <= k < n (got k={cfg.k})")
    t0 = time.perf_counter()
    if algo == "xl":
        out = xl_solve(sys_, cfg)
    elif algo in ("hxl", "hwxl"):
        out = hybrid_solve(sys_, cfg)
    else:
        out = pxl_solve(sys_, cfg)
    total = time.perf_counter() - t0
    stats, timings = _split_timings(out.stats)
    timings["total_seconds"] = total
    manifest = {
        "command": "solve",
        "instance": str(inst),
        "config": cfg.describe() | {"trace": args.trace},
        "seed": args.seed,
        "version": artifact_version(),
        "timings": timings,
        "outcome": {"status": out.status.value, "solution": out.solution, "stats": stats},
    }
    mpath = Path(args.manifest) if args.manifest else inst.with_suffix(".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=1, default=_json_default) + "\n")
    if out.solved:
        print(" ".join(str(v) for v in out.solution))
        return EXIT_SOLVED
    print("NO SOLUTION" if out.status == Status.NO_SOLUTION else f"NO SOLUTION ({out.status.value})")
    return EXIT_NO_SOLUTION


def cmd_estimate(args) -> int:
    if args.table1:
        res = reproduce_table1(omega=args.omega)
        if args.json:
            print(json.dumps({
                "omega": res.omega, "wxl_constant": res.wxl_constant, "exact_matches": res.exact_matches,
                "cells": [vars(c) for c in res.cells],
            }, default=_json_default, indent=1))
        else:
            print(res.to_text())
        return EXIT_SOLVED
    if args.n is None or args.m is None:
        raise ConfigError("--n and --m are required unless --table1 is given")
    q = parse_q(args.q).q
    omega = DEFAULT_OMEGA if args.omega is None else args.omega
    algos = ["hxl", "hwxl", "pxl"] if args.algo == "all" else [args.algo]
    reports = [k_sweep(a, args.n, args.m, q, omega, args.wxl_constant) for a in algos]
    if args.json:
        payload = [json.loads(r.to_json()) for r in reports]
        print(json.dumps(payload[0] if len(payload) == 1 else payload, indent=1))
    else:
        for r in reports:
            print(r.to_text())
            print()
    return EXIT_SOLVED


def bench_point(n: int, q_ctx, seed: int, omega: float = DEFAULT_OMEGA) -> dict:
    """Time Multiply + Linearize(1) on a planted n = m instance with the estimator's k."""
    rep = k_sweep("pxl", n, n, q_ctx.q, omega)
    k = rep.argmin_k
    row = next(r for r in rep.rows if r.k == k)
    sys_ = random_system(q_ctx, n, n, np.random.default_rng(seed + n))
    t0 = time.perf_counter()
    pm = build_block_macaulay(sys_, k, row.D, seed=seed)
    res = linearize1(pm)
    secs = time.perf_counter() - t0
    c = cost_pxl(n, n, q_ctx.q, k, omega, row.D)
    predicted = round(2 ** c.terms["C1"]) + c.exact["C2"] + c.exact["C3"]
    return {"n": n, "k": k, "D": row.D, "seconds": secs, "predicted_ops": predicted,
            "alpha_actual": res.alpha_actual, "alpha_estimate": row.alpha}


def cmd_bench(args) -> int:
    if args.algo != "pxl-front":
        raise ConfigError("only --algo pxl-front is benchmarked")
    ctx = parse_q(args.q)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out)
        w.writerow(["n", "k", "D", "seconds", "predicted_ops"])
        out.flush()
        bench_point(6, ctx, args.seed)  # warm the compiled kernels so the first point is not penalised
        for n in parse_range(args.range):
            p = bench_point(n, ctx, args.seed)
            w.writerow([p["n"], p["k"], p["D"], f"{p['seconds']:.4f}", p["predicted_ops"]])
            out.flush()
            if args.timeout and p["seconds"] > args.timeout:
                print(f"n={n}: {p['seconds']:.1f}s exceeds the per-point timeout; stopping", file=sys.stderr)
                break
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_SOLVED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyxl", description="XL-family solvers for quadratic systems over finite fields")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random quadratic system")
    g.add_argument("--q", required=True, help="field order: 7, 16, 2^4, GF(256)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--planted", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--algo", choices=["xl", "hxl", "hwxl", "pxl"], default="pxl")
    s.add_argument("--k", default="auto")
    s.add_argument("--degree", default="auto")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--trace", default=None, help="JSON-lines trace path (pxl)")
    s.add_argument("--manifest", default=None, help="manifest path (default <instance>.manifest.json)")
    s.add_argument("--max-columns", type=int, default=20000, dest="max_columns")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("estimate", help="complexity estimates and k-sweeps")
    e.add_argument("--q", default="256")
    e.add_argument("--n", type=int)
    e.add_argument("--m", type=int)
    e.add_argument("--algo", choices=["all", "hxl", "hwxl", "pxl"], default="all")
    e.add_argument("--omega", type=float, default=None)
    e.add_argument("--wxl-constant", type=int, default=WXL_CONSTANT, dest="wxl_constant")
    e.add_argument("--table1", action="store_true")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="time Multiply + Linearize(1) over a range of n")
    b.add_argument("--q", default="16")
    b.add_argument("--range", default="13..16")
    b.add_argument("--algo", default="pxl-front")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.add_argument("--timeout", type=float, default=None, help="stop after a point slower than this (s)")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (ConfigError, KOutOfRange, FieldError, ResourceLimit, NonTerminating, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
