"""Generate a planted instance and solve it with every pipeline."""
import time

import numpy as np

from polyxl import SolverConfig, hybrid_solve, make_field, pxl_solve, random_system, xl_solve

F = make_field(7)
sys_ = random_system(F, 4, 4, np.random.default_rng(1))
print("planted point:", sys_.planted)

runs = [
    ("xl", lambda: xl_solve(sys_, SolverConfig())),
    ("hxl k=1", lambda: hybrid_solve(sys_, SolverConfig(algorithm="hxl", k=1))),
    ("hwxl k=1", lambda: hybrid_solve(sys_, SolverConfig(algorithm="hwxl", k=1))),
    ("pxl k=1", lambda: pxl_solve(sys_, SolverConfig(algorithm="pxl", k=1))),
]
for name, run in runs:
    t0 = time.perf_counter()
    out = run()
    print(f"{name:>9}: {out.status.value:<10} {out.solution}  ({time.perf_counter() - t0:.2f}s)")
