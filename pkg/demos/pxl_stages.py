"""Look inside PXL: block matrix sizes, the partial elimination and one residual system."""
import numpy as np

from polyxl import linearize1, make_field, random_system
from polyxl.estimator import alpha_estimate
from polyxl.macaulay import build_block_macaulay
from polyxl.pxl import fix, linearize2, pxl_degree

F = make_field(2, 4)
n, k = 6, 1
sys_ = random_system(F, n, n, np.random.default_rng(4))
D = pxl_degree(n, n, k)
pm = build_block_macaulay(sys_, k, D, seed=0)
print(f"n={n} k={k} D={D}: {pm.row_count()} rows over {len(pm.columns)} columns in F_16[x1]")
print("block structure violations:", pm.check_block_structure())

res = linearize1(pm)
print("constant-block ranks per degree:", res.ranks)
print(f"alpha: measured {res.alpha_actual}, estimated {alpha_estimate(n, n, k, D)}")

guess = [sys_.planted[0]]
M = fix(res, guess)
l2 = linearize2(F, M, res.residual_columns)
print(f"guess x1={guess[0]}: residual {M.shape}, rank {l2.echelon.rank}, "
      f"{len(l2.univariate)} univariate rows")
