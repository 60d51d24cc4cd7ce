"""Print the k-sweep for n = m = 80 over GF(2^8) and the reference-table calibration."""
from polyxl.estimator import WXL_CONSTANT, k_sweep, reproduce_table1

for algo in ("hxl", "hwxl", "pxl"):
    rep = k_sweep(algo, 80, 80, 256, wxl_constant=WXL_CONSTANT)
    print(f"{algo:>4}: min log2 {rep.min_log2:.2f} at k={rep.argmin_k}")

print()
print(reproduce_table1().to_text())
