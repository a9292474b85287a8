"""Closed-form dimension as a function of the shrinking rate, plus the covering-sum ratios.

Run: python3 gallery/03_dimension_curve.py [out.csv]
"""

import csv
import sys

import numpy as np

from torus_recur.exact_core import prepare
from torus_recur.recurrence_geometry import RecurrenceConfig
from torus_recur.dimension_lab import dim_curve, dim_formula
from torus_recur.dimension_lab.formula import covering_ratios, predicted_ratios

spec, _ = prepare((2, 1, 1, 1))
L = float(spec.log_lambda)

rows = dim_curve(np.linspace(0.05, 3.0, 60), L)
for f in rows[::6]:
    print(f"alpha={f.alpha:5.2f}  s0={f.s0:.4f}  s1={f.s1:+.4f}  {f.activeBranch}")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "s0", "s1", "branch"])
        w.writerows((f.alpha, f.s0, f.s1, f.activeBranch) for f in rows)
    print("wrote", sys.argv[1])

alpha = L / 2
s = 1.1 * dim_formula(alpha, L).s0
pb, ps = predicted_ratios(L, alpha, s)
print(f"\ncovering sums at alpha=L/2, s={s:.4f}: predicted ratios {float(pb):.6f}, {float(ps):.6f}")
for n, br, sr in covering_ratios(spec, RecurrenceConfig(alpha), s, range(20, 25)):
    print(f"  n={n}  ball {float(br):.9f}  square {float(sr):.9f}")
