"""Box-counting exponent of the layers, compared with the closed form.

Each layer is counted exactly on dyadic grids between its short and long
scales; the exponent is where the best covering cost stops growing with n.
Takes about a minute.

Run: python3 gallery/04_box_counting.py
"""

from torus_recur.exact_core import prepare
from torus_recur.recurrence_geometry import RecurrenceConfig
from torus_recur.dimension_lab import boxcount_estimate, dim_formula

spec, _ = prepare((2, 1, 1, 1))
L = float(spec.log_lambda)

for mult in (0.5, 1.0, 3.0):
    alpha = mult * L
    r = boxcount_estimate(spec, RecurrenceConfig(alpha), (3, 5, 7, 9))
    s0 = dim_formula(alpha, L).s0
    print(f"alpha={mult}L  fitted {r.fittedSlope:.4f}  closed form {s0:.4f}  residual {r.residual:.3f}")
    for lc in r.layers:
        print(f"    n={lc.n}: {len(lc.counts)} box sizes, counts {lc.counts[0]} .. {lc.counts[-1]}")
