"""Riesz energies of the layer measures: bounded below the dimension, growing above it.

Run: python3 gallery/05_energies.py   (about a minute)
"""

from torus_recur.exact_core import prepare
from torus_recur.recurrence_geometry import RecurrenceConfig
from torus_recur.dimension_lab import dim_formula, riesz_energy_1d, riesz_energy_2d

spec, _ = prepare((2, 1, 1, 1))
L = float(spec.log_lambda)
alpha = L / 2
f = dim_formula(alpha, L)

for factor in (0.9, 1.2):
    s = factor * f.s0
    print(f"planar, alpha=L/2, s={s:.3f} ({factor} x s0)")
    for n in (5, 7, 9):
        e = riesz_energy_2d(spec, RecurrenceConfig(alpha), n, s, pairs=2_000_000)
        print(f"   n={n}: {e.estimate:9.3f} +- {e.stderr:.3f}")

s = 0.9 * dim_formula(0.3, L).s1
print(f"\nline x=0.3, alpha=0.3, s={s:.3f} (exact pair sums)")
for n in (7, 9, 11):
    e = riesz_energy_1d(spec, RecurrenceConfig(0.3), 0.3, n, s)
    print(f"   n={n}: {e.estimate:.4f}  ({e.sampleCount} interval pairs)")
