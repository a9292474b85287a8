"""How evenly the layer measure covers the torus, and the line-disintegration potential bound.

Run: python3 gallery/06_uniformity_and_disintegration.py   (about 30 s)
"""

from torus_recur.exact_core import prepare
from torus_recur.recurrence_geometry import RecurrenceConfig
from torus_recur.dimension_lab import BallSpec, disintegration_bound, measure_uniformity

spec, _ = prepare((2, 1, 1, 1))

for rad in (0.05, 0.1, 0.3):
    m = measure_uniformity(spec, RecurrenceConfig(1.0), 9, BallSpec(count=50, radius=rad, samples=50_000))
    print(f"radius {rad}: mu(B)/Leb(B) in [{m.minRatio:.3f}, {m.maxRatio:.3f}]")

u = disintegration_bound(None, None, None, 0.4, 0.5, samplePoints=50, family="uniform")
print(f"\nLebesgue control: pointwise ok={u.all_hold}, I={u.energy:.3f} <= {u.product_bound:.3f}")
d = disintegration_bound(spec, RecurrenceConfig(0.3), [9], 0.47, 0.9, samplePoints=50, cells=256)
print(f"chord family n=9: pointwise ok={d.all_hold} (worst margin {d.worst_margin_sigma:.1f} sigma), "
      f"I={d.energy:.2f} <= {d.product_bound:.2f}")
