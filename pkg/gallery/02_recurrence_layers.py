"""The shrinking-target layers around period-n points, and how far apart their pieces sit.

Run: python3 gallery/02_recurrence_layers.py
"""

import math

from torus_recur.exact_core import MP, prepare
from torus_recur.recurrence_geometry import (
    RecurrenceConfig,
    build_layer,
    layer_area,
    line_slice,
    pairwise_separation,
    piece_geometry,
)

spec, _ = prepare((2, 1, 1, 1))
lam = float(spec.lam.to_mpf())
cfg = RecurrenceConfig(alpha=0.5)

g = piece_geometry(spec, cfg, 3)
print(f"n=3: radius r={g.r:.4g}, long side {g.lambda1:.4g}, short side {g.lambda2:.4g}")
a = layer_area(spec, cfg, 3)
print(f"area per piece {a.area_per_piece:.6g}, {a.pieces} pieces, total {a.total_area:.6g}")

layer = build_layer(spec, cfg, 5, kind="odd_sub")
print(f"\nodd sub-layer at n=5 has {layer.size} pieces; first centres {layer.centers[:3].tolist()}")

print("\nminimum piece distance at alpha=1, scaled by lambda^n")
for n in range(3, 12, 2):
    r = pairwise_separation(spec, RecurrenceConfig(1.0), n)
    print(f"  n={n:2d}  d_n={MP.nstr(r.d_n, 6):>10}  d_n*lambda^n={float(r.scaled):8.2f}  "
          f"same-column gap*lambda^n={float(r.line_scaled):.4f}")

print("\nchords on the line x=0.3 at alpha=0.3")
for n in (7, 9, 11, 13):
    f = line_slice(spec, RecurrenceConfig(0.3), 0.3, n)
    print(f"  n={n:2d}  chords={f.M:6d}  M/(r_n lambda^n)={f.M / (math.exp(-0.3 * n) * lam ** n):.3f}")
