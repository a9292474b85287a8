"""Exact arithmetic for a hyperbolic toral automorphism and its periodic points.

Run: python3 gallery/01_spectral_and_periodic.py
"""

from torus_recur.exact_core import H, MP, lucas_u, prepare, trace_sequence
from torus_recur.periodic_points import enumerate_periodic, odd_data, pick_count, parallelogram_vertices
from torus_recur.exact_core import mat_pow

# A matrix with determinant -1 is replaced by its square.
spec, k = prepare((1, 1, 1, 0))
print(f"normalized matrix {spec.matrix.entries()} (power {k}), lambda = {spec.lam}")
print("log lambda =", MP.nstr(spec.log_lambda, 30))

print("\ntraces t_n:", trace_sequence(spec.trace, 8)[1:])
print("H_n = det(A^n - I):", [H(spec, n) for n in range(1, 9)])
print("u_k:", [lucas_u(spec, j) for j in range(1, 8)])

print("\nodd periods n = 2k+1, H_n = -(t-2) S_k^2")
for j in range(5):
    d = odd_data(spec, j)
    print(f"  n={d.n:2d}  S={d.S:4d}  H={H(spec, d.n):8d}  -(t-2)S^2={-(spec.trace - 2) * d.S ** 2:8d}")

ps = enumerate_periodic(spec, 2)
print("\nperiod-2 points:", ", ".join(str(p) for p in ps.points))
M = mat_pow(spec.matrix, 4).minus_identity()
print("lattice points in the period-4 parallelogram:", pick_count(parallelogram_vertices(M)), "=", abs(H(spec, 4)))
