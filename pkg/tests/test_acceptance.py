"""End-to-end acceptance checks, one test per criterion.

Each test appends a ``C<k> PASS|FAIL ...`` line that the terminal summary
prints in order; run ``pytest tests/test_acceptance.py -s`` to see them
inline as well.
"""

import math
import time

import numpy as np
import pytest

from torus_recur.exact_core import H, MP, mat_pow, prepare
from torus_recur.periodic_points import (
    candidate_lattice_even,
    candidate_lattice_odd,
    enumerate_periodic,
    inner_lattice_odd,
    is_periodic,
    odd_data,
    parallelogram_vertices,
    pick_count,
)
from torus_recur.recurrence_geometry import RecurrenceConfig, pairwise_separation
from torus_recur.dimension_lab import (
    BallSpec,
    boxcount_estimate,
    dim_curve,
    dim_formula,
    disintegration_bound,
    measure_uniformity,
    pair_integral,
    riesz_energy_1d,
    riesz_energy_2d,
)
from torus_recur.dimension_lab.formula import covering_ratios, predicted_ratios

import conftest
from conftest import MATRICES
from oracles import adjugate_points, pair_integral_quad

pytestmark = pytest.mark.slow


def _report(k, ok, elapsed, budget, detail):
    ok = bool(ok) and elapsed <= budget
    line = f"C{k} {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s / {budget:.0f}s) {detail}"
    conftest.ACCEPTANCE.append(line)
    print(line)
    return ok


def test_c1_exact_identities():
    t0 = time.perf_counter()
    bad = []
    for m in MATRICES:
        spec, _ = prepare(m)
        t = spec.trace
        for n in range(1, 31):
            if H(spec, n) != mat_pow(spec.matrix, n).minus_identity().det:
                bad.append(("H", m, n))
        for k in range(15):
            if H(spec, 2 * k + 1) != -(t - 2) * odd_data(spec, k).S ** 2:
                bad.append(("odd", m, k))
        for n in range(1, 31):
            h = abs(H(spec, n))
            if h > 10**4:
                break
            pts = enumerate_periodic(spec, n).points
            if not len(pts) == h == pick_count(parallelogram_vertices(mat_pow(spec.matrix, n).minus_identity())):
                bad.append(("count", m, n))
            if n % 2:
                kk = (n - 1) // 2
                if not all(is_periodic(spec, p, n) for p in inner_lattice_odd(spec, kk)):
                    bad.append(("inner", m, n))
                den = candidate_lattice_odd(spec, kk)
            else:
                den = candidate_lattice_even(spec, n // 2)
            if any(den % p.x.denominator or den % p.y.denominator for p in pts):
                bad.append(("denominator", m, n))
    el = time.perf_counter() - t0
    assert _report(1, not bad, el, 10, f"{len(MATRICES)} matrices, n<=30, mismatches={bad[:3]}")


def test_c2_snf_vs_adjugate():
    t0 = time.perf_counter()
    bad, cases = [], 0
    for m in MATRICES:
        spec, _ = prepare(m)
        for n in range(1, 31):
            M = mat_pow(spec.matrix, n).minus_identity()
            if abs(M.det) > 2000:
                break
            den, ref = adjugate_points(M.entries())
            got = {(int(p.x * den), int(p.y * den)) for p in enumerate_periodic(spec, n).points}
            cases += 1
            if got != ref:
                bad.append((m, n))
    el = time.perf_counter() - t0
    assert _report(2, not bad and cases > 0, el, 30, f"{cases} (matrix, n) cases, mismatches={bad}")


def test_c3_dimension_curve(cat):
    t0 = time.perf_counter()
    L = float(cat.log_lambda)
    vals = {a: dim_formula(a * L, L).s0 for a in (1.0, 0.5, 2.0)}
    digits = all(abs(vals[a] - e) < 1e-12 for a, e in ((1.0, 1.0), (0.5, 4 / 3), (2.0, 0.5)))
    grid = np.linspace(0.01, 5.0, 300)
    curve = dim_curve(grid, L)
    s0 = np.array([c.s0 for c in curve])
    mono = bool(np.all(np.diff(s0) <= 1e-15))
    branches = [c.activeBranch for c in curve]
    switch = all((b == "parallelogram-covering") == (a <= L) for a, b in zip(grid, branches))
    el = time.perf_counter() - t0
    ok = digits and mono and switch
    assert _report(3, ok, el, 1, f"s0 at L,L/2,2L = {[round(vals[a], 13) for a in (1.0, 0.5, 2.0)]}, "
                                 f"monotone={mono}, switch={switch}")


def test_c4_covering_ratios(cat):
    t0 = time.perf_counter()
    L = float(cat.log_lambda)
    worst = 0.0
    for alpha in (0.5 * L, L, 3 * L):
        f = dim_formula(alpha, L)
        for branch_s in (f.parallelogram_branch, f.ball_branch):
            s = 1.1 * branch_s
            pb, ps = predicted_ratios(L, alpha, s)
            for n, br, sr in covering_ratios(cat, RecurrenceConfig(alpha), s, range(20, 31)):
                worst = max(worst, float(abs(br / pb - 1)), float(abs(sr / ps - 1)))
    el = time.perf_counter() - t0
    assert _report(4, worst <= 1e-6, el, 5, f"max relative error {worst:.2e}")


def test_c5_boxcount(cat):
    t0 = time.perf_counter()
    L = float(cat.log_lambda)
    out = []
    for alpha, target in ((L / 2, 4 / 3), (L, 1.0), (3 * L, 1 / 3)):
        r = boxcount_estimate(cat, RecurrenceConfig(alpha), (3, 5, 7, 9))
        out.append((round(alpha / L, 2), round(r.fittedSlope, 4), round(target, 4),
                    abs(r.fittedSlope - target) <= 0.15))
    el = time.perf_counter() - t0
    assert _report(5, all(o[3] for o in out), el, 600,
                   "window n=3,5,7,9, dyadic deltas; (alpha/L, slope, s0, ok) = " + str(out))


def test_c6_separation(cat):
    t0 = time.perf_counter()
    cfg = RecurrenceConfig(1.0)
    scaled = [float(pairwise_separation(cat, cfg, n).scaled) for n in range(3, 16, 2)]
    el = time.perf_counter() - t0
    ratio = max(scaled) / min(scaled) if min(scaled) > 0 else math.inf
    ok = min(scaled) > 0 and ratio <= 20
    assert _report(6, ok, el, 120, f"d_n*lambda^n = {[round(v, 2) for v in scaled]}, max/min = {ratio:.1f}")


def test_c7_energy(cat):
    t0 = time.perf_counter()
    L = float(cat.log_lambda)
    notes, ok = [], True

    a = riesz_energy_2d(cat, RecurrenceConfig(L), 9, 0.0, sampler="pairs", seed=42)
    good = abs(a.estimate - 1.0) <= 3 * a.stderr + 1e-12
    ok &= good
    notes.append(f"(a) I_0={a.estimate:.12f}")

    for alpha in (L / 2, L):
        s = 0.9 * dim_formula(alpha, L).s0
        e = [riesz_energy_2d(cat, RecurrenceConfig(alpha), n, s, seed=42).estimate for n in (5, 7, 9, 11)]
        e = [float(v) for v in e]
        r = max(e) / min(e)
        ok &= r <= 3
        notes.append(f"(b) 2D a={alpha / L:.1f}L s={s:.3f}: {[round(v, 2) for v in e]} ratio {r:.2f}")
    alpha = 0.3
    s = 0.9 * dim_formula(alpha, L).s1
    e = [riesz_energy_1d(cat, RecurrenceConfig(alpha), 0.3, n, s).estimate for n in (7, 9, 11, 13)]
    r = max(e) / min(e)
    ok &= r <= 3
    notes.append(f"(b) 1D a=0.3 s={s:.3f}: {[round(v, 2) for v in e]} ratio {r:.2f}")

    for alpha in (L / 2, L):
        s = 1.2 * dim_formula(alpha, L).s0
        assert s <= 2
        e = [riesz_energy_2d(cat, RecurrenceConfig(alpha), n, s, seed=42).estimate for n in (5, 7, 9, 11)]
        e = [float(v) for v in e]
        steps = [float(b / a_) for a_, b in zip(e, e[1:])]
        ok &= min(steps) >= 1.5
        notes.append(f"(c) a={alpha / L:.1f}L s={s:.3f}: steps {[round(v, 2) for v in steps]}")
    el = time.perf_counter() - t0
    assert _report(7, ok, el, 600, "; ".join(notes))


def test_c8_disintegration(cat):
    t0 = time.perf_counter()
    L = float(cat.log_lambda)
    u = disintegration_bound(None, None, None, 0.4, 0.5, family="uniform")
    s = round(0.9 * dim_formula(0.3, L).s1, 4)
    t = 0.9
    assert s + t < dim_formula(0.3, L).s0
    m = disintegration_bound(cat, RecurrenceConfig(0.3), [9], s, t)
    el = time.perf_counter() - t0
    ok = u.all_hold and u.energy_bound_holds and m.all_hold and m.energy_bound_holds
    assert _report(8, ok, el, 300,
                   f"uniform: all_hold={u.all_hold} I={u.energy:.3f}<={u.product_bound:.3f}; "
                   f"slices n=9 s={s} t={t}: all_hold={m.all_hold} worst margin {m.worst_margin_sigma:.1f} sigma, "
                   f"I={m.energy:.2f}<={m.product_bound:.2f}")


def test_c9_uniformity(cat):
    t0 = time.perf_counter()
    r = measure_uniformity(cat, RecurrenceConfig(1.0), 9, BallSpec(count=100, radius=0.1))
    el = time.perf_counter() - t0
    assert _report(9, r.spread <= 4, el, 120,
                   f"min {r.minRatio:.3f} max {r.maxRatio:.3f} spread {r.spread:.3f}")


def test_c10_pair_integrals():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        a, c = rng.uniform(0, 1, 2)
        la, lc = rng.uniform(1e-3, 0.45, 2)
        s = rng.uniform(0.05, 0.95)
        got = float(pair_integral(a, a + la, c, c + lc, s))
        ref = pair_integral_quad(a, a + la, c, c + lc, s)
        worst = max(worst, abs(got / ref - 1))
    el = time.perf_counter() - t0
    assert _report(10, worst <= 1e-6, el, 10, f"max relative error {worst:.2e}")
