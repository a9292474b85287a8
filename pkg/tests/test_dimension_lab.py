import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torus_recur.errors import EmptySlice, IllConditionedFit, SelfEnergyDiverges
from torus_recur.recurrence_geometry import RecurrenceConfig, membership_mask
from torus_recur.dimension_lab import (
    BallSpec,
    covering_upper_counts,
    dim_curve,
    dim_formula,
    disintegration_bound,
    interval_energy,
    layer_box_counts,
    measure_uniformity,
    pair_integral,
    riesz_energy_1d,
    riesz_energy_2d,
)
from torus_recur.dimension_lab.boxcount import critical_exponent
from torus_recur.dimension_lab.energy import interval_potential, interval_self_energy, piece_self_energy
from torus_recur.dimension_lab.formula import covering_ratios, predicted_ratios

from oracles import pair_integral_quad


# ---- closed-form dimension ------------------------------------------------

def test_formula_branches(logl):
    f = dim_formula(logl, logl)
    assert f.s0 == pytest.approx(1.0) and f.s1 == pytest.approx(0.0)
    assert f.activeBranch == "parallelogram-covering"
    g = dim_formula(2 * logl, logl)
    assert g.activeBranch == "ball-covering" and g.s0 == pytest.approx(0.5)
    h = dim_formula(logl / 2, logl)
    assert h.s0 == pytest.approx(4 / 3) and h.s1 == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        dim_formula(0.0, logl)


@given(a=st.floats(1e-3, 10), b=st.floats(1e-3, 10), L=st.floats(0.1, 5))
def test_formula_monotone_and_continuous(a, b, L):
    fa, fb = dim_formula(a, L), dim_formula(b, L)
    if a < b:
        assert fa.s0 >= fb.s0 and fa.s1 >= fb.s1
    assert fa.s0 == pytest.approx(min(fa.parallelogram_branch, fa.ball_branch))
    if a <= L:
        assert fa.s0 == pytest.approx(fa.s1 + 1)
    assert 0 < fa.s0 <= 2


def test_curve_json(logl):
    c = dim_curve([0.1, 0.9, 3.0], logl)
    assert [x.to_json()["activeBranch"] for x in c] == ["parallelogram-covering"] * 2 + ["ball-covering"]


def test_covering_terms(cat, logl):
    t = covering_upper_counts(cat, RecurrenceConfig(0.5), 3, 1.2)
    assert t.gamma == 18
    for n, br, sr in covering_ratios(cat, RecurrenceConfig(0.5), 1.2, range(20, 24)):
        pb, ps = predicted_ratios(logl, 0.5, 1.2)
        assert abs(br / pb - 1) < 1e-6 and abs(sr / ps - 1) < 1e-6


# ---- box counting -----------------------------------------------------------

def _brute_boxes(cat, cfg, n, ms, F=1024):
    u = (np.arange(F) + 0.5) / F
    X, Y = np.meshgrid(u, u, indexing="ij")
    mask = membership_mask(cat, np.column_stack([X.ravel(), Y.ravel()]), cfg, n).reshape(F, F)
    return [int(mask.reshape(m, F // m, m, F // m).any(axis=(1, 3)).sum()) for m in ms]


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_box_counts_match_grid(cat, alpha):
    ms = [4, 8, 16, 32]
    _, exact = layer_box_counts(cat, RecurrenceConfig(alpha), 3, ms)
    assert exact == _brute_boxes(cat, RecurrenceConfig(alpha), 3, ms)


def test_box_counts_bound_grid(cat):
    ms = [4, 8, 16, 32]
    cfg = RecurrenceConfig(1.0)
    _, exact = layer_box_counts(cat, cfg, 4, ms)
    brute = _brute_boxes(cat, cfg, 4, ms)
    assert exact == [16, 56, 82, 118]
    assert all(b <= e <= 1.15 * b for b, e in zip(brute, exact))
    assert all(e <= m * m for e, m in zip(exact, ms))


def test_critical_exponent_synthetic():
    ns = [3, 4, 5, 6]
    logInv = [np.linspace(0, 3 * n, 6) for n in ns]
    logN = [1.3 * li + 0.1 * n for li, n in zip(logInv, ns)]
    s, res = critical_exponent(ns, logN, logInv)
    assert res < 1e-8
    # min over the grid is at the fine end: 0.1 n - (s - 1.3) 3 n has zero slope at s = 1.3 + 1/30
    assert s == pytest.approx(1.3 + 0.1 / 3, abs=1e-8)
    with pytest.raises(IllConditionedFit):
        critical_exponent(ns, [np.zeros(6)] * 4, logInv)


# ---- circle energies ----------------------------------------------------------

@pytest.mark.parametrize(
    "iv,s",
    [
        ((0.0, 0.1, 0.3, 0.45), 0.5),
        ((0.0, 0.2, 0.1, 0.35), 0.7),
        ((0.9, 1.05, 0.0, 0.02), 0.3),
        ((0.1, 0.1004, 0.6, 0.6002), 0.9),
        ((0.2, 0.4, 0.2, 0.4), 0.6),
    ],
)
def test_pair_integral_against_quadrature(iv, s):
    got = float(pair_integral(*iv, s))
    assert got == pytest.approx(pair_integral_quad(*iv, s), rel=1e-7)


def test_self_energy_closed_form():
    for ell in (1e-3, 0.01, 0.2):
        assert interval_self_energy(ell, 0.5, half=1.0) == pytest.approx(8 / 3 * ell**1.5, rel=1e-12)
    with pytest.raises(SelfEnergyDiverges):
        interval_self_energy(0.1, 1.0)
    with pytest.raises(EmptySlice):
        interval_energy(np.empty((0, 2)), 0.5)


def test_interval_energy_limits():
    assert interval_energy([[0.0, 0.5], [0.5, 1.0]], 0.0) == pytest.approx(1.0)
    # Lebesgue on the circle with half = 1/2: 2 int_0^{1/2} (2u)^{-s} du = 1/(1-s)
    assert interval_energy([[0.0, 0.5], [0.5, 1.0]], 0.4) == pytest.approx(1 / 0.6, rel=1e-10)
    # two far tiny intervals behave like two points at distance 1/2
    e = interval_energy([[0.1, 0.1 + 1e-9], [0.6, 0.6 + 1e-9]], 0.5)
    assert e > 1e3


def test_interval_potential_integrates_to_energy(rng):
    iv = np.array([[0.05, 0.12], [0.3, 0.31], [0.55, 0.7]])
    s = 0.45
    L = (iv[:, 1] - iv[:, 0]).sum()
    xs, ws = np.polynomial.legendre.leggauss(400)
    tot = 0.0
    for a, b in iv:
        # potential has integrable cusps at the ends; use a split Gauss rule
        edges = np.linspace(a, b, 41)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x = (hi - lo) / 2 * xs + (hi + lo) / 2
            tot += ((hi - lo) / 2 * ws * interval_potential(x, iv, s)).sum()
    assert tot / L == pytest.approx(interval_energy(iv, s), rel=1e-4)


def test_riesz_1d_slice(cat):
    cfg = RecurrenceConfig(0.3)
    e = riesz_energy_1d(cat, cfg, 0.3, 9, 0.0)
    assert e.estimate == pytest.approx(1.0, abs=1e-8)
    assert e.stderr == 0.0
    lo, hi = riesz_energy_1d(cat, cfg, 0.3, 9, 0.2), riesz_energy_1d(cat, cfg, 0.3, 9, 0.4)
    assert 1.0 < lo.estimate < hi.estimate


# ---- planar energies ----------------------------------------------------------

def test_piece_self_energy_against_sampling(rng):
    E = np.array([[0.01, 0.003], [0.002, -0.02]])
    got = piece_self_energy(E, 0.8)
    assert got == pytest.approx(28.3897, rel=1e-4)
    x = rng.uniform(-1, 1, (2_000_000, 2)) @ E.T
    y = rng.uniform(-1, 1, (2_000_000, 2)) @ E.T
    k = (np.hypot(*(x - y).T) / (math.sqrt(2) / 2)) ** -0.8
    assert abs(k.mean() - got) < 4 * k.std() / math.sqrt(len(k))
    assert piece_self_energy(E, 0.0) == pytest.approx(1.0, rel=1e-10)


def test_riesz_2d_basic(cat):
    cfg = RecurrenceConfig(0.5)
    z = riesz_energy_2d(cat, cfg, 5, 0.0, pairs=200_000)
    assert z.estimate == pytest.approx(1.0, abs=1e-12)
    zp = riesz_energy_2d(cat, cfg, 5, 0.0, sampler="pairs", pairs=200_000)
    assert zp.estimate == pytest.approx(1.0, abs=1e-12)
    vals = [riesz_energy_2d(cat, cfg, 5, s, pairs=200_000).estimate for s in (0.3, 0.8, 1.3)]
    assert vals == sorted(vals)
    h = riesz_energy_2d(cat, cfg, 5, 0.8, pairs=400_000)
    p = riesz_energy_2d(cat, cfg, 5, 0.8, sampler="pairs", pairs=400_000, seed=7)
    assert abs(h.estimate - p.estimate) < 5 * math.hypot(h.stderr, p.stderr)
    with pytest.raises(ValueError):
        riesz_energy_2d(cat, cfg, 4, 0.5)


def test_riesz_2d_deterministic_across_threads(cat, monkeypatch):
    cfg = RecurrenceConfig(1.0)
    out = []
    for w in ("1", "4"):
        monkeypatch.setenv("TORUS_RECUR_THREADS", w)
        out.append(riesz_energy_2d(cat, cfg, 5, 1.0, pairs=2_500_000).estimate)
    assert out[0] == out[1]


# ---- disintegration -------------------------------------------------------------

def test_disintegration_uniform():
    r = disintegration_bound(None, None, None, 0.3, 0.4, samplePoints=20, family="uniform", draws=20_000)
    assert r.all_hold and r.energy_bound_holds
    # Lebesgue on the torus with raw distances: energy is bounded by the product
    assert r.energy < r.product_bound
    z = disintegration_bound(None, None, None, 0.0, 0.0, samplePoints=5, family="uniform",
                             draws=1000, energy_draws=1000)
    assert z.energy == pytest.approx(1.0) and z.product_bound == pytest.approx(1.0)


def test_disintegration_slices_small(cat):
    r = disintegration_bound(cat, RecurrenceConfig(0.3), [7], 0.3, 0.5, samplePoints=20, cells=64,
                             draws=2000, energy_draws=20_000)
    assert r.n == 7 and r.cells == 64
    assert r.all_hold and r.energy_bound_holds
    with pytest.raises(ValueError):
        disintegration_bound(cat, RecurrenceConfig(0.3), [7], 0.3, 1.0)


# ---- uniformity -----------------------------------------------------------------

def test_uniformity(cat):
    cfg = RecurrenceConfig(1.0)
    whole = measure_uniformity(cat, cfg, 5, BallSpec(radius=None))
    assert whole.minRatio == whole.maxRatio == 1.0
    m = measure_uniformity(cat, cfg, 7, BallSpec(count=10, radius=0.3, samples=40_000))
    assert 0.8 < m.minRatio <= m.maxRatio < 1.25
    with pytest.raises(ValueError):
        measure_uniformity(cat, cfg, 3, BallSpec(radius=0.05))
