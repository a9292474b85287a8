import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torus_recur.errors import DegenerateLayer
from torus_recur.exact_core import MP, mat_pow
from torus_recur.recurrence_geometry import (
    RecurrenceConfig,
    _point_polygon_distance,
    build_layer,
    layer_area,
    line_slice,
    membership,
    membership_mask,
    pairwise_separation,
    piece_geometry,
    radii,
    slice_chords,
    torus_delta,
)

from oracles import polygon_distance


def test_radii_example(cat):
    l1, l2 = radii(cat, RecurrenceConfig(0.5), 3)
    assert MP.nstr(l1, 12) == "0.236298631555"
    assert MP.nstr(l2, 12) == "0.0131684714064"


def test_area_example(cat):
    a = layer_area(cat, RecurrenceConfig(0.5), 3)
    assert a.area_per_piece == pytest.approx(0.00695795432943583, rel=1e-12)
    assert a.pieces == 16
    assert a.total_area == pytest.approx(16 * a.area_per_piece, rel=1e-14)
    assert a.ellipse_area * 16 == pytest.approx(a.ellipse_total_closed_form, rel=1e-12)
    # the inscribed parallelogram is smaller than both the ellipse and the closed form
    assert a.parallelogram_area < a.area_per_piece < a.ellipse_area


def test_parallelogram_inscribed(cat):
    cfg = RecurrenceConfig(0.7)
    for n in (3, 5, 9):
        g = piece_geometry(cat, cfg, n)
        M = np.array(mat_pow(cat.matrix, n).minus_identity().rows(), dtype=float)
        norms = np.hypot(*(g.vertices @ M.T).T)
        assert np.allclose(norms, g.r, rtol=1e-9)


def test_rates_table():
    rates = [math.exp(-0.5 * n) * (1 + 0.1 * (n % 2)) for n in range(1, 41)]
    cfg = RecurrenceConfig.from_rates(rates)
    assert cfg.alpha == pytest.approx(min(-math.log(rates[n - 1]) / n for n in range(20, 41)))
    assert float(cfg.r(7)) == pytest.approx(rates[6])
    with pytest.raises(ValueError):
        cfg.r(41)
    sub = cfg.scaled(2)
    assert float(sub.r(3)) == pytest.approx(rates[5])
    with pytest.raises(ValueError):
        RecurrenceConfig(0.0)


def test_degenerate_layer(cat):
    with pytest.raises(DegenerateLayer):
        build_layer(cat, RecurrenceConfig(0.1), 1)


def test_layer_json(cat):
    L = build_layer(cat, RecurrenceConfig(0.5), 3, "odd_sub")
    d = json.loads(L.dumps())
    assert d["schema_version"] == 1 and d["kind"] == "odd_sub"
    assert len(d["centers"]) == 16 and d["centers"][1] == [[0, 1], [1, 4]]
    full = build_layer(cat, RecurrenceConfig(0.5), 4)
    assert full.size == 45
    with pytest.raises(ValueError):
        build_layer(cat, RecurrenceConfig(0.5), 4, "odd_sub")


@given(x=st.floats(0, 1, exclude_max=True), y=st.floats(0, 1, exclude_max=True))
@settings(max_examples=200, deadline=None)
def test_membership_float_vs_mp(cat, x, y):
    cfg = RecurrenceConfig(0.4)
    n = 4
    M = np.array(mat_pow(cat.matrix, n).minus_identity().rows(), dtype=float)
    w = M @ np.array([x, y])
    w -= np.rint(w)
    if abs(np.hypot(*w) - float(cfg.r(n))) < 1e-9:
        return
    assert membership(cat, (x, y), cfg, n) == bool(membership_mask(cat, np.array([[x, y]]), cfg, n)[0])


def test_membership_at_periodic_point(cat):
    from fractions import Fraction

    assert membership(cat, (Fraction(1, 5), Fraction(2, 5)), RecurrenceConfig(1.0), 2)
    assert membership(cat, ("0.2", "0.4"), RecurrenceConfig(1.0), 2)


def test_torus_delta():
    d = torus_delta(np.array([0.7, -0.7, 0.2, 0.5]))
    assert np.allclose(d, [-0.3, 0.3, 0.2, -0.5])


def _brute_separation(cat, cfg, n):
    L = build_layer(cat, cfg, n, "odd_sub")
    g = L.geometry
    C = L.centers
    P = g.vertices
    reach = 2 * max(np.hypot(*P.T))
    best = math.inf
    for i in range(len(C)):
        d = torus_delta(C[i + 1:] - C[i])
        cd = np.hypot(d[:, 0], d[:, 1])
        for j in np.argsort(cd):
            if cd[j] - reach > best:
                break
            best = min(best, polygon_distance(P, P + d[j]))
    return best


@pytest.mark.parametrize("n", [3, 5, 7])
def test_separation_matches_brute_force(cat, n):
    cfg = RecurrenceConfig(1.0)
    r = pairwise_separation(cat, cfg, n)
    assert float(r.d_n) == pytest.approx(_brute_separation(cat, cfg, n), rel=1e-9)


def test_separation_frozen(cat):
    r = pairwise_separation(cat, RecurrenceConfig(1.0), 9)
    assert MP.nstr(r.d_n, 10) == "0.01294855152"
    assert 0.3249 < float(r.line_scaled) < 0.3251
    assert 0.25 <= float(r.same_column_ratio) <= 4


def test_slice_chords_against_sampling(cat):
    cfg = RecurrenceConfig(0.4)
    n, x0 = 7, 0.3
    g = piece_geometry(cat, cfg, n)
    S = 29
    lo, length = slice_chords(S, g, x0)
    ys = (np.arange(400_000) + 0.5) / 400_000
    pts = np.column_stack([np.full_like(ys, x0), ys])
    m = np.arange(S)
    centers = np.array([[i / S, j / S] for i in m for j in m])
    near = centers[np.abs(torus_delta(centers[:, 0] - x0)) <= g.x_extent]
    inside = np.zeros(len(ys), dtype=bool)
    for c in near:
        d = torus_delta(pts - c)
        cand = np.abs(d[:, 1]) <= g.y_extent
        inside[cand] |= _point_polygon_distance(d[cand], g.vertices) == 0
    assert inside.mean() == pytest.approx(length.sum(), rel=2e-3)


def test_line_slice_filters(cat):
    cfg = RecurrenceConfig(0.3)
    fam = line_slice(cat, cfg, 0.3, 9)
    ln = fam.intervals[:, 1] - fam.intervals[:, 0]
    assert fam.M == len(ln) > 0
    assert np.all((ln >= fam.lambda2 / 3) & (ln <= 2 * fam.lambda2))
    assert np.all(np.diff(fam.intervals[:, 0]) >= 0)
    seg = line_slice(cat, cfg, 0.3, 9, segment=(0.2, 0.3))
    rel = (seg.intervals[:, 0] - 0.2) % 1.0
    assert np.all(rel + (seg.intervals[:, 1] - seg.intervals[:, 0]) <= 0.3)
    with pytest.raises(ValueError):
        line_slice(cat, cfg, 0.3, 8)


def test_slice_count_scaling(cat):
    cfg = RecurrenceConfig(0.3)
    lam = float(cat.lam)
    ratios = [line_slice(cat, cfg, 0.3, n).M / (float(cfg.r(n)) * lam**n) for n in (5, 7, 9, 11, 13)]
    assert max(ratios) / min(ratios) < 3
