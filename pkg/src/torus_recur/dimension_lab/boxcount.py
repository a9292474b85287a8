"""Box counting of recurrence layers at desk scale.

For each layer ``n`` of the window the number ``N_n(delta)`` of grid boxes
of side ``delta = 1/m`` meeting the open elliptic discs of the full layer is
counted exactly: every disc is cut into grid columns, the vertical range of
the disc over a column follows from the quadratic form ``G = M^T M`` with
``M = A**n - I``, and disc centres are rational so their grid offsets are
integer.  Boxes are summed disc by disc when no box can meet two discs;
otherwise column intervals are merged.

A limsup set is seen along a subsequence of layers, each at its own scale,
so the exponent is read off as the critical ``s`` at which the best
``delta``-cover of layer ``n``, ``min_delta N_n(delta) delta**s``, stops
growing with ``n`` (least-squares slope over the window equal to zero).
The candidate ``delta`` for layer ``n`` run from ``lambda_{n,2}/2`` to
``2 lambda_{n,1}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .._parallel import map_ordered
from ..errors import CapExceeded, IllConditionedFit
from ..exact_core import SpectralData
from ..periodic_points import DEFAULT_CAP, periodic_numerators
from ..recurrence_geometry import RecurrenceConfig, piece_geometry, _point_polygon_distance

_CHUNK_ENTRIES = 2_000_000
_MERGE_LIMIT = 60_000_000
_CONFLICT_SCAN = 2_000_000
DEFAULT_RESIDUAL_MAX = 0.5


@dataclass(frozen=True)
class LayerCounts:
    n: int
    lambda1: float
    lambda2: float
    deltas: tuple  # decreasing
    counts: tuple


@dataclass(frozen=True)
class BoxCountResult:
    alpha: float
    window: tuple
    deltas: tuple
    counts: dict = field(repr=False)  # n -> counts aligned with layers[n].deltas
    layers: tuple = field(repr=False)
    fittedSlope: float
    fitRange: tuple
    residual: float
    branchSlopes: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "delta", "count"])
        for lc in self.layers:
            for d, c in zip(lc.deltas, lc.counts):
                w.writerow([lc.n, repr(d), c])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "window": list(self.window),
            "fittedSlope": self.fittedSlope,
            "fitRange": list(self.fitRange),
            "residual": self.residual,
            "branchSlopes": self.branchSlopes,
            "layers": [
                {"n": lc.n, "lambda1": lc.lambda1, "lambda2": lc.lambda2,
                 "deltas": list(lc.deltas), "counts": list(lc.counts)}
                for lc in self.layers
            ],
        }


# ---------------------------------------------------------------------------
# exact counts for one layer
# ---------------------------------------------------------------------------

def _split_centres(num: np.ndarray, den: int, m: int):
    """Integer part and fraction of ``num * m / den`` without float rounding."""
    if int(num.max(initial=0)) * m < 2**62:
        P = num.astype(np.int64) * m
        return P // den, (P % den) / den
    P = num.astype(object) * m
    return (P // den).astype(np.int64), ((P % den).astype(float)) / den


def _may_share_boxes(shape, r: float, delta: float) -> bool:
    """Whether some box of side ``delta`` can meet two different discs (or one disc twice).

    Points ``x1``, ``x2`` of discs with centre difference ``v`` lie in one box
    only if ``z - M w`` has norm below ``2r`` for an integer ``z = M(v + k) != 0``
    and ``|w|_inf < delta``; integer vectors near ``M [-delta, delta]^2`` are scanned.
    """
    M = np.array(shape.rows(), dtype=float)
    corners = np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], dtype=float) * delta
    poly = corners @ M.T
    if (poly[1, 0] - poly[0, 0]) * (poly[2, 1] - poly[1, 1]) - (poly[1, 1] - poly[0, 1]) * (poly[2, 0] - poly[1, 0]) < 0:
        poly = poly[::-1].copy()
    lo = np.floor(poly.min(axis=0) - 2 * r).astype(np.int64)
    hi = np.ceil(poly.max(axis=0) + 2 * r).astype(np.int64)
    if (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) > _CONFLICT_SCAN:
        return True
    zx, zy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1))
    z = np.column_stack([zx.ravel(), zy.ravel()])
    z = z[(z[:, 0] != 0) | (z[:, 1] != 0)].astype(float)
    if len(z) == 0:
        return False
    return bool((_point_polygon_distance(z, poly) < 2 * r).any())


def _column_entries(G, rho, ix, iy, fx, fy):
    """Per (disc, column) global column index and inclusive row range."""
    G11, G12, G22 = G
    detG = G11 * G22 - G12 * G12
    tx = rho * math.sqrt(G22 / detG)
    ty = rho * math.sqrt(G11 / detG)
    xtop = -G12 / G11 * ty
    kmin = np.floor(fx - tx).astype(np.int64)
    kmax = np.floor(fx + tx).astype(np.int64)
    nc = kmax - kmin + 1
    owner = np.repeat(np.arange(len(nc)), nc)
    off = np.arange(int(nc.sum())) - np.repeat(np.cumsum(nc) - nc, nc)
    K = kmin[owner] + off
    fxo = fx[owner]
    t0 = np.maximum(K - fxo, -tx)
    t1 = np.minimum(K + 1 - fxo, tx)
    tc = np.clip(xtop, t0, t1)
    up = (-G12 * tc + np.sqrt(np.maximum(G22 * rho * rho - detG * tc * tc, 0.0))) / G22
    tb = np.clip(-xtop, t0, t1)
    low = (-G12 * tb - np.sqrt(np.maximum(G22 * rho * rho - detG * tb * tb, 0.0))) / G22
    fyo = fy[owner]
    rlo = np.floor(fyo + low).astype(np.int64)
    rhi = np.floor(fyo + up).astype(np.int64)
    return K + ix[owner], rlo + iy[owner], rhi + iy[owner]


def _merged_count(K, lo, hi, m: int) -> int:
    """Number of distinct cells among column intervals, everything taken mod ``m``."""
    K = K % m
    span = hi - lo
    full = span >= m - 1
    lo_m = lo % m
    hi_m = lo_m + span
    wrap = (~full) & (hi_m >= m)
    Ks = [K[full], K[~full & ~wrap], K[wrap], K[wrap]]
    los = [np.zeros(full.sum(), np.int64), lo_m[~full & ~wrap], lo_m[wrap], np.zeros(wrap.sum(), np.int64)]
    his = [np.full(full.sum(), m - 1, np.int64), hi_m[~full & ~wrap], np.full(wrap.sum(), m - 1, np.int64), hi_m[wrap] - m]
    K, lo, hi = np.concatenate(Ks), np.concatenate(los), np.concatenate(his)
    B = m + 2
    if m * B >= 2**62:
        raise CapExceeded("grid too fine for interval merging")
    klo = K * B + lo
    khi = K * B + hi
    order = np.argsort(klo, kind="stable")
    klo, khi = klo[order], khi[order]
    run = np.maximum.accumulate(khi)
    prev = np.concatenate([[np.iinfo(np.int64).min // 2], run[:-1]])
    return int(np.maximum(khi - np.maximum(prev, klo - 1), 0).sum())


def layer_box_counts(spec: SpectralData, cfg: RecurrenceConfig, n: int, ms, cap: int = DEFAULT_CAP):
    """Exact ``N_n(1/m)`` for each grid resolution ``m`` in ``ms``."""
    geom = piece_geometry(spec, cfg, n)
    den, num = periodic_numerators(spec, n, cap=cap)
    S = geom.shape
    G = (S.a * S.a + S.c * S.c, S.a * S.b + S.c * S.d, S.b * S.b + S.d * S.d)
    G = tuple(float(g) for g in G)
    r = geom.r
    out = []
    for m in ms:
        m = int(m)
        ix, fx = _split_centres(num[:, 0], den, m)
        iy, fy = _split_centres(num[:, 1], den, m)
        rho = r * m
        shared = _may_share_boxes(S, r, 1.0 / m)
        tx = rho * math.sqrt(G[2] / (G[0] * G[2] - G[1] ** 2))
        per_disc = int(2 * tx) + 2
        if shared:
            if per_disc * len(num) > _MERGE_LIMIT:
                raise CapExceeded(f"interval merge for n={n}, m={m} too large")
            K, lo, hi = _column_entries(G, rho, ix, iy, fx, fy)
            out.append(_merged_count(K, lo, hi, m))
            continue
        step = max(1, _CHUNK_ENTRIES // per_disc)
        bounds = [(s, min(s + step, len(num))) for s in range(0, len(num), step)]

        def work(b, ix=ix, iy=iy, fx=fx, fy=fy, rho=rho):
            a, e = b
            _, lo, hi = _column_entries(G, rho, ix[a:e], iy[a:e], fx[a:e], fy[a:e])
            return int((hi - lo + 1).sum())

        out.append(sum(map_ordered(work, bounds)))
    return geom, out


def default_grid(geom) -> list[int]:
    """Dyadic resolutions ``m = 2**j`` with ``1/m`` between ``lambda2/2`` and ``2 lambda1``."""
    jlo = max(0, int(math.floor(-math.log2(2 * geom.lambda1))))
    jhi = int(math.ceil(-math.log2(geom.lambda2 / 2)))
    return [2**j for j in range(jlo, jhi + 1)]


def _grid_from_deltas(geom, deltas) -> list[int]:
    lo, hi = geom.lambda2 / 2, 2 * geom.lambda1
    ms = sorted({int(round(1.0 / d)) for d in deltas if lo <= d <= hi and d > 0})
    return ms


# ---------------------------------------------------------------------------
# exponent fit
# ---------------------------------------------------------------------------

def _best_cover(logN, logInv, s):
    return np.array([np.min(a - s * b) for a, b in zip(logN, logInv)])


def critical_exponent(ns, logN, logInv, s_max: float = 2.0, tol: float = 1e-10):
    """Root in ``s`` of the least-squares slope over ``n`` of ``min_delta (log N - s log(1/delta))``."""
    ns = np.asarray(ns, dtype=float)

    def phi(s):
        return np.polyfit(ns, _best_cover(logN, logInv, s), 1)[0]

    lo, hi = 0.0, s_max
    if phi(lo) <= 0:
        raise IllConditionedFit("counts do not grow with n")
    if phi(hi) > 0:
        raise IllConditionedFit(f"no critical exponent below {s_max}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    c = _best_cover(logN, logInv, s)
    coef = np.polyfit(ns, c, 1)
    resid = float(np.sqrt(np.mean((c - np.polyval(coef, ns)) ** 2)))
    return s, resid


def boxcount_estimate(
    spec: SpectralData,
    cfg: RecurrenceConfig,
    nWindow,
    deltaGrid=None,
    cap: int = DEFAULT_CAP,
    residual_max: float = DEFAULT_RESIDUAL_MAX,
) -> BoxCountResult:
    """Critical box-counting exponent over the layers in ``nWindow``.

    ``deltaGrid`` (optional) lists box sizes; each layer uses those inside its
    own range, snapped to ``1/m`` with integer ``m``.  Default: dyadic sizes.
    """
    ns = sorted(set(int(n) for n in nWindow))
    if len(ns) < 3:
        raise ValueError("need at least three layers in the window")
    layers = []
    for n in ns:
        geom = piece_geometry(spec, cfg, n)
        ms = default_grid(geom) if deltaGrid is None else _grid_from_deltas(geom, deltaGrid)
        if len(ms) < 2:
            raise IllConditionedFit(f"fewer than two box sizes fall in the range of layer {n}")
        geom, counts = layer_box_counts(spec, cfg, n, ms, cap=cap)
        layers.append(LayerCounts(n=n, lambda1=geom.lambda1, lambda2=geom.lambda2,
                                  deltas=tuple(1.0 / m for m in ms), counts=tuple(counts)))
    logN = [np.log(np.array(lc.counts, dtype=float)) for lc in layers]
    logInv = [-np.log(np.array(lc.deltas)) for lc in layers]
    s, resid = critical_exponent(ns, logN, logInv)
    if resid > residual_max:
        raise IllConditionedFit(f"residual {resid:.3g} above {residual_max}")
    coarse = np.array([[li[0], ln[0]] for li, ln in zip(logInv, logN)])
    fine = np.array([[li[-1], ln[-1]] for li, ln in zip(logInv, logN)])
    all_d = sorted({d for lc in layers for d in lc.deltas}, reverse=True)
    return BoxCountResult(
        alpha=cfg.alpha,
        window=tuple(ns),
        deltas=tuple(all_d),
        counts={lc.n: lc.counts for lc in layers},
        layers=tuple(layers),
        fittedSlope=float(s),
        fitRange=(min(all_d), max(all_d)),
        residual=resid,
        branchSlopes={
            "ball": float(np.polyfit(coarse[:, 0], coarse[:, 1], 1)[0]),
            "parallelogram": float(np.polyfit(fine[:, 0], fine[:, 1], 1)[0]),
        },
    )


__all__ = [
    "BoxCountResult",
    "LayerCounts",
    "boxcount_estimate",
    "layer_box_counts",
    "critical_exponent",
    "default_grid",
]
