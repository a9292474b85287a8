"""Recurrence layers ``{x : (A**n - I) x mod 1 in B(0, r_n)}`` and their geometry.

A layer is a union of congruent elliptic discs centred at period-n points.
Each disc contains the parallelogram with diagonals ``2*lambda_{n,1}``
(stable direction) and ``2*lambda_{n,2}`` (unstable direction); the odd-n
sub-layer keeps only the discs centred on the lattice ``(m/S_k, j/S_k)``.

High-precision quantities (radii, separations) come from the 60-digit
context in :mod:`exact_core`; bulk geometry uses float64 arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import CapExceeded, DegenerateLayer, ZeroB
from .exact_core import MP, H, IntMatrix2, SpectralData, mat_pow
from .periodic_points import DEFAULT_CAP, RationalPoint, odd_data, periodic_numerators

__all__ = [
    "RecurrenceConfig",
    "PieceGeometry",
    "EllipseDisc",
    "Layer",
    "SliceFamily",
    "AreaReport",
    "SeparationResult",
    "radii",
    "piece_geometry",
    "membership",
    "membership_mask",
    "build_layer",
    "layer_area",
    "pairwise_separation",
    "line_slice",
    "torus_delta",
]

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecurrenceConfig:
    """Shrinking rate ``r_n``: either ``exp(-alpha n)`` or an explicit table.

    With a table, ``rates[n - 1]`` is ``r_n`` and ``alpha`` is the finite
    horizon proxy for ``liminf(-log r_n / n)``: the minimum over the second
    half of the table.
    """

    alpha: float
    rates: tuple | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.rates is not None:
            r = [float(v) for v in self.rates]
            if any(v <= 0 for v in r):
                raise ValueError("rates must be strictly positive")
            if any(b > a for a, b in zip(r, r[1:])):
                raise ValueError("rates must be non-increasing")

    @classmethod
    def from_rates(cls, rates) -> "RecurrenceConfig":
        rates = tuple(float(v) for v in rates)
        if not rates:
            raise ValueError("empty rate table")
        h = len(rates)
        tail = range(max(1, (h + 1) // 2), h + 1)
        alpha = min(-math.log(rates[n - 1]) / n for n in tail)
        return cls(alpha=alpha, rates=rates)

    def r(self, n: int):
        """``r_n`` as a 60-digit mpf."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.rates is None:
            return MP.exp(-MP.mpf(self.alpha) * n)
        if n > len(self.rates):
            raise ValueError(f"rate table has no entry for n={n}")
        return MP.mpf(self.rates[n - 1])

    def scaled(self, k: int) -> "RecurrenceConfig":
        """Rates per step of ``A**k``: ``r'_n = r_{k n}``."""
        if k == 1:
            return self
        if self.rates is None:
            return RecurrenceConfig(alpha=self.alpha * k)
        sub = self.rates[k - 1 :: k]
        return RecurrenceConfig.from_rates(sub)


# ---------------------------------------------------------------------------
# Shared piece geometry
# ---------------------------------------------------------------------------

def radii(spec: SpectralData, cfg: RecurrenceConfig, n: int):
    """Semi-axes ``(r_n/(1 - lam**-n), r_n/(lam**n - 1))`` as mpf."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lam_n = spec.lam.to_mpf() ** n
    r = cfg.r(n)
    return r / (1 - 1 / lam_n), r / (lam_n - 1)


def _unit(slope):
    x, y = MP.mpf(1), slope.to_mpf()
    nrm = MP.sqrt(x * x + y * y)
    return (x / nrm, y / nrm)


@dataclass(frozen=True)
class PieceGeometry:
    """Shape shared by every piece of layer ``n``, in float64 and mpf."""

    n: int
    r: float
    lambda1: float
    lambda2: float
    major_dir: tuple  # unit stable eigenvector
    minor_dir: tuple  # unit unstable eigenvector
    shape: IntMatrix2  # A**n - I
    lambda1_mp: object = field(repr=False)
    lambda2_mp: object = field(repr=False)
    r_mp: object = field(repr=False)

    @cached_property
    def shape_f(self) -> np.ndarray:
        return np.array(self.shape.rows(), dtype=float)

    @cached_property
    def vertices(self) -> np.ndarray:
        """Parallelogram vertices relative to the centre, counter-clockwise order."""
        s = np.array(self.major_dir, dtype=float) * self.lambda1
        u = np.array(self.minor_dir, dtype=float) * self.lambda2
        v = np.array([u, s, -u, -s])
        if _cross(v[1] - v[0], v[2] - v[1]) < 0:
            v = v[::-1].copy()
        return v

    @cached_property
    def basis(self) -> np.ndarray:
        """Columns ``lambda2*u`` and ``lambda1*s``; piece = centre + basis @ {|a|+|b| <= 1}."""
        return np.column_stack(
            [np.array(self.minor_dir) * self.lambda2, np.array(self.major_dir) * self.lambda1]
        )

    @property
    def parallelogram_area(self) -> float:
        return abs(float(np.linalg.det(self.basis))) * 2.0

    @property
    def x_extent(self) -> float:
        return float(np.max(np.abs(self.vertices[:, 0])))

    @property
    def y_extent(self) -> float:
        return float(np.max(np.abs(self.vertices[:, 1])))


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def piece_geometry(spec: SpectralData, cfg: RecurrenceConfig, n: int) -> PieceGeometry:
    l1, l2 = radii(spec, cfg, n)
    major = _unit(spec.eigenvector_slope("stable"))
    minor = _unit(spec.eigenvector_slope("unstable"))
    return PieceGeometry(
        n=n,
        r=float(cfg.r(n)),
        lambda1=float(l1),
        lambda2=float(l2),
        major_dir=tuple(float(c) for c in major),
        minor_dir=tuple(float(c) for c in minor),
        shape=mat_pow(spec.matrix, n).minus_identity(),
        lambda1_mp=l1,
        lambda2_mp=l2,
        r_mp=cfg.r(n),
    )


@dataclass(frozen=True)
class EllipseDisc:
    """One component ``{x : |(A**n - I)(x - center)| < r_n}`` of a layer."""

    center: RationalPoint
    semi_major: float
    semi_minor: float
    major_dir: tuple
    minor_dir: tuple
    shape: IntMatrix2
    r: float

    def contains(self, x, scale: float = 1.0) -> bool:
        """Ellipse inequality for a point near the centre (no torus wrap)."""
        dx = float(x[0]) - float(self.center.x)
        dy = float(x[1]) - float(self.center.y)
        M = self.shape
        return math.hypot(M.a * dx + M.b * dy, M.c * dx + M.d * dy) < self.r * scale

    def parallelogram(self) -> np.ndarray:
        c = np.array(self.center.as_float())
        s = np.array(self.major_dir) * self.semi_major
        u = np.array(self.minor_dir) * self.semi_minor
        return c + np.array([u, s, -u, -s])


@dataclass(frozen=True)
class Layer:
    """Period-n layer: centres ``num / den`` in ``[0,1)^2`` and the shared piece shape."""

    n: int
    kind: str  # "full" or "odd_sub"
    den: int
    num: np.ndarray = field(repr=False)
    geometry: PieceGeometry = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.num)

    @property
    def centers(self) -> np.ndarray:
        return self.num / self.den

    @property
    def discs(self) -> list[EllipseDisc]:
        g = self.geometry
        return [
            EllipseDisc(
                center=RationalPoint(Fraction(int(p), self.den), Fraction(int(q), self.den)),
                semi_major=g.lambda1,
                semi_minor=g.lambda2,
                major_dir=g.major_dir,
                minor_dir=g.minor_dir,
                shape=g.shape,
                r=g.r,
            )
            for p, q in self.num
        ]

    @property
    def parallelograms(self) -> np.ndarray:
        """``(size, 4, 2)`` vertex array (centres not wrapped)."""
        return self.centers[:, None, :] + self.geometry.vertices[None, :, :]

    def to_json(self) -> dict:
        g = self.geometry
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "kind": self.kind,
            "lambda1": MP.nstr(g.lambda1_mp, 30),
            "lambda2": MP.nstr(g.lambda2_mp, 30),
            "centers": [
                [[_num(p, self.den), _den(p, self.den)], [_num(q, self.den), _den(q, self.den)]]
                for p, q in self.num.tolist()
            ],
            "axis": {"major": list(g.major_dir), "minor": list(g.minor_dir)},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _num(p, den):
    return Fraction(p, den).numerator


def _den(p, den):
    return Fraction(p, den).denominator


def build_layer(
    spec: SpectralData,
    cfg: RecurrenceConfig,
    n: int,
    kind: str = "full",
    cap: int = DEFAULT_CAP,
) -> Layer:
    """Layer ``n``: one disc per period-n point (``full``) or per inner-lattice point (``odd_sub``)."""
    if not spec.normalized:
        raise ValueError("build_layer needs a normalized matrix")
    r = cfg.r(n)
    if not r < MP.mpf(1) / 4:
        raise DegenerateLayer(f"r_{n} = {MP.nstr(r, 6)} is not below 1/4")
    geom = piece_geometry(spec, cfg, n)
    if kind == "full":
        den, num = periodic_numerators(spec, n, cap=cap)
    elif kind == "odd_sub":
        if n % 2 == 0:
            raise ValueError("odd_sub layers need odd n")
        S = odd_data(spec, (n - 1) // 2).S
        if S * S > cap:
            raise CapExceeded(f"N_{n} = {S * S} exceeds cap {cap}")
        m = np.arange(S, dtype=np.int64)
        num = np.column_stack([np.repeat(m, S), np.tile(m, S)])
        den = S
    else:
        raise ValueError(f"unknown layer kind {kind!r}")
    return Layer(n=n, kind=kind, den=den, num=num, geometry=geom)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

def membership(spec: SpectralData, x, cfg: RecurrenceConfig, n: int) -> bool:
    """``|(A**n - I) x mod 1| < r_n`` in the 60-digit context.

    ``x`` may hold floats, Fractions or decimal strings.
    """
    M = mat_pow(spec.matrix, n).minus_identity()
    px, py = (_to_mp(c) for c in x)
    u, v = M.a * px + M.b * py, M.c * px + M.d * py
    u -= MP.nint(u)
    v -= MP.nint(v)
    return MP.sqrt(u * u + v * v) < cfg.r(n)


def _to_mp(c):
    if isinstance(c, Fraction):
        return MP.mpf(c.numerator) / c.denominator
    return MP.mpf(c)


def membership_mask(spec: SpectralData, pts: np.ndarray, cfg: RecurrenceConfig, n: int) -> np.ndarray:
    """Vectorized float64 version of :func:`membership` for an ``(m, 2)`` array."""
    M = np.array(mat_pow(spec.matrix, n).minus_identity().rows(), dtype=float)
    w = pts @ M.T
    w -= np.rint(w)
    return np.hypot(w[:, 0], w[:, 1]) < float(cfg.r(n))


def torus_delta(d: np.ndarray) -> np.ndarray:
    """Wrap coordinate differences into ``[-1/2, 1/2)``."""
    return d - np.floor(d + 0.5)


# ---------------------------------------------------------------------------
# Areas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AreaReport:
    n: int
    area_per_piece: float  # closed form sqrt((a+d)^2-4)/|b H_n| * r_n^2
    total_area: float  # N_n * area_per_piece
    parallelogram_area: float  # area of the inscribed parallelogram as constructed
    ellipse_area: float  # pi r_n^2 / |H_n|
    ellipse_total_closed_form: float  # pi/|b(a+d-2)| * r_n^2
    pieces: int


def layer_area(spec: SpectralData, cfg: RecurrenceConfig, n: int) -> AreaReport:
    """Closed-form piece and layer areas of the odd sub-layer, plus geometric variants."""
    if n % 2 == 0:
        raise ValueError("layer_area needs odd n")
    A = spec.matrix
    if A.b == 0:
        raise ZeroB("closed-form area divides by b")
    r2 = cfg.r(n) ** 2
    Hn = abs(H(spec, n))
    piece = MP.sqrt(spec.D) / abs(A.b * Hn) * r2
    N = odd_data(spec, (n - 1) // 2).N
    geom = piece_geometry(spec, cfg, n)
    return AreaReport(
        n=n,
        area_per_piece=float(piece),
        total_area=float(piece * N),
        parallelogram_area=geom.parallelogram_area,
        ellipse_area=float(MP.pi * r2 / Hn),
        ellipse_total_closed_form=float(MP.pi / abs(A.b * (spec.trace - 2)) * r2),
        pieces=N,
    )


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------

def _point_polygon_distance(p: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Euclidean distance from points ``p`` (m, 2) to a convex CCW polygon; 0 inside."""
    k = len(poly)
    inside = np.ones(len(p), dtype=bool)
    best = np.full(len(p), np.inf)
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        e = b - a
        w = p - a
        inside &= (e[0] * w[:, 1] - e[1] * w[:, 0]) >= 0
        t = np.clip((w @ e) / (e @ e), 0.0, 1.0)
        proj = a + t[:, None] * e
        best = np.minimum(best, np.hypot(*(p - proj).T))
    best[inside] = 0.0
    return best


def _mp_point_polygon_distance(p, poly) -> object:
    """60-digit version for a single point; ``poly`` is a list of mpf pairs."""
    k = len(poly)
    inside = True
    best = None
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        ex, ey = b[0] - a[0], b[1] - a[1]
        wx, wy = p[0] - a[0], p[1] - a[1]
        if ex * wy - ey * wx < 0:
            inside = False
        t = (wx * ex + wy * ey) / (ex * ex + ey * ey)
        t = min(max(t, MP.mpf(0)), MP.mpf(1))
        d = MP.hypot(wx - t * ex, wy - t * ey)
        best = d if best is None else min(best, d)
    return MP.mpf(0) if inside else best


@dataclass(frozen=True)
class SeparationResult:
    n: int
    pieces: int
    d_n: object  # mpf, min distance between distinct parallelograms (0 if some overlap)
    scaled: object  # d_n * lam**n
    line_separation: object  # min distance from a centre to another centre's stable line, i1 != j1
    line_scaled: object  # line_separation * lam**n
    same_column: object  # min distance between pieces in the same lattice column
    same_column_ratio: object  # same_column * S_k
    witness: tuple  # lattice difference (p, q) realising d_n


def pairwise_separation(
    spec: SpectralData, cfg: RecurrenceConfig, n: int, cap: int = 10**8
) -> SeparationResult:
    """Minimum torus distance between distinct pieces of the odd sub-layer.

    Every piece is a translate of one symmetric parallelogram ``P`` by a
    point of ``(1/S_k) Z^2``, so the distance between two pieces depends
    only on their lattice difference ``v`` and equals ``dist(v, 2P)``.  The
    minimum therefore runs over lattice vectors near ``2P``; all integer
    translates are lattice vectors, so torus wrapping is included.
    """
    if n % 2 == 0:
        raise ValueError("pairwise_separation needs odd n")
    od = odd_data(spec, (n - 1) // 2)
    S = od.S
    if od.N > cap:
        raise CapExceeded(f"N_{n} = {od.N} exceeds cap {cap}")
    geom = piece_geometry(spec, cfg, n)
    poly2 = 2.0 * geom.vertices
    lam_n = spec.lam.to_mpf() ** n
    m_s = float(spec.eigenvector_slope("stable"))

    # Candidate lattice vectors within 1/S of 2P (d_n <= 1/S via v = (1/S, 0)).
    reach = 2.0 * geom.x_extent + 1.0 / S
    pmax = int(math.ceil(reach * S)) + 1
    u = geom.minor_dir
    band = 2.0 * geom.lambda2 * abs(u[1] - m_s * u[0]) + math.sqrt(1 + m_s * m_s) / S
    cands = []
    for p in range(-pmax, pmax + 1):
        yc = m_s * p / S
        lo = int(math.floor((yc - band) * S)) - 1
        hi = int(math.ceil((yc + band) * S)) + 1
        q = np.arange(lo, hi + 1)
        cands.append(np.column_stack([np.full(len(q), p), q]))
    pq = np.concatenate(cands)
    pq = pq[(pq[:, 0] != 0) | (pq[:, 1] != 0)]
    dist = _point_polygon_distance(pq / S, poly2)
    d_min = float(dist.min())
    # refine near-minimal candidates in 60 digits
    near = pq[dist <= d_min * (1 + 1e-6) + 1e-300]
    poly_mp = _mp_poly(geom, 2)
    best, witness = None, None
    for p, q in near:
        d = _mp_point_polygon_distance((MP.mpf(int(p)) / S, MP.mpf(int(q)) / S), poly_mp)
        if best is None or d < best:
            best, witness = d, (int(p), int(q))

    # same column: v = (0, q/S), q != 0 mod S, plus vertical integer translates
    q = np.arange(1, S)
    same = _point_polygon_distance(np.column_stack([np.zeros(len(q)), q / S]), poly2)
    same = np.minimum(same, _point_polygon_distance(np.column_stack([np.zeros(len(q)), q / S - 1]), poly2))
    same_col = MP.mpf(float(same.min())) if len(q) else MP.inf

    # distance from a centre to the stable line through another centre, i1 != j1
    line = MP.inf
    if S > 1:
        m_mp = spec.eigenvector_slope("stable").to_mpf()
        norm = MP.sqrt(1 + m_mp * m_mp)
        p = np.arange(1, S)
        frac = np.abs(m_s * p - np.rint(m_s * p))
        cand = p[frac <= frac.min() * (1 + 1e-6) + 1e-12]
        for pp in cand:
            y = m_mp * int(pp)
            line = min(line, abs(y - MP.nint(y)) / (S * norm))
    return SeparationResult(
        n=n,
        pieces=od.N,
        d_n=best,
        scaled=best * lam_n,
        line_separation=line,
        line_scaled=line * lam_n,
        same_column=same_col,
        same_column_ratio=same_col * S,
        witness=witness,
    )


def _mp_poly(geom: PieceGeometry, factor: int):
    l1, l2 = geom.lambda1_mp * factor, geom.lambda2_mp * factor
    s = [MP.mpf(c) for c in geom.major_dir]
    u = [MP.mpf(c) for c in geom.minor_dir]
    pts = [(u[0] * l2, u[1] * l2), (s[0] * l1, s[1] * l1), (-u[0] * l2, -u[1] * l2), (-s[0] * l1, -s[1] * l1)]
    a, b, c = pts[0], pts[1], pts[2]
    if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < 0:
        pts = pts[::-1]
    return pts


# ---------------------------------------------------------------------------
# Vertical slices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceFamily:
    x0: float
    n: int
    intervals: np.ndarray = field(repr=False)  # (M_n, 2): lo in [0,1), hi = lo + length
    M: int
    lambda2: float


def _chords(geom: PieceGeometry, dx: np.ndarray):
    """Vertical chord ``(ymin, ymax)`` of the centred parallelogram at offsets ``dx``; NaN if missed."""
    V = geom.vertices
    ymin = np.full(dx.shape, np.inf)
    ymax = np.full(dx.shape, -np.inf)
    for i in range(4):
        a, b = V[i], V[(i + 1) % 4]
        if a[0] == b[0]:
            continue
        t = (dx - a[0]) / (b[0] - a[0])
        hit = (t >= 0) & (t <= 1)
        y = a[1] + t * (b[1] - a[1])
        ymin = np.where(hit, np.minimum(ymin, y), ymin)
        ymax = np.where(hit, np.maximum(ymax, y), ymax)
    miss = ~np.isfinite(ymin)
    ymin[miss] = np.nan
    ymax[miss] = np.nan
    return ymin, ymax


def slice_chords(layer_or_S, geom: PieceGeometry, x0: float):
    """Chords of all odd sub-layer pieces on the vertical line ``x = x0``.

    Returns ``(lo, length)`` arrays; ``lo`` wrapped into ``[0, 1)``.
    """
    S = layer_or_S if isinstance(layer_or_S, int) else layer_or_S.den
    xe = geom.x_extent
    mlo = int(math.floor((x0 - xe) * S))
    mhi = int(math.ceil((x0 + xe) * S))
    m = np.arange(mlo, mhi + 1)
    dx = x0 - m / S
    keep = np.abs(dx) <= xe
    m, dx = m[keep], dx[keep]
    if len(m) == 0:
        return np.empty(0), np.empty(0)
    ymin, ymax = _chords(geom, dx)
    ok = np.isfinite(ymin)
    dx, ymin, ymax = dx[ok], ymin[ok], ymax[ok]
    j = np.arange(S)
    lo = (j[None, :] / S + ymin[:, None]) % 1.0
    length = np.broadcast_to((ymax - ymin)[:, None], lo.shape)
    return lo.ravel(), np.ascontiguousarray(length).ravel()


def line_slice(
    spec: SpectralData,
    cfg: RecurrenceConfig,
    x0: float,
    n: int,
    segment: tuple | None = None,
    lower: float = 1.0 / 3.0,
) -> SliceFamily:
    """Chords of odd sub-layer pieces on ``x = x0`` with length in ``[lower*lambda2, 2*lambda2]``.

    ``segment=(y0, ell)`` keeps only chords lying inside ``[y0, y0 + ell]`` (mod 1).
    """
    if n % 2 == 0:
        raise ValueError("line_slice needs odd n")
    if not 0 <= x0 < 1:
        raise ValueError("x0 must lie in [0, 1)")
    S = odd_data(spec, (n - 1) // 2).S
    geom = piece_geometry(spec, cfg, n)
    lo, length = slice_chords(S, geom, x0)
    l2 = geom.lambda2
    keep = (length >= lower * l2) & (length <= 2.0 * l2)
    if segment is not None:
        y0, ell = segment
        rel = (lo - y0) % 1.0
        keep &= rel + length <= ell
    lo, length = lo[keep], length[keep]
    order = np.argsort(lo, kind="stable")
    iv = np.column_stack([lo[order], lo[order] + length[order]])
    return SliceFamily(x0=x0, n=n, intervals=iv, M=len(iv), lambda2=l2)
