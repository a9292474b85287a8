"""Exact enumeration and counting of period-n points of ``x -> A x mod 1``.

A point is period-n when ``(A**n - I) x`` is an integer vector.  The full
set is enumerated through the Smith normal form of ``A**n - I``; the odd
period lattices ``(m/S_k, j/S_k)`` and the containing lattices with
denominators ``S_k'`` (odd n) and ``g_k`` (even n) are provided for the
lower-bound construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CapExceeded, DegenerateParallelogram
from .exact_core import (
    H,
    IntMatrix2,
    QuadraticReal,
    SpectralData,
    lucas_u,
    mat_pow,
    trace_sequence,
)

__all__ = [
    "RationalPoint",
    "OddPeriodData",
    "PeriodicSet",
    "smith_normal_form",
    "odd_data",
    "is_periodic",
    "enumerate_periodic",
    "inner_lattice_odd",
    "candidate_lattice_odd",
    "candidate_lattice_even",
    "pick_count",
    "parallelogram_vertices",
    "periodic_numerators",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 10**6


@dataclass(frozen=True, order=True)
class RationalPoint:
    """Point of the torus with exact rational coordinates in ``[0, 1)``."""

    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x) % 1)
        object.__setattr__(self, "y", Fraction(self.y) % 1)

    def as_float(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))

    def to_json(self) -> list[list[int]]:
        return [[self.x.numerator, self.x.denominator], [self.y.numerator, self.y.denominator]]

    def __str__(self):
        return f"({self.x}, {self.y})"


@dataclass(frozen=True)
class OddPeriodData:
    k: int
    n: int
    S: int
    S_prime: int
    R: int
    N: int


@dataclass(frozen=True)
class PeriodicSet:
    n: int
    points: list = field(repr=False)
    count: int


# ---------------------------------------------------------------------------
# Smith normal form (2x2)
# ---------------------------------------------------------------------------

def _row_op(M, i, j, q):
    """row_i -= q * row_j"""
    M[i] = [M[i][0] - q * M[j][0], M[i][1] - q * M[j][1]]


def _col_op(M, i, j, q):
    """col_i -= q * col_j"""
    for r in range(2):
        M[r][i] -= q * M[r][j]


def smith_normal_form(M: IntMatrix2):
    """Return ``(U, S, V)`` with ``U @ M @ V == S = diag(d1, d2)``, ``d1 | d2``, ``d1, d2 >= 0``.

    ``U`` and ``V`` are unimodular integer matrices.
    """
    S = [list(r) for r in M.rows()]
    U = [[1, 0], [0, 1]]
    V = [[1, 0], [0, 1]]

    def swap_rows():
        S.reverse()
        U.reverse()

    def swap_cols():
        for X in (S, V):
            for r in X:
                r.reverse()

    while True:
        entries = [(abs(S[i][j]), i, j) for i in range(2) for j in range(2) if S[i][j] != 0]
        if not entries:
            break
        _, i, j = min(entries)
        if i == 1:
            swap_rows()
        if j == 1:
            swap_cols()
        p = S[0][0]
        q_row = S[1][0] // p
        _row_op(S, 1, 0, q_row)
        _row_op(U, 1, 0, q_row)
        q_col = S[0][1] // p
        _col_op(S, 1, 0, q_col)
        _col_op(V, 1, 0, q_col)
        if S[1][0] != 0 or S[0][1] != 0:
            continue
        if S[1][1] % p != 0:
            # fold row 2 into row 1 and reduce again
            S[0] = [S[0][0] + S[1][0], S[0][1] + S[1][1]]
            U[0] = [U[0][0] + U[1][0], U[0][1] + U[1][1]]
            continue
        break
    for i in range(2):
        if S[i][i] < 0:
            S[i] = [-S[i][0], -S[i][1]]
            U[i] = [-U[i][0], -U[i][1]]
    return IntMatrix2.from_rows(U), IntMatrix2.from_rows(S), IntMatrix2.from_rows(V)


# ---------------------------------------------------------------------------
# Odd-period algebra
# ---------------------------------------------------------------------------

def odd_data(spec: SpectralData, k: int) -> OddPeriodData:
    """``S_k``, ``S_k' = (trA - 2) S_k``, ``R_k`` and ``N_n = S_k**2`` for ``n = 2k + 1``.

    The closed forms in the eigenvalue are checked exactly in Q(sqrt(D)),
    together with ``H_{2k+1} == -(trA - 2) S_k**2``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    t = spec.trace
    ts = trace_sequence(t, k)
    S = 1 + sum(ts[1:])
    R = (-1) ** k + sum((-1) ** (k - j) * ts[j] for j in range(1, k + 1))
    lam = spec.lam
    if S != (lam ** (-k) - lam ** (k + 1)) / (1 - lam):
        raise ArithmeticError("S_k closed form mismatch")
    if R != (lam ** (k + 1) + lam ** (-k)) / (1 + lam):
        raise ArithmeticError("R_k closed form mismatch")
    n = 2 * k + 1
    if H(spec, n) != -(t - 2) * S * S:
        raise ArithmeticError("H_{2k+1} != -(trA-2) S_k^2")
    return OddPeriodData(k=k, n=n, S=S, S_prime=(t - 2) * S, R=R, N=S * S)


def is_periodic(spec_or_matrix, x, n: int) -> bool:
    """Exact test that ``(A**n - I) x`` has integer entries."""
    A = spec_or_matrix.matrix if isinstance(spec_or_matrix, SpectralData) else spec_or_matrix
    if isinstance(x, RationalPoint):
        px, py = x.x, x.y
    else:
        px, py = Fraction(x[0]), Fraction(x[1])
    M = mat_pow(A, n).minus_identity()
    u, v = M.apply(px, py)
    return u.denominator == 1 and v.denominator == 1


def enumerate_periodic(spec: SpectralData, n: int, cap: int = DEFAULT_CAP) -> PeriodicSet:
    """All period-n points, each exactly once, via the Smith normal form of ``A**n - I``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    M = mat_pow(spec.matrix, n).minus_identity()
    count = abs(M.det)
    if count > cap:
        raise CapExceeded(f"|H_{n}| = {count} exceeds cap {cap}")
    _, S, V = smith_normal_form(M)
    d1, d2 = S.a, S.d
    pts = []
    for i in range(d1):
        for j in range(d2):
            pts.append(RationalPoint(*V.apply(Fraction(i, d1), Fraction(j, d2))))
    pts.sort()
    return PeriodicSet(n=n, points=pts, count=len(pts))


def inner_lattice_odd(spec: SpectralData, k: int) -> list[RationalPoint]:
    """The ``S_k**2`` points ``(m/S_k, j/S_k)``, all of period ``2k + 1``."""
    S = odd_data(spec, k).S
    return [RationalPoint(Fraction(m, S), Fraction(j, S)) for m in range(S) for j in range(S)]


def candidate_lattice_odd(spec: SpectralData, k: int) -> int:
    """Denominator ``S_k'`` of the lattice containing every period-(2k+1) point."""
    return odd_data(spec, k).S_prime


def candidate_lattice_even(spec: SpectralData, k: int) -> int:
    """Denominator ``g_k = D * u_k`` of the lattice claimed to contain every period-2k point."""
    if k < 1:
        raise ValueError("k must be >= 1 (g_0 = 0)")
    g = spec.D * lucas_u(spec, k)
    lam = spec.lam
    # g_k = sqrt(D) * (lam^k - lam^-k), exactly
    if QuadraticReal(0, 1, spec.D) * (lam**k - lam ** (-k)) != g:
        raise ArithmeticError("g_k integer form mismatch")
    return g


# ---------------------------------------------------------------------------
# Pick's theorem bookkeeping
# ---------------------------------------------------------------------------

def _open_interval_ints(lo_num: int, hi_num: int, den: int) -> tuple[int, int]:
    """Integers strictly inside ``(lo_num/den, hi_num/den)``, ``den > 0``; returns inclusive range."""
    return lo_num // den + 1, -((-hi_num) // den) - 1


def _interior_points(u, w) -> int:
    """Number of lattice points strictly inside the parallelogram spanned by ``u`` and ``w``."""
    det = u[0] * w[1] - u[1] * w[0]
    sg = 1 if det > 0 else -1
    area = abs(det)
    # s*area = sg*(x*w1 - y*w0), t*area = sg*(u0*y - u1*x); interior iff both in (0, area)
    ys = [0, u[1], w[1], u[1] + w[1]]
    total = 0
    for y in range(min(ys) + 1, max(ys)):
        lo, hi = -math.inf, math.inf
        ok = True
        for coef, const in ((sg * w[1], -sg * y * w[0]), (-sg * u[1], sg * u[0] * y)):
            # 0 < coef*x + const < area
            if coef == 0:
                if not (0 < const < area):
                    ok = False
                    break
                continue
            if coef > 0:
                a, b = _open_interval_ints(-const, area - const, coef)
            else:
                a, b = _open_interval_ints(const - area, const, -coef)
            lo, hi = max(lo, a), min(hi, b)
        if ok and hi >= lo:
            total += hi - lo + 1
    return total


def pick_count(vertices) -> int:
    """Lattice points of the half-open parallelogram ``(0,0), u, w, u + w``.

    Computed as ``i + N1 + N2 - 3`` from an explicit scan of interior points
    ``i`` and the edge counts ``N1 = gcd(u) + 1``, ``N2 = gcd(w) + 1``.
    """
    (x0, y0), u, w, _ = vertices
    if (x0, y0) != (0, 0):
        raise ValueError("first vertex must be the origin")
    u = (int(u[0]), int(u[1]))
    w = (int(w[0]), int(w[1]))
    if u[0] * w[1] - u[1] * w[0] == 0:
        raise DegenerateParallelogram(f"vectors {u} and {w} span zero area")
    i = _interior_points(u, w)
    n1 = math.gcd(*u) + 1
    n2 = math.gcd(*w) + 1
    return i + n1 + n2 - 3


def parallelogram_vertices(M: IntMatrix2):
    """Vertices of ``M [0,1]^2`` in the order used by :func:`pick_count`."""
    return [(0, 0), (M.a, M.c), (M.b, M.d), (M.a + M.b, M.c + M.d)]


def periodic_numerators(spec: SpectralData, n: int, cap: int = DEFAULT_CAP):
    """Vectorized period-n points as ``(den, num)`` with ``num`` an ``(|H_n|, 2)`` int array.

    Points are ``num / den`` in ``[0, 1)^2``, sorted lexicographically; same
    set as :func:`enumerate_periodic`.
    """
    import numpy as np

    M = mat_pow(spec.matrix, n).minus_identity()
    count = abs(M.det)
    if count > cap:
        raise CapExceeded(f"|H_{n}| = {count} exceeds cap {cap}")
    _, S, V = smith_normal_form(M)
    d1, d2 = S.a, S.d
    if max(abs(e) for e in V.entries()) * d2 * 2 >= 2**62:
        raise CapExceeded("SNF transform too large for int64 enumeration")
    i = np.repeat(np.arange(d1, dtype=np.int64) * (d2 // d1), d2)
    j = np.tile(np.arange(d2, dtype=np.int64), d1)
    num = np.empty((count, 2), dtype=np.int64)
    num[:, 0] = (V.a * i + V.b * j) % d2
    num[:, 1] = (V.c * i + V.d * j) % d2
    order = np.lexsort((num[:, 1], num[:, 0]))
    return d2, num[order]
