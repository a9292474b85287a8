"""Riesz energies of the natural measures on recurrence layers.

Distances are divided by half the diameter of the ambient space
(``1/2`` on the circle, ``sqrt(2)/2`` on the torus), so every normalized
distance lies in ``(0, 1]`` and energies are non-decreasing in ``s``.

One-dimensional energies are exact sums of closed-form interval-pair
integrals.  The planar energy of ``mu_n`` (normalized Lebesgue measure on
the odd sub-layer) splits into the self-interaction of a single piece,
which is a deterministic one-dimensional quadrature, and the interaction
between distinct pieces, which is estimated by Monte Carlo.  Plain pair
sampling is kept as an alternative estimator; for ``s >= 1`` its variance
is infinite.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .._parallel import map_ordered, seeded_chunks
from ..errors import DegenerateLayer, EmptySlice, SelfEnergyDiverges
from ..exact_core import SpectralData
from ..periodic_points import DEFAULT_CAP, odd_data
from ..recurrence_geometry import RecurrenceConfig, line_slice, piece_geometry, torus_delta

CIRCLE_HALF = 0.5
TORUS_HALF = math.sqrt(2.0) / 2.0
DEFAULT_SEED = 42
DEFAULT_PAIRS = 10_000_000
_PAIR_CHUNK = 1_000_000
_TAYLOR_RATIO = 1e-2


@dataclass(frozen=True)
class EnergyResult:
    s: float
    n: int
    estimate: float
    stderr: float
    sampleCount: int
    seed: int | None
    method: str = "exact"

    def __post_init__(self):
        if not self.estimate > 0:
            raise ValueError("energy estimate must be positive")

    def to_record(self, op: str, params: dict, runtime_ms: float | None = None) -> dict:
        return {
            "op": op,
            "params": params,
            "seed": self.seed,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "runtimeMs": runtime_ms,
            "result": asdict(self),
        }

    def dumps(self, op: str, params: dict, runtime_ms: float | None = None) -> str:
        return json.dumps(self.to_record(op, params, runtime_ms), sort_keys=True)


# ---------------------------------------------------------------------------
# circle kernel antiderivatives
# ---------------------------------------------------------------------------

def _phi2(v, s):
    """Second antiderivative of ``v**-s`` on ``v >= 0`` vanishing with its derivative's limit at 0."""
    v = np.asarray(v, dtype=float)
    if s == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)) - v, 0.0)
    if s == 2.0:
        with np.errstate(divide="ignore"):
            return -np.log(v)
    return v ** (2.0 - s) / ((1.0 - s) * (2.0 - s))


def _dphi2(v, s):
    if s == 1.0:
        return math.log(v)
    if s == 2.0:
        return -1.0 / v
    return v ** (1.0 - s) / (1.0 - s)


def circle_F2(u, s: float, half: float = CIRCLE_HALF):
    """C^1 second antiderivative of ``(d(u)/half)**-s`` for ``|u| < 1``, ``d`` the circle distance."""
    u = np.abs(np.asarray(u, dtype=float))
    c = half**s
    near = _phi2(np.minimum(u, 0.5), s)
    far = _phi2(np.clip(1.0 - u, 0.0, 0.5), s) + 2.0 * _dphi2(0.5, s) * (u - 0.5)
    return c * np.where(u <= 0.5, near, far)


def circle_F1(u, s: float, half: float = CIRCLE_HALF):
    """Odd antiderivative of ``(d(u)/half)**-s`` for ``|u| < 1``; requires ``s < 1``."""
    if s >= 1:
        raise SelfEnergyDiverges("line potential is infinite for s >= 1")
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    c = half**s
    near = np.minimum(a, 0.5) ** (1 - s) / (1 - s)
    far = 2 * 0.5 ** (1 - s) / (1 - s) - np.maximum(1 - a, 0.0) ** (1 - s) / (1 - s)
    return c * np.sign(u) * np.where(a <= 0.5, near, far)


def _align(a, b, c, d):
    """Shift ``[c, d]`` by an integer so its midpoint is within 1/2 of ``[a, b]``'s."""
    k = np.rint(((a + b) - (c + d)) / 2.0)
    return c + k, d + k


def pair_integral(a, b, c, d, s: float, half: float = CIRCLE_HALF):
    """``int_a^b int_c^d (d(x - y)/half)**-s dy dx`` on the unit circle, vectorized.

    Intervals must be shorter than 1/2.  Well separated short pairs use the
    fourth-order expansion of the same closed form, which avoids cancellation.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    c, d = _align(a, b, c, d)
    l1, l2 = b - a, d - c
    delta = np.abs((a + b) / 2 - (c + d) / 2)
    far = (np.maximum(l1, l2) < _TAYLOR_RATIO * delta) & (delta + (l1 + l2) / 2 < 0.5)
    out = np.empty(np.broadcast(a, c).shape)
    F = circle_F2
    with np.errstate(invalid="ignore", divide="ignore"):
        closed = F(b - c, s, half) - F(a - c, s, half) - F(b - d, s, half) + F(a - d, s, half)
        dn = delta / half
        g0 = dn ** (-s)
        m2 = (l1**2 + l2**2) / 12.0 / half**2
        m4 = (l1**4 / 80.0 + l1**2 * l2**2 / 24.0 + l2**4 / 80.0) / half**4
        g2 = s * (s + 1) * dn ** (-s - 2)
        g4 = s * (s + 1) * (s + 2) * (s + 3) * dn ** (-s - 4)
        taylor = l1 * l2 * (g0 + g2 * m2 / 2.0 + g4 * m4 / 24.0)
    out[...] = np.where(far, taylor, closed)
    return out


def interval_self_energy(length, s: float, half: float = CIRCLE_HALF):
    """``int int`` over one interval of length ``< 1/2``; infinite for ``s >= 1``."""
    if s >= 1:
        raise SelfEnergyDiverges("self-energy of an interval is infinite for s >= 1")
    return 2.0 * circle_F2(length, s, half)


def interval_energy(intervals, s: float, half: float = CIRCLE_HALF, block: int = 2048) -> float:
    """Energy of normalized length on a disjoint union of circle intervals ``[lo, hi]``."""
    iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
    if len(iv) == 0:
        raise EmptySlice("no intervals")
    if s >= 1:
        raise SelfEnergyDiverges("self-energy of an interval is infinite for s >= 1")
    lo, hi = iv[:, 0], iv[:, 1]
    L = float((hi - lo).sum())
    total = 0.0
    idx = np.arange(len(iv))
    for start in range(0, len(iv), block):
        sl = slice(start, min(start + block, len(iv)))
        P = pair_integral(lo[sl, None], hi[sl, None], lo[None, :], hi[None, :], s, half)
        P[idx[sl] - start, idx[sl]] = interval_self_energy(hi[sl] - lo[sl], s, half)
        total += float(P.sum())
    return total / (L * L)


def interval_potential(x, intervals, s: float, half: float = CIRCLE_HALF):
    """``R_s mu (x)`` for normalized length ``mu`` on circle intervals, vectorized over ``x``."""
    iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = iv[:, 0], iv[:, 1]
    L = float((hi - lo).sum())
    mid = (lo + hi) / 2
    shift = np.rint(x[:, None] - mid[None, :])
    a = lo[None, :] + shift - x[:, None]
    b = hi[None, :] + shift - x[:, None]
    return (circle_F1(b, s, half) - circle_F1(a, s, half)).sum(axis=1) / L


def riesz_energy_1d(spec: SpectralData, cfg: RecurrenceConfig, x0: float, n: int, s: float) -> EnergyResult:
    """Exact energy of normalized length on the slice of the odd sub-layer at ``x = x0``."""
    if s >= 1:
        raise SelfEnergyDiverges("self-energy of an interval is infinite for s >= 1")
    fam = line_slice(spec, cfg, x0, n)
    if fam.M == 0:
        raise EmptySlice(f"no chords on x = {x0} at n = {n}")
    e = interval_energy(fam.intervals, s)
    return EnergyResult(s=float(s), n=n, estimate=e, stderr=0.0, sampleCount=fam.M * fam.M, seed=None)


# ---------------------------------------------------------------------------
# planar energy
# ---------------------------------------------------------------------------

def _piece_frame(geom):
    """Columns ``e1, e2`` with piece = centre + {p e1 + q e2 : |p|, |q| <= 1}."""
    u = np.array(geom.minor_dir) * geom.lambda2
    v = np.array(geom.major_dir) * geom.lambda1
    return np.column_stack([(u + v) / 2.0, (u - v) / 2.0])


def piece_self_energy(E: np.ndarray, s: float, half: float = TORUS_HALF) -> float:
    """``E[(|X - Y|/half)**-s]`` for ``X, Y`` uniform on ``E [-1,1]^2``, by radial closed form.

    The difference ``X - Y`` has density ``tent(p) tent(q) / |det E|`` in the
    frame coordinates; the radial integral is elementary and the angular one
    is done by adaptive quadrature.
    """
    if s >= 2:
        raise SelfEnergyDiverges("planar self-energy is infinite for s >= 2")
    Einv = np.linalg.inv(E)
    det = abs(np.linalg.det(E))
    c = half**s

    def radial(theta):
        w = np.array([math.cos(theta), math.sin(theta)])
        al, be = np.abs(Einv @ w)
        R = 2.0 / max(al, be)
        val = (4 * R ** (2 - s) / (2 - s) - 2 * (al + be) * R ** (3 - s) / (3 - s)
               + al * be * R ** (4 - s) / (4 - s))
        return val

    # kinks of the integrand: |alpha| = |beta|, alpha = 0, beta = 0
    r0, r1 = Einv
    pts = [math.atan2(-v[0], v[1]) % math.pi for v in (r0 - r1, r0 + r1, r0, r1)]
    pts = sorted(set(p for p in pts if 0 < p < math.pi))
    val, _ = integrate.quad(radial, 0.0, math.pi, points=pts or None, limit=500, epsabs=0, epsrel=1e-11)
    return 2.0 * c * val / (16.0 * det)


def _odd_sub_setup(spec, cfg, n, cap):
    if n % 2 == 0:
        raise ValueError("the planar energy uses the odd sub-layer; n must be odd")
    S = odd_data(spec, (n - 1) // 2).S
    if S * S > cap:
        from ..errors import CapExceeded

        raise CapExceeded(f"N_{n} = {S * S} exceeds cap {cap}")
    geom = piece_geometry(spec, cfg, n)
    E = _piece_frame(geom)
    if abs(np.linalg.det(E)) == 0:
        raise DegenerateLayer("pieces have zero area")
    return S, geom, E


def sample_measure(rng, S: int, E: np.ndarray, size: int, piece=None) -> np.ndarray:
    """``size`` points of ``mu_n``: a uniform piece of the ``S x S`` lattice, uniform inside it."""
    if piece is None:
        piece = rng.integers(0, S * S, size=size)
    cen = np.column_stack([piece // S, piece % S]) / S
    pq = rng.uniform(-1.0, 1.0, size=(size, 2))
    return cen + pq @ E.T


def _kernel(x, y, s):
    d = torus_delta(x - y)
    dist = np.hypot(d[:, 0], d[:, 1]) / TORUS_HALF
    return dist ** (-s)


def riesz_energy_2d(
    spec: SpectralData,
    cfg: RecurrenceConfig,
    n: int,
    s: float,
    sampler: str = "hybrid",
    pairs: int = DEFAULT_PAIRS,
    seed: int = DEFAULT_SEED,
    cap: int = DEFAULT_CAP,
) -> EnergyResult:
    """Energy ``I_s(mu_n)`` of normalized Lebesgue measure on the odd sub-layer ``E_n``.

    ``sampler='hybrid'``: exact single-piece term plus Monte Carlo over pairs
    of distinct pieces.  ``sampler='pairs'``: plain Monte Carlo over pairs of
    independent points of ``mu_n``.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if sampler not in ("hybrid", "pairs"):
        raise ValueError(f"unknown sampler {sampler!r}")
    S, geom, E = _odd_sub_setup(spec, cfg, n, cap)
    N = S * S

    def work(item):
        size, rng = item
        if sampler == "pairs":
            x = sample_measure(rng, S, E, size)
            y = sample_measure(rng, S, E, size)
        else:
            i = rng.integers(0, N, size=size)
            j = (i + 1 + rng.integers(0, N - 1, size=size)) % N
            x = sample_measure(rng, S, E, size, piece=i)
            y = sample_measure(rng, S, E, size, piece=j)
        k = _kernel(x, y, s)
        return float(k.sum()), float((k * k).sum())

    if sampler == "hybrid" and N == 1:
        est = piece_self_energy(E, s)
        return EnergyResult(s=float(s), n=n, estimate=est, stderr=0.0, sampleCount=0, seed=seed, method=sampler)
    parts = map_ordered(work, seeded_chunks(seed, pairs, _PAIR_CHUNK))
    tot = math.fsum(p[0] for p in parts)
    tot2 = math.fsum(p[1] for p in parts)
    mean = tot / pairs
    var = max(tot2 / pairs - mean * mean, 0.0)
    se = math.sqrt(var / pairs)
    if sampler == "pairs":
        est = mean
    else:
        w = (N - 1) / N
        est = piece_self_energy(E, s) / N + w * mean
        se *= w
    return EnergyResult(s=float(s), n=n, estimate=est, stderr=se, sampleCount=pairs, seed=seed, method=sampler)


def timed(fn, *args, **kwargs):
    """``(result, runtime in ms)``."""
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, (time.perf_counter() - t) * 1e3


__all__ = [
    "EnergyResult",
    "circle_F1",
    "circle_F2",
    "pair_integral",
    "interval_self_energy",
    "interval_energy",
    "interval_potential",
    "riesz_energy_1d",
    "riesz_energy_2d",
    "piece_self_energy",
    "sample_measure",
    "timed",
    "CIRCLE_HALF",
    "TORUS_HALF",
]
