"""How evenly ``mu_n`` spreads over the torus, ball by ball."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._parallel import map_ordered
from ..exact_core import SpectralData
from ..periodic_points import DEFAULT_CAP
from ..recurrence_geometry import RecurrenceConfig, torus_delta
from .energy import DEFAULT_SEED, _odd_sub_setup, sample_measure


@dataclass(frozen=True)
class BallSpec:
    """``count`` random balls of ``radius`` (``None`` = whole torus), ``samples`` points of ``mu_n`` each."""

    count: int = 100
    radius: float | None = 0.1
    samples: int = 100_000
    seed: int = DEFAULT_SEED
    centers: tuple | None = None


@dataclass(frozen=True)
class MeasureCheck:
    n: int
    radius: float | None
    balls: tuple = field(repr=False)  # centres
    ratios: tuple = field(repr=False)
    minRatio: float
    maxRatio: float
    samples: int
    seed: int

    @property
    def spread(self) -> float:
        return self.maxRatio / self.minRatio

    def to_json(self) -> dict:
        return {
            "n": self.n, "radius": self.radius, "balls": [list(c) for c in self.balls],
            "ratios": list(self.ratios), "minRatio": self.minRatio, "maxRatio": self.maxRatio,
            "samples": self.samples, "seed": self.seed,
        }


def measure_uniformity(
    spec: SpectralData, cfg: RecurrenceConfig, n: int, ballSpec: BallSpec = BallSpec(), cap: int = DEFAULT_CAP
) -> MeasureCheck:
    """Ratios ``mu_n(B) / Leb(B)`` with ``mu_n(B)`` estimated from fresh samples of ``mu_n`` per ball."""
    S, geom, E = _odd_sub_setup(spec, cfg, n, cap)
    rad = ballSpec.radius
    if rad is None:
        return MeasureCheck(n=n, radius=None, balls=((0.5, 0.5),), ratios=(1.0,), minRatio=1.0,
                            maxRatio=1.0, samples=0, seed=ballSpec.seed)
    if not 0 < rad < 0.5:
        raise ValueError("radius must lie in (0, 1/2)")
    if rad < 10 * geom.lambda1:
        raise ValueError(f"radius {rad} is below 10 * lambda_1 = {10 * geom.lambda1:.3g}")
    ss = np.random.SeedSequence(ballSpec.seed)
    head, *kids = ss.spawn(ballSpec.count + 1)
    if ballSpec.centers is not None:
        centers = np.asarray(ballSpec.centers, dtype=float).reshape(-1, 2)
        if len(centers) != ballSpec.count:
            raise ValueError("centers must have `count` rows")
    else:
        centers = np.random.default_rng(head).uniform(0.0, 1.0, size=(ballSpec.count, 2))
    area = math.pi * rad * rad

    def one(i):
        rng = np.random.default_rng(kids[i])
        x = sample_measure(rng, S, E, ballSpec.samples)
        d = torus_delta(x - centers[i])
        inside = np.count_nonzero(np.hypot(d[:, 0], d[:, 1]) < rad)
        return inside / ballSpec.samples / area

    ratios = map_ordered(one, range(ballSpec.count))
    if min(ratios) <= 0:
        raise ValueError("a ball received no samples; increase samples or radius")
    return MeasureCheck(
        n=n,
        radius=rad,
        balls=tuple(tuple(map(float, c)) for c in centers),
        ratios=tuple(float(r) for r in ratios),
        minRatio=float(min(ratios)),
        maxRatio=float(max(ratios)),
        samples=ballSpec.samples,
        seed=ballSpec.seed,
    )


__all__ = ["BallSpec", "MeasureCheck", "measure_uniformity"]
