"""Closed-form dimension value and the two covering sums behind its upper bound."""

from __future__ import annotations

from dataclasses import dataclass

from ..exact_core import MP, SpectralData, H
from ..recurrence_geometry import RecurrenceConfig, radii

PARALLELOGRAM = "parallelogram-covering"
BALL = "ball-covering"


@dataclass(frozen=True)
class DimFormula:
    alpha: float
    logLambda: float
    s0: float
    s1: float
    activeBranch: str
    parallelogram_branch: float
    ball_branch: float

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "logLambda": self.logLambda,
            "s0": self.s0,
            "s1": self.s1,
            "activeBranch": self.activeBranch,
        }


def dim_formula(alpha: float, logLambda: float) -> DimFormula:
    """``s0 = min(2L/(alpha+L), L/alpha)`` and ``s1 = (L-alpha)/(L+alpha)``.

    The parallelogram branch is reported as active for ``alpha <= L``, where
    it is the smaller (equal at ``alpha == L``).
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if not logLambda > 0:
        raise ValueError("logLambda must be > 0")
    a, L = float(alpha), float(logLambda)
    par = 2.0 * L / (a + L)
    ball = L / a
    branch = PARALLELOGRAM if a <= L else BALL
    return DimFormula(
        alpha=a,
        logLambda=L,
        s0=par if branch == PARALLELOGRAM else ball,
        s1=(L - a) / (L + a),
        activeBranch=branch,
        parallelogram_branch=par,
        ball_branch=ball,
    )


def dim_curve(alphas, logLambda: float) -> list[DimFormula]:
    return [dim_formula(a, logLambda) for a in alphas]


@dataclass(frozen=True)
class CoveringTerms:
    n: int
    s: float
    ballSumTerm: object  # mpf
    squareSumTerm: object  # mpf
    gamma: int


def covering_upper_counts(spec: SpectralData, cfg: RecurrenceConfig, n: int, s: float) -> CoveringTerms:
    """n-th terms of the two Hausdorff sums.

    Balls: ``|H_n| (2 lambda_{n,1})**s``.  Squares of side ``2 lambda_{n,2}``:
    ``|H_n| * ceil(lambda_{n,1}/lambda_{n,2}) * (2 sqrt2 lambda_{n,2})**s``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    l1, l2 = radii(spec, cfg, n)
    Hn = MP.mpf(abs(H(spec, n)))
    gamma = int(MP.ceil(l1 / l2))
    s = MP.mpf(s)
    return CoveringTerms(
        n=n,
        s=float(s),
        ballSumTerm=Hn * (2 * l1) ** s,
        squareSumTerm=Hn * gamma * (2 * MP.sqrt(2) * l2) ** s,
        gamma=gamma,
    )


def covering_ratios(spec: SpectralData, cfg: RecurrenceConfig, s: float, ns) -> list[tuple]:
    """Consecutive-term ratios ``(n, ball_ratio, square_ratio)`` with their predicted limits."""
    terms = {n: covering_upper_counts(spec, cfg, n, s) for n in list(ns) + [max(ns) + 1]}
    out = []
    for n in ns:
        a, b = terms[n], terms[n + 1]
        out.append((n, b.ballSumTerm / a.ballSumTerm, b.squareSumTerm / a.squareSumTerm))
    return out


def predicted_ratios(logLambda: float, alpha: float, s: float) -> tuple[float, float]:
    L = MP.mpf(logLambda)
    a = MP.mpf(alpha)
    s = MP.mpf(s)
    return MP.exp(L - a * s), MP.exp(2 * L - (a + L) * s)


__all__ = [
    "DimFormula",
    "CoveringTerms",
    "dim_formula",
    "dim_curve",
    "covering_upper_counts",
    "covering_ratios",
    "predicted_ratios",
    "PARALLELOGRAM",
    "BALL",
]
