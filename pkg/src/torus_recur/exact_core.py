"""Exact integer and quadratic-field arithmetic for 2x2 toral automorphisms.

Everything here is exact: matrices hold Python ints, field elements
``p + q*sqrt(D)`` hold :class:`fractions.Fraction` coefficients.  Floating
values are produced on demand through a private 60-digit mpmath context.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import mpmath

from .errors import NotHyperbolic, NotUnimodular

__all__ = [
    "MP",
    "IntMatrix2",
    "QuadraticReal",
    "SpectralData",
    "mat_pow",
    "spectral_analyze",
    "normalize",
    "prepare",
    "trace_power",
    "trace_sequence",
    "H",
    "lucas_u",
]

#: Private high-precision context (does not touch ``mpmath.mp``).
MP = mpmath.MPContext()
MP.dps = 60


@dataclass(frozen=True)
class IntMatrix2:
    """Row-major 2x2 matrix ``[[a, b], [c, d]]`` over the integers."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                # accept numpy ints and integral floats, but store plain ints
                iv = int(v)
                if iv != v:
                    raise TypeError(f"entry {name}={v!r} is not an integer")
                object.__setattr__(self, name, iv)

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "IntMatrix2":
        return cls(1, 0, 0, 1)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __sub__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def minus_identity(self) -> "IntMatrix2":
        return IntMatrix2(self.a - 1, self.b, self.c, self.d - 1)

    def adjugate(self) -> "IntMatrix2":
        return IntMatrix2(self.d, -self.b, -self.c, self.a)

    def apply(self, x, y):
        """Multiply the column vector ``(x, y)``; works for ints, Fractions, floats."""
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(f, m)`` with ``n == f*f*m`` and ``m`` square-free."""
    f, m = 1, n
    p = 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            f *= p
        p += 1
    return f, m


@total_ordering
class QuadraticReal:
    """Exact element ``p + q*sqrt(D)`` of the real quadratic field Q(sqrt(D)).

    ``D`` is reduced to its square-free part on construction, so two elements
    of the same field always share the same ``D`` and equality is structural.
    """

    __slots__ = ("p", "q", "D")

    def __init__(self, p, q=0, D: int = 1):
        p, q = Fraction(p), Fraction(q)
        D = int(D)
        if D <= 0:
            raise ValueError("D must be a positive integer")
        f, m = _squarefree_split(D)
        q *= f
        if m == 1:
            p, q = p + q, Fraction(0)
        self.p, self.q, self.D = p, q, m

    # -- helpers ---------------------------------------------------------
    def _coerce(self, other) -> "QuadraticReal":
        if isinstance(other, QuadraticReal):
            if other.D != self.D and other.q != 0 and self.q != 0:
                raise ValueError(f"field mismatch: sqrt({self.D}) vs sqrt({other.D})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticReal(other, 0, self.D)
        return NotImplemented

    def _field(self, other: "QuadraticReal") -> int:
        return self.D if self.q != 0 else other.D

    def is_rational(self) -> bool:
        return self.q == 0

    def conjugate(self) -> "QuadraticReal":
        return QuadraticReal(self.p, -self.q, self.D)

    def norm(self) -> Fraction:
        """Field norm ``p**2 - D*q**2`` (product with the conjugate)."""
        return self.p * self.p - self.D * self.q * self.q

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticReal(self.p + o.p, self.q + o.q, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticReal(-self.p, -self.q, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        D = self._field(o)
        return QuadraticReal(self.p * o.p + D * self.q * o.q, self.p * o.q + self.q * o.p, D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticReal":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt(D))")
        return QuadraticReal(self.p / n, -self.q / n, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = QuadraticReal(1, 0, self.D), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order -----------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of ``p + q*sqrt(D)``."""
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p**2 with D*q**2
        diff = self.p * self.p - self.D * self.q * self.q
        return sp if diff > 0 else (-sp if diff < 0 else 0)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() == 0

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __hash__(self):
        return hash((self.p, self.q, self.D if self.q else 1))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- conversion ------------------------------------------------------
    def to_mpf(self, ctx=MP):
        return ctx.mpf(self.p.numerator) / self.p.denominator + (
            ctx.mpf(self.q.numerator) / self.q.denominator
        ) * ctx.sqrt(self.D)

    def __float__(self):
        return float(self.to_mpf())

    def __repr__(self):
        return f"QuadraticReal({self.p}, {self.q}, D={self.D})"

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        if self.p == 0:
            return f"{self.q}*sqrt({self.D})"
        sgn = "+" if self.q > 0 else "-"
        return f"{self.p} {sgn} {abs(self.q)}*sqrt({self.D})"


@dataclass(frozen=True)
class SpectralData:
    """Spectral summary of a unimodular hyperbolic matrix.

    ``lam`` is the eigenvalue with ``|lam| > 1``; ``log_lambda`` is
    ``log|lam|`` in the 60-digit context.
    """

    matrix: IntMatrix2
    trace: int
    det: int
    D: int
    lam: QuadraticReal
    log_lambda: object  # mpmath mpf

    @property
    def normalized(self) -> bool:
        return self.det == 1 and self.lam.sign() > 0

    @property
    def lam_float(self) -> float:
        return float(self.lam)

    @property
    def lam_inv(self) -> QuadraticReal:
        return self.lam.inverse()

    def eigenvector_slope(self, which: str) -> QuadraticReal:
        """Slope ``v_y / v_x`` of the eigenvector for ``lam`` ('unstable') or ``lam**-1`` ('stable').

        Uses the first row ``(mu - a)/b``; for ``b == 0`` falls back to the
        second row ``c/(mu - d)``.
        """
        mu = self.lam if which == "unstable" else self.lam_inv
        A = self.matrix
        if A.b != 0:
            return (mu - A.a) / A.b
        if (mu - A.d).sign() == 0:
            raise ZeroDivisionError("vertical eigenvector")
        return QuadraticReal(A.c, 0, self.D) / (mu - A.d)

    def check_eigenvector(self, which: str) -> bool:
        """Exact check ``A v == mu v`` for ``v = (1, slope)``."""
        mu = self.lam if which == "unstable" else self.lam_inv
        m = self.eigenvector_slope(which)
        A = self.matrix
        lhs = (m * A.b + A.a, m * A.d + A.c)
        return lhs[0] == mu and lhs[1] == mu * m


def mat_pow(A: IntMatrix2, n: int) -> IntMatrix2:
    """Exact ``A**n`` by binary powering (``A**0`` is the identity)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    result, base = IntMatrix2.identity(), A
    while n:
        if n & 1:
            result = result @ base
        base = base @ base
        n >>= 1
    return result


def spectral_analyze(A: IntMatrix2) -> SpectralData:
    """Trace, determinant, discriminant and the expanding eigenvalue of ``A``."""
    det = A.det
    if abs(det) != 1:
        raise NotUnimodular(f"|det A| = {abs(det)} != 1 for A = {A}")
    t = A.trace
    if (det == 1 and abs(t) <= 2) or (det == -1 and t == 0):
        raise NotHyperbolic(f"A = {A} is not hyperbolic (eigenvalue on the unit circle)")
    D = t * t - 4 * det
    # root of x^2 - t x + det with |x| > 1
    sgn = 1 if t > 0 else -1
    lam = QuadraticReal(Fraction(t, 2), Fraction(sgn, 2), D)
    assert lam * lam - lam * t + det == 0
    log_lambda = MP.log(abs(lam.to_mpf()))
    return SpectralData(A, t, det, D, lam, log_lambda)


def normalize(A: IntMatrix2) -> tuple[IntMatrix2, int]:
    """Return ``(A, 1)`` if ``det A = 1`` and ``lam > 1``, else ``(A**2, 2)``."""
    spec = spectral_analyze(A)
    if spec.normalized:
        return A, 1
    return A @ A, 2


def prepare(A) -> tuple[SpectralData, int]:
    """Normalize ``A`` and analyze the result; returns ``(spec, exponent)``."""
    if not isinstance(A, IntMatrix2):
        A = IntMatrix2(*A) if len(A) == 4 else IntMatrix2.from_rows(A)
    B, k = normalize(A)
    return spectral_analyze(B), k


def _require_normalized(spec: SpectralData):
    if not spec.normalized:
        raise ValueError("operation requires a normalized matrix (det 1, lambda > 1); use prepare()")


def trace_sequence(t: int, n: int, s0: int = 2, s1: int | None = None) -> list[int]:
    """Terms ``x_0..x_n`` of ``x_j = t*x_{j-1} - x_{j-2}``."""
    seq = [s0, t if s1 is None else s1]
    for _ in range(2, n + 1):
        seq.append(t * seq[-1] - seq[-2])
    return seq[: n + 1]


def trace_power(spec: SpectralData, n: int) -> int:
    """``lam**n + lam**-n`` (= trace of ``A**n``) by the Lucas-type recurrence."""
    _require_normalized(spec)
    if n < 0:
        raise ValueError("n must be non-negative")
    return trace_sequence(spec.trace, n)[n]


def H(spec: SpectralData, n: int) -> int:
    """``det(A**n - I) = 2 - t_n``."""
    return 2 - trace_power(spec, n)


def lucas_u(spec: SpectralData, k: int) -> int:
    """Integer ``u_k`` with ``lam**k - lam**-k = u_k * sqrt(t**2 - 4)``."""
    _require_normalized(spec)
    return trace_sequence(spec.trace, k, 0, 1)[k]
