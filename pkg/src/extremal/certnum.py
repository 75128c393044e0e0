"""Outward-rounded interval arithmetic, exact rationals and certified quadrature.

Every :class:`Interval` operation returns an enclosure of the exact result.
Field operations are rounded outward with error-free transforms (TwoSum for
addition, exact integer comparison for products and quotients), so endpoints
are the correctly rounded directed images of the exact endpoint results.

Transcendental kernels (``exp``, ``log``) never call ``math.exp``/``math.log``.
They evaluate argument-reduced Taylor / atanh series in 128-bit fixed point on
Python integers, carry an explicit truncation and remainder bound in units of
``2**-128``, and round the resulting integer enclosure outward to doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

Real = Union[int, float, Fraction]

_INF = math.inf
_DBL_MAX = 1.7976931348623157e308
_P = 128  # fixed-point fraction bits used by the exp/log kernels
_ONE = 1 << _P


# ---------------------------------------------------------------------------
# directed rounding primitives
# ---------------------------------------------------------------------------

def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _cmp_float_ratio(f: float, num: int, den: int) -> int:
    """Sign of ``f - num/den`` for finite ``f`` and ``den > 0``."""
    p, q = f.as_integer_ratio()
    d = p * den - num * q
    return (d > 0) - (d < 0)


def _ratio_down(num: int, den: int) -> float:
    """Largest double <= num/den (den > 0)."""
    try:
        f = num / den
    except OverflowError:
        f = _INF if num > 0 else -_INF
    if f == _INF:
        return _DBL_MAX
    if f == -_INF:
        return f
    if _cmp_float_ratio(f, num, den) > 0:
        f = _down(f)
    return f


def _ratio_up(num: int, den: int) -> float:
    """Smallest double >= num/den (den > 0)."""
    try:
        f = num / den
    except OverflowError:
        f = _INF if num > 0 else -_INF
    if f == -_INF:
        return -_DBL_MAX
    if f == _INF:
        return f
    if _cmp_float_ratio(f, num, den) < 0:
        f = _up(f)
    return f


def rational_down(x: Real) -> float:
    """Largest double that is <= ``x`` (``x`` exact rational)."""
    if isinstance(x, float):
        return x
    return _ratio_down(*_ratio(x))


def rational_up(x: Real) -> float:
    """Smallest double that is >= ``x`` (``x`` exact rational)."""
    if isinstance(x, float):
        return x
    return _ratio_up(*_ratio(x))


def _ratio(x: Real) -> tuple[int, int]:
    if isinstance(x, int):
        return x, 1
    if isinstance(x, Fraction):
        return x.numerator, x.denominator
    return float(x).as_integer_ratio()


def _dyadic_down(n: int, shift: int) -> float:
    """Largest double <= n * 2**shift."""
    if shift >= 0:
        return _ratio_down(n << shift, 1)
    return _ratio_down(n, 1 << -shift)


def _dyadic_up(n: int, shift: int) -> float:
    if shift >= 0:
        return _ratio_up(n << shift, 1)
    return _ratio_up(n, 1 << -shift)


def _add_rd(a: float, b: float) -> tuple[float, float]:
    """(round-down, round-up) of ``a + b`` via TwoSum."""
    s = a + b
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b):
            return s, s
        return (_DBL_MAX, _INF) if s > 0 else (-_INF, -_DBL_MAX)
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err > 0:
        return s, _up(s)
    if err < 0:
        return _down(s), s
    return s, s


def _mul_rd(a: float, b: float) -> tuple[float, float]:
    p = a * b
    if a == 0.0 or b == 0.0 or math.isinf(a) or math.isinf(b):
        return p, p
    if math.isinf(p) or p == 0.0:
        # overflow or underflow to zero: fall back to exact rationals
        exact = Fraction(a) * Fraction(b)
        return rational_down(exact), rational_up(exact)
    pa, qa = a.as_integer_ratio()
    pb, qb = b.as_integer_ratio()
    c = _cmp_float_ratio(p, pa * pb, qa * qb)
    if c > 0:
        return _down(p), p
    if c < 0:
        return p, _up(p)
    return p, p


def _div_rd(a: float, b: float) -> tuple[float, float]:
    q = a / b
    if a == 0.0 or math.isinf(a) or math.isinf(b):
        return q, q
    pa, qa = a.as_integer_ratio()
    pb, qb = b.as_integer_ratio()
    num, den = pa * qb, qa * pb
    if den < 0:
        num, den = -num, -den
    if math.isinf(q) or q == 0.0:
        exact = Fraction(num, den)
        return rational_down(exact), rational_up(exact)
    c = _cmp_float_ratio(q, num, den)
    if c > 0:
        return _down(q), q
    if c < 0:
        return q, _up(q)
    return q, q


def _sqrt_rd(x: float) -> tuple[float, float]:
    # IEEE sqrt is correctly rounded; settle the direction exactly
    r = math.sqrt(x)
    if r == 0.0 or math.isinf(r):
        return r, r
    pr, qr = r.as_integer_ratio()
    px, qx = x.as_integer_ratio()
    d = pr * pr * qx - px * qr * qr
    if d > 0:
        return _down(r), r
    if d < 0:
        return r, _up(r)
    return r, r


# ---------------------------------------------------------------------------
# fixed-point kernels
# ---------------------------------------------------------------------------

def _ln2_bounds() -> tuple[int, int]:
    # ln 2 = sum_{k>=1} 1/(k 2^k); guard bits absorb the per-term floors
    guard = 40
    g = _P + guard
    terms = g + 8
    s = 0
    for k in range(1, terms + 1):
        s += (1 << (g - k)) // k if k <= g else 0
    # each term floored (error < 1 unit), tail < 2^(g-terms) units
    lo = s >> guard
    hi = (s + terms + 2 + (1 << guard) - 1) >> guard
    return lo, hi + 1


_LN2_LO, _LN2_HI = _ln2_bounds()
_INV_LN2 = 1.4426950408889634


def _exp_series(r: int) -> tuple[int, int]:
    """Fixed-point ``exp(r * 2**-P)`` for ``|r| <= 0.36 * 2**P``.

    Returns ``(S, E)`` with the exact value inside ``[S - E, S + E]``.
    """
    s = _ONE
    t = _ONE
    j = 1
    while True:
        t = ((t * r) >> _P) // j
        s += t
        if -2 <= t <= 2:
            break
        j += 1
    # per-term floor error <= 2 units with contraction 0.36 (bound 3.2 each);
    # remainder after a term of size <= 2+3.2 units is below 10 units
    return s, 4 * j + 16


def _exp_fixed(num: int, den: int) -> tuple[int, int, int]:
    """Enclose ``exp(num/den)`` as ``[lo, hi] * 2**shift``."""
    x = num / den
    k = int(round(x * _INV_LN2))
    scaled = num << _P
    xf = scaled // den
    xc = xf + (0 if xf * den == scaled else 1)
    if k >= 0:
        klo, khi = k * _LN2_LO, k * _LN2_HI
    else:
        klo, khi = k * _LN2_HI, k * _LN2_LO
    r_lo = xf - khi
    r_hi = xc - klo
    s, e = _exp_series(r_lo)
    rad = r_hi - r_lo
    lo = s - e
    hi = s + e + 2 * rad + 1
    return lo, hi, k - _P


def _log_fixed(num: int, den: int) -> tuple[int, int]:
    """Enclose ``log(num/den)`` (num, den > 0) as ``[lo, hi] * 2**-P``."""
    e = num.bit_length() - den.bit_length()
    while True:
        shift = _P - e
        if shift >= 0:
            m = (num << shift) // den
        else:
            m = num // (den << -shift)
        # keep m in [2/3, 4/3) so |z| <= 1/5
        if 3 * m < 2 * _ONE:
            e -= 1
        elif 3 * m >= 4 * _ONE:
            e += 1
        else:
            break
    z = ((m - _ONE) << _P) // (m + _ONE)
    z2 = (z * z) >> _P
    s = z
    t = z
    i = 1
    while True:
        t = (t * z2) >> _P
        term = t // (2 * i + 1)
        s += term
        if -2 <= term <= 2:
            break
        i += 1
    err = 2 * (4 * i + 16)
    lo = 2 * s - err
    hi = 2 * s + err
    if e >= 0:
        lo += e * _LN2_LO
        hi += e * _LN2_HI
    else:
        lo += e * _LN2_HI
        hi += e * _LN2_LO
    return lo, hi


_EXP_MAX = 709.78  # exp overflows doubles above log(DBL_MAX) ~ 709.7827
_EXP_MIN = -745.2  # exp(x) < smallest subnormal / 2 below this


def exp_down(x: Real) -> float:
    """Largest double <= exp(x)."""
    return _exp_point(x)[0]


def exp_up(x: Real) -> float:
    """Smallest double >= exp(x); raises OverflowError when unrepresentable."""
    return _exp_point(x)[1]


def _exp_point(x: Real) -> tuple[float, float]:
    if isinstance(x, float):
        if math.isnan(x):
            raise ValueError("exp of NaN")
        if x == -_INF:
            return 0.0, 0.0
        if x == _INF:
            raise OverflowError("exp(+inf) is not representable")
    num, den = _ratio(x)
    if num == 0:
        return 1.0, 1.0
    xv = num / den
    if xv > _EXP_MAX:
        raise OverflowError(f"exp({xv}) overflows double precision")
    if xv < _EXP_MIN:
        return 0.0, 5e-324
    lo, hi, shift = _exp_fixed(num, den)
    return _dyadic_down(lo, shift), _dyadic_up(hi, shift)


def log_down(x: Real) -> float:
    return _log_point(x)[0]


def log_up(x: Real) -> float:
    return _log_point(x)[1]


def _log_point(x: Real) -> tuple[float, float]:
    num, den = _ratio(x)
    if num <= 0:
        raise ValueError(f"log of non-positive value {x!r}")
    if num == den:
        return 0.0, 0.0
    lo, hi = _log_fixed(num, den)
    return _dyadic_down(lo, -_P), _dyadic_up(hi, -_P)


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` of doubles enclosing a real quantity."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoint is NaN")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    # -- constructors -----------------------------------------------------
    @classmethod
    def point(cls, x: float) -> "Interval":
        x = float(x)
        return cls(x, x)

    @classmethod
    def from_rational(cls, x: Real) -> "Interval":
        return cls(rational_down(x), rational_up(x))

    @classmethod
    def coerce(cls, x: "Interval | Real") -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, float):
            return cls(x, x)
        return cls.from_rational(x)

    @classmethod
    def hull(cls, *xs: "Interval") -> "Interval":
        return cls(min(x.lo for x in xs), max(x.hi for x in xs))

    # -- queries ----------------------------------------------------------
    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: Real) -> bool:
        if isinstance(x, float):
            return self.lo <= x <= self.hi
        f = Fraction(x)
        return Fraction(self.lo) <= f <= Fraction(self.hi)

    def __contains__(self, x: Real) -> bool:
        return self.contains(x)

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: "Interval | Real") -> "Interval":
        o = Interval.coerce(other)
        return Interval(_add_rd(self.lo, o.lo)[0], _add_rd(self.hi, o.hi)[1])

    __radd__ = __add__

    def __sub__(self, other: "Interval | Real") -> "Interval":
        o = Interval.coerce(other)
        return Interval(_add_rd(self.lo, -o.hi)[0], _add_rd(self.hi, -o.lo)[1])

    def __rsub__(self, other: "Interval | Real") -> "Interval":
        return Interval.coerce(other) - self

    def __mul__(self, other: "Interval | Real") -> "Interval":
        o = Interval.coerce(other)
        if self.lo == self.hi and o.lo == o.hi:
            lo, hi = _mul_rd(self.lo, o.lo)
            return Interval(lo, hi)
        cands = [_mul_rd(x, y) for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        return Interval(min(c[0] for c in cands), max(c[1] for c in cands))

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval | Real") -> "Interval":
        o = Interval.coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"division by interval containing zero: {o!r}")
        cands = [_div_rd(x, y) for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        return Interval(min(c[0] for c in cands), max(c[1] for c in cands))

    def __rtruediv__(self, other: "Interval | Real") -> "Interval":
        return Interval.coerce(other) / self

    def sqr(self) -> "Interval":
        if self.lo >= 0.0:
            return Interval(_mul_rd(self.lo, self.lo)[0], _mul_rd(self.hi, self.hi)[1])
        if self.hi <= 0.0:
            return Interval(_mul_rd(self.hi, self.hi)[0], _mul_rd(self.lo, self.lo)[1])
        m = max(-self.lo, self.hi)
        return Interval(0.0, _mul_rd(m, m)[1])

    def __pow__(self, k: int) -> "Interval":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return Interval(1.0, 1.0)
        if k % 2 == 0:
            return self.sqr() ** (k // 2)
        return self * (self ** (k - 1))

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def exp(self) -> "Interval":
        return interval_exp(self)

    def log(self) -> "Interval":
        return interval_log(self)

    def sqrt(self) -> "Interval":
        return interval_sqrt(self)


def interval_exp(x: Interval) -> Interval:
    """Enclosure of ``{e**t : t in x}``; raises OverflowError past ~709.78."""
    if not x.is_finite():
        raise ValueError(f"exp needs a finite interval, got {x!r}")
    if x.lo == x.hi:
        lo, hi = _exp_point(x.lo)
        return Interval(lo, hi)
    return Interval(exp_down(x.lo), exp_up(x.hi))


def interval_log(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise ValueError(f"log needs a positive interval, got {x!r}")
    if x.lo == x.hi:
        lo, hi = _log_point(x.lo)
        return Interval(lo, hi)
    return Interval(log_down(x.lo), log_up(x.hi))


def interval_sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise ValueError(f"sqrt needs a non-negative interval, got {x!r}")
    return Interval(_sqrt_rd(x.lo)[0], _sqrt_rd(x.hi)[1])


def exp_rational(x: Real) -> Interval:
    """Enclosure of ``exp(x)`` for an exact rational argument."""
    lo, hi = _exp_point(x)
    return Interval(lo, hi)


def log_rational(x: Real) -> Interval:
    lo, hi = _log_point(x)
    return Interval(lo, hi)


def interval_sum(terms: Iterable[Interval]) -> Interval:
    """Sum of intervals, independent of summation order.

    ``math.fsum`` returns the correctly rounded exact sum ``s``; a second
    ``fsum`` of the terms together with ``-s`` has the sign of the rounding
    error, so ``s`` is moved one ulp outward only when it was actually rounded.
    """
    los: list[float] = []
    his: list[float] = []
    for t in terms:
        los.append(t.lo)
        his.append(t.hi)
    if not los:
        return Interval(0.0, 0.0)
    lo = math.fsum(los)
    hi = math.fsum(his)
    if math.isfinite(lo) and math.fsum(los + [-lo]) < 0:
        lo = _down(lo)
    if math.isfinite(hi) and math.fsum(his + [-hi]) > 0:
        hi = _up(hi)
    return Interval(lo, hi)


# pi: math.pi is the double nearest pi and lies below it
PI = Interval(math.pi, _up(math.pi))
SQRT_PI = interval_sqrt(PI)
INV_SQRT_PI = 1.0 / SQRT_PI
INV_SQRT_2PI = 1.0 / interval_sqrt(2 * PI)
LN2 = Interval(_dyadic_down(_LN2_LO, -_P), _dyadic_up(_LN2_HI, -_P))
E = exp_rational(1)


# ---------------------------------------------------------------------------
# exact rational helpers
# ---------------------------------------------------------------------------

def rational_eval(coeffs: Sequence[Real], x: Real) -> Fraction:
    """Exact Horner evaluation; ``coeffs`` in ascending order of degree."""
    xr = Fraction(x)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * xr + Fraction(c)
    return acc


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a finite decimal string exactly."""
    return Fraction(text.strip())


def format_rational(x: Real) -> str:
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# certified composite trapezoid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureCert:
    """Record of a certified lower bound for an integral."""

    integrand_id: str
    A: Fraction
    B: Fraction
    h: Fraction
    m: int
    T: Interval
    M: Interval
    J_lo: float

    @property
    def error_bound(self) -> float:
        # upper bound of M.hi * (B - A)/12 * h**2
        return (Interval.point(self.M.hi) * Interval.from_rational((self.B - self.A) / 12 * self.h**2)).hi


class CertificationError(ArithmeticError):
    """A sub-enclosure required by a certificate could not be established."""


def trapezoid_lower(
    f: Callable[[Fraction], Interval],
    A: Real,
    B: Real,
    m: int,
    M_bound: Interval,
    *,
    integrand_id: str = "f",
    workers: int = 1,
) -> QuadratureCert:
    """Certified lower bound for the integral of ``f`` over ``[A, B]``.

    ``f`` maps an exact rational node to an :class:`Interval`. ``M_bound.hi``
    must bound ``|f''|`` on ``[A, B]``; that is the caller's responsibility.
    The result satisfies ``J_lo <= T.lo - M.hi * (B - A)/12 * h**2``.
    """
    if m < 1:
        raise ValueError("need at least one trapezoid panel")
    A = Fraction(A)
    B = Fraction(B)
    if not B > A:
        raise ValueError("need A < B")
    h = (B - A) / m
    nodes = [A + k * h for k in range(m + 1)]
    values = _evaluate_nodes(f, nodes, workers)
    for node, v in zip(nodes, values):
        if not isinstance(v, Interval) or not v.is_finite():
            raise CertificationError(f"integrand {integrand_id} not finite at node {node}")
    half = Interval(0.5, 0.5)
    total = interval_sum([values[0] * half, values[-1] * half, *values[1:-1]])
    # (B - A)/m rather than h keeps dyadic cases exact, e.g. m = 10 on [0, 1]
    T = total * Interval.from_rational(B - A) / m
    if not M_bound.is_finite() or M_bound.hi < 0:
        raise CertificationError("second-derivative bound must be finite and non-negative")
    err = Interval.point(M_bound.hi) * Interval.from_rational((B - A) / 12 * h * h)
    J_lo = _add_rd(T.lo, -err.hi)[0]
    return QuadratureCert(integrand_id, A, B, h, m, T, M_bound, J_lo)


def _evaluate_nodes(f, nodes, workers):
    if workers <= 1:
        return [f(x) for x in nodes]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(nodes) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(f, nodes, chunksize=chunk))
