"""Hermite moment ratios under the Gaussian and on the Hamming cube.

For ``F_{m,N}(x) = He_m(S_N(x))**2`` with ``S_N = (x_1 + ... + x_N)/sqrt(N)``
all cube expectations reduce to the binomial law of ``x_1 + ... + x_N``, which
keeps every norm an exact rational even at ``N = 2000``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

Poly = tuple  # ascending coefficients


def poly_mul(p: Sequence, q: Sequence) -> tuple:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return tuple(out)


def poly_pow(p: Sequence, k: int) -> tuple:
    out: tuple = (1,)
    for _ in range(k):
        out = poly_mul(out, p)
    return out


@dataclass(frozen=True)
class HermitePoly:
    """Monic probabilists' Hermite polynomial ``He_m``; integer coefficients, ascending."""

    m: int
    coeffs: tuple[int, ...]

    def __call__(self, x) -> Fraction:
        from .certnum import rational_eval

        return rational_eval(self.coeffs, x)


@lru_cache(maxsize=None)
def hermite(m: int) -> HermitePoly:
    """``He_{m+1} = x He_m - m He_{m-1}``, ``He_0 = 1``, ``He_1 = x``."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    prev, cur = (1,), (0, 1)
    if m == 0:
        return HermitePoly(0, prev)
    for j in range(1, m):
        shifted = (0,) + cur
        nxt = [c - (j * prev[i] if i < len(prev) else 0) for i, c in enumerate(shifted)]
        prev, cur = cur, tuple(nxt)
    return HermitePoly(m, cur)


@lru_cache(maxsize=None)
def _double_factorial_odd(k: int) -> int:
    # (2k-1)!! = E[x^(2k)] for standard normal x
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


def gaussian_moment(coeffs: Sequence) -> Fraction:
    """Exact ``E p(G)`` for ``G ~ N(0, 1)``."""
    total = Fraction(0)
    for i, c in enumerate(coeffs):
        if c and i % 2 == 0:
            total += Fraction(c) * _double_factorial_odd(i // 2)
    return total


@dataclass(frozen=True)
class EvenPolyRational:
    """Even polynomial stored by its coefficients in ``x**2``."""

    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_poly(cls, coeffs: Sequence) -> "EvenPolyRational":
        if any(c for i, c in enumerate(coeffs) if i % 2):
            raise ValueError("polynomial is not even")
        return cls(tuple(Fraction(c) for c in coeffs[::2]))

    def __call__(self, s2) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * s2 + c
        return acc

    def expectation(self, even_moments: Sequence[Fraction]) -> Fraction:
        """``sum c_i E[x**(2i)]`` given ``even_moments[i] = E[x**(2i)]``."""
        return sum((c * even_moments[i] for i, c in enumerate(self.coeffs)), Fraction(0))


@lru_cache(maxsize=None)
def hermite_square(m: int) -> EvenPolyRational:
    return EvenPolyRational.from_poly(poly_pow(hermite(m).coeffs, 2))


@lru_cache(maxsize=None)
def hermite_fourth(m: int) -> EvenPolyRational:
    sq = poly_pow(hermite(m).coeffs, 2)
    return EvenPolyRational.from_poly(poly_mul(sq, sq))


@dataclass(frozen=True)
class MomentRatioReport:
    m: int
    gaussian_L2_sq: Fraction  # E He_m^2 = m!
    gaussian_L4_4: Fraction  # E He_m^4
    ratio_sq: float  # ||He_m||_4^2 / ||He_m||_2^2
    root: float  # ratio_sq ** (1/(2m))

    @property
    def ratio_sq_squared(self) -> Fraction:
        """``ratio_sq**2`` as an exact rational."""
        return self.gaussian_L4_4 / self.gaussian_L2_sq**2


def _ratio_from_exact(l4_4: Fraction, l2_sq: Fraction) -> float:
    # sqrt(l4_4)/l2_sq without overflowing on large integers
    log_val = 0.5 * _log_fraction(l4_4) - _log_fraction(l2_sq)
    return math.exp(log_val)


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def gaussian_ratio_root(m: int) -> MomentRatioReport:
    if m < 1:
        raise ValueError("need m >= 1")
    l2 = Fraction(gaussian_moment(poly_pow(hermite(m).coeffs, 2)))
    l4 = Fraction(gaussian_moment(poly_pow(hermite(m).coeffs, 4)))
    ratio = _ratio_from_exact(l4, l2)
    return MomentRatioReport(m, l2, l4, ratio, ratio ** (1.0 / (2 * m)))


def consecutive_ratio_sq(m: int) -> Fraction:
    """``(ratio_sq(m+1) / ratio_sq(m))**2`` exactly."""
    a = gaussian_ratio_root(m)
    b = gaussian_ratio_root(m + 1)
    return b.ratio_sq_squared / a.ratio_sq_squared


# ---------------------------------------------------------------------------
# Hamming cube
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def cube_even_moments(N: int, top: int) -> tuple[Fraction, ...]:
    """``E[S_N**(2i)]`` for ``i = 0..top`` under uniform signs."""
    if N < 1:
        raise ValueError("need N >= 1")
    binom = [math.comb(N, k) for k in range(N + 1)]
    sums = [2 * k - N for k in range(N + 1)]
    sq = [s * s for s in sums]
    powers = [1] * (N + 1)
    out = []
    scale = 1 << N
    for i in range(top + 1):
        total = sum(b * p for b, p in zip(binom, powers))
        out.append(Fraction(total, scale * N**i))
        powers = [p * q for p, q in zip(powers, sq)]
    return tuple(out)


def cube_norms(m: int, N: int) -> tuple[Fraction, Fraction]:
    """``(||F||_1, ||F||_2**2) = (E He_m(S_N)**2, E He_m(S_N)**4)`` exactly."""
    if m < 1 or N < 1:
        raise ValueError("need m >= 1 and N >= 1")
    moments = cube_even_moments(N, 2 * m)
    return hermite_square(m).expectation(moments), hermite_fourth(m).expectation(moments)


def cube_ratio(m: int, N: int) -> float:
    """``||F_{m,N}||_2 / ||F_{m,N}||_1``."""
    l1, l2_sq = cube_norms(m, N)
    return _ratio_from_exact(l2_sq, l1)


def cube_norms_enumerated(m: int, N: int) -> tuple[Fraction, Fraction]:
    """Same as :func:`cube_norms` by brute force over all ``2**N`` sign vectors."""
    if N > 20:
        raise ValueError("enumeration limited to N <= 20")
    sq = hermite_square(m)
    l1 = Fraction(0)
    l2 = Fraction(0)
    for mask in range(1 << N):
        s = N - 2 * bin(mask).count("1")
        v = sq(Fraction(s * s, N))
        l1 += v
        l2 += v * v
    return l1 / (1 << N), l2 / (1 << N)


@dataclass(frozen=True)
class ProductExample:
    d: int
    L1: Fraction
    L2_sq: Fraction

    @property
    def L2(self) -> float:
        return math.sqrt(self.L2_sq)


def product_example_ratio(d: int) -> ProductExample:
    """Norms of ``prod_j (1 + x_j)`` on ``{-1, 1}**d`` by enumeration."""
    if d < 0:
        raise ValueError("d must be non-negative")
    if d > 20:
        raise ValueError("enumeration budget is d <= 20")
    l1 = 0
    l2 = 0
    for mask in range(1 << d):
        val = 1
        for j in range(d):
            val *= 1 + (-1 if mask >> j & 1 else 1)
        l1 += abs(val)
        l2 += val * val
    return ProductExample(d, Fraction(l1, 1 << d), Fraction(l2, 1 << d))


def _fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform on an object array (exact ints)."""
    a = values.copy()
    n = a.shape[0]
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        x = a[:, 0, :].copy()
        y = a[:, 1, :].copy()
        a[:, 0, :] = x + y
        a[:, 1, :] = x - y
        a = a.reshape(n)
        h *= 2
    return a


def walsh_spectrum(m: int, N: int) -> list[Fraction]:
    """Fourier-Walsh coefficients of ``F_{m,N}``, indexed by subset bitmask.

    Bit ``i`` of the index set means ``x_i = -1``; coefficient ``S`` is
    ``2**-N sum_x F(x) prod_{i in S} x_i``.
    """
    if N > 14:
        raise ValueError("full spectrum limited to N <= 14")
    if m < 1:
        raise ValueError("need m >= 1")
    sq = hermite_square(m)
    # N**m * F(x) is an integer since F is a degree-m polynomial in S_N**2
    scale = N**m
    values = np.empty(1 << N, dtype=object)
    for mask in range(1 << N):
        s = N - 2 * bin(mask).count("1")
        v = sq(Fraction(s * s, N)) * scale
        values[mask] = int(v)
    coeffs = _fwht(values)
    denom = scale << N
    return [Fraction(int(c), denom) for c in coeffs]


def walsh_degree(m: int, N: int) -> int:
    spec = walsh_spectrum(m, N)
    return max((bin(S).count("1") for S, c in enumerate(spec) if c != 0), default=0)


def odd_walsh_mass(m: int, N: int) -> Fraction:
    """Sum of ``|coefficient|`` over odd-size subsets (zero by sign-flip symmetry)."""
    spec = walsh_spectrum(m, N)
    return sum((abs(c) for S, c in enumerate(spec) if bin(S).count("1") % 2), Fraction(0))


def certified_base_lower(m_max: int, N: int = 2000) -> float:
    """``max_{m <= m_max} (||F_{m,N}||_2 / ||F_{m,N}||_1)**(1/(2m))``.

    Each term is attained by an explicit degree-``2m`` function, so the
    maximum is a lower bound for the best constant in ``||f||_2 <= C**d ||f||_1``.
    """
    if m_max < 1:
        raise ValueError("need m_max >= 1")
    return max(cube_ratio(m, N) ** (1.0 / (2 * m)) for m in range(1, m_max + 1))
