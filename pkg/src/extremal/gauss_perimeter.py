"""Lower bound for the Gaussian perimeter of convex sets via random polytopes.

The polytope is an intersection of ``N`` random half-spaces ``<x, x_j> <= rho``
with normals uniform on the sphere.  As ``n -> oo`` with ``rho = a n**(1/4)`` and
``N = floor(b / L(n, rho))`` the normalised expected perimeter is at least::

    b a exp(-a**4/4) * (1/sqrt(pi)) * integral_{-W}^{W} exp(-w**2 - b exp(a**2 w)) dw

:func:`certify_lower_bound` evaluates this right-hand side with outward
rounding.  The remaining functions check the finite-``n`` ingredients (escape
probability ``p(r)``, the main term ``L(n, rho)``, the radial density) against
closed forms, independent quadrature and Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Sequence

import numpy as np

from .certnum import (
    INV_SQRT_2PI,
    INV_SQRT_PI,
    LN2,
    PI,
    CertificationError,
    Interval,
    QuadratureCert,
    Real,
    exp_rational,
    interval_exp,
    interval_log,
    interval_sqrt,
    log_rational,
    trapezoid_lower,
)

DEFAULT_A = Fraction(6131, 5000)
DEFAULT_B = Fraction(2387, 1000)
DEFAULT_W = Fraction(6)
DEFAULT_H = Fraction(1, 2000)
DEFAULT_TARGET = Fraction(312584, 10**6)

HALF_LOG_PI = 0.5 * interval_log(PI)
HALF_LOG_2PI = 0.5 * interval_log(2 * PI)


def _iv(x: "Interval | Real") -> Interval:
    return Interval.coerce(x)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NazarovParams:
    a: Fraction = DEFAULT_A
    b: Fraction = DEFAULT_B
    W: Fraction = DEFAULT_W
    h: Fraction = DEFAULT_H
    n: int | None = None

    def __post_init__(self) -> None:
        for name in ("a", "b", "W", "h"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.a <= 0 or self.W <= 0 or self.h <= 0:
            raise ValueError("a, W and h must be positive")
        if self.b < 0:
            raise ValueError("b must be non-negative")

    @property
    def nodes(self) -> int:
        m = 2 * self.W / self.h
        if m.denominator != 1:
            raise ValueError(f"2W/h = {m} is not an integer")
        return int(m)

    @property
    def rho(self) -> Interval:
        if self.n is None:
            raise ValueError("rho needs a dimension n")
        return rho_for(self.n, self.a)

    @property
    def N(self) -> int:
        """Number of half-spaces ``floor(b / L(n, rho))``."""
        if self.n is None:
            raise ValueError("N needs a dimension n")
        log_ratio = log_rational(self.b) - log_main_term_L(self.n, self.rho)
        if log_ratio.hi > 700:
            raise OverflowError(f"N = floor(b/L) exceeds double range at n={self.n}")
        q = interval_exp(log_ratio)
        lo, hi = math.floor(q.lo), math.floor(q.hi)
        if lo != hi:
            raise CertificationError(f"floor(b/L) is ambiguous: [{q.lo}, {q.hi}]")
        return lo

    def as_dict(self) -> dict:
        d = {"a": self.a, "b": self.b, "W": self.W, "h": self.h}
        if self.n is not None:
            d["n"] = self.n
        return d


def rho_for(n: int, a: Real) -> Interval:
    """``a * n**(1/4)`` as an enclosure."""
    quarter = interval_sqrt(interval_sqrt(Interval.from_rational(n)))
    return _iv(a) * quarter


# ---------------------------------------------------------------------------
# gamma function at integers and half-integers
# ---------------------------------------------------------------------------

def log_gamma(z: Real) -> Interval:
    """Enclosure of ``log Gamma(z)`` for ``z > 0`` with ``2z`` an integer."""
    z = Fraction(z)
    if z <= 0 or (2 * z).denominator != 1:
        raise ValueError(f"log_gamma only handles positive (half-)integers, got {z}")
    if z < 10:
        if z.denominator == 1:
            return log_rational(math.factorial(int(z) - 1))
        k = int(z - Fraction(1, 2))
        ratio = Fraction(math.factorial(2 * k), 4**k * math.factorial(k))
        return log_rational(ratio) + HALF_LOG_PI
    # Stirling with the first omitted term as a one-sided remainder
    lz = log_rational(z)
    main = _iv(z - Fraction(1, 2)) * lz - _iv(z) + HALF_LOG_2PI
    corr = Fraction(1, 12) / z - Fraction(1, 360) / z**3 + Fraction(1, 1260) / z**5
    rem = Fraction(1, 1680) / z**7
    return main + Interval.from_rational(corr) + Interval(-Interval.from_rational(rem).hi, 0.0)


# ---------------------------------------------------------------------------
# main term and escape probability
# ---------------------------------------------------------------------------

def log_main_term_L(n: int, rho: "Interval | Real") -> Interval:
    rho = _iv(rho)
    if n < 1 or rho.lo <= 0:
        raise ValueError("need n >= 1 and rho > 0")
    r2 = rho.sqr()
    return -HALF_LOG_2PI - interval_log(rho) + r2.sqr() / (4 * n) - 0.5 * r2


def main_term_L(n: int, rho: "Interval | Real") -> Interval:
    """``L(n, rho) = exp(rho**4/(4n) - rho**2/2) / (sqrt(2 pi) rho)``."""
    out = interval_exp(log_main_term_L(n, rho))
    if out.lo == 0.0:
        raise FloatingPointError(
            f"L(n={n}, rho) underflows double precision; use log_main_term_L")
    return out


def main_term_identity(n: int, rho: "Interval | Real") -> tuple[Interval, Interval]:
    """Both sides of ``exp(-rho**2/2)/sqrt(2 pi) = rho exp(-rho**4/(4n)) L(n, rho)``."""
    rho = _iv(rho)
    r2 = rho.sqr()
    lhs = INV_SQRT_2PI * interval_exp(-0.5 * r2)
    rhs = rho * interval_exp(-(r2.sqr() / (4 * n))) * main_term_L(n, rho)
    return lhs, rhs


def log_main_term_identity(n: int, rho: "Interval | Real") -> tuple[Interval, Interval]:
    """Logarithms of both sides of :func:`main_term_identity`; safe when ``rho**2/2 > 700``."""
    rho = _iv(rho)
    r2 = rho.sqr()
    lhs = -0.5 * r2 - HALF_LOG_2PI
    rhs = interval_log(rho) - r2.sqr() / (4 * n) + log_main_term_L(n, rho)
    return lhs, rhs


def _log_density_norm(k: Fraction) -> Interval:
    # log of integral_{-1}^{1} (1-u^2)^k du = sqrt(pi) Gamma(k+1)/Gamma(k+3/2)
    return HALF_LOG_PI + log_gamma(k + 1) - log_gamma(k + Fraction(3, 2))


def _psi(u: float, k: Fraction) -> Interval:
    """``k log(1 - u**2)`` for a double ``0 <= u < 1``."""
    uf = Fraction(u)
    return Interval.from_rational(k) * log_rational(1 - uf * uf)


def _int_exp_linear(h: float, z: float, upper: bool) -> float:
    """Directed bound of ``integral_0^h exp(z t / h) dt = h (e^z - 1)/z``, z <= 0."""
    if z == 0.0:
        return h
    if -1e-4 < z < 0.0:
        # alternating series 1 + z/2 + z^2/6 + ... brackets (e^z - 1)/z
        zi = Interval.point(z)
        bound = 1 + zi * 0.5 + (zi.sqr() / 6 if upper else 0)
    else:
        zi = Interval.point(z)
        bound = (interval_exp(zi) - 1) / zi
    prod = Interval.point(h) * bound
    return prod.hi if upper else prod.lo


def _tail_log_bound(s: float, k: Fraction, cells: int, upper: bool) -> float:
    """Directed bound on ``log integral_s^1 (1 - u**2)**k du`` for ``k > 0``.

    ``log(1 - u**2)`` is concave, so on every cell the tangent at the left end
    lies above the log-integrand and the chord lies below it.  Both envelopes
    integrate in closed form.
    """
    kf = float(k)
    slope0 = 2 * kf * s / (1 - s * s)
    ell = 1 / slope0 if slope0 > 0 else math.inf
    end = s + 60 * ell
    mesh: list[float]
    if end < 1.0:
        step = (end - s) / cells
        mesh = [s + i * step for i in range(cells)] + [end]
    else:
        delta = (1.0 - s) / cells
        base = 1.0 - delta
        mesh = [s + i * delta for i in range(cells)] + [base]
        mesh += [1.0 - delta * 2.0**-j for j in range(1, 41)]
    mesh = sorted(set(x for x in mesh if s <= x < 1.0))

    psis = [_psi(u, k) for u in mesh]
    ref = psis[0].hi if upper else psis[0].lo
    total: list[float] = []
    for i in range(len(mesh) - 1):
        u, v = mesh[i], mesh[i + 1]
        hint = Interval.point(v) - Interval.point(u)
        if upper:
            # tangent at u; slope -2ku/(1-u^2), take the largest (least negative)
            uf = Fraction(u)
            slope = Interval.from_rational(-2 * k * uf / (1 - uf * uf))
            z_hi = (Interval.point(slope.hi) * hint.hi).hi
            piece = _int_exp_linear(hint.hi, min(z_hi, 0.0), True)
            scale = interval_exp(psis[i] - ref).hi
            total.append((Interval.point(scale) * piece).hi)
        else:
            dpsi = (Interval.point(psis[i + 1].lo) - psis[i].lo).lo
            piece = _int_exp_linear(hint.lo, min(dpsi, 0.0), False)
            scale = interval_exp(Interval.point(psis[i].lo) - ref).lo
            total.append((Interval.point(scale) * piece).lo)
    last = mesh[-1]
    if upper:
        # g is decreasing, so the piece beyond the last node is at most g(last)(1 - last)
        rest = interval_exp(psis[-1] - ref) * (Interval(1.0, 1.0) - last)
        total.append(rest.hi)
        acc = math.nextafter(math.fsum(total), math.inf)
        return (Interval.point(ref) + interval_log(Interval.point(acc))).hi
    acc = math.nextafter(math.fsum(total), -math.inf)
    if acc <= 0.0:
        return -math.inf
    return (Interval.point(ref) + interval_log(Interval.point(acc))).lo


def log_facet_escape_p(
    n: int,
    rho: "Interval | Real",
    r: "Interval | Real",
    *,
    alt_exponent: bool = False,
    cells: int = 1024,
) -> Interval:
    """Enclosure of ``log p(r)``; see :func:`facet_escape_p`."""
    if n < 2:
        raise ValueError("need n >= 2")
    rho = _iv(rho)
    r = _iv(r)
    if rho.lo < 0 or r.lo < 0:
        raise ValueError("rho and r must be non-negative")
    half = interval_log(Interval(0.5, 0.5))
    if rho.hi == 0.0:
        return half
    k = Fraction(n - 1, 2) if alt_exponent else Fraction(n - 2, 2)
    S = r.sqr() + rho.sqr()
    x0 = rho / interval_sqrt(S)
    x_lo, x_hi = max(x0.lo, 0.0), min(x0.hi, 1.0)
    if x_lo >= 1.0:
        return Interval(-math.inf, -math.inf)
    log_norm = _log_density_norm(k)
    if k == 0:
        tail = Interval(1.0, 1.0) - Interval(x_lo, x_hi)
        log_tail = interval_log(tail) if tail.lo > 0 else Interval(-math.inf, interval_log(tail).hi)
    else:
        lo = _tail_log_bound(x_hi, k, cells, upper=False) if x_hi < 1.0 else -math.inf
        hi = _tail_log_bound(x_lo, k, cells, upper=True)
        log_tail = Interval(lo, hi)
    if log_tail.lo == -math.inf:
        hi = (Interval.point(log_tail.hi) - log_norm).hi
        return Interval(-math.inf, min(hi, half.hi))
    out = log_tail - log_norm
    return Interval(min(out.lo, half.hi), min(out.hi, half.hi))


def facet_escape_p(
    n: int,
    rho: "Interval | Real",
    r: "Interval | Real",
    *,
    alt_exponent: bool = False,
    cells: int = 1024,
) -> Interval:
    """Probability that one random half-space cuts off the point ``(y, rho)``, ``|y| = r``.

    With ``S = r**2 + rho**2``::

        p(r) = int_{rho/sqrt S}^1 (1-u^2)^((n-2)/2) du / int_{-1}^1 (1-u^2)^((n-2)/2) du

    ``alt_exponent`` switches the exponent to ``(n-1)/2`` for comparison only.
    """
    lp = log_facet_escape_p(n, rho, r, alt_exponent=alt_exponent, cells=cells)
    if lp.hi == -math.inf:
        return Interval(0.0, 0.0)
    lo = 0.0 if lp.lo == -math.inf else interval_exp(Interval.point(lp.lo)).lo
    hi = interval_exp(Interval.point(lp.hi)).hi
    return Interval(lo, min(hi, 0.5))


def survival_probability(n: int, rho: Real, r: Real, N: int, **kw) -> Interval:
    """``(1 - p(r))**(N - 1)``: chance the point survives the other ``N - 1`` cuts."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return Interval(1.0, 1.0)
    p = facet_escape_p(n, rho, r, **kw)
    q = Interval(1.0, 1.0) - p
    return Interval(max(q.lo, 0.0), q.hi) ** (N - 1)


# ---------------------------------------------------------------------------
# integrand and its second derivative
# ---------------------------------------------------------------------------

def integrand_F(w: "Interval | Real", a: Real = DEFAULT_A, b: Real = DEFAULT_B) -> Interval:
    """``F(w) = exp(-w**2 - b exp(a**2 w))``."""
    a2 = Fraction(a) ** 2
    if isinstance(w, Interval):
        inner = interval_exp(Interval.from_rational(a2) * w)
        w2 = w.sqr()
    else:
        wf = Fraction(w)
        inner = exp_rational(a2 * wf)
        w2 = Interval.from_rational(wf * wf)
    return interval_exp(-(w2 + Interval.from_rational(b) * inner))


def integrand_F_second(w: "Interval | Real", a: Real = DEFAULT_A, b: Real = DEFAULT_B) -> Interval:
    """``F'' = (g'' + g'**2) F`` with ``g(w) = -w**2 - b exp(a**2 w)``."""
    a = Fraction(a)
    w = _iv(w)
    e = interval_exp(Interval.from_rational(a * a) * w)
    be = Interval.from_rational(b) * e
    g1 = -2 * w - Interval.from_rational(a * a) * be
    g2 = Interval(-2.0, -2.0) - Interval.from_rational(a**4) * be
    return (g2 + g1.sqr()) * integrand_F(w, a, b)


def second_derivative_bound_M(a: Real) -> Interval:
    """``M(a) = 2 + a**4/e + 4/e + 4 a**2/(e sqrt(2e)) + 4 a**4 e**-2``."""
    a = Fraction(a)
    if a <= 0:
        raise ValueError("a must be positive")
    e = exp_rational(1)
    a2 = Interval.from_rational(a * a)
    a4 = Interval.from_rational(a**4)
    return (2 + a4 / e + 4 / e + 4 * a2 / (e * interval_sqrt(2 * e))
            + 4 * a4 * interval_exp(Interval(-2.0, -2.0)))


def second_derivative_grid_max(a: Real, b: Real, W: Real, step: Real = Fraction(1, 200)) -> float:
    """Largest upper bound of ``|F''|`` over the grid ``-W, -W + step, ..., W``."""
    W = Fraction(W)
    step = Fraction(step)
    count = int(2 * W / step)
    best = 0.0
    for j in range(count + 1):
        v = abs(integrand_F_second(Interval.from_rational(-W + j * step), a, b))
        best = max(best, v.hi)
    return best


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerimeterCertificate:
    params: NazarovParams
    target: Fraction
    quadrature: QuadratureCert
    J: Interval
    M: Interval
    M_grid_max: float
    prefactor: Interval
    inv_sqrt_pi: Interval
    constant_lower: float
    status: str
    failing_factor: str | None = None

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def _node_F(w: Fraction, a: Fraction, b: Fraction) -> Interval:
    return integrand_F(w, a, b)


def certify_lower_bound(
    params: NazarovParams = NazarovParams(),
    target: Real = DEFAULT_TARGET,
    *,
    workers: int = 1,
) -> PerimeterCertificate:
    """Certify ``b a e^{-a^4/4} / sqrt(pi) * J >= target``."""
    target = Fraction(target)
    a, b, W = params.a, params.b, params.W
    M = second_derivative_bound_M(a)
    grid_max = second_derivative_grid_max(a, b, W)
    quad = trapezoid_lower(
        partial(_node_F, a=a, b=b), -W, W, params.nodes, M,
        integrand_id="F", workers=workers,
    )
    J = Interval(min(quad.J_lo, quad.T.hi), quad.T.hi + quad.error_bound)
    prefactor = Interval.from_rational(b * a) * exp_rational(-(a**4) / 4)
    inv_sqrt_pi = INV_SQRT_PI

    failing = None
    if grid_max > M.lo * (1 + 1e-9):
        failing = "second_derivative_bound"
    factors = {"integral": J.lo, "prefactor": prefactor.lo, "inv_sqrt_pi": inv_sqrt_pi.lo}
    if failing is None:
        for name, lo in factors.items():
            if not lo > 0.0:
                failing = name
                break
    if failing is None:
        prod = Interval.point(prefactor.lo) * Interval.point(inv_sqrt_pi.lo)
        prod = Interval.point(prod.lo) * Interval.point(J.lo)
        constant_lower = prod.lo
    else:
        constant_lower = 0.0
    if failing is None and not Fraction(constant_lower) >= target:
        failing = "target"
    status = "certified" if failing is None else "failed"
    return PerimeterCertificate(
        params=params, target=target, quadrature=quad, J=J, M=M,
        M_grid_max=grid_max, prefactor=prefactor, inv_sqrt_pi=inv_sqrt_pi,
        constant_lower=constant_lower, status=status, failing_factor=failing,
    )


# ---------------------------------------------------------------------------
# radial density
# ---------------------------------------------------------------------------

def radial_density_cf(n: int, w: Real) -> Interval:
    """``c f(sqrt(n-1) + w)`` with ``f(t) = t**(n-1) e^{-t^2/2}``, ``c = 1/int f``."""
    if n < 2:
        raise ValueError("need n >= 2")
    t = interval_sqrt(Interval.from_rational(n - 1)) + _iv(w)
    if t.lo <= 0:
        raise ValueError("sqrt(n-1) + w must be positive")
    log_val = ((n - 1) * interval_log(t) - 0.5 * t.sqr()
               - Interval.from_rational(Fraction(n, 2) - 1) * LN2
               - log_gamma(Fraction(n, 2)))
    return interval_exp(log_val)


# ---------------------------------------------------------------------------
# asymptotics of p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoteRow:
    n: int
    ratio: Interval
    scaled_deviation: float  # |ratio - 1| * sqrt(n)


def asymptote_check_p(n_list: Sequence[int], a: Real = DEFAULT_A, w: Real = 0) -> list[AsymptoteRow]:
    """``p(sqrt(n-1) + w) / (L(n, rho) e^{a^2 w})`` for each ``n`` (``rho = a n^{1/4}``)."""
    a = Fraction(a)
    rows = []
    for n in n_list:
        if n < 3:
            raise ValueError("need n >= 3")
        rho = rho_for(n, a)
        r = interval_sqrt(Interval.from_rational(n - 1)) + _iv(w)
        log_ratio = (log_facet_escape_p(n, rho, r) - log_main_term_L(n, rho)
                     - Interval.from_rational(a * a) * _iv(w))
        ratio = interval_exp(log_ratio)
        rows.append(AsymptoteRow(n, ratio, abs(ratio.mid - 1) * math.sqrt(n)))
    return rows


# ---------------------------------------------------------------------------
# Monte Carlo diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    frequency: float
    stderr: float
    hits: int
    samples: int
    seed: int

    def within(self, value: float, k: float = 4.0) -> bool:
        return abs(self.frequency - value) <= k * max(self.stderr, 1e-300)


def _batches(total: int, per_batch: int) -> list[int]:
    full, rest = divmod(total, per_batch)
    return [per_batch] * full + ([rest] if rest else [])


def _sphere_rngs(seed: int, count: int) -> list[np.random.Generator]:
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in ss.spawn(count)]


def _estimate(hits: int, samples: int, seed: int) -> MCEstimate:
    f = hits / samples
    return MCEstimate(f, math.sqrt(max(f * (1 - f), 0.0) / samples), hits, samples, seed)


def mc_facet_escape(n: int, rho: float, r: float, samples: int, seed: int,
                    batch: int = 50_000) -> MCEstimate:
    """Empirical ``P(<u/|u|, x> > rho/|u|)`` for ``x`` uniform on ``S^n``, ``u = (y, rho)``."""
    if n < 2 or samples < 1:
        raise ValueError("need n >= 2 and samples >= 1")
    norm_u = math.hypot(r, rho)
    hits = 0
    sizes = _batches(samples, batch)
    for size, rng in zip(sizes, _sphere_rngs(seed, len(sizes))):
        g = rng.standard_normal((size, n + 1))
        x = g / np.linalg.norm(g, axis=1, keepdims=True)
        proj = (r * x[:, 0] + rho * x[:, n]) / norm_u
        hits += int(np.count_nonzero(proj > rho / norm_u))
    return _estimate(hits, samples, seed)


def mc_facet_membership(n: int, rho: float, r: float, N: int, samples: int, seed: int,
                        budget: int = 4_000_000) -> MCEstimate:
    """Empirical probability that ``(y, rho)`` with ``|y| = r`` survives ``N - 1`` random cuts."""
    if n < 2:
        raise ValueError("need n >= 2")
    if samples < 1:
        raise ValueError("need samples >= 1")
    if N == 1:
        return MCEstimate(1.0, 0.0, samples, samples, seed)
    per = max(1, budget // ((N - 1) * (n + 1)))
    hits = 0
    sizes = _batches(samples, per)
    for size, rng in zip(sizes, _sphere_rngs(seed, len(sizes))):
        g = rng.standard_normal((size, N - 1, n + 1))
        nrm = np.linalg.norm(g, axis=2)
        inner = (r * g[:, :, 0] + rho * g[:, :, n]) / nrm
        hits += int(np.count_nonzero(np.all(inner <= rho, axis=1)))
    return _estimate(hits, samples, seed)
