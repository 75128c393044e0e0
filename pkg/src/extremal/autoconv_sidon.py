"""Autoconvolution of step profiles and g-Sidon sets.

A step profile puts non-negative heights ``v_0, ..., v_{c-1}`` on ``c``
uniform cells of width ``delta = 1/(2c)`` covering ``[-1/4, 1/4]``.  Its
autoconvolution is piecewise linear with knots on the grid ``-1/2 + k delta``,
and the value at knot ``k + 1`` is ``delta * sum_{i+j=k} v_i v_j``; the supremum
is therefore an exact rational.

The quantized search minimises ``sup f*f / (int f)**2`` over heights in
``{0, ..., m}`` (the ratio is scale-free).  It is a self-contained stand-in for
discrete classes used in published lower-bound computations; nothing here
claims numeric agreement with those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

EXHAUSTIVE_LIMIT = 10**8
COUNTING_CONVENTION = "unordered pairs a <= b, repetition allowed"


@dataclass(frozen=True)
class StepProfile:
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        vals = tuple(Fraction(v) for v in self.values)
        if not vals:
            raise ValueError("a profile needs at least one cell")
        if any(v < 0 for v in vals):
            raise ValueError("profile heights must be non-negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values: Iterable) -> "StepProfile":
        return cls(tuple(values))

    @property
    def cells(self) -> int:
        return len(self.values)

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2 * self.cells)

    @property
    def mass(self) -> Fraction:
        return self.delta * sum(self.values)

    @property
    def linf(self) -> Fraction:
        return max(self.values)

    def knot_sums(self) -> list[Fraction]:
        """``sum_{i+j=k} v_i v_j`` for ``k = 0, ..., 2c-2``."""
        return autoconv_coefficients(self.values)

    def conv_at(self, x) -> Fraction:
        """``(f*f)(x)`` exactly, as a sum of triangles of half-width ``delta``."""
        x = Fraction(x)
        d = self.delta
        total = Fraction(0)
        for k, c in enumerate(self.knot_sums()):
            if c:
                centre = Fraction(-1, 2) + (k + 1) * d
                total += c * max(Fraction(0), d - abs(x - centre))
        return total

    def knot(self, k: int) -> Fraction:
        """Position of the knot carrying ``knot_sums()[k]``."""
        return Fraction(-1, 2) + (k + 1) * self.delta


def autoconv_coefficients(v: Sequence) -> list:
    """Discrete autoconvolution of a sequence (exact for ints and Fractions)."""
    c = len(v)
    out = [0] * (2 * c - 1)
    for i, a in enumerate(v):
        if a:
            for j, b in enumerate(v):
                out[i + j] += a * b
    return out


@dataclass(frozen=True)
class AutoconvReport:
    profile: StepProfile
    sup_conv: Fraction
    mass: Fraction
    argmax_knot: Fraction

    @property
    def mass_sq(self) -> Fraction:
        return self.mass**2

    @property
    def ratio(self) -> Fraction:
        return self.sup_conv / self.mass_sq


def autoconv_sup(p: StepProfile) -> AutoconvReport:
    if not any(p.values):
        raise ValueError("the zero profile has no autoconvolution ratio")
    sums = p.knot_sums()
    k = max(range(len(sums)), key=lambda i: sums[i])
    return AutoconvReport(p, p.delta * sums[k], p.mass, p.knot(k))


# ---------------------------------------------------------------------------
# quantized minimisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantizedSearchResult:
    cells: int
    m: int
    b_value: Fraction
    argmin: tuple[int, ...]
    status: str  # "certified" or "incomplete"
    method: str
    nodes: int

    @property
    def chain_bound(self) -> Fraction:
        return chain(self.b_value, self.m).refined


def _ratio_int(maxconv: int, total: int, cells: int) -> Fraction:
    # sup/mass^2 = delta*maxconv/(delta*S)^2 = 2*cells*maxconv/S^2
    return Fraction(2 * cells * maxconv, total * total)


def _exhaustive(cells: int, m: int, batch: int = 1 << 18) -> tuple[Fraction, tuple[int, ...], int]:
    base = m + 1
    total = base**cells
    best: Fraction | None = None
    best_v: tuple[int, ...] = ()
    powers = base ** np.arange(cells - 1, -1, -1, dtype=np.int64)
    for start in range(1, total, batch):
        codes = np.arange(start, min(start + batch, total), dtype=np.int64)
        V = (codes[:, None] // powers[None, :]) % base
        conv = np.zeros((V.shape[0], 2 * cells - 1), dtype=np.int64)
        for i in range(cells):
            conv[:, i:i + cells] += V[:, i:i + 1] * V
        mx = conv.max(axis=1)
        S = V.sum(axis=1)
        approx = mx / (S.astype(float) ** 2)
        lo = approx.min()
        # exact comparison among everything within float noise of the minimum
        for r in np.flatnonzero(approx <= lo * (1 + 1e-12)):
            val = _ratio_int(int(mx[r]), int(S[r]), cells)
            if best is None or val < best:
                best, best_v = val, tuple(int(x) for x in V[r])
    return best, best_v, total - 1


def _branch_and_bound(cells: int, m: int, budget: int) -> tuple[Fraction, tuple[int, ...], int, bool]:
    best = Fraction(2)  # constant profile
    best_v: tuple[int, ...] = (m,) * cells
    floor = Fraction(2 * cells, 2 * cells - 1)  # max of 2c-1 knot sums totalling S^2
    nodes = 0
    v = [0] * cells
    conv = [0] * (2 * cells - 1)

    def lower(k: int, total: int) -> Fraction:
        s_max = total + m * (cells - k)
        if s_max == 0:
            return best  # only the excluded zero profile remains
        return max(floor, Fraction(2 * cells * max(conv), s_max * s_max))

    def rec(k: int, total: int) -> bool:
        nonlocal best, best_v, nodes
        nodes += 1
        if nodes > budget:
            return False
        if k == cells:
            if total:
                val = _ratio_int(max(conv), total, cells)
                if val < best:
                    best, best_v = val, tuple(v)
            return True
        for x in range(m, -1, -1):
            v[k] = x
            if x:
                for i in range(k):
                    conv[i + k] += 2 * x * v[i]
                conv[2 * k] += x * x
            ok = True
            if lower(k + 1, total + x) < best:
                ok = rec(k + 1, total + x)
            if x:
                for i in range(k):
                    conv[i + k] -= 2 * x * v[i]
                conv[2 * k] -= x * x
            v[k] = 0
            if not ok:
                return False
        return True

    complete = rec(0, 0)
    return best, best_v, nodes, complete


def quantized_min(cells: int, m: int, budget: int = 10**7) -> QuantizedSearchResult:
    """Exact minimum of the autoconvolution ratio over heights in ``{0, ..., m}``.

    Small classes are enumerated outright; larger ones use depth-first
    branch-and-bound whose pruning bound is an exact rational, so a finished
    search is a certified minimum.  Running out of ``budget`` nodes yields the
    best profile seen with status ``"incomplete"``.
    """
    if cells < 1 or m < 1:
        raise ValueError("need cells >= 1 and m >= 1")
    if (m + 1) ** cells <= EXHAUSTIVE_LIMIT and (m + 1) ** cells <= budget:
        b, v, nodes = _exhaustive(cells, m)
        return QuantizedSearchResult(cells, m, b, v, "certified", "exhaustive", nodes)
    b, v, nodes, complete = _branch_and_bound(cells, m, budget)
    return QuantizedSearchResult(cells, m, b, v, "certified" if complete else "incomplete",
                                 "branch-and-bound", nodes)


def quantized_min_bruteforce(cells: int, m: int) -> tuple[Fraction, tuple[int, ...]]:
    """Pure-Python enumeration through :func:`autoconv_sup`, used as an oracle."""
    from itertools import product

    best = None
    arg = ()
    for v in product(range(m + 1), repeat=cells):
        if any(v):
            r = autoconv_sup(StepProfile.of(v)).ratio
            if best is None or r < best:
                best, arg = r, v
    return best, arg


# ---------------------------------------------------------------------------
# Young-type bound and the chain arithmetic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YoungCheck:
    lhs: Fraction  # ||e*e||_inf
    linf_l1: Fraction  # ||e||_inf ||e||_1
    rhs_new: Fraction  # ||e||_inf^2 / 2
    rhs_old: Fraction  # ||e||_inf^2
    l1: Fraction
    linf: Fraction

    @property
    def l1_bound_holds(self) -> bool:
        return self.l1 <= self.linf / 2

    @property
    def holds(self) -> bool:
        return (self.l1_bound_holds and self.lhs <= self.linf_l1
                and self.linf_l1 <= self.rhs_new <= self.rhs_old)


def refined_young_check(eps: StepProfile) -> YoungCheck:
    """Exact ``||e*e||_inf <= ||e||_inf ||e||_1 <= ||e||_inf**2 / 2``.

    The middle step uses that the support window has length 1/2.
    """
    sums = eps.knot_sums()
    lhs = eps.delta * max(sums)
    linf = eps.linf
    l1 = eps.mass
    return YoungCheck(lhs, linf * l1, linf * linf / 2, linf * linf, l1, linf)


@dataclass(frozen=True)
class ChainBound:
    b: Fraction
    m: int
    refined: Fraction  # b - 2/m - 1/(2m^2)
    original: Fraction  # b - 2/m - 1/m^2
    label: str = field(default="external input, not certified here")

    def meets(self, target) -> bool:
        return self.refined >= Fraction(target)


def chain(b, m: int) -> ChainBound:
    if m < 1:
        raise ValueError("need m >= 1")
    b = Fraction(b)
    return ChainBound(b, m, b - Fraction(2, m) - Fraction(1, 2 * m * m),
                      b - Fraction(2, m) - Fraction(1, m * m))


def sigma_from_c(c) -> float:
    """``sigma = sqrt(2/c)``."""
    q = Fraction(c)
    if q <= 0:
        raise ValueError("c must be positive")
    r = 2 / q
    num, den = math.isqrt(r.numerator), math.isqrt(r.denominator)
    if num * num == r.numerator and den * den == r.denominator:
        return num / den
    return math.sqrt(r)


def c_from_sigma(sigma):
    """``c = 2/sigma**2``; exact when ``sigma`` is rational."""
    if isinstance(sigma, float):
        sigma = Fraction(sigma) if sigma.is_integer() else sigma
    if isinstance(sigma, (int, Fraction)):
        if sigma == 0:
            raise ValueError("sigma must be non-zero")
        return Fraction(2) / Fraction(sigma) ** 2
    return 2.0 / sigma**2


# ---------------------------------------------------------------------------
# g-Sidon sets
# ---------------------------------------------------------------------------

def representation_counts(A: Iterable[int], *, ordered: bool = False) -> dict[int, int]:
    """Number of ways to write each sum as ``a + b`` with ``a, b`` in ``A``."""
    elems = sorted(set(A))
    counts: dict[int, int] = {}
    for i, a in enumerate(elems):
        for b in elems[i:]:
            w = 1 if (not ordered or a == b) else 2
            counts[a + b] = counts.get(a + b, 0) + w
    return counts


def is_g_sidon(A: Iterable[int], g: int) -> bool:
    elems = set(A)
    if not elems:
        raise ValueError("A must be non-empty")
    if g < 1:
        raise ValueError("g must be at least 1")
    if any(a < 1 for a in elems):
        raise ValueError("elements must be positive integers")
    return max(representation_counts(elems).values()) <= g


def beta_g(n: int, g: int) -> tuple[int, tuple[int, ...]]:
    """Largest g-Sidon subset of ``{1, ..., n}``, by depth-first search.

    Elements are added in increasing order while tracking representation
    counts; a branch is cut once even taking every remaining integer cannot
    beat the incumbent.
    """
    if n < 1 or g < 1:
        raise ValueError("need n >= 1 and g >= 1")
    counts = [0] * (2 * n + 1)
    chosen: list[int] = []
    best: list[int] = []

    def rec(start: int) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        for x in range(start, n + 1):
            if len(chosen) + (n - x + 1) <= len(best):
                return
            # the new sums x + a (a < x) and 2x are pairwise distinct
            touched = [x + a for a in chosen] + [2 * x]
            if all(counts[s] < g for s in touched):
                for s in touched:
                    counts[s] += 1
                chosen.append(x)
                rec(x + 1)
                chosen.pop()
                for s in touched:
                    counts[s] -= 1

    rec(1)
    return len(best), tuple(best)


def beta_g_naive(n_max: int, g: int) -> list[int]:
    """``[beta_g(n, g) for n = 0..n_max]`` by scanning every subset of ``{1..n_max}``."""
    best = [0] * (n_max + 1)
    universe = range(1, n_max + 1)
    for size in range(1, n_max + 1):
        found = False
        for A in combinations(universe, size):
            if is_g_sidon(A, g):
                found = True
                top = A[-1]
                if best[top] < size:
                    best[top] = size
        if not found:
            break
    for n in range(1, n_max + 1):
        best[n] = max(best[n], best[n - 1])
    return best
