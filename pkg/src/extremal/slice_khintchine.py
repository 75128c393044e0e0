"""Khintchine-type L1/L2 comparison on the middle slice of the Hamming cube.

The middle slice ``Omega_n`` is the set of sign vectors with equally many
``+1`` and ``-1`` entries, under the uniform measure.  For ``f = |sum a_i x_i|``
the optimal constant in ``E f >= c_n (E f**2)**(1/2)`` is
``c_n = sqrt((n-2)/(2(n-1)))``, attained at ``a = (1, 1, 0, ..., 0)``.

Everything here works on slice values directly: the transposition Laplacian
``Lf = f - mean_{i<j} f o (i j)`` is applied through a precomputed table of
swap permutations.  Exact verdicts use integer or ``Fraction`` arithmetic;
spectra and eigenprojections use a dense symmetric eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

MAX_ENUM_N = 14
MAX_SPECTRUM_N = 10
CLUSTER_TOL = 1e-9


def c_n_squared(n: int) -> Fraction:
    return Fraction(n - 2, 2 * (n - 1))


def laplacian_eigenvalue(n: int, d: int) -> Fraction:
    """Eigenvalue ``2d(n+1-d)/(n(n-1))`` on the degree-``d`` component."""
    return Fraction(2 * d * (n + 1 - d), n * (n - 1))


@dataclass(frozen=True, eq=False)
class SliceIndex:
    """All points of ``Omega_n`` in colexicographic order of their ``+1`` positions."""

    n: int
    points: np.ndarray  # shape (C(n, n/2), n), entries +-1
    swaps: np.ndarray  # shape (C(n, 2), size); swaps[p, i] = index of point i after transposition p

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _check_n(n: int, limit: int = MAX_ENUM_N) -> None:
    if n % 2:
        raise ValueError(f"the middle slice needs even n, got {n}")
    if not 4 <= n <= limit:
        raise ValueError(f"n must lie in [4, {limit}], got {n}")


@lru_cache(maxsize=None)
def enumerate_slice(n: int) -> SliceIndex:
    _check_n(n)
    supports = sorted(combinations(range(n), n // 2), key=lambda c: c[::-1])
    pts = -np.ones((len(supports), n), dtype=np.int64)
    for row, c in enumerate(supports):
        pts[row, list(c)] = 1
    weights = 1 << np.arange(n, dtype=np.int64)
    codes = ((pts > 0).astype(np.int64) * weights).sum(axis=1)
    lookup = {int(c): i for i, c in enumerate(codes)}
    pairs = list(combinations(range(n), 2))
    swaps = np.empty((len(pairs), len(supports)), dtype=np.int64)
    for p, (i, j) in enumerate(pairs):
        sw = pts.copy()
        sw[:, [i, j]] = sw[:, [j, i]]
        sc = ((sw > 0).astype(np.int64) * weights).sum(axis=1)
        swaps[p] = [lookup[int(c)] for c in sc]
    pts.setflags(write=False)
    swaps.setflags(write=False)
    return SliceIndex(n, pts, swaps)


@dataclass(frozen=True, eq=False)
class SliceFunction:
    """Values of a function on ``Omega_n``; ``values`` is float or object (exact) dtype."""

    index: SliceIndex
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.index.size,):
            raise ValueError("one value per slice point required")

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def mean(self):
        if self.exact:
            return Fraction(sum(self.values), self.index.size)
        return float(self.values.mean())

    def inner(self, other: "SliceFunction"):
        if self.exact and other.exact:
            return Fraction(sum(self.values * other.values), self.index.size)
        return float(np.dot(self.values.astype(float), other.values.astype(float)) / self.index.size)


def _as_exact_vector(a: Sequence, n: int) -> list[Fraction]:
    if len(a) != n:
        raise ValueError(f"coefficient vector must have length {n}")
    return [Fraction(x) for x in a]


def _integer_scaling(a: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for x in a:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return [int(x * den) for x in a], den


def linear_form(n: int, a: Sequence, *, exact: bool = True) -> SliceFunction:
    """``g(x) = sum a_i x_i`` on the slice."""
    idx = enumerate_slice(n)
    if exact:
        fa = _as_exact_vector(a, n)
        ints, den = _integer_scaling(fa)
        raw = idx.points.astype(object) @ np.array(ints, dtype=object)
        vals = np.array([Fraction(int(v), den) for v in raw], dtype=object)
    else:
        vals = idx.points @ np.asarray(a, dtype=float)
    return SliceFunction(idx, vals)


def abs_form(n: int, a: Sequence, *, exact: bool = True) -> SliceFunction:
    """``f(x) = |sum a_i x_i|`` on the slice."""
    g = linear_form(n, a, exact=exact)
    vals = np.array([abs(v) for v in g.values], dtype=object) if exact else np.abs(g.values)
    return SliceFunction(g.index, vals)


def laplacian_apply(f: SliceFunction) -> SliceFunction:
    """``Lf = f - (1/C(n,2)) sum_{i<j} f o (i j)``, exact for exact input."""
    swaps = f.index.swaps
    pairs = swaps.shape[0]
    if f.exact:
        acc = np.zeros(f.index.size, dtype=object)
        for row in swaps:
            acc = acc + f.values[row]
        vals = f.values - acc / Fraction(pairs) if pairs else f.values
        vals = np.array([Fraction(v) for v in vals], dtype=object)
    else:
        vals = f.values - f.values[swaps].sum(axis=0) / pairs
    return SliceFunction(f.index, vals)


def laplacian_matrix(n: int) -> np.ndarray:
    idx = enumerate_slice(n)
    size = idx.size
    L = np.eye(size)
    pairs = idx.swaps.shape[0]
    for row in idx.swaps:
        L[np.arange(size), row] -= 1.0 / pairs
    return L


# ---------------------------------------------------------------------------
# Khintchine ratio
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KhintchineReport:
    n: int
    a: tuple[Fraction, ...]
    L1: Fraction
    L2_sq: Fraction
    c_n_sq: Fraction

    @property
    def ratio_sq(self) -> Fraction:
        return self.L1**2 / self.L2_sq

    @property
    def ratio(self) -> float:
        return math.sqrt(self.ratio_sq)

    @property
    def c_n(self) -> float:
        return math.sqrt(self.c_n_sq)

    @property
    def holds(self) -> bool:
        return self.ratio_sq >= self.c_n_sq

    @property
    def is_equality(self) -> bool:
        return self.ratio_sq == self.c_n_sq


def khintchine_ratio(n: int, a: Sequence, points: np.ndarray | None = None) -> KhintchineReport:
    """Exact ``E|sum a_i x_i|`` and ``E|sum a_i x_i|**2``.

    ``points`` overrides the support of the uniform measure (any exchangeable
    finite sample); by default the middle slice is used.
    """
    fa = _as_exact_vector(a, n)
    ints, den = _integer_scaling(fa)
    if points is None:
        points = enumerate_slice(n).points
    raw = [int(v) for v in points.astype(object) @ np.array(ints, dtype=object)]
    size = len(raw)
    l1 = Fraction(sum(abs(v) for v in raw), size * den)
    l2 = Fraction(sum(v * v for v in raw), size * den * den)
    if l2 == 0:
        raise ValueError("sum a_i x_i vanishes identically; the ratio is undefined")
    return KhintchineReport(n, tuple(fa), l1, l2, c_n_squared(n))


def extremizer(n: int) -> tuple[int, ...]:
    return (1, 1) + (0,) * (n - 2)


# ---------------------------------------------------------------------------
# spectrum and eigenprojections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumCluster:
    d: int
    eigenvalue: Fraction
    multiplicity: int
    observed: float


class ClusterError(RuntimeError):
    """Numerical eigenvalues could not be matched to the predicted values."""


@lru_cache(maxsize=None)
def _eigh(n: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(laplacian_matrix(n))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _labels(n: int, w: np.ndarray) -> np.ndarray:
    theory = np.array([float(laplacian_eigenvalue(n, d)) for d in range(n // 2 + 1)])
    gaps = np.diff(theory)
    if gaps.size and gaps.min() <= 2 * CLUSTER_TOL:
        raise ClusterError("predicted eigenvalues closer than the clustering tolerance")
    dist = np.abs(w[:, None] - theory[None, :])
    lab = dist.argmin(axis=1)
    if dist[np.arange(w.size), lab].max() > CLUSTER_TOL:
        bad = w[dist.min(axis=1) > CLUSTER_TOL]
        raise ClusterError(f"eigenvalues {bad[:5]} match no predicted value within {CLUSTER_TOL}")
    return lab


def laplacian_spectrum(n: int) -> list[SpectrumCluster]:
    _check_n(n, MAX_SPECTRUM_N)
    w, _ = _eigh(n)
    lab = _labels(n, w)
    out = []
    for d in range(n // 2 + 1):
        sel = w[lab == d]
        if sel.size:
            out.append(SpectrumCluster(d, laplacian_eigenvalue(n, d), int(sel.size), float(sel.mean())))
    return out


def eigenspace_projections(f: SliceFunction) -> dict[int, float]:
    """Euclidean norm of the projection of ``f`` onto each degree-``d`` eigenspace."""
    n = f.index.n
    _check_n(n, MAX_SPECTRUM_N)
    w, v = _eigh(n)
    lab = _labels(n, w)
    coeffs = v.T @ f.values.astype(float)
    return {d: float(np.linalg.norm(coeffs[lab == d])) for d in range(n // 2 + 1)}


def evenness_check(n: int, a: Sequence) -> float:
    """Largest odd-degree projection of ``|sum a_i x_i|``, relative to its norm."""
    f = abs_form(n, a, exact=False)
    proj = eigenspace_projections(f)
    norm = float(np.linalg.norm(f.values))
    if norm == 0:
        return 0.0
    return max((proj[d] for d in proj if d % 2), default=0.0) / norm


# ---------------------------------------------------------------------------
# Poincare chain and pointwise bound
# ---------------------------------------------------------------------------

def _abs_integer_values(n: int, a: Sequence) -> tuple[np.ndarray, int, SliceIndex]:
    fa = _as_exact_vector(a, n)
    ints, den = _integer_scaling(fa)
    idx = enumerate_slice(n)
    big = sum(abs(x) for x in ints) * idx.swaps.shape[0]
    dtype = np.int64 if big < 2**40 else object
    vals = np.abs(idx.points.astype(dtype) @ np.array(ints, dtype=dtype))
    return vals, den, idx


@dataclass(frozen=True)
class PoincareTriple:
    lhs: Fraction  # (4/n) Var f
    mid: Fraction  # <f, Lf>
    rhs: Fraction  # (2/(n-1)) ||f||^2

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid <= self.rhs


def poincare_check(n: int, a: Sequence) -> PoincareTriple:
    """Exact ``((4/n) Var f, <f, Lf>, (2/(n-1)) ||f||_2**2)`` for ``f = |sum a_i x_i|``."""
    vals, den, idx = _abs_integer_values(n, a)
    size = idx.size
    pairs = idx.swaps.shape[0]
    # pairs * Lf as integers
    lf_scaled = pairs * vals - vals[idx.swaps].sum(axis=0)
    s1 = int(vals.sum())
    s2 = int((vals * vals).sum())
    slf = int((vals * lf_scaled).sum())
    d2 = den * den
    mean_sq = Fraction(s2, size * d2)
    mean = Fraction(s1, size * den)
    var = mean_sq - mean * mean
    return PoincareTriple(
        Fraction(4, n) * var,
        Fraction(slf, size * pairs * d2),
        Fraction(2, n - 1) * mean_sq,
    )


def pointwise_Lf_check(n: int, a: Sequence) -> Fraction:
    """``min_x (2/(n-1)) f(x) - Lf(x)``; non-negative for every ``a``."""
    vals, den, idx = _abs_integer_values(n, a)
    pairs = idx.swaps.shape[0]
    lf_scaled = pairs * vals - vals[idx.swaps].sum(axis=0)
    # pairs * (2/(n-1)) = n, so the scaled slack is n f - pairs * Lf
    slack = n * vals - lf_scaled
    return Fraction(int(slack.min()), pairs * den)


def chi_d_values(n: int, d: int) -> np.ndarray:
    """``prod_{i<=d} (x_{2i-1} - x_{2i})`` on the slice (integers)."""
    if not 0 <= d <= n // 2:
        raise ValueError("need 0 <= d <= n/2")
    pts = enumerate_slice(n).points
    out = np.ones(pts.shape[0], dtype=np.int64)
    for i in range(d):
        out *= pts[:, 2 * i] - pts[:, 2 * i + 1]
    return out


def chi_d_norm(n: int, d: int) -> Fraction:
    """``E chi_d**2`` under the uniform slice measure."""
    vals = chi_d_values(n, d)
    return Fraction(int((vals * vals).sum()), vals.size)


# ---------------------------------------------------------------------------
# search for the optimal constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    n: int
    best_ratio: float
    best_a: tuple[float, ...]
    c_n: float
    extremizer_ratio_sq: Fraction
    restarts: int
    seed: int

    @property
    def never_beats_c_n(self) -> bool:
        return self.best_ratio >= self.c_n - 1e-9

    @property
    def matches_extremizer(self) -> bool:
        """Best coefficients equal ``(1, 1, 0, ..., 0)`` up to permutation, sign, scale and shift."""
        ref = sorted(_canonical(np.array(extremizer(self.n), dtype=float)))
        got = sorted(self.best_a)
        flipped = sorted(-x for x in self.best_a)
        close = lambda u: max(abs(x - y) for x, y in zip(u, ref)) <= 1e-6
        return close(got) or close(flipped)


def _ratio_float(X: np.ndarray, a: np.ndarray) -> float:
    v = X @ a
    l2 = float(np.mean(v * v))
    if l2 <= 1e-300:
        return math.inf
    return float(np.mean(np.abs(v))) / math.sqrt(l2)


def _canonical(a: np.ndarray) -> tuple[float, ...]:
    # scale-free, sign-free, centred representative; sorted |a| breaks ties
    a = a - a.mean()
    nrm = np.linalg.norm(a)
    if nrm > 0:
        a = a / nrm
    if a[np.argmax(np.abs(a))] < 0:
        a = -a
    return tuple(float(x) for x in a)


def optimality_search(n: int, restarts: int = 200, seed: int = 0) -> SearchResult:
    """Multi-start local minimisation of ``E|sum a x| / ||sum a x||_2`` over ``a``.

    Coefficients are centred (adding a constant to ``a`` does not change
    ``sum a_i x_i`` on the slice), then polished by coordinate steps and
    Nelder-Mead.  Starts include perturbations of the known extremizer.
    """
    from scipy.optimize import minimize

    _check_n(n, 12)
    X = enumerate_slice(n).points.astype(float)
    rng = np.random.Generator(np.random.Philox(seed))
    obj = lambda a: _ratio_float(X, a - a.mean())

    best = math.inf
    best_a = np.zeros(n)
    base = np.array(extremizer(n), dtype=float)
    for t in range(restarts):
        if t % 4 == 0:
            start = base[rng.permutation(n)] + 0.05 * rng.standard_normal(n)
        else:
            start = rng.standard_normal(n)
        a = _coordinate_descent(obj, start, rng)
        res = minimize(obj, a, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 400 * n})
        a = res.x if res.fun < obj(a) else a
        val = obj(a)
        if val < best - 1e-15 or (abs(val - best) <= 1e-15 and
                                  sorted(np.abs(a)) < sorted(np.abs(best_a))):
            best, best_a = val, a
    ext = khintchine_ratio(n, extremizer(n))
    return SearchResult(n, best, _canonical(best_a), math.sqrt(c_n_squared(n)),
                        ext.ratio_sq, restarts, seed)


def _coordinate_descent(obj, a: np.ndarray, rng: np.random.Generator, sweeps: int = 6) -> np.ndarray:
    a = a.copy()
    cur = obj(a)
    step = 0.5
    for _ in range(sweeps):
        for i in rng.permutation(a.size):
            for sgn in (1.0, -1.0):
                trial = a.copy()
                trial[i] += sgn * step
                val = obj(trial)
                if val < cur:
                    a, cur = trial, val
        step *= 0.5
    return a
