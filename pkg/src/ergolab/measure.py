"""Probability measures on the circle and distances between them.

Three representations are supported: :class:`GridMeasure` (weights on the
uniform grid ``i/N``), :class:`AtomicMeasure` (weights at arbitrary points)
and :class:`PiecewiseDensity` (constant density on ``M`` equal cells).

Cumulative distribution functions are taken from the base point 0 and are
right-continuous. For any finite signed combination of such measures the
difference of CDFs ``H`` is piecewise linear with jumps, so integrals of
``H``, ``H**2`` and ``|H - c|`` are computed segment by segment in closed
form. No quadrature is involved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .exceptions import DimensionMismatch

MASS_TOL = 1e-9


def _check_probability(weights, what):
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError(f"{what} must be a non-empty 1-d array")
    if np.any(weights < 0):
        raise ValueError(f"{what} must be non-negative")
    if abs(weights.sum() - 1.0) > MASS_TOL * max(1.0, weights.size ** 0.5):
        raise ValueError(f"{what} must sum to 1 (got {weights.sum()!r})")


@dataclass(frozen=True)
class GridMeasure:
    """Probability vector on the grid ``{i/N : 0 <= i < N}``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        _check_probability(w, "grid weights")
        object.__setattr__(self, "weights", w)

    @property
    def N(self) -> int:
        return self.weights.size

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @classmethod
    def uniform(cls, N: int) -> "GridMeasure":
        return cls(np.full(N, 1.0 / N))

    @classmethod
    def dirac(cls, N: int, i: int = 0) -> "GridMeasure":
        w = np.zeros(N)
        w[i % N] = 1.0
        return cls(w)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many weighted atoms at arbitrary points of ``[0, 1)``."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.shape != w.shape:
            raise DimensionMismatch("positions and weights differ in shape")
        p = p - np.floor(p)
        p[p >= 1.0] = 0.0
        _check_probability(w, "atom weights")
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, p: float) -> "AtomicMeasure":
        return cls(np.array([p]), np.array([1.0]))


@dataclass(frozen=True)
class PiecewiseDensity:
    """Density constant on each cell ``[j/M, (j+1)/M)``."""

    values: np.ndarray
    raw_mass: float = field(default=1.0, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("density values must be a non-empty 1-d array")
        if np.any(v < 0):
            raise ValueError("density values must be non-negative")
        if abs(v.mean() - 1.0) > 1e-10:
            raise ValueError(f"density must have mass 1 (got {v.mean()!r})")
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return self.values.size

    @classmethod
    def from_values(cls, values) -> "PiecewiseDensity":
        """Normalize non-negative ``values`` to unit mass."""
        v = np.clip(np.asarray(values, dtype=float), 0.0, None)
        mass = v.mean()
        return cls(v / mass, raw_mass=float(mass))


Measure = Union[GridMeasure, AtomicMeasure, PiecewiseDensity]


def lebesgue() -> PiecewiseDensity:
    return PiecewiseDensity(np.ones(1))


# -- segment representation of H = sum_k coef_k * CDF(measure_k) -----------

def _segments(terms: Sequence[tuple[float, Measure]]):
    """Breakpoints, right-limits of ``H`` and slopes for a signed combination.

    Returns ``(b, h, s)`` where ``b[0] = 0 < ... < b[n] = 1``, ``h[i]`` is the
    right limit of ``H`` at ``b[i]`` and ``s[i]`` its slope on
    ``(b[i], b[i+1])``.
    """
    pts = [np.array([0.0, 1.0])]
    for _, m in terms:
        if isinstance(m, PiecewiseDensity):
            pts.append(np.arange(m.M + 1) / m.M)
        else:
            pts.append(m.positions)
    b = np.unique(np.concatenate(pts))
    n = b.size - 1
    lengths = np.diff(b)
    mids = 0.5 * (b[:-1] + b[1:])
    jump = np.zeros(b.size)
    slope = np.zeros(n)
    for coef, m in terms:
        if isinstance(m, PiecewiseDensity):
            cell = np.minimum((mids * m.M).astype(np.int64), m.M - 1)
            slope += coef * m.values[cell]
        else:
            idx = np.searchsorted(b, m.positions)
            jump += np.bincount(idx, weights=coef * m.weights, minlength=b.size)
    h = np.cumsum(jump[:-1])
    h[1:] += np.cumsum(slope[:-1] * lengths[:-1])
    return b, h, slope


def _centered(b, h, s):
    lengths = np.diff(b)
    mean = np.sum(lengths * (h + 0.5 * s * lengths))
    return lengths, h - mean, mean


def _sq_integral(lengths, g, s):
    return np.sum(lengths * (g * g + g * s * lengths + s * s * lengths * lengths / 3.0))


def cramer_sq_terms(terms: Sequence[tuple[float, Measure]]) -> float:
    """Squared Cramér distance of ``sum coef * measure`` (coefficients sum to 0)."""
    b, h, s = _segments(terms)
    lengths, g, _ = _centered(b, h, s)
    return max(float(_sq_integral(lengths, g, s)), 0.0)


def cramer_sq(mu: Measure, nu: Measure) -> float:
    return cramer_sq_terms([(1.0, mu), (-1.0, nu)])


def cramer(mu: Measure, nu: Measure) -> float:
    """Cramér distance ``(min_c int_0^1 (F - G - c)^2)^(1/2)``."""
    return float(np.sqrt(cramer_sq(mu, nu)))


def cramer_offset(mu: Measure, nu: Measure, c: float) -> float:
    """``(int_0^1 (F - G - c)^2)^(1/2)`` for a given constant ``c``."""
    b, h, s = _segments([(1.0, mu), (-1.0, nu)])
    lengths = np.diff(b)
    return float(np.sqrt(max(_sq_integral(lengths, h - c, s), 0.0)))


def mean_cdf_difference(mu: Measure, nu: Measure) -> float:
    """``int_0^1 (F - G)``, the minimizing constant in the Cramér distance."""
    b, h, s = _segments([(1.0, mu), (-1.0, nu)])
    return float(_centered(b, h, s)[2])


def _abs_integral(lengths, g0, g1):
    same = g0 * g1 >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = (g0 * g0 + g1 * g1) / (2.0 * np.abs(g1 - g0))
    return np.sum(lengths * np.where(same, 0.5 * np.abs(g0 + g1), cross))


def wasserstein1(mu: Measure, nu: Measure) -> float:
    """Circle Wasserstein-1 distance ``min_c int_0^1 |F - G - c|``.

    The minimizing ``c`` is a median of ``H = F - G`` under Lebesgue measure,
    found by bisection on the exact distribution function of ``H``.
    """
    b, h, s = _segments([(1.0, mu), (-1.0, nu)])
    lengths = np.diff(b)
    g0, g1 = h, h + s * lengths
    lo, hi = np.minimum(g0, g1), np.maximum(g0, g1)
    span = hi - lo
    flat = span <= 0

    def below(c):
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.clip((c - lo) / span, 0.0, 1.0)
        frac = np.where(flat, (lo <= c).astype(float), frac)
        return np.sum(lengths * frac)

    a, z = float(lo.min()), float(hi.max())
    for _ in range(200):
        mid = 0.5 * (a + z)
        if mid <= a or mid >= z:
            break
        if below(mid) < 0.5:
            a = mid
        else:
            z = mid
    c = 0.5 * (a + z)
    return float(_abs_integral(lengths, g0 - c, g1 - c))


def inner_jump(p, q):
    """``<g_p, g_q>`` for centred CDFs of Dirac masses: ``min(p,q) (1 - max(p,q))``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.minimum(p, q) * (1.0 - np.maximum(p, q))


def zero_identity_check(mu: Measure) -> float:
    """``int (f^2 + 2F)`` with ``f`` the centred CDF of ``mu`` and ``F`` its primitive.

    Computed from ``mu`` alone; equals ``cramer(mu, Leb)**2 - 1/12``.
    """
    b, h, s = _segments([(1.0, mu)])
    lengths, g, _ = _centered(b, h, s)
    a, z = b[:-1], b[1:]
    # int_0^1 F = -int_0^1 t f(t) dt because f has zero mean
    t_f = np.sum(g * (z * z - a * a) / 2.0
                 + s * ((z ** 3 - a ** 3) / 3.0 - a * (z * z - a * a) / 2.0))
    return float(_sq_integral(lengths, g, s) - 2.0 * t_f)


def pushforward_table(mu: GridMeasure, table) -> GridMeasure:
    """Image of ``mu`` under a grid self-map given by its index ``table``."""
    table = getattr(table, "table", table)
    if len(table) != mu.N:
        raise DimensionMismatch(f"table of size {len(table)} for grid of size {mu.N}")
    return GridMeasure(np.bincount(table, weights=mu.weights, minlength=mu.N))


def smooth(mu: GridMeasure, window: int) -> PiecewiseDensity:
    """Convolve the atoms with the indicator of ``window`` grid cells.

    Each atom's mass is spread evenly over ``window`` consecutive cells
    centred on it; the result is a density on the ``N`` grid cells.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    N = mu.N
    w = mu.weights
    start = -(window // 2)
    # circular moving sum via cumulative sums over a tripled array
    reps = window // N + 2
    ext = np.concatenate([np.zeros(1), np.cumsum(np.tile(w, 2 * reps + 1))])
    j = np.arange(N) + reps * N
    # cell j collects atoms i with j - i in [start, start + window)
    hi = j - start + 1
    lo = j - start - window + 1
    vals = (ext[hi] - ext[lo]) * N / window
    return PiecewiseDensity.from_values(vals)


def mixture(measures: Sequence[Measure], weights) -> list[tuple[float, Measure]]:
    """Terms list for a convex combination, usable with :func:`cramer_sq_terms`."""
    weights = np.asarray(weights, dtype=float)
    return [(float(w), m) for w, m in zip(weights, measures)]


def sample(measure: Measure, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` iid points from ``measure``."""
    if isinstance(measure, PiecewiseDensity):
        cells = rng.choice(measure.M, size=size, p=measure.values / measure.values.sum())
        return (cells + rng.random(size)) / measure.M
    return rng.choice(measure.positions, size=size, p=measure.weights)
