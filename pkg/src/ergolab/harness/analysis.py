"""Statistics applied to experiment series."""
from __future__ import annotations

import hashlib

import numpy as np

from ..exceptions import NotExpanding
from ..expanding_map import MapParams, check_expanding
from ..grid import DiscretizedMap

PERTURBATION_STEPS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def ensemble(base: MapParams, step: float = 0.001) -> list[MapParams]:
    """25 perturbations ``c_i + step * p_i`` with ``p_1, p_2`` in ``{-1, -1/2, 0, 1/2, 1}``.

    The centre (index 12) is ``base`` itself.
    """
    if step < 0:
        raise ValueError("step must be >= 0")
    out = []
    for p1 in PERTURBATION_STEPS:
        for p2 in PERTURBATION_STEPS:
            params = MapParams(base.c1 + step * p1, base.c2 + step * p2, base.shift)
            if not check_expanding(params):
                raise NotExpanding(f"perturbation ({p1}, {p2}) of {base} is not expanding")
            out.append(params)
    return out


def preimage_counts(fN: DiscretizedMap, k: int) -> np.ndarray:
    """``Card f_N^{-k}(y)`` for every grid point ``y``."""
    counts = np.ones(fN.N, dtype=np.int64)
    for _ in range(k):
        counts = np.bincount(fN.table, weights=counts, minlength=fN.N).astype(np.int64)
    return counts


def local_preimage_histogram(fN: DiscretizedMap, k: int, R: int, m_max: int = None) -> np.ndarray:
    """Local frequency of grid points with ``m`` preimages under ``f_N^k``.

    Entry ``[m, x]`` is ``(1/2R) Card{y in [x - R, x + R) : Card f_N^{-k}(y) = m}``
    with the window taken in grid units, half-open so that it holds exactly
    ``2R`` points.
    """
    if R < 1 or k < 0:
        raise ValueError("need R >= 1 and k >= 0")
    counts = preimage_counts(fN, k)
    if m_max is None:
        m_max = int(counts.max())
    N = fN.N
    out = np.empty((m_max + 1, N))
    idx = np.arange(N)
    for m in range(m_max + 1):
        ind = (counts == m).astype(np.float64)
        ext = np.concatenate([[0.0], np.cumsum(np.tile(ind, 3))])
        # window [x - R, x + R) in the middle copy
        out[m] = (ext[idx + N + R] - ext[idx + N - R]) / (2 * R) if 2 * R <= N else \
            _wrapped_window(ind, R)
    return out


def _wrapped_window(ind, R):
    N = ind.size
    offs = np.arange(-R, R)
    return np.array([ind[(x + offs) % N].sum() for x in range(N)]) / (2 * R)


def min_distance_time(series) -> int:
    """First index at which ``series`` attains its minimum."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    return int(np.argmin(series))


def threshold_time(empirical, predicted, band: float = 0.05) -> int:
    """First ``k`` where the relative error band leaves ``[-band, band]``.

    ``empirical`` is a single series or an ensemble (one row per member);
    the signed relative error ``(empirical - predicted) / predicted`` is
    summarized by its mean plus or minus its standard deviation across
    members. Returns the series length when the band is never left.
    """
    if band <= 0:
        raise ValueError("band must be positive")
    emp = np.atleast_2d(np.asarray(empirical, dtype=float))
    pred = np.asarray(predicted, dtype=float)
    if emp.shape[-1] != pred.shape[-1]:
        raise ValueError("series lengths differ")
    rel = (emp - pred) / pred
    mean = rel.mean(axis=0)
    std = rel.std(axis=0)
    worst = np.maximum(np.abs(mean - std), np.abs(mean + std))
    hits = np.nonzero(worst > band)[0]
    return int(hits[0]) if hits.size else emp.shape[-1]


class PeriodDetector:
    """Exact recurrence of a sequence of weight vectors."""

    def __init__(self):
        self._seen = {}
        self.start = None
        self.period = None

    def add(self, k: int, weights: np.ndarray) -> bool:
        """Record state ``k``; returns True once a recurrence is found."""
        if self.period is not None:
            return True
        digest = hashlib.sha1(np.ascontiguousarray(weights).tobytes()).hexdigest()
        if digest in self._seen:
            self.start = self._seen[digest]
            self.period = k - self.start
            return True
        self._seen[digest] = k
        return False


def linear_fit(x, y) -> dict:
    """Least-squares line with Pearson correlation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    corr = float(np.corrcoef(x, y)[0, 1]) if x.size > 1 and np.std(y) > 0 else float("nan")
    return {"slope": float(slope), "intercept": float(intercept), "correlation": corr}
