"""Uniform grids, nearest-point projection and discretization schemes.

A grid of order ``N`` is ``{i/N : 0 <= i < N}``; grid points are handled
through their integer index. The projection sends ``x`` to ``i`` when
``x`` lies in ``[(i - 1/2)/N, (i + 1/2)/N)`` modulo 1, so exact half points
round up.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np

from .expanding_map import MapParams, evaluate
from .exceptions import DimensionMismatch, InvalidState
from .measure import AtomicMeasure, GridMeasure


class RoundSplit(NamedTuple):
    """``N * fx = lower + epsilon`` with ``0 <= epsilon < 1``."""

    lower: np.ndarray
    epsilon: np.ndarray


def round_split(N: int, fx) -> RoundSplit:
    scaled = N * np.asarray(fx, dtype=float)
    lower = np.floor(scaled)
    eps = scaled - lower
    return RoundSplit(lower.astype(np.int64) % N, eps)


def project(N: int, x):
    """Index of the grid point closest to ``x``, ties rounding up."""
    if N < 1:
        raise ValueError("N must be >= 1")
    lower, eps = round_split(N, x)
    return (lower + (eps >= 0.5)) % N


def embed(N: int, i):
    return np.asarray(i) / N


@dataclass(frozen=True)
class DiscretizedMap:
    """A self-map of the grid of order ``N`` stored as an index table."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 1 or np.any(t < 0) or np.any(t >= t.size):
            raise ValueError("table entries must lie in [0, N)")
        object.__setattr__(self, "table", t)

    @property
    def N(self) -> int:
        return self.table.size

    def __len__(self):
        return self.table.size

    def power(self, k: int) -> np.ndarray:
        """Table of the ``k``-th iterate."""
        out = np.arange(self.N)
        for _ in range(k):
            out = self.table[out]
        return out


def discretize(params: MapParams, N: int) -> DiscretizedMap:
    """``f_N = P_N o f`` restricted to the grid."""
    fx = evaluate(params, np.arange(N) / N)
    return DiscretizedMap(project(N, fx))


class SchemeKind(str, Enum):
    MAP_TO_CLOSEST = "MapToClosest"
    ONCE_DECIDED_RANDOM = "OnceDecidedRandom"
    STEPWISE_RANDOM = "StepwiseRandom"
    POINTS_RANDOM_ON_GRID = "PointsRandomOnGrid"
    POINTS_PERTURBED = "PointsPerturbed"
    MAP_TO_COMBINATION = "MapToCombination"

    @property
    def particle_based(self) -> bool:
        return self in (SchemeKind.POINTS_RANDOM_ON_GRID, SchemeKind.POINTS_PERTURBED)


@dataclass(frozen=True)
class Particles:
    """Particle state of the particle-based schemes.

    ``positions`` holds grid indices when ``on_grid`` and circle points
    otherwise.
    """

    positions: np.ndarray
    on_grid: bool


State = Union[GridMeasure, Particles]


class Scheme:
    """One discretization scheme of a map on the grid of order ``N``.

    Parameters
    ----------
    kind : SchemeKind or str
    params : MapParams
    N : int
    rng : numpy.random.Generator, optional
        Needed only by ``OnceDecidedRandom``, whose table is drawn here once
        and then frozen.
    """

    def __init__(self, kind, params: MapParams, N: int,
                 rng: Optional[np.random.Generator] = None):
        self.kind = SchemeKind(kind)
        self.params = params
        self.N = N
        fx = evaluate(params, np.arange(N) / N)
        self.lower, self.epsilon = round_split(N, fx)
        self.upper = (self.lower + 1) % N
        self.table: Optional[np.ndarray] = None
        if self.kind is SchemeKind.MAP_TO_CLOSEST:
            self.table = np.where(self.epsilon >= 0.5, self.upper, self.lower)
        elif self.kind is SchemeKind.ONCE_DECIDED_RANDOM:
            if rng is None:
                raise ValueError("OnceDecidedRandom needs a generator to draw its table")
            self.table = self._draw_table(rng)

    def _draw_table(self, rng):
        return np.where(rng.random(self.N) < self.epsilon, self.upper, self.lower)

    def initial_state(self) -> State:
        """Uniform measure on the grid, or one particle per grid point."""
        if self.kind is SchemeKind.POINTS_RANDOM_ON_GRID:
            return Particles(np.arange(self.N), on_grid=True)
        if self.kind is SchemeKind.POINTS_PERTURBED:
            return Particles(np.arange(self.N) / self.N, on_grid=False)
        return GridMeasure.uniform(self.N)

    def push(self, state: State, rng: Optional[np.random.Generator] = None) -> State:
        """Advance ``state`` by one step of the scheme."""
        if self.kind.particle_based != isinstance(state, Particles):
            raise InvalidState(f"{self.kind.value} cannot act on {type(state).__name__}")
        if isinstance(state, GridMeasure) and state.N != self.N:
            raise DimensionMismatch(f"measure on N={state.N}, scheme on N={self.N}")
        kind = self.kind
        if kind in (SchemeKind.MAP_TO_CLOSEST, SchemeKind.ONCE_DECIDED_RANDOM):
            return GridMeasure(np.bincount(self.table, weights=state.weights, minlength=self.N))
        if kind is SchemeKind.STEPWISE_RANDOM:
            table = self._draw_table(rng)
            return GridMeasure(np.bincount(table, weights=state.weights, minlength=self.N))
        if kind is SchemeKind.MAP_TO_COMBINATION:
            w = state.weights
            out = np.bincount(self.lower, weights=w * (1.0 - self.epsilon), minlength=self.N)
            out += np.bincount(self.upper, weights=w * self.epsilon, minlength=self.N)
            return GridMeasure(out)
        if kind is SchemeKind.POINTS_RANDOM_ON_GRID:
            idx = state.positions
            up = rng.random(idx.size) < self.epsilon[idx]
            return Particles(np.where(up, self.upper[idx], self.lower[idx]), on_grid=True)
        # PointsPerturbed: particles never re-gridded
        x = evaluate(self.params, state.positions)
        x = x + (rng.random(x.size) - 0.5) / self.N
        x = x - np.floor(x)
        return Particles(np.where(x >= 1.0, 0.0, x), on_grid=False)

    def measure(self, state: State):
        """The (empirical) probability measure carried by ``state``."""
        if isinstance(state, GridMeasure):
            return state
        n = state.positions.size
        if state.on_grid:
            return GridMeasure(np.bincount(state.positions, minlength=self.N) / n)
        return AtomicMeasure(state.positions, np.full(n, 1.0 / n))


def scheme_push(scheme: Scheme, state: State, rng=None) -> State:
    return scheme.push(state, rng)
