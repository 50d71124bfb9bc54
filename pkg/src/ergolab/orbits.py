"""Functional-graph structure of a grid self-map: cycles, basins, tails."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DiscretizedMap
from .measure import GridMeasure


@dataclass(frozen=True)
class CycleDecomposition:
    """Cycles of a finite map together with per-point orbit data.

    Attributes
    ----------
    cycles : list of ndarray
        Each cycle listed in dynamical order.
    basin_size : ndarray
        Number of points eventually absorbed by each cycle.
    cycle_id : ndarray
        Index of the cycle reached by each point.
    tail_length : ndarray
        Steps each point needs to enter its cycle.
    cycle_length : ndarray
        Length of the cycle reached by each point.
    """

    cycles: list
    basin_size: np.ndarray
    cycle_id: np.ndarray
    tail_length: np.ndarray
    cycle_length: np.ndarray


def decompose(fN) -> CycleDecomposition:
    """Decompose the functional graph of ``fN`` in linear time.

    Iterative walk with three marks (unvisited, on the current path,
    resolved); no recursion.
    """
    table = getattr(fN, "table", fN)
    t = np.asarray(table, dtype=np.int64).tolist()
    N = len(t)
    state = [0] * N
    pos = [0] * N
    cid = [-1] * N
    tail = [0] * N
    cycles = []
    for s in range(N):
        if state[s]:
            continue
        path = []
        x = s
        while state[x] == 0:
            state[x] = 1
            pos[x] = len(path)
            path.append(x)
            x = t[x]
        if state[x] == 1:
            start = pos[x]
            c = len(cycles)
            cycles.append(path[start:])
            for y in path[start:]:
                cid[y] = c
                state[y] = 2
            del path[start:]
            depth = 0
        else:
            c = cid[x]
            depth = tail[x]
        for y in reversed(path):
            depth += 1
            tail[y] = depth
            cid[y] = c
            state[y] = 2
    cycle_id = np.array(cid, dtype=np.int64)
    lengths = np.array([len(c) for c in cycles], dtype=np.int64)
    return CycleDecomposition(
        cycles=[np.array(c, dtype=np.int64) for c in cycles],
        basin_size=np.bincount(cycle_id, minlength=len(cycles)),
        cycle_id=cycle_id,
        tail_length=np.array(tail, dtype=np.int64),
        cycle_length=lengths[cycle_id],
    )


def asymptotic_measure(fN, decomposition: CycleDecomposition = None) -> GridMeasure:
    """Cesàro limit of the iterated uniform measure.

    Each cycle receives mass ``basin / N`` spread evenly over its points.
    """
    d = decomposition or decompose(fN)
    N = d.cycle_id.size
    w = np.zeros(N)
    for cyc, basin in zip(d.cycles, d.basin_size):
        w[cyc] = basin / (N * cyc.size)
    return GridMeasure(w)


def mean_orbit_cardinality(fN, decomposition: CycleDecomposition = None) -> float:
    """Average over starting points of ``tail + cycle length``."""
    d = decomposition or decompose(fN)
    return float(np.mean(d.tail_length + d.cycle_length))


def random_table(N: int, rng: np.random.Generator) -> DiscretizedMap:
    """Uniformly random self-map of ``{0, ..., N-1}``."""
    return DiscretizedMap(rng.integers(0, N, size=N))


def rho_length_asymptotic(N) -> float:
    """``sqrt(pi N / 2)``, the large-``N`` mean orbit size of a random map."""
    return float(np.sqrt(np.pi * np.asarray(N) / 2.0))
