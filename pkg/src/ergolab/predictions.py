"""Percolation-type predictors for discretizations of expanding maps.

Every grid point ``y`` carries the binary tree of its iterated preimages,
each edge kept independently with probability ``1/f'`` at its lower end.
``mean_density`` is the probability that some root-to-leaf path survives;
the preimage polynomial ``sum_m a_m X^m`` holds the law of the number of
surviving paths. Both are propagated on the collocation nodes of a
:class:`~ergolab.transfer_op.TransferOperator`.

The module also evaluates the expected squared Cramér distance between a
measure and a weighted random point process, and the ``p(k)`` predictors
built on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DimensionMismatch
from .grid import DiscretizedMap
from .measure import (AtomicMeasure, Measure, PiecewiseDensity, cramer_sq,
                      cramer_sq_terms, lebesgue, sample)
from .transfer_op import TransferOperator

DEFAULT_MMAX = 256
_FFT_CHUNK = 4096


# -- mean density --------------------------------------------------------

def combine_density(d0, d1, w0, w1):
    """Survival probability at a node from its two children."""
    return 1.0 - (1.0 - w0 * d0) * (1.0 - w1 * d1)


def mean_density_step(op: TransferOperator, D) -> np.ndarray:
    """``D_{k+1}(y) = 1 - prod_{f(x) = y} (1 - D_k(x) / f'(x))``."""
    d0, d1 = op.at_preimages(D)
    w = op.weights
    return combine_density(d0, d1, w[:, 0], w[:, 1])


def mean_densities(op: TransferOperator, k_max: int) -> np.ndarray:
    """Rows ``D_0 = 1, D_1, ..., D_k_max`` at the operator nodes."""
    out = np.empty((k_max + 1, op.M))
    out[0] = 1.0
    for k in range(k_max):
        out[k + 1] = mean_density_step(op, out[k])
    return out


def injectivity_limits(op: TransferOperator, k_max: int) -> np.ndarray:
    """Predicted large-``N`` rate of injectivity for every ``k <= k_max``."""
    return mean_densities(op, k_max).mean(axis=1)


def injectivity_limit(op: TransferOperator, k: int) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return float(injectivity_limits(op, k)[k])


def rate_of_injectivity_series(fN: DiscretizedMap, k_max: int) -> np.ndarray:
    """``Card(f_N^k(E_N)) / N`` for ``k = 0..k_max``."""
    table = fN.table
    alive = np.ones(fN.N, dtype=bool)
    out = np.empty(k_max + 1)
    out[0] = 1.0
    for k in range(1, k_max + 1):
        nxt = np.zeros(fN.N, dtype=bool)
        nxt[table[alive]] = True
        alive = nxt
        out[k] = alive.sum() / fN.N
    return out


def rate_of_injectivity(fN: DiscretizedMap, k: int) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return float(rate_of_injectivity_series(fN, k)[k])


# -- preimage-count polynomials -------------------------------------------

def poly_product(A, B, m_max: int) -> np.ndarray:
    """Row-wise product of coefficient arrays, truncated to degree ``m_max``."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    size = 1 << int(np.ceil(np.log2(2 * (m_max + 1))))
    out = np.empty((A.shape[0], m_max + 1))
    for s in range(0, A.shape[0], _FFT_CHUNK):
        fa = np.fft.rfft(A[s:s + _FFT_CHUNK], size, axis=1)
        fb = np.fft.rfft(B[s:s + _FFT_CHUNK], size, axis=1)
        out[s:s + _FFT_CHUNK] = np.fft.irfft(fa * fb, size, axis=1)[:, :m_max + 1]
    # round-off of the transform can leave tiny negative coefficients
    np.clip(out, 0.0, None, out=out)
    return out


def combine_polys(P0, P1, w0, w1, m_max: int) -> np.ndarray:
    """Law of the surviving path count at a node from its two children.

    Each child subtree is attached through an edge kept with probability
    ``w0`` (resp. ``w1``); the counts of the kept subtrees add up.
    """
    P0 = np.atleast_2d(P0)
    P1 = np.atleast_2d(P1)
    w0 = np.reshape(w0, (-1, 1))
    w1 = np.reshape(w1, (-1, 1))
    out = w0 * (1.0 - w1) * P0 + w1 * (1.0 - w0) * P1
    out = out + w0 * w1 * poly_product(P0, P1, m_max)
    out[:, 0] += ((1.0 - w0) * (1.0 - w1))[:, 0]
    return out


def initial_poly_field(M: int, m_max: int = DEFAULT_MMAX) -> np.ndarray:
    """``P_0 = X`` at every node."""
    P = np.zeros((M, m_max + 1))
    P[:, 1] = 1.0
    return P


def preimage_poly_step(op: TransferOperator, P) -> np.ndarray:
    """One step of the polynomial recursion on the operator nodes.

    Written in branch form, which is algebraically the same as the
    ``Q = P - 1`` recursion ``Q' = (L Q)^2 / 2 + L(Q - Q^2 / (2 f'))``.
    Interpolating the children's coefficient rows (rather than products of
    them) keeps ``a_0`` exactly consistent with :func:`mean_density_step`.
    """
    P = np.asarray(P, dtype=float)
    if P.shape[0] != op.M:
        raise DimensionMismatch(f"field of {P.shape[0]} rows at resolution {op.M}")
    P0, P1 = op.at_preimages(P)
    return combine_polys(P0, P1, op.weights[:, 0], op.weights[:, 1], P.shape[1] - 1)


def preimage_poly_fields(op: TransferOperator, k: int, m_max: int = DEFAULT_MMAX):
    """Yield the fields ``P_0, ..., P_k``."""
    P = initial_poly_field(op.M, m_max)
    yield P
    for _ in range(k):
        P = preimage_poly_step(op, P)
        yield P


def q_recursion_pointwise(Q0, Q1, w0, w1, m_max: int) -> np.ndarray:
    """The ``Q = P - 1`` recursion evaluated with exact child values.

    ``L`` acts as ``w0 * Q(x0) + w1 * Q(x1)``; used to cross-check
    :func:`combine_polys`.
    """
    Q0 = np.atleast_2d(Q0)
    Q1 = np.atleast_2d(Q1)
    w0 = np.reshape(w0, (-1, 1))
    w1 = np.reshape(w1, (-1, 1))
    LQ = w0 * Q0 + w1 * Q1
    LQ2 = w0 * w0 * poly_product_signed(Q0, Q0, m_max) + w1 * w1 * poly_product_signed(Q1, Q1, m_max)
    return 0.5 * poly_product_signed(LQ, LQ, m_max) + LQ - 0.5 * LQ2


def poly_product_signed(A, B, m_max: int) -> np.ndarray:
    """Truncated product for coefficient rows of any sign (direct convolution)."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    out = np.zeros((A.shape[0], m_max + 1))
    for i in range(min(A.shape[1], m_max + 1)):
        n = min(B.shape[1], m_max + 1 - i)
        out[:, i:i + n] += A[:, i:i + 1] * B[:, :n]
    return out


# -- point processes --------------------------------------------------------

@dataclass
class ProcessSpec:
    """Weighted point process ``nu = (1/N) sum_i m_i delta_{p_i}``.

    Entry ``i`` contributes ``counts[i]`` independent atoms, each of
    multiplicity ``multiplicities[i]`` and drawn from ``components[i]``.
    """

    components: Sequence[Measure]
    multiplicities: Sequence[int]
    counts: Sequence[int] = field(default=None)

    def __post_init__(self):
        if self.counts is None:
            self.counts = [1] * len(self.components)
        if not (len(self.components) == len(self.multiplicities) == len(self.counts)):
            raise ValueError("components, multiplicities and counts differ in length")
        if any(m <= 0 for m in self.multiplicities) or any(c <= 0 for c in self.counts):
            raise ValueError("multiplicities and counts must be positive")

    @property
    def N(self) -> int:
        return int(sum(m * c for m, c in zip(self.multiplicities, self.counts)))


def expected_process_distance(spec: ProcessSpec, base: Measure) -> float:
    """Exact ``E[d_C(base, nu)^2]`` for the point process ``spec``.

    ``d_C(base, sum_i (m_i/N) comp_i)^2 + sum_i (m_i/N)^2 (1/12 - d_C(comp_i, Leb)^2)``
    """
    N = spec.N
    leb = lebesgue()
    terms = [(1.0, base)]
    second = 0.0
    for comp, m, c in zip(spec.components, spec.multiplicities, spec.counts):
        lam = m / N
        terms.append((-c * lam, comp))
        second += c * lam * lam * (1.0 / 12.0 - cramer_sq(comp, leb))
    return cramer_sq_terms(terms) + second


def sample_process(spec: ProcessSpec, rng: np.random.Generator) -> AtomicMeasure:
    """One realization of the point process."""
    N = spec.N
    pos, wts = [], []
    for comp, m, c in zip(spec.components, spec.multiplicities, spec.counts):
        pos.append(sample(comp, c, rng))
        wts.append(np.full(c, m / N))
    return AtomicMeasure(np.concatenate(pos), np.concatenate(wts))


def floor_counts(weights, p: int) -> np.ndarray:
    """Atom counts per multiplicity ``m = 1..K`` approximating mixture ``weights``.

    ``count_m = floor(p * weights[m-1] / m)``, so the mixture weights
    ``m * count_m / N`` tend to ``weights`` as ``p`` grows.
    """
    weights = np.asarray(weights, dtype=float)
    m = np.arange(1, weights.size + 1)
    return np.floor(p * weights / m).astype(np.int64)


# -- p(k) predictors ------------------------------------------------------

def density_cramer_sq_to_lebesgue(values) -> np.ndarray:
    """Squared Cramér distance to Lebesgue of unit-mass densities on ``M`` cells.

    ``values`` has shape ``(M, n)``; one distance per column.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    M = v.shape[0]
    h = 1.0 / M
    s = v - 1.0
    start = np.zeros_like(s)
    start[1:] = np.cumsum(s[:-1], axis=0) * h
    mean = np.sum(h * (start + 0.5 * s * h), axis=0)
    g = start - mean
    return np.maximum(np.sum(h * (g * g + g * s * h + s * s * h * h / 3.0), axis=0), 0.0)


def _pk_terms(P):
    masses = P[:, 1:].mean(axis=0)
    live = masses > 0
    dens = np.zeros_like(P[:, 1:])
    dens[:, live] = P[:, 1:][:, live] / masses[live]
    dist = np.zeros(masses.size)
    dist[live] = density_cramer_sq_to_lebesgue(dens[:, live])
    return masses, dist


def pk_from_field(P) -> float:
    """``sum_{i>=1} (int a_i)^2 (1/12 - d_C(a_i / int a_i, Leb)^2)``."""
    masses, dist = _pk_terms(P)
    return float(np.sum(masses ** 2 * (1.0 / 12.0 - dist)))


def pk_theorem_from_field(P, lebit: PiecewiseDensity, n_points: int) -> float:
    """Expected squared distance between ``lebit`` and the weighted point process.

    A fraction ``int a_m`` of the ``n_points`` grid points carries ``m``
    preimages, hence an atom of weight ``m / n_points`` drawn from the
    normalized ``a_m``.
    """
    masses, dist = _pk_terms(P)
    m = np.arange(1, masses.size + 1)
    second = np.sum(m * m * masses * (1.0 / 12.0 - dist)) / n_points
    mix = P[:, 1:] @ m
    first = cramer_sq(lebit, PiecewiseDensity.from_values(mix)) if mix.sum() > 0 else 0.0
    return float(first + second)


def pk_series(op: TransferOperator, k_max: int, m_max: int = DEFAULT_MMAX, n_points=None):
    """``p(k)`` for ``k = 0..k_max``.

    Returns a dict with ``"verbatim"`` and, when ``n_points`` is given,
    ``"theorem"`` arrays.
    """
    verbatim = np.empty(k_max + 1)
    theorem = np.empty(k_max + 1) if n_points else None
    lebit = PiecewiseDensity(np.ones(op.M))
    for k, P in enumerate(preimage_poly_fields(op, k_max, m_max)):
        verbatim[k] = pk_from_field(P)
        if n_points:
            theorem[k] = pk_theorem_from_field(P, lebit, n_points)
            lebit = op.rpf_apply(lebit)
    out = {"verbatim": verbatim}
    if n_points:
        out["theorem"] = theorem
    return out


def pk_verbatim(op: TransferOperator, k: int, m_max: int = DEFAULT_MMAX) -> float:
    return float(pk_series(op, k, m_max)["verbatim"][k])


def pk_prediction(op: TransferOperator, k: int, m_max: int = DEFAULT_MMAX) -> float:
    return pk_verbatim(op, k, m_max)


def pk_theorem(op: TransferOperator, k: int, n_points: int, m_max: int = DEFAULT_MMAX) -> float:
    return float(pk_series(op, k, m_max, n_points)["theorem"][k])
