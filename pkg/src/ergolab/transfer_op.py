"""Collocation discretization of the transfer (Ruelle-Perron-Frobenius) operator.

The operator ``(L phi)(y) = sum_{f(x) = y} phi(x) / f'(x)`` is represented on
the ``M`` cell midpoints ``y_j = (j + 1/2)/M``. Values of ``phi`` at the
preimages are read by periodic linear interpolation between midpoints, so
one application is a sparse matrix-vector product with four non-zeros per
row.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse

from .expanding_map import MapParams, derivative, evaluate, iterate_derivative, preimages
from .exceptions import DimensionMismatch, NoConvergence
from .measure import PiecewiseDensity

DEFAULT_RESOLUTION = 2 ** 16
REFERENCE_RESOLUTION = 2 ** 18


def _interpolation_matrix(x, M):
    u = x * M - 0.5
    j0 = np.floor(u)
    t = u - j0
    j0 = j0.astype(np.int64) % M
    rows = np.repeat(np.arange(x.size), 2)
    cols = np.stack([j0, (j0 + 1) % M], axis=1).ravel()
    vals = np.stack([1.0 - t, t], axis=1).ravel()
    return sparse.csr_matrix((vals, (rows, cols)), shape=(x.size, M))


class TransferOperator:
    """Transfer operator of ``params`` at resolution ``M``.

    Attributes
    ----------
    nodes : ndarray (M,)
        Cell midpoints.
    preimages : ndarray (M, 2)
        Both preimages of every node, ascending.
    weights : ndarray (M, 2)
        ``1 / f'`` at the preimages.
    interp : tuple of two sparse (M, M) matrices
        Interpolation from node values to values at the first / second
        preimage of every node.
    """

    def __init__(self, params: MapParams, M: int = DEFAULT_RESOLUTION, tol: float = 1e-14):
        if M < 2:
            raise ValueError("resolution must be >= 2")
        self.params = params
        self.M = M
        self.nodes = (np.arange(M) + 0.5) / M
        self.preimages = preimages(params, self.nodes, tol)
        self.weights = 1.0 / derivative(params, self.preimages)
        self.interp = tuple(_interpolation_matrix(self.preimages[:, b], M) for b in range(2))
        w0, w1 = self.weights[:, 0], self.weights[:, 1]
        self.matrix = (sparse.diags(w0) @ self.interp[0] + sparse.diags(w1) @ self.interp[1]).tocsr()
        self.sum_matrix = (self.interp[0] + self.interp[1]).tocsr()

    def __repr__(self):
        return f"TransferOperator({self.params!r}, M={self.M})"

    def _check(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.M:
            raise DimensionMismatch(f"values of length {values.shape[0]} at resolution {self.M}")
        return values

    def at_preimages(self, values):
        """Node values interpolated at both preimages, shape ``(2,) + values.shape``."""
        values = self._check(values)
        return np.stack([self.interp[0] @ values, self.interp[1] @ values])

    def apply_raw(self, values):
        """Linear action on node values (no renormalization)."""
        return self.matrix @ self._check(values)

    def apply_sum(self, values):
        """Unweighted preimage sum ``y -> sum_{f(x) = y} phi(x)``."""
        return self.sum_matrix @ self._check(values)

    def rpf_apply(self, phi: PiecewiseDensity) -> PiecewiseDensity:
        """Push a density forward; the output is renormalized to mass 1.

        The mass before renormalization is kept in ``raw_mass``.
        """
        if phi.M != self.M:
            raise DimensionMismatch(f"density at resolution {phi.M}, operator at {self.M}")
        return PiecewiseDensity.from_values(self.apply_raw(phi.values))

    def srb_density(self, tol: float = 1e-12, max_iter: int = 2000, start=None) -> PiecewiseDensity:
        """Fixed point of :meth:`rpf_apply` by power iteration.

        Raises
        ------
        NoConvergence
            If the sup-norm change stays above ``tol`` after ``max_iter`` steps.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        phi = PiecewiseDensity(np.ones(self.M)) if start is None else start
        for _ in range(max_iter):
            nxt = self.rpf_apply(phi)
            if np.max(np.abs(nxt.values - phi.values)) < tol:
                return nxt
            phi = nxt
        raise NoConvergence(f"no fixed point within {max_iter} iterations at M={self.M}")

    def density_iterates(self, k_max: int) -> list[PiecewiseDensity]:
        """``[L^0 1, L^1 1, ..., L^k_max 1]``."""
        out = [PiecewiseDensity(np.ones(self.M))]
        for _ in range(k_max):
            out.append(self.rpf_apply(out[-1]))
        return out

    def derivative_pairing(self, n: int, g, method: str = "adjoint") -> float:
        """``<(f^n)', g>`` for node values ``g``.

        ``"adjoint"`` integrates the n-fold unweighted preimage sum of ``g``
        (change of variables along every inverse branch of ``f^n``), which
        stays smooth for any ``n``. ``"direct"`` is the midpoint rule applied
        to ``(f^n)' g``; it aliases once ``2^n`` approaches ``M``.
        """
        g = self._check(g)
        if method == "direct":
            return float(np.mean(iterate_derivative(self.params, self.nodes, n) * g))
        if method != "adjoint":
            raise ValueError(f"unknown method {method!r}")
        for _ in range(n):
            g = self.apply_sum(g)
        return float(np.mean(g))

    def mainteo_predictions(self, k_max: int) -> np.ndarray:
        """Predicted limits of ``N^2 d_C((f_N^k)_* Leb_N, f^k_* Leb)^2`` for ``k <= k_max``.

        ``1/12 + 1/12 sum_{m<k} <(f^(k-m))', (L^m 1)^2>``.
        """
        if k_max < 0:
            raise ValueError("k_max must be >= 0")
        # pair[m, n] = <(f^n)', (L^m 1)^2>
        pair = np.zeros((k_max + 1, k_max + 1))
        dens = np.ones(self.M)
        for m in range(k_max):
            g = dens * dens
            for n in range(1, k_max - m + 1):
                g = self.apply_sum(g)
                pair[m, n] = np.mean(g)
            dens = self.rpf_apply(PiecewiseDensity(dens)).values
        out = np.empty(k_max + 1)
        for k in range(k_max + 1):
            out[k] = (1.0 + sum(pair[m, k - m] for m in range(k))) / 12.0
        return out

    def mainteo_prediction(self, k: int) -> float:
        return float(self.mainteo_predictions(k)[k])


def rpf_apply(op: TransferOperator, phi: PiecewiseDensity) -> PiecewiseDensity:
    return op.rpf_apply(phi)


def srb_density(op: TransferOperator, tol: float = 1e-12, max_iter: int = 2000) -> PiecewiseDensity:
    return op.srb_density(tol, max_iter)


def density_iterates(op: TransferOperator, k_max: int) -> list[PiecewiseDensity]:
    return op.density_iterates(k_max)


def mainteo_prediction(op: TransferOperator, k: int) -> float:
    return op.mainteo_prediction(k)


def pushforward_density_check(op: TransferOperator, phi, psi) -> tuple[float, float]:
    """Both sides of ``int (L phi) psi = int phi (psi o f)`` by midpoint sums.

    ``phi`` and ``psi`` are callables on ``[0, 1)``.
    """
    x = op.nodes
    lhs = np.mean(op.apply_raw(phi(x)) * psi(x))
    rhs = np.mean(phi(x) * psi(evaluate(op.params, x)))
    return float(lhs), float(rhs)
