"""The degree-2 expanding circle map family.

Maps have the form ``x -> 2x + c1 sin(2 pi x) + c2 sin(4 pi x) + shift (mod 1)``.
All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, NotExpanding

TWO_PI = 2.0 * np.pi

DEFAULT_C1 = 0.0531647
DEFAULT_C2 = 0.03932758
DEFAULT_SHIFT = 0.347


@dataclass(frozen=True)
class MapParams:
    """Parameters of one member of the family.

    Parameters
    ----------
    c1, c2 : float
        Amplitudes of the ``sin(2 pi x)`` and ``sin(4 pi x)`` terms.
    shift : float
        Additive constant.
    degree : int
        Topological degree; fixed to 2 for this family.
    """

    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    shift: float = DEFAULT_SHIFT
    degree: int = 2

    def __post_init__(self):
        if self.degree != 2:
            raise ValueError("only degree-2 maps are supported")

    @classmethod
    def default(cls) -> "MapParams":
        return cls()

    @classmethod
    def doubling(cls, shift: float = 0.0) -> "MapParams":
        return cls(0.0, 0.0, shift)

    @property
    def min_derivative_bound(self) -> float:
        """Lower bound ``2 - 2 pi |c1| - 4 pi |c2|`` on the derivative."""
        return 2.0 - TWO_PI * abs(self.c1) - 2.0 * TWO_PI * abs(self.c2)

    def validate(self) -> "MapParams":
        if not check_expanding(self):
            raise NotExpanding(f"{self} violates 2pi|c1| + 4pi|c2| < 1")
        return self

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "shift": self.shift}


def check_expanding(params: MapParams) -> bool:
    """Sufficient condition ``2 pi |c1| + 4 pi |c2| < 1``."""
    return bool(TWO_PI * abs(params.c1) + 2.0 * TWO_PI * abs(params.c2) < 1.0)


def _frac(x):
    return x - np.floor(x)


def lift(params: MapParams, x):
    """Lift to the real line, without reduction mod 1.

    On ``[0, 1]`` the lift increases from ``shift`` to ``shift + 2``.
    """
    x = np.asarray(x, dtype=float)
    a = _frac(x)
    return (2.0 * x + params.c1 * np.sin(TWO_PI * a)
            + params.c2 * np.sin(2.0 * TWO_PI * a) + params.shift)


def evaluate(params: MapParams, x):
    """Image of ``x`` on the circle, in ``[0, 1)``."""
    y = _frac(lift(params, _frac(np.asarray(x, dtype=float))))
    # frac can return 1.0 for tiny negative inputs
    return np.where(y >= 1.0, 0.0, y)


def derivative(params: MapParams, x):
    a = _frac(np.asarray(x, dtype=float))
    return (2.0 + TWO_PI * params.c1 * np.cos(TWO_PI * a)
            + 2.0 * TWO_PI * params.c2 * np.cos(2.0 * TWO_PI * a))


def iterate_derivative(params: MapParams, x, n: int):
    """Derivative of the ``n``-th iterate by the chain rule."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for _ in range(n):
        out = out * derivative(params, x)
        x = evaluate(params, x)
    return out


def iterate(params: MapParams, x, n: int):
    for _ in range(n):
        x = evaluate(params, x)
    return np.asarray(x, dtype=float)


def preimages(params: MapParams, y, tol: float = 1e-14, *,
              bisect_width: float = 1e-8, newton_steps: int = 5):
    """The two preimages of each ``y``, sorted ascending along the last axis.

    Each monotone branch of the lift over ``[0, 1]`` is inverted by
    bisection down to ``bisect_width`` followed by Newton refinement until
    the lifted residual is below ``tol``.

    Returns
    -------
    ndarray of shape ``np.shape(y) + (2,)``

    Raises
    ------
    NotExpanding
        If ``params`` violates the expanding condition.
    ConvergenceError
        If some branch still misses ``tol`` after ``newton_steps`` steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    params.validate()
    y = _frac(np.asarray(y, dtype=float))
    base = params.shift + _frac(y - params.shift)
    targets = np.stack([base, base + 1.0], axis=-1)

    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    while np.max(hi - lo) > bisect_width:
        mid = 0.5 * (lo + hi)
        below = lift(params, mid) <= targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)

    x = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        resid = lift(params, x) - targets
        if np.all(np.abs(resid) < tol):
            break
        x = np.clip(x - resid / derivative(params, x), lo, hi)
    resid = np.abs(lift(params, x) - targets)
    if not np.all(resid < tol):
        raise ConvergenceError(
            f"branch inversion residual {resid.max():.3e} above tol {tol:.1e}")
    # a root at the right end of [0, 1] is the point 0 of the circle
    x = np.where(x >= 1.0, 0.0, x)
    return np.sort(x, axis=-1)
