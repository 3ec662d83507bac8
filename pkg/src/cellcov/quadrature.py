"""Globally adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergenceError

# Kronrod abscissae (positive half, descending) and weights; the Gauss-7 rule
# uses every odd-indexed node.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:7:2] = _WG[:3]
_GWEIGHTS[7] = _WG[3]
_GWEIGHTS[9:14:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error: float
    subdivisions: int


def gauss_kronrod(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    """One G7-K15 panel on [a, b]; returns (Kronrod value, |K15 - G7|)."""
    half = 0.5 * (b - a)
    fx = f(0.5 * (a + b) + half * _NODES)
    k = half * float(np.dot(_KWEIGHTS, fx))
    g = half * float(np.dot(_GWEIGHTS, fx))
    return k, abs(k - g)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    abs_tol: float = 1e-11,
    max_subdivisions: int = 500,
) -> QuadratureResult:
    """Integrate a vectorized ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    The panel with the largest error estimate is bisected until the summed
    estimate drops below ``abs_tol`` (floored at a few ulps of the result).
    Raises NonConvergenceError once ``max_subdivisions`` bisections are spent.
    """
    heap: list[tuple[float, float, float, float]] = []
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        if hi > lo:
            val, err = gauss_kronrod(f, lo, hi)
            heapq.heappush(heap, (-err, lo, hi, val))
    splits = 0
    while True:
        total = math.fsum(item[3] for item in heap)
        error = math.fsum(-item[0] for item in heap)
        if error <= max(abs_tol, 50.0 * np.finfo(float).eps * abs(total)):
            return QuadratureResult(total, error, splits)
        if splits >= max_subdivisions:
            raise NonConvergenceError(
                f"quadrature error estimate {error:.3g} above tolerance {abs_tol:.3g} "
                f"after {splits} subdivisions"
            )
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for a, b in ((lo, mid), (mid, hi)):
            val, err = gauss_kronrod(f, a, b)
            heapq.heappush(heap, (-err, a, b, val))
        splits += 1
