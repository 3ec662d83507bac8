"""Closed-form coverage and cost quantities for Poisson cellular networks.

Base stations, mobiles and switching centers are independent homogeneous
Poisson point processes. A BS whose Voronoi cell holds no mobile stays
silent, so only a fraction ``1 - p`` of the BSs interfere. All functions are
pure and work on plain floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import DivergentIntegralError, InvalidParameterError, ZeroDenominatorError
from .quadrature import QuadratureResult, integrate

Mode = Literal["exact", "asymptotic"]

# Shape parameter of the gamma fit to the Poisson-Voronoi cell area.
VORONOI_SHAPE = 3.5

# Below this BS-to-mobile density ratio the asymptotic formulas are advisory only.
ASYMPTOTIC_RATIO = 5.0


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameterError(msg)


@dataclass(frozen=True)
class ModelParams:
    """Network densities, link parameters and the BS power model.

    ``theta`` is linear (use :func:`db_to_linear` for dB); ``pa_A`` and
    ``pa_B`` are the slope and offset of the per-BS power ``A*mu + B``.
    """

    lambda_b: float = 0.2
    lambda_u: float = 0.02
    lambda_s: float = 1.0
    theta: float = 10 ** 0.3
    alpha: float = 3.0
    mu: float = 1.0
    pa_A: float = 1.0
    pa_B: float = 0.0

    def __post_init__(self):
        _require(self.lambda_b > 0, f"lambda_b must be > 0, got {self.lambda_b}")
        _require(self.lambda_u >= 0, f"lambda_u must be >= 0, got {self.lambda_u}")
        _require(self.lambda_s > 0, f"lambda_s must be > 0, got {self.lambda_s}")
        _require(self.theta > 0, f"theta must be > 0, got {self.theta}")
        if not self.alpha > 2:
            raise DivergentIntegralError(
                f"alpha must be > 2 (interference diverges for alpha <= 2), got {self.alpha}"
            )
        _require(self.mu > 0, f"mu must be > 0, got {self.mu}")
        _require(self.pa_A >= 0, f"pa_A must be >= 0, got {self.pa_A}")
        _require(self.pa_B >= 0, f"pa_B must be >= 0, got {self.pa_B}")


@dataclass(frozen=True)
class CostParams:
    """Cable cost per unit length, BS hardware cost, power price, outage penalty."""

    c1: float = 0.0
    c2: float = 1.0
    c3: float = 0.0
    phi: float = 1.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "phi"):
            value = getattr(self, name)
            _require(value >= 0, f"{name} must be >= 0, got {value}")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    max_subdivisions: int = 500
    tail_error_bound: float = 1e-12

    def __post_init__(self):
        _require(self.abs_tol > 0, "abs_tol must be > 0")
        _require(self.max_subdivisions >= 1, "max_subdivisions must be >= 1")
        _require(self.tail_error_bound > 0, "tail_error_bound must be > 0")


class Clamped(NamedTuple):
    value: float
    clamped: bool


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    _require(x > 0, f"linear value must be > 0, got {x}")
    return 10.0 * math.log10(x)


def in_asymptotic_regime(lambda_b: float, lambda_u: float) -> bool:
    """True when lambda_b/lambda_u is large enough to trust the asymptotes."""
    return lambda_u == 0 or lambda_b / lambda_u >= ASYMPTOTIC_RATIO


def voronoi_area_pdf(x, lambda_b: float):
    """Gamma(3.5) approximation to the density of a typical cell area.

    Accepts a scalar or an array of areas.
    """
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    x = np.asarray(x, dtype=float)
    _require(bool(np.all(x >= 0)), "area must be >= 0")
    k = VORONOI_SHAPE
    rate = k * lambda_b
    # evaluated in log space to keep the normalizing constant finite
    with np.errstate(divide="ignore"):
        logpdf = k * math.log(rate) - math.lgamma(k) + (k - 1) * np.log(x) - rate * x
    out = np.exp(logpdf)
    return float(out) if out.ndim == 0 else out


def empty_cell_probability(lambda_b: float, lambda_u: float) -> float:
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    _require(lambda_u >= 0, f"lambda_u must be >= 0, got {lambda_u}")
    return (1.0 + lambda_u / (VORONOI_SHAPE * lambda_b)) ** (-VORONOI_SHAPE)


def active_probability(lambda_b: float, lambda_u: float) -> float:
    """``1 - empty_cell_probability`` without cancellation at large ratios."""
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    _require(lambda_u >= 0, f"lambda_u must be >= 0, got {lambda_u}")
    return -math.expm1(-VORONOI_SHAPE * math.log1p(lambda_u / (VORONOI_SHAPE * lambda_b)))


def empty_cell_probability_asymptotic(lambda_b: float, lambda_u: float) -> Clamped:
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    _require(lambda_u >= 0, f"lambda_u must be >= 0, got {lambda_u}")
    p = 1.0 - lambda_u / lambda_b
    return Clamped(max(0.0, p), p < 0)


def _beta_tail(x: float, a: float) -> float:
    # two leading terms of  int_x^inf sum_k (-1)^k t^{-(k+1)a} dt
    return x ** (1 - a) / (a - 1) - x ** (1 - 2 * a) / (2 * a - 1)


def beta_integral_detailed(
    theta: float, alpha: float, quad: QuadratureSpec | None = None
) -> QuadratureResult:
    """Interference integral with its certified absolute error bound.

    The integrand ``1/(1 + x^(alpha/2))`` is integrated adaptively up to a
    cut ``X``; beyond it the alternating expansion in ``x^(-alpha/2)`` is
    summed to second order and the third term bounds the remainder.
    """
    _require(theta > 0, f"theta must be > 0, got {theta}")
    if not alpha > 2:
        raise DivergentIntegralError(f"beta diverges for alpha <= 2, got alpha={alpha}")
    quad = quad or QuadratureSpec()
    a = alpha / 2.0
    scale = theta ** (2.0 / alpha)
    lower = 1.0 / scale
    # remainder after two tail terms is at most X^(1-3a)/(3a-1)
    cut = (quad.tail_error_bound * (3 * a - 1)) ** (1.0 / (1 - 3 * a))
    cut = max(cut, 1.0)
    if lower >= cut:
        tail_err = lower ** (1 - 3 * a) / (3 * a - 1)
        return QuadratureResult(scale * _beta_tail(lower, a), scale * tail_err, 0)

    # geometric panels so a single bisection budget covers many decades
    n_panels = max(1, math.ceil(math.log2(cut / lower)))
    points = list(np.geomspace(lower, cut, n_panels + 1))
    body = integrate(
        lambda x: 1.0 / (1.0 + x ** a),
        points,
        abs_tol=quad.abs_tol / scale,
        max_subdivisions=quad.max_subdivisions,
    )
    tail_err = cut ** (1 - 3 * a) / (3 * a - 1)
    value = scale * (body.value + _beta_tail(cut, a))
    return QuadratureResult(value, scale * (body.abs_error + tail_err), body.subdivisions)


def beta_integral(theta: float, alpha: float, quad: QuadratureSpec | None = None) -> float:
    return beta_integral_detailed(theta, alpha, quad).value


def outage_exact(p: float, beta: float) -> float:
    _require(0 <= p <= 1, f"p must lie in [0, 1], got {p}")
    _require(beta >= 0, f"beta must be >= 0, got {beta}")
    x = (1.0 - p) * beta
    return x / (1.0 + x)


def outage_from_densities(lambda_b: float, lambda_u: float, beta: float) -> float:
    """Exact-form outage with ``1 - p`` evaluated stably."""
    _require(beta >= 0, f"beta must be >= 0, got {beta}")
    x = active_probability(lambda_b, lambda_u) * beta
    return x / (1.0 + x)


def outage_all_transmit(beta: float) -> float:
    """Outage when every BS transmits regardless of occupancy."""
    return outage_exact(0.0, beta)


def outage_asymptotic(lambda_b: float, lambda_u: float, beta: float) -> float:
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    _require(lambda_u >= 0, f"lambda_u must be >= 0, got {lambda_u}")
    _require(beta >= 0, f"beta must be >= 0, got {beta}")
    return beta * lambda_u / lambda_b


def nearest_distance_pdf(r, lambda_b: float):
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    r = np.asarray(r, dtype=float)
    _require(bool(np.all(r >= 0)), "distance must be >= 0")
    out = 2 * math.pi * lambda_b * r * np.exp(-math.pi * lambda_b * r * r)
    return float(out) if out.ndim == 0 else out


def cable_length_density(lambda_b: float, lambda_s: float) -> float:
    # NB: lambda_b / (2 sqrt(lambda_s)) is the per-unit-area reading; see montecarlo
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    _require(lambda_s > 0, f"lambda_s must be > 0, got {lambda_s}")
    return lambda_b / (2.0 * lambda_s ** 1.5)


def network_power(params: ModelParams, p: float, asymptotic: bool = False) -> float:
    _require(0 <= p <= 1, f"p must lie in [0, 1], got {p}")
    A, B, mu, lb = params.pa_A, params.pa_B, params.mu, params.lambda_b
    if asymptotic:
        return A * mu * params.lambda_u + B * lb
    return (A * mu + B) * (1.0 - p) * lb + B * p * lb


def per_bs_cost(costs: CostParams, lambda_s: float, pa_B: float) -> float:
    """Aggregate price of one extra BS: cable share, hardware and offset power."""
    return costs.c1 / (2.0 * lambda_s ** 1.5) + costs.c2 + costs.c3 * pa_B


def cost(
    lambda_b: float,
    model: ModelParams,
    costs: CostParams,
    mode: Mode = "exact",
    beta: float | None = None,
) -> float:
    """Network cost per unit area at BS density ``lambda_b``.

    ``model.lambda_b`` is ignored in favour of the argument. Pass ``beta`` to
    skip the quadrature when evaluating many densities.
    """
    _require(lambda_b > 0, f"lambda_b must be > 0, got {lambda_b}")
    if mode not in ("exact", "asymptotic"):
        raise InvalidParameterError(f"unknown cost mode {mode!r}")
    if beta is None:
        beta = beta_integral(model.theta, model.alpha)
    lu = model.lambda_u
    cable = cable_length_density(lambda_b, model.lambda_s)
    A, B, mu = model.pa_A, model.pa_B, model.mu
    if mode == "exact":
        q = active_probability(lambda_b, lu)
        power = (A * mu + B) * q * lambda_b + B * (1.0 - q) * lambda_b
        x = q * beta
        pout = x / (1.0 + x)
    else:
        power = A * mu * lu + B * lambda_b
        pout = outage_asymptotic(lambda_b, lu, beta)
    return costs.c1 * cable + costs.c2 * lambda_b + costs.c3 * power + costs.phi * pout


def k_ratio(costs: CostParams, lambda_s: float, pa_B: float) -> float:
    _require(lambda_s > 0, f"lambda_s must be > 0, got {lambda_s}")
    denom = per_bs_cost(costs, lambda_s, pa_B)
    if denom <= 0:
        raise ZeroDenominatorError("c1, c2 and c3*B all vanish; K is undefined")
    return costs.phi / denom


def optimal_density_closed_form(model: ModelParams, costs: CostParams, beta: float) -> float:
    _require(beta >= 0, f"beta must be >= 0, got {beta}")
    denom = per_bs_cost(costs, model.lambda_s, model.pa_B)
    if denom <= 0:
        raise ZeroDenominatorError("c1, c2 and c3*B all vanish; optimal density is undefined")
    return math.sqrt(costs.phi * beta * model.lambda_u / denom)
