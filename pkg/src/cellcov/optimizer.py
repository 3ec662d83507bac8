"""Numerical minimization of the network cost over the BS density."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Callable, Sequence

from . import analytic
from .analytic import CostParams, Mode, ModelParams
from .errors import BracketError, InvalidParameterError, NonUnimodalError

INV_PHI = (math.sqrt(5) - 1) / 2
MAX_EXPANSIONS = 4


@dataclass(frozen=True)
class OptimizeSpec:
    """Search bracket and stopping rule; unset bounds are derived per problem."""

    search_low: float | None = None
    search_high: float | None = None
    rel_tol: float = 1e-8
    max_iters: int = 500

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise InvalidParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        lo, hi = self.search_low, self.search_high
        if lo is not None and lo <= 0:
            raise InvalidParameterError(f"search_low must be > 0, got {lo}")
        if lo is not None and hi is not None and not lo < hi:
            raise InvalidParameterError(f"need search_low < search_high, got [{lo}, {hi}]")


@dataclass(frozen=True)
class CostMinimum:
    lambda_b: float
    cost: float
    at_lower_bound: bool
    expansions: int
    iterations: int


def golden_section(f: Callable[[float], float], a: float, b: float, rel_tol: float, max_iters: int):
    """Shrink [a, b] around a minimum of a unimodal ``f``.

    Returns ``(x, f(x), iterations)`` with x the best interior probe.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while it < max_iters and (b - a) > rel_tol * 0.5 * (abs(c) + abs(d)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    return (c, fc, it) if fc <= fd else (d, fd, it)


def default_bracket(model: ModelParams, costs: CostParams, beta: float) -> tuple[float, float]:
    lu = model.lambda_u if model.lambda_u > 0 else 1e-6
    try:
        guess = analytic.optimal_density_closed_form(model, costs, beta)
    except InvalidParameterError:
        guess = 0.0
    return lu / 10, max(10 * guess, lu)


def minimize_cost(
    model: ModelParams,
    costs: CostParams,
    mode: Mode = "exact",
    spec: OptimizeSpec | None = None,
    beta: float | None = None,
) -> CostMinimum:
    """Golden-section minimizer of :func:`analytic.cost` over lambda_b.

    The upper bound doubles (at most four times) while the minimizer sits on
    it. A minimizer on the lower bound is returned flagged, as happens when
    the cost is increasing (e.g. zero outage penalty).
    """
    spec = spec or OptimizeSpec()
    if beta is None:
        beta = analytic.beta_integral(model.theta, model.alpha)
    lo0, hi0 = default_bracket(model, costs, beta)
    lo = spec.search_low if spec.search_low is not None else lo0
    hi = spec.search_high if spec.search_high is not None else max(hi0, 2 * lo)
    if not 0 < lo < hi:
        raise BracketError(f"invalid bracket [{lo}, {hi}]")

    def f(x: float) -> float:
        v = analytic.cost(x, model, costs, mode, beta)
        if not math.isfinite(v):
            raise BracketError(f"cost is not finite at lambda_b={x}")
        return v

    for expansions in range(MAX_EXPANSIONS + 1):
        x, fx, it = golden_section(f, lo, hi, spec.rel_tol, spec.max_iters)
        edge = 4 * spec.rel_tol * x
        if x - lo <= edge and f(lo) <= fx:
            return CostMinimum(lo, f(lo), True, expansions, it)
        if hi - x > edge:
            return CostMinimum(x, fx, False, expansions, it)
        hi *= 2
    samples = [f(lo + (hi - lo) * k / 16) for k in range(17)]
    if all(b <= a for a, b in zip(samples, samples[1:])):
        raise NonUnimodalError(f"cost decreases monotonically across [{lo}, {hi}]")
    raise BracketError(f"minimizer not captured after {MAX_EXPANSIONS} doublings of the bracket")


@dataclass(frozen=True)
class GapReport:
    K: float
    closed_form: float
    numeric_exact: float
    numeric_asymptotic: float
    abs_gap: float
    rel_error: float


def normalized_costs(K: float) -> CostParams:
    """Costs with unit per-BS price (hardware only) and outage penalty K."""
    return CostParams(c1=0.0, c2=1.0, c3=0.0, phi=K)


def gap_study(
    K_grid: Sequence[float],
    model: ModelParams,
    beta: float,
    spec: OptimizeSpec | None = None,
) -> list[GapReport]:
    """Closed-form versus numerically optimal density for each cost ratio K."""
    ks = [float(k) for k in K_grid]
    if not ks or any(k <= 0 for k in ks):
        raise InvalidParameterError("K grid must be nonempty and positive")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise InvalidParameterError("K grid must be strictly ascending")
    spec = spec or OptimizeSpec()
    if spec.search_low is None or spec.search_high is None:
        lu = model.lambda_u if model.lambda_u > 0 else 1e-6
        spec = OptimizeSpec(
            search_low=spec.search_low if spec.search_low is not None else lu / 10,
            search_high=spec.search_high if spec.search_high is not None
            else 10 * math.sqrt(max(ks) * beta * lu),
            rel_tol=spec.rel_tol,
            max_iters=spec.max_iters,
        )
    return [gap_report(model, normalized_costs(K), beta, spec) for K in ks]


def gap_report(
    model: ModelParams, costs: CostParams, beta: float, spec: OptimizeSpec | None = None
) -> GapReport:
    """Compare the closed-form density with both numeric minimizers for one cost set."""
    K = analytic.k_ratio(costs, model.lambda_s, model.pa_B)
    closed = analytic.optimal_density_closed_form(model, costs, beta)
    exact = minimize_cost(model, costs, "exact", spec, beta).lambda_b
    asym = minimize_cost(model, costs, "asymptotic", spec, beta).lambda_b
    gap = abs(closed - exact)
    return GapReport(K, closed, exact, asym, gap, gap / exact)


GAP_HEADER = ["K", "closed_form", "numeric_exact", "numeric_asymptotic", "abs_gap", "rel_error"]


def write_gap_csv(reports: Sequence[GapReport], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GAP_HEADER)
    for r in reports:
        w.writerow([f"{getattr(r, k):.17g}" for k in GAP_HEADER])
