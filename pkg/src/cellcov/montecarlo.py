"""Monte Carlo estimators over sampled network realizations.

Every trial draws its variates from its own generator keyed by
``(seed, stream_id, trial_index)``. Trials are processed in fixed-size
chunks and chunk results are concatenated in trial order, so estimates are
bit-identical for any number of worker processes.

The default outage estimator samples the typical mobile from the Palm
distribution (placed at the window center, other mobiles an independent
PPP). Interference from outside the torus square is replaced by its mean,
``density * int_{outside} r^-alpha dA``.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from statistics import NormalDist
from typing import IO, Callable, Literal, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import betainc, beta as beta_fn

from . import analytic
from .analytic import ModelParams
from .errors import CellCovError, InvalidParameterError
from .pointprocess import (
    NetworkRealization,
    PointPattern,
    RngStream,
    Window,
    associate,
    draw_trial,
    select_served,
    squared_distances,
    _uniform_points,
)

log = logging.getLogger(__name__)

OutageMode = Literal["silent-empty-cells", "all-transmit"]
EstimatorKind = Literal["one-typical-per-realization", "all-served-per-realization"]
TypicalKind = Literal["palm", "served"]

_MODES = ("silent-empty-cells", "all-transmit")
_ESTIMATORS = ("one-typical-per-realization", "all-served-per-realization")
_TYPICALS = ("palm", "served")


class InsufficientTrialsWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls.

    ``min_expected_bs`` enlarges the window (aspect kept) until it holds at
    least that many BSs on average; set it to 0 to use ``window`` verbatim.
    ``typical="served"`` picks the measured mobile uniformly among the
    served mobiles of an unconditioned realization instead of Palm sampling.
    """

    window: Window = field(default_factory=Window)
    trials: int = 10_000
    seed: int = 0
    ci_level: float = 0.95
    mode: OutageMode = "silent-empty-cells"
    estimator: EstimatorKind = "one-typical-per-realization"
    typical: TypicalKind = "palm"
    tail_correction: bool = True
    min_expected_bs: float = 100.0
    workers: int = 1
    chunk_size: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.ci_level < 1:
            raise InvalidParameterError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.mode not in _MODES:
            raise InvalidParameterError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.estimator not in _ESTIMATORS:
            raise InvalidParameterError(f"estimator must be one of {_ESTIMATORS}, got {self.estimator!r}")
        if self.typical not in _TYPICALS:
            raise InvalidParameterError(f"typical must be one of {_TYPICALS}, got {self.typical!r}")
        if self.workers < 1 or self.chunk_size < 1:
            raise InvalidParameterError("workers and chunk_size must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def window_for(self, lambda_b: float) -> Window:
        w = self.window
        if lambda_b <= 0 or lambda_b * w.area >= self.min_expected_bs:
            return w
        scale = math.sqrt(self.min_expected_bs / (lambda_b * w.area))
        return Window(w.width * scale, w.height * scale, w.torus)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    trials_used: int
    discards: int
    ci_low: float
    ci_high: float
    ci_level: float = 0.95

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def z_score(self, value: float) -> float:
        if self.std_error == 0:
            return 0.0 if value == self.mean else math.inf
        return (self.mean - value) / self.std_error


def _z(level: float) -> float:
    return NormalDist().inv_cdf(0.5 + level / 2)


def _warn_if_noisy(est: Estimate, what: str) -> None:
    if est.std_error > abs(est.mean) / 3:
        warnings.warn(
            f"{what}: std_error {est.std_error:.3g} exceeds a third of the mean {est.mean:.3g}; "
            "increase trials",
            InsufficientTrialsWarning,
            stacklevel=3,
        )


def proportion_estimate(successes: int, n: int, discards: int = 0, level: float = 0.95) -> Estimate:
    """Normal-approximation interval, Wilson interval when successes < 10."""
    p = successes / n
    se = math.sqrt(p * (1 - p) / n)
    z = _z(level)
    if successes < 10:
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    else:
        lo, hi = p - z * se, p + z * se
    return Estimate(p, se, n, discards, min(lo, p), max(hi, p), level)


def mean_estimate(values: np.ndarray, discards: int = 0, level: float = 0.95) -> Estimate:
    n = len(values)
    m = math.fsum(values) / n
    se = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    z = _z(level)
    return Estimate(m, se, n, discards, m - z * se, m + z * se, level)


def ratio_estimate(num: np.ndarray, den: np.ndarray, discards: int = 0, level: float = 0.95) -> Estimate:
    """``sum(num)/sum(den)`` with a linearized, per-realization standard error."""
    n = len(num)
    total = math.fsum(den)
    if total == 0:
        raise CellCovError("ratio estimate has zero total weight")
    r = math.fsum(num) / total
    resid = np.asarray(num, dtype=float) - r * np.asarray(den, dtype=float)
    se = math.sqrt(math.fsum(resid * resid) / (n * (n - 1))) / (total / n) if n > 1 else 0.0
    z = _z(level)
    return Estimate(r, se, n, discards, r - z * se, r + z * se, level)


def _cos_power_integral(phi: np.ndarray, m: float) -> np.ndarray:
    # int_0^phi cos(t)^m dt  for 0 <= phi <= pi/2
    s2 = np.sin(phi) ** 2
    return 0.5 * beta_fn(0.5, (m + 1) / 2) * betainc(0.5, (m + 1) / 2, s2)


def far_field_coefficient(window: Window, alpha: float, position=None) -> float:
    """``int r^-alpha dA`` over the plane outside the region the simulator sees.

    On a torus the visible region is the window-sized rectangle centered on
    the receiver; otherwise it is the window itself seen from ``position``.
    """
    if window.torus or position is None:
        dists = [window.width / 2] * 2 + [window.height / 2] * 2
        spans = [(window.height / 2, window.height / 2)] * 2 + [(window.width / 2, window.width / 2)] * 2
    else:
        x, y = position
        W, H = window.width, window.height
        dists = [x, W - x, y, H - y]
        spans = [(y, H - y), (y, H - y), (x, W - x), (x, W - x)]
    total = 0.0
    for h, (e1, e2) in zip(dists, spans):
        if h <= 0:
            return math.inf
        ang = _cos_power_integral(np.arctan(np.array([e1 / h, e2 / h])), alpha - 2)
        total += h ** (2 - alpha) / (alpha - 2) * float(ang.sum())
    return total


# ---------------------------------------------------------------- execution


def _run_chunks(fn: Callable[[int, int], dict], trials: int, sim: SimConfig) -> dict:
    bounds = [(s, min(s + sim.chunk_size, trials)) for s in range(0, trials, sim.chunk_size)]
    if sim.workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=sim.workers) as pool:
            parts = list(pool.map(fn, *zip(*bounds)))
    else:
        parts = [fn(a, b) for a, b in bounds]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _offsets(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([[0], np.cumsum([len(a) for a in arrays])])


def _stack(arrays: Sequence[np.ndarray], zsep: float) -> np.ndarray:
    counts = [len(a) for a in arrays]
    z = np.repeat(np.arange(len(arrays)) * zsep, counts)
    return np.column_stack([np.concatenate(arrays), z])


def _stacked_tree(arrays: Sequence[np.ndarray], window: Window) -> tuple[cKDTree, float]:
    """One KD-tree for many trials; trial ``i`` sits at height ``i * zsep``.

    ``zsep`` exceeds any in-window distance, so nearest neighbours never
    cross trials.
    """
    zsep = 2.0 * (window.width + window.height)
    box = [window.width, window.height, len(arrays) * zsep] if window.torus else None
    tree = cKDTree(_stack(arrays, zsep), boxsize=box, balanced_tree=False, compact_nodes=False)
    return tree, zsep


def _query_stacked(tree: cKDTree, zsep: float, arrays: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    return tree.query(_stack(arrays, zsep))


def _center_sq_distances(pts: np.ndarray, window: Window) -> np.ndarray:
    # per-axis on contiguous columns; same values as squared_distances
    dx = np.abs(pts[:, 0] - 0.5 * window.width)
    dy = np.abs(pts[:, 1] - 0.5 * window.height)
    if window.torus:
        dx = np.minimum(dx, window.width - dx)
        dy = np.minimum(dy, window.height - dy)
    return dx * dx + dy * dy


def _palm_outage_chunk(start, stop, *, lambda_b, lambda_u, theta, alpha, window, stream, tail):
    draws = [draw_trial(stream.generator(t), lambda_b, lambda_u, window, palm=True)
             for t in range(start, stop)]
    bs_off = _offsets([d.bs for d in draws])
    mob_off = _offsets([d.mobiles for d in draws])
    tree, zsep = _stacked_tree([d.bs for d in draws], window)
    _, assoc = _query_stacked(tree, zsep, [d.mobiles for d in draws])
    active = np.zeros(bs_off[-1], dtype=bool)
    active[assoc] = True
    serving = assoc[mob_off[:-1]]

    bs = np.concatenate([d.bs for d in draws])
    fading = np.concatenate([d.fading for d in draws])
    d2 = _center_sq_distances(bs, window)
    gain = fading * d2 ** (-alpha / 2)
    signal = gain[serving]
    others = gain.copy()
    others[serving] = 0.0
    starts = bs_off[:-1]
    i_all = np.add.reduceat(others, starts)
    i_act = np.add.reduceat(np.where(active, others, 0.0), starts)
    n_bs = np.diff(bs_off)
    n_act = np.add.reduceat(active.astype(np.int64), starts)
    i_all = i_all + tail * (n_bs - 1) / window.area
    i_act = i_act + tail * (n_act - 1) / window.area
    return {
        "silent": signal < theta * i_act,
        "alltx": signal < theta * i_all,
        "discards": np.array([d.discards for d in draws]),
    }


def _sir_outages(bs, fading_rows, receivers, serving, active_mask, theta, alpha, window, tail_fn):
    """Outage indicators (silent, all-transmit) for each receiver row."""
    d2 = squared_distances(receivers[:, None, :], bs[None, :, :], window)
    gain = fading_rows * d2 ** (-alpha / 2)
    rows = np.arange(len(receivers))
    signal = gain[rows, serving]
    gain[rows, serving] = 0.0
    i_all = gain.sum(axis=1)
    i_act = (gain * active_mask).sum(axis=1)
    tails = np.array([tail_fn(r) for r in receivers])
    i_all = i_all + tails * (len(bs) - 1) / window.area
    i_act = i_act + tails * (active_mask.sum() - 1) / window.area
    return signal < theta * i_act, signal < theta * i_all


def _scalar_outage_chunk(start, stop, *, lambda_b, lambda_u, theta, alpha, window, stream,
                         tail_on, typical, estimator):
    """Served-typical or all-served estimators, one realization at a time.

    Returns per-realization outage counts and receiver counts for each mode.
    """
    def tail_fn(pos):
        return far_field_coefficient(window, alpha, pos) if tail_on else 0.0

    out = {k: np.empty(stop - start) for k in ("silent", "alltx", "weight")}
    discards = np.empty(stop - start, dtype=np.int64)
    for i, t in enumerate(range(start, stop)):
        gen = stream.generator(t)
        palm = typical == "palm" and estimator == "one-typical-per-realization"
        d = draw_trial(gen, lambda_b, lambda_u, window, palm=palm)
        a = associate(PointPattern(d.mobiles, window), PointPattern(d.bs, window), window)
        served, typ = select_served(a, gen, typical=0 if palm else None)
        mask = np.zeros(len(d.bs), dtype=bool)
        mask[a.active_bs] = True
        if estimator == "one-typical-per-realization":
            rx = np.array([typ])
            fading = d.fading[None, :]
        else:
            rx = np.array(sorted(served.values()))
            fading = gen.exponential(size=(len(rx), len(d.bs)))
        s, al = _sir_outages(d.bs, fading, d.mobiles[rx], a.assoc[rx], mask, theta, alpha,
                             window, tail_fn)
        out["silent"][i], out["alltx"][i], out["weight"][i] = s.sum(), al.sum(), len(rx)
        discards[i] = d.discards
    out["discards"] = discards
    return out


def _outage_pair(model: ModelParams, sim: SimConfig, stream_id: int = 0) -> tuple[Estimate, Estimate]:
    window = sim.window_for(model.lambda_b)
    stream = RngStream(sim.seed, stream_id)
    kw = dict(lambda_b=model.lambda_b, lambda_u=model.lambda_u, theta=model.theta,
              alpha=model.alpha, window=window, stream=stream)
    fast = sim.typical == "palm" and sim.estimator == "one-typical-per-realization"
    if fast:
        tail = far_field_coefficient(window, model.alpha) if sim.tail_correction else 0.0
        res = _run_chunks(partial(_palm_outage_chunk, tail=tail, **kw), sim.trials, sim)
        disc = int(res["discards"].sum())
        return (proportion_estimate(int(res["silent"].sum()), sim.trials, disc, sim.ci_level),
                proportion_estimate(int(res["alltx"].sum()), sim.trials, disc, sim.ci_level))
    res = _run_chunks(partial(_scalar_outage_chunk, tail_on=sim.tail_correction,
                              typical=sim.typical, estimator=sim.estimator, **kw), sim.trials, sim)
    disc = int(res["discards"].sum())
    if sim.estimator == "one-typical-per-realization":
        return (proportion_estimate(int(res["silent"].sum()), sim.trials, disc, sim.ci_level),
                proportion_estimate(int(res["alltx"].sum()), sim.trials, disc, sim.ci_level))
    return (ratio_estimate(res["silent"], res["weight"], disc, sim.ci_level),
            ratio_estimate(res["alltx"], res["weight"], disc, sim.ci_level))


def outage_indicators(model: ModelParams, sim: SimConfig, stream_id: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial outage indicators (silent, all-transmit) of the Palm estimator."""
    window = sim.window_for(model.lambda_b)
    tail = far_field_coefficient(window, model.alpha) if sim.tail_correction else 0.0
    res = _run_chunks(
        partial(_palm_outage_chunk, lambda_b=model.lambda_b, lambda_u=model.lambda_u,
                theta=model.theta, alpha=model.alpha, window=window,
                stream=RngStream(sim.seed, stream_id), tail=tail),
        sim.trials, sim)
    return res["silent"], res["alltx"]


def typical_outage(real: NetworkRealization, theta: float, alpha: float,
                   tail_correction: bool = True) -> tuple[bool, bool]:
    """Outage of the realization's typical mobile: (silent mode, all-transmit)."""
    w = real.window
    pos = real.mobiles.points[real.typical_mobile]
    tail = far_field_coefficient(w, alpha, pos) if tail_correction else 0.0
    s, a = _sir_outages(real.bs.points, real.fading[None, :], pos[None, :],
                        np.array([real.serving_bs]), real.active_mask, theta, alpha, w,
                        lambda _: tail)
    return bool(s[0]), bool(a[0])


def estimate_outage(model: ModelParams, sim: SimConfig, stream_id: int = 0) -> Estimate:
    """Outage probability of the typical active mobile, ``Pr(SIR < theta)``.

    The SIR is ``h0 r0^-alpha / sum_Y h_Y r_Y^-alpha`` over the other active
    BSs (silent mode) or all other BSs (all-transmit); the common transmit
    power cancels and is never used.
    """
    silent, alltx = _outage_pair(model, sim, stream_id)
    est = silent if sim.mode == "silent-empty-cells" else alltx
    _warn_if_noisy(est, "outage estimate")
    return est


# ---------------------------------------------------------------- other estimators


def _draw_bs_and_mobiles(gen, lambda_b, lambda_u, window):
    discards = 0
    while True:
        nb = int(gen.poisson(lambda_b * window.area))
        bs = _uniform_points(gen, nb, window)
        if nb > 0:
            break
        discards += 1
    nu = int(gen.poisson(lambda_u * window.area))
    return bs, _uniform_points(gen, nu, window), discards


def _empty_chunk(start, stop, *, lambda_b, lambda_u, window, stream):
    draws = [_draw_bs_and_mobiles(stream.generator(t), lambda_b, lambda_u, window)
             for t in range(start, stop)]
    n_bs = np.array([len(b) for b, _, _ in draws])
    n_active = np.zeros(len(draws), dtype=np.int64)
    with_mobiles = [i for i, (_, m, _) in enumerate(draws) if len(m)]
    if with_mobiles:
        bss = [draws[i][0] for i in with_mobiles]
        tree, zsep = _stacked_tree(bss, window)
        _, assoc = _query_stacked(tree, zsep, [draws[i][1] for i in with_mobiles])
        active = np.zeros(sum(len(b) for b in bss), dtype=bool)
        active[assoc] = True
        n_active[with_mobiles] = np.add.reduceat(active.astype(np.int64), _offsets(bss)[:-1])
    return {"empty": n_bs - n_active, "n_bs": n_bs,
            "discards": np.array([d for _, _, d in draws])}


def estimate_empty_cell_prob(lambda_b: float, lambda_u: float, sim: SimConfig, stream_id: int = 0) -> Estimate:
    """Fraction of BSs whose cell holds no mobile (pooled over realizations)."""
    if lambda_b <= 0 or lambda_u < 0:
        raise InvalidParameterError("need lambda_b > 0 and lambda_u >= 0")
    window = sim.window_for(lambda_b)
    res = _run_chunks(partial(_empty_chunk, lambda_b=lambda_b, lambda_u=lambda_u, window=window,
                              stream=RngStream(sim.seed, stream_id)), sim.trials, sim)
    est = ratio_estimate(res["empty"], res["n_bs"], int(res["discards"].sum()), sim.ci_level)
    _warn_if_noisy(est, "empty-cell estimate")
    return est


def _link_chunk(start, stop, *, lambda_b, window, stream):
    draws = [_draw_bs_and_mobiles(stream.generator(t), lambda_b, 0.0, window)
             for t in range(start, stop)]
    bss = [b for b, _, _ in draws]
    d2 = _center_sq_distances(np.concatenate(bss), window)
    return {"dist": np.sqrt(np.minimum.reduceat(d2, _offsets(bss)[:-1])),
            "discards": np.array([d for _, _, d in draws])}


def estimate_link_distance(lambda_b: float, sim: SimConfig, stream_id: int = 0) -> Estimate:
    """Mean distance from a typical mobile to its serving (nearest) BS."""
    if lambda_b <= 0:
        raise InvalidParameterError(f"lambda_b must be > 0, got {lambda_b}")
    window = sim.window_for(lambda_b)
    res = _run_chunks(partial(_link_chunk, lambda_b=lambda_b, window=window,
                              stream=RngStream(sim.seed, stream_id)), sim.trials, sim)
    est = mean_estimate(res["dist"], int(res["discards"].sum()), sim.ci_level)
    _warn_if_noisy(est, "link-distance estimate")
    return est


def _cable_chunk(start, stop, *, lambda_b, lambda_s, window, stream):
    lengths = np.zeros(stop - start)
    n_sc = np.zeros(stop - start, dtype=np.int64)
    discards = np.zeros(stop - start, dtype=np.int64)
    draws = []
    for i, t in enumerate(range(start, stop)):
        gen = stream.generator(t)
        while True:
            bs = _uniform_points(gen, int(gen.poisson(lambda_b * window.area)), window)
            sc = _uniform_points(gen, int(gen.poisson(lambda_s * window.area)), window)
            if len(sc):
                break
            discards[i] += 1
        draws.append((bs, sc))
        n_sc[i] = len(sc)
    tree, zsep = _stacked_tree([sc for _, sc in draws], window)
    dist, _ = _query_stacked(tree, zsep, [bs for bs, _ in draws])
    nb = np.array([len(bs) for bs, _ in draws])
    off = np.concatenate([[0], np.cumsum(nb)])
    for i in range(len(draws)):
        lengths[i] = math.fsum(dist[off[i]:off[i + 1]])
    return {"length": lengths, "n_sc": n_sc, "discards": discards}


@dataclass(frozen=True)
class CableEstimate:
    per_unit_area: Estimate   # expected lambda_b / (2 sqrt(lambda_s))
    per_sc_cell: Estimate     # expected lambda_b / (2 lambda_s^1.5)


def estimate_cable_length(lambda_b: float, lambda_s: float, sim: SimConfig, stream_id: int = 0) -> CableEstimate:
    """Total BS-to-nearest-switching-center cable length, two normalizations.

    ``per_unit_area`` divides by the window area; ``per_sc_cell`` divides
    by the number of switching centers.
    """
    if lambda_b < 0 or lambda_s <= 0:
        raise InvalidParameterError("need lambda_b >= 0 and lambda_s > 0")
    window = sim.window_for(lambda_s)
    res = _run_chunks(partial(_cable_chunk, lambda_b=lambda_b, lambda_s=lambda_s, window=window,
                              stream=RngStream(sim.seed, stream_id)), sim.trials, sim)
    disc = int(res["discards"].sum())
    per_area = mean_estimate(res["length"] / window.area, disc, sim.ci_level)
    per_sc = ratio_estimate(res["length"], res["n_sc"].astype(float), disc, sim.ci_level)
    return CableEstimate(per_area, per_sc)


# ---------------------------------------------------------------- sweep

SWEEP_HEADER = [
    "lambda_b", "mc_mean", "mc_stderr", "ci_low", "ci_high", "analytic_exact",
    "analytic_asymptotic", "alltransmit_mc", "alltransmit_stderr", "discards",
]


@dataclass(frozen=True)
class SweepRow:
    lambda_b: float
    mc: Estimate | None
    analytic_exact: float
    analytic_asymptotic: float
    alltransmit: Estimate | None
    error: str | None = None

    @property
    def discards(self) -> int:
        return self.mc.discards if self.mc else 0


def sweep_outage(model: ModelParams, lambda_b_grid: Sequence[float], sim: SimConfig) -> list[SweepRow]:
    """Outage versus BS density: MC (both modes) against the analytic curves.

    Row ``i`` uses random stream ``i``. A failing row is reported with NaN
    estimates and does not stop the sweep.
    """
    grid = [float(x) for x in lambda_b_grid]
    if not grid:
        raise InvalidParameterError("lambda_b grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("lambda_b grid must be strictly ascending")
    beta = analytic.beta_integral(model.theta, model.alpha)
    rows = []
    for i, lb in enumerate(grid):
        m = replace(model, lambda_b=lb)
        exact = analytic.outage_from_densities(lb, m.lambda_u, beta)
        asym = analytic.outage_asymptotic(lb, m.lambda_u, beta)
        try:
            silent, alltx = _outage_pair(m, sim, stream_id=i)
            rows.append(SweepRow(lb, silent, exact, asym, alltx))
        except CellCovError as exc:
            log.warning("sweep row lambda_b=%g failed: %s", lb, exc)
            rows.append(SweepRow(lb, None, exact, asym, None, str(exc)))
    return rows


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_sweep_csv(rows: Sequence[SweepRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    nan = float("nan")
    for r in rows:
        mc, at = r.mc, r.alltransmit
        w.writerow([
            fmt(r.lambda_b),
            fmt(mc.mean if mc else nan), fmt(mc.std_error if mc else nan),
            fmt(mc.ci_low if mc else nan), fmt(mc.ci_high if mc else nan),
            fmt(r.analytic_exact), fmt(r.analytic_asymptotic),
            fmt(at.mean if at else nan), fmt(at.std_error if at else nan),
            r.discards,
        ])
