"""Poisson point patterns on a rectangular window and one network realization.

A realization holds base stations, mobiles and switching centers, the
nearest-BS association of every mobile, which BSs are active (non-empty
cell), the mobile each active BS serves in the slot, and Rayleigh fading
gains. With ``palm=True`` the measured (typical) mobile is placed at the
window center and the remaining mobiles form an independent PPP, which is
the Palm distribution of the mobile process.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Union

import numpy as np

from .errors import EmptyPatternError, InvalidParameterError, NoActiveBSError

_U64 = 2 ** 64


@dataclass(frozen=True)
class Window:
    width: float = 50.0
    height: float = 50.0
    torus: bool = True

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidParameterError(
                f"window sides must be > 0, got {self.width}x{self.height}"
            )

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> np.ndarray:
        return np.array([0.5 * self.width, 0.5 * self.height])

    @property
    def sides(self) -> np.ndarray:
        return np.array([self.width, self.height])


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible random stream.

    ``generator(*keys)`` derives an independent generator for any tuple of
    sub-keys (e.g. a trial index), so trials can run in any order.
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= v < _U64):
                raise InvalidParameterError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self, *keys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *keys))
        return np.random.Generator(np.random.PCG64(ss))


RngLike = Union[RngStream, np.random.Generator]


def _as_generator(rng: RngLike) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


@dataclass(frozen=True)
class PointPattern:
    points: np.ndarray
    window: Window

    def __len__(self) -> int:
        return len(self.points)


def _uniform_points(gen: np.random.Generator, n: int, window: Window) -> np.ndarray:
    pts = gen.random((n, 2)) * window.sides
    # random() < 1, but the product may round up onto the far edge
    return np.minimum(pts, np.nextafter(window.sides, 0))


def sample_ppp(density: float, window: Window, rng: RngLike) -> PointPattern:
    """Homogeneous PPP: Poisson count, then i.i.d. uniform locations."""
    if density < 0:
        raise InvalidParameterError(f"density must be >= 0, got {density}")
    gen = _as_generator(rng)
    n = int(gen.poisson(density * window.area))
    return PointPattern(_uniform_points(gen, n, window), window)


def displacement(a: np.ndarray, b: np.ndarray, window: Window) -> np.ndarray:
    """Per-axis absolute separation, wrapped to the nearest image on a torus."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if window.torus:
        d = np.minimum(d, window.sides - d)
    return d


def distance(a, b, window: Window) -> float:
    d = displacement(a, b, window)
    return float(np.hypot(d[..., 0], d[..., 1]))


def squared_distances(points: np.ndarray, origin: np.ndarray, window: Window) -> np.ndarray:
    d = displacement(points, origin, window)
    return d[..., 0] ** 2 + d[..., 1] ** 2


@dataclass(frozen=True)
class Association:
    assoc: np.ndarray        # mobile index -> BS index
    active_bs: np.ndarray    # sorted BS indices with at least one mobile


def associate(mobiles: PointPattern, bs: PointPattern, window: Window, chunk: int = 256) -> Association:
    """Nearest-BS association by brute force; ties go to the lowest BS index."""
    if len(bs) == 0:
        raise EmptyPatternError("cannot associate mobiles with an empty BS pattern")
    m = len(mobiles)
    assoc = np.empty(m, dtype=np.intp)
    for start in range(0, m, chunk):
        block = mobiles.points[start:start + chunk]
        d2 = squared_distances(block[:, None, :], bs.points[None, :, :], window)
        assoc[start:start + chunk] = np.argmin(d2, axis=1)
    return Association(assoc, np.unique(assoc))


def select_served(
    assoc: Association,
    rng: RngLike,
    typical: int | None = None,
) -> tuple[dict[int, int], int]:
    """Pick one mobile per active cell uniformly, then the typical one.

    If ``typical`` is given (Palm sampling) its cell serves it and it is the
    typical mobile; otherwise the typical mobile is uniform over served ones.
    """
    if len(assoc.active_bs) == 0:
        raise NoActiveBSError("no BS has an associated mobile")
    gen = _as_generator(rng)
    order = np.argsort(assoc.assoc, kind="stable")
    bounds = np.searchsorted(assoc.assoc[order], assoc.active_bs)
    sizes = np.diff(np.append(bounds, len(order)))
    picks = gen.integers(0, sizes)
    served = {int(b): int(order[s + k]) for b, s, k in zip(assoc.active_bs, bounds, picks)}
    if typical is not None:
        served[int(assoc.assoc[typical])] = int(typical)
        return served, int(typical)
    choice = int(gen.integers(len(assoc.active_bs)))
    return served, served[int(assoc.active_bs[choice])]


@dataclass(frozen=True)
class TrialDraw:
    """Raw variates of one trial, in the order they are drawn."""

    bs: np.ndarray
    mobiles: np.ndarray
    fading: np.ndarray
    discards: int


def draw_trial(
    gen: np.random.Generator,
    lambda_b: float,
    lambda_u: float,
    window: Window,
    palm: bool = True,
) -> TrialDraw:
    """Draw BSs, mobiles and fading, resampling degenerate realizations.

    A realization is rejected when it has no BS, or (without Palm sampling)
    no mobile. Both the scalar and the batched simulators call this, so they
    consume identical variates.
    """
    discards = 0
    while True:
        nb = int(gen.poisson(lambda_b * window.area))
        bs = _uniform_points(gen, nb, window)
        nu = int(gen.poisson(lambda_u * window.area))
        mobiles = _uniform_points(gen, nu, window)
        if nb > 0 and (palm or nu > 0):
            break
        discards += 1
    if palm:
        mobiles = np.vstack([window.center, mobiles])
    fading = gen.exponential(size=nb)
    return TrialDraw(bs, mobiles, fading, discards)


@dataclass(frozen=True)
class NetworkRealization:
    bs: PointPattern
    mobiles: PointPattern
    switching_centers: PointPattern
    assoc: np.ndarray
    active_bs: np.ndarray
    served_mobile: dict[int, int]
    typical_mobile: int
    fading: np.ndarray
    discards: int = 0
    palm: bool = True
    active_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mask = np.zeros(len(self.bs), dtype=bool)
        mask[self.active_bs] = True
        object.__setattr__(self, "active_mask", mask)

    @property
    def window(self) -> Window:
        return self.bs.window

    @property
    def serving_bs(self) -> int:
        return int(self.assoc[self.typical_mobile])


def sample_network(
    lambda_b: float,
    lambda_u: float,
    window: Window,
    rng: RngLike,
    lambda_s: float = 0.0,
    palm: bool = True,
) -> NetworkRealization:
    """Sample one complete network realization.

    Switching centers are drawn last so they never perturb the variates used
    for the radio part.
    """
    for name, v in (("lambda_b", lambda_b), ("lambda_u", lambda_u), ("lambda_s", lambda_s)):
        if v < 0:
            raise InvalidParameterError(f"{name} must be >= 0, got {v}")
    if lambda_b == 0:
        raise InvalidParameterError("lambda_b must be > 0 to sample a network")
    gen = _as_generator(rng)
    draw = draw_trial(gen, lambda_b, lambda_u, window, palm=palm)
    bs = PointPattern(draw.bs, window)
    mobiles = PointPattern(draw.mobiles, window)
    a = associate(mobiles, bs, window)
    served, typical = select_served(a, gen, typical=0 if palm else None)
    sc = sample_ppp(lambda_s, window, gen)
    return NetworkRealization(
        bs=bs,
        mobiles=mobiles,
        switching_centers=sc,
        assoc=a.assoc,
        active_bs=a.active_bs,
        served_mobile=served,
        typical_mobile=typical,
        fading=draw.fading,
        discards=draw.discards,
        palm=palm,
    )


def write_realization_csv(real: NetworkRealization, fh: IO[str]) -> None:
    """Dump a realization for plotting.

    Columns: kind (bs|mobile|sc), x, y, assoc_bs_index, active_flag,
    served_flag. BS rows carry their own index; SC rows carry -1.
    """
    served = set(real.served_mobile.values())
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["kind", "x", "y", "assoc_bs_index", "active_flag", "served_flag"])
    for i, (x, y) in enumerate(real.bs.points):
        w.writerow(["bs", f"{x:.17g}", f"{y:.17g}", i, int(real.active_mask[i]), 0])
    for j, (x, y) in enumerate(real.mobiles.points):
        w.writerow(["mobile", f"{x:.17g}", f"{y:.17g}", int(real.assoc[j]), 1, int(j in served)])
    for x, y in real.switching_centers.points:
        w.writerow(["sc", f"{x:.17g}", f"{y:.17g}", -1, 0, 0])
