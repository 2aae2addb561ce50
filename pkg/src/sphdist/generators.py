"""Point-set families on S^2 and the curved-rectangle partition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import _kernels
from .sphere import (
    as_points,
    counter_uniforms,
    from_spherical,
    gaussian_directions,
    sample_uniform,
    to_spherical,
)

TWO_PI = 2.0 * math.pi

DEFAULT_STOP_FACTOR = 200
_BATCH = 1 << 15
_MAX_GRID_CELLS = 60_000_000


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered, duplicate-free set of at least two unit vectors."""

    points: np.ndarray
    family_label: str = "custom"
    seed: int = 0

    def __post_init__(self):
        P = as_points(self.points)
        if P.shape[0] < 2:
            raise ValueError(f"a point set needs N >= 2 points, got {P.shape[0]}")
        if np.unique(P, axis=0).shape[0] != P.shape[0]:
            raise ValueError("point set contains bitwise-identical points")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.N


def _point_array(A) -> np.ndarray:
    if isinstance(A, PointSet):
        return A.points
    return as_points(A)


def great_circle_equispaced(N: int) -> PointSet:
    """N points on the equator at longitudes 2 pi k / N."""
    if N < 2:
        raise ValueError("great_circle_equispaced needs N >= 2")
    lon = TWO_PI * np.arange(N) / N
    P = np.stack([np.cos(lon), np.sin(lon), np.zeros(N)], axis=1)
    return PointSet(P, "great_circle", 0)


def _dart_throw(candidates: Callable[[int, int], np.ndarray], sep, lo, hi, stop_factor) -> np.ndarray:
    h = 2.0 * math.sin(sep / 2.0) * (1.0 + 1e-9)
    origin = np.asarray(lo, dtype=float) - h
    dims = np.ceil((np.asarray(hi, dtype=float) + h - origin) / h).astype(np.int64) + 1
    ncell = int(np.prod(dims))
    if ncell > _MAX_GRID_CELLS:
        raise ValueError(f"separation {sep:g} needs {ncell} grid cells; too fine for this generator")
    head = np.full(ncell, -1, dtype=np.int64)
    cap = 1024
    pts = np.empty((cap, 3))
    nxt = np.empty(cap, dtype=np.int64)
    count = 0
    fails = 0
    drawn = 0
    while True:
        C = candidates(drawn, _BATCH)
        used, count, fails, done = _kernels.dart_throw(
            C, sep, origin, h, dims, head, nxt, pts, count, fails, stop_factor
        )
        drawn += used
        if done == 1:
            return pts[:count].copy()
        if done == 2:
            cap *= 2
            pts = np.concatenate([pts, np.empty_like(pts)])
            nxt = np.concatenate([nxt, np.empty_like(nxt)])


def maximal_separated_set(
    sep: float, seed: int, stop_factor: int = DEFAULT_STOP_FACTOR
) -> PointSet:
    """Dart-thrown ``sep``-separated subset of S^2.

    Candidates are uniform points consumed in counter order. Throwing stops
    after ``stop_factor * len(A)`` consecutive rejections, so maximality is
    only approximate.
    """
    if not 0 < sep <= math.pi / 4:
        raise ValueError("sep must lie in (0, pi/4]")

    def candidates(start, n):
        return gaussian_directions(counter_uniforms(seed, start, n))

    P = _dart_throw(candidates, sep, (-1, -1, -1), (1, 1, 1), stop_factor)
    return PointSet(P, "separated", seed)


def rectangle_bounds(N: int):
    """(colat0, colat1, lon0, lon1) of the equatorial rectangle of side 1/sqrt(N)."""
    s = 1.0 / math.sqrt(N)
    return math.pi / 2 - s / 2, math.pi / 2 + s / 2, -s / 2, s / 2


def concentrated_rectangle_set(
    N: int, seed: int, stop_factor: int = DEFAULT_STOP_FACTOR
) -> PointSet:
    """Dart-thrown 1/N-separated points inside a 1/sqrt(N) equatorial rectangle."""
    if N < 16:
        raise ValueError("concentrated_rectangle_set needs N >= 16")
    c0, c1, l0, l1 = rectangle_bounds(N)
    z_hi, z_lo = math.cos(c0), math.cos(c1)

    def candidates(start, n):
        u = counter_uniforms(seed, start, n, width=2)
        z = z_hi - u[:, 0] * (z_hi - z_lo)
        lon = l0 + u[:, 1] * (l1 - l0)
        r = np.sqrt(1.0 - z * z)
        return np.ascontiguousarray(np.stack([r * np.cos(lon), r * np.sin(lon), z], axis=1))

    s = math.sin(l1)
    lo = (math.cos(l1) * math.sin(c0) - 1e-9, -s, -s)
    hi = (1.0, s, s)
    P = _dart_throw(candidates, 1.0 / N, lo, hi, stop_factor)
    return PointSet(P, "concentrated", seed)


@dataclass(frozen=True)
class CurvedRectangle:
    """Cell bounded by two parallels and two meridians.

    Half-open membership uses ``[colat0, colat1) x [lon0, lon1)``; a cell
    whose upper colatitude is pi also contains the south pole.
    """

    colat0: float
    colat1: float
    lon0: float
    lon1: float

    def __post_init__(self):
        if not 0.0 <= self.colat0 < self.colat1 <= math.pi:
            raise ValueError(f"bad colatitude interval [{self.colat0}, {self.colat1}]")
        if not 0.0 <= self.lon0 < self.lon1 <= TWO_PI:
            raise ValueError(f"bad longitude interval [{self.lon0}, {self.lon1})")

    @property
    def full_longitude(self) -> bool:
        return self.lon0 == 0.0 and self.lon1 == TWO_PI

    def contains(self, colat, lon, closed: bool = False, tol: float = 1e-12):
        colat = np.asarray(colat, dtype=float)
        lon = np.asarray(lon, dtype=float)
        if closed:
            in_c = (colat >= self.colat0 - tol) & (colat <= self.colat1 + tol)
            if self.full_longitude:
                return in_c
            in_l = (lon >= self.lon0 - tol) & (lon <= self.lon1 + tol)
            # meridian 0 and 2 pi coincide
            if self.lon0 <= tol:
                in_l |= lon >= TWO_PI - tol
            if self.lon1 >= TWO_PI - tol:
                in_l |= lon <= tol
            # the poles lie on every meridian
            pole = (colat <= tol) | (colat >= math.pi - tol)
            return in_c & (in_l | pole)
        if self.colat1 == math.pi:
            in_c = (colat >= self.colat0) & (colat <= self.colat1)
        else:
            in_c = (colat >= self.colat0) & (colat < self.colat1)
        return in_c & (lon >= self.lon0) & (lon < self.lon1)

    def side_lengths(self):
        """Meridian side and the longest parallel arc, both in radians."""
        if self.colat0 <= math.pi / 2 <= self.colat1:
            smax = 1.0
        else:
            smax = max(math.sin(self.colat0), math.sin(self.colat1))
        return self.colat1 - self.colat0, (self.lon1 - self.lon0) * smax

    def corners(self) -> np.ndarray:
        c = [self.colat0, self.colat1]
        l = [self.lon0, self.lon1]
        return from_spherical(*np.meshgrid(c, l, indexing="ij")).reshape(-1, 3)

    def boundary_samples(self, per_edge: int = 33) -> np.ndarray:
        t = np.linspace(0.0, 1.0, per_edge)
        c = self.colat0 + t * (self.colat1 - self.colat0)
        l = self.lon0 + t * (self.lon1 - self.lon0)
        edges = [
            (c, np.full_like(c, self.lon0)),
            (c, np.full_like(c, self.lon1)),
            (np.full_like(l, self.colat0), l),
            (np.full_like(l, self.colat1), l),
        ]
        return np.concatenate([from_spherical(a, b) for a, b in edges])

    def angular_diameter(self, per_edge: int = 33) -> float:
        B = self.boundary_samples(per_edge)
        G = np.clip(B @ B.T, -1.0, 1.0)
        return float(np.arccos(G.min()))


@dataclass(frozen=True)
class SpherePartition:
    """Polar caps plus latitude bands cut into equal-longitude cells."""

    band_edges: np.ndarray
    band_cells: np.ndarray
    target_N: int
    cells: List[CurvedRectangle] = field(repr=False, default_factory=list)

    @property
    def side(self) -> float:
        return math.sqrt(4 * math.pi / self.target_N)

    def __len__(self):
        return len(self.cells)

    def cell_ids(self):
        """(band index, cell index within band) for every cell in order."""
        return [(b, k) for b, n in enumerate(self.band_cells) for k in range(int(n))]

    def locate(self, points) -> np.ndarray:
        """Index of the unique half-open cell containing each point."""
        colat, lon = to_spherical(as_points(points))
        nb = len(self.band_cells)
        band = np.searchsorted(self.band_edges, colat, side="right") - 1
        band = np.clip(band, 0, nb - 1)
        offsets = np.concatenate([[0], np.cumsum(self.band_cells)[:-1]])
        n = self.band_cells[band]
        k = np.minimum(np.floor(lon / (TWO_PI / n)).astype(np.int64), n - 1)
        return offsets[band] + k

    def multiplicity(self, points, closed: bool) -> np.ndarray:
        """Number of cells containing each point, by direct membership tests."""
        colat, lon = to_spherical(as_points(points))
        counts = np.zeros(colat.shape[0], dtype=np.int64)
        for cell in self.cells:
            counts += cell.contains(colat, lon, closed=closed)
        return counts


def sphere_partition(N: int) -> SpherePartition:
    """Partition S^2 into about N cells of side about sqrt(4 pi / N)."""
    if N < 8:
        raise ValueError("sphere_partition needs N >= 8")
    s = math.sqrt(4 * math.pi / N)
    nb = max(1, int(round((math.pi - s) / s)))
    w = (math.pi - s) / nb
    inner = s / 2 + w * np.arange(nb + 1)
    inner[-1] = math.pi - s / 2
    edges = np.concatenate([[0.0], inner, [math.pi]])
    counts = [1]
    for b in range(nb):
        mid = 0.5 * (edges[b + 1] + edges[b + 2])
        counts.append(max(1, math.ceil(TWO_PI * math.sin(mid) / s)))
    counts.append(1)
    cells = []
    for b, n in enumerate(counts):
        dl = TWO_PI / n
        for k in range(n):
            hi = TWO_PI if k == n - 1 else (k + 1) * dl
            cells.append(CurvedRectangle(float(edges[b]), float(edges[b + 1]), k * dl, hi))
    return SpherePartition(edges, np.array(counts, dtype=np.int64), N, cells)


def homogeneous_set(N: int, seed: int) -> PointSet:
    """One area-uniform random point in each cell of ``sphere_partition(N)``."""
    part = sphere_partition(N)
    u = counter_uniforms(seed, 0, len(part), width=2)
    c0 = np.array([c.colat0 for c in part.cells])
    c1 = np.array([c.colat1 for c in part.cells])
    l0 = np.array([c.lon0 for c in part.cells])
    l1 = np.array([c.lon1 for c in part.cells])
    z0, z1 = np.cos(c0), np.cos(c1)
    z = z0 - u[:, 0] * (z0 - z1)
    lon = l0 + u[:, 1] * (l1 - l0)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    P = np.stack([r * np.cos(lon), r * np.sin(lon), z], axis=1)
    return PointSet(P, "homogeneous", seed)


def separated_family(N: int, seed: int) -> PointSet:
    """Maximal (3/sqrt(N))-separated set; about N points once jammed."""
    return maximal_separated_set(3.0 / math.sqrt(N), seed)


def uniform_family(N: int, seed: int) -> PointSet:
    return PointSet(sample_uniform(seed, N), "uniform", seed)


FAMILIES: Dict[str, Callable[[int, int], PointSet]] = {
    "great_circle": lambda N, seed: great_circle_equispaced(N),
    "homogeneous": homogeneous_set,
    "concentrated": concentrated_rectangle_set,
    "separated": separated_family,
    "uniform": uniform_family,
}

FAMILY_MIN_SIZE: Dict[str, int] = {
    "great_circle": 2,
    "homogeneous": 8,
    "concentrated": 16,
    "separated": 16,
    "uniform": 2,
}


def generate(family: str, N: int, seed: int) -> PointSet:
    """Build a member of a named family, validating the label and size."""
    if family not in FAMILIES:
        raise KeyError(f"unknown family {family!r}; valid families: {', '.join(sorted(FAMILIES))}")
    if N < FAMILY_MIN_SIZE[family]:
        raise ValueError(f"family {family!r} needs N >= {FAMILY_MIN_SIZE[family]}, got {N}")
    return FAMILIES[family](N, seed)


def min_pairwise_angle(A) -> float:
    return float(_kernels.min_angle(_point_array(A)))
