"""Geometry on the unit sphere S^2 in R^3.

Point collections are stored as ``(n, 3)`` float64 arrays of unit rows; the
scalar :class:`UnitVector` is there for single points and readable examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.random import Generator, Philox

NORM_TOL = 1e-12
ORTHO_TOL = 1e-12

AngularDistance = float
ChordalDistance = float


@dataclass(frozen=True)
class UnitVector:
    """A point on S^2, normalized at construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite coordinates {tuple(v)}")
        n = math.sqrt(float(v @ v))
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        if abs(n - 1.0) > NORM_TOL:
            v = v / n
            object.__setattr__(self, "x", float(v[0]))
            object.__setattr__(self, "y", float(v[1]))
            object.__setattr__(self, "z", float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __iter__(self):
        return iter((self.x, self.y, self.z))


PointsLike = Union[np.ndarray, Sequence[UnitVector], Sequence[Sequence[float]]]


def as_points(points: PointsLike) -> np.ndarray:
    """Return a C-contiguous ``(n, 3)`` array of unit rows.

    Rows whose norm is off by more than ``NORM_TOL`` are renormalized.
    """
    if isinstance(points, np.ndarray):
        P = np.array(points, dtype=float, order="C", copy=True)
    else:
        P = np.array([tuple(p) for p in points], dtype=float)
    if P.ndim == 1 and P.shape[0] == 3:
        P = P[None, :]
    if P.ndim != 2 or P.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("non-finite coordinates")
    norms = np.sqrt(np.einsum("ij,ij->i", P, P))
    if np.any(norms == 0.0):
        raise ValueError("zero vector in point set")
    off = np.abs(norms - 1.0) > NORM_TOL
    if np.any(off):
        P[off] /= norms[off, None]
    return np.ascontiguousarray(P)


def _vec(a) -> np.ndarray:
    if isinstance(a, UnitVector):
        return a.as_array()
    return np.asarray(a, dtype=float)


def angular_distance(a, b) -> AngularDistance:
    """Great-circle distance in radians, via atan2(|a x b|, a . b)."""
    u = _vec(a)
    v = _vec(b)
    # same operation order as the compiled kernels
    cx = u[1] * v[2] - u[2] * v[1]
    cy = u[2] * v[0] - u[0] * v[2]
    cz = u[0] * v[1] - u[1] * v[0]
    d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), d)


def chordal_distance(a, b) -> ChordalDistance:
    u = _vec(a)
    v = _vec(b)
    dx, dy, dz = u[0] - v[0], u[1] - v[1], u[2] - v[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def angular_distances(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise angular distances between two ``(n, 3)`` arrays."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    c = np.cross(P, Q)
    d = np.einsum("...i,...i->...", P, Q)
    return np.arctan2(np.sqrt(np.einsum("...i,...i->...", c, c)), d)


def to_spherical(P: np.ndarray):
    """Colatitude in [0, pi] and longitude in [0, 2 pi) of unit rows."""
    P = np.asarray(P, dtype=float)
    colat = np.arctan2(np.hypot(P[..., 0], P[..., 1]), P[..., 2])
    lon = np.mod(np.arctan2(P[..., 1], P[..., 0]), 2 * np.pi)
    # mod can round a tiny negative angle up to exactly 2 pi
    lon = np.where(lon >= 2 * np.pi, 0.0, lon)
    return colat, lon


def from_spherical(colat, lon) -> np.ndarray:
    colat = np.asarray(colat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    s = np.sin(colat)
    return np.stack([s * np.cos(lon), s * np.sin(lon), np.cos(colat)], axis=-1)


@dataclass(frozen=True)
class Rotation:
    """A proper rotation of R^3 stored as a 3x3 matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        R = np.array(self.matrix, dtype=float)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHO_TOL:
            raise ValueError("matrix is not orthogonal within 1e-12")
        if abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
            raise ValueError("matrix has determinant != +1")
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.eye(3))

    @classmethod
    def about_axis(cls, axis, angle: float) -> "Rotation":
        """Rodrigues rotation by ``angle`` radians about ``axis``."""
        k = np.asarray(axis, dtype=float)
        k = k / np.linalg.norm(k)
        K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
        return cls(_reorthonormalize(R))

    @classmethod
    def random(cls, seed: int) -> "Rotation":
        """Haar-random rotation from a seeded QR decomposition."""
        rng = Generator(Philox(key=seed))
        Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return cls(_reorthonormalize(Q))

    @classmethod
    def taking(cls, a, b) -> "Rotation":
        """A rotation mapping unit vector ``a`` to unit vector ``b``."""
        u = _vec(a)
        v = _vec(b)
        axis = np.cross(u, v)
        s = np.linalg.norm(axis)
        c = float(u @ v)
        if s < 1e-15:
            if c > 0:
                return cls.identity()
            # antipodal: any axis orthogonal to u
            e = np.eye(3)[int(np.argmin(np.abs(u)))]
            return cls.about_axis(np.cross(u, e), math.pi)
        return cls.about_axis(axis, math.atan2(s, c))


def _reorthonormalize(R: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] = -U[:, -1]
        Q = U @ Vt
    return Q


def apply_rotation(R: Rotation, points: PointsLike) -> np.ndarray:
    """Rotate every point and renormalize the rows."""
    P = as_points(points)
    out = P @ R.matrix.T
    out /= np.sqrt(np.einsum("ij,ij->i", out, out))[:, None]
    return np.ascontiguousarray(out)


def counter_uniforms(seed: int, start: int, count: int, width: int = 4) -> np.ndarray:
    """Uniform doubles for draws ``start .. start+count-1`` of a seeded stream.

    Draw ``k`` is the ``k``-th Philox counter block (``width`` <= 4 doubles
    used), so its value depends only on ``(seed, k)``.
    """
    if not 1 <= width <= 4:
        raise ValueError("width must be in 1..4")
    bg = Philox(key=seed)
    bg.advance(start)
    return Generator(bg).random((count, 4))[:, :width]


def gaussian_directions(u: np.ndarray) -> np.ndarray:
    """Map rows of four uniforms to unit vectors via Box-Muller normals."""
    r1 = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    r2 = np.sqrt(-2.0 * np.log1p(-u[:, 2]))
    g = np.stack(
        [
            r1 * np.cos(2 * np.pi * u[:, 1]),
            r1 * np.sin(2 * np.pi * u[:, 1]),
            r2 * np.cos(2 * np.pi * u[:, 3]),
        ],
        axis=1,
    )
    n = np.sqrt(np.einsum("ij,ij->i", g, g))
    return g / n[:, None]


def sample_uniform(seed: int, n: int, start: int = 0) -> np.ndarray:
    """``n`` points uniform on S^2 (normalized Gaussian method).

    Point ``i`` depends only on ``(seed, start + i)``, so any index range can
    be generated independently of the others.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return as_points(gaussian_directions(counter_uniforms(seed, start, n)))


def iter_vectors(points: np.ndarray) -> Iterable[UnitVector]:
    for row in np.asarray(points):
        yield UnitVector(*map(float, row))
