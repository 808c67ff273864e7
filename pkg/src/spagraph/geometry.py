"""Torus geometry on the unit hypercube [0,1)^m.

Every coordinate wraps around, so the space is an m-dimensional flat torus.
Regions of influence are parameterized by *volume* rather than radius (the
generator grows and shrinks them by volume), and the volume-to-radius
conversion depends on the norm.  Only the two norms with a closed-form
inversion are supported: L2 (restricted to m=2) and Linf (any m).

All batch kernels accumulate per coordinate in a fixed order so that scalar
and vectorized call sites produce bit-identical floating point results; the
bit-exact generator equivalence tests rely on this.
"""

from __future__ import annotations

import enum
import math

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric input (bad volume, dimension mismatch, unsupported norm)."""


class NormKind(enum.Enum):
    """Norm inducing the torus metric."""

    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, text: str) -> "NormKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise GeometryError(f"unknown norm {text!r}; expected 'l2' or 'linf'") from None


class _CoversAll:
    """Singleton marker: the ball covers the whole torus (volume 1)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "COVERS_ALL"


COVERS_ALL = _CoversAll()


def _wrapped(delta: np.ndarray) -> np.ndarray:
    # Wrapped per-coordinate distance for inputs in (-1, 1): min(|d|, 1-|d|).
    d = np.abs(delta)
    return np.where(d > 0.5, 1.0 - d, d)


def _distances_unchecked(points: np.ndarray, q: np.ndarray, m: int, norm: NormKind) -> np.ndarray:
    # Fixed per-coordinate accumulation order; the only distance kernel.
    if norm is NormKind.L2:
        acc = None
        for i in range(m):
            d = _wrapped(points[:, i] - q[i])
            acc = d * d if acc is None else acc + d * d
        return np.sqrt(acc)
    acc = None
    for i in range(m):
        d = _wrapped(points[:, i] - q[i])
        acc = d if acc is None else np.maximum(acc, d)
    return acc


def torus_distances(points: np.ndarray, q: np.ndarray, norm: NormKind) -> np.ndarray:
    """Distances from each row of `points` (N, m) to the single point `q` (m,)."""
    points = np.asarray(points, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if points.ndim != 2 or q.ndim != 1 or points.shape[1] != q.shape[0]:
        raise GeometryError(
            f"dimension mismatch: points {points.shape} vs query {q.shape}"
        )
    m = q.shape[0]
    if m < 1:
        raise GeometryError("dimension must be >= 1")
    return _distances_unchecked(points, q, m, norm)


def torus_distance(a, b, norm: NormKind) -> float:
    """Wraparound distance between two points of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise GeometryError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(torus_distances(a[None, :], b, norm)[0])


def radius_from_volume(vol: float, m: int, norm: NormKind):
    """Radius of a ball of the given volume, or COVERS_ALL when vol == 1.

    L2 is invertible in closed form only for m=2 (r = sqrt(vol/pi)); Linf works
    for any m (r = vol^(1/m) / 2).
    """
    if not 0.0 < vol <= 1.0:
        raise GeometryError(f"volume must be in (0, 1], got {vol!r}")
    if vol == 1.0:
        return COVERS_ALL
    if norm is NormKind.L2:
        if m != 2:
            raise GeometryError("L2 volume inversion is only supported for m=2")
        return math.sqrt(vol / math.pi)
    if m == 1:
        return vol / 2.0
    if m == 2:
        return math.sqrt(vol) / 2.0
    return vol ** (1.0 / m) / 2.0


def ball_volume(radius: float, m: int, norm: NormKind) -> float:
    """Volume of a ball of the given radius (valid while the ball does not self-wrap)."""
    if radius < 0.0:
        raise GeometryError(f"radius must be >= 0, got {radius!r}")
    if norm is NormKind.L2:
        if m != 2:
            raise GeometryError("L2 ball volume is only supported for m=2")
        return math.pi * radius * radius
    return (2.0 * radius) ** m


def _radii(vols: np.ndarray, m: int, norm: NormKind) -> np.ndarray:
    # Vectorized radius_from_volume without the covers-all special case; the
    # caller ORs in (vols == 1).  Uses the same elementary operations as the
    # scalar path so results agree bitwise.
    if norm is NormKind.L2:
        if m != 2:
            raise GeometryError("L2 volume inversion is only supported for m=2")
        return np.sqrt(vols / math.pi)
    if m == 1:
        return vols / 2.0
    if m == 2:
        return np.sqrt(vols) / 2.0
    return np.power(vols, 1.0 / m) / 2.0


def contains_unchecked(points: np.ndarray, q: np.ndarray, vols: np.ndarray,
                       m: int, norm: NormKind) -> np.ndarray:
    """Containment kernel without input validation; see contains_batch.

    Generators call this directly on arrays they construct themselves; it must
    stay the single implementation so all call sites agree bit for bit.
    """
    dist = _distances_unchecked(points, q, m, norm)
    return (dist <= _radii(vols, m, norm)) | (vols == 1.0)


def contains_batch(points: np.ndarray, q: np.ndarray, vols: np.ndarray, norm: NormKind) -> np.ndarray:
    """Boolean mask: does the ball of volume vols[i] around points[i] contain q?

    The boundary is inclusive (distance equal to the radius counts as inside),
    and a volume of exactly 1 contains every point.
    """
    points = np.asarray(points, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    vols = np.asarray(vols, dtype=np.float64)
    if points.ndim != 2 or q.ndim != 1 or points.shape[1] != q.shape[0]:
        raise GeometryError(
            f"dimension mismatch: points {points.shape} vs query {q.shape}"
        )
    if np.any(vols <= 0.0) or np.any(vols > 1.0):
        raise GeometryError("volumes must be in (0, 1]")
    return contains_unchecked(points, q, vols, points.shape[1], norm)


def contains(center, q, vol: float, norm: NormKind) -> bool:
    """True iff q lies in the ball of the given volume around center."""
    center = np.asarray(center, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if center.ndim != 1 or center.shape != q.shape:
        raise GeometryError(f"dimension mismatch: {center.shape} vs {q.shape}")
    return bool(contains_batch(center[None, :], q, np.asarray([vol]), norm)[0])
