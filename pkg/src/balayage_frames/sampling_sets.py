"""Separated sampling sets in R^d and in phase space R^{2d}."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .lattice import UniformGrid

__all__ = [
    "SeparatedSet",
    "is_separated",
    "jittered_lattice",
    "phase_lattice",
    "phase_torus_grid",
    "covering_radius",
    "write_points_csv",
    "read_points_csv",
]


@dataclass(frozen=True, eq=False)
class SeparatedSet:
    """Finite point set with its measured separation.

    Phase-space sets for Gabor systems use ``dimension = 2d`` with time
    coordinates first and frequency coordinates last.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be an (N, d) array, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @cached_property
    def separation(self) -> float:
        """Minimum pairwise distance (``inf`` for fewer than two points)."""
        if len(self) < 2:
            return np.inf
        dist, _ = cKDTree(self.points).query(self.points, k=2)
        return float(dist[:, 1].min())

    @cached_property
    def symmetric(self) -> bool:
        """True iff the set equals its reflection ``-E`` exactly."""
        own = {tuple(p) for p in self.points}
        return all(tuple(-p + 0.0) in own for p in self.points)

    def __contains__(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.any(np.all(self.points == x, axis=1)))

    def issubset(self, other: "SeparatedSet", atol: float = 1e-12) -> bool:
        if self.dimension != other.dimension:
            return False
        if not len(self):
            return True
        if not len(other):
            return False
        dist, _ = cKDTree(other.points).query(self.points)
        return bool(np.all(dist <= atol))

    def union(self, other: "SeparatedSet") -> "SeparatedSet":
        return SeparatedSet(np.unique(np.vstack([self.points, other.points]), axis=0))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)


def is_separated(E: SeparatedSet, r: float) -> bool:
    """True iff every pair of distinct points is at least ``r`` apart."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if len(E) < 2:
        return True
    return bool(pdist(E.points).min() >= r)


def _lattice_indices(d: int, kmax: int) -> np.ndarray:
    k = np.arange(-kmax, kmax + 1)
    return np.stack([m.ravel() for m in np.meshgrid(*([k] * d), indexing="ij")], axis=1)


def jittered_lattice(
    d: int,
    spacing: float,
    jitter: float,
    extent: float,
    symmetric: bool = True,
    seed: int = 0,
) -> SeparatedSet:
    """Lattice points ``k * spacing`` with ``|k * spacing| <= extent``, each
    displaced by at most ``jitter`` per axis.

    Displacements are uniform on ``[-jitter, jitter]^d`` and depend only on
    ``seed``.  With ``symmetric=True`` the nonnegative half (in
    lexicographic order of ``k``) is jittered and mirrored, so ``E == -E``
    exactly and the origin stays fixed.  Any two points are at least
    ``spacing - 2 * jitter`` apart.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if not 0 <= jitter < spacing / 2:
        raise ValueError(f"jitter must satisfy 0 <= jitter < spacing/2, got {jitter} with spacing {spacing}")
    if extent <= 0:
        raise ValueError(f"extent must be positive, got {extent}")
    kmax = int(np.floor(extent / spacing + 1e-9))
    k = _lattice_indices(d, kmax)
    k = k[np.sqrt(np.sum((k * spacing) ** 2, axis=1)) <= extent * (1 + 1e-12)]
    rng = np.random.default_rng(seed)
    pts = k * spacing + jitter * rng.uniform(-1.0, 1.0, size=k.shape)
    if symmetric:
        row_of = {tuple(row): i for i, row in enumerate(k)}
        for i, row in enumerate(k):
            if tuple(row) < (0,) * d:
                pts[i] = -pts[row_of[tuple(-row)]]
        pts[np.all(k == 0, axis=1)] = 0.0
    return SeparatedSet(pts)


def phase_torus_grid(a: float, b: float, count_a: int, count_b: int) -> UniformGrid:
    """1-d grid whose phase-space torus holds ``count_a x count_b`` lattice
    cells of size ``a x b``: time period ``count_a * a`` and frequency
    period ``count_b * b``."""
    T, F = count_a * a, count_b * b
    n = T * F
    if abs(n - round(n)) > 1e-9 * n or round(n) % 2:
        raise ValueError(f"count_a * count_b * a * b = {n} must be an even integer")
    n = int(round(n))
    return UniformGrid(1, n, (T / n,))


def phase_lattice(
    grid: UniformGrid,
    a: float,
    b: float,
    jitter: float = 0.0,
    seed: int = 0,
) -> SeparatedSet:
    """Product lattice ``a Z^d x b Z^d`` covering one period of the
    phase-space torus of ``grid``, optionally jittered.

    The time period ``n * spacing`` must be a multiple of ``a`` and the
    frequency period ``1 / spacing`` a multiple of ``b``, so that the
    lattice is invariant under the wrap-around of the grid.
    """
    if a <= 0 or b <= 0:
        raise ValueError("lattice steps must be positive")
    if not 0 <= jitter < min(a, b) / 2:
        raise ValueError(f"jitter must satisfy 0 <= jitter < min(a, b)/2, got {jitter}")
    periods = list(grid.span) + [1.0 / s for s in grid.spacing]
    steps = [a] * grid.d + [b] * grid.d
    axes = []
    for period, step in zip(periods, steps):
        m = period / step
        if abs(m - round(m)) > 1e-9 * m:
            raise ValueError(f"step {step} does not divide the period {period}")
        m = int(round(m))
        axes.append(np.arange(-(m // 2), m - m // 2) * step)
    pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    if jitter:
        pts = pts + jitter * np.random.default_rng(seed).uniform(-1.0, 1.0, size=pts.shape)
    return SeparatedSet(pts)


def covering_radius(E: SeparatedSet, region: Sequence[tuple[float, float]], resolution: float | None = None) -> float:
    """Largest distance from a point of ``region`` to the nearest point of ``E``.

    The region (one ``(lo, hi)`` pair per axis) is probed on a grid that
    includes its corners, with step at most ``resolution`` (default: one
    eighth of the separation of ``E``, or 1/64 of the widest side for a
    single point).  The result is exact up to that resolution.
    """
    if not len(E):
        raise ValueError("covering radius of an empty set is undefined")
    region = np.asarray(region, dtype=float).reshape(-1, 2)
    if region.shape[0] != E.dimension:
        raise ValueError(f"region has {region.shape[0]} axes, set has dimension {E.dimension}")
    if resolution is None:
        sep = E.separation
        widest = float(np.max(region[:, 1] - region[:, 0]))
        resolution = sep / 8 if np.isfinite(sep) else widest / 64
    axes = []
    for lo, hi in region:
        m = max(int(np.ceil((hi - lo) / resolution - 1e-9)), 1) + 1
        axes.append(np.linspace(lo, hi, m))
    probes = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    dist, _ = cKDTree(E.points).query(probes)
    return float(dist.max())


def write_points_csv(path, E: SeparatedSet) -> None:
    """One point per row, one column per coordinate, round-trip precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(E.dimension)])
        for p in E.points:
            w.writerow([repr(float(v)) for v in p])


def read_points_csv(path) -> SeparatedSet:
    rows = list(csv.reader(Path(path).read_text().splitlines()))
    if not rows:
        raise ValueError(f"{path}: empty file")
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    return SeparatedSet(data.reshape(-1, len(rows[0])))
