"""Uniform grids, grid signals and compact spectrum sets.

Every continuous integral in the toolkit is a Riemann sum on a
:class:`UniformGrid`.  Grids are centered on the origin and half-open:
axis points are ``k * spacing`` for integer ``k`` in ``[-n/2, n/2)``.  The
dual (frequency) grid has spacing ``1 / (n * spacing)`` and the two grids
form an exact DFT pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "UniformGrid",
    "GridSignal",
    "SpectrumSet",
    "make_grid",
    "spectrum_membership",
    "epsilon_enlarge",
]

Domain = Literal["time", "frequency"]


@dataclass(frozen=True)
class UniformGrid:
    """Centered uniform grid on ``R^d`` with ``n`` points per axis.

    Parameters
    ----------
    d : int
        Dimension.
    n : int
        Points per axis (even).
    spacing : tuple of float
        Step per axis.
    origin : tuple of float
        Offset added to every point.  Fourier transforms require a zero
        origin.
    """

    d: int
    n: int
    spacing: tuple[float, ...]
    origin: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"n must be even and >= 2, got {self.n}")
        spacing = tuple(float(s) for s in np.broadcast_to(self.spacing, (self.d,)))
        if any(not np.isfinite(s) or s <= 0 for s in spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        origin = self.origin if len(self.origin) else (0.0,) * self.d
        origin = tuple(float(o) for o in np.broadcast_to(origin, (self.d,)))
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def span(self) -> tuple[float, ...]:
        """Length ``n * spacing`` of each axis (one period of the torus model)."""
        return tuple(self.n * s for s in self.spacing)

    @property
    def centered(self) -> bool:
        return all(o == 0.0 for o in self.origin)

    def axis(self, i: int = 0) -> np.ndarray:
        k = np.arange(-self.n // 2, self.n // 2)
        return self.origin[i] + k * self.spacing[i]

    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.d)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid points as an ``(n**d, d)`` array in row-major order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    def dual(self) -> "UniformGrid":
        """Frequency grid paired with this one by the DFT."""
        return UniformGrid(self.d, self.n, tuple(1.0 / (self.n * s) for s in self.spacing))

    def index_of(self, x, atol: float = 1e-9) -> tuple[int, ...] | None:
        """Array index of the grid point ``x``, or ``None`` if ``x`` is off-grid."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = (x - np.asarray(self.origin)) / np.asarray(self.spacing)
        kr = np.round(k)
        if np.any(np.abs(k - kr) > atol) or np.any(kr < -self.n // 2) or np.any(kr >= self.n // 2):
            return None
        return tuple(int(v) + self.n // 2 for v in kr)


def make_grid(d: int, n: int, spacing: float | Sequence[float]) -> UniformGrid:
    """Centered grid with ``n`` points per axis at the given spacing.

    >>> make_grid(1, 8, 1.0).axis()
    array([-4., -3., -2., -1.,  0.,  1.,  2.,  3.])
    """
    if n % 2:
        raise ValueError(f"n must be even for symmetric coverage about 0, got {n}")
    if np.any(np.asarray(spacing, dtype=float) <= 0):
        raise ValueError(f"spacing must be positive, got {spacing}")
    return UniformGrid(d, n, tuple(np.broadcast_to(np.asarray(spacing, dtype=float), (d,))))


@dataclass
class GridSignal:
    """Complex samples on a :class:`UniformGrid`.

    ``domain`` records whether the samples live in time or frequency; it
    only affects serialization and which grid the DFT maps to.
    """

    grid: UniformGrid
    values: np.ndarray
    domain: Domain = "time"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        self.values = values
        if self.domain not in ("time", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @classmethod
    def from_function(cls, grid: UniformGrid, fn, domain: Domain = "time") -> "GridSignal":
        return cls(grid, fn(*grid.mesh()), domain)

    @classmethod
    def zeros(cls, grid: UniformGrid, domain: Domain = "time") -> "GridSignal":
        return cls(grid, np.zeros(grid.shape, dtype=complex), domain)

    def norm(self) -> float:
        """Quadrature L2 norm ``sqrt(cell_volume * sum |values|^2)``."""
        return float(np.sqrt(self.grid.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "GridSignal") -> complex:
        """Quadrature inner product, linear in ``self``."""
        return complex(self.grid.cell_volume * np.vdot(other.values, self.values))

    def copy(self, values=None) -> "GridSignal":
        return GridSignal(self.grid, self.values.copy() if values is None else values, self.domain)

    def __add__(self, other: "GridSignal") -> "GridSignal":
        return self.copy(self.values + other.values)

    def __sub__(self, other: "GridSignal") -> "GridSignal":
        return self.copy(self.values - other.values)

    def __mul__(self, alpha) -> "GridSignal":
        return self.copy(alpha * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectrumSet:
    """Compact, convex, 0-symmetric spectrum: a box or a ball, optionally
    enlarged by ``epsilon``.

    The set is ``{gamma : dist(gamma, base) <= epsilon}`` where ``base`` is
    the box ``prod [-h_i, h_i]`` or the closed ball of the given radius.
    """

    shape: Literal["box", "ball"]
    half_extent: tuple[float, ...] = ()
    radius: float = 0.0
    epsilon: float = 0.0
    dim: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.shape == "box":
            h = tuple(float(v) for v in np.atleast_1d(self.half_extent))
            if not h or any(v <= 0 for v in h):
                raise ValueError(f"box half-extents must be positive, got {self.half_extent}")
            object.__setattr__(self, "half_extent", h)
            object.__setattr__(self, "dim", len(h))
        elif self.shape == "ball":
            if self.radius <= 0:
                raise ValueError(f"ball radius must be positive, got {self.radius}")
            if self.dim < 1:
                raise ValueError("ball needs a positive dimension")
        else:
            raise ValueError(f"unknown spectrum shape {self.shape!r}")

    @classmethod
    def box(cls, half_extent, epsilon: float = 0.0) -> "SpectrumSet":
        return cls("box", half_extent=tuple(np.atleast_1d(half_extent)), epsilon=epsilon)

    @classmethod
    def ball(cls, radius: float, dim: int, epsilon: float = 0.0) -> "SpectrumSet":
        return cls("ball", radius=float(radius), dim=dim, epsilon=epsilon)

    @property
    def bounding_half_extent(self) -> np.ndarray:
        """Half-widths of the smallest box containing the set."""
        if self.shape == "box":
            return np.asarray(self.half_extent) + self.epsilon
        return np.full(self.dim, self.radius + self.epsilon)

    def distance(self, gamma) -> np.ndarray:
        """Euclidean distance from each point to the base set (``epsilon`` ignored).

        ``gamma`` is a single point of length ``dim`` or an ``(m, dim)`` array.
        """
        g = np.asarray(gamma, dtype=float)
        single = g.ndim <= 1
        g = g.reshape(1, -1) if single else g
        if g.ndim != 2 or g.shape[1] != self.dim:
            raise ValueError(f"point dimension {g.shape[-1]} does not match spectrum dimension {self.dim}")
        if self.shape == "box":
            excess = np.maximum(np.abs(g) - np.asarray(self.half_extent), 0.0)
            dist = np.sqrt(np.sum(excess**2, axis=1))
        else:
            dist = np.maximum(np.sqrt(np.sum(g**2, axis=1)) - self.radius, 0.0)
        return dist[0] if single else dist

    def contains(self, gamma, eps: float = 0.0, atol: float = 0.0) -> np.ndarray:
        return self.distance(gamma) <= self.epsilon + eps + atol

    def grid_mask(self, grid: UniformGrid) -> np.ndarray:
        """Boolean mask of the points of ``grid`` lying in the set.

        A relative tolerance of 1e-12 absorbs rounding of grid coordinates
        that sit exactly on the boundary.
        """
        if grid.d != self.dim:
            raise ValueError(f"grid dimension {grid.d} does not match spectrum dimension {self.dim}")
        scale = float(np.max(self.bounding_half_extent))
        inside = self.contains(grid.points(), atol=1e-12 * scale)
        return inside.reshape(grid.shape)

    def discretize(self, density: float) -> np.ndarray:
        """Points ``j / density`` (``j`` integer vector) lying in the set."""
        if density <= 0:
            raise ValueError(f"density must be positive, got {density}")
        h = self.bounding_half_extent
        axes = [np.arange(-np.floor(v * density + 1e-9), np.floor(v * density + 1e-9) + 1) / density for v in h]
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        scale = float(np.max(h))
        return pts[self.contains(pts, atol=1e-12 * scale)]


def spectrum_membership(spectrum: SpectrumSet, gamma, eps: float) -> bool:
    """True iff ``dist(gamma, spectrum) <= eps``."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if g.ndim != 1:
        raise ValueError("spectrum_membership takes a single point")
    return bool(spectrum.contains(g, eps))


def epsilon_enlarge(spectrum: SpectrumSet, eps: float) -> SpectrumSet:
    """The closed ``eps``-neighbourhood of ``spectrum``.

    Balls grow their radius and 1-d boxes their half-width; boxes in higher
    dimensions keep the rounded-corner neighbourhood through ``epsilon``.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if spectrum.shape == "ball":
        return SpectrumSet.ball(spectrum.radius + spectrum.epsilon + eps, spectrum.dim)
    if spectrum.dim == 1:
        return SpectrumSet.box(spectrum.half_extent[0] + spectrum.epsilon + eps)
    return SpectrumSet.box(spectrum.half_extent, epsilon=spectrum.epsilon + eps)
