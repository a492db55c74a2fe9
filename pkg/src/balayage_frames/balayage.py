"""Least-squares balayage: sweep an atomic measure onto a sampling set.

Given ``mu``, find weights on the points of ``E`` whose Fourier transform
matches ``mu_hat`` on a discretization of ``Lambda``.  Exact equality on
``Lambda`` cannot be decided numerically; the relative L2 mismatch on the
discretized spectrum is reported instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import SpectrumSet
from .sampling_sets import SeparatedSet

__all__ = [
    "AtomicMeasure",
    "BalayageSolution",
    "BalayageConditionError",
    "CurvePoint",
    "measure_transform",
    "default_density",
    "balayage_solve",
    "balayage_residual_curve",
    "point_mass_residual",
]

# condition number above which an unregularized solve is refused
MAX_CONDITION = 1e12


class BalayageConditionError(ValueError):
    """Raised when an unregularized system is too ill-conditioned to solve."""

    def __init__(self, condition: float):
        super().__init__(f"least-squares system has condition {condition:.3e}; pass regularization > 0")
        self.condition = condition


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite sum of weighted point masses ``sum_k w_k delta_{x_k}``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=complex).ravel()
        if pts.shape[0] != w.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point_mass(cls, x, weight: complex = 1.0) -> "AtomicMeasure":
        return cls(np.atleast_1d(np.asarray(x, dtype=float))[None, :], [weight])

    @classmethod
    def zero(cls, dim: int = 1) -> "AtomicMeasure":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure(np.vstack([self.points, other.points]), np.concatenate([self.weights, other.weights]))

    def __mul__(self, alpha) -> "AtomicMeasure":
        return AtomicMeasure(self.points, alpha * self.weights)

    __rmul__ = __mul__


def measure_transform(mu: AtomicMeasure, gammas) -> np.ndarray:
    """``mu_hat(gamma_j) = sum_k w_k exp(-2 pi i x_k.gamma_j)``."""
    g = np.asarray(gammas, dtype=float).reshape(-1, mu.dimension)
    if not len(mu.weights):
        return np.zeros(g.shape[0], dtype=complex)
    return np.exp(-2j * np.pi * (g @ mu.points.T)) @ mu.weights


def default_density(E: SeparatedSet) -> float:
    """Eight spectrum points per dual-grid cell ``1/L`` with ``L = span + separation``."""
    lo, hi = E.bounding_box()
    sep = E.separation if np.isfinite(E.separation) else 1.0
    return 8.0 * float(np.max(hi - lo) + sep)


@dataclass
class BalayageSolution:
    """Swept measure ``nu`` on ``E`` and fit diagnostics."""

    measure: AtomicMeasure
    residual: float
    condition_estimate: float
    objective: float
    spectrum_points: np.ndarray = field(repr=False)


def balayage_solve(
    mu: AtomicMeasure,
    E: SeparatedSet,
    spectrum: SpectrumSet,
    grid_density: float | None = None,
    regularization: float | None = None,
) -> BalayageSolution:
    """Ridge least squares for ``nu`` on ``E`` with ``nu_hat ~ mu_hat`` on ``Lambda``.

    Minimizes ``h^d ||mu_hat - nu_hat||^2 + regularization ||w||^2`` over the
    spectrum points ``j / grid_density`` (spacing ``h``).  The default
    regularization is ``1e-10`` times the number of spectrum points.  The
    solve is a direct SVD, so the minimizer is exact to rounding and no
    iteration tolerance applies.

    Raises
    ------
    BalayageConditionError
        If ``regularization == 0`` and the system's condition number
        exceeds ``1e12``.
    """
    if not len(E):
        raise ValueError("sampling set is empty")
    if E.dimension != spectrum.dim or mu.dimension != spectrum.dim:
        raise ValueError("measure, set and spectrum dimensions differ")
    density = default_density(E) if grid_density is None else float(grid_density)
    gammas = spectrum.discretize(density)
    h = (1.0 / density) ** spectrum.dim
    target = measure_transform(mu, gammas)
    reg = 1e-10 * len(gammas) if regularization is None else float(regularization)
    if reg < 0:
        raise ValueError(f"regularization must be >= 0, got {reg}")

    A = np.sqrt(h) * np.exp(-2j * np.pi * (gammas @ E.points.T))
    b = np.sqrt(h) * target
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    rank_deficient = len(s) < len(E) or s[-1] == 0.0
    cond = np.inf if rank_deficient else float(s[0] / s[-1])
    if reg == 0.0 and cond > MAX_CONDITION:
        raise BalayageConditionError(cond)
    # Tikhonov filter factors s / (s^2 + reg)
    w = Vh.conj().T @ ((s / (s**2 + reg)) * (U.conj().T @ b))
    mismatch = b - A @ w
    num = float(np.linalg.norm(mismatch))
    den = float(np.linalg.norm(b))
    residual = num / den if den > 0 else 0.0
    objective = num**2 + reg * float(np.vdot(w, w).real)
    return BalayageSolution(AtomicMeasure(E.points, w), residual, cond, objective, gammas)


def point_mass_residual(
    E: SeparatedSet,
    spectrum: SpectrumSet,
    probes,
    grid_density: float | None = None,
    regularization: float | None = None,
) -> float:
    """Worst relative residual over the point masses ``delta_x``, ``x`` in ``probes``.

    Balayage must work for every bounded measure; point masses are the
    extreme ones, so this is the natural feasibility probe.
    """
    probes = np.asarray(probes, dtype=float).reshape(-1, spectrum.dim)
    return max(
        balayage_solve(AtomicMeasure.point_mass(x), E, spectrum, grid_density, regularization).residual
        for x in probes
    )


@dataclass(frozen=True)
class CurvePoint:
    set_size: int
    separation: float
    residual: float
    condition_estimate: float


def balayage_residual_curve(
    mu: AtomicMeasure,
    family: Sequence[SeparatedSet],
    spectrum: SpectrumSet,
    grid_density: float | None = None,
    regularization: float | None = None,
) -> list[CurvePoint]:
    """Residual of :func:`balayage_solve` along an increasing family of sets.

    The family must be ordered by inclusion.  One spectrum discretization
    (that of the largest set unless ``grid_density`` is given) is shared by
    the whole family so the residuals are comparable.
    """
    family = list(family)
    if not family:
        return []
    for small, big in zip(family, family[1:]):
        if not small.issubset(big):
            raise ValueError("family is not ordered by inclusion")
    density = default_density(family[-1]) if grid_density is None else grid_density
    out = []
    for E in family:
        sol = balayage_solve(mu, E, spectrum, density, regularization)
        out.append(CurvePoint(len(E), E.separation, sol.residual, sol.condition_estimate))
    return out
