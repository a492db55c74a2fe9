"""Fourier frames ``{e_{-x} : x in E}`` for ``L^2(Lambda)``.

The model space is spanned by the frequencies of a dual grid that lie in
``Lambda``.  Its grid spacing ``1/L`` fixes the period ``L`` of the torus
model; :func:`model_grid` picks ``L = span(E) + separation(E)`` per axis,
the smallest period keeping ``E`` separated across the wrap.  All operators
are small dense matrices acting on the coefficients inside ``Lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .fourier_core import sample_many
from .lattice import GridSignal, SpectrumSet, UniformGrid
from .sampling_sets import SeparatedSet
from .solvers import CGResult, FrameReport, conjugate_gradient, extremal_eigenvalues

__all__ = [
    "FrameReport",
    "FourierFrame",
    "Reconstruction",
    "model_grid",
    "analysis_map",
    "frame_operator_apply",
    "frame_bounds",
    "frame_reconstruct",
]


def model_grid(E: SeparatedSet, spectrum: SpectrumSet, period=None) -> UniformGrid:
    """Time grid whose dual resolves ``spectrum`` at frequency spacing ``1/period``.

    The default period is ``span(E) + separation(E)`` per axis (1 when
    ``E`` has a single point along an axis and no finite separation).
    """
    d = spectrum.dim
    if E.dimension != d:
        raise ValueError(f"set dimension {E.dimension} does not match spectrum dimension {d}")
    if period is None:
        lo, hi = E.bounding_box()
        sep = E.separation if np.isfinite(E.separation) else 1.0
        period = (hi - lo) + sep
    period = np.broadcast_to(np.asarray(period, dtype=float), (d,))
    h = spectrum.bounding_half_extent
    # n / (2 L) must exceed the half-extent strictly
    n = int(max(2, 2 * int(np.floor(np.max(period * h))) + 2))
    return UniformGrid(d, n, tuple(period / n))


class FourierFrame:
    """Analysis/synthesis pair for the exponentials of ``E`` on ``L^2(Lambda)``.

    Coefficient vectors are the values of ``F`` at the grid frequencies in
    ``Lambda`` (``mask`` of the dual grid).  The frame operator on those
    coefficients is ``dgamma^d * K^H K`` with ``K[x, j] = exp(2 pi i x.gamma_j)``.
    """

    def __init__(self, E: SeparatedSet, spectrum: SpectrumSet, grid: UniformGrid | None = None):
        self.E = E
        self.spectrum = spectrum
        self.grid = model_grid(E, spectrum) if grid is None else grid
        self.freq_grid = self.grid.dual()
        self.mask = spectrum.grid_mask(self.freq_grid)
        self.freqs = self.freq_grid.points()[self.mask.ravel()]
        self.weight = self.freq_grid.cell_volume
        self.kernel = np.exp(2j * np.pi * (E.points @ self.freqs.T))

    @property
    def dim(self) -> int:
        return self.freqs.shape[0]

    def coefficients(self, F: GridSignal) -> np.ndarray:
        return F.values[self.mask]

    def to_signal(self, coeffs: np.ndarray) -> GridSignal:
        values = np.zeros(self.freq_grid.shape, dtype=complex)
        values[self.mask] = coeffs
        return GridSignal(self.freq_grid, values, "frequency")

    def analysis(self, coeffs: np.ndarray) -> np.ndarray:
        return self.weight * (self.kernel @ coeffs)

    def synthesis(self, samples: np.ndarray) -> np.ndarray:
        return self.kernel.conj().T @ samples

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return self.synthesis(self.analysis(coeffs))

    def matrix(self) -> np.ndarray:
        return self.weight * (self.kernel.conj().T @ self.kernel)


def analysis_map(F: GridSignal, E: SeparatedSet, spectrum: SpectrumSet | None = None) -> np.ndarray:
    """Samples ``<F, e_{-x}> = f(x)`` for ``x`` in ``E``."""
    return sample_many(F, spectrum, E.points)


def frame_operator_apply(F: GridSignal, E: SeparatedSet, spectrum: SpectrumSet) -> GridSignal:
    """``S F = sum_x <F, e_{-x}> e_{-x}`` restricted to ``spectrum``, on the grid of ``F``."""
    frame = FourierFrame(E, spectrum, F.grid.dual())
    return frame.to_signal(frame.apply(frame.coefficients(F)))


def frame_bounds(
    E: SeparatedSet,
    spectrum: SpectrumSet,
    method: Literal["auto", "dense-eigen", "power-iteration"] = "auto",
    grid: UniformGrid | None = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> FrameReport:
    """Extremal eigenvalues of the discretized frame operator.

    ``auto`` uses a dense eigensolve up to 512 model dimensions and power
    iteration beyond.  A lower bound below ``1e-12 * B`` is reported as 0
    with infinite condition number.
    """
    frame = FourierFrame(E, spectrum, grid)
    if frame.dim < 1:
        raise ValueError("no grid frequency lies inside the spectrum")
    matrix = frame.matrix() if method != "power-iteration" else None
    return extremal_eigenvalues(frame.apply, frame.dim, matrix=matrix, method=method, tol=tol, seed=seed)


@dataclass
class Reconstruction:
    """Recovered transform ``F`` with solver diagnostics."""

    signal: GridSignal
    iterations: int
    residual: float
    converged: bool


def frame_reconstruct(
    samples,
    E: SeparatedSet,
    spectrum: SpectrumSet,
    method: Literal["frame-algorithm", "conjugate-gradient"] = "conjugate-gradient",
    tol: float = 1e-10,
    max_iter: int = 500,
    grid: UniformGrid | None = None,
    report: FrameReport | None = None,
) -> Reconstruction:
    """Recover ``F`` in ``L^2(Lambda)`` from samples ``f(x), x in E``.

    Both methods solve ``S F = T* s`` and stop when
    ``||S F - T* s|| <= tol ||T* s||``.  The frame algorithm iterates
    ``F += 2/(A+B) (T* s - S F)`` and needs a report with ``A > 0``.
    """
    frame = FourierFrame(E, spectrum, grid)
    samples = np.asarray(samples, dtype=complex).ravel()
    if samples.shape[0] != len(E):
        raise ValueError(f"got {samples.shape[0]} samples for {len(E)} points")
    rhs = frame.synthesis(samples)
    if method == "conjugate-gradient":
        res: CGResult = conjugate_gradient(frame.apply, rhs, tol=tol, max_iter=max_iter)
        return Reconstruction(frame.to_signal(res.x), res.iterations, res.residual, res.converged)
    if method != "frame-algorithm":
        raise ValueError(f"unknown reconstruction method {method!r}")
    if report is None:
        report = frame_bounds(E, spectrum, grid=frame.grid)
    if not report.is_frame:
        raise ValueError("frame algorithm needs a positive lower frame bound")
    relax = 2.0 / (report.lower + report.upper)
    bnorm = np.linalg.norm(rhs)
    x = np.zeros(frame.dim, dtype=complex)
    if bnorm == 0.0:
        return Reconstruction(frame.to_signal(x), 0, 0.0, True)
    best, best_res = x, 1.0
    for it in range(1, max_iter + 1):
        r = rhs - frame.apply(x)
        res = np.linalg.norm(r) / bnorm
        if res < best_res:
            best, best_res = x, res
        if res <= tol:
            return Reconstruction(frame.to_signal(x), it - 1, float(res), True)
        x = x + relax * r
    res = np.linalg.norm(rhs - frame.apply(x)) / bnorm
    if res < best_res:
        best, best_res = x, res
    return Reconstruction(frame.to_signal(best), max_iter, float(best_res), best_res <= tol)
