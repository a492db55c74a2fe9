"""Short-time Fourier transform, Gaussian reference window and Gabor systems.

Phase convention: ``V_g f(x, omega) = <f, M_omega T_x g>`` with
``(M_omega T_x g)(t) = exp(2 pi i t.omega) g(t - x)``.  On the periodic grid
the Moyal identity and the inversion formula hold exactly, so the
quadrature tests below are limited only by rounding.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.special import erfc

from .fourier_core import dft, pw_project
from .fourier_frames import Reconstruction
from .lattice import GridSignal, SpectrumSet, UniformGrid, make_grid
from .sampling_sets import SeparatedSet
from .solvers import FrameReport, conjugate_gradient, extremal_eigenvalues

__all__ = [
    "STFTField",
    "GaborSystem",
    "SupResult",
    "NormEstimate",
    "gaussian_window",
    "stft_forward",
    "stft_inverse",
    "semidiscrete_energy",
    "frequency_side_energy",
    "semidiscrete_bounds",
    "upper_constant_C",
    "phase_space_upper_constant",
    "feichtinger_norm",
    "phase_space_bandlimit",
    "phase_space_model_basis",
    "gabor_coefficients",
    "gabor_frame_apply",
    "gabor_frame_bounds",
    "gabor_reconstruct",
    "write_stft_csv",
]

TRUNCATION_TOL = 1e-10


def _gaussian_values(grid: UniformGrid) -> np.ndarray:
    r2 = sum(m**2 for m in grid.mesh())
    return 2 ** (grid.d / 4) * np.exp(-np.pi * r2)


def gaussian_window(grid: UniformGrid) -> GridSignal:
    """Reference window ``G0(t) = 2^{d/4} exp(-pi |t|^2)`` with unit L2 norm.

    Raises ``ValueError`` when the grid truncates or under-resolves the
    window by more than 1e-10 in squared norm.
    """
    half = min(grid.span) / 2
    # squared mass of G0 outside the cube [-half, half]^d
    outside = 1.0 - (1.0 - erfc(np.sqrt(2 * np.pi) * half)) ** grid.d
    if outside > TRUNCATION_TOL:
        raise ValueError(f"grid span {min(grid.span)} truncates the Gaussian window (lost mass {outside:.2e})")
    g = GridSignal(grid, _gaussian_values(grid))
    err = abs(g.norm() - 1.0)
    if err > TRUNCATION_TOL:
        raise ValueError(f"grid spacing {grid.spacing} under-resolves the Gaussian window (norm error {err:.2e})")
    return g


@dataclass
class STFTField:
    """STFT values ``values[k, j] = V_g f(x_k, omega_j)``.

    For full-grid transforms ``time_grid``/``freq_grid`` are set and the
    points enumerate them in row-major order.
    """

    x: np.ndarray
    omega: np.ndarray
    values: np.ndarray
    time_grid: UniformGrid | None = None
    freq_grid: UniformGrid | None = None

    @property
    def is_full(self) -> bool:
        return self.time_grid is not None

    def norm(self) -> float:
        """Quadrature L2 norm over phase space (full grids only)."""
        if not self.is_full:
            raise ValueError("norm needs a full-grid STFT")
        cell = self.time_grid.cell_volume * self.freq_grid.cell_volume
        return float(np.sqrt(cell * np.sum(np.abs(self.values) ** 2)))

    def as_signal(self) -> GridSignal:
        """The field as a signal on the ``2d``-dimensional phase-space grid."""
        if not self.is_full:
            raise ValueError("phase-space grid needs a full-grid STFT")
        g, h = self.time_grid, self.freq_grid
        grid = UniformGrid(2 * g.d, g.n, g.spacing + h.spacing)
        return GridSignal(grid, self.values.reshape(grid.shape))


def _check_window(g: GridSignal, action: str) -> float:
    nrm = g.norm()
    if abs(nrm - 1.0) > 1e-8:
        warnings.warn(f"window norm is {nrm:.6g}, not 1; {action}", stacklevel=3)
    return nrm


def _shifted_windows(g: GridSignal, xs: np.ndarray) -> np.ndarray:
    """Rows ``t -> g(t - x_k)``: exact rolls for on-grid ``x``, trigonometric
    interpolation otherwise."""
    grid = g.grid
    ax = tuple(range(1, grid.d + 1))
    steps = xs / np.asarray(grid.spacing)
    on_grid = np.all(np.abs(steps - np.round(steps)) <= 1e-9, axis=1)
    out = np.empty((xs.shape[0],) + grid.shape, dtype=complex)
    for k in np.flatnonzero(on_grid):
        out[k] = np.roll(g.values, tuple(int(s) for s in np.round(steps[k])), axis=tuple(range(grid.d)))
    off = np.flatnonzero(~on_grid)
    if off.size:
        fhat = np.fft.fftn(g.values)
        phase = np.ones((off.size,) + grid.shape, dtype=complex)
        for i in range(grid.d):
            freqs = np.fft.fftfreq(grid.n, d=grid.spacing[i])
            shape = [off.size] + [1] * grid.d
            shape[i + 1] = grid.n
            phase = phase * np.exp(-2j * np.pi * np.outer(xs[off, i], freqs)).reshape(shape)
        out[off] = np.fft.ifftn(fhat[None] * phase, axes=ax)
    return out


def _atoms(g: GridSignal, points: np.ndarray) -> np.ndarray:
    """Rows ``M_omega T_x g`` for phase points ``(x, omega)``, flattened."""
    d = g.grid.d
    shifted = _shifted_windows(g, points[:, :d]).reshape(points.shape[0], -1)
    t = g.grid.points()
    return shifted * np.exp(2j * np.pi * (points[:, d:] @ t.T))


def stft_forward(f: GridSignal, g: GridSignal, x_points=None, omega_points=None) -> STFTField:
    """Quadrature of ``int f(t) conj(g(t - x)) exp(-2 pi i t.omega) dt``.

    With no points given the transform is taken on the full time grid times
    its dual grid (windowed DFTs).  Otherwise every pair of the given
    points is evaluated by direct summation; off-grid ``x`` uses the
    trigonometric interpolant of ``g``.
    """
    if f.grid != g.grid:
        raise ValueError("signal and window must share a grid")
    _check_window(g, "STFT values scale with it")
    grid = f.grid
    full = x_points is None and omega_points is None
    xs = grid.points() if x_points is None else np.asarray(x_points, dtype=float).reshape(-1, grid.d)
    windows = _shifted_windows(g, xs)
    prod = f.values[None] * windows.conj()
    if full:
        ax = tuple(range(1, grid.d + 1))
        fhat = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(prod, axes=ax), axes=ax), axes=ax)
        dual = grid.dual()
        values = grid.cell_volume * fhat.reshape(xs.shape[0], -1)
        return STFTField(xs, dual.points(), values, grid, dual)
    oms = grid.dual().points() if omega_points is None else np.asarray(omega_points, dtype=float).reshape(-1, grid.d)
    kernel = np.exp(-2j * np.pi * (grid.points() @ oms.T))
    values = grid.cell_volume * (prod.reshape(xs.shape[0], -1) @ kernel)
    return STFTField(xs, oms, values)


def stft_inverse(V: STFTField, g: GridSignal) -> GridSignal:
    """``f = int int V(x, omega) M_omega T_x g domega dx`` on the full grids.

    A window without unit norm is accepted with a warning and the result
    divided by ``||g||^2``.
    """
    if not V.is_full:
        raise ValueError("stft_inverse needs an STFT on the full time and frequency grids")
    grid = V.time_grid
    if g.grid != grid:
        raise ValueError("window grid differs from the STFT time grid")
    nrm = _check_window(g, "rescaling the inverse")
    ax = tuple(range(1, grid.d + 1))
    vals = V.values.reshape((V.x.shape[0],) + grid.shape)
    # inner omega-integral: inverse DFT of each column of fixed x
    inner = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(vals, axes=ax), axes=ax), axes=ax)
    inner *= grid.size * V.freq_grid.cell_volume
    windows = _shifted_windows(g, V.x)
    out = grid.cell_volume * np.sum(inner * windows, axis=0)
    return GridSignal(grid, out / nrm**2)


def semidiscrete_energy(f: GridSignal, g: GridSignal, E: SeparatedSet) -> float:
    """``sum_{x in E} int |V_g f(x, omega)|^2 domega`` with the omega-integral
    taken over the dual grid."""
    if E.dimension != f.grid.d:
        raise ValueError("sampling set and signal dimensions differ")
    if not len(E):
        return 0.0
    V = stft_forward(f, g, x_points=E.points, omega_points=f.grid.dual().points())
    return float(f.grid.dual().cell_volume * np.sum(np.abs(V.values) ** 2))


def frequency_side_energy(f: GridSignal, g: GridSignal, E: SeparatedSet, sign: int = -1) -> float:
    """``sum_{x in E} int |V_G F(omega, sign * x)|^2 domega`` with ``F, G`` the
    transforms of ``f, g``.

    ``sign=-1`` is the form that equals :func:`semidiscrete_energy` for any
    ``E``; ``sign=+1`` agrees with it when ``E = -E``.  Computed on the
    frequency grid by circular cross-correlation, independently of the
    time-side code path.
    """
    F, G = dft(f), dft(g)
    grid = F.grid
    h = grid.cell_volume
    ax = tuple(range(grid.d))
    gam = grid.points()
    Gk = np.fft.fftn(np.fft.ifftshift(G.values))
    total = 0.0
    for x in E.points:
        a = F.values * np.exp(-2j * np.pi * (gam @ (sign * x))).reshape(grid.shape)
        corr = np.fft.ifftn(np.fft.fftn(np.fft.ifftshift(a), axes=ax) * Gk.conj(), axes=ax)
        total += h * np.sum(np.abs(h * corr) ** 2)
    return float(total)


def semidiscrete_bounds(
    g: GridSignal,
    E: SeparatedSet,
    spectrum: SpectrumSet,
    method: Literal["auto", "dense-eigen", "power-iteration"] = "auto",
) -> FrameReport:
    """Extremal values of ``semidiscrete_energy(f) / ||f||^2`` over the
    Paley-Wiener space of ``spectrum`` on the grid of ``g``.

    The energy equals ``int w |f|^2`` with ``w(t) = sum_x |g(t - x)|^2``, so
    the quadratic form is the compression of multiplication by ``w``.
    """
    grid = g.grid
    dual = grid.dual()
    mask = spectrum.grid_mask(dual).ravel()
    freqs = dual.points()[mask]
    w = np.sum(np.abs(_shifted_windows(g, E.points)) ** 2, axis=0).ravel()
    B = np.exp(2j * np.pi * (grid.points() @ freqs.T))
    M = grid.cell_volume * dual.cell_volume * (B.conj().T @ (w[:, None] * B))
    return extremal_eigenvalues(M.__matmul__, M.shape[0], matrix=M, method=method)


class SupResult(NamedTuple):
    value: float
    location: tuple


def _omega_integral_1d(shift: np.ndarray, step: float = 1 / 8, half_width: float = 8.0) -> np.ndarray:
    """``int exp(-pi (shift + omega)^2 / 2) domega`` by the Riemann sum on
    ``[-half_width, half_width)`` with the given step."""
    om = np.arange(-half_width, half_width, step)
    return step * np.exp(-np.pi * (shift[:, None] + om[None, :]) ** 2 / 2).sum(axis=1)


def upper_constant_C(E: SeparatedSet, probe_grid: UniformGrid | None = None) -> SupResult:
    """``sup_{y, gamma} sum_{x in E} int |V_G0 G0(gamma + omega, y + x)| domega``.

    Uses ``|V_G0 G0(a, b)| = exp(-pi (|a|^2 + |b|^2) / 2)``; the summand
    factors into a function of ``y`` and one of ``gamma``, so the sup is the
    product of the two maxima over the probe grid.  The default probe grid
    spans two separation cells around 0 at one eighth of the separation.
    """
    d = E.dimension
    if probe_grid is None:
        sep = E.separation if np.isfinite(E.separation) else 1.0
        probe_grid = make_grid(d, 16, sep / 8)
    probes = probe_grid.points()
    diff = probes[:, None, :] + E.points[None, :, :]
    ysum = np.exp(-np.pi * np.sum(diff**2, axis=2) / 2).sum(axis=1)
    iy = int(np.argmax(ysum))
    # integral over omega is a product over axes
    per_axis = [_omega_integral_1d(probe_grid.axis(i)) for i in range(d)]
    best_gamma = tuple(float(probe_grid.axis(i)[np.argmax(p)]) for i, p in enumerate(per_axis))
    omega_part = float(np.prod([p.max() for p in per_axis]))
    return SupResult(float(ysum[iy]) * omega_part, (tuple(probes[iy]), best_gamma))


def phase_space_upper_constant(points: SeparatedSet, period=None, probe_grid: UniformGrid | None = None) -> SupResult:
    """``sup_z sum_{e in E} |V_G0 G0(z + e)|`` over phase space.

    For the window ``G0`` this bounds the upper Gabor frame bound (Schur
    test on the Gram matrix).  ``period`` (one value per phase axis) wraps
    differences to the torus.  The sup is taken over the probe grid and the
    reflected points ``-e``.
    """
    E = points.points
    dim = E.shape[1]
    if probe_grid is None:
        sep = points.separation if np.isfinite(points.separation) else 1.0
        probe_grid = make_grid(dim, 8, sep / 8)
    z = np.vstack([probe_grid.points(), -E])
    diff = z[:, None, :] + E[None, :, :]
    if period is not None:
        per = np.broadcast_to(np.asarray(period, dtype=float), (dim,))
        diff = diff - per * np.round(diff / per)
    vals = np.exp(-np.pi * np.sum(diff**2, axis=2) / 2).sum(axis=1)
    i = int(np.argmax(vals))
    return SupResult(float(vals[i]), tuple(z[i]))


@dataclass
class NormEstimate:
    """Quadrature value with the change against the 2x coarser grid."""

    value: float
    refinement_delta: float
    converged: bool

    def __float__(self) -> float:
        return self.value


def _v_g0_l1(G: GridSignal) -> float:
    """``int int |V_G0 G|`` for ``G`` sampled on its own grid (treated as time)."""
    grid = G.grid
    w = GridSignal(grid, _gaussian_values(grid))
    V = stft_forward(GridSignal(grid, G.values), w)
    return float(V.time_grid.cell_volume * V.freq_grid.cell_volume * np.sum(np.abs(V.values)))


def feichtinger_norm(g: GridSignal) -> NormEstimate:
    """``|| V_G0 G ||_1`` with ``G`` the Fourier transform of ``g``.

    The quadrature is repeated with every other sample of ``g`` (same span,
    twice the spacing); a relative change above 1% marks the value as
    unconverged.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value = _v_g0_l1(dft(g))
        grid = g.grid
        delta = np.nan
        if (grid.n // 2) % 2 == 0:
            sl = (slice(None, None, 2),) * grid.d
            coarse = UniformGrid(grid.d, grid.n // 2, tuple(2 * s for s in grid.spacing))
            coarse_value = _v_g0_l1(dft(GridSignal(coarse, g.values[sl])))
            delta = abs(coarse_value - value) / value if value else abs(coarse_value)
    return NormEstimate(value, float(delta), bool(delta <= 0.01))


def phase_space_bandlimit(f: GridSignal, g: GridSignal, spectrum: SpectrumSet) -> GridSignal:
    """Project ``V_g f`` onto the phase-space Paley-Wiener space of
    ``spectrum`` (dimension ``2d``) and map back with the STFT inverse."""
    V = stft_forward(f, g)
    P = pw_project(V.as_signal(), spectrum)
    V.values = P.values.reshape(V.values.shape)
    return stft_inverse(V, g)


def phase_space_model_basis(g: GridSignal, spectrum: SpectrumSet, threshold: float = 1 - 1e-6) -> np.ndarray:
    """Orthonormal basis (columns, flattened grid coordinates) of the signals
    whose STFT keeps at least ``threshold`` of its energy inside ``spectrum``.

    These are the top eigenvectors of ``f -> phase_space_bandlimit(f)``, a
    self-adjoint operator with spectrum in ``[0, 1]``.
    """
    grid = g.grid
    cols = []
    for e in np.eye(grid.size, dtype=complex):
        cols.append(phase_space_bandlimit(GridSignal(grid, e.reshape(grid.shape)), g, spectrum).values.ravel())
    P = np.column_stack(cols)
    ev, vecs = np.linalg.eigh(0.5 * (P + P.conj().T))
    return vecs[:, ev >= threshold]


@dataclass
class GaborSystem:
    """Window ``g`` (unit norm) and phase-space points ``(s, t)`` in ``R^{2d}``.

    ``strict=False`` skips the unit-norm check, for scaling experiments.
    """

    window: GridSignal
    points: SeparatedSet
    strict: bool = True

    def __post_init__(self):
        if self.points.dimension != 2 * self.window.grid.d:
            raise ValueError(f"phase points must have dimension {2 * self.window.grid.d}")
        if self.strict and abs(self.window.norm() - 1.0) > 1e-8:
            raise ValueError(f"Gabor window must have unit norm, got {self.window.norm():.6g}")
        self._atoms = None

    @classmethod
    def normalized(cls, window: GridSignal, points: SeparatedSet) -> "GaborSystem":
        return cls(window * (1.0 / window.norm()), points)

    @property
    def grid(self) -> UniformGrid:
        return self.window.grid

    @property
    def atoms(self) -> np.ndarray:
        """``(K, N)`` array whose rows are ``M_t T_s g`` on the flattened grid."""
        if self._atoms is None:
            self._atoms = _atoms(self.window, self.points.points)
        return self._atoms

    def analysis(self, values: np.ndarray) -> np.ndarray:
        return self.grid.cell_volume * (self.atoms.conj() @ values.ravel())

    def synthesis(self, coeffs: np.ndarray) -> np.ndarray:
        return self.atoms.T @ coeffs

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.synthesis(self.analysis(values))

    def matrix(self) -> np.ndarray:
        A = self.atoms
        return self.grid.cell_volume * (A.T @ A.conj())


def gabor_coefficients(f: GridSignal, sys: GaborSystem) -> np.ndarray:
    """``V_g f(s_k, t_k) = <f, M_{t_k} T_{s_k} g>`` for each phase point."""
    return sys.analysis(f.values)


def gabor_frame_apply(f: GridSignal, sys: GaborSystem) -> GridSignal:
    """``S f = sum_k <f, M_{t_k} T_{s_k} g> M_{t_k} T_{s_k} g``."""
    return GridSignal(sys.grid, sys.apply(f.values).reshape(sys.grid.shape), f.domain)


def gabor_frame_bounds(
    sys: GaborSystem,
    method: Literal["auto", "dense-eigen", "power-iteration"] = "auto",
    subspace: np.ndarray | None = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> FrameReport:
    """Extremal eigenvalues of the Gabor frame operator on the grid space,
    or of its compression to ``subspace`` (orthonormal columns)."""
    if subspace is None:
        dim = sys.grid.size
        apply = sys.apply
        matrix = sys.matrix() if method != "power-iteration" else None
    else:
        Q = np.asarray(subspace)
        dim = Q.shape[1]
        if dim < 1:
            raise ValueError("empty subspace")

        def apply(c):
            return Q.conj().T @ sys.apply(Q @ c)

        matrix = Q.conj().T @ sys.matrix() @ Q if method != "power-iteration" else None
    return extremal_eigenvalues(apply, dim, matrix=matrix, method=method, tol=tol, seed=seed)


def gabor_reconstruct(coeffs, sys: GaborSystem, tol: float = 1e-10, max_iter: int = 500) -> Reconstruction:
    """Solve ``S f = sum_k c_k M_{t_k} T_{s_k} g`` by conjugate gradients."""
    coeffs = np.asarray(coeffs, dtype=complex).ravel()
    if coeffs.shape[0] != len(sys.points):
        raise ValueError(f"got {coeffs.shape[0]} coefficients for {len(sys.points)} phase points")
    res = conjugate_gradient(sys.apply, sys.synthesis(coeffs), tol=tol, max_iter=max_iter)
    return Reconstruction(GridSignal(sys.grid, res.x.reshape(sys.grid.shape)), res.iterations, res.residual, res.converged)


def write_stft_csv(path, V: STFTField) -> None:
    """Columns ``x, omega, re, im, abs`` (one coordinate column per axis when d > 1)."""
    d = V.x.shape[1]
    xcols = ["x"] if d == 1 else [f"x{i}" for i in range(d)]
    ocols = ["omega"] if d == 1 else [f"omega{i}" for i in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(xcols + ocols + ["re", "im", "abs"])
        for k, x in enumerate(V.x):
            for j, om in enumerate(V.omega):
                v = V.values[k, j]
                w.writerow(
                    [repr(float(c)) for c in x]
                    + [repr(float(c)) for c in om]
                    + [repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))]
                )
