"""Eigenvalue bounds and conjugate gradients for Hermitian PSD operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

__all__ = ["FrameReport", "CGResult", "frame_report", "extremal_eigenvalues", "conjugate_gradient", "cg_iteration_bound"]

# below this fraction of B the lower bound is reported as zero
ZERO_LOWER = 1e-12
DENSE_LIMIT = 512

Method = Literal["auto", "dense-eigen", "power-iteration"]


@dataclass(frozen=True)
class FrameReport:
    """Lower/upper frame bounds of a frame operator."""

    lower: float
    upper: float
    condition: float
    method: str
    iterations: int = 0

    @property
    def is_frame(self) -> bool:
        return self.lower > 0


def frame_report(lower: float, upper: float, method: str, iterations: int = 0) -> FrameReport:
    upper = float(upper)
    lower = min(max(float(lower), 0.0), upper)
    if upper <= 0 or lower < ZERO_LOWER * upper:
        return FrameReport(0.0, max(upper, 0.0), np.inf, method, iterations)
    return FrameReport(lower, upper, upper / lower, method, iterations)


def _power_top(apply, dim, rng, tol, max_iter, shift=0.0):
    """Largest eigenvalue of ``shift*I - A`` (or ``A`` when ``shift`` is 0).

    Stops once the eigen-residual ``|| M v - theta v ||`` drops below
    ``tol * scale`` where ``scale`` is ``shift`` or the current estimate.
    """
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    theta = 0.0
    for it in range(1, max_iter + 1):
        w = apply(v)
        if shift:
            w = shift * v - w
        theta = float(np.real(np.vdot(v, w)))
        scale = shift if shift else abs(theta)
        res = np.linalg.norm(w - theta * v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, it
        if res <= tol * scale:
            return theta, it
        v = w / nw
    return theta, max_iter


def extremal_eigenvalues(
    apply: Callable[[np.ndarray], np.ndarray] | None,
    dim: int,
    matrix: np.ndarray | None = None,
    method: Method = "auto",
    tol: float = 1e-8,
    max_iter: int = 200_000,
    seed: int = 0,
) -> FrameReport:
    """Smallest and largest eigenvalues of a Hermitian PSD operator.

    ``dense-eigen`` diagonalizes ``matrix`` (built from ``apply`` when not
    given).  ``power-iteration`` runs the power method for the top
    eigenvalue ``B``, then the power method on ``B*I - A`` for ``B - A``.
    ``auto`` picks dense up to ``DENSE_LIMIT`` dimensions.
    """
    if dim < 1:
        raise ValueError("operator dimension must be >= 1")
    if method == "auto":
        method = "dense-eigen" if dim <= DENSE_LIMIT else "power-iteration"
    if method == "dense-eigen":
        if matrix is None:
            matrix = np.column_stack([apply(e) for e in np.eye(dim, dtype=complex)])
        ev = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
        return frame_report(ev[0], ev[-1], "dense-eigen", 0)
    if method != "power-iteration":
        raise ValueError(f"unknown eigen method {method!r}")
    if apply is None:
        apply = matrix.__matmul__
    rng = np.random.default_rng(seed)
    upper, it_b = _power_top(apply, dim, rng, tol, max_iter)
    if upper <= 0:
        return frame_report(0.0, 0.0, "power-iteration", it_b)
    # power method on the reflected operator converges to B - A
    gap, it_a = _power_top(apply, dim, rng, tol, max_iter, shift=upper)
    return frame_report(upper - gap, upper, "power-iteration", it_b + it_a)


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def conjugate_gradient(
    apply: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    x0: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> CGResult:
    """Solve ``A x = b`` for Hermitian PSD ``A``.

    Stops when ``||A x - b|| <= tol * ||b||``.  On ``max_iter`` the best
    iterate seen (smallest residual) is returned with ``converged=False``.
    """
    b = np.asarray(b, dtype=complex)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=complex)
    if bnorm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0, True)
    r = b - apply(x) if x0 is not None else b.copy()
    p = r.copy()
    rs = np.vdot(r, r).real
    best_x, best_res = x.copy(), np.sqrt(rs) / bnorm
    if best_res <= tol:
        return CGResult(x, 0, best_res, True)
    for it in range(1, max_iter + 1):
        Ap = apply(p)
        alpha = rs / np.vdot(p, Ap).real
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = np.vdot(r, r).real
        res = np.sqrt(rs_new) / bnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            # recompute against the true residual to guard against drift
            true_res = np.linalg.norm(b - apply(x)) / bnorm
            if true_res <= tol:
                return CGResult(x, it, float(true_res), True)
            r = b - apply(x)
            rs_new = np.vdot(r, r).real
            p = r.copy()
            rs = rs_new
            continue
        p = r + (rs_new / rs) * p
        rs = rs_new
    return CGResult(best_x, max_iter, float(best_res), False)


def cg_iteration_bound(condition: float, tol: float) -> int:
    """Iterations after which CG is guaranteed a relative residual ``tol``.

    From ``||e_k||_A <= 2 q^k ||e_0||_A`` with ``q = (s-1)/(s+1)``,
    ``s = sqrt(condition)``; the residual picks up one more factor ``s``.
    """
    if not np.isfinite(condition):
        return np.iinfo(np.int64).max
    s = np.sqrt(max(condition, 1.0))
    if s == 1.0:
        return 1
    q = (s - 1.0) / (s + 1.0)
    return int(np.ceil(np.log(tol / (2.0 * s)) / np.log(q)))
