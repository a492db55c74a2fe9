import numpy as np
import pytest

from balayage_frames.fourier_core import dft, pw_project, sample_many
from balayage_frames.fourier_frames import (
    FourierFrame,
    analysis_map,
    frame_bounds,
    frame_operator_apply,
    frame_reconstruct,
    model_grid,
)
from balayage_frames.lattice import GridSignal, SpectrumSet, make_grid
from balayage_frames.sampling_sets import SeparatedSet, jittered_lattice
from balayage_frames.solvers import cg_iteration_bound

LAM = SpectrumSet.box(0.5)


def random_model_element(frame, seed):
    rng = np.random.default_rng(seed)
    return frame.to_signal(rng.standard_normal(frame.dim) + 1j * rng.standard_normal(frame.dim))


def gaussian_truth(E, spectrum):
    grid = model_grid(E, spectrum)
    bump = GridSignal.from_function(grid, lambda t: np.exp(-np.pi * t**2 / 4))
    return grid, dft(pw_project(bump, spectrum))


def test_model_grid_resolves_spectrum():
    E = jittered_lattice(1, 1.0, 0.0, 32.0)
    grid = model_grid(E, LAM)
    assert grid.span[0] == pytest.approx(65.0)
    assert 1 / (2 * grid.spacing[0]) > 0.5


def test_analysis_map_zero_and_consistency():
    E = SeparatedSet([0.0, 1 / 3])
    g = make_grid(1, 64, 0.5)
    assert np.all(analysis_map(GridSignal.zeros(g.dual(), "frequency"), E, LAM) == 0)
    f = pw_project(GridSignal(g, np.random.default_rng(0).standard_normal(64)), LAM)
    on_grid = SeparatedSet(g.axis()[::5])
    np.testing.assert_allclose(analysis_map(dft(f), on_grid, LAM), f.values[::5], atol=1e-12)


def test_analysis_map_sinc():
    g = make_grid(1, 4096, 1 / 8)
    F = GridSignal.from_function(g.dual(), lambda s: np.ones_like(s, dtype=float), "frequency")
    vals = analysis_map(F, SeparatedSet([0.0, 1 / 3]), LAM)
    # the closed box holds one more grid point than its length: error up to one cell
    np.testing.assert_allclose(vals.real, [1.0, 0.82699], atol=2 * g.dual().spacing[0])


def test_frame_operator_identities():
    E = jittered_lattice(1, 1.0, 0.2, 16.0, seed=1)
    grid = model_grid(E, LAM)
    frame = FourierFrame(E, LAM, grid)
    F, G = random_model_element(frame, 1), random_model_element(frame, 2)
    SF, SG = frame_operator_apply(F, E, LAM), frame_operator_apply(G, E, LAM)
    energy = np.sum(np.abs(analysis_map(F, E, LAM)) ** 2)
    assert SF.inner(F).real == pytest.approx(energy, rel=1e-10)
    assert abs(SF.inner(F).imag) <= 1e-10 * energy
    assert SF.inner(G) == pytest.approx(np.conj(SG.inner(F)), rel=1e-10)


def test_nyquist_tight_frame():
    E = jittered_lattice(1, 1.0, 0.0, 32.0)
    F = random_model_element(FourierFrame(E, LAM), 3)
    assert (frame_operator_apply(F, E, LAM) - F).norm() <= 1e-10 * F.norm()
    rep = frame_bounds(E, LAM)
    assert rep.lower == pytest.approx(1.0, abs=0.02) and rep.upper == pytest.approx(1.0, abs=0.02)


def test_thinned_lattice_not_a_frame():
    rep = frame_bounds(jittered_lattice(1, 2.0, 0.0, 32.0), LAM)
    assert rep.lower < 1e-3 and rep.condition == np.inf and not rep.is_frame


def test_jittered_frame():
    rep = frame_bounds(jittered_lattice(1, 1.0, 0.2, 32.0), LAM)
    assert rep.lower > 0 and np.isfinite(rep.upper) and np.isfinite(rep.condition)


def test_power_iteration_matches_dense():
    E = jittered_lattice(1, 1.0, 0.2, 32.0, seed=5)
    dense = frame_bounds(E, LAM, method="dense-eigen")
    power = frame_bounds(E, LAM, method="power-iteration", tol=1e-12)
    assert power.upper == pytest.approx(dense.upper, abs=1e-6)
    assert power.lower == pytest.approx(dense.lower, abs=1e-6)
    assert power.iterations > 0


def test_frame_inequality_sampled():
    E = jittered_lattice(1, 1.0, 0.3, 16.0, seed=2)
    frame = FourierFrame(E, LAM)
    rep = frame_bounds(E, LAM)
    for seed in range(100):
        F = random_model_element(frame, seed)
        s = np.sum(np.abs(analysis_map(F, E, LAM)) ** 2)
        nsq = F.norm() ** 2
        assert rep.lower * nsq * (1 - 1e-8) <= s <= rep.upper * nsq * (1 + 1e-8)


def test_frame_bounds_2d_ball():
    E = jittered_lattice(2, 1.0, 0.1, 5.0, seed=0)
    rep = frame_bounds(E, SpectrumSet.ball(0.4, 2))
    assert 0 < rep.lower <= rep.upper


@pytest.mark.parametrize("method", ["conjugate-gradient", "frame-algorithm"])
def test_reconstruct_nyquist(method):
    E = jittered_lattice(1, 1.0, 0.0, 32.0)
    grid, truth = gaussian_truth(E, LAM)
    rec = frame_reconstruct(analysis_map(truth, E, LAM), E, LAM, method, tol=1e-12, max_iter=20, grid=grid)
    assert rec.converged and rec.iterations <= 20
    assert (rec.signal - truth).norm() < 1e-8 * truth.norm()


def test_reconstruct_zero_samples():
    E = jittered_lattice(1, 1.0, 0.1, 8.0)
    rec = frame_reconstruct(np.zeros(len(E)), E, LAM)
    assert rec.signal.norm() == 0.0 and rec.converged


def test_reconstruct_jittered_within_bound():
    E = jittered_lattice(1, 1.0, 0.2, 32.0, seed=3)
    grid, truth = gaussian_truth(E, LAM)
    frame = FourierFrame(E, LAM, grid)
    samples = analysis_map(truth, E, LAM)
    rec = frame_reconstruct(samples, E, LAM, tol=1e-9, grid=grid)
    assert rec.converged
    rep = frame_bounds(E, LAM, grid=grid)
    assert rec.iterations <= cg_iteration_bound(rep.condition, 1e-9)
    # dense solve oracle
    dense = np.linalg.solve(frame.matrix(), frame.synthesis(samples))
    assert np.linalg.norm(frame.coefficients(rec.signal) - dense) <= 1e-7 * np.linalg.norm(dense)
    # reconstruction consistency
    back = analysis_map(rec.signal, E, LAM)
    assert np.linalg.norm(back - samples) <= 1e-7 * np.linalg.norm(samples)


def test_frame_algorithm_refuses_non_frame():
    E = jittered_lattice(1, 2.0, 0.0, 16.0)
    with pytest.raises(ValueError, match="lower frame bound"):
        frame_reconstruct(np.ones(len(E)), E, LAM, "frame-algorithm")


def test_reconstruct_budget_flagged():
    E = jittered_lattice(1, 1.0, 0.4, 16.0)
    rec = frame_reconstruct(np.ones(len(E)), E, LAM, max_iter=1)
    assert not rec.converged and rec.residual > 1e-10


def test_sample_count_checked():
    E = jittered_lattice(1, 1.0, 0.0, 4.0)
    with pytest.raises(ValueError):
        frame_reconstruct(np.ones(3), E, LAM)
