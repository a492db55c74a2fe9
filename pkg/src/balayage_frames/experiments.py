"""Reproducible experiment runs driven by ``key=value`` config files.

Every run writes one CSV table (header row first), a ``manifest.json``
with the config echo, toolkit version and wall time, and a figure.  CSV
bodies depend only on the config, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .balayage import AtomicMeasure, balayage_residual_curve
from .fourier_core import dft, pw_project
from .fourier_frames import FourierFrame, frame_bounds, frame_reconstruct, model_grid
from .lattice import GridSignal, SpectrumSet, make_grid
from .sampling_sets import jittered_lattice, phase_lattice, phase_torus_grid
from .stft_gabor import (
    GaborSystem,
    feichtinger_norm,
    frequency_side_energy,
    gabor_coefficients,
    gabor_frame_bounds,
    gabor_reconstruct,
    gaussian_window,
    phase_space_upper_constant,
    semidiscrete_bounds,
    semidiscrete_energy,
    stft_forward,
    stft_inverse,
    upper_constant_C,
)

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "frame-bounds-sweep",
    "balayage-curve",
    "stft-roundtrip",
    "semidiscrete-check",
    "gabor-sweep",
    "reconstruct",
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class ConfigError(ValueError):
    """Invalid config text; ``line`` is 1-based or ``None`` for whole-file errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# key: (parser, help)
KEYS = {
    "experiment": (str, "experiment to run: " + ", ".join(EXPERIMENTS)),
    "seed": (int, "seed for every random choice (jitter, random signals)"),
    "n": (int, "points per axis of the time grid (even) for STFT experiments"),
    "spacing": (float, "time-grid spacing for STFT experiments"),
    "delta": (float, "lattice spacing of the sampling set"),
    "jitter": (float, "jitter of the sampling set (absolute, < delta/2)"),
    "jitters": (_floats, "comma-separated jitter sweep, as fractions of delta"),
    "deltas": (_floats, "comma-separated lattice spacings, coarse to fine, for balayage-curve"),
    "extent": (float, "sampling set radius: points k*delta with |k*delta| <= extent"),
    "symmetric": (_bool, "mirror the jitter so that E = -E"),
    "spectrum": (str, "spectrum shape: box or ball"),
    "half_width": (float, "box half-width or ball radius of the spectrum"),
    "dim": (int, "dimension of the spectrum and sampling set"),
    "epsilon": (float, "enlargement of the spectrum (>= 0)"),
    "mu": (_floats, "location of the point mass swept by balayage-curve"),
    "grid_density": (_optional_float, "spectrum points per unit length for balayage (auto: 8 per dual cell)"),
    "regularization": (_optional_float, "ridge weight for balayage (auto: 1e-10 * rows)"),
    "eigen": (str, "eigen method: auto, dense-eigen or power-iteration"),
    "method": (str, "reconstruction method: conjugate-gradient or frame-algorithm"),
    "tol": (float, "solver tolerance"),
    "max_iter": (int, "solver iteration cap"),
    "trials": (int, "number of random test signals"),
    "window": (str, "window: g0 (reference Gaussian) or gaussian (uses window_width)"),
    "window_width": (float, "width w of the window exp(-pi t^2 / w^2), normalized"),
    "ab": (_floats, "comma-separated phase-lattice densities a*b (a = b) for gabor-sweep"),
    "gabor_jitter": (_floats, "comma-separated phase-lattice jitters at a*b = 1/2"),
    "out": (str, "output directory"),
}


@dataclass
class ExperimentConfig:
    """Everything a run depends on; identical configs give identical CSVs."""

    experiment: str = ""
    seed: int = 0
    n: int = 512
    spacing: float = 1.0 / 16
    delta: float = 1.0
    jitter: float = 0.0
    jitters: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4)
    deltas: tuple[float, ...] = (2.0, 1.0, 0.5)
    extent: float = 32.0
    symmetric: bool = True
    spectrum: str = "box"
    half_width: float = 0.5
    dim: int = 1
    epsilon: float = 0.0
    mu: tuple[float, ...] = (0.3,)
    grid_density: float | None = None
    regularization: float | None = None
    eigen: str = "auto"
    method: str = "conjugate-gradient"
    tol: float = 1e-10
    max_iter: int = 500
    trials: int = 1
    window: str = "g0"
    window_width: float = 1.0
    ab: tuple[float, ...] = (0.25, 0.5, 2.0)
    gabor_jitter: tuple[float, ...] = (0.1,)
    out: str = "results"
    explicit: frozenset = field(default=frozenset(), repr=False, compare=False)

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "explicit"}

    def spectrum_set(self) -> SpectrumSet:
        if self.spectrum == "box":
            return SpectrumSet.box([self.half_width] * self.dim, epsilon=self.epsilon)
        return SpectrumSet.ball(self.half_width, self.dim, epsilon=self.epsilon)


# per-experiment defaults that differ from the dataclass defaults
EXPERIMENT_DEFAULTS = {
    "semidiscrete-check": {"spacing": 1.0 / 8, "extent": 16.0, "trials": 20},
}


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse ``key=value`` lines (``#`` starts a comment).

    ``experiment`` supplies the experiment when the text has none; if both
    are present they must agree.
    """
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = KEYS[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        lines[key] = lineno

    if experiment is not None:
        if values.get("experiment", experiment) != experiment:
            raise ConfigError(f"config names experiment {values['experiment']!r} but {experiment!r} was requested",
                              lines.get("experiment"))
        values["experiment"] = experiment
    explicit = frozenset(values)
    for key, val in EXPERIMENT_DEFAULTS.get(values.get("experiment", ""), {}).items():
        values.setdefault(key, val)
    cfg = ExperimentConfig(**values, explicit=explicit)
    _validate(cfg, lines)
    if not cfg.experiment:
        raise ConfigError("experiment key required")
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}", lines.get("experiment"))
    return cfg


def _validate(cfg: ExperimentConfig, lines: dict) -> None:
    def check(ok, key, msg):
        if not ok:
            raise ConfigError(msg, lines.get(key))

    check(cfg.delta > 0, "delta", "delta must be > 0")
    check(0 <= cfg.jitter < cfg.delta / 2, "jitter", "jitter must be < delta/2")
    check(all(0 <= j < 0.5 for j in cfg.jitters), "jitters", "jitters are fractions of delta and must be in [0, 1/2)")
    check(cfg.epsilon >= 0, "epsilon", "epsilon must be >= 0")
    check(cfg.n >= 2 and cfg.n % 2 == 0, "n", "n must be even and >= 2")
    check(cfg.spacing > 0, "spacing", "spacing must be > 0")
    check(cfg.extent > 0, "extent", "extent must be > 0")
    check(cfg.half_width > 0, "half_width", "half_width must be > 0")
    check(cfg.dim >= 1, "dim", "dim must be >= 1")
    check(cfg.spectrum in ("box", "ball"), "spectrum", "spectrum must be box or ball")
    check(all(d > 0 for d in cfg.deltas), "deltas", "deltas must be > 0")
    check(len(cfg.mu) == cfg.dim, "mu", "mu needs one coordinate per dimension")
    check(cfg.eigen in ("auto", "dense-eigen", "power-iteration"), "eigen", "eigen must be auto, dense-eigen or power-iteration")
    check(cfg.method in ("conjugate-gradient", "frame-algorithm"), "method", "method must be conjugate-gradient or frame-algorithm")
    check(cfg.tol > 0, "tol", "tol must be > 0")
    check(cfg.max_iter >= 1, "max_iter", "max_iter must be >= 1")
    check(cfg.trials >= 1, "trials", "trials must be >= 1")
    check(cfg.window in ("g0", "gaussian"), "window", "window must be g0 or gaussian")
    check(cfg.window_width > 0, "window_width", "window_width must be > 0")
    check(all(v > 0 for v in cfg.ab), "ab", "ab values must be > 0")
    check(cfg.regularization is None or cfg.regularization >= 0, "regularization", "regularization must be >= 0")
    check(cfg.grid_density is None or cfg.grid_density > 0, "grid_density", "grid_density must be > 0")


def load_config(path, experiment: str | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), experiment)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    # numerical failure (unconverged solve or violated inequality)
    failed: bool = False
    notes: dict = field(default_factory=dict)


def write_csv(path: Path, table: Table) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def _window(cfg: ExperimentConfig, grid) -> GridSignal:
    if cfg.window == "g0":
        return gaussian_window(grid)
    g = GridSignal.from_function(grid, lambda *t: np.exp(-np.pi * sum(c**2 for c in t) / cfg.window_width**2))
    return g * (1.0 / g.norm())


def _map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_frame_bounds_sweep(cfg: ExperimentConfig, threads: int = 1) -> Table:
    spectrum = cfg.spectrum_set()
    if "jitter" in cfg.explicit and "jitters" not in cfg.explicit:
        etas = [cfg.jitter]
    else:
        etas = [j * cfg.delta for j in cfg.jitters]

    def row(eta):
        E = jittered_lattice(cfg.dim, cfg.delta, eta, cfg.extent, cfg.symmetric, cfg.seed)
        rep = frame_bounds(E, spectrum, method=cfg.eigen, seed=cfg.seed)
        return [eta, E.separation, rep.lower, rep.upper, rep.condition, rep.iterations]

    rows = _map(row, etas, threads)
    return Table(["jitter", "separation", "A", "B", "condition", "iterations"], rows)


def run_balayage_curve(cfg: ExperimentConfig, threads: int = 1) -> Table:
    spectrum = cfg.spectrum_set()
    family = [jittered_lattice(cfg.dim, d, 0.0, cfg.extent, cfg.symmetric, cfg.seed) for d in cfg.deltas]
    mu = AtomicMeasure.point_mass(cfg.mu)
    curve = balayage_residual_curve(mu, family, spectrum, cfg.grid_density, cfg.regularization)
    rows = [[p.set_size, p.separation, p.residual, p.condition_estimate] for p in curve]
    return Table(["set_size", "separation", "residual", "condition_estimate"], rows)


def _mixture(grid, rng) -> GridSignal:
    """Random sum of 1-3 shifted, modulated Gaussians well inside the grid."""
    half = min(grid.span) / 2
    k = int(rng.integers(1, 4))
    centers = rng.uniform(-half / 3, half / 3, size=(k, grid.d))
    widths = rng.uniform(0.5, 1.5, size=k)
    freqs = rng.uniform(-1.0, 1.0, size=(k, grid.d))
    amps = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    mesh = grid.mesh()
    vals = np.zeros(grid.shape, dtype=complex)
    for c, w, om, a in zip(centers, widths, freqs, amps):
        r2 = sum((m - ci) ** 2 for m, ci in zip(mesh, c))
        ph = sum(m * oi for m, oi in zip(mesh, om))
        vals += a * np.exp(-np.pi * r2 / w**2) * np.exp(2j * np.pi * ph)
    return GridSignal(grid, vals)


def run_stft_roundtrip(cfg: ExperimentConfig, threads: int = 1) -> Table:
    grid = make_grid(1, cfg.n, cfg.spacing)
    g = _window(cfg, grid)
    rng = np.random.default_rng(cfg.seed)
    signals = [_mixture(grid, rng) for _ in range(cfg.trials)]

    def row(item):
        i, f = item
        V = stft_forward(f, g)
        moyal = abs(V.norm() ** 2 - f.norm() ** 2 * g.norm() ** 2) / (f.norm() ** 2 * g.norm() ** 2)
        rt = (stft_inverse(V, g) - f).norm() / f.norm()
        return [i, cfg.n, moyal, rt]

    rows = _map(row, list(enumerate(signals)), threads)
    failed = any(r[2] > 1e-8 or r[3] > 1e-8 for r in rows)
    return Table(["trial", "n", "moyal_error", "roundtrip_error"], rows, failed)


def run_semidiscrete_check(cfg: ExperimentConfig, threads: int = 1) -> Table:
    grid = make_grid(1, cfg.n, cfg.spacing)
    spectrum = cfg.spectrum_set()
    g = _window(cfg, grid)
    E = jittered_lattice(1, cfg.delta, cfg.jitter, cfg.extent, cfg.symmetric, cfg.seed)
    # windows centred on E must not wrap around the torus
    if cfg.extent + cfg.delta + 4.0 > grid.span[0] / 2:
        raise ValueError(f"extent {cfg.extent} does not fit the grid span {grid.span[0]}; raise n or spacing")
    C = upper_constant_C(E).value
    N = feichtinger_norm(g).value
    bounds = semidiscrete_bounds(g, E, spectrum)
    dual = grid.dual()
    mask = spectrum.grid_mask(dual)
    rng = np.random.default_rng(cfg.seed)
    signals = []
    for _ in range(cfg.trials):
        F = np.zeros(dual.shape, dtype=complex)
        F[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
        signals.append(dft(GridSignal(dual, F, "frequency"), "inverse"))

    def row(item):
        i, f = item
        nsq = f.norm() ** 2
        energy = semidiscrete_energy(f, g, E)
        freq_minus = frequency_side_energy(f, g, E, sign=-1)
        freq_plus = frequency_side_energy(f, g, E, sign=+1)
        upper = C * N * nsq
        return [i, energy, nsq, bounds.lower * nsq, upper, upper - energy,
                abs(freq_minus - energy) / energy, abs(freq_plus - energy) / energy]

    rows = _map(row, list(enumerate(signals)), threads)
    failed = any(r[5] < 0 for r in rows)
    notes = {"C": C, "feichtinger_norm": N, "A": bounds.lower, "B": bounds.upper, "symmetric": E.symmetric}
    cols = ["trial", "energy", "norm_sq", "lower_bound", "upper_bound", "slack", "freq_side_rel_diff", "reflected_rel_diff"]
    return Table(cols, rows, failed, notes)


def lattice_torus(ab: float, min_span: float = 8.0, max_n: int = 4096):
    """Torus grid for the square lattice ``a = b = sqrt(ab)`` with both
    periods at least ``min_span``."""
    a = float(np.sqrt(ab))
    count = int(np.ceil(min_span / a - 1e-9))
    while count * count * ab <= max_n:
        n = count * count * ab
        if abs(n - round(n)) < 1e-9 and round(n) % 2 == 0:
            return phase_torus_grid(a, a, count, count), a
        count += 1
    raise ValueError(f"no torus grid up to n={max_n} fits the lattice with a*b={ab}")


def run_gabor_sweep(cfg: ExperimentConfig, threads: int = 1) -> Table:
    cases = [("ab", v, 0.0) for v in cfg.ab] + [("jitter", 0.5, j) for j in cfg.gabor_jitter]

    def row(case):
        kind, ab, jit = case
        grid, a = lattice_torus(ab)
        g = _window(cfg, grid)
        E = phase_lattice(grid, a, a, jitter=jit, seed=cfg.seed)
        sys = GaborSystem(g, E)
        rep = gabor_frame_bounds(sys, method=cfg.eigen, seed=cfg.seed)
        C = phase_space_upper_constant(E, period=(grid.span[0], 1.0 / grid.spacing[0])).value
        N = feichtinger_norm(g).value
        err = np.nan
        if rep.is_frame:
            f = GridSignal.from_function(grid, lambda t: np.exp(-np.pi * (t - 0.5) ** 2) * np.exp(0.6j * np.pi * t))
            rec = gabor_reconstruct(gabor_coefficients(f, sys), sys, tol=cfg.tol, max_iter=cfg.max_iter)
            err = (rec.signal - f).norm() / f.norm()
        label = f"ab={ab!r}" if kind == "ab" else f"jitter={jit!r}"
        return [label, rep.lower, rep.upper, rep.condition, C, N, err]

    rows = _map(row, cases, threads)
    cols = ["ab_product_or_jitter", "A", "B", "condition", "C_constant", "feichtinger_norm", "reconstruction_error"]
    return Table(cols, rows)


def run_reconstruct(cfg: ExperimentConfig, threads: int = 1) -> Table:
    spectrum = cfg.spectrum_set()
    E = jittered_lattice(cfg.dim, cfg.delta, cfg.jitter, cfg.extent, cfg.symmetric, cfg.seed)
    grid = model_grid(E, spectrum)
    bump = GridSignal.from_function(grid, lambda *t: np.exp(-np.pi * sum(c**2 for c in t) / 4.0))
    truth = dft(pw_project(bump, spectrum))
    frame = FourierFrame(E, spectrum, grid)
    samples = frame.analysis(frame.coefficients(truth))
    rec = frame_reconstruct(samples, E, spectrum, cfg.method, cfg.tol, cfg.max_iter, grid=grid)
    err = (rec.signal - truth).norm() / truth.norm()
    row = [cfg.method, len(E), rec.iterations, rec.residual, rec.converged, err]
    return Table(["method", "set_size", "iterations", "residual", "converged", "relative_error"], [row], not rec.converged)


RUNNERS = {
    "frame-bounds-sweep": run_frame_bounds_sweep,
    "balayage-curve": run_balayage_curve,
    "stft-roundtrip": run_stft_roundtrip,
    "semidiscrete-check": run_semidiscrete_check,
    "gabor-sweep": run_gabor_sweep,
    "reconstruct": run_reconstruct,
}


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("BF_THREADS", "1") or 1)
    return max(int(threads), 1)


def run_experiment(cfg: ExperimentConfig, out: str | Path | None = None, threads: int | None = None,
                   plots: bool = True) -> int:
    """Run ``cfg`` and write its artifacts; returns the process exit status.

    0 on success, 2 when a solve is unconverged or a checked inequality
    fails (artifacts are still written and flagged), 1 on usage errors.
    """
    out_dir = Path(out if out is not None else cfg.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        log.error("output directory %s is not writable: %s", out_dir, exc)
        return EXIT_USAGE
    threads = resolve_threads(threads)
    start = time.perf_counter()
    try:
        table = RUNNERS[cfg.experiment](cfg, threads)
    except ValueError as exc:
        log.error("%s: %s", cfg.experiment, exc)
        return EXIT_USAGE
    wall = time.perf_counter() - start

    stem = cfg.experiment.replace("-", "_")
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, table)
    artifacts = [csv_path.name]
    if plots:
        from .plotting import render, write_plot_script

        artifacts.append(render(cfg.experiment, table, out_dir / f"{stem}.png").name)
        artifacts.append(write_plot_script(cfg.experiment, csv_path, out_dir / f"plot_{stem}.py").name)
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.echo(),
        "version": __version__,
        "started_utc": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": wall,
        "threads": threads,
        "status": "unconverged" if table.failed else "ok",
        "notes": {k: _fmt(v) for k, v in table.notes.items()},
        "artifacts": artifacts,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    if table.failed:
        log.warning("%s: numerical failure flagged in %s", cfg.experiment, csv_path)
        return EXIT_NUMERICAL
    return EXIT_OK
