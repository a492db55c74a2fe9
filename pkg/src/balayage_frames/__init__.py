"""Numerical toolkit for Fourier frames, balayage and STFT/Gabor sampling.

Time-frequency objects live on centered periodic grids; every operator in
the package is exact on that torus model, so the tests compare against
closed forms down to rounding.
"""

__version__ = "0.1.0"

from .balayage import (
    AtomicMeasure,
    BalayageConditionError,
    BalayageSolution,
    CurvePoint,
    balayage_residual_curve,
    balayage_solve,
    measure_transform,
    point_mass_residual,
)
from .fourier_core import (
    Exponential,
    dft,
    pw_project,
    read_signal_binary,
    sample_at,
    sample_many,
    time_frequency_shift,
    write_signal_binary,
    write_signal_csv,
)
from .fourier_frames import (
    FourierFrame,
    Reconstruction,
    analysis_map,
    frame_bounds,
    frame_operator_apply,
    frame_reconstruct,
    model_grid,
)
from .lattice import GridSignal, SpectrumSet, UniformGrid, epsilon_enlarge, make_grid, spectrum_membership
from .sampling_sets import (
    SeparatedSet,
    covering_radius,
    is_separated,
    jittered_lattice,
    phase_lattice,
    phase_torus_grid,
    read_points_csv,
    write_points_csv,
)
from .solvers import CGResult, FrameReport, cg_iteration_bound, conjugate_gradient, extremal_eigenvalues
from .stft_gabor import (
    GaborSystem,
    NormEstimate,
    STFTField,
    SupResult,
    feichtinger_norm,
    frequency_side_energy,
    gabor_coefficients,
    gabor_frame_apply,
    gabor_frame_bounds,
    gabor_reconstruct,
    gaussian_window,
    phase_space_bandlimit,
    phase_space_model_basis,
    phase_space_upper_constant,
    semidiscrete_bounds,
    semidiscrete_energy,
    stft_forward,
    stft_inverse,
    upper_constant_C,
    write_stft_csv,
)
