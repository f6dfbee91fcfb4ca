"""sqzkit: design and data reduction for fiber-coupled OPO squeezers.

Four computational layers plus a CLI:
  gaussian_optics   cavity/fiber mode geometry and overlaps
  opo_model         squeezing spectrum and fits to squeezing-vs-power data
  loss_budget       loss chains, corrections, the three published tiers
  gaussian_network  covariance simulation of squeezer networks

All variances are in shot-noise units (vacuum = 1), all dB values are
10*log10(linear), all lengths are meters.
"""

__version__ = "0.1.0"

from .gaussian_optics import (
    KTP_INDEX_1064NM,
    CavityGeometry,
    CavityLengths,
    GaussianBeam,
    NoSolutionError,
    StabilityError,
    beam_radius_at,
    cavity_length_for_waist,
    confocal_crystal_length,
    gaussian_overlap,
    hemispherical_waist,
    paraxial_figure_of_merit,
    rayleigh_range,
)
from .opo_model import (
    SPEED_OF_LIGHT,
    AboveThresholdError,
    FitError,
    FitResult,
    OpoParams,
    QuadraturePair,
    ThresholdDivergenceError,
    cavity_bandwidth,
    effective_efficiency,
    escape_efficiency,
    fit_opo_curve,
    homodyne_trace,
    model_spectrum_db,
    pump_ratio,
    squeezed_variance,
    squeezing_spectrum,
)
from .loss_budget import (
    CorrectionTiers,
    LossChain,
    LossStage,
    MeasurementRecord,
    NonphysicalCorrectionError,
    SignalBelowDarkError,
    apply_loss,
    chain_efficiency,
    correction_pipeline,
    dark_noise_correct,
    db_to_linear,
    linear_to_db,
    unapply_loss,
)
from .gaussian_network import (
    Beamsplitter,
    GaussianState,
    Loss,
    NetworkError,
    NetworkResult,
    NetworkScenario,
    PhaseShift,
    apply_beamsplitter,
    apply_loss_channel,
    apply_phase_shift,
    apply_symplectic,
    beamsplitter_matrix,
    binary_tree_scenario,
    duan_value,
    homodyne_variance,
    phase_shift_matrix,
    run_scenario,
    squeezed_vacuum,
    symplectic_eigenvalues,
    symplectic_form,
    vacuum,
)
from .datasets import get_dataset
from .reproduce import build_report
