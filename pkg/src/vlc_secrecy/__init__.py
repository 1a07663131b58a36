"""Physical-layer secrecy for multi-LED visible light downlinks.

Channel model, eigenmode beamforming, nearest-LED selection, closed-form
secrecy outage bounds and a Monte Carlo harness to check them.
"""

from .beamform import (
    BeamformResult,
    GramMatrices,
    SnrTargets,
    brute_force_beamformer,
    compute_A,
    compute_Bbar,
    constrained_qp_fallback,
    gram_matrices,
    max_eigenpair,
    max_ue_capacity_beamformer,
    max_ue_snr_beamformer,
    min_ed_capacity_beamformer,
    min_ed_snr_beamformer,
)
from .channel import (
    ChannelConstants,
    DriveConfig,
    OpticalFrontEnd,
    channel_constant,
    gain_full,
    gain_simplified,
    gain_vector,
    peak_snr,
)
from .errors import ConfigError, ConvergenceError, InfeasibleError, SingularGramError, VlcSecrecyError
from .geometry import (
    IntensityField,
    RoomConfig,
    TransmitterLayout,
    build_grid_layout,
    explicit_layout,
    nearest_transmitter,
    sample_ppp,
    sample_ue,
)
from .montecarlo import SopEstimate, TrialConfig, estimate_avg_ed_snr, estimate_sop, simulate_sop
from .scenario import Scenario
from .secrecy import (
    SecrecyThreshold,
    SopModel,
    build_sop_model,
    capacity_bounds,
    ed_snr_cdf,
    secrecy_capacity_bounds,
    sop_closed_form,
    ue_snr_cdf,
)
from .selection import SelectionResult, select_and_weight, selection_metrics

__version__ = "0.1.0"
