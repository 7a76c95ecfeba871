"""Simulator comparing codebook-based 5G NR beam management with
computer-vision-aided beam management for mmWave/THz downlinks."""

from .array import (
    ArrayGeometry,
    BeamWeights,
    Codebook,
    array_gain,
    best_codeword_genie,
    dft_codebook_upa,
    half_power_beamwidth,
    steering_vector_ula,
    steering_vector_upa,
)
from .channel import LinkBudget, los_channel, pathloss_inh_los, power_control, rsrp, snr_and_rate
from .config import ExperimentConfig, load_config
from .geometry import (
    CameraIntrinsics,
    CartesianPoint,
    DetectionFailure,
    DetectionRecord,
    LocalizationNoiseModel,
    SphericalPoint,
    apply_localization_noise,
    cartesian_to_spherical,
    detection_to_cartesian,
    localization_error_stats,
    spherical_to_cartesian,
)
from .protocol import (
    ProtocolConfig,
    SsbGrid,
    Strategy,
    csi_rs_refine,
    ledger_summary,
    run_5gbm_session,
    run_cvbm_session,
    ssb_sweep,
)

__version__ = "0.1.0"
