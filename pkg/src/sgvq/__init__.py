"""Shape-gain quantized channel feedback for multiuser MIMO precoding.

The package splits a feedback vector into gain (magnitude) and shape
(direction), quantizes the two with separate codebooks, derives high-rate
distortion laws for both, allocates a bit budget optimally between them, and
feeds the reconstructed channel into a minimum sum-MSE linear precoder.  A
Monte Carlo engine and a CLI reproduce the distortion, SMSE, BER, and CCDF
studies end to end.
"""

from .allocation import (
    BitAllocation,
    DistortionModel,
    asymptotic_allocation,
    distortion_at_optimum,
    distortion_scaling_constant,
    fit_constants_empirical,
    optimal_integer_allocation,
    optimal_real_allocation,
    total_distortion,
)
from .channel import (
    EffectiveChannel,
    EigenMode,
    EigenStats,
    SystemConfig,
    dominant_modes,
    effective_channel,
    estimate_eigen_stats,
    sample_channel,
    stream_vectors,
)
from .config import ExperimentSpec, parse_experiment_file, parse_experiment_text
from .gain import (
    GainCodebook,
    GainDistortionModel,
    GainPdfParams,
    analytic_gain_distortion,
    empirical_gain_distortion,
    eigenvalue_pdf,
    gain_pdf,
    kg_constant,
    load_gain_codebook,
    params_from_stats,
    quantize_gain,
    save_gain_codebook,
    third_power_norm,
    train_gain_codebook,
)
from .modulation import (
    Modulation,
    demodulate_16qam,
    demodulate_qpsk,
    get_modulation,
    modulate_16qam,
    modulate_qpsk,
)
from .precoder import (
    NoiseModel,
    PrecoderSolution,
    QuantizedCSI,
    build_J,
    downlink_power,
    mmse_precoder,
    optimize_virtual_uplink_power,
    predicted_smse,
    projected_gradient_norm,
    smse_gradient,
)
from .shape import (
    ShapeCodebook,
    ShapeDistortionModel,
    analytic_shape_distortion,
    angle_from_sqdist,
    approx_min_ccdf,
    approx_min_ccdf_smallangle,
    ball_coefficient,
    cap_area,
    empirical_shape_distortion,
    exact_min_ccdf,
    generate_shape_codebook,
    ks_constant,
    load_shape_codebook,
    quantize_shape,
    save_shape_codebook,
    shape_distortion_series,
)
from .sim import (
    SweepReport,
    TrialResult,
    allocate_report,
    ccdf_compare,
    fitted_distortion_model,
    link_sweep,
    quantize_csi,
    run_downlink_trial,
    sweep_ber,
    sweep_bit_allocation,
    sweep_smse,
    train_codebooks,
    trial_stream,
)

__version__ = "0.1.0"
