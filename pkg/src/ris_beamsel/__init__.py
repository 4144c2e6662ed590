"""RIS-aided mmWave MIMO link simulation and codeword selection.

Synthesizes Rician channels through a reconfigurable intelligent surface,
builds ideal and practical-amplitude DFT codebooks, computes SVD-precoded
achievable rates, labels realizations by exhaustive search, and trains a
from-scratch MLP that predicts the best codeword directly from channel
features.
"""

from .channel import (
    ChannelPair,
    LinkGeometry,
    PathAngles,
    SystemConfig,
    path_loss_linear,
    rx_channel,
    sample_channel_pair,
    sample_path_angles,
    steering_vector,
    tx_channel,
)
from .codebook import (
    Codebook,
    RisProfile,
    amplitude_response,
    build_ideal_codebook,
    build_practical_codebook,
    label_layout_hash,
    load_codebook,
    ris_response_matrix,
    save_codebook,
)
from .dataset import Dataset, LabeledSample, read_dataset, write_dataset
from .harness import (
    ExperimentConfig,
    default_config,
    evaluate_schemes,
    generate_dataset,
    generate_training_dataset,
    load_config,
    run_rate_vs_distance,
    run_rate_vs_elements,
    run_timing_benchmark,
    runtime_for,
    train_model,
)
from .mlp import (
    MlpArchitecture,
    MlpModel,
    TrainingConfig,
    adam_step,
    architecture_for,
    backward,
    cross_entropy,
    forward,
    init_model,
    load_model,
    one_hot,
    predict_batch,
    predict_codeword,
    save_model,
    train,
)
from .precoding import (
    EffectiveChannel,
    FeatureMatrix,
    SelectionResult,
    achievable_rate_det,
    achievable_rate_svd,
    calibration_scale,
    codeword_rates,
    effective_channel,
    exhaustive_search,
    feature_matrix,
    feature_vector,
    random_select,
)

__version__ = "0.1.0"
