"""Delay-Doppler waveform toolkit: multicarrier modems over doubly-dispersive
channels, link-level Monte Carlo, and integrated sensing estimators."""

from .channel import (
    ChannelConfig,
    ChannelRealization,
    PathParams,
    channel_matrix,
    dvirf_points,
    mimo_channel,
    realization_from_points,
    sample_paths,
    single_path_matrix,
    time_domain_apply,
    tvtf,
)
from .config import ConfigError, ScenarioConfig, load_config
from .core import (
    AfdmChirpPhase,
    ZeroPhase,
    chirp_matrix,
    cp_phase_matrix,
    cyclic_shift_matrix,
    daft_matrix,
    dft_matrix,
    doppler_diagonal,
)
from .link import (
    Constellation,
    LinkResult,
    SingularChannelError,
    add_awgn,
    demap_symbols,
    equalize_lmmse,
    equalize_zf,
    map_bits,
    run_ber_point,
)
from .modem import (
    AfdmSpec,
    OfdmSpec,
    OtfsSpec,
    WaveformSpec,
    afdm_orthogonality_ok,
    afdm_tune,
    demodulate,
    effective_channel,
    measure_papr,
    modulate,
    otfs_orthogonality_ok,
    predict_support,
    prepend_cp,
)
from .sensing import (
    LIGHT_SPEED,
    DelayDopplerMap,
    RadarTargetEstimate,
    SensingErrors,
    ambiguity_map,
    direct_csi_extract,
    indirect_csi_ml,
    matched_filter_map,
    radar_convert,
    radar_invert,
    sensing_rmse,
)

__version__ = "0.1.0"

__all__ = [
    "AfdmChirpPhase",
    "AfdmSpec",
    "ChannelConfig",
    "ChannelRealization",
    "ConfigError",
    "Constellation",
    "DelayDopplerMap",
    "LIGHT_SPEED",
    "LinkResult",
    "OfdmSpec",
    "OtfsSpec",
    "PathParams",
    "RadarTargetEstimate",
    "ScenarioConfig",
    "SensingErrors",
    "SingularChannelError",
    "WaveformSpec",
    "ZeroPhase",
    "add_awgn",
    "afdm_orthogonality_ok",
    "afdm_tune",
    "ambiguity_map",
    "channel_matrix",
    "chirp_matrix",
    "cp_phase_matrix",
    "cyclic_shift_matrix",
    "daft_matrix",
    "demap_symbols",
    "demodulate",
    "dft_matrix",
    "direct_csi_extract",
    "doppler_diagonal",
    "dvirf_points",
    "effective_channel",
    "equalize_lmmse",
    "equalize_zf",
    "indirect_csi_ml",
    "load_config",
    "map_bits",
    "matched_filter_map",
    "measure_papr",
    "mimo_channel",
    "modulate",
    "otfs_orthogonality_ok",
    "predict_support",
    "prepend_cp",
    "radar_convert",
    "radar_invert",
    "realization_from_points",
    "run_ber_point",
    "sample_paths",
    "sensing_rmse",
    "single_path_matrix",
    "time_domain_apply",
    "tvtf",
]
