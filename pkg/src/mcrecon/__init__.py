"""Multichannel interpolation of periodic signals from noisy samples."""

from .harness import (
    ExperimentConfig,
    ExperimentResult,
    PipelineStats,
    compare_pipelines,
    config_from_file,
    convergence_sweep,
    run_experiment,
    run_trial,
    thread_count,
    timing_report,
    validate_pipeline,
    write_csv,
    write_json,
    write_overlay,
    write_plot_data,
)
from .interpolate import (
    InterpolationKernel,
    aliasing_error,
    biorthogonality_residual,
    build_channel_matrix,
    interpolation_coefficients,
    interpolation_consistency_check,
    mci_coefficients,
    reconstruct_direct,
    reconstruct_fft,
)
from .noise import (
    NoiseErrorReport,
    emse_closed_form,
    emse_factor,
    phi1_minimum_closed_form,
    postfilter_dirichlet_emse,
    tail_energy_bound,
)
from .postfilter import (
    PostFilterDesign,
    apply_post_filter,
    optimal_post_filter,
    phi1,
    select_band,
)
from .prefilter import (
    PreFilterDesign,
    apply_pre_filter,
    mci_with_prefilter,
    optimal_pre_filter,
    phi2,
    realify_matrix,
    realify_vector,
)
from .psd import (
    DftDomainSamples,
    PsdEstimate,
    assemble_d,
    build_B,
    estimate_psd,
    psd_mse,
)
from .regularize import (
    AdmmOptions,
    RegularizerConfig,
    SynthesisSystem,
    build_system,
    group_shrinkage,
    l1_solve,
    l2_solve,
    pair_permutation,
)
from .schemes import (
    Channel,
    ChannelBank,
    SchemeTag,
    bank_from_config,
    channel_response,
    channel_samples,
    closed_form_r,
    scheme_band,
    scheme_bank,
)
from .signals import RationalSignal, test_signal
from .spectrum import (
    BandIndexSet,
    FourierSpectrum,
    MultichannelSamples,
    NoiseModel,
    SampleGrid,
    synthesize,
    synthesize_on_grid,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmOptions",
    "BandIndexSet",
    "Channel",
    "ChannelBank",
    "DftDomainSamples",
    "ExperimentConfig",
    "ExperimentResult",
    "FourierSpectrum",
    "InterpolationKernel",
    "MultichannelSamples",
    "NoiseErrorReport",
    "NoiseModel",
    "PipelineStats",
    "PostFilterDesign",
    "PreFilterDesign",
    "PsdEstimate",
    "RationalSignal",
    "RegularizerConfig",
    "SampleGrid",
    "SchemeTag",
    "SynthesisSystem",
    "aliasing_error",
    "apply_post_filter",
    "apply_pre_filter",
    "assemble_d",
    "bank_from_config",
    "biorthogonality_residual",
    "build_B",
    "build_channel_matrix",
    "build_system",
    "channel_response",
    "channel_samples",
    "closed_form_r",
    "compare_pipelines",
    "config_from_file",
    "convergence_sweep",
    "emse_closed_form",
    "emse_factor",
    "estimate_psd",
    "group_shrinkage",
    "interpolation_coefficients",
    "interpolation_consistency_check",
    "l1_solve",
    "l2_solve",
    "mci_coefficients",
    "mci_with_prefilter",
    "optimal_post_filter",
    "optimal_pre_filter",
    "pair_permutation",
    "phi1",
    "phi1_minimum_closed_form",
    "phi2",
    "postfilter_dirichlet_emse",
    "psd_mse",
    "realify_matrix",
    "realify_vector",
    "reconstruct_direct",
    "reconstruct_fft",
    "run_experiment",
    "run_trial",
    "scheme_band",
    "scheme_bank",
    "select_band",
    "synthesize",
    "synthesize_on_grid",
    "tail_energy_bound",
    "test_signal",
    "thread_count",
    "timing_report",
    "validate_pipeline",
    "write_csv",
    "write_json",
    "write_overlay",
    "write_plot_data",
]
