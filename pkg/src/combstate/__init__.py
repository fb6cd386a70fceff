"""Power spectral density and mixed quantum state of a noisy frequency comb."""

from .linefit import LineFit, fit_lines
from .oracle import (
    OracleReport,
    SampleDraw,
    SignalSpec,
    TimeSignal,
    autocorrelation,
    block_generator,
    epsilon_estimate,
    mc_psd,
    periodogram,
    sample_params,
    synth_pulse_train,
    wiener_khintchine_residual,
)
from .spectral import (
    CoherenceFunction,
    CombParams,
    DeltaComb,
    EnvelopeModel,
    FrequencyGrid,
    SpectralDensity,
    TruncationPolicy,
    delta_comb,
    envelope_eval,
    line_component,
    mutual_coherence,
    normalize,
    one_sided,
    psd_analytic,
    truncation_bounds,
)
from .state import (
    DiagonalDensityMatrix,
    MixedCoherentState,
    SigmaOperator,
    TensorPowerState,
    coherence_time,
    n_photon_trace_moment,
    photon_number_pmf,
    purity,
    sigma_operator,
    single_photon_state,
)

__version__ = "0.1.0"
