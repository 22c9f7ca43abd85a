"""Four-dimensional direct-detection receiver simulation toolkit."""

__version__ = "0.1.0"

from .constellation import (
    FourDSymbol,
    RingPhaseConstellation,
    balanced_delta_sq,
    build_constellation,
    pilot_symbol,
    snr_to_noise_sigma_sq,
)
from .channel import (
    ChannelMatrix,
    JonesPair,
    StokesMap,
    add_noise,
    apply_channel,
    fading_coefficient,
    invert_stokes_map,
    recover_gamma,
    sample_channel,
    stokes_map,
)
from .frontend import DVector, FrontEndObservation, front_end, observation_to_dr
from .detection import (
    DetectionResult,
    Hypothesis,
    LikelihoodTerms,
    MappedAlphabet,
    SymbolIndices,
    decisions_to_e_domain,
    detect_sequence,
    detect_successive,
    detect_symbol,
    joint_likelihood,
    log_i0,
    phase_likelihood,
    radii_likelihood,
)
from .harness import (
    ExperimentConfig,
    GapEntry,
    RatePoint,
    SerPoint,
    compare_successive_gap,
    run_rate_sweep,
    run_ser_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
