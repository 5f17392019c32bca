"""entcap: detection capability of entanglement criteria on induced-measure states.

Samples random bipartite density matrices, evaluates a catalog of
entanglement-detection criteria on them, estimates detection capabilities
with confidence intervals, and compares against closed-form tail bounds.
"""

from .bounds import (
    BoundResult,
    adaptive_bound,
    ew_bound,
    ew_set_bound,
    faithful_ratio_bound,
    param_ew_bound,
    positive_map_bound,
    single_copy_bound,
    spectrum_bound,
)
from .capability import (
    CapabilityEstimate,
    DecayFit,
    EstimateConfig,
    InsufficientDataError,
    NoThresholdError,
    SweepRow,
    ThresholdResult,
    estimate,
    fit_decay_slope,
    sweep,
    threshold_kth,
)
from .criteria import (
    CriterionSpec,
    DetectionOutcome,
    InvalidMomentsError,
    Witness,
    WitnessCheck,
    detect,
    e4,
    faithful_witness,
    ppt_witness,
    pt_moment3,
    qfi,
    realignment_moments,
    validate_witness_alpha,
    witness_alpha,
)
from .quantum import (
    DensityMatrix,
    HermitianObservable,
    InvalidInputError,
    PureStateVector,
    Spectrum,
    expectation,
    hermitian_eigs,
    multicopy_swap_expectation,
    partial_trace,
    partial_transpose,
    realign,
)
from .sampling import (
    GinibreMatrix,
    SeedSpec,
    ginibre,
    gue_observable,
    haar_unitary,
    induced_state,
    random_max_entangled,
    random_pure_state,
)
from .tolerances import TOL, Tolerances

__version__ = "0.1.0"
