"""lambda-lab: exact dyadic experiments with translated-sum series.

The package evaluates series of the form sum over points of f(x + point)
with bit-exact dyadic arithmetic: lattice point sets with closed-form
window counts, step-function witnesses with a positivity/clip/quantize
pipeline, reproducible counter-based randomization of indicator witnesses,
random thinning of point sets with exact deletion-event probabilities,
dyadic translate-count density profiles, and a weighted construction whose
divergence/convergence claims are verified by exact inequality chains.
"""

__version__ = "0.1.0"

from .dyadic import (
    Dyadic,
    DyadicInterval,
    ceil_to_grid,
    compare,
    floor_to_grid,
)
from .errors import (
    ClaimVerificationError,
    DyadicOverflowError,
    GeneratorExhaustedError,
    InsufficientLambdaError,
    LambdaLabError,
    NestedThinningError,
    ParseError,
    RefinementError,
    WindowTooLargeError,
)
from .sampling import bernoulli, bernoulli_pow2, mix64
from .sets import (
    DyadicBlockSet,
    ExplicitSet,
    GapStats,
    LambdaSet,
    LogIntegerSet,
    ThinnedSet,
    count_in,
    density_bound_check,
    dyadic_ladder,
    empty_window_probability,
    empty_window_series,
    enumerate_range,
    enumeration_cap,
    from_descriptor,
    lacunarity_scan,
    powers_of_two,
    simulate_gap_events,
    thin,
)
from .weights import (
    Exp2Rational,
    GeometricWeights,
    OnesWeights,
    SuperExpWeights,
    TableWeights,
    WeightSeq,
    parse_weights,
)
from .witness import (
    PiecewiseWitness,
    SumTrajectory,
    add_positive_floor,
    classify_trajectory,
    clip_at_one,
    eval_witness,
    indicator,
    modification_series_check,
    partial_sum,
    quantize_level,
    quantize_to_powers,
    simplify_to_intervals,
)
from .randwit import (
    RandomWitness,
    RefinedPartition,
    ensemble_report,
    hit_statistics,
    indicator_frequencies,
    refine_partition,
)
from .density import (
    DensityProfile,
    DyadicSet,
    TranslateCount,
    density_profile,
    translate_count,
)
from .ctype import (
    ConstructionBlock,
    FastDecayReport,
    WeightedConstruction,
    build_construction,
    check_fast_decay,
    rescale_for_weights,
    summable_weights_check,
    verify_claim_convergence,
    verify_claim_divergence,
    verify_transfer_domination,
)
