"""Exact and empirical equidistribution toolkit.

Integer sets with computable densities, self-similar measures on [0,1],
digit-reversal and rotation sequences, nested residue decompositions, a
discrepancy harness, and Darboux-envelope integrability verdicts with
adversarial envelope-chasing sequences.
"""

__version__ = "0.1.0"

from .decomposition import (
    InducedPointMap,
    NestedDecomposition,
    UnsupportedGeneratorError,
    UnsupportedSplitError,
    darboux_split,
    digit_reversal,
    preimage_of_cell,
    residue_decomposition,
    verify_decomposition,
)
from .density import (
    AdditivityReport,
    BuckReport,
    ConstantWeights,
    CustomWeights,
    DensityEstimate,
    DisjointnessError,
    InvalidWeightError,
    LogWeights,
    additivity_witness,
    buck_density,
    estimate_asymptotic_density,
    estimate_uniform_density,
    estimate_weighted_density,
    is_buck_measurable,
    tail_checkpoints,
)
from .generators import (
    CantorCode,
    Constant,
    FactorialSchedule,
    Interleaved,
    Kronecker,
    RadicalInverse,
    SequenceGenerator,
    Transport,
    generator_from_json,
    generator_to_json,
)
from .harness import (
    ExplicitList,
    Identity,
    IndexSequence,
    Shifted,
    density_along_sequence,
    discrepancy_report,
    function_average,
    interval_check,
    ks_curve,
    ks_distance,
    star_discrepancy,
    weyl_magnitude,
    weyl_sum,
)
from .intsets import (
    AP,
    Bitmask,
    BlockUnion,
    Complement,
    Difference,
    Finite,
    Intersection,
    IntegerSet,
    NotRepresentableError,
    PeriodicForm,
    Union,
    count_below,
    counts_at,
    periodic_form,
    pnf_or_none,
    spec_from_json,
    spec_to_json,
)
from .measures import (
    BinomialMeasure,
    CantorMeasure,
    IncompatibleCellError,
    Measure,
    MultinomialMeasure,
    QadicCell,
    UniformMeasure,
    level_mass_sum,
    measure_from_json,
    measure_to_json,
)
from .riemann import (
    Affine,
    ConstantFn,
    ConstructionError,
    CustomFunction,
    DyadicRationals,
    EnvelopeChaser,
    FullInterval,
    IndicatorOfDyadics,
    IndicatorOfInterval,
    IntegrabilityVerdict,
    Rationals,
    StepFunction,
    adversarial_pair,
    block_ends,
    cesaro_trace,
    domain_from_name,
    function_from_json,
    function_to_json,
    integrability_verdict,
    simplest_between,
)
