//! Symbolic points of the full shift on two symbols built from Morse blocks,
//! with exact distance arithmetic and finite-horizon estimates of the
//! distributional chaos functions.

mod error;

pub mod chaos;
pub mod constructions;
pub mod dyadic;
pub mod oracle;
pub mod report;
pub mod symseq;
pub mod words;

pub use chaos::{
    classify_tuple, estimate_df, estimate_df_at, shifted_pair_distality, Classification, ClassifyConfig,
    DeltaGrid, DistributionEstimate, Engine, EstimateOptions, Precision, TupleVerdict,
};
pub use constructions::{
    alpha_code, point_lemma1, point_remark3, point_theorem1, point_theorem2, shift_exponent_rn,
    validate_gaps, w_set_member, AlphaCode, Descriptor, GapReport, GapSequence,
};
pub use dyadic::Dyadic;
pub use oracle::{
    alpha_difference_count, exact_pair_counts, verify_lemma1, verify_property_p, verify_step2_window, CheckReport,
};
pub use error::{Error, Result};
pub use symseq::{morse_point, prefix, shift, truncated_distance, SymbolicPoint, TruncatedDistance};
pub use words::{complement, concat, find_bbb_pattern, find_cube, morse_block, Witness, Word};
