//! Exact norms of the finite-dimensional weighted sequence spaces.
//!
//! Every norm here is a maximum (or an `l^p` sum) of closed-form
//! expressions; [`NormReport`] records each competing term.

mod classify;
mod norms;
mod tensor;
mod weights;

pub use classify::{
    block_harmonic_weights, canonical_weights, classify_weights, CanonicalCase, ClassificationReport,
    ThresholdSum, WeightCase,
};
pub use norms::{
    bp_block_weight, bp_norm, ell2w_inner, lp_norm, mixed_p2w_norm, subset_label, tensor_norm,
    tensor_norm_capped, weighted_l2_norm, xpw_norm, xpw_norm_slice, BpBlock, NormReport, BRANCH_L2W,
    BRANCH_LP, DEFAULT_MAX_TENSOR_RANK,
};
pub use tensor::CoefficientTensor;
pub(crate) use weights::check_exponent;
pub use weights::{conjugate_index, mass_exponent, Tail, WeightSequence};
