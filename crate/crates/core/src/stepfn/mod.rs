//! Step functions on finite products of `[0,1)` and `{0,1}`, integrated exactly.
//!
//! Binary operations refine both operands to the coarsest common grid,
//! so every integral is a finite sum over cells.

mod function;
mod ops;
mod space;

pub use function::{StepFunction, DEFAULT_MAX_CELLS};
pub use ops::{
    branch_project, cond_expect, disjoint_sum, dyadic_level, haar_decompose, haar_decompose_natural, lift,
    s_projection, squeeze, DesignatedSpan,
};
pub use space::{CoordKind, Coordinate, CoordinateSpace, CUT_TOL};
