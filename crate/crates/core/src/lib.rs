//! Computational toolkit for complemented subspaces of `L^p`.
//!
//! * [`seqspace`]: weighted sequence-space norms and weight classification.
//! * [`blockbasis`]: block bases, norm-one projections and unit-ball suprema.
//! * [`stepfn`]: exact integration of step functions on finite product spaces.
//! * [`randvar`]: moment inequalities for independent families, exact and Monte Carlo.
//! * [`treeindex`]: dyadic trees, ordinal indices of finite relations, level vectors.
//! * [`suite`]: the property suite shared by the acceptance tests and the CLI.

pub mod blockbasis;
pub mod error;
pub mod optim;
pub mod randvar;
pub mod seqspace;
pub mod stepfn;
pub mod suite;
pub mod treeindex;

pub use error::{Error, Result};
