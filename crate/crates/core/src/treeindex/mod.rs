//! Dyadic trees and ordinal indices.
//!
//! Positive integers double as nodes of the dyadic tree through their binary
//! expansions; `m ⊏̇ n` when the expansion of `m` is a strict prefix of that of `n`.

mod dyadic;
mod level;
mod relation;
mod tree;

pub use dyadic::{
    branch, concat, dotprec, dotpreceq, lambda_of, left_set, level_set, right_set, tree_upto, DyadicString,
};
pub use level::{delta_membership, disjoint_lift, level_prec, Carriers, DeltaReport, DenseLevel, LevelVector};
pub use relation::{h_index, relation_map_check, FiniteRelation, HIndex, RelationMapReport};
pub use tree::{build_t_alpha, embed_cfre, tree_rank, CfreTree, OrdinalCNF, Truncation, MAX_TREE_NODES};
