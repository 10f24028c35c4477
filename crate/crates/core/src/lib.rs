// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ctmc;
pub mod distribution;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod family;
pub mod newick;
pub mod rng;
pub mod tkf91;
pub mod tree;
pub mod treechain;
