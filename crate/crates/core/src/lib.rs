#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod harness;
pub mod init;
pub mod problems;
pub mod rng;
pub mod sizing;
pub mod tree;
pub mod treesize;
