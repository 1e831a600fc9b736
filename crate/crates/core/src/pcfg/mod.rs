//! Probabilistic context-free grammars as random labelled branching trees.

mod extended;
mod grammar;
mod parse;
mod tree;

pub use extended::{extended_state_check, CellTest, ExtendedStateReport};
pub use grammar::{spectral_radius, LabelSpec, Pcfg, ValidationReport};
pub use parse::{count_parses, inside, viterbi_parse, InsideResult, ViterbiParse, DEFAULT_UNARY_CAP};
pub use tree::{
    sample_tree, sample_tree_with, tree_log_prob, ParseTree, TreeLogProb, TreeNode, ZeroLocation, MAX_TREE_VERTICES,
};
