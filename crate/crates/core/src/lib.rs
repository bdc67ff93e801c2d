//! Dependency treewidth for quantified Boolean formulas: parsing, dependency
//! posets, elimination orderings and tree decompositions, the dependency
//! cops-and-robber game, a chain-partition search, a Davis–Putnam solver
//! that emits Q-resolution refutations, and an independent proof checker.

pub mod chain;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod families;
pub mod game;
pub mod graph;
pub mod oracle;
pub mod poset;
pub mod proof;
pub mod qbf;

pub use decomp::{DependencyTreeDecomposition, EliminationOrdering};
pub use error::{Error, Result};
pub use graph::PrimalGraph;
pub use poset::DependencyPoset;
pub use qbf::{parse_qdimacs, Clause, Literal, QbfInstance, Quantifier, Var};
