//! The rewriting calculus: terms whose abstractions are rewrite rules,
//! whose application is explicit, and whose results are sets. This crate
//! provides the term model, syntactic matching, capture-avoiding
//! substitution, the strategy-gated small-step evaluator with a reduction
//! graph explorer, the strategy combinators up to innermost/outermost
//! normalization, a simple type checker, the explicit-substitution
//! (de Bruijn) variant, and translations from lambda-terms and rewriting
//! derivations.

pub mod combinators;
pub mod debruijn;
pub mod encodings;
pub mod eval;
pub mod gate;
pub mod matching;
pub mod subst;
pub mod syntax;
pub mod term;
pub mod typing;

pub use eval::{normalize, reduction_graph, step, NormalizeKind, ReductionConfig};
pub use gate::StrategyGate;
pub use term::{Position, Signature, Term};
