//! Back-off n-gram grammar graphs with similar-pair enhancement of
//! low-frequency and out-of-vocabulary words.
//!
//! The crate is `no_std` and only needs `alloc`. All weights are natural-log
//! probabilities: paths add weights, competing paths take the maximum.
//!
//! - [`arpa`] parses ARPA models and scores sentences by direct back-off.
//! - [`grammar`] compiles a model into a [`Wfst`] and scores greedily on it.
//! - [`enhance`] borrows predictor-word arcs to add or raise target-word arcs.
//! - [`diff`] computes exact structural deltas between graphs.
//! - [`eval`] ranks reference sentences against focus-token competitors.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arpa;
pub mod diff;
pub mod enhance;
pub mod error;
pub mod eval;
pub mod fst;
pub mod grammar;
pub mod symbols;

pub use arpa::{oracle_score, parse_arpa, NGramEntry, NGramModel};
pub use diff::{diff, FinalChange, FstDiff};
pub use enhance::{
    collect_arcs, compute_enhanced_weight, enhance, enhance_in_place, EnhanceConfig,
    EnhanceOutcome, SimilarPairGroup, TargetCount,
};
pub use error::{
    ArpaError, ArpaErrorKind, CountError, DiffError, EnhanceError, FstError, ScoreError,
    SymbolError,
};
pub use eval::{run_ranking, CaseError, CaseResult, EvalReport, RankingCase, Winner};
pub use fst::{Arc, ArcIndex, StateId, Wfst};
pub use grammar::{build_g, graph_score, GraphScorer, HistoryStateMap};
pub use symbols::{Label, SymbolTable, EPS_LABEL, EPS_SYMBOL};
