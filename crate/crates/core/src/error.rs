use alloc::string::String;

use thiserror::Error;

use crate::fst::StateId;
use crate::symbols::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("symbol table must map <eps> to label 0")]
    MissingEpsilon,
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("labels are not dense: label {0} is missing")]
    LabelGap(Label),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FstError {
    #[error("state {0} does not exist")]
    InvalidState(StateId),
    #[error("label {0} is not in the symbol table")]
    InvalidLabel(Label),
    #[error("weight {0} is not finite")]
    NonFiniteWeight(f64),
    #[error("graph has no initial state")]
    NoInitialState,
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("epsilon is not a valid input symbol")]
    EpsilonInput,
    #[error("epsilon cycle with positive weight through state {0}")]
    PositiveEpsilonCycle(StateId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("graphs use different symbol tables")]
    SymbolTableMismatch,
    #[error("state counts differ ({before} vs {after})")]
    StateCountMismatch { before: usize, after: usize },
    #[error("initial states differ ({before:?} vs {after:?})")]
    InitialStateMismatch {
        before: Option<StateId>,
        after: Option<StateId>,
    },
}

/// What went wrong while parsing an ARPA file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArpaErrorKind {
    #[error("missing \\data\\ header")]
    MissingHeader,
    #[error("missing \\end\\ marker")]
    MissingEnd,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("header declares {declared} {order}-grams but {found} were listed")]
    CountMismatch {
        order: usize,
        declared: usize,
        found: usize,
    },
    #[error("no count declared for {0}-grams")]
    UndeclaredOrder(usize),
    #[error("history of n-gram {0:?} is not listed")]
    MissingHistory(String),
    #[error("duplicate n-gram {0:?}")]
    Duplicate(String),
    #[error("log-probability {0} is positive")]
    PositiveLogProb(f64),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("{0:?} may only appear as context")]
    StartPredicted(String),
    #[error("{0:?} may only appear as a predicted word")]
    EndInHistory(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("ARPA line {line} ({section}): {kind}")]
pub struct ArpaError {
    pub line: usize,
    pub section: String,
    pub kind: ArpaErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("word {0:?} is out of vocabulary and the model has no <unk>")]
    UnknownWord(String),
    #[error("sentence boundary token {0:?} inside a sentence")]
    BoundaryToken(String),
    #[error("no path for word {word:?} at position {position}")]
    NoPath { word: String, position: usize },
    #[error("graph has no initial state")]
    NoInitialState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnhanceError {
    #[error("theta {0} is not finite")]
    NonFiniteTheta(f64),
    #[error("max_predictors must be at least 1")]
    ZeroMaxPredictors,
    #[error("group {0} has no predictors")]
    NoPredictors(usize),
    #[error("group {0} has no targets")]
    NoTargets(usize),
    #[error("predictor {0:?} is not in the vocabulary")]
    UnknownPredictor(String),
    #[error("predictor {0:?} needs a positive frequency")]
    PredictorFrequency(String),
    #[error("target {0:?} is marked new but is already in the vocabulary")]
    NewWordInVocabulary(String),
    #[error("target {0:?} is not in the vocabulary; mark it as new")]
    UnknownTarget(String),
    #[error("target {0:?} has no frequency; give a count or mark it as new")]
    MissingTargetFrequency(String),
    #[error("target {0:?} has zero count; declare it new or give a pseudo-count")]
    ZeroTargetFrequency(String),
    #[error("word {0:?} is both a predictor and a target")]
    PredictorIsTarget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("predictor frequency must be positive")]
    ZeroPredictor,
    #[error("existing target with zero count; declare it new or give a pseudo-count")]
    ZeroTarget,
}
