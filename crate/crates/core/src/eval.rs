//! Focus-token ranking: an LM-only proxy for the error rate on enhanced words.
//!
//! Each case pits a reference sentence against competitors that differ only
//! at the focus positions. A case is an error when the reference has no path
//! or any competitor scores at least as high.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::fst::Wfst;
use crate::grammar::GraphScorer;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankingCase {
    pub reference: Vec<String>,
    /// Indices into `reference` of the focus tokens.
    pub focus: Vec<usize>,
    pub competitors: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("case {0}: no focus positions")]
    NoFocus(usize),
    #[error("case {case}: focus index {index} is out of range")]
    FocusOutOfRange { case: usize, index: usize },
    #[error("case {case}: competitor {competitor} has a different length")]
    LengthMismatch { case: usize, competitor: usize },
    #[error("case {case}: competitor {competitor} differs at non-focus position {position}")]
    NonFocusDiffers {
        case: usize,
        competitor: usize,
        position: usize,
    },
}

impl RankingCase {
    pub fn validate(&self, case: usize) -> Result<(), CaseError> {
        if self.focus.is_empty() {
            return Err(CaseError::NoFocus(case));
        }
        if let Some(&index) = self.focus.iter().find(|&&i| i >= self.reference.len()) {
            return Err(CaseError::FocusOutOfRange { case, index });
        }
        for (competitor, c) in self.competitors.iter().enumerate() {
            if c.len() != self.reference.len() {
                return Err(CaseError::LengthMismatch { case, competitor });
            }
            let differs =
                (0..c.len()).find(|i| !self.focus.contains(i) && c[*i] != self.reference[*i]);
            if let Some(position) = differs {
                return Err(CaseError::NonFocusDiffers {
                    case,
                    competitor,
                    position,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Reference,
    Competitor(usize),
    /// Nothing in the case could be scored.
    NoPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub winner: Winner,
    pub error: bool,
    /// `None` when the reference has no path.
    pub reference_score: Option<f64>,
    /// Index and score of the best scoreable competitor.
    pub best_competitor: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub cases: Vec<CaseResult>,
}

impl EvalReport {
    pub fn errors(&self) -> usize {
        self.cases.iter().filter(|c| c.error).count()
    }

    /// Percentage of cases in error; 0 for an empty report.
    pub fn error_rate(&self) -> f64 {
        if self.cases.is_empty() {
            return 0.0;
        }
        self.errors() as f64 / self.cases.len() as f64 * 100.0
    }
}

fn score_words(scorer: &GraphScorer<'_>, words: &[String]) -> Option<f64> {
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    scorer.score(&refs).ok()
}

pub fn run_ranking(fst: &Wfst, cases: &[RankingCase]) -> Result<EvalReport, CaseError> {
    for (i, c) in cases.iter().enumerate() {
        c.validate(i)?;
    }
    let scorer = GraphScorer::new(fst);
    let results = cases
        .iter()
        .map(|case| {
            let reference_score = score_words(&scorer, &case.reference);
            let mut best_competitor: Option<(usize, f64)> = None;
            for (i, c) in case.competitors.iter().enumerate() {
                if let Some(s) = score_words(&scorer, c) {
                    if best_competitor.is_none_or(|(_, b)| s > b) {
                        best_competitor = Some((i, s));
                    }
                }
            }
            let (winner, error) = match (reference_score, best_competitor) {
                (None, None) => (Winner::NoPath, true),
                (None, Some((i, _))) => (Winner::Competitor(i), true),
                (Some(_), None) => (Winner::Reference, false),
                (Some(r), Some((i, c))) if c >= r => (Winner::Competitor(i), true),
                (Some(_), Some(_)) => (Winner::Reference, false),
            };
            CaseResult {
                winner,
                error,
                reference_score,
                best_competitor,
            }
        })
        .collect();
    Ok(EvalReport { cases: results })
}
