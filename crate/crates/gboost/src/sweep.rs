//! θ × ChNum grids of focus-token ranking runs.
//!
//! Every cell enhances its own copy of the pristine graph, so cells are
//! independent and run in parallel; results are collected in grid order and
//! the written reports are byte-identical across runs.

use gboost_core::{
    enhance_in_place, run_ranking, CaseError, EnhanceConfig, EvalReport, RankingCase, Wfst, Winner,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Every report says what it measures.
pub const PROXY_LABEL: &str = "focus-token error rate (%), an LM-only proxy: graph scores of references vs competitors, no acoustic decoding";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("theta list is empty")]
    NoThetas,
    #[error("ChNum list is empty")]
    NoChNums,
    #[error(transparent)]
    Case(#[from] CaseError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Report(EvalReport),
    /// Enhancement was rejected for this cell.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub theta: f64,
    pub chnum: usize,
    pub outcome: CellOutcome,
    /// Candidates that beat their own predictor arc.
    pub above_source: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub thetas: Vec<f64>,
    pub chnums: Vec<usize>,
    /// Row-major: all ChNum values for the first theta, then the next.
    pub cells: Vec<SweepCell>,
}

pub fn run_cell(
    fst: &Wfst,
    base: &EnhanceConfig,
    theta: f64,
    chnum: usize,
    cases: &[RankingCase],
) -> SweepCell {
    let mut g = fst.clone();
    let cfg = EnhanceConfig {
        theta,
        max_predictors: chnum,
        groups: base.groups.clone(),
    };
    let (outcome, above_source) = match enhance_in_place(&mut g, &cfg) {
        Ok(out) => match run_ranking(&g, cases) {
            Ok(r) => (CellOutcome::Report(r), out.above_source),
            Err(e) => (CellOutcome::Failed(e.to_string()), out.above_source),
        },
        Err(e) => (CellOutcome::Failed(e.to_string()), 0),
    };
    SweepCell {
        theta,
        chnum,
        outcome,
        above_source,
    }
}

pub fn sweep(
    fst: &Wfst,
    base: &EnhanceConfig,
    thetas: &[f64],
    chnums: &[usize],
    cases: &[RankingCase],
) -> Result<SweepGrid, SweepError> {
    if thetas.is_empty() {
        return Err(SweepError::NoThetas);
    }
    if chnums.is_empty() {
        return Err(SweepError::NoChNums);
    }
    for (i, c) in cases.iter().enumerate() {
        c.validate(i)?;
    }
    let coords: Vec<(f64, usize)> = thetas
        .iter()
        .flat_map(|&t| chnums.iter().map(move |&c| (t, c)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(t, c)| run_cell(fst, base, t, c, cases))
        .collect();
    Ok(SweepGrid {
        thetas: thetas.to_vec(),
        chnums: chnums.to_vec(),
        cells,
    })
}

fn rate(outcome: &CellOutcome) -> String {
    match outcome {
        CellOutcome::Report(r) => format!("{:.2}", r.error_rate()),
        CellOutcome::Failed(_) => "FAILED".into(),
    }
}

impl SweepGrid {
    pub fn cell(&self, theta_index: usize, chnum_index: usize) -> &SweepCell {
        &self.cells[theta_index * self.chnums.len() + chnum_index]
    }

    /// Rows theta, columns ChNum.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# {PROXY_LABEL}\ntheta");
        for c in &self.chnums {
            out.push_str(&format!("\tChNum={c}"));
        }
        out.push('\n');
        for (i, t) in self.thetas.iter().enumerate() {
            out.push_str(&t.to_string());
            for j in 0..self.chnums.len() {
                out.push('\t');
                out.push_str(&rate(&self.cell(i, j).outcome));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let cells = self
            .cells
            .iter()
            .map(|c| CellJson::new(Some(c.theta), Some(c.chnum), &c.outcome))
            .collect();
        to_json(cells)
    }
}

/// Reports for an unenhanced graph, in the same formats as a grid.
pub fn baseline_tsv(report: &EvalReport) -> String {
    format!(
        "# {PROXY_LABEL}\nbaseline\t{}\n",
        rate(&CellOutcome::Report(report.clone()))
    )
}

pub fn baseline_json(report: &EvalReport) -> String {
    to_json(vec![CellJson::new(
        None,
        None,
        &CellOutcome::Report(report.clone()),
    )])
}

fn to_json(cells: Vec<CellJson>) -> String {
    let doc = ReportJson {
        measure: PROXY_LABEL,
        cells,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ReportJson {
    measure: &'static str,
    cells: Vec<CellJson>,
}

#[derive(Serialize)]
struct CellJson {
    theta: Option<f64>,
    chnum: Option<usize>,
    error_rate: Option<f64>,
    failure: Option<String>,
    cases: Vec<CaseJson>,
}

#[derive(Serialize)]
struct CaseJson {
    index: usize,
    error: bool,
    /// "reference", "competitor" or "none"
    winner: &'static str,
    winning_competitor: Option<usize>,
    reference_score: Option<f64>,
    best_competitor_score: Option<f64>,
}

impl CellJson {
    fn new(theta: Option<f64>, chnum: Option<usize>, outcome: &CellOutcome) -> Self {
        match outcome {
            CellOutcome::Failed(msg) => CellJson {
                theta,
                chnum,
                error_rate: None,
                failure: Some(msg.clone()),
                cases: Vec::new(),
            },
            CellOutcome::Report(r) => CellJson {
                theta,
                chnum,
                error_rate: Some(r.error_rate()),
                failure: None,
                cases: r
                    .cases
                    .iter()
                    .enumerate()
                    .map(|(index, c)| {
                        let (winner, winning_competitor) = match c.winner {
                            Winner::Reference => ("reference", None),
                            Winner::Competitor(i) => ("competitor", Some(i)),
                            Winner::NoPath => ("none", None),
                        };
                        CaseJson {
                            index,
                            error: c.error,
                            winner,
                            winning_competitor,
                            reference_score: c.reference_score,
                            best_competitor_score: c.best_competitor.map(|(_, s)| s),
                        }
                    })
                    .collect(),
            },
        }
    }
}
