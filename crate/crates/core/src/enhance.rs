//! Similar-pair enhancement of target words in a grammar graph.
//!
//! Every word-labelled arc of a predictor word `y` yields a candidate arc for
//! each target word `x` between the same two states, weighted
//!
//! ```text
//! w_x = w_y + ln(f_x / (f_x + f_y)) + theta
//! ```
//!
//! with the log term dropped for new words. A candidate raises an existing
//! `x` arc on that slot to `max(current, candidate)` or becomes a new
//! parallel arc. Final weights and arcs of other words are never touched.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::diff::FstDiff;
use crate::error::{CountError, EnhanceError};
use crate::fst::{Arc, StateId, Wfst};
use crate::symbols::{Label, EPS_LABEL};

/// Training-data count of a target word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetCount {
    Seen(u64),
    /// Absent from training; the frequency ratio is dropped.
    New,
}

/// Enhanced log-probability of a target word borrowed from one predictor arc.
pub fn compute_enhanced_weight(
    predictor_weight: f64,
    target_count: TargetCount,
    predictor_count: u64,
    theta: f64,
) -> Result<f64, CountError> {
    if predictor_count == 0 {
        return Err(CountError::ZeroPredictor);
    }
    match target_count {
        TargetCount::New => Ok(predictor_weight + theta),
        TargetCount::Seen(0) => Err(CountError::ZeroTarget),
        TargetCount::Seen(fx) => {
            let ratio = fx as f64 / (fx as f64 + predictor_count as f64);
            Ok(predictor_weight + libm::log(ratio) + theta)
        }
    }
}

/// One high-frequency predictor list and the words it enhances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarPairGroup {
    /// In priority order; the first `max_predictors` are used.
    pub predictors: Vec<String>,
    pub targets: Vec<String>,
    pub frequencies: BTreeMap<String, u64>,
    pub new_words: BTreeSet<String>,
}

impl SimilarPairGroup {
    pub fn is_new(&self, target: &str) -> bool {
        self.new_words.contains(target)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    pub theta: f64,
    pub max_predictors: usize,
    pub groups: Vec<SimilarPairGroup>,
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<(), EnhanceError> {
        if !self.theta.is_finite() {
            return Err(EnhanceError::NonFiniteTheta(self.theta));
        }
        if self.max_predictors == 0 {
            return Err(EnhanceError::ZeroMaxPredictors);
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.predictors.is_empty() {
                return Err(EnhanceError::NoPredictors(i));
            }
            if g.targets.is_empty() {
                return Err(EnhanceError::NoTargets(i));
            }
        }
        Ok(())
    }
}

/// Every arc labelled `word` on input, in (state id, arc index) order.
pub fn collect_arcs(fst: &Wfst, word: Label) -> Vec<Arc> {
    fst.all_arcs()
        .filter(|a| a.ilabel == word)
        .copied()
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnhanceOutcome {
    pub diff: FstDiff,
    /// Candidates that came out more probable than the predictor arc they
    /// were derived from (only possible with positive theta).
    pub above_source: usize,
}

/// (label, frequency) of the predictors in use.
type Predictors = Vec<(Label, u64)>;

struct TargetPlan {
    label: Label,
    count: TargetCount,
    predictors: Predictors,
}

fn plan(
    fst: &mut Wfst,
    config: &EnhanceConfig,
) -> Result<(Vec<TargetPlan>, Vec<String>), EnhanceError> {
    config.validate()?;
    let syms = fst.symbols();
    let mut new_symbols: Vec<String> = Vec::new();
    let mut pending: Vec<(String, TargetCount, Predictors)> = Vec::new();
    // chained groups would let a second run borrow from arcs the first added
    let all_targets: BTreeSet<&String> = config
        .groups
        .iter()
        .flat_map(|g| g.targets.iter())
        .collect();
    for g in &config.groups {
        let mut predictors = Vec::new();
        for (rank, y) in g.predictors.iter().enumerate() {
            if !syms.in_vocabulary(y) {
                return Err(EnhanceError::UnknownPredictor(y.clone()));
            }
            let fy = g.frequencies.get(y).copied().unwrap_or(0);
            if fy == 0 {
                return Err(EnhanceError::PredictorFrequency(y.clone()));
            }
            if all_targets.contains(y) {
                return Err(EnhanceError::PredictorIsTarget(y.clone()));
            }
            if rank < config.max_predictors {
                predictors.push((syms.find(y).expect("checked above"), fy));
            }
        }
        for x in &g.targets {
            let count = if g.is_new(x) {
                // words appended by an earlier enhancement stay acceptable
                if syms.in_vocabulary(x) {
                    return Err(EnhanceError::NewWordInVocabulary(x.clone()));
                }
                if syms.find(x).is_none() && !new_symbols.contains(x) {
                    new_symbols.push(x.clone());
                }
                TargetCount::New
            } else {
                if !syms.in_vocabulary(x) {
                    return Err(EnhanceError::UnknownTarget(x.clone()));
                }
                match g.frequencies.get(x) {
                    None => return Err(EnhanceError::MissingTargetFrequency(x.clone())),
                    Some(0) => return Err(EnhanceError::ZeroTargetFrequency(x.clone())),
                    Some(&f) => TargetCount::Seen(f),
                }
            };
            pending.push((x.clone(), count, predictors.clone()));
        }
    }
    let syms = fst.symbols_mut();
    for w in &new_symbols {
        syms.add_new_word(w);
    }
    let plans = pending
        .into_iter()
        .map(|(x, count, predictors)| TargetPlan {
            label: syms.find(&x).expect("inserted above"),
            count,
            predictors,
        })
        .collect();
    Ok((plans, new_symbols))
}

/// Applies `config` to `fst` and returns the exact change set.
///
/// The graph is left untouched when validation fails.
pub fn enhance_in_place(
    fst: &mut Wfst,
    config: &EnhanceConfig,
) -> Result<EnhanceOutcome, EnhanceError> {
    let (plans, added_symbols) = plan(fst, config)?;

    let predictor_labels: HashSet<Label> = plans
        .iter()
        .flat_map(|p| p.predictors.iter().map(|&(l, _)| l))
        .collect();
    let target_labels: HashSet<Label> = plans.iter().map(|p| p.label).collect();

    // A(y) for every predictor and the existing target slots, in one scan
    let mut source_arcs: HashMap<Label, Vec<Arc>> = HashMap::new();
    let mut slots: HashMap<(StateId, StateId, Label), usize> = HashMap::new();
    for s in 0..fst.num_states() as StateId {
        for (i, a) in fst.arcs(s).iter().enumerate() {
            if a.ilabel == EPS_LABEL {
                continue;
            }
            if predictor_labels.contains(&a.ilabel) {
                source_arcs.entry(a.ilabel).or_default().push(*a);
            }
            if target_labels.contains(&a.ilabel) && a.olabel == a.ilabel {
                slots.entry((a.source, a.target, a.ilabel)).or_insert(i);
            }
        }
    }

    let mut original: BTreeMap<(StateId, usize), f64> = BTreeMap::new();
    let mut added: Vec<(StateId, usize)> = Vec::new();
    let mut above_source = 0;
    for p in &plans {
        for &(y, fy) in &p.predictors {
            let Some(arcs) = source_arcs.get(&y) else {
                continue;
            };
            for src in arcs {
                let cand = compute_enhanced_weight(src.weight, p.count, fy, config.theta)
                    .expect("counts validated in plan");
                if cand > src.weight {
                    above_source += 1;
                }
                match slots.get(&(src.source, src.target, p.label)) {
                    Some(&i) => {
                        let current = fst.arcs(src.source)[i].weight;
                        if cand > current {
                            original.entry((src.source, i)).or_insert(current);
                            fst.set_arc_weight(src.source, i, cand)
                                .expect("slot indexes an existing arc");
                        }
                    }
                    None => {
                        let i = fst
                            .add_arc(Arc::new(src.source, src.target, p.label, p.label, cand))
                            .expect("endpoints come from an existing arc");
                        slots.insert((src.source, src.target, p.label), i);
                        added.push((src.source, i));
                    }
                }
            }
        }
    }

    added.sort_unstable();
    let added_set: HashSet<(StateId, usize)> = added.iter().copied().collect();
    let diff = FstDiff {
        added_symbols,
        added_arcs: added.iter().map(|&(s, i)| fst.arcs(s)[i]).collect(),
        removed_arcs: Vec::new(),
        reweighted_arcs: original
            .iter()
            .filter(|(pos, _)| !added_set.contains(*pos))
            .map(|(&(s, i), &w)| {
                let after = fst.arcs(s)[i];
                let mut before = after;
                before.weight = w;
                (before, after)
            })
            .collect(),
        final_changes: Vec::new(),
    };
    Ok(EnhanceOutcome { diff, above_source })
}

/// Non-mutating form of [`enhance_in_place`].
pub fn enhance(fst: &Wfst, config: &EnhanceConfig) -> Result<(Wfst, FstDiff), EnhanceError> {
    let mut out = fst.clone();
    let outcome = enhance_in_place(&mut out, config)?;
    Ok((out, outcome.diff))
}

impl SimilarPairGroup {
    /// Convenience constructor for code and tests.
    pub fn new<P, T>(predictors: P, targets: T) -> Self
    where
        P: IntoIterator,
        P::Item: ToString,
        T: IntoIterator,
        T::Item: ToString,
    {
        Self {
            predictors: predictors.into_iter().map(|p| p.to_string()).collect(),
            targets: targets.into_iter().map(|t| t.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn with_frequency(mut self, word: &str, count: u64) -> Self {
        self.frequencies.insert(word.to_string(), count);
        self
    }

    pub fn with_new_word(mut self, word: &str) -> Self {
        self.new_words.insert(word.to_string());
        self
    }
}
