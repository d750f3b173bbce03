//! Compiles a back-off n-gram model into a grammar graph and scores
//! sentences on it.
//!
//! One state per n-gram history that is used as context (it is the prefix of
//! a longer n-gram or lists a back-off weight), plus the empty-history root
//! and a single final state reached through `</s>` arcs. Every history state
//! carries exactly one epsilon arc to its longest proper suffix state.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::arpa::{NGramModel, BOS, EOS, UNK};
use crate::error::{FstError, ScoreError};
use crate::fst::{Arc, ArcIndex, StateId, Wfst};
use crate::symbols::{Label, EPS_LABEL};

#[derive(Debug, Clone)]
pub struct HistoryStateMap {
    states: BTreeMap<Vec<Label>, StateId>,
    start: StateId,
    root: StateId,
    final_state: StateId,
    order: usize,
}

impl HistoryStateMap {
    pub fn state(&self, history: &[Label]) -> Option<StateId> {
        self.states.get(history).copied()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    /// The empty-history (unigram) state.
    pub fn root(&self) -> StateId {
        self.root
    }

    pub fn final_state(&self) -> StateId {
        self.final_state
    }

    /// Number of history states, root included.
    pub fn num_histories(&self) -> usize {
        self.states.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Label], StateId)> + '_ {
        self.states.iter().map(|(h, &s)| (h.as_slice(), s))
    }

    /// State of the longest suffix of `seq` (after truncation to order - 1)
    /// that has a state.
    pub fn longest_suffix_state(&self, seq: &[Label]) -> StateId {
        let keep = self.order - 1;
        let mut h = &seq[seq.len().saturating_sub(keep)..];
        loop {
            if let Some(&s) = self.states.get(h) {
                return s;
            }
            h = &h[1..];
        }
    }
}

pub fn build_g(model: &NGramModel) -> Result<(Wfst, HistoryStateMap), FstError> {
    let order = model.order();
    let vocab = model.vocab();
    let bos = vocab.find(BOS);
    let eos = vocab.find(EOS);

    let mut fst = Wfst::new(vocab.clone());
    let root = fst.add_state();
    let mut states: BTreeMap<Vec<Label>, StateId> = BTreeMap::new();
    states.insert(Vec::new(), root);
    // (history, back-off weight) in creation order
    let mut histories: Vec<(Vec<Label>, f64)> = Vec::new();
    for k in 1..order {
        let prefixes: BTreeSet<&[Label]> = model.ngrams(k + 1).map(|(key, _)| &key[..k]).collect();
        for (key, e) in model.ngrams(k) {
            if Some(key[k - 1]) == eos {
                continue;
            }
            if e.backoff.is_some() || prefixes.contains(key) {
                states.insert(key.to_vec(), fst.add_state());
                histories.push((key.to_vec(), e.backoff.unwrap_or(0.0)));
            }
        }
    }
    let final_state = fst.add_state();
    fst.set_final(final_state, 0.0)?;

    let mut map = HistoryStateMap {
        states,
        start: root,
        root,
        final_state,
        order,
    };
    if let Some(bos) = bos {
        map.start = map.longest_suffix_state(&[bos]);
    }
    fst.set_initial(map.start)?;

    add_word_arcs(model, &map, &mut fst, &[], root, bos, eos)?;
    for (h, backoff) in &histories {
        let s = map.states[h];
        let parent = map.longest_suffix_state(&h[1..]);
        fst.add_arc(Arc::new(s, parent, EPS_LABEL, EPS_LABEL, *backoff))?;
        add_word_arcs(model, &map, &mut fst, h, s, bos, eos)?;
    }
    Ok((fst, map))
}

fn add_word_arcs(
    model: &NGramModel,
    map: &HistoryStateMap,
    fst: &mut Wfst,
    history: &[Label],
    source: StateId,
    bos: Option<Label>,
    eos: Option<Label>,
) -> Result<(), FstError> {
    let k = history.len() + 1;
    let mut next: Vec<Label> = Vec::with_capacity(k);
    for (key, e) in model.extensions(history) {
        let w = key[k - 1];
        if Some(w) == bos {
            continue;
        }
        let target = if Some(w) == eos {
            map.final_state
        } else {
            next.clear();
            next.extend_from_slice(key);
            map.longest_suffix_state(&next)
        };
        fst.add_arc(Arc::new(source, target, w, w, e.logprob))?;
    }
    Ok(())
}

/// Greedy back-off scorer over a grammar graph.
///
/// At each word the highest-weight arc carrying it is taken; when the current
/// state has none, the epsilon arc is followed (adding its weight) and the
/// lookup retried.
#[derive(Debug)]
pub struct GraphScorer<'a> {
    fst: &'a Wfst,
    index: ArcIndex,
    eos: Option<Label>,
    unk: Option<Label>,
}

impl<'a> GraphScorer<'a> {
    pub fn new(fst: &'a Wfst) -> Self {
        Self {
            fst,
            index: fst.label_index(),
            eos: fst.symbols().find(EOS),
            unk: fst.symbols().find(UNK),
        }
    }

    pub fn score(&self, sentence: &[&str]) -> Result<f64, ScoreError> {
        self.walk(sentence, None)
    }

    /// Score together with every arc traversed, epsilon arcs included.
    pub fn path(&self, sentence: &[&str]) -> Result<(f64, Vec<Arc>), ScoreError> {
        let mut arcs = Vec::new();
        let score = self.walk(sentence, Some(&mut arcs))?;
        Ok((score, arcs))
    }

    fn resolve(&self, word: &str) -> Result<Label, ScoreError> {
        if word == BOS || word == EOS {
            return Err(ScoreError::BoundaryToken(word.to_string()));
        }
        self.fst
            .symbols()
            .find(word)
            .or(self.unk)
            .ok_or_else(|| ScoreError::UnknownWord(word.to_string()))
    }

    fn walk(&self, sentence: &[&str], mut trace: Option<&mut Vec<Arc>>) -> Result<f64, ScoreError> {
        let mut state = self.fst.initial().ok_or(ScoreError::NoInitialState)?;
        let mut total = 0.0;
        let eos = self
            .eos
            .ok_or_else(|| ScoreError::UnknownWord(EOS.into()))?;
        let steps = sentence
            .iter()
            .enumerate()
            .map(|(i, w)| Ok((i, *w, self.resolve(w)?)))
            .chain(core::iter::once(Ok((sentence.len(), EOS, eos))));
        for step in steps {
            let (position, word, label) = step?;
            let no_path = || ScoreError::NoPath {
                word: word.to_string(),
                position,
            };
            let mut hops = 0;
            loop {
                if let Some(arc) = self.best_arc(state, label) {
                    total += arc.weight;
                    state = arc.target;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(*arc);
                    }
                    break;
                }
                let eps = self.best_arc(state, EPS_LABEL).ok_or_else(no_path)?;
                hops += 1;
                if hops > self.fst.num_states() {
                    return Err(no_path());
                }
                total += eps.weight;
                state = eps.target;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(*eps);
                }
            }
        }
        let fin = self.fst.final_weight(state).ok_or(ScoreError::NoPath {
            word: EOS.into(),
            position: sentence.len(),
        })?;
        Ok(total + fin)
    }

    fn best_arc(&self, state: StateId, label: Label) -> Option<&'a Arc> {
        let arcs = self.fst.arcs(state);
        let mut best: Option<&Arc> = None;
        for i in self.index.lookup(state, label) {
            let a = &arcs[i];
            if best.is_none_or(|b| a.weight > b.weight) {
                best = Some(a);
            }
        }
        best
    }
}

/// One-shot greedy score; build a [`GraphScorer`] to score many sentences.
pub fn graph_score(fst: &Wfst, sentence: &[&str]) -> Result<f64, ScoreError> {
    GraphScorer::new(fst).score(sentence)
}
