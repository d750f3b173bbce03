//! Mutable weighted FST over natural-log probabilities.
//!
//! Weights combine along a path by addition and across alternative paths by
//! maximum, so a larger weight always means a more probable path.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::FstError;
use crate::symbols::{Label, SymbolTable, EPS_LABEL};

pub type StateId = u32;

/// A transition `(source, target, ilabel:olabel/weight)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub source: StateId,
    pub target: StateId,
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: f64,
}

impl Arc {
    pub fn new(
        source: StateId,
        target: StateId,
        ilabel: Label,
        olabel: Label,
        weight: f64,
    ) -> Self {
        Self {
            source,
            target,
            ilabel,
            olabel,
            weight,
        }
    }

    /// Same endpoints, labels, and bit-identical weight.
    pub fn identical(&self, other: &Arc) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.ilabel == other.ilabel
            && self.olabel == other.olabel
            && self.weight.to_bits() == other.weight.to_bits()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct State {
    arcs: Vec<Arc>,
    final_weight: Option<f64>,
}

/// Weighted FST whose input and output labels share one symbol table.
#[derive(Debug, Clone, PartialEq)]
pub struct Wfst {
    symbols: SymbolTable,
    states: Vec<State>,
    initial: Option<StateId>,
}

fn check_weight(weight: f64) -> Result<(), FstError> {
    if weight.is_finite() {
        Ok(())
    } else {
        Err(FstError::NonFiniteWeight(weight))
    }
}

impl Wfst {
    pub fn new(symbols: SymbolTable) -> Self {
        Self {
            symbols,
            states: Vec::new(),
            initial: None,
        }
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut SymbolTable {
        &mut self.symbols
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::default());
        (self.states.len() - 1) as StateId
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    fn state(&self, s: StateId) -> Result<&State, FstError> {
        self.states.get(s as usize).ok_or(FstError::InvalidState(s))
    }

    fn state_mut(&mut self, s: StateId) -> Result<&mut State, FstError> {
        self.states
            .get_mut(s as usize)
            .ok_or(FstError::InvalidState(s))
    }

    pub fn set_initial(&mut self, s: StateId) -> Result<(), FstError> {
        self.state(s)?;
        self.initial = Some(s);
        Ok(())
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn set_final(&mut self, s: StateId, weight: f64) -> Result<(), FstError> {
        check_weight(weight)?;
        self.state_mut(s)?.final_weight = Some(weight);
        Ok(())
    }

    pub fn clear_final(&mut self, s: StateId) -> Result<(), FstError> {
        self.state_mut(s)?.final_weight = None;
        Ok(())
    }

    pub fn final_weight(&self, s: StateId) -> Option<f64> {
        self.states.get(s as usize).and_then(|st| st.final_weight)
    }

    /// Final states in id order.
    pub fn finals(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter_map(|(i, st)| st.final_weight.map(|w| (i as StateId, w)))
    }

    /// Appends an arc to its source state's list and returns its index there.
    pub fn add_arc(&mut self, arc: Arc) -> Result<usize, FstError> {
        check_weight(arc.weight)?;
        self.state(arc.target)?;
        for l in [arc.ilabel, arc.olabel] {
            if l as usize >= self.symbols.len() {
                return Err(FstError::InvalidLabel(l));
            }
        }
        let st = self.state_mut(arc.source)?;
        st.arcs.push(arc);
        Ok(st.arcs.len() - 1)
    }

    /// Outgoing arcs of `s` in insertion order; empty for unknown states.
    pub fn arcs(&self, s: StateId) -> &[Arc] {
        self.states
            .get(s as usize)
            .map(|st| st.arcs.as_slice())
            .unwrap_or(&[])
    }

    /// All arcs in (state id, arc index) order.
    pub fn all_arcs(&self) -> impl Iterator<Item = &Arc> + '_ {
        self.states.iter().flat_map(|st| st.arcs.iter())
    }

    pub fn set_arc_weight(
        &mut self,
        s: StateId,
        index: usize,
        weight: f64,
    ) -> Result<(), FstError> {
        check_weight(weight)?;
        let st = self.state_mut(s)?;
        let arc = st.arcs.get_mut(index).ok_or(FstError::InvalidState(s))?;
        arc.weight = weight;
        Ok(())
    }

    pub(crate) fn remove_arc_at(&mut self, s: StateId, index: usize) -> Arc {
        self.states[s as usize].arcs.remove(index)
    }

    /// Builds a per-state index from input label to arc positions.
    pub fn label_index(&self) -> ArcIndex {
        ArcIndex::build(self)
    }

    /// Best total weight of any path accepting `input`, or `None` when no path
    /// accepts it. Epsilon arcs may be taken anywhere along the path.
    pub fn path_weight(&self, input: &[Label]) -> Result<Option<f64>, FstError> {
        let initial = self.initial.ok_or(FstError::NoInitialState)?;
        for &l in input {
            if l == EPS_LABEL {
                return Err(FstError::EpsilonInput);
            }
            if l as usize >= self.symbols.len() {
                return Err(FstError::InvalidLabel(l));
            }
        }
        let n = self.states.len();
        let mut best: Vec<Option<f64>> = vec![None; n];
        best[initial as usize] = Some(0.0);
        self.epsilon_closure(&mut best)?;
        for &label in input {
            let mut next: Vec<Option<f64>> = vec![None; n];
            for (s, w) in best.iter().enumerate() {
                let Some(w) = *w else { continue };
                for arc in &self.states[s].arcs {
                    if arc.ilabel == label {
                        relax(&mut next[arc.target as usize], w + arc.weight);
                    }
                }
            }
            best = next;
            self.epsilon_closure(&mut best)?;
        }
        let mut result: Option<f64> = None;
        for (s, w) in best.iter().enumerate() {
            if let (Some(w), Some(f)) = (*w, self.states[s].final_weight) {
                relax(&mut result, w + f);
            }
        }
        Ok(result)
    }

    /// Same as [`Wfst::path_weight`] with symbols resolved through the table.
    pub fn path_weight_symbols(&self, input: &[&str]) -> Result<Option<f64>, FstError> {
        let mut labels = Vec::with_capacity(input.len());
        for &sym in input {
            let l = self
                .symbols
                .find(sym)
                .ok_or_else(|| FstError::UnknownSymbol(sym.into()))?;
            labels.push(l);
        }
        self.path_weight(&labels)
    }

    // Queue-based Bellman-Ford over epsilon arcs; a state entering the queue
    // more than |states| times lies on a positive cycle.
    fn epsilon_closure(&self, best: &mut [Option<f64>]) -> Result<(), FstError> {
        let n = best.len();
        let mut queue: VecDeque<StateId> = VecDeque::new();
        let mut queued = vec![false; n];
        let mut visits = vec![0usize; n];
        for (s, w) in best.iter().enumerate() {
            if w.is_some() && self.states[s].arcs.iter().any(|a| a.ilabel == EPS_LABEL) {
                queue.push_back(s as StateId);
                queued[s] = true;
            }
        }
        while let Some(s) = queue.pop_front() {
            queued[s as usize] = false;
            let w = best[s as usize].expect("queued states are reached");
            for arc in &self.states[s as usize].arcs {
                if arc.ilabel != EPS_LABEL {
                    continue;
                }
                let t = arc.target as usize;
                let cand = w + arc.weight;
                if best[t].is_none_or(|cur| cand > cur) {
                    best[t] = Some(cand);
                    if !queued[t] {
                        visits[t] += 1;
                        if visits[t] > n {
                            return Err(FstError::PositiveEpsilonCycle(arc.target));
                        }
                        queued[t] = true;
                        queue.push_back(arc.target);
                    }
                }
            }
        }
        Ok(())
    }
}

fn relax(slot: &mut Option<f64>, cand: f64) {
    if slot.is_none_or(|cur| cand > cur) {
        *slot = Some(cand);
    }
}

/// Per-state lookup from input label to arc positions.
///
/// Snapshot of the graph at build time; rebuild after mutation.
#[derive(Debug, Clone)]
pub struct ArcIndex {
    // per state: (ilabel, arc index) sorted by label then index
    by_state: Vec<Vec<(Label, u32)>>,
}

impl ArcIndex {
    pub fn build(fst: &Wfst) -> Self {
        let by_state = fst
            .states
            .iter()
            .map(|st| {
                let mut v: Vec<(Label, u32)> = st
                    .arcs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (a.ilabel, i as u32))
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        Self { by_state }
    }

    /// Arc positions at `state` with input `label`, in insertion order.
    pub fn lookup(&self, state: StateId, label: Label) -> impl Iterator<Item = usize> + '_ {
        let entries = self
            .by_state
            .get(state as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let start = entries.partition_point(|&(l, _)| l < label);
        entries[start..]
            .iter()
            .take_while(move |&&(l, _)| l == label)
            .map(|&(_, i)| i as usize)
    }
}
