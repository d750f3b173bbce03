//! Structural deltas between two graphs over the same states.
//!
//! Arcs are matched inside each state by `(target, ilabel, olabel)`; the k-th
//! occurrence of a key in one graph pairs with the k-th occurrence in the
//! other. Paired arcs whose weights differ bitwise are reweighted, unpaired
//! arcs are added or removed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{DiffError, FstError};
use crate::fst::{Arc, StateId, Wfst};
use crate::symbols::{Label, SymbolTable};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FinalChange {
    pub state: StateId,
    pub before: Option<f64>,
    pub after: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FstDiff {
    /// Symbols appended to the table, in label order.
    pub added_symbols: Vec<String>,
    pub added_arcs: Vec<Arc>,
    pub removed_arcs: Vec<Arc>,
    /// `(before, after)` pairs.
    pub reweighted_arcs: Vec<(Arc, Arc)>,
    pub final_changes: Vec<FinalChange>,
}

impl FstDiff {
    pub fn is_empty(&self) -> bool {
        self.added_symbols.is_empty()
            && self.added_arcs.is_empty()
            && self.removed_arcs.is_empty()
            && self.reweighted_arcs.is_empty()
            && self.final_changes.is_empty()
    }

    /// Every arc mentioned by the diff, in the graph it ends up in.
    pub fn touched_arcs(&self) -> impl Iterator<Item = &Arc> + '_ {
        self.added_arcs
            .iter()
            .chain(self.removed_arcs.iter())
            .chain(self.reweighted_arcs.iter().map(|(_, a)| a))
    }

    /// Replays the diff onto `fst`. Removed and reweighted arcs are located by
    /// exact match; added arcs are appended to their source state.
    pub fn apply(&self, fst: &mut Wfst) -> Result<(), FstError> {
        for sym in &self.added_symbols {
            fst.symbols_mut().add_new_word(sym);
        }
        for removed in &self.removed_arcs {
            let idx = find_identical(fst, removed)?;
            fst.remove_arc_at(removed.source, idx);
        }
        for (before, after) in &self.reweighted_arcs {
            let idx = find_identical(fst, before)?;
            fst.set_arc_weight(before.source, idx, after.weight)?;
        }
        for arc in &self.added_arcs {
            fst.add_arc(*arc)?;
        }
        for change in &self.final_changes {
            match change.after {
                Some(w) => fst.set_final(change.state, w)?,
                None => fst.clear_final(change.state)?,
            }
        }
        Ok(())
    }
}

fn find_identical(fst: &Wfst, arc: &Arc) -> Result<usize, FstError> {
    fst.arcs(arc.source)
        .iter()
        .position(|a| a.identical(arc))
        .ok_or(FstError::InvalidState(arc.source))
}

/// Labels of `before` must keep their meaning in `after`; `after` may append.
fn appended_symbols(before: &SymbolTable, after: &SymbolTable) -> Result<Vec<String>, DiffError> {
    if after.len() < before.len() {
        return Err(DiffError::SymbolTableMismatch);
    }
    let shared = before
        .iter()
        .zip(after.iter())
        .all(|((a, la), (b, lb))| a == b && la == lb);
    if !shared {
        return Err(DiffError::SymbolTableMismatch);
    }
    Ok(after
        .iter()
        .skip(before.len())
        .map(|(s, _)| s.to_string())
        .collect())
}

type ArcKey = (StateId, Label, Label);

fn key(arc: &Arc) -> ArcKey {
    (arc.target, arc.ilabel, arc.olabel)
}

pub fn diff(before: &Wfst, after: &Wfst) -> Result<FstDiff, DiffError> {
    let added_symbols = appended_symbols(before.symbols(), after.symbols())?;
    if before.num_states() != after.num_states() {
        return Err(DiffError::StateCountMismatch {
            before: before.num_states(),
            after: after.num_states(),
        });
    }
    if before.initial() != after.initial() {
        return Err(DiffError::InitialStateMismatch {
            before: before.initial(),
            after: after.initial(),
        });
    }
    let mut out = FstDiff {
        added_symbols,
        ..FstDiff::default()
    };
    let mut pending: HashMap<ArcKey, Vec<usize>> = HashMap::new();
    for s in 0..before.num_states() as StateId {
        let old = before.arcs(s);
        let new = after.arcs(s);
        let unchanged = old.len() == new.len() && old.iter().zip(new).all(|(a, b)| a.identical(b));
        if !unchanged {
            pending.clear();
            // reversed so that pop() yields occurrences in order
            for (i, arc) in new.iter().enumerate().rev() {
                pending.entry(key(arc)).or_default().push(i);
            }
            let mut matched = alloc::vec![false; new.len()];
            for arc in old {
                match pending.get_mut(&key(arc)).and_then(Vec::pop) {
                    Some(j) => {
                        matched[j] = true;
                        if arc.weight.to_bits() != new[j].weight.to_bits() {
                            out.reweighted_arcs.push((*arc, new[j]));
                        }
                    }
                    None => out.removed_arcs.push(*arc),
                }
            }
            out.added_arcs.extend(
                new.iter()
                    .zip(&matched)
                    .filter(|(_, &m)| !m)
                    .map(|(a, _)| *a),
            );
        }
        let (fb, fa) = (before.final_weight(s), after.final_weight(s));
        if fb.map(f64::to_bits) != fa.map(f64::to_bits) {
            out.final_changes.push(FinalChange {
                state: s,
                before: fb,
                after: fa,
            });
        }
    }
    Ok(out)
}

/// True when both graphs have the same states, finals and per-state arc
/// sequences (bitwise weights).
pub fn identical(a: &Wfst, b: &Wfst) -> bool {
    a.symbols() == b.symbols()
        && a.initial() == b.initial()
        && a.num_states() == b.num_states()
        && (0..a.num_states() as StateId).all(|s| {
            a.final_weight(s).map(f64::to_bits) == b.final_weight(s).map(f64::to_bits)
                && a.arcs(s).len() == b.arcs(s).len()
                && a.arcs(s).iter().zip(b.arcs(s)).all(|(x, y)| x.identical(y))
        })
}
