//! Text formats: AT&T-style FST listings, symbol tables and diff files.
//!
//! FST arc lines are `src dst isym osym weight`, final lines `state weight`.
//! The first line's source state is the initial state. Symbols are written
//! by name and resolved against a separate symbol file of `symbol<TAB>label`
//! lines.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use gboost_core::{Arc, FstDiff, FstError, StateId, SymbolError, SymbolTable, Wfst};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown symbol {symbol:?}")]
    UnknownSymbol { line: usize, symbol: String },
    #[error("line {line}: state id {id} is out of range")]
    UnknownState { line: usize, id: u64 },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: FstError },
    #[error("symbol table: {0}")]
    Symbols(#[from] SymbolError),
    #[error("initial state {0} has no arcs and is not final, so it cannot be listed first")]
    UnlistableInitial(StateId),
}

/// Sign convention of weights in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weights {
    /// Natural-log probabilities, as held in memory.
    #[default]
    LogProb,
    /// Negated log probabilities.
    Cost,
}

impl Weights {
    fn apply(self, w: f64) -> f64 {
        match self {
            Weights::LogProb => w,
            Weights::Cost => -w,
        }
    }
}

impl FromStr for Weights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logprob" => Ok(Weights::LogProb),
            "cost" => Ok(Weights::Cost),
            other => Err(format!(
                "unknown weight convention {other:?} (expected logprob or cost)"
            )),
        }
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weights::LogProb => "logprob",
            Weights::Cost => "cost",
        })
    }
}

/// Rounds to 9 significant digits and prints the shortest form that reads
/// back to the rounded value.
pub fn format_weight(w: f64) -> String {
    if w == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{w:.8e}").parse().expect("formatted float parses");
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn symbol(fst: &Wfst, label: u32) -> &str {
    fst.symbols()
        .symbol(label)
        .expect("arc labels are checked on insertion")
}

fn write_arc(out: &mut String, fst: &Wfst, a: &Arc, weights: Weights) {
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}",
        a.source,
        a.target,
        symbol(fst, a.ilabel),
        symbol(fst, a.olabel),
        format_weight(weights.apply(a.weight))
    );
}

pub fn write_fst(fst: &Wfst, weights: Weights) -> Result<String, TextError> {
    let mut out = String::new();
    let Some(start) = fst.initial() else {
        return Ok(out);
    };
    let write_final = |out: &mut String, s: StateId| {
        if let Some(w) = fst.final_weight(s) {
            let _ = writeln!(out, "{}\t{}", s, format_weight(weights.apply(w)));
        }
    };
    if fst.arcs(start).is_empty() {
        if fst.final_weight(start).is_none() {
            return Err(TextError::UnlistableInitial(start));
        }
        write_final(&mut out, start);
    } else {
        for a in fst.arcs(start) {
            write_arc(&mut out, fst, a, weights);
        }
    }
    for s in (0..fst.num_states() as StateId).filter(|&s| s != start) {
        for a in fst.arcs(s) {
            write_arc(&mut out, fst, a, weights);
        }
    }
    for (s, _) in fst.finals() {
        if !(s == start && fst.arcs(start).is_empty()) {
            write_final(&mut out, s);
        }
    }
    Ok(out)
}

fn parse_state(field: &str, line: usize, limit: u64) -> Result<StateId, TextError> {
    let id: u64 = field.parse().map_err(|_| TextError::Malformed {
        line,
        message: format!("bad state id {field:?}"),
    })?;
    // ids are dense in practice; this stops a stray id from allocating
    // billions of states
    if id >= limit || id > StateId::MAX as u64 {
        return Err(TextError::UnknownState { line, id });
    }
    Ok(id as StateId)
}

fn parse_weight(field: &str, line: usize, weights: Weights) -> Result<f64, TextError> {
    let w: f64 = field.parse().map_err(|_| TextError::Malformed {
        line,
        message: format!("bad weight {field:?}"),
    })?;
    if !w.is_finite() {
        return Err(TextError::Malformed {
            line,
            message: format!("weight {field:?} is not finite"),
        });
    }
    Ok(weights.apply(w))
}

pub fn read_fst(text: &str, symbols: SymbolTable, weights: Weights) -> Result<Wfst, TextError> {
    enum Record {
        Arc(StateId, StateId, u32, u32, f64),
        Final(StateId, f64),
    }
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
        .collect();
    let limit = 2 * lines.len() as u64 + 1;
    let mut records = Vec::with_capacity(lines.len());
    let mut max_state: Option<StateId> = None;
    for (line, f) in &lines {
        let line = *line;
        let label = |s: &str| {
            symbols.find(s).ok_or_else(|| TextError::UnknownSymbol {
                line,
                symbol: s.to_string(),
            })
        };
        let rec = match f.len() {
            4 | 5 => {
                let w = f
                    .get(4)
                    .map_or(Ok(0.0), |w| parse_weight(w, line, weights))?;
                Record::Arc(
                    parse_state(f[0], line, limit)?,
                    parse_state(f[1], line, limit)?,
                    label(f[2])?,
                    label(f[3])?,
                    w,
                )
            }
            1 | 2 => {
                let w = f
                    .get(1)
                    .map_or(Ok(0.0), |w| parse_weight(w, line, weights))?;
                Record::Final(parse_state(f[0], line, limit)?, w)
            }
            n => {
                return Err(TextError::Malformed {
                    line,
                    message: format!("expected 1, 2, 4 or 5 fields, found {n}"),
                })
            }
        };
        let top = match rec {
            Record::Arc(s, t, ..) => s.max(t),
            Record::Final(s, _) => s,
        };
        max_state = Some(max_state.map_or(top, |m| m.max(top)));
        records.push((line, rec));
    }
    let mut fst = Wfst::new(symbols);
    let Some(max_state) = max_state else {
        return Ok(fst);
    };
    for _ in 0..=max_state {
        fst.add_state();
    }
    for (i, (line, rec)) in records.into_iter().enumerate() {
        let graph = |source| TextError::Graph { line, source };
        match rec {
            Record::Arc(s, t, il, ol, w) => {
                if i == 0 {
                    fst.set_initial(s).map_err(graph)?;
                }
                fst.add_arc(Arc::new(s, t, il, ol, w)).map_err(graph)?;
            }
            Record::Final(s, w) => {
                if i == 0 {
                    fst.set_initial(s).map_err(graph)?;
                }
                fst.set_final(s, w).map_err(graph)?;
            }
        }
    }
    Ok(fst)
}

pub fn write_symbols(symbols: &SymbolTable) -> String {
    let mut out = String::new();
    for (s, l) in symbols.iter() {
        let _ = writeln!(out, "{s}\t{l}");
    }
    out
}

pub fn read_symbols(text: &str) -> Result<SymbolTable, TextError> {
    let mut entries = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let f: Vec<&str> = l.split_whitespace().collect();
        match f.as_slice() {
            [] => continue,
            [sym, label] => {
                let label: u32 = label.parse().map_err(|_| TextError::Malformed {
                    line: i + 1,
                    message: format!("bad label {label:?}"),
                })?;
                entries.push((sym.to_string(), label));
            }
            _ => {
                return Err(TextError::Malformed {
                    line: i + 1,
                    message: "expected `symbol<TAB>label`".into(),
                })
            }
        }
    }
    Ok(SymbolTable::from_entries(entries)?)
}

/// Diff listing: `+` added, `-` removed and `~` reweighted arcs (new weight)
/// in FST arc-line form, then final-weight changes as `+state w`,
/// `-state` or `~state w`.
pub fn write_diff(d: &FstDiff, after: &Wfst, weights: Weights) -> String {
    let mut out = String::new();
    let mut arc_line = |prefix: char, a: &Arc| {
        out.push(prefix);
        write_arc(&mut out, after, a, weights);
    };
    for a in &d.added_arcs {
        arc_line('+', a);
    }
    for a in &d.removed_arcs {
        arc_line('-', a);
    }
    for (_, a) in &d.reweighted_arcs {
        arc_line('~', a);
    }
    for c in &d.final_changes {
        let _ = match (c.before, c.after) {
            (None, Some(w)) => writeln!(out, "+{}\t{}", c.state, format_weight(weights.apply(w))),
            (Some(_), None) => writeln!(out, "-{}", c.state),
            (_, Some(w)) => writeln!(out, "~{}\t{}", c.state, format_weight(weights.apply(w))),
            (None, None) => Ok(()),
        };
    }
    out
}
