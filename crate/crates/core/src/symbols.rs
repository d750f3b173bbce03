use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::SymbolError;

/// Integer label attached to arcs. `0` is always epsilon.
pub type Label = u32;

pub const EPS_LABEL: Label = 0;
pub const EPS_SYMBOL: &str = "<eps>";

/// Bidirectional word <-> label map.
///
/// Labels are dense and assigned in insertion order. Symbols below
/// [`SymbolTable::vocab_len`] belong to the language-model vocabulary;
/// words appended later through [`SymbolTable::add_new_word`] do not.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, Label>,
    vocab_len: usize,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut table = Self {
            symbols: Vec::new(),
            index: HashMap::new(),
            vocab_len: 0,
        };
        table.insert(EPS_SYMBOL.to_string());
        table
    }

    /// Builds a table from `(symbol, label)` entries. Labels must be dense
    /// and `<eps>` must be label 0.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = (S, Label)>,
        S: Into<String>,
    {
        let mut pairs: Vec<(String, Label)> =
            entries.into_iter().map(|(s, l)| (s.into(), l)).collect();
        pairs.sort_by_key(|&(_, l)| l);
        match pairs.first() {
            Some((s, 0)) if s == EPS_SYMBOL => {}
            _ => return Err(SymbolError::MissingEpsilon),
        }
        let mut table = Self {
            symbols: Vec::with_capacity(pairs.len()),
            index: HashMap::with_capacity(pairs.len()),
            vocab_len: 0,
        };
        for (expected, (symbol, label)) in pairs.into_iter().enumerate() {
            if label as usize != expected {
                return Err(if (label as usize) < expected {
                    SymbolError::DuplicateLabel(label)
                } else {
                    SymbolError::LabelGap(expected as Label)
                });
            }
            if table.index.contains_key(&symbol) {
                return Err(SymbolError::DuplicateSymbol(symbol));
            }
            table.insert(symbol);
        }
        Ok(table)
    }

    fn insert(&mut self, symbol: String) -> Label {
        let label = self.symbols.len() as Label;
        self.index.insert(symbol.clone(), label);
        self.symbols.push(symbol);
        self.vocab_len = self.symbols.len();
        label
    }

    /// Returns the label for `symbol`, inserting it as a vocabulary word if absent.
    pub fn add_symbol(&mut self, symbol: &str) -> Label {
        match self.index.get(symbol) {
            Some(&l) => l,
            None => self.insert(symbol.to_string()),
        }
    }

    /// Appends a word that is not part of the language-model vocabulary.
    /// Returns the existing label if the symbol is already present.
    pub fn add_new_word(&mut self, symbol: &str) -> Label {
        if let Some(&l) = self.index.get(symbol) {
            return l;
        }
        let vocab_len = self.vocab_len;
        let label = self.insert(symbol.to_string());
        self.vocab_len = vocab_len;
        label
    }

    pub fn find(&self, symbol: &str) -> Option<Label> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, label: Label) -> Option<&str> {
        self.symbols.get(label as usize).map(String::as_str)
    }

    /// Whether `symbol` is a language-model vocabulary word (not epsilon, not
    /// appended by enhancement).
    pub fn in_vocabulary(&self, symbol: &str) -> bool {
        matches!(self.find(symbol), Some(l) if l != EPS_LABEL && (l as usize) < self.vocab_len)
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab_len
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        // <eps> is always present
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as Label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_is_label_zero() {
        let t = SymbolTable::new();
        assert_eq!(t.find("<eps>"), Some(0));
        assert_eq!(t.symbol(0), Some("<eps>"));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn add_is_idempotent() {
        let mut t = SymbolTable::new();
        let a = t.add_symbol("a");
        assert_eq!(t.add_symbol("a"), a);
        assert_eq!(t.add_new_word("a"), a);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn new_words_are_outside_vocabulary() {
        let mut t = SymbolTable::new();
        t.add_symbol("a");
        let x = t.add_new_word("x");
        assert_eq!(t.symbol(x), Some("x"));
        assert!(t.in_vocabulary("a"));
        assert!(!t.in_vocabulary("x"));
        assert!(!t.in_vocabulary("<eps>"));
        assert_eq!(t.vocab_len(), 2);
    }

    #[test]
    fn from_entries_validates() {
        assert_eq!(
            SymbolTable::from_entries([("a", 0)]),
            Err(SymbolError::MissingEpsilon)
        );
        assert_eq!(
            SymbolTable::from_entries([("<eps>", 0), ("a", 2)]),
            Err(SymbolError::LabelGap(1))
        );
        assert_eq!(
            SymbolTable::from_entries([("<eps>", 0), ("a", 1), ("a", 2)]),
            Err(SymbolError::DuplicateSymbol("a".into()))
        );
        assert_eq!(
            SymbolTable::from_entries([("<eps>", 0), ("a", 1), ("b", 1)]),
            Err(SymbolError::DuplicateLabel(1))
        );
        let t = SymbolTable::from_entries([("b", 2), ("<eps>", 0), ("a", 1)]).unwrap();
        assert_eq!(t.find("b"), Some(2));
        assert_eq!(t.vocab_len(), 3);
    }
}
