//! ARPA back-off n-gram models.
//!
//! Values are converted from log10 to natural log once, at parse time.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_10;
use core::fmt::Write as _;
use core::ops::Bound;

use crate::error::{ArpaError, ArpaErrorKind, ScoreError};
use crate::symbols::{Label, SymbolTable};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramEntry {
    /// Natural-log conditional probability.
    pub logprob: f64,
    /// Natural-log back-off weight, when listed.
    pub backoff: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    // tables[k - 1] holds the k-grams
    tables: Vec<BTreeMap<Vec<Label>, NGramEntry>>,
    vocab: SymbolTable,
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &SymbolTable {
        &self.vocab
    }

    /// All k-grams in label order.
    pub fn ngrams(&self, k: usize) -> impl Iterator<Item = (&[Label], &NGramEntry)> + '_ {
        self.tables
            .get(k.wrapping_sub(1))
            .into_iter()
            .flat_map(|t| t.iter().map(|(key, e)| (key.as_slice(), e)))
    }

    /// The n-grams one word longer than `history` that extend it, in label order.
    pub fn extensions<'a>(
        &'a self,
        history: &'a [Label],
    ) -> impl Iterator<Item = (&'a [Label], &'a NGramEntry)> + 'a {
        self.tables
            .get(history.len())
            .into_iter()
            .flat_map(move |t| {
                t.range::<[Label], _>((Bound::Included(history), Bound::Unbounded))
                    .take_while(move |(key, _)| key.starts_with(history))
                    .map(|(key, e)| (key.as_slice(), e))
            })
    }

    pub fn count(&self, k: usize) -> usize {
        self.tables.get(k.wrapping_sub(1)).map_or(0, BTreeMap::len)
    }

    pub fn entry(&self, ngram: &[Label]) -> Option<&NGramEntry> {
        if ngram.is_empty() {
            return None;
        }
        self.tables.get(ngram.len() - 1)?.get(ngram)
    }

    pub fn entry_words(&self, words: &[&str]) -> Option<&NGramEntry> {
        let labels: Option<Vec<Label>> = words.iter().map(|w| self.vocab.find(w)).collect();
        self.entry(&labels?)
    }

    /// Back-off weight of a history; 0 when the history has none listed.
    pub fn backoff(&self, history: &[Label]) -> f64 {
        self.entry(history).and_then(|e| e.backoff).unwrap_or(0.0)
    }

    /// `log p(word | history)` with standard back-off. The history is used
    /// as given (callers truncate it to `order - 1`).
    pub fn conditional(&self, history: &[Label], word: Label) -> f64 {
        let mut backoff_sum = 0.0;
        let mut h = history;
        let mut key: Vec<Label> = Vec::with_capacity(history.len() + 1);
        loop {
            key.clear();
            key.extend_from_slice(h);
            key.push(word);
            if let Some(e) = self.entry(&key) {
                return backoff_sum + e.logprob;
            }
            if h.is_empty() {
                // every vocabulary word has a unigram entry
                unreachable!("label {word} has no unigram");
            }
            backoff_sum += self.backoff(h);
            h = &h[1..];
        }
    }

    fn resolve(&self, word: &str) -> Result<Label, ScoreError> {
        if word == BOS || word == EOS {
            return Err(ScoreError::BoundaryToken(word.to_string()));
        }
        self.vocab
            .find(word)
            .or_else(|| self.vocab.find(UNK))
            .ok_or_else(|| ScoreError::UnknownWord(word.to_string()))
    }

    /// Sentence log-probability, with the sentence wrapped in `<s> ... </s>`.
    pub fn score(&self, sentence: &[&str]) -> Result<f64, ScoreError> {
        let labels = sentence
            .iter()
            .map(|w| self.resolve(w))
            .collect::<Result<Vec<_>, _>>()?;
        let bos = self
            .vocab
            .find(BOS)
            .ok_or_else(|| ScoreError::UnknownWord(BOS.into()))?;
        let eos = self
            .vocab
            .find(EOS)
            .ok_or_else(|| ScoreError::UnknownWord(EOS.into()))?;
        let keep = self.order - 1;
        let mut history: Vec<Label> = vec![bos];
        let mut total = 0.0;
        for w in labels.into_iter().chain(core::iter::once(eos)) {
            if history.len() > keep {
                history.drain(..history.len() - keep);
            }
            total += self.conditional(&history, w);
            history.push(w);
        }
        Ok(total)
    }

    /// Emits the model in ARPA format with log10 values.
    pub fn write_arpa(&self) -> String {
        let mut out = String::new();
        out.push_str("\n\\data\\\n");
        for k in 1..=self.order {
            let _ = writeln!(out, "ngram {}={}", k, self.count(k));
        }
        for k in 1..=self.order {
            let _ = write!(out, "\n\\{}-grams:\n", k);
            for (key, e) in self.ngrams(k) {
                let _ = write!(out, "{}", e.logprob / LN_10);
                for &l in key {
                    out.push('\t');
                    out.push_str(self.vocab.symbol(l).unwrap_or(""));
                }
                if let Some(b) = e.backoff {
                    let _ = write!(out, "\t{}", b / LN_10);
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }
}

/// Direct back-off scoring, the reference that graph scores must reproduce.
pub fn oracle_score(model: &NGramModel, sentence: &[&str]) -> Result<f64, ScoreError> {
    model.score(sentence)
}

enum Section {
    Preamble,
    Header,
    Grams(usize),
    End,
}

fn section_name(section: &Section) -> String {
    match section {
        Section::Preamble => "preamble".into(),
        Section::Header => "\\data\\".into(),
        Section::Grams(k) => format!("\\{k}-grams:"),
        Section::End => "\\end\\".into(),
    }
}

fn parse_number(field: &str) -> Result<f64, ArpaErrorKind> {
    let v: f64 = field
        .parse()
        .map_err(|_| ArpaErrorKind::Malformed(format!("bad number {field:?}")))?;
    if !v.is_finite() {
        return Err(ArpaErrorKind::NonFinite(v));
    }
    Ok(v)
}

pub fn parse_arpa(text: &str) -> Result<NGramModel, ArpaError> {
    let mut section = Section::Preamble;
    let mut declared: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vocab = SymbolTable::new();
    let mut tables: Vec<BTreeMap<Vec<Label>, NGramEntry>> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.trim();
        let fail = |section: &Section, kind| ArpaError {
            line: lineno,
            section: section_name(section),
            kind,
        };
        if line.is_empty() {
            continue;
        }
        if line == "\\data\\" {
            if !matches!(section, Section::Preamble) {
                return Err(fail(
                    &section,
                    ArpaErrorKind::Malformed("repeated \\data\\".into()),
                ));
            }
            section = Section::Header;
            continue;
        }
        if line == "\\end\\" {
            if matches!(section, Section::Preamble) {
                return Err(fail(&section, ArpaErrorKind::MissingHeader));
            }
            section = Section::End;
            break;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            let k = rest
                .strip_suffix("-grams:")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| fail(&section, ArpaErrorKind::Malformed(line.into())))?;
            if matches!(section, Section::Preamble) {
                return Err(fail(&section, ArpaErrorKind::MissingHeader));
            }
            if let Section::Grams(prev) = section {
                check_count(&declared, &tables, prev).map_err(|kind| fail(&section, kind))?;
            }
            if !declared.contains_key(&k) {
                return Err(fail(&section, ArpaErrorKind::UndeclaredOrder(k)));
            }
            if tables.len() < k {
                tables.resize_with(k, BTreeMap::new);
            }
            section = Section::Grams(k);
            continue;
        }
        match section {
            Section::Preamble => {}
            Section::Header => {
                let (k, c) = line
                    .strip_prefix("ngram ")
                    .and_then(|r| r.split_once('='))
                    .and_then(|(k, c)| Some((k.trim().parse().ok()?, c.trim().parse().ok()?)))
                    .filter(|&(k, _): &(usize, usize)| k >= 1)
                    .ok_or_else(|| fail(&section, ArpaErrorKind::Malformed(line.into())))?;
                declared.insert(k, c);
            }
            Section::Grams(k) => {
                let order = declared.keys().next_back().copied().unwrap_or(0);
                parse_entry(line, k, order, &mut vocab, &mut tables)
                    .map_err(|kind| fail(&section, kind))?;
            }
            Section::End => unreachable!(),
        }
    }

    let at_end = |section: &Section, kind| ArpaError {
        line: last_line,
        section: section_name(section),
        kind,
    };
    match section {
        Section::End => {}
        Section::Preamble => return Err(at_end(&section, ArpaErrorKind::MissingHeader)),
        _ => return Err(at_end(&section, ArpaErrorKind::MissingEnd)),
    }
    let order = declared.keys().next_back().copied().unwrap_or(0);
    if order == 0 {
        return Err(at_end(
            &section,
            ArpaErrorKind::Malformed("no n-gram counts declared".into()),
        ));
    }
    tables.resize_with(order, BTreeMap::new);
    for &k in declared.keys() {
        check_count(&declared, &tables, k).map_err(|kind| at_end(&Section::Grams(k), kind))?;
    }
    Ok(NGramModel {
        order,
        tables,
        vocab,
    })
}

fn check_count(
    declared: &BTreeMap<usize, usize>,
    tables: &[BTreeMap<Vec<Label>, NGramEntry>],
    k: usize,
) -> Result<(), ArpaErrorKind> {
    let want = declared.get(&k).copied().unwrap_or(0);
    let found = tables.get(k - 1).map_or(0, BTreeMap::len);
    if want != found {
        return Err(ArpaErrorKind::CountMismatch {
            order: k,
            declared: want,
            found,
        });
    }
    Ok(())
}

fn parse_entry(
    line: &str,
    k: usize,
    order: usize,
    vocab: &mut SymbolTable,
    tables: &mut [BTreeMap<Vec<Label>, NGramEntry>],
) -> Result<(), ArpaErrorKind> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let has_backoff = match fields.len() {
        n if n == k + 1 => false,
        n if n == k + 2 && k < order => true,
        _ => {
            return Err(ArpaErrorKind::Malformed(format!(
                "expected {} or {} fields for a {k}-gram",
                k + 1,
                k + 2
            )))
        }
    };
    let logprob = parse_number(fields[0])?;
    if logprob > 0.0 {
        return Err(ArpaErrorKind::PositiveLogProb(logprob));
    }
    let words = &fields[1..=k];
    let backoff = if has_backoff {
        Some(parse_number(fields[k + 1])? * LN_10)
    } else {
        None
    };
    if k > 1 {
        if words[k - 1] == BOS {
            return Err(ArpaErrorKind::StartPredicted(BOS.into()));
        }
        if words[..k - 1].contains(&EOS) {
            return Err(ArpaErrorKind::EndInHistory(EOS.into()));
        }
    }
    let mut key = Vec::with_capacity(k);
    for w in words {
        let label = if k == 1 {
            if vocab.find(w).is_some() {
                return Err(ArpaErrorKind::Duplicate((*w).into()));
            }
            vocab.add_symbol(w)
        } else {
            vocab.find(w).ok_or_else(|| {
                ArpaErrorKind::Malformed(format!("word {w:?} has no unigram entry"))
            })?
        };
        key.push(label);
    }
    if k > 1 && !tables[k - 2].contains_key(&key[..k - 1]) {
        return Err(ArpaErrorKind::MissingHistory(words.join(" ")));
    }
    let entry = NGramEntry {
        logprob: logprob * LN_10,
        backoff,
    };
    if tables[k - 1].insert(key, entry).is_some() {
        return Err(ArpaErrorKind::Duplicate(words.join(" ")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "
\\data\\
ngram 1=5
ngram 2=8

\\1-grams:
-99\t<s>\t-0.5
-0.30103\ta\t-0.2
-0.5\tb\t-0.1
-0.6\tc
-0.7\t</s>

\\2-grams:
-0.1\t<s> a
-0.2\t<s> b
-0.3\ta b
-0.4\ta </s>
-0.25\tb a
-0.35\tb c
-0.45\tb </s>
-0.15\t<s> c

\\end\\
";

    // the literals are the file's digits, not approximations of constants
    #[allow(clippy::approx_constant)]
    #[test]
    fn converts_log10_to_ln() {
        let m = parse_arpa(TINY).unwrap();
        let a = m.entry_words(&["a"]).unwrap();
        assert!((a.logprob - -0.693_147_2).abs() < 1e-6);
        assert!((a.logprob - -0.30103 * LN_10).abs() < 1e-15);
        assert_eq!(m.entry_words(&["c"]).unwrap().backoff, None);
    }

    #[test]
    fn counts_echo_header() {
        let m = parse_arpa(TINY).unwrap();
        assert_eq!(m.order(), 2);
        assert_eq!(m.count(1), 5);
        assert_eq!(m.count(2), 8);
        assert_eq!(m.vocab().len(), 6);
    }

    #[test]
    fn direct_bigram_hit() {
        let m = parse_arpa(TINY).unwrap();
        let lp = |ws: &[&str]| m.entry_words(ws).unwrap().logprob;
        // a b: <s>->a, a->b, b-></s>
        let expected = lp(&["<s>", "a"]) + lp(&["a", "b"]) + lp(&["b", "</s>"]);
        assert_eq!(m.score(&["a", "b"]).unwrap(), expected);
    }

    #[test]
    fn backs_off_through_missing_bigram() {
        let m = parse_arpa(TINY).unwrap();
        let lp = |ws: &[&str]| m.entry_words(ws).unwrap().logprob;
        let bo = |w: &str| m.entry_words(&[w]).unwrap().backoff.unwrap_or(0.0);
        // c has no backoff listed: c -> a backs off with weight 0
        let expected = lp(&["<s>", "c"]) + lp(&["a"]) + bo("c") + lp(&["a", "</s>"]);
        assert!((m.score(&["c", "a"]).unwrap() - expected).abs() < 1e-15);
        // a -> a uses a's backoff
        let expected = lp(&["<s>", "a"]) + bo("a") + lp(&["a"]) + lp(&["a", "</s>"]);
        assert!((m.score(&["a", "a"]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn unigram_only_sum() {
        let l = -1.0 / LN_10;
        let text = format!(
            "\\data\\\nngram 1=4\n\n\\1-grams:\n-99 <s>\n{l} a\n{l} b\n{l} </s>\n\n\\end\\\n"
        );
        let m = parse_arpa(&text).unwrap();
        assert!((m.score(&["a", "b"]).unwrap() - -3.0).abs() < 1e-12);
    }

    #[test]
    fn oov_handling() {
        let m = parse_arpa(TINY).unwrap();
        assert_eq!(
            oracle_score(&m, &["a", "zzz"]),
            Err(ScoreError::UnknownWord("zzz".into()))
        );
        assert_eq!(
            oracle_score(&m, &["<s>"]),
            Err(ScoreError::BoundaryToken("<s>".into()))
        );
        let with_unk = TINY
            .replace("ngram 1=5", "ngram 1=6")
            .replace("-0.7\t</s>", "-0.7\t</s>\n-2\t<unk>");
        let m = parse_arpa(&with_unk).unwrap();
        assert_eq!(
            oracle_score(&m, &["zzz"]).unwrap(),
            oracle_score(&m, &["<unk>"]).unwrap()
        );
    }

    #[test]
    fn write_round_trip() {
        let m = parse_arpa(TINY).unwrap();
        let again = parse_arpa(&m.write_arpa()).unwrap();
        for k in 1..=2 {
            for ((ka, ea), (kb, eb)) in m.ngrams(k).zip(again.ngrams(k)) {
                assert_eq!(ka, kb);
                assert!((ea.logprob - eb.logprob).abs() < 1e-6);
                match (ea.backoff, eb.backoff) {
                    (Some(x), Some(y)) => assert!((x - y).abs() < 1e-6),
                    (None, None) => {}
                    other => panic!("backoff mismatch {other:?}"),
                }
            }
        }
    }

    fn err_kind(text: &str) -> (usize, ArpaErrorKind) {
        let e = parse_arpa(text).unwrap_err();
        (e.line, e.kind)
    }

    #[test]
    fn count_mismatch_reports_section() {
        let bad = TINY.replace("ngram 2=8", "ngram 2=9");
        let e = parse_arpa(&bad).unwrap_err();
        assert_eq!(e.section, "\\2-grams:");
        assert!(matches!(
            e.kind,
            ArpaErrorKind::CountMismatch {
                order: 2,
                declared: 9,
                found: 8
            }
        ));
    }

    #[test]
    fn structural_errors() {
        let (line, kind) = err_kind(&TINY.replace("-0.3\ta b", "-0.3\ta q"));
        assert_eq!(line, 16);
        assert!(matches!(kind, ArpaErrorKind::Malformed(_)));

        let (_, kind) = err_kind(&TINY.replace("-0.3\ta b", "0.3\ta b"));
        assert_eq!(kind, ArpaErrorKind::PositiveLogProb(0.3));

        let (_, kind) = err_kind(&TINY.replace("-0.3\ta b", "-0.3\ta <s>"));
        assert_eq!(kind, ArpaErrorKind::StartPredicted("<s>".into()));

        let (_, kind) = err_kind(&TINY.replace("-0.3\ta b", "-0.3\t</s> b"));
        assert_eq!(kind, ArpaErrorKind::EndInHistory("</s>".into()));

        let (_, kind) = err_kind(&TINY.replace("-0.3\ta b", "-0.3\ta b -0.1"));
        assert!(matches!(kind, ArpaErrorKind::Malformed(_)));

        let (_, kind) = err_kind(&TINY.replace("\\end\\", ""));
        assert_eq!(kind, ArpaErrorKind::MissingEnd);

        let (_, kind) = err_kind("\\1-grams:\n-1 a\n\\end\\\n");
        assert_eq!(kind, ArpaErrorKind::MissingHeader);

        let (_, kind) = err_kind(&TINY.replace("-0.3\ta b", "nan\ta b"));
        assert!(matches!(kind, ArpaErrorKind::NonFinite(_)));
    }

    #[test]
    fn missing_history_is_detected() {
        let text = "\\data\\\nngram 1=4\nngram 2=1\nngram 3=1\n\n\\1-grams:\n-1 <s> -0.1\n-1 a -0.1\n-1 b\n-1 </s>\n\n\\2-grams:\n-0.5 <s> a -0.1\n\n\\3-grams:\n-0.2 a b a\n\n\\end\\\n";
        let (line, kind) = err_kind(text);
        assert_eq!(line, 16);
        assert_eq!(kind, ArpaErrorKind::MissingHistory("a b a".into()));
    }
}
