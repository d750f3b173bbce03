//! Test fixtures for gboost: toy corpora, a small discounted back-off
//! estimator that writes ARPA text, and a string-keyed reference scorer that
//! shares no code with `gboost-core`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::LN_10;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub type Sentence = Vec<String>;

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The ten-word vocabulary of the small fixtures.
pub fn toy_vocab() -> Vec<String> {
    [
        "the", "cat", "dog", "sat", "ran", "on", "mat", "fast", "a", "big",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Sentences of 1..=8 words drawn from a sparse first-order Markov chain:
/// each word prefers three successors, so many bigrams and trigrams stay
/// unseen and scoring has to back off.
pub fn toy_corpus(seed: u64, sentences: usize) -> Vec<Sentence> {
    let vocab = toy_vocab();
    let mut rng = rng(seed);
    let preferred: Vec<Vec<usize>> = (0..vocab.len())
        .map(|_| (0..3).map(|_| rng.gen_range(0..vocab.len())).collect())
        .collect();
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..=8);
            let mut cur = rng.gen_range(0..vocab.len());
            let mut out = vec![vocab[cur].clone()];
            for _ in 1..len {
                cur = if rng.gen_bool(0.7) {
                    *preferred[cur].choose(&mut rng).unwrap()
                } else {
                    rng.gen_range(0..vocab.len())
                };
                out.push(vocab[cur].clone());
            }
            out
        })
        .collect()
}

/// Total count of a context and its seen continuations.
type ContextCounts = (u64, Vec<(String, u64)>);

fn padded(sentence: &[String]) -> Vec<String> {
    let mut p = Vec::with_capacity(sentence.len() + 2);
    p.push(BOS.to_string());
    p.extend(sentence.iter().cloned());
    p.push(EOS.to_string());
    p
}

/// Every n-gram of length `1..=order` occurring in the `<s> ... </s>`
/// padded corpus, with counts. `<s>` is counted only as a context.
pub fn count_ngrams(corpus: &[Sentence], order: usize) -> BTreeMap<Vec<String>, u64> {
    let mut counts = BTreeMap::new();
    for s in corpus {
        let p = padded(s);
        for k in 1..=order {
            for win in p.windows(k) {
                if k == 1 && win[0] == BOS {
                    continue;
                }
                *counts.entry(win.to_vec()).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Absolute-discounting back-off model with add-one unigrams, kept in
/// natural-log space.
#[derive(Debug, Clone)]
pub struct ReferenceLm {
    pub order: usize,
    /// n-gram -> ln p
    pub logprob: HashMap<Vec<String>, f64>,
    /// context -> ln back-off weight
    pub backoff: HashMap<Vec<String>, f64>,
    /// unigram order as written to ARPA
    pub words: Vec<String>,
}

impl ReferenceLm {
    pub fn estimate(corpus: &[Sentence], order: usize, discount: f64, with_unk: bool) -> Self {
        assert!(order >= 1 && (0.0..1.0).contains(&discount));
        let counts = count_ngrams(corpus, order);
        let mut words: Vec<String> = counts
            .keys()
            .filter(|k| k.len() == 1)
            .map(|k| k[0].clone())
            .collect();
        if with_unk && !words.iter().any(|w| w == UNK) {
            words.push(UNK.to_string());
        }
        let total: u64 = counts
            .iter()
            .filter(|(k, _)| k.len() == 1)
            .map(|(_, c)| c)
            .sum();
        let v = words.len() as f64;
        let mut lm = ReferenceLm {
            order,
            logprob: HashMap::new(),
            backoff: HashMap::new(),
            words: std::iter::once(BOS.to_string())
                .chain(words.iter().cloned())
                .collect(),
        };
        for w in &words {
            let c = counts.get(&vec![w.clone()]).copied().unwrap_or(0) as f64;
            lm.logprob
                .insert(vec![w.clone()], ((c + 1.0) / (total as f64 + v)).ln());
        }
        for k in 2..=order {
            // context -> (total count, seen continuations)
            let mut contexts: BTreeMap<Vec<String>, ContextCounts> = BTreeMap::new();
            for (key, &c) in counts.iter().filter(|(k2, _)| k2.len() == k) {
                let e = contexts.entry(key[..k - 1].to_vec()).or_default();
                e.0 += c;
                e.1.push((key[k - 1].clone(), c));
            }
            for (h, (ctx_total, seen)) in contexts {
                let mut kept = 0.0;
                let mut lower = 0.0;
                for (w, c) in &seen {
                    let p = (*c as f64 - discount) / ctx_total as f64;
                    kept += p;
                    lower += self_prob(&lm, &h[1..], w).exp();
                    let mut key = h.clone();
                    key.push(w.clone());
                    lm.logprob.insert(key, p.ln());
                }
                let denom = 1.0 - lower;
                let alpha = if denom > 1e-9 {
                    (1.0 - kept) / denom
                } else {
                    1.0
                };
                lm.backoff.insert(h, alpha.ln());
            }
        }
        lm
    }

    /// ln p(w | h) by explicit back-off recursion on the string tables.
    pub fn prob(&self, history: &[String], word: &str) -> f64 {
        self_prob(self, history, word)
    }

    /// Sentence log-probability with `<s>`/`</s>` padding and `<unk>` mapping.
    pub fn score(&self, sentence: &[String]) -> f64 {
        let known = |w: &String| -> String {
            if self.logprob.contains_key(&vec![w.clone()]) {
                w.clone()
            } else {
                assert!(self.logprob.contains_key(&vec![UNK.to_string()]), "OOV {w}");
                UNK.to_string()
            }
        };
        let mut seq: Vec<String> = vec![BOS.to_string()];
        seq.extend(sentence.iter().map(known));
        seq.push(EOS.to_string());
        let mut total = 0.0;
        for i in 1..seq.len() {
            let start = i.saturating_sub(self.order - 1);
            total += self.prob(&seq[start..i], &seq[i]);
        }
        total
    }

    pub fn to_arpa(&self) -> String {
        let mut by_order: Vec<Vec<(Vec<String>, f64)>> = vec![Vec::new(); self.order];
        // <s> is listed with the conventional -99 and its back-off
        by_order[0].push((vec![BOS.to_string()], -99.0 * LN_10));
        for w in self.words.iter().skip(1) {
            by_order[0].push((vec![w.clone()], self.logprob[&vec![w.clone()]]));
        }
        let mut higher: Vec<(&Vec<String>, &f64)> =
            self.logprob.iter().filter(|(k, _)| k.len() > 1).collect();
        higher.sort_by(|a, b| a.0.cmp(b.0));
        for (k, &lp) in higher {
            by_order[k.len() - 1].push((k.clone(), lp));
        }
        let mut out = String::from("\n\\data\\\n");
        for (i, entries) in by_order.iter().enumerate() {
            writeln!(out, "ngram {}={}", i + 1, entries.len()).unwrap();
        }
        for (i, entries) in by_order.iter().enumerate() {
            write!(out, "\n\\{}-grams:\n", i + 1).unwrap();
            for (key, lp) in entries {
                write!(out, "{}\t{}", lp / LN_10, key.join(" ")).unwrap();
                if let Some(b) = self.backoff.get(key) {
                    write!(out, "\t{}", b / LN_10).unwrap();
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }
}

fn self_prob(lm: &ReferenceLm, history: &[String], word: &str) -> f64 {
    let mut key = history.to_vec();
    key.push(word.to_string());
    if let Some(&lp) = lm.logprob.get(&key) {
        return lp;
    }
    assert!(!history.is_empty(), "word {word} has no unigram");
    lm.backoff.get(history).copied().unwrap_or(0.0) + self_prob(lm, &history[1..], word)
}

/// The standard small fixture: 200 toy sentences, trigram, D = 0.5, with `<unk>`.
pub fn toy_trigram(seed: u64) -> (Vec<Sentence>, ReferenceLm) {
    let corpus = toy_corpus(seed, 200);
    let lm = ReferenceLm::estimate(&corpus, 3, 0.5, true);
    (corpus, lm)
}

/// Every sentence over `vocab` with length `0..=max_len`.
pub fn all_sentences(vocab: &[String], max_len: usize) -> Vec<Sentence> {
    let mut out: Vec<Sentence> = vec![Vec::new()];
    let mut frontier: Vec<Sentence> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * vocab.len());
        for s in &frontier {
            for w in vocab {
                let mut t = s.clone();
                t.push(w.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn random_sentences(
    seed: u64,
    vocab: &[String],
    count: usize,
    len: std::ops::RangeInclusive<usize>,
) -> Vec<Sentence> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(len.clone());
            (0..n)
                .map(|_| vocab.choose(&mut rng).unwrap().clone())
                .collect()
        })
        .collect()
}

/// Zipf(1) sampler over `0..n`.
struct Zipf {
    cdf: Vec<f64>,
}

impl Zipf {
    fn new(n: usize) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=n)
            .map(|r| {
                acc += 1.0 / r as f64;
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        Zipf { cdf }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }
}

/// Shape of a synthetic (unnormalised) trigram model.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticShape {
    pub vocab: usize,
    pub bigram_histories: usize,
    pub bigrams_per_history: usize,
    pub trigram_histories: usize,
    pub trigrams_per_history: usize,
}

impl SyntheticShape {
    /// 10k words, about 1M word arcs once compiled.
    pub const LARGE: SyntheticShape = SyntheticShape {
        vocab: 10_000,
        bigram_histories: 3_000,
        bigrams_per_history: 100,
        trigram_histories: 7_000,
        trigrams_per_history: 100,
    };
}

pub fn synthetic_word(i: usize) -> String {
    format!("w{i}")
}

/// Random trigram ARPA text with Zipf-distributed predicted words, so that
/// low-index words ("w0", "w1", ...) are frequent and own many arcs.
/// Probabilities are not normalised; histories are always consistent.
pub fn synthetic_arpa(seed: u64, shape: SyntheticShape) -> String {
    let mut rng = rng(seed);
    let zipf = Zipf::new(shape.vocab + 1);
    // index == vocab stands for </s>
    let name = |i: usize| {
        if i == shape.vocab {
            EOS.to_string()
        } else {
            synthetic_word(i)
        }
    };
    let draw_distinct = |rng: &mut ChaCha8Rng, n: usize| -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        while set.len() < n {
            set.insert(zipf.sample(rng));
        }
        set
    };
    let lp = |rng: &mut ChaCha8Rng| -> f64 { -rng.gen_range(0.3..6.0) };
    let bo = |rng: &mut ChaCha8Rng| -> f64 { -rng.gen_range(0.0..1.0) };

    let mut histories: Vec<String> = vec![BOS.to_string()];
    let mut pool: Vec<usize> = (0..shape.vocab).collect();
    pool.shuffle(&mut rng);
    histories.extend(
        pool[..shape.bigram_histories - 1]
            .iter()
            .map(|&i| synthetic_word(i)),
    );
    let mut bigrams: Vec<(String, String)> = Vec::new();
    for h in &histories {
        for w in draw_distinct(&mut rng, shape.bigrams_per_history) {
            bigrams.push((h.clone(), name(w)));
        }
    }
    let mut candidates: Vec<usize> = (0..bigrams.len())
        .filter(|&i| bigrams[i].1 != EOS)
        .collect();
    candidates.shuffle(&mut rng);
    let mut tri_hist: Vec<usize> = candidates[..shape.trigram_histories].to_vec();
    tri_hist.sort_unstable();

    let uni_ctx: BTreeSet<&String> = histories.iter().collect();
    let mut out = String::from("\\data\\\n");
    let trigram_total = shape.trigram_histories * shape.trigrams_per_history;
    writeln!(out, "ngram 1={}", shape.vocab + 2).unwrap();
    writeln!(out, "ngram 2={}", bigrams.len()).unwrap();
    writeln!(out, "ngram 3={}", trigram_total).unwrap();
    out.push_str("\n\\1-grams:\n");
    writeln!(out, "-99\t{BOS}\t{}", bo(&mut rng)).unwrap();
    for i in 0..shape.vocab {
        let w = synthetic_word(i);
        let p = lp(&mut rng);
        if uni_ctx.contains(&w) {
            writeln!(out, "{p}\t{w}\t{}", bo(&mut rng)).unwrap();
        } else {
            writeln!(out, "{p}\t{w}").unwrap();
        }
    }
    writeln!(out, "{}\t{EOS}", lp(&mut rng)).unwrap();
    out.push_str("\n\\2-grams:\n");
    let tri_set: BTreeSet<usize> = tri_hist.iter().copied().collect();
    for (i, (h, w)) in bigrams.iter().enumerate() {
        let p = lp(&mut rng);
        if tri_set.contains(&i) {
            writeln!(out, "{p}\t{h} {w}\t{}", bo(&mut rng)).unwrap();
        } else {
            writeln!(out, "{p}\t{h} {w}").unwrap();
        }
    }
    out.push_str("\n\\3-grams:\n");
    for &i in &tri_hist {
        let (h1, h2) = &bigrams[i];
        for w in draw_distinct(&mut rng, shape.trigrams_per_history) {
            writeln!(out, "{}\t{h1} {h2} {}", lp(&mut rng), name(w)).unwrap();
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

/// Host-language corpus with embedded slots for out-of-language words.
///
/// Service nouns fill the slot in telecom-style templates; the new words
/// never occur in training. Confusable host words occur only in filler
/// sentences, so in the slot they are reached through back-off.
#[derive(Debug, Clone)]
pub struct OolFixture {
    pub corpus: Vec<Sentence>,
    pub arpa: String,
    /// (predictors in priority order, new target words)
    pub groups: Vec<(Vec<String>, Vec<String>)>,
    pub frequencies: BTreeMap<String, u64>,
    pub cases: Vec<OolCase>,
}

#[derive(Debug, Clone)]
pub struct OolCase {
    pub reference: Sentence,
    pub focus: Vec<usize>,
    pub competitors: Vec<Sentence>,
}

const OOL_TEMPLATES: &[&str] = &[
    "wo yao ban li _",
    "wo xiang kai tong _",
    "qing wen _ zen me shou fei",
    "bang wo cha yi xia _",
    "wo de _ bu neng yong le",
    "_ zen me qu xiao",
];
const OOL_NOUN_WORDS: &[&str] = &["taocan", "liuliang", "kuandai", "yewu", "huafei", "shouji"];
const OOL_FILLER: &[&str] = &[
    "hao de xie xie",
    "ni hao",
    "mei you wen ti",
    "wo ting bu qing chu",
    "zai shuo yi bian",
    "dui",
    "bu shi",
];
const OOL_CONFUSABLES: &[&str] = &["wei", "fa", "ai", "pai", "feng", "bei", "lai", "mai"];
const OOL_NEW_WORDS: &[&str] = &["wifi", "iphone", "vip", "app"];

pub fn ool_fixture(seed: u64) -> OolFixture {
    let mut rng = rng(seed);
    // noun usage falls off so predictor rank follows frequency
    let noun_weights = [40u32, 25, 15, 10, 6, 4];
    let mut corpus: Vec<Sentence> = Vec::new();
    for _ in 0..600 {
        if rng.gen_bool(0.75) {
            let t = OOL_TEMPLATES.choose(&mut rng).unwrap();
            let total: u32 = noun_weights.iter().sum();
            let mut r = rng.gen_range(0..total);
            let mut noun = 0;
            while r >= noun_weights[noun] {
                r -= noun_weights[noun];
                noun += 1;
            }
            corpus.push(
                t.split(' ')
                    .map(|w| if w == "_" { OOL_NOUN_WORDS[noun] } else { w })
                    .map(str::to_string)
                    .collect(),
            );
        } else {
            let mut s: Sentence = OOL_FILLER
                .choose(&mut rng)
                .unwrap()
                .split(' ')
                .map(str::to_string)
                .collect();
            // sprinkle a confusable into the filler with a skewed distribution
            let k = (rng.gen_range(0.0f64..1.0).powi(2) * OOL_CONFUSABLES.len() as f64) as usize;
            let at = rng.gen_range(0..=s.len());
            s.insert(at, OOL_CONFUSABLES[k].to_string());
            corpus.push(s);
        }
    }
    let lm = ReferenceLm::estimate(&corpus, 3, 0.5, false);
    let counts = count_ngrams(&corpus, 1);
    let frequencies = counts
        .iter()
        .filter(|(k, _)| k.len() == 1)
        .map(|(k, &c)| (k[0].clone(), c))
        .collect();
    let by_freq = |order: &[usize]| -> Vec<String> {
        order
            .iter()
            .map(|&i| OOL_NOUN_WORDS[i].to_string())
            .collect()
    };
    let groups = vec![
        (by_freq(&[2, 1, 0, 3, 5]), vec!["wifi".to_string()]),
        (by_freq(&[5, 4, 3, 1, 0]), vec!["iphone".to_string()]),
        (by_freq(&[0, 3, 4, 2, 1]), vec!["vip".to_string()]),
        (by_freq(&[3, 0, 5, 2, 4]), vec!["app".to_string()]),
    ];
    let mut cases = Vec::new();
    for (ti, t) in OOL_TEMPLATES.iter().enumerate() {
        for (ni, new_word) in OOL_NEW_WORDS.iter().enumerate() {
            let words: Vec<&str> = t.split(' ').collect();
            let slot = words.iter().position(|&w| w == "_").unwrap();
            let reference: Sentence = words
                .iter()
                .map(|&w| {
                    if w == "_" {
                        new_word.to_string()
                    } else {
                        w.to_string()
                    }
                })
                .collect();
            // one sound-alike host word, reached only by back-off, and one
            // service noun that is genuinely plausible in the slot
            let swap = |w: &str| {
                let mut c = reference.clone();
                c[slot] = w.to_string();
                c
            };
            let competitors = vec![
                swap(OOL_CONFUSABLES[(ti + ni) % OOL_CONFUSABLES.len()]),
                swap(OOL_NOUN_WORDS[(ti + 2 * ni) % OOL_NOUN_WORDS.len()]),
            ];
            cases.push(OolCase {
                reference,
                focus: vec![slot],
                competitors,
            });
        }
    }
    OolFixture {
        corpus,
        arpa: lm.to_arpa(),
        groups,
        frequencies,
        cases,
    }
}
