//! JSON inputs: similar-pair configurations and ranking cases.

use std::collections::{BTreeMap, BTreeSet};

use gboost_core::{EnhanceConfig, RankingCase, SimilarPairGroup};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{what}: {source}")]
    Json {
        what: &'static str,
        source: serde_json::Error,
    },
    #[error("group {group}: new word {word:?} is not one of the targets")]
    StrayNewWord { group: usize, word: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairsFile {
    theta: f64,
    max_predictors: usize,
    groups: Vec<GroupFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    predictors: Vec<String>,
    targets: Vec<String>,
    #[serde(default)]
    frequencies: BTreeMap<String, u64>,
    #[serde(default)]
    new_words: BTreeSet<String>,
}

pub fn read_pairs(json: &str) -> Result<EnhanceConfig, ConfigError> {
    let file: PairsFile = serde_json::from_str(json).map_err(|source| ConfigError::Json {
        what: "pairs file",
        source,
    })?;
    let mut groups = Vec::with_capacity(file.groups.len());
    for (i, g) in file.groups.into_iter().enumerate() {
        if let Some(w) = g.new_words.iter().find(|w| !g.targets.contains(w)) {
            return Err(ConfigError::StrayNewWord {
                group: i,
                word: w.clone(),
            });
        }
        groups.push(SimilarPairGroup {
            predictors: g.predictors,
            targets: g.targets,
            frequencies: g.frequencies,
            new_words: g.new_words,
        });
    }
    Ok(EnhanceConfig {
        theta: file.theta,
        max_predictors: file.max_predictors,
        groups,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    reference: Vec<String>,
    focus: Vec<usize>,
    competitors: Vec<Vec<String>>,
}

pub fn read_cases(json: &str) -> Result<Vec<RankingCase>, ConfigError> {
    let cases: Vec<CaseFile> = serde_json::from_str(json).map_err(|source| ConfigError::Json {
        what: "cases file",
        source,
    })?;
    Ok(cases
        .into_iter()
        .map(|c| RankingCase {
            reference: c.reference,
            focus: c.focus,
            competitors: c.competitors,
        })
        .collect())
}
