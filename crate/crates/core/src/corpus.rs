//! Built-in identities, stored one JSON object per line in
//! `data/corpus.jsonl` and compiled into the crate.

use serde::{Deserialize, Serialize};

use crate::oracle::{check_identity, CheckOptions, CheckReport, Identity};

const CORPUS: &str = include_str!("../data/corpus.jsonl");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub identity: Identity,
    /// Short description of where the identity comes from.
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, thiserror::Error)]
#[error("corpus line {line}: {source}")]
pub struct CorpusError {
    pub line: usize,
    pub source: serde_json::Error,
}

/// Parses a JSONL corpus; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| CorpusError { line: i + 1, source }))
        .collect()
}

/// The built-in corpus.
pub fn corpus() -> Vec<CorpusEntry> {
    parse_corpus(CORPUS).expect("the built-in corpus parses")
}

pub fn find(id: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.identity.id == id)
}

/// Entries whose id contains `filter` (case-insensitive).
pub fn filtered(filter: Option<&str>) -> Vec<CorpusEntry> {
    let f = filter.map(str::to_lowercase);
    corpus()
        .into_iter()
        .filter(|e| f.as_ref().is_none_or(|f| e.identity.id.to_lowercase().contains(f)))
        .collect()
}

impl CorpusEntry {
    pub fn verify(&self, opts: &CheckOptions) -> CheckReport {
        check_identity(&self.identity, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let c = corpus();
        let mut ids: Vec<_> = c.iter().map(|e| e.identity.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), c.len());
    }

    #[test]
    fn bad_line_is_reported() {
        let err = parse_corpus("\n{\"id\":1}\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
