use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kfwer::SelectionResult;

/// Labels treated as true signals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TruthPanel {
    labels: BTreeSet<String>,
}

impl TruthPanel {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TruthPanel {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// One label per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Panel labels absent from `universe`; these are logged, not fatal.
    pub fn unknown_labels(&self, universe: &[String]) -> Vec<String> {
        let known: BTreeSet<&str> = universe.iter().map(String::as_str).collect();
        let unknown: Vec<String> = self
            .labels
            .iter()
            .filter(|l| !known.contains(l.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            log::warn!("{} panel labels are not design columns", unknown.len());
        }
        unknown
    }
}

/// `(true discoveries, total discoveries)`.
pub fn score_against_panel(
    result: &SelectionResult,
    labels: &[String],
    panel: &TruthPanel,
) -> Result<(usize, usize)> {
    let mut hits = 0;
    for &j in &result.rejected {
        let label = labels
            .get(j)
            .ok_or_else(|| Error::UnknownLabel(format!("index {j}")))?;
        if panel.contains(label) {
            hits += 1;
        }
    }
    Ok((hits, result.len()))
}
