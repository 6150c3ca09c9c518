use std::fmt;

use serde::{Deserialize, Serialize};

/// One invariant breach. `subject` locates it (a concept path, a production
/// label); `ids` lists the offending identifiers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Issue {
    pub subject: String,
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub ids: Vec<String>,
}

impl Issue {
    pub fn new(subject: impl Into<String>, code: impl Into<String>, message: impl Into<String>) -> Self {
        Issue { subject: subject.into(), code: code.into(), message: message.into(), ids: Vec::new() }
    }

    pub fn with_ids<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.ids = ids.into_iter().map(Into::into).collect();
        self
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.subject, self.code, self.message)
    }
}

/// Empty report means the checked value is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn push(&mut self, issue: Issue) {
        self.issues.push(issue);
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub(crate) fn finish(mut self) -> Self {
        self.issues.sort();
        self.issues.dedup();
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.issues {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}
