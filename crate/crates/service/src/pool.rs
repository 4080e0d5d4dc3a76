use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Reviewers taking turns on flagged changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewerPool {
    pub reviewers: Vec<String>,
    pub cursor: usize,
}

impl ReviewerPool {
    pub fn new(reviewers: Vec<String>) -> Self {
        Self { reviewers, cursor: 0 }
    }

    /// Restores the rotation from `path` when it was saved for the same
    /// reviewer list; otherwise starts from the first reviewer.
    pub fn load_or_new(path: &Path, reviewers: Vec<String>) -> io::Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str::<ReviewerPool>(&text) {
                Ok(saved) if saved.reviewers == reviewers && saved.cursor < reviewers.len().max(1) => Ok(saved),
                _ => Ok(Self::new(reviewers)),
            },
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new(reviewers)),
            Err(e) => Err(e),
        }
    }

    pub fn next_reviewer(&mut self) -> Option<String> {
        let r = self.reviewers.get(self.cursor)?.clone();
        self.cursor = (self.cursor + 1) % self.reviewers.len();
        Some(r)
    }

    /// Writes through a temporary file so a crash never leaves a torn file.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(self).expect("pool serializes"))?;
        fs::rename(tmp, path)
    }
}
