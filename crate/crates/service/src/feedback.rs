use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vicpred_core::model::LabelKind;

/// One line of the feedback log read by the next retraining cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub change_id: String,
    pub label: LabelKind,
    pub model_version: u64,
    /// The service never scored this change.
    pub unknown_change: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackAck {
    pub change_id: String,
    pub accepted: bool,
    pub duplicate: bool,
    pub unknown_change: bool,
}

/// Append-only JSONL log; the first verdict per change wins.
pub struct FeedbackLog {
    path: PathBuf,
    file: File,
    recorded: HashSet<String>,
}

impl FeedbackLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        let mut recorded = HashSet::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if let Ok(e) = serde_json::from_str::<FeedbackEntry>(&line) {
                    recorded.insert(e.change_id);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { path: path.to_path_buf(), file, recorded })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.recorded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recorded.is_empty()
    }

    pub fn record(&mut self, entry: FeedbackEntry) -> io::Result<FeedbackAck> {
        let mut ack = FeedbackAck {
            change_id: entry.change_id.clone(),
            accepted: true,
            duplicate: false,
            unknown_change: entry.unknown_change,
        };
        if self.recorded.contains(&entry.change_id) {
            ack.duplicate = true;
            return Ok(ack);
        }
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.recorded.insert(entry.change_id);
        Ok(ack)
    }
}
