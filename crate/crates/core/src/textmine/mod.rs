//! Token mining over the C/C++ lines a change adds.

mod lexer;
mod strip;

use serde::{Deserialize, Serialize};

pub use lexer::{class_of, classify_tokens, munch, tokens, TokenClass, TokenCounts, PUNCTUATORS};
pub use strip::{strip_comments_and_strings, Stripped};

use crate::model::ChangeRecord;

/// Share of each token class among all classified tokens of the added lines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TmFeatures {
    pub arithmetic: f64,
    pub comparison: f64,
    pub conditional: f64,
    pub loop_: f64,
    pub assignment: f64,
    pub logical: f64,
    pub memory_access: f64,
}

impl TmFeatures {
    pub fn from_counts(c: &TokenCounts) -> Self {
        let total = c.total();
        let ratio = |k| if total == 0 { 0.0 } else { c.get(k) as f64 / total as f64 };
        Self {
            arithmetic: ratio(TokenClass::Arithmetic),
            comparison: ratio(TokenClass::Comparison),
            conditional: ratio(TokenClass::Conditional),
            loop_: ratio(TokenClass::Loop),
            assignment: ratio(TokenClass::Assignment),
            logical: ratio(TokenClass::Logical),
            memory_access: ratio(TokenClass::MemoryAccess),
        }
    }
}

/// Token counts pooled over every added line of the change. Each file's added
/// lines are stripped as one block; deleted lines are ignored.
pub fn added_token_counts(change: &ChangeRecord) -> TokenCounts {
    let mut pooled = TokenCounts::default();
    for e in change.final_edits.iter().filter(|e| !e.binary) {
        let added: Vec<&str> = e.added_lines().map(|(_, l)| l).collect();
        if added.is_empty() {
            continue;
        }
        let stripped = strip_comments_and_strings(&added);
        pooled.merge(&classify_tokens(&stripped.lines));
    }
    pooled
}

pub fn extract_tm(change: &ChangeRecord) -> TmFeatures {
    TmFeatures::from_counts(&added_token_counts(change))
}
