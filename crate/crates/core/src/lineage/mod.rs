//! Vulnerability lineage: from fixing changes to the changes that induced them.

mod blame;
mod corpus;
mod filter;
mod history;

pub use blame::{
    added_groups, AddedOrigin, LineOrigin, Lineage, LineageError, SideEntry, SideReason,
    VicFindings, Vfl, VflKind,
};
pub use corpus::{
    build_labeled_corpus, CorpusCounts, CorpusOptions, CveFilter, LabelDelay, LabeledCorpus,
    UnresolvedEntry, UnresolvedKind,
};
pub use filter::LineFilter;
pub use history::{CommitInfo, FixtureCommit, GitHistory, HistoryError, HistoryFixture, Lines};
