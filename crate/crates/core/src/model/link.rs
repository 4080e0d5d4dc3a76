use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{ChangeRecord, IssueRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedLink {
    pub bug_id: String,
    pub reference: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BugLinks {
    /// bug id -> linked change ids, sorted and deduplicated.
    pub links: BTreeMap<String, Vec<String>>,
    /// References that name no known change or commit; left for manual review.
    pub unresolved: Vec<UnresolvedLink>,
}

/// Bug ids a description cites through `Bug:` or `Fixes:` trailers.
pub(crate) fn cited_bugs(description: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in description.lines() {
        let line = line.trim();
        let rest = ["Bug:", "Fixes:"]
            .iter()
            .find_map(|k| line.strip_prefix(k));
        if let Some(rest) = rest {
            out.extend(
                rest.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty()),
            );
        }
    }
    out
}

/// Resolves every issue to the changes that fix it.
///
/// A change is linked when the issue lists it (by change id or by any of its
/// commit hashes) or when its description cites the bug. Commits sharing one
/// change id collapse to that id.
pub fn link_bugs_to_changes(issues: &[IssueRecord], changes: &[ChangeRecord]) -> BugLinks {
    let mut resolve: HashMap<&str, &str> = HashMap::new();
    for c in changes {
        resolve.insert(&c.change_id, &c.change_id);
        for h in &c.commit_hashes {
            resolve.insert(h, &c.change_id);
        }
    }
    let mut cited: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for c in changes {
        let refs = cited_bugs(&c.description)
            .into_iter()
            .chain(c.referenced_bug_ids.iter().map(String::as_str));
        for b in refs {
            cited.entry(b).or_default().insert(&c.change_id);
        }
    }

    let mut out = BugLinks::default();
    for issue in issues {
        let mut ids: BTreeSet<&str> = BTreeSet::new();
        for r in &issue.linked_change_ids {
            match resolve.get(r.as_str()) {
                Some(id) => {
                    ids.insert(id);
                }
                None => out.unresolved.push(UnresolvedLink {
                    bug_id: issue.bug_id.clone(),
                    reference: r.clone(),
                }),
            }
        }
        if let Some(set) = cited.get(issue.bug_id.as_str()) {
            ids.extend(set.iter().copied());
        }
        out.links.insert(
            issue.bug_id.clone(),
            ids.into_iter().map(str::to_string).collect(),
        );
    }
    out
}
