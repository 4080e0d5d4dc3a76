use similar::{capture_diff_slices, Algorithm, DiffTag};

use super::{FileEdit, Hunk};

/// Line diff of two images as replacement hunks.
///
/// Adjacent delete and insert runs are merged into one hunk, so a hunk that
/// removes k lines and adds k lines pairs them positionally.
pub fn diff_lines<S: AsRef<str>>(old: &[S], new: &[S]) -> Vec<Hunk> {
    let old: Vec<&str> = old.iter().map(AsRef::as_ref).collect();
    let new: Vec<&str> = new.iter().map(AsRef::as_ref).collect();
    let ops = capture_diff_slices(Algorithm::Myers, &old, &new);

    let mut hunks: Vec<Hunk> = Vec::new();
    let mut pending: Option<(std::ops::Range<usize>, std::ops::Range<usize>)> = None;
    // Positions come from running cursors; the reported new index of a
    // delete op is not reliable.
    let (mut oi, mut ni) = (0, 0);
    for op in ops {
        let (tag, o, n) = op.as_tag_tuple();
        let o = oi..oi + o.len();
        let n = ni..ni + n.len();
        (oi, ni) = (o.end, n.end);
        if tag == DiffTag::Equal {
            if let Some((o, n)) = pending.take() {
                hunks.push(make_hunk(&old, &new, o, n));
            }
            continue;
        }
        pending = Some(match pending.take() {
            Some((po, pn)) => (po.start..o.end.max(po.end), pn.start..n.end.max(pn.end)),
            None => (o, n),
        });
    }
    if let Some((o, n)) = pending {
        hunks.push(make_hunk(&old, &new, o, n));
    }
    hunks
}

fn make_hunk(
    old: &[&str],
    new: &[&str],
    o: std::ops::Range<usize>,
    n: std::ops::Range<usize>,
) -> Hunk {
    Hunk {
        old_start: o.start as u32 + 1,
        old_count: o.len() as u32,
        new_start: n.start as u32 + 1,
        new_count: n.len() as u32,
        old_lines: old[o].iter().map(|s| s.to_string()).collect(),
        new_lines: new[n].iter().map(|s| s.to_string()).collect(),
    }
}

/// Edit for one path between two file images (`None` = absent).
pub fn file_edit_from_texts(path: &str, old: Option<&str>, new: Option<&str>) -> FileEdit {
    let old_lines: Vec<&str> = old.map(|t| t.lines().collect()).unwrap_or_default();
    let new_lines: Vec<&str> = new.map(|t| t.lines().collect()).unwrap_or_default();
    FileEdit::from_hunks(path, diff_lines(&old_lines, &new_lines))
}
