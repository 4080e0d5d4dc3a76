//! Hand-built and random fixture histories plus a forward line-provenance
//! oracle that replays every commit and tags each line with its origin.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vicpred_core::lineage::{FixtureCommit, GitHistory, HistoryFixture, LineFilter};
use vicpred_core::model::{diff_lines, ChangeRecord, Identity, PatchSet};

pub struct LineageCase {
    pub name: &'static str,
    pub fixture: HistoryFixture,
    /// Fix change id and the inducing change ids worked out by hand.
    pub expected: Vec<(&'static str, Vec<&'static str>)>,
}

pub fn fixture(base: &[(&str, &str)], commits: &[(&str, &[(&str, Option<&str>)])]) -> HistoryFixture {
    HistoryFixture {
        base: base.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect(),
        commits: commits
            .iter()
            .map(|(id, files)| FixtureCommit {
                hash: format!("h{}", id.to_lowercase()),
                change_id: Some(id.to_string()),
                files: files.iter().map(|(p, t)| (p.to_string(), t.map(str::to_string))).collect(),
            })
            .collect(),
    }
}

/// Change record for commit `idx` with the edits it applied.
pub fn change_at(h: &GitHistory, idx: usize) -> ChangeRecord {
    let c = h.commit(idx);
    let edits = h.edits_of(idx);
    ChangeRecord {
        change_id: c.change_id.clone(),
        commit_hashes: vec![c.hash.clone()],
        project: "fixture".into(),
        author: Identity::new("dev", "example.org"),
        reviews: vec![],
        patch_sets: vec![PatchSet { index: 1, uploaded_at: 0, file_edits: edits.clone() }],
        created_at: 0,
        submitted_at: 0,
        final_edits: edits,
        description: String::new(),
        referenced_bug_ids: vec![],
    }
}

const FILLER: &str = "int filler;\n";

pub fn hand_cases() -> Vec<LineageCase> {
    vec![
        LineageCase {
            name: "deleted line",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("int a;\nint b;\n"))]),
                    ("B", &[("x.c", Some(FILLER))]),
                    ("C", &[("a.c", Some("int a;\nint b;\nint c;\n"))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("int a;\nint c;\n"))]),
                ],
            ),
            expected: vec![("V", vec!["A"])],
        },
        LineageCase {
            name: "modified then deleted",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("f(1);\ng(2);\nh(3);\n"))]),
                    ("B", &[("a.c", Some("f(1);\ng(20);\nh(3);\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("f(1);\nh(3);\n"))]),
                ],
            ),
            expected: vec![("V", vec!["B"])],
        },
        LineageCase {
            name: "added group blames next valid line",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("void f() {\n  use(p);\n}\n"))]),
                    ("B", &[("a.c", Some("void f() {\n  p = get();\n  use(p);\n}\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("void f() {\n  if (!ok)\n    return;\n  p = get();\n  use(p);\n}\n"))]),
                ],
            ),
            expected: vec![("V", vec!["B"])],
        },
        LineageCase {
            name: "next valid line skips blank and comment",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("int main() {\n  run();\n}\n"))]),
                    ("B", &[("a.c", Some("int main() {\n  setup();\n\n  // go\n  run();\n}\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("int main() {\n  setup();\n  check();\n\n  // go\n  run();\n}\n"))]),
                ],
            ),
            expected: vec![("V", vec!["A"])],
        },
        LineageCase {
            name: "new file is self-origin",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("one();\ntwo();\n"))]),
                    ("B", &[("x.c", Some(FILLER))]),
                    ("C", &[("a.c", Some("one();\ntwo();\nthree();\n"))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("n.c", Some("int fresh;\nint more;\n")), ("a.c", Some("one();\ntwo();\n"))]),
                ],
            ),
            expected: vec![("V", vec!["C"])],
        },
        LineageCase {
            name: "only new file",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("one();\n"))]),
                    ("B", &[("x.c", Some(FILLER))]),
                    ("C", &[("y.c", Some(FILLER))]),
                    ("D", &[("z.c", Some(FILLER))]),
                    ("V", &[("n.c", Some("int fresh;\n"))]),
                ],
            ),
            expected: vec![("V", vec![])],
        },
        LineageCase {
            name: "comment deletion is filtered",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("// old comment\nint x = 1;\n"))]),
                    ("B", &[("a.c", Some("// old comment\nint x = 1;\nint y = 2;\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("int x = 1;\n"))]),
                ],
            ),
            expected: vec![("V", vec!["B"])],
        },
        LineageCase {
            name: "include and guard lines are filtered",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("h.h", Some("#ifndef FOO_H\n#define FOO_H\n#include <a.h>\nint f();\n#endif\n"))]),
                    ("B", &[("h.h", Some("#ifndef FOO_H\n#define FOO_H\n#include <a.h>\nint f();\nint g();\n#endif\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("h.h", Some("#ifndef FOO_H\n#define FOO_H\nint f();\n#endif\n"))]),
                ],
            ),
            expected: vec![("V", vec!["B"])],
        },
        LineageCase {
            name: "several files and inducing changes",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("a1;\na2;\na3;\n"))]),
                    ("B", &[("b.c", Some("b1;\nb2;\n"))]),
                    ("C", &[("a.c", Some("a1;\nc2;\na3;\n"))]),
                    ("D", &[("x.c", Some(FILLER))]),
                    ("E", &[("b.c", Some("b1;\nb2;\ne3;\n"))]),
                    ("V", &[("a.c", Some("a1;\nfixed;\na3;\n")), ("b.c", Some("b1;\ne3;\n"))]),
                ],
            ),
            expected: vec![("V", vec!["A", "B", "C"])],
        },
        LineageCase {
            name: "line numbers shift across insertions",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("l1;\nl2;\nbad;\nl4;\nl5;\n"))]),
                    ("B", &[("a.c", Some("b0;\nl1;\nl2;\nbad;\nl4;\nl5;\n"))]),
                    ("C", &[("a.c", Some("c0;\nc1;\nb0;\nl1;\nl2;\nbad;\nl4;\nl5;\n"))]),
                    ("D", &[("a.c", Some("c0;\nc1;\nb0;\nl1;\nl2;\nbad;\nl4;\n"))]),
                    ("E", &[("a.c", Some("e0;\nc0;\nc1;\nb0;\nl1;\nl2;\nbad;\nl4;\n"))]),
                    ("F", &[("x.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("e0;\nc0;\nc1;\nb0;\nl1;\nl2;\nl4;\n"))]),
                ],
            ),
            expected: vec![("V", vec!["A"])],
        },
        LineageCase {
            name: "append at end blames nearest valid line before",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("int a;\nint b;\n"))]),
                    ("B", &[("a.c", Some("int a;\nint b;\nint c;\n"))]),
                    ("C", &[("x.c", Some(FILLER))]),
                    ("D", &[("y.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("int a;\nint b;\nint c;\n\nint d;\n"))]),
                ],
            ),
            expected: vec![("V", vec!["B"])],
        },
        LineageCase {
            name: "pre-corpus origin goes to the side report",
            fixture: fixture(
                &[("a.c", "old1;\nold2;\n")],
                &[
                    ("A", &[("a.c", Some("old1;\nold2;\nnew3;\n"))]),
                    ("B", &[("x.c", Some(FILLER))]),
                    ("C", &[("y.c", Some(FILLER))]),
                    ("D", &[("z.c", Some(FILLER))]),
                    ("V", &[("a.c", Some("old2;\nnew3;\n"))]),
                ],
            ),
            expected: vec![("V", vec![])],
        },
        LineageCase {
            name: "two fixes in one history",
            fixture: fixture(
                &[],
                &[
                    ("A", &[("a.c", Some("p1;\np2;\np3;\n"))]),
                    ("B", &[("a.c", Some("p1;\nq2;\np3;\n"))]),
                    ("V1", &[("a.c", Some("p1;\np3;\n"))]),
                    ("C", &[("a.c", Some("p1;\np3;\nr4;\n"))]),
                    ("D", &[("x.c", Some(FILLER))]),
                    ("V2", &[("a.c", Some("p1;\nr4;\n"))]),
                ],
            ),
            expected: vec![("V1", vec!["B"]), ("V2", vec!["A"])],
        },
    ]
}

const VOCAB: &[&str] = &[
    "int a;",
    "x++;",
    "",
    "// note",
    "y = f(x);",
    "#include <z.h>",
    "return r;",
    "if (p) {",
    "}",
    "buf[i] = 0;",
    "/* block */",
    "p->q = n;",
    "call(a, b);",
];

/// Random linear history over a few files. The last commit is the fix.
pub fn random_fixture(seed: u64) -> HistoryFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files = ["a.c", "b.c", "inc/c.h"];
    let mut current: BTreeMap<&str, Option<Vec<String>>> = files.iter().map(|f| (*f, None)).collect();
    let word = |rng: &mut ChaCha8Rng| VOCAB[rng.gen_range(0..VOCAB.len())].to_string();
    let mut base = BTreeMap::new();
    if rng.gen_bool(0.5) {
        let lines: Vec<String> = (0..rng.gen_range(1..6)).map(|_| word(&mut rng)).collect();
        base.insert("a.c".to_string(), lines.join("\n"));
        current.insert("a.c", Some(lines));
    }
    let n = rng.gen_range(5..=20);
    let mut commits = Vec::new();
    for k in 0..n {
        let mut touched = BTreeMap::new();
        for _ in 0..rng.gen_range(1..=2) {
            let f = files[rng.gen_range(0..files.len())];
            let mut lines = current[f].clone().unwrap_or_default();
            for _ in 0..rng.gen_range(1..=4) {
                let op = rng.gen_range(0..3);
                if op == 0 || lines.is_empty() {
                    let at = rng.gen_range(0..=lines.len());
                    lines.insert(at, word(&mut rng));
                } else if op == 1 {
                    let at = rng.gen_range(0..lines.len());
                    lines.remove(at);
                } else {
                    let at = rng.gen_range(0..lines.len());
                    lines[at] = word(&mut rng);
                }
            }
            current.insert(f, Some(lines.clone()));
            touched.insert(f.to_string(), Some(lines.join("\n")));
        }
        commits.push(FixtureCommit { hash: format!("r{seed}x{k}"), change_id: Some(format!("R{k}")), files: touched });
    }
    HistoryFixture { base, commits }
}

/// Forward replay: tags every line of every file with the commit that
/// introduced it, then reads off the origins of the fix's lines.
pub fn forward_oracle(h: &GitHistory, vfc: usize, filter: &LineFilter) -> BTreeSet<String> {
    let mut prov: BTreeMap<String, Vec<Option<usize>>> = BTreeMap::new();
    let empty: Vec<String> = Vec::new();
    for k in 0..vfc {
        let info = h.commit(k);
        for path in info.touched().map(str::to_string).collect::<Vec<_>>() {
            let before = h.file_before(k, &path);
            let after = h.file_at(k, &path);
            let old = before.as_deref().unwrap_or(&empty);
            let new = after.as_deref().unwrap_or(&empty);
            let origin = (!info.baseline).then_some(k);
            let old_tags = prov.get(&path).cloned().unwrap_or_default();
            let mut tags = Vec::with_capacity(new.len());
            let mut oi = 0usize;
            for hunk in diff_lines(old, new) {
                let keep_until = hunk.old_start as usize - 1;
                while oi < keep_until {
                    tags.push(old_tags[oi]);
                    oi += 1;
                }
                oi += hunk.old_count as usize;
                tags.extend(std::iter::repeat(origin).take(hunk.new_count as usize));
            }
            while oi < old.len() {
                tags.push(old_tags[oi]);
                oi += 1;
            }
            assert_eq!(tags.len(), new.len(), "oracle replay out of step");
            prov.insert(path, tags);
        }
    }
    let mut out = BTreeSet::new();
    let info = h.commit(vfc);
    for path in info.touched() {
        let Some(before) = h.file_before(vfc, path) else { continue };
        let after = h.file_at(vfc, path);
        let new = after.as_deref().unwrap_or(&empty);
        let hunks = diff_lines(&before, new);
        let tags = &prov[path];
        let mut added = BTreeSet::new();
        for hk in &hunks {
            for i in 0..hk.old_count {
                let n = (hk.old_start + i) as usize;
                if filter.is_valid(&before[n - 1]) {
                    if let Some(k) = tags[n - 1] {
                        out.insert(h.commit(k).change_id.clone());
                    }
                }
            }
            added.extend((0..hk.new_count).map(|i| (hk.new_start + i) as usize));
        }
        let anchor_ok = |m: usize| !added.contains(&m) && filter.is_valid(&new[m - 1]);
        for &n in &added {
            if !filter.is_valid(&new[n - 1]) {
                continue;
            }
            let anchor = (n + 1..=new.len()).find(|&m| anchor_ok(m)).or_else(|| (1..n).rev().find(|&m| anchor_ok(m)));
            let Some(m) = anchor else { continue };
            let shift: i64 = hunks
                .iter()
                .filter(|hk| ((hk.new_start + hk.new_count) as usize) <= m)
                .map(|hk| i64::from(hk.new_count) - i64::from(hk.old_count))
                .sum();
            let pre = (m as i64 - shift) as usize;
            if let Some(k) = tags[pre - 1] {
                out.insert(h.commit(k).change_id.clone());
            }
        }
    }
    out.remove(&info.change_id);
    out
}
