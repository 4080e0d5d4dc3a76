//! Hand-computed feature values on small changes and histories.

use vicpred_core::features::{
    extract_cc, extract_hp, extract_pc, extract_rp, DomainRankTable, Featurizer, HistoryConfig, HistoryState,
    Period, FEATURES,
};
use vicpred_core::model::{
    ChangeRecord, FileEdit, Hunk, Identity, Label, LabelKind, LabelSource, PatchSet, ReviewEvent, Timestamp,
};
use vicpred_core::textmine::extract_tm;

pub fn edit(path: &str, added: &[&str], deleted: u32) -> FileEdit {
    FileEdit::from_hunks(
        path,
        vec![Hunk {
            old_start: 1,
            old_count: deleted,
            new_start: 1,
            new_count: added.len() as u32,
            old_lines: (0..deleted).map(|i| format!("old{i};")).collect(),
            new_lines: added.iter().map(|s| s.to_string()).collect(),
        }],
    )
}

fn lines(n: usize) -> Vec<&'static str> {
    vec!["x;"; n]
}

pub struct ChangeSpec<'a> {
    pub id: &'a str,
    pub author: (&'a str, &'a str),
    pub reviews: &'a [(&'a str, &'a str, i8)],
    pub edits: Vec<FileEdit>,
    pub patch_churn: &'a [usize],
    pub created: Timestamp,
    pub submitted: Timestamp,
}

impl Default for ChangeSpec<'_> {
    fn default() -> Self {
        Self {
            id: "C",
            author: ("alice", "example.org"),
            reviews: &[],
            edits: vec![edit("a.c", &["x;"], 0)],
            patch_churn: &[1],
            created: 0,
            submitted: 0,
        }
    }
}

pub fn change(s: ChangeSpec) -> ChangeRecord {
    ChangeRecord {
        change_id: s.id.into(),
        commit_hashes: vec![],
        project: "p".into(),
        author: Identity::new(s.author.0, s.author.1),
        reviews: s
            .reviews
            .iter()
            .map(|&(a, d, score)| ReviewEvent { reviewer: Identity::new(a, d), score, timestamp: s.submitted })
            .collect(),
        patch_sets: s
            .patch_churn
            .iter()
            .enumerate()
            .map(|(i, &n)| PatchSet { index: i as u32 + 1, uploaded_at: s.created, file_edits: vec![edit("a.c", &lines(n), 0)] })
            .collect(),
        created_at: s.created,
        submitted_at: s.submitted,
        final_edits: s.edits,
        description: String::new(),
        referenced_bug_ids: vec![],
    }
}

fn touching(id: &str, author: &str, reviews: &'static [(&'static str, &'static str, i8)], files: &[(&str, usize)], at: Timestamp) -> ChangeRecord {
    change(ChangeSpec {
        id,
        author: (author, "example.org"),
        reviews,
        edits: files.iter().map(|&(p, n)| edit(p, &lines(n), 0)).collect(),
        submitted: at,
        created: at,
        ..Default::default()
    })
}

pub fn label(kind: LabelKind, known_at: Timestamp) -> Label {
    Label { kind, source: LabelSource::Manual, provenance: None, known_at }
}

fn col(name: &str) -> usize {
    FEATURES.iter().position(|f| f.0 == name).expect("feature name")
}

pub struct MicroCase {
    pub name: String,
    pub got: f64,
    pub want: f64,
}

/// Every case: library value next to the value worked out by hand.
pub fn micro_cases() -> Vec<MicroCase> {
    let mut out = Vec::new();
    let mut push = |name: &str, got: f64, want: f64| out.push(MicroCase { name: name.into(), got, want });
    let t = DomainRankTable::default();
    let hp = |author: (&'static str, &'static str), reviews: &'static [(&'static str, &'static str, i8)]| {
        extract_hp(&change(ChangeSpec { author, reviews, ..Default::default() }), &t)
    };

    push("HP author google", hp(("a", "google.com"), &[]).0 as f64, 1.0);
    push("HP author subdomain", hp(("a", "dev.android.com"), &[]).0 as f64, 2.0);
    push("HP author unknown domain", hp(("a", "example.org"), &[]).0 as f64, 5.0);
    push("HP reviewer least trusted", hp(("a", "google.com"), &[("b", "kernel.org", 2), ("c", "google.com", 1)]).1 as f64, 4.0);
    push("HP reviewer ignores -2", hp(("a", "google.com"), &[("b", "google.com", 2), ("e", "example.org", -2)]).1 as f64, 1.0);
    push("HP reviewer counts -1", hp(("a", "google.com"), &[("b", "google.com", 2), ("e", "example.org", -1)]).1 as f64, 5.0);
    push("HP reviewer falls back to author", hp(("a", "samsung.com"), &[]).1 as f64, 3.0);
    push("HP reviewer ignores self vote", hp(("a", "qualcomm.com"), &[("a", "qualcomm.com", 2)]).1 as f64, 3.0);
    let custom = DomainRankTable::from_toml("default_rank = 7\n[[ranks]]\npattern = \"*.corp.example\"\nrank = 1\n").unwrap();
    push("HP custom table wildcard", custom.rank("build.corp.example") as f64, 1.0);
    push("HP custom table default", custom.rank("google.com") as f64, 7.0);

    let cc_change = change(ChangeSpec {
        edits: vec![edit("a.c", &lines(3), 1), edit("b.c", &lines(2), 0), {
            let mut e = edit("img.png", &lines(10), 4);
            e.binary = true;
            e
        }],
        patch_churn: &[10, 4, 6],
        ..Default::default()
    });
    let (add, del) = extract_cc(&cc_change);
    push("CC add sums text files", add as f64, 5.0);
    push("CC del sums text files", del as f64, 1.0);
    let pc = extract_pc(&cc_change);
    push("PC count", pc.count as f64, 3.0);
    push("PC revision", pc.revision as f64, 10.0);
    push("PC relative revision", pc.relative_revision, 10.0 / 6.0);
    push("PC avg patchset", pc.avg, 5.0);
    push("PC max patchset", pc.max as f64, 10.0);
    push("PC min patchset", pc.min as f64, 4.0);
    let single = extract_pc(&change(ChangeSpec { patch_churn: &[7], ..Default::default() }));
    push("PC single revision", single.revision as f64, 0.0);
    push("PC single avg", single.avg, 0.0);

    // Friday 2016-03-04 10:00 to Sunday 2016-03-06 15:30 UTC.
    let (created, submitted) = (1_457_085_600, 1_457_278_200);
    let rp = |reviews: &'static [(&'static str, &'static str, i8)], created, submitted| {
        extract_rp(&change(ChangeSpec { reviews, created, submitted, ..Default::default() }))
    };
    let timed = rp(&[], created, submitted);
    push("RP time", timed.0 as f64, 192_600.0);
    push("RP weekday sunday", timed.1 as f64, 1.0);
    push("RP hour", timed.2 as f64, 15.0);
    push("RP time never negative", rp(&[], submitted, created).0 as f64, 0.0);
    push("RP self +2 alone", f64::from(u8::from(rp(&[("alice", "example.org", 2)], 0, 0).3)), 1.0);
    push("RP self +2 with other +1", f64::from(u8::from(rp(&[("alice", "example.org", 2), ("bob", "x.org", 1)], 0, 0).3)), 0.0);
    push("RP self +2 with other -1", f64::from(u8::from(rp(&[("alice", "example.org", 2), ("bob", "x.org", -1)], 0, 0).3)), 1.0);
    push("RP self +1 only", f64::from(u8::from(rp(&[("alice", "example.org", 1)], 0, 0).3)), 0.0);

    let t0 = 1_457_568_000;
    let mut hh = HistoryState::new(HistoryConfig::default());
    let mut hh_decay = HistoryState::new(HistoryConfig { decay_half_life_days: Some(10.0), ..Default::default() });
    for s in [&mut hh, &mut hh_decay] {
        s.record_labeled_change(&touching("H1", "alice", &[("bob", "example.org", 2)], &[("a.c", 1)], t0), &label(LabelKind::LNC, t0)).unwrap();
        s.record_labeled_change(&touching("H2", "alice", &[("carol", "example.org", 1)], &[("a.c", 1)], t0), &label(LabelKind::ViC, t0)).unwrap();
        s.record_labeled_change(&touching("H3", "bob", &[], &[("b.c", 1)], t0), &label(LabelKind::LNC, t0)).unwrap();
    }
    let probe = touching(
        "H4",
        "alice",
        &[("bob", "example.org", 2), ("carol", "example.org", -1), ("dave", "example.org", 1), ("erin", "example.org", -2)],
        &[("a.c", 1)],
        t0,
    );
    let (author, max, min, avg) = hh.extract_hh(&probe, t0);
    push("HH author", author, -1.5);
    push("HH reviewer max", max, 0.0);
    push("HH reviewer min", min, -2.0);
    push("HH reviewer avg", avg, -2.0 / 3.0);
    push("HH no reviewers", hh.extract_hh(&touching("H5", "bob", &[], &[("a.c", 1)], t0), t0).1, 0.0);
    push("HH decay after two half-lives", hh_decay.hh_of("alice", t0 + 20 * 86_400), -0.75);
    push("HH unknown account", hh.hh_of("zed", t0), 0.0);

    let mut vh = HistoryState::new(HistoryConfig::default());
    let vh_feed: [(&str, &[(&str, usize)], LabelKind); 6] = [
        ("L1", &[("src/a.c", 1), ("src/b.c", 1)], LabelKind::LNC),
        ("L2", &[("src/a.c", 1)], LabelKind::LNC),
        ("V1", &[("src/b.c", 1)], LabelKind::ViC),
        ("L3", &[("inc/a.h", 1)], LabelKind::LNC),
        ("F1", &[("lib/z.c", 1)], LabelKind::VfC),
        ("L4", &[("src/d.c", 1)], LabelKind::LNC),
    ];
    for (id, files, kind) in vh_feed {
        vh.record_labeled_change(&touching(id, "x", &[], files, t0), &label(kind, t0)).unwrap();
    }
    let v = vh.extract_vh(&touching("Q", "x", &[], &[("src/a.c", 1), ("lib/y.c", 1)], t0));
    push("VH temporal max", v[0], 2.0);
    push("VH temporal min", v[1], 0.0);
    push("VH temporal avg", v[2], 1.0);
    push("VH spatial max", v[3], 1.0);
    push("VH spatial min", v[4], 1.0 / 3.0);
    push("VH spatial avg", v[5], 2.0 / 3.0);
    push("VH temporal of inducing file", vh.vh_score("src/b.c") as f64, -2.0);
    push("VH spatial of isolated file", vh.spatial_score("new/q.c"), 0.0);

    let (feb, mar, apr) = (1_455_062_400, 1_457_568_000, 1_459_468_800);
    let mut pt = HistoryState::new(HistoryConfig { period: Period::Month, ..Default::default() });
    let pt_feed: [(&str, &[(&str, usize)], LabelKind, Timestamp); 4] = [
        ("P1", &[("x.c", 10)], LabelKind::LNC, feb),
        ("P2", &[("x.c", 4)], LabelKind::VfC, feb),
        ("P3", &[("x.c", 3), ("y.c", 5)], LabelKind::LNC, mar),
        ("P4", &[("y.c", 2)], LabelKind::ViC, mar),
    ];
    for (id, files, kind, at) in pt_feed {
        pt.record_labeled_change(&touching(id, "x", &[], files, at), &label(kind, at)).unwrap();
    }
    let q = touching("Q", "x", &[], &[("x.c", 1), ("y.c", 1)], mar);
    let in_march = pt.extract_pt(&q, mar + 3600);
    push("PT change volume", in_march.0, -2.0);
    push("PT fix volume", in_march.1, -0.5);
    push("PT inducing volume", in_march.2, 0.5);
    let in_april = pt.extract_pt(&q, apr);
    push("PT change volume next period", in_april.0, -5.0);
    push("PT fix volume next period", in_april.1, 0.0);
    push("PT inducing volume next period", in_april.2, -0.5);

    let tm = |added: &[&str]| extract_tm(&change(ChangeSpec { edits: vec![edit("a.c", added, 0)], ..Default::default() }));
    let mixed = tm(&["if (a->b == c) x += y[i];"]);
    push("TM conditional", mixed.conditional, 1.0 / 9.0);
    push("TM comparison", mixed.comparison, 1.0 / 9.0);
    push("TM assignment", mixed.assignment, 1.0 / 9.0);
    push("TM memory access", mixed.memory_access, 3.0 / 9.0);
    push("TM arithmetic absent", mixed.arithmetic, 0.0);
    let quoted = tm(&["while (n--) s = \"a+b\"; // x * y"]);
    push("TM loop skips string and comment", quoted.loop_, 1.0 / 6.0);
    push("TM arithmetic skips string and comment", quoted.arithmetic, 1.0 / 6.0);
    push("TM logical", tm(&["m = a & ~b | c << 2;"]).logical, 4.0 / 6.0);
    let block = tm(&["/* for", "while */ x++;"]);
    push("TM block comment across lines", block.loop_, 0.0);
    push("TM increment after block comment", block.arithmetic, 0.5);
    push("TM no added lines", tm(&[]).arithmetic, 0.0);

    let fz = Featurizer::new(t);
    let row = fz.featurize(
        &change(ChangeSpec { reviews: &[("alice", "example.org", 2)], patch_churn: &[3, 1], ..Default::default() }),
        &hh,
        t0,
    );
    push("assembled self approval column", row[col("RP_plus2_self")], 1.0);
    push("assembled revision column", row[col("PC_revision")], 1.0);
    push("assembled author history column", row[col("HH_author")], -1.5);
    out
}
