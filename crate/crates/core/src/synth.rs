//! Seeded synthetic change corpus with planted temporal file locality.
//!
//! Inducing changes arrive in episodes: one file receives a run of them over
//! consecutive months from a single author, and the episode closes with a
//! fix. Background changes spread over all files with a skewed popularity.
//! Inducing changes are also somewhat larger, revised more often, reviewed
//! faster and self-approved more often.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::Period;
use crate::model::{
    ChangeRecord, FileEdit, Hunk, Identity, Label, LabelKind, LabelRecord, LabelSource, LabeledChange,
    PatchSet, Provenance, ReviewEvent, Timestamp,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub months: u32,
    pub changes: usize,
    pub vics: usize,
    /// First second of the first month.
    pub start: Timestamp,
    pub dirs: usize,
    pub files_per_dir: usize,
    pub authors: usize,
    pub min_episode_months: u32,
    pub max_episode_months: u32,
    /// Chance that an episode month holds two inducing changes instead of one.
    pub double_month_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            months: 72,
            changes: 8038,
            vics: 585,
            start: 1_325_376_000, // 2012-01-01
            dirs: 40,
            files_per_dir: 8,
            authors: 120,
            min_episode_months: 3,
            max_episode_months: 6,
            double_month_rate: 0.0,
        }
    }
}

const DOMAINS: [&str; 7] =
    ["google.com", "android.com", "samsung.com", "qualcomm.com", "kernel.org", "gmail.com", "example.org"];
const DOMAIN_WEIGHTS: [u32; 7] = [40, 20, 8, 8, 6, 12, 6];

const PLAIN_SNIPPETS: &[&str] = &[
    "int n = count + 1;",
    "if (ret < 0) return ret;",
    "for (i = 0; i < n; i++) {",
    "}",
    "status = init_device(dev);",
    "// keep the old behaviour",
    "log_info(\"ready\");",
    "while (retries-- > 0) {",
    "flags |= FLAG_READY;",
    "return 0;",
    "total += size * 2;",
    "switch (mode) {",
    "case MODE_OFF: break;",
];

const RISKY_SNIPPETS: &[&str] = &[
    "memcpy(buf->data, src, len);",
    "p->next->prev = p->prev;",
    "buf[idx] = val;",
    "len = hdr->size - offset;",
    "ptr = &table[i * stride];",
    "out[n++] = in[j];",
    "size = a->len + b->len;",
];

#[derive(Debug, Clone)]
struct Draft {
    month: u32,
    kind: LabelKind,
    files: Vec<usize>,
    author: usize,
    fixes: Option<usize>,
    episode: Option<usize>,
}

pub struct SynthCorpus {
    pub changes: Vec<ChangeRecord>,
    pub labels: Vec<LabelRecord>,
}

impl SynthCorpus {
    pub fn labeled(&self) -> Vec<LabeledChange> {
        self.changes
            .iter()
            .zip(&self.labels)
            .map(|(c, l)| LabeledChange { change: c.clone(), label: l.label.clone() })
            .collect()
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    let limit = (-mean).exp();
    let (mut k, mut p) = (0, rng.gen::<f64>());
    while p > limit {
        k += 1;
        p *= rng.gen::<f64>();
    }
    k
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn lines(rng: &mut ChaCha8Rng, n: u32, risky: f64) -> Vec<String> {
    (0..n)
        .map(|_| {
            let pool = if rng.gen_bool(risky) { RISKY_SNIPPETS } else { PLAIN_SNIPPETS };
            pool.choose(rng).unwrap().to_string()
        })
        .collect()
}

fn edit(rng: &mut ChaCha8Rng, path: &str, added: u32, deleted: u32, risky: f64) -> FileEdit {
    let start = rng.gen_range(1..400);
    let hunk = Hunk {
        old_start: start,
        old_count: deleted,
        new_start: start,
        new_count: added,
        old_lines: vec![],
        new_lines: lines(rng, added, risky),
    };
    FileEdit::from_hunks(path, vec![hunk])
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_files = cfg.dirs * cfg.files_per_dir;
    let paths: Vec<String> = (0..n_files)
        .map(|i| format!("src/d{:02}/f{:02}.c", i / cfg.files_per_dir, i % cfg.files_per_dir))
        .collect();
    let mut rank: Vec<usize> = (0..n_files).collect();
    rank.shuffle(&mut rng);
    let popularity: Vec<f64> = (0..n_files).map(|i| 1.0 / (rank[i] as f64 + 1.0).powf(0.8)).collect();
    let pick_file = WeightedIndex::new(&popularity).unwrap();
    let domain_of: Vec<&str> = {
        let d = WeightedIndex::new(DOMAIN_WEIGHTS).unwrap();
        (0..cfg.authors).map(|_| DOMAINS[d.sample(&mut rng)]).collect()
    };

    let mut drafts: Vec<Draft> = Vec::new();
    let mut vics = 0;
    let mut episode = 0;
    while vics < cfg.vics {
        let file = pick_file.sample(&mut rng);
        let len = rng.gen_range(cfg.min_episode_months..=cfg.max_episode_months);
        let first = rng.gen_range(0..cfg.months.saturating_sub(len).max(1));
        let author = rng.gen_range(0..cfg.authors);
        let mut last = None;
        for m in first..(first + len).min(cfg.months) {
            let per_month = if rng.gen_bool(cfg.double_month_rate) { 2 } else { 1 };
            for _ in 0..per_month {
                if vics == cfg.vics {
                    break;
                }
                let mut files = vec![file];
                if rng.gen_bool(0.3) {
                    files.push(pick_file.sample(&mut rng));
                }
                files.dedup();
                drafts.push(Draft { month: m, kind: LabelKind::ViC, files, author, fixes: None, episode: Some(episode) });
                vics += 1;
                last = Some(m);
            }
        }
        if let Some(m) = last {
            let fix_month = (m + 1).min(cfg.months - 1);
            let fixer = rng.gen_range(0..cfg.authors);
            drafts.push(Draft {
                month: fix_month,
                kind: LabelKind::VfC,
                files: vec![file],
                author: fixer,
                fixes: Some(episode),
                episode: None,
            });
        }
        episode += 1;
    }
    let negatives = cfg.changes.saturating_sub(drafts.len());
    for _ in 0..negatives {
        let n = 1 + usize::from(rng.gen_bool(0.35)) + usize::from(rng.gen_bool(0.15));
        let mut files: Vec<usize> = (0..n).map(|_| pick_file.sample(&mut rng)).collect();
        files.sort_unstable();
        files.dedup();
        drafts.push(Draft {
            month: rng.gen_range(0..cfg.months),
            kind: LabelKind::LNC,
            files,
            author: rng.gen_range(0..cfg.authors),
            fixes: None,
            episode: None,
        });
    }

    let month0 = Period::Month.id(cfg.start);
    let mut built: Vec<(ChangeRecord, Label, Option<usize>, Option<usize>)> = drafts
        .iter()
        .map(|d| {
            let vic = d.kind == LabelKind::ViC;
            let (ms, me) = (Period::Month.start(month0 + i64::from(d.month)), Period::Month.start(month0 + i64::from(d.month) + 1));
            let submitted_at = rng.gen_range(ms..me);
            let review = (rng.gen::<f64>().max(1e-9).ln() * -(if vic { 0.6 } else { 1.6 }) * 86_400.0) as i64;
            let created_at = submitted_at - review.clamp(60, 40 * 86_400);
            let size_mu = if vic { 3.3 } else { 2.7 };
            let risky = if vic { 0.45 } else { 0.3 };
            let final_edits: Vec<FileEdit> = d
                .files
                .iter()
                .map(|&f| {
                    let added = (size_mu + normal(&mut rng)).exp().round().clamp(1.0, 400.0) as u32;
                    let deleted = (added as f64 * rng.gen_range(0.0..0.8)).round() as u32;
                    edit(&mut rng, &paths[f], added, deleted, risky)
                })
                .collect();
            let revisions = poisson(&mut rng, if vic { 1.8 } else { 1.0 }).min(12);
            let mut patch_sets = vec![PatchSet { index: 1, uploaded_at: created_at, file_edits: final_edits.clone() }];
            for k in 0..revisions {
                let f = d.files[rng.gen_range(0..d.files.len())];
                let r = rng.gen_range(1..=20);
                let at = created_at + (review * i64::from(k + 1)) / i64::from(revisions + 1);
                patch_sets.push(PatchSet { index: k + 2, uploaded_at: at, file_edits: vec![edit(&mut rng, &paths[f], r, r, risky)] });
            }
            let author = Identity::new(format!("u{:03}", d.author), domain_of[d.author]);
            let mut reviews = Vec::new();
            let self_approve = rng.gen_bool(if vic { 0.22 } else { 0.07 });
            let mut others: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..cfg.authors)).filter(|&a| a != d.author).collect();
            others.dedup();
            if self_approve {
                reviews.push(ReviewEvent { reviewer: author.clone(), score: 2, timestamp: submitted_at - 30 });
                for &o in &others {
                    if rng.gen_bool(0.5) {
                        reviews.push(ReviewEvent { reviewer: Identity::new(format!("u{o:03}"), domain_of[o]), score: -1, timestamp: submitted_at - 60 });
                    }
                }
            } else {
                for (j, &o) in others.iter().enumerate() {
                    let score = if j == 0 { 2 } else if rng.gen_bool(0.8) { 1 } else { -1 };
                    reviews.push(ReviewEvent { reviewer: Identity::new(format!("u{o:03}"), domain_of[o]), score, timestamp: submitted_at - 60 * (j as i64 + 1) });
                }
                if reviews.is_empty() {
                    reviews.push(ReviewEvent { reviewer: author.clone(), score: 2, timestamp: submitted_at - 30 });
                }
            }
            let change = ChangeRecord {
                change_id: String::new(),
                commit_hashes: vec![format!("{:040x}", rng.gen::<u128>())],
                project: "platform/synth".into(),
                author,
                reviews,
                patch_sets,
                created_at,
                submitted_at,
                final_edits,
                description: String::new(),
                referenced_bug_ids: vec![],
            };
            let label = Label {
                kind: d.kind,
                source: if d.kind == LabelKind::LNC { LabelSource::Assumed } else { LabelSource::Lineage },
                provenance: None,
                known_at: submitted_at,
            };
            (change, label, d.episode, d.fixes)
        })
        .collect();
    built.sort_by(|a, b| (a.0.submitted_at, &a.0.commit_hashes).cmp(&(b.0.submitted_at, &b.0.commit_hashes)));
    let mut fix_of_episode = std::collections::HashMap::new();
    for (i, b) in built.iter_mut().enumerate() {
        b.0.change_id = format!("I{:06}", i + 1);
        if let Some(e) = b.3 {
            fix_of_episode.insert(e, b.0.change_id.clone());
            b.0.description = format!("Fix memory safety issue\n\nBug: {}", 100_000 + e);
        }
    }
    let mut changes = Vec::with_capacity(built.len());
    let mut labels = Vec::with_capacity(built.len());
    for (c, mut l, ep, fixes) in built {
        if let Some(e) = ep.or(fixes) {
            l.provenance = fix_of_episode.get(&e).map(|v| Provenance {
                cve_id: format!("CVE-{}-{:04}", 2012 + e / 40, 1000 + e),
                vfc_change_id: v.clone(),
            });
        }
        labels.push(LabelRecord { change_id: c.change_id.clone(), label: l });
        changes.push(c);
    }
    SynthCorpus { changes, labels }
}
