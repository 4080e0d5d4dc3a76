use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use vicpred_core::classify::{train, ClassifierKind, Dataset, Hyperparameters};
use vicpred_core::eval::{
    ablation_csv, join_labels, nfold_features, run_ablation, run_nfold_on, run_online, ExperimentConfig,
    OnlineConfig, Window, ABLATION_PRESETS, UNIVERSAL_PRESETS,
};
use vicpred_core::features::{full_schema, resolve_subset, DomainRankTable, Featurizer, HistoryConfig, HistoryState, Period};
use vicpred_core::lineage::{build_labeled_corpus, CorpusOptions, CveFilter, GitHistory, LabelDelay, LineFilter, Lineage};
use vicpred_core::model::{emit_changes, emit_issues, ingest_changes, ingest_issues, ChangeRecord, LabelRecord, LabeledChange};
use vicpred_core::synth::{generate, SynthConfig};
use vicpred_service::{render_notification, Notification, Service, ServiceConfig, Snapshot, Trigger, Verdict};

use crate::matrix::{causal_matrix, Matrix};
use crate::run::{invalid, jsonl, manifest_beside, runtime, Outcome, Run};
use crate::{
    AblationArgs, Command, CorpusOpts, EvalCommand, FeaturizeArgs, HistoryOpts, IngestArgs, LabelArgs, ModelOpts,
    NfoldArgs, OnlineArgs, ScoreArgs, ServeArgs, SynthArgs, TrainArgs,
};

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Label(a) => label(a),
        Command::Featurize(a) => featurize(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(EvalCommand::Nfold(a)) => nfold(a),
        Command::Eval(EvalCommand::Online(a)) => online(a),
        Command::Eval(EvalCommand::Ablation(a)) => ablation(a),
        Command::Score(a) => score(a),
        Command::Serve(a) => serve(a),
        Command::Synth(a) => synth(a),
    }
}

fn read_changes(run: &mut Run, path: &Path) -> Outcome<Vec<ChangeRecord>> {
    let text = run.read(path)?;
    ingest_changes(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_labels(run: &mut Run, path: &Path) -> Outcome<Vec<LabelRecord>> {
    let text = run.read(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn read_corpus(run: &mut Run, c: &CorpusOpts) -> Outcome<Vec<LabeledChange>> {
    let changes = read_changes(run, &c.changes)?;
    let labels = read_labels(run, &c.labels)?;
    join_labels(&changes, &labels).map_err(invalid)
}

fn history_config(h: &HistoryOpts) -> Outcome<HistoryConfig> {
    let period = Period::parse(&h.period).ok_or_else(|| invalid(format!("unknown period {:?}", h.period)))?;
    if h.decay_half_life_days.is_some_and(|d| d.is_nan() || d <= 0.0) {
        return Err(invalid("decay half-life must be positive"));
    }
    Ok(HistoryConfig { period, decay_half_life_days: h.decay_half_life_days })
}

fn ranks(run: &mut Run, h: &HistoryOpts) -> Outcome<DomainRankTable> {
    match &h.ranks {
        Some(p) => DomainRankTable::from_toml(&run.read(p)?).map_err(invalid),
        None => Ok(DomainRankTable::default()),
    }
}

fn experiment(run: &mut Run, m: &ModelOpts, h: &HistoryOpts) -> Outcome<ExperimentConfig> {
    let classifier: ClassifierKind = m.classifier.parse().map_err(invalid)?;
    if !(0.0..=1.0).contains(&m.threshold) {
        return Err(invalid("threshold must be in [0, 1]"));
    }
    if m.positive_weight.is_nan() || m.positive_weight <= 0.0 {
        return Err(invalid("positive weight must be positive"));
    }
    resolve_subset(&m.features).map_err(invalid)?;
    let params = Hyperparameters { n_trees: m.trees, positive_weight: m.positive_weight, ..Hyperparameters::default() };
    let cfg = ExperimentConfig {
        classifier,
        params,
        threshold: m.threshold,
        features: m.features.clone(),
        seed: m.seed,
        history: history_config(h)?,
        ranks: ranks(run, h)?,
    };
    run.resolve(&cfg);
    Ok(cfg)
}

fn ingest(a: IngestArgs) -> Outcome {
    let mut run = Run::new("ingest", &a, None);
    let changes = read_changes(&mut run, &a.changes)?;
    run.write(&a.out.join("changes.jsonl"), emit_changes(&changes))?;
    let mut issues = 0;
    if let Some(p) = &a.issues {
        let text = run.read(p)?;
        let parsed = ingest_issues(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        issues = parsed.len();
        run.write(&a.out.join("issues.jsonl"), emit_issues(&parsed))?;
    }
    run.finish(&a.out.join("manifest.json"))?;
    println!("ingested {} changes, {issues} issues", changes.len());
    Ok(())
}

fn label(a: LabelArgs) -> Outcome {
    let mut run = Run::new("label", &a, None);
    let label_delay =
        LabelDelay::parse(&a.label_delay).ok_or_else(|| invalid(format!("bad label delay {:?}", a.label_delay)))?;
    let changes = read_changes(&mut run, &a.changes)?;
    let text = run.read(&a.issues)?;
    let issues = ingest_issues(&text).map_err(|e| invalid(format!("{}: {e}", a.issues.display())))?;
    let history = if a.history.is_dir() {
        let h = GitHistory::from_git_repo(&a.history).map_err(invalid)?;
        let head = h.commits().last().map(|c| c.hash.clone()).unwrap_or_default();
        run.note_input(&a.history, format!("git:{head}"));
        h
    } else {
        GitHistory::from_fixture_json(&run.read(&a.history)?).map_err(invalid)?
    };
    let lineage = Lineage::new(&history, LineFilter::default());
    let options = CorpusOptions {
        cve_filter: CveFilter { require_cve: !a.include_non_cve, ..CveFilter::default() },
        label_delay,
    };
    let corpus = build_labeled_corpus(&changes, &issues, &lineage, &options);
    run.write(&a.out.join("labels.jsonl"), jsonl(&corpus.labels))?;
    run.write(&a.out.join("unresolved.jsonl"), jsonl(&corpus.unresolved))?;
    run.finish(&a.out.join("manifest.json"))?;
    let c = &corpus.counts;
    println!("labeled {} ViC, {} VfC, {} LNC; {} unresolved", c.vic, c.vfc, c.lnc, corpus.unresolved.len());
    Ok(())
}

fn featurize(a: FeaturizeArgs) -> Outcome {
    let mut run = Run::new("featurize", &a, None);
    let history = history_config(&a.history)?;
    let featurizer = Featurizer::new(ranks(&mut run, &a.history)?);
    let corpus = read_corpus(&mut run, &CorpusOpts { changes: a.changes.clone(), labels: a.labels.clone() })?;
    let matrix = causal_matrix(&corpus, &featurizer, history)?;
    run.write(&a.out, matrix.to_csv())?;
    run.finish(&manifest_beside(&a.out))?;
    println!("wrote {} rows x {} features", matrix.rows.len(), matrix.names.len());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Outcome {
    let mut run = Run::new("train", &a, Some(a.model.seed));
    let cfg = experiment(&mut run, &a.model, &a.history)?;
    let matrix = Matrix::from_csv(&run.read(&a.matrix)?)?;
    let full = full_schema();
    let wanted = cfg.subset().map_err(invalid)?;
    let columns = wanted
        .iter()
        .map(|&i| {
            let name = &full.features[i].name;
            matrix.names.iter().position(|n| n == name).ok_or_else(|| invalid(format!("matrix has no column {name}")))
        })
        .collect::<Outcome<Vec<usize>>>()?;
    let mut data = Dataset::new(full.select(&wanted));
    for r in &matrix.rows {
        data.push(r.change_id.clone(), columns.iter().map(|&j| r.values[j]).collect(), r.target).map_err(invalid)?;
    }
    let mut model = train(cfg.classifier, &cfg.params, &data, cfg.seed).map_err(invalid)?;
    model.threshold = cfg.threshold;
    run.write(&a.out, model.to_json())?;

    if let (Some(state_out), Some(changes), Some(labels)) = (&a.state_out, &a.changes, &a.labels) {
        let mut corpus = read_corpus(&mut run, &CorpusOpts { changes: changes.clone(), labels: labels.clone() })?;
        corpus.sort_by(|x, y| (x.label.known_at, &x.change.change_id).cmp(&(y.label.known_at, &y.change.change_id)));
        let mut state = HistoryState::new(cfg.history);
        for c in &corpus {
            state.record_labeled_change(&c.change, &c.label).map_err(invalid)?;
        }
        run.write(state_out, state.to_checkpoint())?;
    }
    run.finish(&manifest_beside(&a.out))?;
    println!("trained {} on {} rows ({} ViC)", cfg.classifier, data.len(), data.positives());
    Ok(())
}

fn write_report(mut run: Run, out: &Path, report: &vicpred_core::eval::EvaluationReport) -> Outcome {
    run.write(&out.join("report.json"), report.to_json())?;
    run.write(&out.join("report.csv"), report.to_csv())?;
    run.finish(&out.join("manifest.json"))?;
    let p = &report.pooled;
    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{:.1}%", 100.0 * x));
    println!(
        "{}: ViC recall {}, ViC precision {}, ROC {}",
        report.protocol,
        pct(p.vic_recall),
        pct(p.vic_precision),
        p.roc_area.map_or("n/a".into(), |x| format!("{x:.3}"))
    );
    Ok(())
}

fn nfold(a: NfoldArgs) -> Outcome {
    let mut run = Run::new("eval nfold", &a, Some(a.model.seed));
    let cfg = experiment(&mut run, &a.model, &a.history)?;
    let corpus = read_corpus(&mut run, &a.corpus)?;
    let matrix = nfold_features(&corpus, a.n, &cfg).map_err(invalid)?;
    let report = run_nfold_on(&matrix, &corpus, &cfg).map_err(runtime)?;
    write_report(run, &a.out, &report)
}

fn online(a: OnlineArgs) -> Outcome {
    let mut run = Run::new("eval online", &a, Some(a.model.seed));
    let cfg = experiment(&mut run, &a.model, &a.history)?;
    let window = Window::parse(&a.window).ok_or_else(|| invalid(format!("unknown window {:?}", a.window)))?;
    let label_delay = match &a.label_delay {
        Some(s) => Some(LabelDelay::parse(s).ok_or_else(|| invalid(format!("bad label delay {s:?}")))?),
        None => None,
    };
    let corpus = read_corpus(&mut run, &a.corpus)?;
    let oc = OnlineConfig { period: cfg.history.period, window, label_delay };
    let report = run_online(&corpus, &oc, &cfg).map_err(runtime)?;
    write_report(run, &a.out, &report)
}

#[derive(Serialize)]
struct AblationOut<'a> {
    rows: &'a [vicpred_core::eval::AblationRow],
}

fn ablation(a: AblationArgs) -> Outcome {
    let mut run = Run::new("eval ablation", &a, Some(a.model.seed));
    let cfg = experiment(&mut run, &a.model, &a.history)?;
    let subsets: Vec<String> = match (&a.subsets, a.preset.as_str()) {
        (Some(s), _) => s.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        (None, "families") => ABLATION_PRESETS.iter().map(|s| s.to_string()).collect(),
        (None, "universal") => UNIVERSAL_PRESETS.iter().map(|s| s.to_string()).collect(),
        (None, p) => return Err(invalid(format!("unknown preset {p:?}"))),
    };
    if subsets.is_empty() {
        return Err(invalid("no subsets given"));
    }
    for s in &subsets {
        resolve_subset(s).map_err(invalid)?;
    }
    let corpus = read_corpus(&mut run, &a.corpus)?;
    let matrix = nfold_features(&corpus, a.n, &cfg).map_err(invalid)?;
    let rows = run_ablation(&matrix, &corpus, &cfg, &subsets).map_err(runtime)?;
    run.write(&a.out.join("ablation.csv"), ablation_csv(&rows))?;
    let json = serde_json::to_string_pretty(&AblationOut { rows: &rows }).expect("rows serialize");
    run.write(&a.out.join("ablation.json"), json)?;
    run.finish(&a.out.join("manifest.json"))?;
    for r in &rows {
        let recall = r.report.pooled.vic_recall.map_or("n/a".into(), |x| format!("{:.1}%", 100.0 * x));
        println!("{:<40} ViC recall {recall}", r.subset);
    }
    Ok(())
}

fn parse_trigger(s: &str) -> Outcome<Trigger> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| invalid(format!("unknown trigger {s:?}")))
}

#[derive(Serialize)]
struct ScoreOut {
    #[serde(flatten)]
    verdict: Verdict,
    notification: Option<Notification>,
}

fn score(a: ScoreArgs) -> Outcome {
    let mut run = Run::new("score", &a, None);
    let trigger = parse_trigger(&a.trigger)?;
    let text = run.read(&a.change)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", a.change.display())))?;
    let mut changes = ingest_changes(&value.to_string()).map_err(|e| invalid(format!("{}: {e}", a.change.display())))?;
    let change = changes.pop().ok_or_else(|| invalid("no change given"))?;
    for p in &a.model {
        run.read(p)?;
    }
    run.read(&a.state)?;
    let table = match &a.ranks {
        Some(p) => DomainRankTable::from_toml(&run.read(p)?).map_err(invalid)?,
        None => DomainRankTable::default(),
    };
    let snapshot = Snapshot::load(1, &a.model, &a.state).map_err(invalid)?;
    let verdict = snapshot
        .verdict(&Featurizer::new(table), &change, trigger, a.top_k, a.testing_threshold)
        .map_err(invalid)?;
    let out = ScoreOut { notification: render_notification(&verdict), verdict };
    let mut json = serde_json::to_string_pretty(&out).expect("verdict serializes");
    json.push('\n');
    run.write(&a.out, &json)?;
    run.finish(&manifest_beside(&a.out))?;
    print!("{json}");
    Ok(())
}

fn serve(a: ServeArgs) -> Outcome {
    let addr: SocketAddr =
        format!("{}:{}", a.host, a.port).parse().map_err(|e| invalid(format!("bad address: {e}")))?;
    let snapshot = Snapshot::load(1, &a.model, &a.state).map_err(invalid)?;
    let mut config = ServiceConfig::new(a.feedback_log.clone());
    config.reviewers = a.reviewers.split(',').map(str::trim).filter(|r| !r.is_empty()).map(String::from).collect();
    config.pool_state = a.pool_state.clone();
    config.testing_threshold = a.testing_threshold;
    if let Some(p) = &a.ranks {
        let text = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        config.ranks = DomainRankTable::from_toml(&text).map_err(invalid)?;
    }
    let service = Arc::new(Service::new(config, snapshot).map_err(runtime)?);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(runtime)?;
    eprintln!("listening on http://{addr}");
    rt.block_on(vicpred_service::serve(service, addr)).map_err(runtime)
}

fn synth(a: SynthArgs) -> Outcome {
    let mut run = Run::new("synth", &a, Some(a.seed));
    if a.vics > a.changes || a.months == 0 || !(0.0..=1.0).contains(&a.double_month_rate) {
        return Err(invalid("need months > 0, vics <= changes and a rate in [0, 1]"));
    }
    let cfg = SynthConfig {
        seed: a.seed,
        months: a.months,
        changes: a.changes,
        vics: a.vics,
        double_month_rate: a.double_month_rate,
        ..SynthConfig::default()
    };
    let corpus = generate(&cfg);
    run.write(&a.out.join("changes.jsonl"), emit_changes(&corpus.changes))?;
    run.write(&a.out.join("labels.jsonl"), jsonl(&corpus.labels))?;
    run.finish(&a.out.join("manifest.json"))?;
    println!("generated {} changes", corpus.changes.len());
    Ok(())
}
