use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use parlascope::classify::{
    evaluate, external_score, metrics_from_labels, train_baseline, NaiveBayes, Prediction, ScoreRequest, ScorerConfig,
    TextClassifier,
};
use parlascope::corpus::{corpus_stats, ingest_directory, load_speeches, persist_speeches, SpeechRecord};
use parlascope::dataset::{
    build_metadata_task, load_manifest, merge_labeled_corpora, split_dataset, LabeledDataset, PartyWingMap, SplitSpec,
    Task,
};
use parlascope::lda::{sweep_topic_counts, train_lda, LdaConfig, SweepTemplate, TopicModel};
use parlascope::preprocess::{build_vocabulary, clean_corpus, vectorize, CleanConfig, DocTermMatrix, Vocabulary};
use parlascope::report::{
    histogram, polarity_summary, render_report, sample_speeches, top_k_extreme, ParliamentReport, ScoredSpeech,
    Thresholds, ValidationItem, DEFAULT_BINS, DEFAULT_MIN_CHARS, DEFAULT_SAMPLE_SIZE, DEFAULT_TOP_K,
};
use parlascope::vis::{export_vis, Provenance, DEFAULT_TOP_N};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{dump_effective, require_dir, require_file, RunConfig};
use crate::error::ConfigError;
use crate::{
    Command, DatasetArgs, EvalArgs, IngestArgs, LdaArgs, PreprocessArgs, PriorArgs, ReportArgs, ScoreArgs, ScorerArgs,
    ServeArgs, StatsArgs, SweepArgs, TrainArgs, VisArgs,
};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_K_MIN: usize = 5;
pub const DEFAULT_K_MAX: usize = 12;
pub const DEFAULT_REPORT_YEAR: i32 = 2020;

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::Ingest(_) => "ingest",
        Command::Stats(_) => "stats",
        Command::Preprocess(_) => "preprocess",
        Command::Lda(_) => "lda",
        Command::Sweep(_) => "sweep",
        Command::Vis(_) => "vis",
        Command::Dataset(_) => "dataset",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Score(_) => "score",
        Command::Report(_) => "report",
        Command::Serve(_) => "serve",
    }
}

/// Runs one subcommand and returns its one-line JSON summary.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Value> {
    let command_name = name(&command);
    let mut summary = match command {
        Command::Ingest(a) => ingest(a),
        Command::Stats(a) => stats(a),
        Command::Preprocess(a) => preprocess(a, cfg),
        Command::Lda(a) => lda(a, cfg),
        Command::Sweep(a) => sweep(a, cfg),
        Command::Vis(a) => vis(a, cfg),
        Command::Dataset(a) => dataset(a, cfg),
        Command::Train(a) => train(a, cfg),
        Command::Eval(a) => eval(a, cfg),
        Command::Score(a) => score(a, cfg),
        Command::Report(a) => report(a, cfg),
        Command::Serve(a) => serve(a),
    }?;
    let obj = summary.as_object_mut().expect("summaries are objects");
    obj.insert("command".into(), json!(command_name));
    obj.insert("status".into(), json!("ok"));
    Ok(summary)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn load_records(path: &Path) -> Result<Vec<SpeechRecord>> {
    require_file(path, "speech store")?;
    load_speeches(path).with_context(|| format!("reading {}", path.display()))
}

fn ingest(a: IngestArgs) -> Result<Value> {
    let corpus = a.corpus.ok_or_else(|| ConfigError("--corpus is required".into()))?;
    require_dir(&corpus, "corpus directory")?;
    if let Some(dir) = &a.annotations {
        require_dir(dir, "annotations directory")?;
    }
    let (records, report) = ingest_directory(&corpus, a.annotations.as_deref())?;
    create_parent(&a.out)?;
    persist_speeches(&records, &a.out)?;
    Ok(json!({ "output": a.out, "report": report }))
}

fn stats(a: StatsArgs) -> Result<Value> {
    let records = load_records(&a.speeches)?;
    let stats = corpus_stats(&records);
    create_parent(&a.out)?;
    stats.write_csv(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?)?;
    let (sessions, words) = stats.grand_total();
    Ok(json!({ "output": a.out, "rows": stats.rows.len(), "sessions": sessions, "words": words }))
}

fn clean_config(cfg: &RunConfig, language: Option<String>, config_dir: Option<PathBuf>) -> Result<(CleanConfig, Value)> {
    let language = language.or(cfg.language.clone()).unwrap_or_else(|| "en".into());
    let config_dir = config_dir.or(cfg.config_dir.clone()).unwrap_or_else(|| PathBuf::from("config"));
    let mut clean = CleanConfig::for_language(&config_dir, &language)?;
    if let Some(v) = cfg.clean.min_token_len {
        clean.min_token_len = v;
    }
    if let Some(v) = cfg.clean.pos_filter {
        clean.pos_filter = v;
    }
    if let Some(v) = cfg.clean.include_propn {
        clean = clean.include_propn(v);
    }
    let info = json!({ "language": language, "config_dir": config_dir });
    Ok((clean, info))
}

fn preprocess(a: PreprocessArgs, cfg: &RunConfig) -> Result<Value> {
    let records = load_records(&a.speeches)?;
    let (mut clean, info) = clean_config(cfg, a.language, a.config_dir)?;
    if let Some(v) = a.min_token_len {
        clean.min_token_len = v;
    }
    if let Some(v) = a.pos_filter {
        clean.pos_filter = v;
    }
    if let Some(v) = a.include_propn {
        clean = clean.include_propn(v);
    }
    clean.validate()?;
    let min_count = a.min_count.or(cfg.clean.min_count).unwrap_or(1);
    let regular_only = a.regular_only.or(cfg.clean.regular_only).unwrap_or(true);
    let parliament = a.parliament.or(cfg.clean.parliament.clone());

    let selected: Vec<&SpeechRecord> = records
        .iter()
        .filter(|r| !regular_only || r.is_regular_mp())
        .filter(|r| parliament.as_deref().is_none_or(|p| r.parliament == p))
        .collect();
    let (docs, report) = clean_corpus(&selected, &clean);
    let token_lists: Vec<Vec<String>> = docs.iter().map(|d| d.tokens.clone()).collect();
    let vocab = build_vocabulary(&token_lists, min_count)?;
    let matrix = vectorize(&docs, &vocab);

    create_dir(&a.out)?;
    vocab.write_csv(File::create(a.out.join("vocabulary.csv"))?)?;
    matrix.write_jsonl(BufWriter::new(File::create(a.out.join("dtm.jsonl"))?))?;
    fs::write(a.out.join("clean_report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let params = json!({
        "speeches": a.speeches,
        "text": info,
        "clean": clean,
        "min_count": min_count,
        "regular_only": regular_only,
        "parliament": parliament,
    });
    let hash = dump_effective(&a.out, "preprocess", None, &params)?;
    Ok(json!({
        "output": a.out,
        "documents": matrix.n_docs(),
        "vocabulary": vocab.len(),
        "tokens": matrix.n_tokens(),
        "vocabulary_hash": vocab.fingerprint(),
        "config_hash": hash,
        "report": report,
    }))
}

fn load_matrix(dir: &Path) -> Result<(DocTermMatrix, Vocabulary)> {
    require_dir(dir, "preprocess output")?;
    let dtm = dir.join("dtm.jsonl");
    let vocab = dir.join("vocabulary.csv");
    require_file(&dtm, "document-term matrix")?;
    require_file(&vocab, "vocabulary")?;
    let matrix = DocTermMatrix::read_jsonl(BufReader::new(File::open(&dtm)?))
        .with_context(|| format!("reading {}", dtm.display()))?;
    let vocabulary = Vocabulary::read_csv(File::open(&vocab)?).with_context(|| format!("reading {}", vocab.display()))?;
    if vocabulary.len() != matrix.vocab_size {
        bail!(ConfigError(format!(
            "vocabulary has {} terms but the matrix has {} columns",
            vocabulary.len(),
            matrix.vocab_size
        )));
    }
    Ok((matrix, vocabulary))
}

fn lda_config(k: usize, p: &PriorArgs, cfg: &RunConfig) -> LdaConfig {
    let mut c = LdaConfig::new(k);
    if let Some(a) = p.alpha.or(cfg.lda.alpha) {
        c.alpha = a;
    }
    if let Some(b) = p.beta.or(cfg.lda.beta) {
        c.beta = b;
    }
    c.iterations = p.iterations.or(cfg.lda.iterations).unwrap_or(c.iterations);
    c.burn_in = p.burn_in.or(cfg.lda.burn_in).unwrap_or(c.burn_in);
    c.seed = p.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    c
}

fn lda(a: LdaArgs, cfg: &RunConfig) -> Result<Value> {
    let (matrix, vocab) = load_matrix(&a.input)?;
    let k = a.k.or(cfg.lda.k).unwrap_or(DEFAULT_K);
    let config = lda_config(k, &a.priors, cfg);
    config.validate()?;
    let model = train_lda(&matrix, &config)?.with_vocabulary_hash(vocab.fingerprint());
    create_dir(&a.out)?;
    let path = a.out.join("model.json");
    model.save(&path)?;
    dump_effective(&a.out, "lda", Some(config.seed), &json!({ "input": a.input, "lda": config }))?;
    Ok(json!({
        "output": path,
        "k": k,
        "seed": config.seed,
        "config_hash": model.config_hash,
        "documents": model.n_docs(),
        "tokens": model.n_tokens(),
    }))
}

fn sweep(a: SweepArgs, cfg: &RunConfig) -> Result<Value> {
    let (matrix, vocab) = load_matrix(&a.input)?;
    let k_min = a.k_min.or(cfg.sweep.k_min).unwrap_or(DEFAULT_K_MIN);
    let k_max = a.k_max.or(cfg.sweep.k_max).unwrap_or(DEFAULT_K_MAX);
    let base = lda_config(k_min.max(1), &a.priors, cfg);
    let template = SweepTemplate {
        alpha: a.priors.alpha.or(cfg.lda.alpha),
        beta: base.beta,
        iterations: base.iterations,
        burn_in: base.burn_in,
        seed: base.seed,
        holdout_fraction: a.holdout_fraction.or(cfg.sweep.holdout_fraction).unwrap_or(0.1),
    };
    let result = sweep_topic_counts(&matrix, k_min, k_max, &template)?;
    create_dir(&a.out)?;
    let fingerprint = vocab.fingerprint();
    let mut files = Vec::new();
    for model in result.models {
        let path = a.out.join(format!("model_k{:02}.json", model.k()));
        model.with_vocabulary_hash(fingerprint.clone()).save(&path)?;
        files.push(path);
    }
    result.diagnostics.write_csv(File::create(a.out.join("diagnostics.csv"))?)?;
    let hash = dump_effective(
        &a.out,
        "sweep",
        Some(template.seed),
        &json!({ "input": a.input, "k_min": k_min, "k_max": k_max, "template": template }),
    )?;
    Ok(json!({
        "output": a.out,
        "models": files.len(),
        "seed": template.seed,
        "config_hash": hash,
        "most_separated_k": result.diagnostics.most_separated(),
    }))
}

fn vis(a: VisArgs, cfg: &RunConfig) -> Result<Value> {
    require_file(&a.model, "model")?;
    require_file(&a.vocabulary, "vocabulary")?;
    let model = TopicModel::load(&a.model)?;
    let vocab = Vocabulary::read_csv(File::open(&a.vocabulary)?)?;
    let fingerprint = vocab.fingerprint();
    if let Some(expected) = &model.vocabulary_hash {
        if *expected != fingerprint {
            bail!(ConfigError(format!(
                "vocabulary {} does not match the one the model was trained on",
                a.vocabulary.display()
            )));
        }
    }
    let top_n = a.top_n.or(cfg.vis.top_n).unwrap_or(DEFAULT_TOP_N);
    let mut data = export_vis(&model, &vocab, top_n)?;
    data.provenance = Some(Provenance {
        config_hash: model.config_hash.clone(),
        seed: model.config.seed,
        vocabulary_hash: Some(fingerprint),
    });
    create_parent(&a.out)?;
    data.write(&a.out)?;
    Ok(json!({ "output": a.out, "k": data.k, "top_n": top_n, "config_hash": model.config_hash }))
}

#[derive(Serialize)]
struct MergeSummary<'a> {
    per_source: &'a [parlascope::dataset::SourceCounts],
    computed: parlascope::dataset::ClassTotals,
    declared: Option<parlascope::dataset::ClassTotals>,
    discrepancies: &'a [parlascope::dataset::Discrepancy],
}

fn dataset(a: DatasetArgs, cfg: &RunConfig) -> Result<Value> {
    let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let train_fraction = a.train_fraction.or(cfg.dataset.train_fraction).unwrap_or(0.8);
    create_dir(&a.out)?;
    let mut extra = json!({});
    let (full, params) = match a.task {
        Task::Sentiment | Task::Emotion => {
            let manifest_path = a
                .manifest
                .ok_or_else(|| ConfigError(format!("--manifest is required for the {} task", a.task)))?;
            require_file(&manifest_path, "manifest")?;
            let manifest = load_manifest(&manifest_path)?;
            if manifest.task != a.task {
                bail!(ConfigError(format!("manifest is for {} but --task is {}", manifest.task, a.task)));
            }
            let base = manifest_path.parent().unwrap_or(Path::new("."));
            let report = merge_labeled_corpora(a.task, &manifest.sources(base), manifest.declared)?;
            let summary = MergeSummary {
                per_source: &report.per_source,
                computed: report.computed,
                declared: report.declared,
                discrepancies: &report.discrepancies,
            };
            fs::write(a.out.join("merge_report.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
            extra = json!({ "discrepancies": report.discrepancies.len() });
            (report.dataset, json!({ "task": a.task, "manifest": manifest_path, "train_fraction": train_fraction }))
        }
        task => {
            let speeches = a
                .speeches
                .ok_or_else(|| ConfigError(format!("--speeches is required for the {task} task")))?;
            let mut records = load_records(&speeches)?;
            if let Some(p) = a.parliament.or(cfg.dataset.parliament.clone()) {
                records.retain(|r| r.parliament == p);
            }
            let wing_path = a.wing_map.or(cfg.dataset.wing_map.clone());
            let wings = match &wing_path {
                Some(p) => {
                    require_file(p, "wing map")?;
                    Some(PartyWingMap::load(p)?)
                }
                None => None,
            };
            let n = a.n_per_class.or(cfg.dataset.n_per_class).unwrap_or(task.default_per_class());
            let ds = build_metadata_task(&records, task, wings.as_ref(), n, seed)?;
            let params = json!({
                "task": task,
                "speeches": speeches,
                "n_per_class": n,
                "wing_map": wing_path,
                "train_fraction": train_fraction,
            });
            (ds, params)
        }
    };
    let (train, test) = split_dataset(&full, &SplitSpec { train_fraction, seed })?;
    full.save(&a.out.join("dataset.jsonl"))?;
    train.save(&a.out.join("train.jsonl"))?;
    test.save(&a.out.join("test.jsonl"))?;
    let hash = dump_effective(&a.out, "dataset", Some(seed), &params)?;
    let mut summary = json!({
        "output": a.out,
        "task": a.task,
        "instances": full.len(),
        "class_counts": full.class_counts(),
        "train": train.len(),
        "test": test.len(),
        "seed": seed,
        "config_hash": hash,
    });
    if let (Some(s), Some(e)) = (summary.as_object_mut(), extra.as_object()) {
        s.extend(e.clone());
    }
    Ok(summary)
}

fn train(a: TrainArgs, cfg: &RunConfig) -> Result<Value> {
    require_file(&a.train, "training set")?;
    let data = LabeledDataset::load(a.task, &a.train)?;
    let (clean, _) = clean_config(cfg, a.language, a.config_dir)?;
    let model = train_baseline(&data, &clean)?;
    create_parent(&a.out)?;
    model.save(&a.out)?;
    Ok(json!({ "output": a.out, "instances": data.len(), "vocabulary": model.vocab_size }))
}

enum Scorer {
    Baseline(NaiveBayes, String),
    External(ScorerConfig, String),
}

impl Scorer {
    fn from_args(args: &ScorerArgs, cfg: &RunConfig) -> Result<Self> {
        if let Some(path) = &args.model {
            require_file(path, "model")?;
            return Ok(Scorer::Baseline(NaiveBayes::load(path)?, format!("baseline:{}", path.display())));
        }
        let config = match &args.scorer {
            Some(path) => {
                require_file(path, "scorer config")?;
                let text = fs::read_to_string(path)?;
                serde_json::from_str::<ScorerConfig>(&text)
                    .map_err(|e| ConfigError(format!("scorer config {}: {e}", path.display())))?
            }
            None => cfg
                .scorer
                .clone()
                .ok_or_else(|| ConfigError("one of --model or --scorer is required".into()))?,
        };
        let id = match &config.endpoint {
            parlascope::classify::ScorerEndpoint::Process { command, .. } => format!("process:{command}"),
            parlascope::classify::ScorerEndpoint::Http { url } => format!("http:{url}"),
        };
        Ok(Scorer::External(config, id))
    }

    fn id(&self) -> &str {
        match self {
            Scorer::Baseline(_, id) | Scorer::External(_, id) => id,
        }
    }

    fn scores(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>> {
        Ok(match self {
            Scorer::Baseline(model, _) => requests.iter().map(|r| model.predict(&r.text).score).collect(),
            Scorer::External(config, _) => external_score(config, requests)?,
        })
    }
}

fn eval(a: EvalArgs, cfg: &RunConfig) -> Result<Value> {
    require_file(&a.test, "test set")?;
    let test = LabeledDataset::load(a.task, &a.test)?;
    let scorer = Scorer::from_args(&a.scorer, cfg)?;
    let metrics = match &scorer {
        Scorer::Baseline(model, _) => evaluate(model, &test)?,
        Scorer::External(..) => {
            let requests: Vec<ScoreRequest> = test
                .instances
                .iter()
                .enumerate()
                .map(|(i, inst)| ScoreRequest { id: format!("t{i}"), text: inst.text.clone() })
                .collect();
            let predicted: Vec<u8> = scorer.scores(&requests)?.into_iter().map(|s| Prediction::from_score(s).label).collect();
            let gold: Vec<u8> = test.instances.iter().map(|i| i.label).collect();
            metrics_from_labels(&gold, &predicted)?
        }
    };
    if let Some(out) = &a.out {
        create_parent(out)?;
        fs::write(out, serde_json::to_string_pretty(&metrics)? + "\n")?;
    }
    Ok(json!({ "scorer": scorer.id(), "instances": test.len(), "metrics": metrics }))
}

fn score(a: ScoreArgs, cfg: &RunConfig) -> Result<Value> {
    let records = load_records(&a.speeches)?;
    let scorer = Scorer::from_args(&a.scorer, cfg)?;
    let year = a.year.or(cfg.report.year).unwrap_or(DEFAULT_REPORT_YEAR);
    let n = a.sample_size.or(cfg.report.sample_size).unwrap_or(DEFAULT_SAMPLE_SIZE);
    let min_chars = a.min_chars.or(cfg.report.min_chars).unwrap_or(DEFAULT_MIN_CHARS);
    let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);

    let mut by_parliament: BTreeMap<&str, Vec<SpeechRecord>> = BTreeMap::new();
    for r in &records {
        if a.parliament.as_deref().is_none_or(|p| r.parliament == p) {
            by_parliament.entry(r.parliament.as_str()).or_default().push(r.clone());
        }
    }
    let mut scored = Vec::new();
    let mut shortfalls = Vec::new();
    for (parliament, recs) in &by_parliament {
        let sample = sample_speeches(recs, year, min_chars, n, seed);
        if sample.shortfall {
            shortfalls.push(json!({ "parliament": parliament, "eligible": sample.eligible }));
        }
        let requests: Vec<ScoreRequest> =
            sample.speeches.iter().map(|r| ScoreRequest { id: r.id.clone(), text: r.text.clone() }).collect();
        let scores = scorer.scores(&requests)?;
        scored.extend(requests.into_iter().zip(scores).map(|(r, s)| ScoredSpeech {
            id: r.id,
            score: s,
            scorer: scorer.id().to_string(),
        }));
    }
    create_parent(&a.out)?;
    let mut out = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    for s in &scored {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(json!({
        "output": a.out,
        "scored": scored.len(),
        "parliaments": by_parliament.len(),
        "year": year,
        "seed": seed,
        "shortfalls": shortfalls,
    }))
}

fn read_scores(path: &Path) -> Result<Vec<ScoredSpeech>> {
    require_file(path, "scores")?;
    let mut scores = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoredSpeech =
            serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
        scores.push(s);
    }
    Ok(scores)
}

fn report(a: ReportArgs, cfg: &RunConfig) -> Result<Value> {
    let records = load_records(&a.speeches)?;
    let scores = read_scores(&a.scores)?;
    let thresholds = Thresholds::new(
        a.neg_threshold.or(cfg.report.neg_threshold).unwrap_or(parlascope::report::DEFAULT_NEG_THRESHOLD),
        a.pos_threshold.or(cfg.report.pos_threshold).unwrap_or(parlascope::report::DEFAULT_POS_THRESHOLD),
    )?;
    let bins = a.bins.or(cfg.report.bins).unwrap_or(DEFAULT_BINS);
    let top_k = a.top_k.or(cfg.report.top_k).unwrap_or(DEFAULT_TOP_K);
    let by_id: BTreeMap<&str, &SpeechRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut groups: BTreeMap<String, Vec<ScoredSpeech>> = BTreeMap::new();
    for s in scores {
        let record = by_id
            .get(s.id.as_str())
            .ok_or_else(|| ConfigError(format!("scored speech {} is not in the speech store", s.id)))?;
        groups.entry(record.parliament.clone()).or_default().push(s);
    }
    let scorer = groups.values().flatten().next().map(|s| s.scorer.clone()).unwrap_or_default();

    let mut rows = Vec::new();
    for (parliament, scored) in &groups {
        let values: Vec<f64> = scored.iter().map(|s| s.score).collect();
        let mut validation = BTreeMap::new();
        let mut shortfall = false;
        for &direction in &a.directions {
            let extremes = top_k_extreme(scored, top_k, direction)?;
            shortfall |= extremes.shortfall;
            let items = extremes
                .items
                .into_iter()
                .map(|s| ValidationItem { text: by_id[s.id.as_str()].text.clone(), id: s.id, score: s.score })
                .collect();
            validation.insert(direction, items);
        }
        rows.push(ParliamentReport {
            parliament: parliament.clone(),
            summary: polarity_summary(&values, thresholds)?,
            histogram: histogram(&values, bins)?,
            validation,
            sample_shortfall: shortfall,
            manual_accuracy: BTreeMap::new(),
            max_negative: false,
            max_positive: false,
        });
    }
    let bundle = render_report(&a.out, &scorer, cfg.seed, rows)?;
    Ok(json!({
        "output": a.out,
        "parliaments": bundle.parliaments.iter().map(|p| json!({
            "parliament": p.parliament,
            "pct_negative": p.summary.pct_negative,
            "pct_positive": p.summary.pct_positive,
        })).collect::<Vec<_>>(),
    }))
}

fn serve(a: ServeArgs) -> Result<Value> {
    require_dir(&a.models, "models directory")?;
    if let Some(assets) = &a.assets {
        require_dir(assets, "assets directory")?;
    }
    crate::serve::run(&a.addr, a.models, a.assets)?;
    Ok(json!({ "addr": a.addr }))
}
