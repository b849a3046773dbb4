//! Subcommands of the `fidelity` binary.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::agreement::{fleiss_kappa, AnnotationMatrix};
use crate::config::{require_paths, GroupPair, RunConfig, CORPUS_FILE, MODEL_FILE};
use crate::corpus::{load_corpus, save_corpus, Corpus, CorpusFormat, GroupFilter};
use crate::error::{Error, Result};
use crate::fightin::{
    load_reference_counts, log_odds, prior_from_counts, top_k, uniform_prior, Direction, LogOddsMetadata,
    PRIOR_EPSILON,
};
use crate::lexicon::Lexicon;
use crate::semsim::{match_topics, random_baseline, EmbeddingTable, LabeledSet, OovPolicy, SurfaceForms};
use crate::synthgen::{expand_plan, generate, CompletionClient, GenerateOptions, HttpClient, MockClient};
use crate::topicmodel::{
    build_matrix, consolidate, fit_lda, prevalence_diff, write_prevalence_csv, StopWords, TopicMapping, TopicModel,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "fidelity", version, about = "Synthetic corpus generation and corpus-fidelity analytics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random component; overrides the config.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Generate with the offline mock instead of the HTTP endpoint.
    #[arg(long, global = true)]
    pub mock: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Expand the generation plan and collect completions into a corpus.
    Generate {
        /// Exit 0 even when some jobs failed after retries.
        #[arg(long)]
        allow_partial: bool,
    },
    /// Document counts per demographic margin.
    Stats {
        #[arg(long, value_name = "PATH")]
        corpus: Vec<PathBuf>,
    },
    /// Lexicon log-odds between two document groups.
    Logodds(PairArgs),
    /// Fit LDA and write the model, keywords and document-topic proportions.
    Topics {
        #[arg(long, value_name = "PATH")]
        corpus: Vec<PathBuf>,
    },
    /// Bootstrap difference in topic prevalence between two groups.
    Prevalence {
        #[command(flatten)]
        pair: PairArgs,
        /// Fitted model; defaults to the one in the output directory.
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
    },
    /// Match keyword sets across two files by averaged-embedding cosine.
    Similarity {
        /// CSV with `label,keywords` rows, keywords separated by spaces.
        #[arg(long, value_name = "PATH")]
        a: PathBuf,
        #[arg(long, value_name = "PATH")]
        b: PathBuf,
    },
    /// Fleiss' kappa of an items-by-labels count matrix.
    Kappa {
        #[arg(long, value_name = "PATH")]
        matrix: PathBuf,
    },
    /// Collect the outputs in the output directory into report.md.
    Report,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Group filter such as `race=Asian,gender=woman`; with --b, replaces
    /// the configured pairs.
    #[arg(long, value_name = "FILTER", requires = "b")]
    pub a: Option<String>,
    #[arg(long, value_name = "FILTER", requires = "a")]
    pub b: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub corpus: Vec<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Stats { .. } => "stats",
            Command::Logodds(_) => "logodds",
            Command::Topics { .. } => "topics",
            Command::Prevalence { .. } => "prevalence",
            Command::Similarity { .. } => "similarity",
            Command::Kappa { .. } => "kappa",
            Command::Report => "report",
        }
    }
}

/// Loads the configuration and applies the global overrides.
pub fn load_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(o) = &global.out {
        cfg.out = o.clone();
    }
    cfg.mock |= global.mock;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(&cli.global)?;
    let mut run = Run::new(cli.command.name(), &cfg);
    let result = match &cli.command {
        Command::Generate { allow_partial } => cmd_generate(&cfg, &mut run, *allow_partial),
        Command::Stats { corpus } => cmd_stats(&cfg, &mut run, corpus),
        Command::Logodds(p) => cmd_logodds(&cfg, &mut run, p),
        Command::Topics { corpus } => cmd_topics(&cfg, &mut run, corpus),
        Command::Prevalence { pair, model } => cmd_prevalence(&cfg, &mut run, pair, model.as_deref()),
        Command::Similarity { a, b } => cmd_similarity(&cfg, &mut run, a, b),
        Command::Kappa { matrix } => cmd_kappa(&cfg, &mut run, matrix),
        Command::Report => cmd_report(&cfg, &mut run),
    };
    // Metadata accompanies any outputs, including those of a partial run.
    if !run.outputs.is_empty() {
        run.finish()?;
    }
    result
}

/// Bookkeeping for the run-metadata file written next to a command's outputs.
struct Run {
    out: PathBuf,
    command: &'static str,
    meta: BTreeMap<String, Value>,
    outputs: Vec<String>,
}

impl Run {
    fn new(command: &'static str, cfg: &RunConfig) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("command".into(), json!(command));
        meta.insert("version".into(), json!(VERSION));
        meta.insert("seed".into(), json!(cfg.seed));
        meta.insert("config".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
        Run {
            out: cfg.out.clone(),
            command,
            meta,
            outputs: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        self.meta.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))
    }

    fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, v)?;
            w.write_all(b"\n").map_err(|e| Error::io(name, e))
        })
    }

    fn finish(mut self) -> Result<()> {
        let outputs = std::mem::take(&mut self.outputs);
        self.set("outputs", outputs);
        let meta = std::mem::take(&mut self.meta);
        let name = format!("run_metadata.{}.json", self.command);
        self.write_json(&name, &meta)
    }
}

fn load_corpora(paths: &[PathBuf]) -> Result<Corpus> {
    require_paths(paths.iter().map(PathBuf::as_path))?;
    let mut docs = Vec::new();
    let mut sources = Vec::new();
    for p in paths {
        let c = load_corpus(p, CorpusFormat::from_path(p))?;
        sources.push(c.provenance().to_string());
        docs.extend(c.documents().iter().cloned());
    }
    Corpus::new(docs, sources.join(" + "))
}

/// Explicit `--corpus` paths win over the configured ones.
fn corpus_for(cfg: &RunConfig, run: &mut Run, overrides: &[PathBuf]) -> Result<Corpus> {
    let paths = if overrides.is_empty() {
        cfg.corpus_paths()
    } else {
        overrides.to_vec()
    };
    run.set("corpus", recorded_paths(cfg, &paths));
    load_corpora(&paths)
}

/// Paths as written in metadata: files inside the output directory are
/// recorded relative to it.
fn recorded_paths(cfg: &RunConfig, paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.strip_prefix(&cfg.out).unwrap_or(p).display().to_string())
        .collect()
}

fn pairs(cfg_pairs: &[GroupPair], args: &PairArgs) -> Result<Vec<(GroupFilter, GroupFilter)>> {
    let raw = match (&args.a, &args.b) {
        (Some(a), Some(b)) => vec![GroupPair {
            a: a.clone(),
            b: b.clone(),
        }],
        _ => cfg_pairs.to_vec(),
    };
    if raw.is_empty() {
        return Err(Error::Config("no group pairs configured".into()));
    }
    raw.iter().map(|p| Ok((p.a.parse()?, p.b.parse()?))).collect()
}

fn group_corpus(corpus: &Corpus, g: &GroupFilter) -> Result<Corpus> {
    let sub = corpus.filter(|p| g.matches(p));
    if sub.is_empty() {
        return Err(Error::EmptyGroup(g.to_string()));
    }
    Ok(sub)
}

fn generation_client(cfg: &RunConfig) -> Result<Box<dyn CompletionClient>> {
    if cfg.mock {
        Ok(Box::new(MockClient::new(cfg.seed)))
    } else {
        Ok(Box::new(HttpClient::from_env(cfg.llm.clone())?))
    }
}

fn cmd_generate(cfg: &RunConfig, run: &mut Run, allow_partial: bool) -> Result<()> {
    let jobs = expand_plan(&cfg.generation.to_plan()?)?;
    // The client is built before anything is written, so a missing API key
    // leaves no output behind.
    let client = generation_client(cfg)?;
    log::info!("generating {} documents with {}", jobs.len(), client.describe());
    let opts = GenerateOptions {
        max_concurrent: if cfg.mock { 1 } else { cfg.llm.max_concurrent },
        retry: cfg.llm.retry.clone(),
    };
    let (corpus, report) = generate(&jobs, client.as_ref(), &opts)?;
    run.prepare()?;
    let path = run.path(CORPUS_FILE);
    save_corpus(&corpus, &path, CorpusFormat::Jsonl)?;
    run.write_json("completion_report.json", &report)?;
    run.set("client", client.describe());
    run.set("jobs", jobs.len());
    run.set("succeeded", report.succeeded());
    run.set("failed", report.failed());
    let failed = report.failed();
    println!("{} documents written, {failed} failed", report.succeeded());
    if failed > 0 && !allow_partial {
        return Err(Error::Upstream(format!("{failed} generation jobs failed")));
    }
    Ok(())
}

fn cmd_stats(cfg: &RunConfig, run: &mut Run, corpus: &[PathBuf]) -> Result<()> {
    let corpus = corpus_for(cfg, run, corpus)?;
    let stats = corpus.stats();
    run.prepare()?;
    run.write_with("stats.csv", |w| Ok(stats.write_csv(w)?))?;
    run.write_json("stats.json", &stats_json(&stats))?;
    print!("{stats}");
    Ok(())
}

fn stats_json(stats: &crate::corpus::CorpusStats) -> Value {
    json!({ "total": stats.total, "margins": stats.margins() })
}

fn load_lexicon(cfg: &RunConfig) -> Result<Lexicon> {
    let path = cfg
        .lexicon
        .as_ref()
        .ok_or_else(|| Error::Config("no lexicon configured".into()))?;
    require_paths([path.as_path()])?;
    Lexicon::load(path)
}

fn cmd_logodds(cfg: &RunConfig, run: &mut Run, args: &PairArgs) -> Result<()> {
    let pairs = pairs(&cfg.logodds.pairs, args)?;
    if let Some(p) = &cfg.logodds.prior {
        require_paths([p.as_path()])?;
    }
    let lexicon = load_lexicon(cfg)?;
    let corpus = corpus_for(cfg, run, &args.corpus)?;
    let prior = match &cfg.logodds.prior {
        Some(p) => prior_from_counts(&load_reference_counts(p)?, cfg.logodds.scale)?,
        None => uniform_prior(lexicon.categories().values().cloned(), cfg.logodds.scale)?,
    };
    let lexicon_name = cfg.lexicon.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
    run.set("prior", prior.source());
    run.prepare()?;
    for (a, b) in &pairs {
        let ca = lexicon.count_categories(&group_corpus(&corpus, a)?);
        let cb = lexicon.count_categories(&group_corpus(&corpus, b)?);
        let result = log_odds(&ca, &cb, &prior)?;
        let stem = format!("logodds_{}_vs_{}", a.slug(), b.slug());
        let (an, bn) = (a.to_string(), b.to_string());
        run.write_with(&format!("{stem}.csv"), |w| Ok(result.write_csv(w, &an, &bn)?))?;
        for &k in &cfg.logodds.top_k {
            let pos = top_k(&result, k, Direction::Positive);
            let neg = top_k(&result, k, Direction::Negative);
            run.write_with(&format!("{stem}_top{k}.csv"), |w| Ok(write_top_table(w, &pos, &neg)?))?;
        }
        let meta = LogOddsMetadata {
            group_i: an,
            group_j: bn,
            prior_source: prior.source().to_string(),
            prior_scale: cfg.logodds.scale,
            prior_epsilon: PRIOR_EPSILON,
            lexicon: lexicon_name.clone(),
            tokens_i: ca.total_tokens,
            tokens_j: cb.total_tokens,
        };
        run.write_json(&format!("{stem}.meta.json"), &meta)?;
        println!("{a} (+) vs {b} (-)");
        for (i, ((pc, pd), (nc, nd))) in pos_neg(&result, 5).into_iter().enumerate() {
            println!("  {:>2}  {pc:<16} {pd:>9.4}   {nc:<16} {nd:>9.4}", i + 1);
        }
    }
    Ok(())
}

fn pos_neg(result: &crate::fightin::LogOddsResult, k: usize) -> Vec<((String, f64), (String, f64))> {
    top_k(result, k, Direction::Positive)
        .into_iter()
        .zip(top_k(result, k, Direction::Negative))
        .collect()
}

/// Side-by-side table: rank, positive category and delta, negative category and delta.
fn write_top_table<W: Write>(w: W, pos: &[(String, f64)], neg: &[(String, f64)]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "positive", "positive_delta", "negative", "negative_delta"])?;
    for (i, ((pc, pd), (nc, nd))) in pos.iter().zip(neg).enumerate() {
        out.write_record([(i + 1).to_string(), pc.clone(), pd.to_string(), nc.clone(), nd.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn load_mapping(cfg: &RunConfig) -> Result<Option<TopicMapping>> {
    match &cfg.topics.mapping {
        Some(p) => {
            require_paths([p.as_path()])?;
            Ok(Some(TopicMapping::load(p)?))
        }
        None => Ok(None),
    }
}

fn cmd_topics(cfg: &RunConfig, run: &mut Run, corpus: &[PathBuf]) -> Result<()> {
    let stopwords = match &cfg.topics.stopwords {
        Some(p) => {
            require_paths([p.as_path()])?;
            StopWords::load(p)?
        }
        None => StopWords::english(),
    };
    let mapping = load_mapping(cfg)?;
    let corpus = corpus_for(cfg, run, corpus)?;
    let (vocab, matrix) = build_matrix(&corpus, cfg.topics.min_df, &stopwords)?;
    let params = cfg.topics.lda_params(cfg.seed);
    log::info!(
        "fitting K={} on {} documents, {} terms",
        params.k,
        matrix.n_docs(),
        vocab.len()
    );
    let model = fit_lda(&vocab, &matrix, &params)?;
    run.set("lda", &params);
    run.set("documents", matrix.n_docs());
    run.set("terms", vocab.len());
    run.prepare()?;
    let path = run.path(MODEL_FILE);
    model.save(&path)?;

    let n = cfg.topics.n_keywords;
    run.write_with("topic_keywords.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["topic", "label", "rank", "keyword", "weight"])?;
        for t in 0..model.k {
            let ks = model.top_keywords(t, n)?;
            let label = mapping.as_ref().and_then(|m| m.label(t)).unwrap_or("");
            for (r, kw) in ks.keywords.iter().enumerate() {
                let weight = model.phi[t][model.vocabulary.id(kw).unwrap_or(0)];
                out.write_record([t.to_string(), label.to_string(), (r + 1).to_string(), kw.clone(), weight.to_string()])?;
            }
        }
        out.flush().map_err(|e| Error::io("topic_keywords.csv", e))
    })?;
    run.write_with("theta.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["doc_id".to_string()];
        header.extend((0..model.k).map(|t| format!("topic_{t}")));
        out.write_record(&header)?;
        for (id, row) in model.doc_ids.iter().zip(&model.theta) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(f64::to_string));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("theta.csv", e))
    })?;
    run.write_with("log_likelihood.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "log_likelihood"])?;
        for (i, ll) in &model.log_likelihood {
            out.write_record([i.to_string(), ll.to_string()])?;
        }
        out.flush().map_err(|e| Error::io("log_likelihood.csv", e))
    })?;
    for t in 0..model.k {
        let ks = model.top_keywords(t, 8)?;
        println!("topic {t:>2}: {}", ks.keywords.join(" "));
    }
    Ok(())
}

fn cmd_prevalence(cfg: &RunConfig, run: &mut Run, args: &PairArgs, model_path: Option<&Path>) -> Result<()> {
    let pairs = pairs(&cfg.prevalence.pairs, args)?;
    let model_path = model_path.map_or_else(|| cfg.out.join(MODEL_FILE), Path::to_path_buf);
    require_paths([model_path.as_path()])?;
    let mapping = load_mapping(cfg)?;
    let model = TopicModel::load(&model_path)?;
    run.set("model", recorded_paths(cfg, &[model_path]));
    let corpus = corpus_for(cfg, run, &args.corpus)?;
    let by_id: HashMap<&str, _> = corpus.iter().map(|d| (d.id.as_str(), d.profile)).collect();
    let profiles = model
        .doc_ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("model document `{id}` is not in the corpus")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (labels, props) = match &mapping {
        Some(m) => {
            let c = consolidate(&model.theta, m)?;
            (c.labels, c.proportions)
        }
        None => ((0..model.k).map(|t| format!("topic_{t}")).collect(), model.theta.clone()),
    };
    run.set("replicates", cfg.prevalence.replicates);
    run.prepare()?;
    for (a, b) in &pairs {
        let est = prevalence_diff(
            &props,
            &labels,
            &profiles,
            |p| a.matches(p),
            |p| b.matches(p),
            cfg.prevalence.replicates,
            cfg.seed,
        )
        .map_err(|e| match e {
            Error::EmptyGroup(g) if g == "A" => Error::EmptyGroup(a.to_string()),
            Error::EmptyGroup(_) => Error::EmptyGroup(b.to_string()),
            e => e,
        })?;
        let name = format!("prevalence_{}_vs_{}.csv", a.slug(), b.slug());
        run.write_with(&name, |w| Ok(write_prevalence_csv(&est, w)?))?;
        println!("{a} vs {b}");
        for e in &est {
            println!("  {:<28} {:>9.4}  [{:.4}, {:.4}]", e.label, e.mean_diff, e.ci_low, e.ci_high);
        }
    }
    Ok(())
}

/// Reads `label,keywords` rows; keywords are whitespace separated.
pub fn load_keyword_sets(path: &Path) -> Result<Vec<LabeledSet>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::malformed(path, 0, format!("{other:?}")),
    })?;
    let mut sets = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::malformed(path, i + 2, e.to_string()))?;
        let (Some(label), Some(kws)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::malformed(path, i + 2, "expected label and keywords"));
        };
        let keywords: Vec<String> = kws.split_whitespace().map(str::to_lowercase).collect();
        if keywords.is_empty() {
            return Err(Error::malformed(path, i + 2, format!("set `{label}` has no keywords")));
        }
        sets.push(LabeledSet {
            label: label.trim().to_string(),
            keywords,
        });
    }
    if sets.is_empty() {
        return Err(Error::malformed(path, 0, "no keyword sets"));
    }
    Ok(sets)
}

fn cmd_similarity(cfg: &RunConfig, run: &mut Run, a: &Path, b: &Path) -> Result<()> {
    let emb = cfg
        .embeddings
        .as_ref()
        .ok_or_else(|| Error::Config("no embeddings configured".into()))?;
    require_paths([a, b, emb.path.as_path()])?;
    let sets_a = load_keyword_sets(a)?;
    let sets_b = load_keyword_sets(b)?;
    let surface = if cfg.similarity.oov == OovPolicy::BackoffUnstem {
        let paths = cfg.corpus_paths();
        if paths.iter().all(|p| p.exists()) {
            Some(SurfaceForms::from_corpus(&load_corpora(&paths)?))
        } else {
            log::warn!("no corpus available for unstemming; missing stems will be skipped");
            None
        }
    } else {
        None
    };
    let table = EmbeddingTable::load(&emb.path, emb.dim)?;
    let s = &cfg.similarity;
    let baseline = if s.baseline_trials > 0 {
        Some(random_baseline(&table, s.set_size, s.baseline_trials, cfg.seed, s.exclude_top)?)
    } else {
        None
    };
    let threshold = s.threshold.or(baseline.as_ref().map(|b| b.mean)).unwrap_or(0.0);
    let mut report = match_topics(&table, &sets_a, &sets_b, threshold, s.oov, surface.as_ref())?;
    report.baseline = baseline;
    run.set("threshold", threshold);
    run.set("keywords_a", a.display().to_string());
    run.set("keywords_b", b.display().to_string());
    run.prepare()?;
    run.write_with("similarity.csv", |w| Ok(report.write_csv(w)?))?;
    run.write_with("similarity.json", |w| {
        w.write_all(report.to_json()?.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io("similarity.json", e))
    })?;
    if let Some(b) = &report.baseline {
        println!("baseline {:.4} (sd {:.4}, {} trials)", b.mean, b.sd, b.trials);
    }
    for p in &report.pairs {
        println!("{:<24} {:<24} {:.4}", p.label_a, p.label_b, p.cosine);
    }
    Ok(())
}

fn cmd_kappa(_cfg: &RunConfig, run: &mut Run, matrix: &Path) -> Result<()> {
    require_paths([matrix])?;
    let m = AnnotationMatrix::load_csv(matrix)?;
    let k = fleiss_kappa(&m);
    run.set("matrix", matrix.display().to_string());
    run.set("items", m.items());
    run.set("raters", m.raters());
    run.prepare()?;
    run.write_json("kappa.json", &k)?;
    if k.degenerate {
        println!("kappa = 1 (every rating used a single label)");
    } else {
        println!("kappa = {:.4}", k.kappa);
    }
    Ok(())
}

fn report_section(name: &str) -> Option<(&'static str, &'static str)> {
    let sections = [
        ("stats.csv", "Corpus statistics"),
        ("topic_keywords.csv", "Topic keywords"),
        ("logodds_", "Log-odds"),
        ("prevalence_", "Topic prevalence"),
        ("similarity.csv", "Topic similarity"),
        ("kappa.json", "Annotation agreement"),
    ];
    sections
        .into_iter()
        .find(|(prefix, _)| name.starts_with(prefix))
        .filter(|_| !name.ends_with(".meta.json") && !(name.starts_with("logodds_") && !name.contains("_top")))
}

fn cmd_report(_cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let out = run.out.clone();
    let entries = std::fs::read_dir(&out).map_err(|e| Error::io(&out, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    let mut body = String::from("# Corpus fidelity report\n");
    let mut included = Vec::new();
    let mut last_heading = "";
    for name in &names {
        let Some((_, heading)) = report_section(name) else { continue };
        let text = std::fs::read_to_string(out.join(name)).map_err(|e| Error::io(out.join(name), e))?;
        if heading != last_heading {
            body.push_str(&format!("\n## {heading}\n"));
            last_heading = heading;
        }
        let lang = if name.ends_with(".json") { "json" } else { "csv" };
        body.push_str(&format!("\n`{name}`\n\n```{lang}\n{}\n```\n", text.trim_end()));
        included.push(name.clone());
    }
    if included.is_empty() {
        return Err(Error::InvalidInput(format!("no analysis outputs in {}", out.display())));
    }
    run.set("inputs", &included);
    run.write_with("report.md", |w| w.write_all(body.as_bytes()).map_err(|e| Error::io("report.md", e)))?;
    println!("report.md: {} sections", included.len());
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
