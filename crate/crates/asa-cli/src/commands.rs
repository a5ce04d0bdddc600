//! One function per subcommand. Each resolves its configuration
//! (file < flags), does the work through the library, writes its outputs
//! plus a manifest, and prints a single JSON summary to stdout.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use asa_core::{
    automaton, enumerate_optimal, eval, io, learn_incremental_with_progress, local_search,
    parse_asa, render_asa, sax, AlphabetSpec, Asa, AttributeSet, BatchProgress, Dataset, Error,
    LearnerReport, LearnerSpec, Metrics, PlantedModelSpec, Semantics,
};

use crate::config::{
    self, AlphabetArgs, BatchFlags, DataArgs, FileConfig, IncrFlags, SaxFlags, SemanticsFlags,
};
use crate::output::{
    create_file, manifest_path, metrics_json, print_summary, write_manifest, write_predictions,
    write_text,
};

fn load_dataset(data: &DataArgs) -> Result<(AlphabetSpec, Dataset)> {
    let alphabet = data.alphabet.build()?;
    let (attrs, seqs) = io::read_symbolic(
        File::open(&data.sequences)
            .with_context(|| format!("opening {}", data.sequences.display()))?,
        &alphabet,
    )?;
    let labels = io::read_labels(
        File::open(&data.labels).with_context(|| format!("opening {}", data.labels.display()))?,
    )?;
    let dataset = io::pair_labels(alphabet.clone(), attrs, seqs, &labels)?;
    let violations = dataset.validate();
    if !violations.is_empty() {
        let joined: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Validation(joined.join("; ")).into());
    }
    Ok((alphabet, dataset))
}

fn load_model(path: &Path, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> Result<Asa> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    Ok(parse_asa(&text, attrs, alphabet)?)
}

fn learner_summary(report: &LearnerReport, train: &Metrics) -> serde_json::Value {
    json!({
        "cost": report.cost,
        "transitions": report.asa.transition_count(),
        "active_states": report.asa.active_state_count(),
        "exhaustive": report.exhaustive,
        "candidates_evaluated": report.iterations,
        "wall_time_secs": report.wall_time.as_secs_f64(),
        "train": metrics_json(train),
    })
}

// ---------------------------------------------------------------------------
// discretize

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    /// Real-valued sequence CSV (long or wide layout).
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Where the symbolic sequence CSV goes.
    #[arg(long, value_name = "CSV")]
    pub output: PathBuf,
    /// Output layout: long or wide.
    #[arg(long, value_name = "LAYOUT", default_value = "long")]
    pub layout: String,
    #[command(flatten)]
    pub sax: SaxFlags,
}

pub fn discretize(file: &FileConfig, args: &DiscretizeArgs) -> Result<()> {
    let mut cfg = file.sax;
    config::apply_sax_flags(&mut cfg, &args.sax)?;
    let wide = match args.layout.as_str() {
        "long" => false,
        "wide" => true,
        other => {
            return Err(Error::Config(format!(
                "unknown layout {other:?} (expected one of: long, wide)"
            ))
            .into())
        }
    };
    let series = io::read_real(
        File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?,
    )?;
    let alphabet = AlphabetSpec::letters(cfg.alphabet_size)?;
    let attrs = AttributeSet::new(series[0].attributes().iter().map(String::as_str))?;
    let seqs = series
        .iter()
        .map(|s| sax::discretize(s, &cfg, &alphabet))
        .collect::<asa_core::Result<Vec<_>>>()?;
    let out = create_file(&args.output)?;
    if wide {
        io::write_wide_symbolic(out, &attrs, &alphabet, &seqs)?;
    } else {
        io::write_long_symbolic(out, &attrs, &alphabet, &seqs)?;
    }
    let fingerprint = write_manifest(
        "discretize",
        &args.output,
        None,
        json!({ "sax": cfg, "layout": args.layout }),
        &[("input", &args.input)],
        &[&args.output],
    )?;
    print_summary(&json!({
        "sequences": seqs.len(),
        "attributes": attrs.names(),
        "alphabet_size": cfg.alphabet_size,
        "output": args.output.display().to_string(),
        "fingerprint": fingerprint,
    }))
}

// ---------------------------------------------------------------------------
// learn-batch

#[derive(Debug, Args)]
pub struct LearnBatchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub batch: BatchFlags,
    /// RNG seed; identical seeds give identical models.
    #[arg(long, value_name = "SEED")]
    pub seed: u64,
    /// Enumerate the whole candidate space instead of hill climbing
    /// (feasible only on tiny instances; see --max-candidates).
    #[arg(long)]
    pub exhaustive: bool,
    /// Refuse exhaustive enumeration above this candidate count.
    #[arg(long, value_name = "N")]
    pub max_candidates: Option<u64>,
    /// Where the learned model (automaton fact file) goes.
    #[arg(long, value_name = "ASA")]
    pub output: PathBuf,
}

pub fn learn_batch(file: &FileConfig, args: &LearnBatchArgs) -> Result<()> {
    let mut cfg = file.batch.clone();
    config::apply_batch_flags(&mut cfg, &args.batch)?;
    cfg.seed = args.seed;
    let (_, dataset) = load_dataset(&args.data)?;
    let (report, config_json) = if args.exhaustive {
        let mut caps = file.caps;
        // One transition-bound knob: the enumeration reuses the search cap.
        caps.max_transitions = cfg.max_transitions;
        if let Some(v) = args.max_candidates {
            caps.max_candidates = v;
        }
        let report = enumerate_optimal(&dataset, &cfg, &caps)?;
        (report, json!({ "batch": cfg, "caps": caps }))
    } else {
        let report = local_search(&dataset, &cfg)?;
        (report, json!({ "batch": cfg }))
    };
    write_text(
        &args.output,
        &render_asa(&report.asa, &dataset.attributes, &dataset.alphabet),
    )?;
    let train = Metrics::from_predictions(&eval::predict_dataset(
        &report.asa,
        &dataset,
        cfg.semantics,
        0,
    ));
    let fingerprint = write_manifest(
        "learn-batch",
        &args.output,
        Some(args.seed),
        config_json,
        &[
            ("sequences", &args.data.sequences),
            ("labels", &args.data.labels),
        ],
        &[&args.output],
    )?;
    let mut summary = learner_summary(&report, &train);
    summary["model"] = json!(args.output.display().to_string());
    summary["fingerprint"] = json!(fingerprint);
    print_summary(&summary)
}

// ---------------------------------------------------------------------------
// learn-incr

#[derive(Debug, Args)]
pub struct LearnIncrArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub batch: BatchFlags,
    #[command(flatten)]
    pub incr: IncrFlags,
    /// RNG seed for both the batch shuffle and the revision searches.
    #[arg(long, value_name = "SEED")]
    pub seed: u64,
    /// Where the learned model (automaton fact file) goes.
    #[arg(long, value_name = "ASA")]
    pub output: PathBuf,
    /// Optional TSV log with one row per processed mini-batch.
    #[arg(long, value_name = "TSV")]
    pub progress_log: Option<PathBuf>,
}

pub fn learn_incr(file: &FileConfig, args: &LearnIncrArgs) -> Result<()> {
    let mut cfg = file.incremental.clone();
    config::apply_batch_flags(&mut cfg.batch, &args.batch)?;
    cfg.batch.seed = args.seed;
    cfg.shuffle_seed = args.seed;
    config::apply_incr_flags(&mut cfg, &args.incr)?;
    let (_, dataset) = load_dataset(&args.data)?;
    let mut progress = vec![BatchProgress::tsv_header().to_string()];
    let report = learn_incremental_with_progress(&dataset, &cfg, |p| progress.push(p.to_tsv()))?;
    write_text(
        &args.output,
        &render_asa(&report.asa, &dataset.attributes, &dataset.alphabet),
    )?;
    let mut outputs: Vec<&Path> = vec![&args.output];
    if let Some(log) = &args.progress_log {
        progress.push(String::new()); // trailing newline
        write_text(log, &progress.join("\n"))?;
        outputs.push(log);
    }
    let train = Metrics::from_predictions(&eval::predict_dataset(
        &report.asa,
        &dataset,
        cfg.batch.semantics,
        0,
    ));
    let fingerprint = write_manifest(
        "learn-incr",
        &args.output,
        Some(args.seed),
        json!({ "incremental": cfg }),
        &[
            ("sequences", &args.data.sequences),
            ("labels", &args.data.labels),
        ],
        &outputs,
    )?;
    let mut summary = learner_summary(&report, &train);
    summary["model"] = json!(args.output.display().to_string());
    summary["fingerprint"] = json!(fingerprint);
    print_summary(&summary)
}

// ---------------------------------------------------------------------------
// run

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Automaton fact file to run.
    #[arg(long, value_name = "ASA")]
    pub model: PathBuf,
    /// Symbolic sequence CSV (long or wide layout).
    #[arg(long, value_name = "CSV")]
    pub sequences: PathBuf,
    /// Optional label CSV; when given, the summary includes metrics.
    #[arg(long, value_name = "CSV")]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub semantics: SemanticsFlags,
    /// Where the prediction CSV goes.
    #[arg(long, value_name = "CSV")]
    pub output: PathBuf,
}

pub fn run(file: &FileConfig, args: &RunArgs) -> Result<()> {
    let mut sem = file.semantics;
    config::apply_semantics_flags(&mut sem, &args.semantics)?;
    let alphabet = args.alphabet.build()?;
    let (attrs, seqs) = io::read_symbolic(
        File::open(&args.sequences)
            .with_context(|| format!("opening {}", args.sequences.display()))?,
        &alphabet,
    )?;
    let asa = load_model(&args.model, &attrs, &alphabet)?;
    let mut inputs: Vec<(&str, &Path)> =
        vec![("model", &args.model), ("sequences", &args.sequences)];
    let mut summary = json!({
        "sequences": seqs.len(),
        "semantics": sem,
        "output": args.output.display().to_string(),
    });
    if let Some(label_path) = &args.labels {
        let labels = io::read_labels(
            File::open(label_path).with_context(|| format!("opening {}", label_path.display()))?,
        )?;
        let dataset = io::pair_labels(alphabet.clone(), attrs.clone(), seqs, &labels)?;
        let preds = eval::predict_dataset(&asa, &dataset, sem, 0);
        write_predictions(&args.output, &preds)?;
        inputs.push(("labels", label_path));
        summary["metrics"] = metrics_json(&Metrics::from_predictions(&preds));
        summary["accepted"] = json!(preds.iter().filter(|p| p.predicted.is_positive()).count());
    } else {
        let mut wtr = csv::Writer::from_writer(create_file(&args.output)?);
        wtr.write_record(["seq_id", "predicted", "first_accept_time"])?;
        let mut accepted = 0usize;
        for mvs in &seqs {
            let r = automaton::run(&asa, mvs, sem);
            accepted += r.accepted as usize;
            let label = if r.accepted { "pos" } else { "neg" };
            let fa = r.first_accept_time.map(|t| t.to_string()).unwrap_or_default();
            wtr.write_record([mvs.id(), label, &fa])?;
        }
        wtr.flush()?;
        summary["accepted"] = json!(accepted);
    }
    let fingerprint = write_manifest(
        "run",
        &args.output,
        None,
        json!({ "semantics": sem }),
        &inputs,
        &[&args.output],
    )?;
    summary["fingerprint"] = json!(fingerprint);
    print_summary(&summary)
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Learner to evaluate: batch, incremental, or exhaustive.
    #[arg(long, value_name = "LEARNER")]
    pub learner: String,
    /// Stratified cross-validation folds.
    #[arg(long, value_name = "K", default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub batch: BatchFlags,
    #[command(flatten)]
    pub incr: IncrFlags,
    /// Refuse exhaustive enumeration above this candidate count.
    #[arg(long, value_name = "N")]
    pub max_candidates: Option<u64>,
    /// RNG seed; fold i trains with seed+i+1.
    #[arg(long, value_name = "SEED")]
    pub seed: u64,
    /// Where the evaluation report JSON goes.
    #[arg(long, value_name = "JSON")]
    pub output: PathBuf,
    /// Where the per-example prediction CSV goes
    /// (default: <output>.predictions.csv).
    #[arg(long, value_name = "CSV")]
    pub predictions: Option<PathBuf>,
}

pub fn eval_cmd(file: &FileConfig, args: &EvalArgs) -> Result<()> {
    let mut batch = file.batch.clone();
    config::apply_batch_flags(&mut batch, &args.batch)?;
    batch.seed = args.seed;
    let spec = match args.learner.as_str() {
        "batch" | "local_search" | "local-search" => LearnerSpec::LocalSearch { config: batch },
        "exhaustive" => {
            let mut caps = file.caps;
            caps.max_transitions = batch.max_transitions;
            if let Some(v) = args.max_candidates {
                caps.max_candidates = v;
            }
            LearnerSpec::Exhaustive {
                config: batch,
                caps,
            }
        }
        "incremental" | "incr" => {
            let mut cfg = file.incremental.clone();
            cfg.batch = batch;
            cfg.shuffle_seed = args.seed;
            config::apply_incr_flags(&mut cfg, &args.incr)?;
            LearnerSpec::Incremental { config: cfg }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown learner {other:?} (expected one of: batch, incremental, exhaustive)"
            ))
            .into())
        }
    };
    let (_, dataset) = load_dataset(&args.data)?;
    let report = asa_core::cross_validate(&dataset, &spec, args.folds, args.seed)?;
    let mut out = create_file(&args.output)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    use std::io::Write as _;
    out.write_all(b"\n")?;
    let pred_path = args
        .predictions
        .clone()
        .unwrap_or_else(|| args.output.with_extension("predictions.csv"));
    write_predictions(&pred_path, &report.predictions)?;
    let fingerprint = write_manifest(
        "eval",
        &args.output,
        Some(args.seed),
        json!({ "spec": spec, "folds": args.folds }),
        &[
            ("sequences", &args.data.sequences),
            ("labels", &args.data.labels),
        ],
        &[&args.output, &pred_path],
    )?;
    let fold_f1: Vec<f64> = report.folds.iter().map(|f| f.metrics.f1()).collect();
    print_summary(&json!({
        "learner": report.learner,
        "folds": args.folds,
        "fold_f1": fold_f1,
        "mean_f1": report.mean_f1,
        "overall": metrics_json(&report.overall),
        "report": args.output.display().to_string(),
        "predictions": pred_path.display().to_string(),
        "report_fingerprint": report.fingerprint,
        "fingerprint": fingerprint,
        "wall_time_secs": report.wall_time_secs,
    }))
}

// ---------------------------------------------------------------------------
// export-asp

#[derive(Debug, Args)]
pub struct ExportAspArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub batch: BatchFlags,
    /// Existing model whose facts seed the program for revision.
    #[arg(long, value_name = "ASA")]
    pub incumbent: Option<PathBuf>,
    /// Where the ASP program goes.
    #[arg(long, value_name = "LP")]
    pub output: PathBuf,
}

pub fn export_asp(file: &FileConfig, args: &ExportAspArgs) -> Result<()> {
    let mut cfg = file.batch.clone();
    config::apply_batch_flags(&mut cfg, &args.batch)?;
    let (alphabet, dataset) = load_dataset(&args.data)?;
    let incumbent = args
        .incumbent
        .as_deref()
        .map(|p| load_model(p, &dataset.attributes, &alphabet))
        .transpose()?;
    let program = asa_core::asp::export_asp(&dataset, &cfg, incumbent.as_ref())?;
    write_text(&args.output, &program)?;
    let mut inputs: Vec<(&str, &Path)> = vec![
        ("sequences", &args.data.sequences),
        ("labels", &args.data.labels),
    ];
    if let Some(p) = &args.incumbent {
        inputs.push(("incumbent", p));
    }
    let fingerprint = write_manifest(
        "export-asp",
        &args.output,
        None,
        json!({ "batch": cfg, "revision": incumbent.is_some() }),
        &inputs,
        &[&args.output],
    )?;
    print_summary(&json!({
        "bytes": program.len(),
        "revision": incumbent.is_some(),
        "output": args.output.display().to_string(),
        "fingerprint": fingerprint,
    }))
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Planted ground-truth automaton fact file.
    #[arg(long, value_name = "ASA")]
    pub model: PathBuf,
    /// Attribute names the model and the sequences range over,
    /// comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "ATTR", required = true)]
    pub attributes: Vec<String>,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub semantics: SemanticsFlags,
    /// Length of every generated sequence.
    #[arg(long, value_name = "T")]
    pub length: usize,
    /// Positive examples to generate.
    #[arg(long, value_name = "N")]
    pub positives: usize,
    /// Negative examples to generate.
    #[arg(long, value_name = "N")]
    pub negatives: usize,
    /// Probability of flipping each kept example's label.
    #[arg(long, value_name = "P", default_value_t = 0.0)]
    pub noise: f64,
    /// Per-symbol sampling weights in alphabet order (uniform when
    /// absent), comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "W")]
    pub bias: Option<Vec<f64>>,
    /// RNG seed for sampling, labeling, and noise.
    #[arg(long, value_name = "SEED")]
    pub seed: u64,
    /// Output prefix: writes <prefix>.sequences.csv, <prefix>.labels.csv,
    /// and <prefix>.truth.asa.
    #[arg(long, value_name = "PREFIX")]
    pub output: PathBuf,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    prefix.with_file_name(name)
}

pub fn generate(file: &FileConfig, args: &GenerateArgs) -> Result<()> {
    let mut sem: Semantics = file.semantics;
    config::apply_semantics_flags(&mut sem, &args.semantics)?;
    let alphabet = args.alphabet.build()?;
    let attrs = AttributeSet::new(args.attributes.iter().map(String::as_str))?;
    let asa = load_model(&args.model, &attrs, &alphabet)?;
    let spec = PlantedModelSpec {
        asa: asa.clone(),
        semantics: sem,
        attributes: attrs.clone(),
        alphabet: alphabet.clone(),
        len: args.length,
        positives: args.positives,
        negatives: args.negatives,
        noise: args.noise,
        bias: args.bias.clone(),
    };
    let dataset = asa_core::generate_planted(&spec, args.seed)?;
    let seq_path = with_suffix(&args.output, ".sequences.csv");
    let label_path = with_suffix(&args.output, ".labels.csv");
    let truth_path = with_suffix(&args.output, ".truth.asa");
    let seqs: Vec<_> = dataset.examples.iter().map(|e| e.mvs.clone()).collect();
    let labels: Vec<_> = dataset
        .examples
        .iter()
        .map(|e| (e.mvs.id().to_string(), e.label))
        .collect();
    io::write_long_symbolic(create_file(&seq_path)?, &attrs, &alphabet, &seqs)?;
    io::write_labels(create_file(&label_path)?, &labels)?;
    write_text(&truth_path, &render_asa(&asa, &attrs, &alphabet))?;
    let manifest_at = with_suffix(&args.output, ".dataset");
    let fingerprint = write_manifest(
        "generate",
        &manifest_at,
        Some(args.seed),
        json!({
            "length": args.length,
            "positives": args.positives,
            "negatives": args.negatives,
            "noise": args.noise,
            "bias": args.bias,
            "semantics": sem,
            "attributes": attrs.names(),
            "alphabet": alphabet.names(),
        }),
        &[("model", &args.model)],
        &[&seq_path, &label_path, &truth_path],
    )?;
    print_summary(&json!({
        "examples": dataset.len(),
        "positives": args.positives,
        "negatives": args.negatives,
        "noise": args.noise,
        "sequences": seq_path.display().to_string(),
        "labels": label_path.display().to_string(),
        "truth": truth_path.display().to_string(),
        "manifest": manifest_path(&manifest_at).display().to_string(),
        "fingerprint": fingerprint,
    }))
}
