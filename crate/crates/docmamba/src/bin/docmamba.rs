//! Command-line entry point. Every command reads a JSON config file, applies
//! `--set key=value` overrides (overrides win), and writes JSON/SVG
//! artifacts. Failures print one machine-parsable JSON line on stderr; exit
//! codes: 0 success, 1 runtime failure, 2 usage/config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use docmamba::bench::{bench_scaling, render_scaling_svg, BenchConfig, BenchModel, ScalingReport};
use docmamba::ckpt::{load_checkpoint, save_checkpoint};
use docmamba::data::prep::ScanStrategy;
use docmamba::data::synth::{synth_corpus, SynthConfig, ENTITY_TYPES};
use docmamba::data::{document_to_json, load_corpus_dir, load_document_file, Document};
use docmamba::metrics::TagSet;
use docmamba::model::{normalize_box, predict_tags, ModelConfig, ModelParams};
use docmamba::scan_order::{sfbs_order, wfbs_order, LayoutToken, OrderedSequence};
use docmamba::train::{
    eval_entity_f1, finetune_tagging, gradcheck, prepare_sequences, train_mlm, FinetuneOptions,
    PipelineConfig, StepMetric, TrainConfig,
};

#[global_allocator]
static ALLOC: docmamba::bench::CountingAlloc = docmamba::bench::CountingAlloc;

#[derive(Parser)]
#[command(
    name = "docmamba",
    about = "Bidirectional selective state-space document encoder tooling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic document corpus directory.
    Synth(ConfigArgs),
    /// Compute a document's scan order; write ordering JSON and optional SVG.
    ScanOrder(ConfigArgs),
    /// Masked-LM pre-training; writes checkpoints and metrics.
    Pretrain(ConfigArgs),
    /// BIO tagging fine-tuning from a checkpoint; writes checkpoints and metrics.
    Finetune(ConfigArgs),
    /// Entity-level precision/recall/F1 of a checkpoint on a corpus.
    Eval(ConfigArgs),
    /// Tag one document with a checkpoint; writes word-level tags.
    Infer(ConfigArgs),
    /// Finite-difference gradient check; exits nonzero above the gate.
    Gradcheck(ConfigArgs),
    /// Forward-pass scaling benchmark; writes reports and a log-log plot.
    Bench(ConfigArgs),
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Path to the JSON config for this command.
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. --set train.lr=1e-4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<docmamba::Error> for CliError {
    fn from(e: docmamba::Error) -> Self {
        match e {
            docmamba::Error::Contract(_) | docmamba::Error::Parse(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn emit_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": message, "kind": kind })
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error("usage", &e.to_string().replace('\n', " "));
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => run_synth(a),
        Command::ScanOrder(a) => run_scan_order(a),
        Command::Pretrain(a) => run_pretrain(a),
        Command::Finetune(a) => run_finetune(a),
        Command::Eval(a) => run_eval(a),
        Command::Infer(a) => run_infer(a),
        Command::Gradcheck(a) => run_gradcheck(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            emit_error("usage", &m);
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            emit_error("runtime", &m);
            ExitCode::from(1)
        }
    }
}

/// Loads a JSON config and applies `--set` overrides; unknown keys fail.
fn load_config<C: DeserializeOwned>(args: &ConfigArgs) -> Result<C, CliError> {
    let bytes = std::fs::read(&args.config).map_err(|e| {
        CliError::Usage(format!("config file {}: {e}", args.config.display()))
    })?;
    let mut value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", args.config.display())))?;
    for kv in &args.set {
        let (key, raw) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override {kv:?} is not KEY=VALUE")))?;
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let mut node = &mut value;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if !node.is_object() {
                return Err(CliError::Usage(format!(
                    "override key {key:?} does not address an object"
                )));
            }
            let obj = node.as_object_mut().unwrap();
            if i + 1 == parts.len() {
                obj.insert(part.to_string(), parsed.clone());
                break;
            }
            node = obj.entry(part.to_string()).or_insert(serde_json::json!({}));
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn default_tagset() -> TagSet {
    TagSet::new(&ENTITY_TYPES)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthCommandConfig {
    #[serde(flatten)]
    synth: SynthConfig,
    out_dir: PathBuf,
}

fn run_synth(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: SynthCommandConfig = load_config(args)?;
    let docs = synth_corpus(&cfg.synth)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    for doc in &docs {
        let path = cfg.out_dir.join(format!("{}.json", doc.doc_id));
        write_atomic(&path, document_to_json(doc).as_bytes())?;
    }
    println!(
        "{}",
        serde_json::json!({ "written": docs.len(), "out_dir": cfg.out_dir })
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanOrderConfig {
    input: PathBuf,
    output: PathBuf,
    #[serde(default)]
    svg: Option<PathBuf>,
    #[serde(default = "default_scan")]
    scan: ScanStrategy,
}

fn default_scan() -> ScanStrategy {
    ScanStrategy::Sfbs
}

#[derive(serde::Serialize)]
struct ScanOrderOutput<'a> {
    doc_id: &'a str,
    scan: ScanStrategy,
    #[serde(flatten)]
    ordering: &'a OrderedSequence,
}

/// Word-level ordering of a document (one layout token per word).
fn run_scan_order(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: ScanOrderConfig = load_config(args)?;
    let doc = load_document_file(&cfg.input)
        .map_err(|e| CliError::Usage(format!("{}: {e}", cfg.input.display())))?;
    let mut layout = Vec::with_capacity(doc.words.len());
    let mut boxes = Vec::with_capacity(doc.words.len());
    for (i, w) in doc.words.iter().enumerate() {
        let poly = normalize_box(&w.quad, doc.page_w, doc.page_h)?;
        layout.push(LayoutToken {
            index: i,
            x_min: poly[0] as i64,
            y_min: poly[1] as i64,
            segment_id: w.segment_id,
        });
        let xs = [w.quad[0], w.quad[2], w.quad[4], w.quad[6]];
        let ys = [w.quad[1], w.quad[3], w.quad[5], w.quad[7]];
        let (x0, x1) = (
            xs.iter().cloned().fold(f64::MAX, f64::min),
            xs.iter().cloned().fold(f64::MIN, f64::max),
        );
        let (y0, y1) = (
            ys.iter().cloned().fold(f64::MAX, f64::min),
            ys.iter().cloned().fold(f64::MIN, f64::max),
        );
        boxes.push([x0, y0, x1 - x0, y1 - y0]);
    }
    let ordering = match cfg.scan {
        ScanStrategy::Sfbs => sfbs_order(&layout),
        ScanStrategy::Wfbs => wfbs_order(&layout),
    };
    let out = ScanOrderOutput {
        doc_id: &doc.doc_id,
        scan: cfg.scan,
        ordering: &ordering,
    };
    write_atomic(
        &cfg.output,
        format!("{}\n", serde_json::to_string_pretty(&out).unwrap()).as_bytes(),
    )?;
    if let Some(svg_path) = &cfg.svg {
        let svg = docmamba::scan_order::render_scan_svg(&boxes, &ordering, doc.page_w, doc.page_h);
        write_atomic(svg_path, svg.as_bytes())?;
    }
    println!("{}", serde_json::json!({ "tokens": ordering.len(), "output": cfg.output }));
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSource {
    #[serde(default)]
    corpus_dir: Option<PathBuf>,
    #[serde(default)]
    synth: Option<SynthConfig>,
}

impl DataSource {
    fn load(&self) -> Result<Vec<Document>, CliError> {
        match (&self.corpus_dir, &self.synth) {
            (Some(dir), None) => Ok(load_corpus_dir(dir)?),
            (None, Some(cfg)) => Ok(synth_corpus(cfg)?),
            _ => Err(CliError::Usage(
                "data must set exactly one of corpus_dir or synth".into(),
            )),
        }
    }
}

fn metrics_writer(path: &Path) -> Result<impl FnMut(&StepMetric), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    Ok(move |m: &StepMetric| {
        use std::io::Write;
        let _ = writeln!(file, "{}", serde_json::to_string(m).unwrap());
    })
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PretrainCommandConfig {
    #[serde(default = "ModelConfig::tiny")]
    model: ModelConfig,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    pipeline: PipelineConfig,
    #[serde(default)]
    mask: docmamba::data::mask::MaskingPolicy,
    data: DataSource,
    out_dir: PathBuf,
    #[serde(default = "default_ckpt_every")]
    checkpoint_every: usize,
}

fn default_ckpt_every() -> usize {
    500
}

fn run_pretrain(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: PretrainCommandConfig = load_config(args)?;
    let docs = cfg.data.load()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut on_step = metrics_writer(&cfg.out_dir.join("metrics.jsonl"))?;
    let out_dir = cfg.out_dir.clone();
    let model = cfg.model.clone();
    let mut sink = move |step: usize, params: &ModelParams<f32>| {
        save_checkpoint(&out_dir.join(format!("step-{step:06}.ckpt")), &model, params)
    };
    let run = train_mlm::<f32>(
        &docs,
        &cfg.model,
        &cfg.train,
        &cfg.pipeline,
        &cfg.mask,
        Some(&mut on_step),
        Some((cfg.checkpoint_every.max(1), &mut sink)),
    )?;
    let final_path = cfg.out_dir.join("final.ckpt");
    save_checkpoint(&final_path, &cfg.model, &run.params)?;
    println!(
        "{}",
        serde_json::json!({
            "steps": run.metrics.len(),
            "final_loss": run.metrics.last().map(|m| m.loss),
            "rejected_steps": run.rejected_steps,
            "checkpoint": final_path,
        })
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FinetuneCommandConfig {
    #[serde(default)]
    init_checkpoint: Option<PathBuf>,
    /// Used only when training from scratch (no init_checkpoint).
    #[serde(default = "ModelConfig::tiny")]
    model: ModelConfig,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    pipeline: PipelineConfig,
    #[serde(default)]
    options: FinetuneOptions,
    data: DataSource,
    out_dir: PathBuf,
}

fn run_finetune(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: FinetuneCommandConfig = load_config(args)?;
    let docs = cfg.data.load()?;
    let (model_cfg, init) = match &cfg.init_checkpoint {
        Some(path) => load_checkpoint::<f32>(path)?,
        None => (
            cfg.model.clone(),
            ModelParams::<f32>::init(&cfg.model, cfg.train.seed),
        ),
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut on_step = metrics_writer(&cfg.out_dir.join("metrics.jsonl"))?;
    let run = finetune_tagging(
        &docs,
        init,
        &model_cfg,
        &cfg.train,
        &cfg.pipeline,
        &cfg.options,
        &default_tagset(),
        Some(&mut on_step),
    )?;
    let final_path = cfg.out_dir.join("final.ckpt");
    save_checkpoint(&final_path, &model_cfg, &run.params)?;
    let f1_path = cfg.out_dir.join("f1_curve.json");
    write_atomic(
        &f1_path,
        format!("{}\n", serde_json::to_string_pretty(&run.f1_curve).unwrap()).as_bytes(),
    )?;
    println!(
        "{}",
        serde_json::json!({
            "steps": run.metrics.len(),
            "final_f1": run.f1_curve.last().map(|(_, f)| *f),
            "checkpoint": final_path,
        })
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalCommandConfig {
    checkpoint: PathBuf,
    data: DataSource,
    #[serde(default)]
    pipeline: PipelineConfig,
}

fn run_eval(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: EvalCommandConfig = load_config(args)?;
    let docs = cfg.data.load()?;
    let (model_cfg, params) = load_checkpoint::<f32>(&cfg.checkpoint)?;
    let tagset = default_tagset();
    let seqs = prepare_sequences(&docs, &tagset, &cfg.pipeline)?;
    let (p, r, f1) = eval_entity_f1(&seqs, &params, &model_cfg, &tagset)?;
    println!(
        "{}",
        serde_json::json!({ "precision": p, "recall": r, "f1": f1, "documents": docs.len() })
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct InferCommandConfig {
    checkpoint: PathBuf,
    input: PathBuf,
    output: PathBuf,
    #[serde(default)]
    pipeline: PipelineConfig,
}

fn run_infer(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: InferCommandConfig = load_config(args)?;
    let doc = load_document_file(&cfg.input)
        .map_err(|e| CliError::Usage(format!("{}: {e}", cfg.input.display())))?;
    let (model_cfg, params) = load_checkpoint::<f32>(&cfg.checkpoint)?;
    let tagset = default_tagset();
    let seqs = prepare_sequences(std::slice::from_ref(&doc), &tagset, &cfg.pipeline)?;

    // word-level tag = prediction at the word's first token
    let mut word_tags: Vec<Option<u32>> = vec![None; doc.words.len()];
    for seq in &seqs {
        let pred = predict_tags(&seq.records, &params, &model_cfg)?;
        for (pos, &wi) in seq.word_index.iter().enumerate() {
            if wi != usize::MAX && word_tags[wi].is_none() {
                word_tags[wi] = Some(pred[pos]);
            }
        }
    }
    let words: Vec<serde_json::Value> = doc
        .words
        .iter()
        .zip(&word_tags)
        .map(|(w, t)| {
            serde_json::json!({
                "text": w.text,
                "tag": tagset.name(t.unwrap_or(0)),
            })
        })
        .collect();
    let out = serde_json::json!({ "doc_id": doc.doc_id, "words": words });
    write_atomic(
        &cfg.output,
        format!("{}\n", serde_json::to_string_pretty(&out).unwrap()).as_bytes(),
    )?;
    println!("{}", serde_json::json!({ "output": cfg.output, "words": doc.words.len() }));
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GradcheckCommandConfig {
    #[serde(default = "gradcheck_model")]
    model: ModelConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_min_samples")]
    min_samples: usize,
}

fn gradcheck_model() -> ModelConfig {
    ModelConfig {
        hidden: 16,
        layers: 2,
        d_inner: 32,
        n_state: 4,
        vocab_size: 37,
        coord_bins: 101,
        ..Default::default()
    }
}

fn default_min_samples() -> usize {
    200
}

fn run_gradcheck(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: GradcheckCommandConfig = load_config(args)?;
    let report = gradcheck(&cfg.model, cfg.seed, cfg.min_samples)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.max_rel_err < 1e-4 {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::Runtime(format!(
            "gradient check failed: max_rel_err {} at {}",
            report.max_rel_err, report.worst_param
        )))
    }
}

// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchCommandConfig {
    #[serde(default = "default_models")]
    models: Vec<BenchModel>,
    #[serde(flatten)]
    bench: BenchConfig,
    out_dir: PathBuf,
}

fn default_models() -> Vec<BenchModel> {
    vec![BenchModel::Docmamba, BenchModel::AttentionBaseline]
}

fn run_bench(args: &ConfigArgs) -> Result<ExitCode, CliError> {
    let cfg: BenchCommandConfig = load_config(args)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut reports: Vec<ScalingReport> = Vec::new();
    for model in &cfg.models {
        let mut bc = cfg.bench.clone();
        bc.model = *model;
        let report = bench_scaling(&bc)?;
        write_atomic(
            &cfg.out_dir.join(format!("scaling_{}.json", report.model_tag)),
            format!("{}\n", serde_json::to_string_pretty(&report).unwrap()).as_bytes(),
        )?;
        reports.push(report);
    }
    let refs: Vec<&ScalingReport> = reports.iter().collect();
    write_atomic(
        &cfg.out_dir.join("scaling.svg"),
        render_scaling_svg(&refs).as_bytes(),
    )?;
    println!(
        "{}",
        serde_json::json!({
            "reports": reports.iter().map(|r| serde_json::json!({
                "model": r.model_tag,
                "time_exponent": r.fitted_time_exponent,
                "mem_exponent": r.fitted_mem_exponent,
                "mem_method": r.mem_method,
            })).collect::<Vec<_>>(),
            "out_dir": cfg.out_dir,
        })
    );
    Ok(ExitCode::SUCCESS)
}
