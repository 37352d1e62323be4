//! Command-line driver for the embedding-augmentation toolkit.
//!
//! Thin wiring over the `embaug` library: every subcommand maps onto one
//! library operation. Configuration comes from an optional TOML file plus
//! flags, with flags taking precedence over file values. Exit codes:
//! 0 success, 1 validation error (bad flags/config/input files), 2 runtime
//! or generator failure, 3 degraded augmentation (some class received fewer
//! synthetic samples than requested).
//!
//! The LLM API key is read only from an environment variable (name set by
//! `api_key_env_var`); it never appears in flags, config files, or output.

use clap::{Args, Parser, Subcommand, ValueEnum};
use embaug::classifier::{evaluate, load_mlp, save_mlp, train_mlp, write_training_log, TrainConfig};
use embaug::cost::{cost_ratio, write_cost_sweep, PricingTable};
use embaug::drift::{builtin_concept_drift, builtin_model_drift, load_scenario, run_drift_scenario};
use embaug::generation::{
    augment_dataset, AugmentationPlan, EmbeddingGenerator, GeneratorConfig, HttpGenerator,
    MockGenerator,
};
use embaug::harness::{
    hard_class_delta, run_data_efficiency, run_k_ablation, run_robustness, run_stress, Method,
    ResultRow,
};
use embaug::metrics::Averaging;
use embaug::projection::{fit_lda, project_dataset, save_projection};
use embaug::store::{
    load_dataset, sample_per_class, save_dataset, stratified_split, EmbeddingDataset, SplitSpec,
};
use embaug::{Error, Result};
use serde::Deserialize;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "embaug",
    version,
    about = "LLM-based embedding augmentation: projection, generation, training, experiments"
)]
struct Cli {
    /// Echo the effective (file + flag) configuration to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

/// On-disk configuration: the experiment sweep plus the sections only some
/// subcommands consume. Missing keys take the same defaults the flags
/// document; flags override file values.
#[derive(Deserialize, Default)]
#[serde(default)]
struct FileConfig {
    #[serde(flatten)]
    experiment: embaug::harness::ExperimentConfig,
    pricing: PricingTable,
    /// Default output directory when `--out` is not given.
    out: Option<PathBuf>,
    verbose: bool,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            toml::from_str(&text).map_err(|e| {
                Error::InvalidParameter(format!("config file {}: {e}", path.display()))
            })
        }
        None => Ok(FileConfig::default()),
    }
}

/// Flag > config file > built-in "out".
fn resolve_out(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    None,
    Mock,
    Llm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::None => Method::None,
            MethodArg::Mock => Method::Mock,
            MethodArg::Llm => Method::Llm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinScenario {
    ModelDrift,
    ConceptDrift,
}

/// Flags shared by the experiment subcommands. Every flag overrides the
/// matching key of the TOML config file when both are given.
#[derive(Args)]
struct ExperimentArgs {
    /// Labeled-embedding JSONL dataset.
    #[arg(long)]
    dataset: PathBuf,
    /// TOML config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Real samples per class, comma-separated (config: d_values).
    #[arg(long = "d", value_delimiter = ',')]
    d_values: Option<Vec<usize>>,
    /// Augmentation factors, comma-separated (config: factors).
    #[arg(long = "factor", value_delimiter = ',')]
    factors: Option<Vec<f64>>,
    /// Context sizes, comma-separated (config: k_values).
    #[arg(long = "k", value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    /// Methods to run, comma-separated subset of none,mock,llm.
    #[arg(long = "method", value_delimiter = ',')]
    methods: Option<Vec<MethodArg>>,
    /// Seeds, comma-separated (config: seeds).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

/// HTTP generator overrides (used only when a subcommand selects llm).
#[derive(Args)]
struct GeneratorArgs {
    #[arg(long)]
    endpoint_url: Option<String>,
    #[arg(long)]
    model_name: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_retries: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Name of the environment variable holding the API key. The key itself
    /// is never accepted as a flag or config value.
    #[arg(long)]
    api_key_env: Option<String>,
}

impl GeneratorArgs {
    fn apply(&self, cfg: &mut GeneratorConfig) {
        if let Some(v) = &self.endpoint_url {
            cfg.endpoint_url = v.clone();
        }
        if let Some(v) = &self.model_name {
            cfg.model_name = v.clone();
        }
        if let Some(v) = self.temperature {
            cfg.temperature = v;
        }
        if let Some(v) = self.max_retries {
            cfg.max_retries_per_sample = v;
        }
        if let Some(v) = self.parallelism {
            cfg.parallelism_limit = v;
        }
        if let Some(v) = self.timeout_secs {
            cfg.request_timeout_secs = v;
        }
        if let Some(v) = &self.api_key_env {
            cfg.api_key_env_var = v.clone();
        }
    }
}

impl ExperimentArgs {
    /// File values first, then flag overrides, then full validation.
    fn effective_config(&self) -> Result<(embaug::harness::ExperimentConfig, FileConfig)> {
        let file = load_file_config(self.config.as_deref())?;
        let mut cfg = file.experiment.clone();
        if let Some(v) = &self.d_values {
            cfg.d_values = v.clone();
        }
        if let Some(v) = &self.factors {
            cfg.factors = v.clone();
        }
        if let Some(v) = &self.k_values {
            cfg.k_values = v.clone();
        }
        if let Some(v) = &self.methods {
            cfg.methods = v.iter().map(|&m| m.into()).collect();
        }
        if let Some(v) = &self.seeds {
            cfg.seeds = v.clone();
        }
        if let Some(v) = self.test_fraction {
            cfg.split.test_fraction = v;
        }
        if let Some(v) = self.validation_fraction {
            cfg.split.validation_fraction_of_train = v;
        }
        if let Some(v) = self.split_seed {
            cfg.split.seed = v;
        }
        if let Some(v) = self.hidden_dim {
            cfg.train.hidden_dim = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.train.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = self.max_epochs {
            cfg.train.max_epochs = v;
        }
        if let Some(v) = self.patience {
            cfg.train.patience = v;
        }
        self.generator.apply(&mut cfg.generator);
        cfg.validate()?;
        Ok((cfg, file))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, and normalize a labeled-embedding JSONL file.
    Ingest {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit an LDA projection (alpha dims -> C-1) and project the dataset.
    Project {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate synthetic embeddings from k-shot contexts and emit the
    /// combined real+synthetic dataset plus a generation report.
    Augment {
        #[arg(long)]
        dataset: PathBuf,
        /// Real samples kept per class (sampled when the class has more).
        #[arg(long)]
        d: usize,
        /// Augmentation factor; synthetic per class = round((factor-1)*d).
        #[arg(long)]
        factor: f64,
        /// Context vectors per prompt.
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        generator: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        generator_args: GeneratorArgs,
    },
    /// Split a dataset, train the MLP classifier, and score the test split.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        hidden_dim: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        max_epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
        #[arg(long, default_value_t = 0.1)]
        validation_fraction: f64,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Score a saved classifier on a labeled dataset.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Full method x D x factor x k x seed sweep with oracle rows.
    Stress {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Output directory (default: `out` key of the config file, else "out").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data-efficiency curve: normalized test F1 vs labeled fraction.
    Efficiency {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Labeled fractions in (0, 1], comma-separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.05,0.1,0.15,0.25,0.5,0.75,1.0"
        )]
        fractions: Vec<f64>,
        #[arg(long, value_enum, default_value = "mock")]
        curve_method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train once per (method, D, seed) and score metadata-filtered test
    /// slices (e.g. per-SNR robustness).
    Robustness {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Metadata key holding the shift value on each record.
        #[arg(long)]
        shift_key: String,
        /// Shift values to evaluate, comma-separated.
        #[arg(long, value_delimiter = ',')]
        shift_values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the context size k per D at the largest configured factor.
    AblateK {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(long, value_enum, default_value = "mock")]
        ablation_method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a 2D drift scenario against a frozen decision boundary and
    /// emit per-timestep accuracies plus the point clouds.
    DriftSim {
        /// Scenario JSON file; omit to use a bundled scenario.
        #[arg(long, conflicts_with = "builtin")]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "model-drift")]
        builtin: BuiltinScenario,
        #[arg(long, default_value_t = 20000)]
        n_per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Image-vs-embedding token cost ratios at a given resolution, plus a
    /// resolution-sweep CSV.
    CostModel {
        /// TOML config file; the `[pricing]` section overrides defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        resolution: u32,
        /// Resolutions for the sweep CSV, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512,1024")]
        sweep: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// io helpers -----------------------------------------------------------------

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(BufWriter::new(f))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn build_generator(method: MethodArg, cfg: &GeneratorConfig) -> Result<Box<dyn EmbeddingGenerator<f64>>> {
    match method {
        MethodArg::None => Err(Error::InvalidParameter(
            "augment needs a generator: mock or llm".into(),
        )),
        MethodArg::Mock => Ok(Box::new(MockGenerator)),
        MethodArg::Llm => Ok(Box::new(HttpGenerator::new(cfg.clone())?)),
    }
}

fn write_result_artifacts(rows: &[ResultRow<f64>], out: &Path) -> Result<()> {
    embaug::harness::write_results_csv(rows, out_file(out, "results.csv")?)?;
    embaug::harness::write_results_json(rows, out_file(out, "results.json")?)?;
    Ok(())
}

// subcommand bodies ----------------------------------------------------------

fn cmd_ingest(dataset: &Path, out: &Path) -> Result<i32> {
    let ds: EmbeddingDataset<f64> = load_dataset(dataset)?;
    ensure_dir(out)?;
    save_dataset(&ds, &out.join("dataset.jsonl"))?;
    println!(
        "ingested {} records ({} dims, {} classes) -> {}",
        ds.len(),
        ds.dimension(),
        ds.class_set().len(),
        out.join("dataset.jsonl").display()
    );
    Ok(0)
}

fn cmd_project(dataset: &Path, out: &Path) -> Result<i32> {
    let ds: EmbeddingDataset<f64> = load_dataset(dataset)?;
    let model = fit_lda(&ds)?;
    let projected = project_dataset(&model, &ds)?;
    ensure_dir(out)?;
    save_projection(&model, &out.join("projection.json"))?;
    save_dataset(&projected, &out.join("projected.jsonl"))?;
    if projected.dimension() >= 2 {
        embaug::harness::write_scatter_csv(&projected, out_file(out, "plotdata_scatter.csv")?)?;
    }
    println!(
        "projected {} -> {} dims over {} classes -> {}",
        model.alpha,
        model.beta,
        model.class_order.len(),
        out.join("projected.jsonl").display()
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_augment(
    dataset: &Path,
    d: usize,
    factor: f64,
    k: usize,
    generator: MethodArg,
    seed: u64,
    out: &Path,
    generator_args: &GeneratorArgs,
) -> Result<i32> {
    let ds: EmbeddingDataset<f64> = load_dataset(dataset)?;
    let real = sample_per_class(&ds, d, seed)?;
    let mut gen_cfg = GeneratorConfig::default();
    generator_args.apply(&mut gen_cfg);
    gen_cfg.validate()?;
    let plan = AugmentationPlan {
        d_real_per_class: d,
        factor,
        k_context: k,
        seed,
    };
    plan.validate()?;
    let gen = build_generator(generator, &gen_cfg)?;
    let (augmented, report) = augment_dataset(&real, gen.as_ref(), &plan)?;
    ensure_dir(out)?;
    save_dataset(&augmented, &out.join("augmented.jsonl"))?;
    serde_json::to_writer_pretty(out_file(out, "gen_report.json")?, &report)?;
    let accepted: u64 = report.per_class.values().map(|s| s.accepted).sum();
    let requested: u64 = report.per_class.values().map(|s| s.requested).sum();
    let degraded = report.degraded();
    println!(
        "augmented {} classes: {} real + {} synthetic per class requested, {}/{} accepted{} -> {}",
        real.class_set().len(),
        d,
        plan.synthetic_per_class(),
        accepted,
        requested,
        if degraded { " (degraded)" } else { "" },
        out.join("augmented.jsonl").display()
    );
    Ok(if degraded { 3 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    dataset: &Path,
    out: &Path,
    train_cfg: TrainConfig,
    split: SplitSpec,
) -> Result<i32> {
    let ds: EmbeddingDataset<f64> = load_dataset(dataset)?;
    let (train, validation, test) = stratified_split(&ds, &split)?;
    let (model, log) = train_mlp(&train, &validation, &train_cfg)?;
    ensure_dir(out)?;
    save_mlp(&model, &out.join("model.json"))?;
    write_training_log(&log, out_file(out, "plotdata_training.csv")?)?;
    let report = evaluate(&model, &test, Averaging::Macro)?;
    println!(
        "trained mlp ({} hidden, {} epochs logged): test macro-F1 {:.4}, accuracy {:.4} -> {}",
        train_cfg.hidden_dim,
        log.len(),
        report.f1,
        report.accuracy,
        out.join("model.json").display()
    );
    Ok(0)
}

fn cmd_evaluate(dataset: &Path, model_path: &Path, out: &Path) -> Result<i32> {
    let ds: EmbeddingDataset<f64> = load_dataset(dataset)?;
    let model = load_mlp::<f64>(model_path)?;
    let report = evaluate(&model, &ds, Averaging::Macro)?;
    serde_json::to_writer_pretty(out_file(out, "results.json")?, &report)?;
    println!(
        "evaluated {} records: macro-F1 {:.4}, accuracy {:.4}, precision {:.4}, recall {:.4}",
        ds.len(),
        report.f1,
        report.accuracy,
        report.precision,
        report.recall
    );
    Ok(0)
}

fn echo_config(cfg: &embaug::harness::ExperimentConfig) {
    match toml::to_string(cfg) {
        Ok(text) => eprintln!("effective config:\n{text}"),
        Err(e) => eprintln!("effective config unavailable: {e}"),
    }
}

fn cmd_stress(args: &ExperimentArgs, out_flag: Option<&Path>, verbose: bool) -> Result<i32> {
    let (cfg, file) = args.effective_config()?;
    let out = &resolve_out(out_flag, &file);
    if verbose || file.verbose {
        echo_config(&cfg);
    }
    let ds: EmbeddingDataset<f64> = load_dataset(&args.dataset)?;
    let rows = run_stress(&ds, &cfg)?;
    write_result_artifacts(&rows, out)?;
    // per-class delta-F1 bars when an augmenting method ran against the
    // no-augmentation baseline
    let baseline: Vec<ResultRow<f64>> = rows.iter().filter(|r| r.method == "none").cloned().collect();
    let augmenting: Vec<ResultRow<f64>> = rows
        .iter()
        .filter(|r| r.method == "mock" || r.method == "llm")
        .cloned()
        .collect();
    if !baseline.is_empty() && !augmenting.is_empty() {
        if let Ok(deltas) = hard_class_delta(&augmenting, &baseline) {
            embaug::harness::write_delta_csv(&deltas, out_file(out, "plotdata_delta.csv")?)?;
        }
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "stress sweep: {} rows ({} failed) -> {}",
        rows.len(),
        failed,
        out.join("results.csv").display()
    );
    Ok(0)
}

fn cmd_efficiency(
    args: &ExperimentArgs,
    fractions: &[f64],
    method: MethodArg,
    out_flag: Option<&Path>,
    verbose: bool,
) -> Result<i32> {
    let (cfg, file) = args.effective_config()?;
    let out = &resolve_out(out_flag, &file);
    if verbose || file.verbose {
        echo_config(&cfg);
    }
    let ds: EmbeddingDataset<f64> = load_dataset(&args.dataset)?;
    let curve = run_data_efficiency(&ds, &cfg, fractions, method.into())?;
    embaug::harness::write_efficiency_csv(&curve, out_file(out, "plotdata_efficiency.csv")?)?;
    match curve.crossing {
        Some(x) => println!(
            "data efficiency ({}): normalized F1 reaches 0.9 at fraction {:.4} -> {}",
            curve.method,
            x,
            out.join("plotdata_efficiency.csv").display()
        ),
        None => println!(
            "data efficiency ({}): normalized F1 never reaches 0.9 -> {}",
            curve.method,
            out.join("plotdata_efficiency.csv").display()
        ),
    }
    Ok(0)
}

fn cmd_robustness(
    args: &ExperimentArgs,
    shift_key: &str,
    shift_values: &[String],
    out_flag: Option<&Path>,
    verbose: bool,
) -> Result<i32> {
    let (cfg, file) = args.effective_config()?;
    let out = &resolve_out(out_flag, &file);
    if verbose || file.verbose {
        echo_config(&cfg);
    }
    let ds: EmbeddingDataset<f64> = load_dataset(&args.dataset)?;
    let rows = run_robustness(&ds, &cfg, shift_key, shift_values)?;
    write_result_artifacts(&rows, out)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "robustness over {} {:?} slices: {} rows ({} failed) -> {}",
        shift_values.len(),
        shift_key,
        rows.len(),
        failed,
        out.join("results.csv").display()
    );
    Ok(0)
}

fn cmd_ablate_k(
    args: &ExperimentArgs,
    method: MethodArg,
    out_flag: Option<&Path>,
    verbose: bool,
) -> Result<i32> {
    let (cfg, file) = args.effective_config()?;
    let out = &resolve_out(out_flag, &file);
    if verbose || file.verbose {
        echo_config(&cfg);
    }
    let ds: EmbeddingDataset<f64> = load_dataset(&args.dataset)?;
    let ablation = run_k_ablation(&ds, &cfg, method.into())?;
    write_result_artifacts(&ablation.rows, out)?;
    for (d, k, reason) in &ablation.skipped {
        eprintln!("skipped k={k} at D={d}: {reason}");
    }
    let best: Vec<String> = ablation
        .best_k_per_d
        .iter()
        .map(|(d, k)| format!("D={d}: k={k}"))
        .collect();
    println!(
        "context-size ablation: {} rows; best k per D: {} -> {}",
        ablation.rows.len(),
        best.join(", "),
        out.join("results.csv").display()
    );
    Ok(0)
}

fn cmd_drift_sim(
    scenario_path: Option<&Path>,
    builtin: BuiltinScenario,
    n_per_class: usize,
    seed: u64,
    out: &Path,
) -> Result<i32> {
    let scenario = match scenario_path {
        Some(p) => load_scenario::<f64>(p)?,
        None => match builtin {
            BuiltinScenario::ModelDrift => builtin_model_drift(),
            BuiltinScenario::ConceptDrift => builtin_concept_drift(),
        },
    };
    let run = run_drift_scenario(&scenario, n_per_class, seed)?;
    let mut acc = out_file(out, "plotdata_drift_accuracy.csv")?;
    use std::io::Write;
    writeln!(acc, "timestep,class,accuracy")?;
    for (t, step) in run.timesteps.iter().enumerate() {
        writeln!(acc, "{t},overall,{}", step.overall)?;
        for (class, a) in &step.per_class {
            writeln!(acc, "{t},{class},{a}")?;
        }
    }
    let mut pts = out_file(out, "plotdata_drift_points.csv")?;
    writeln!(pts, "timestep,class,x,y")?;
    for (t, clouds) in run.points.iter().enumerate() {
        for (class, cloud) in clouds {
            for p in cloud {
                writeln!(pts, "{t},{class},{},{}", p[0], p[1])?;
            }
        }
    }
    let sequence: Vec<String> = run
        .timesteps
        .iter()
        .map(|s| format!("{:.4}", s.overall))
        .collect();
    println!(
        "drift simulation ({} timesteps, {} points/class): accuracy {} -> {}",
        run.timesteps.len(),
        n_per_class,
        sequence.join(" "),
        out.join("plotdata_drift_accuracy.csv").display()
    );
    Ok(0)
}

fn cmd_cost_model(
    config: Option<&Path>,
    resolution: u32,
    sweep: &[u32],
    out: Option<&Path>,
) -> Result<i32> {
    let file = load_file_config(config)?;
    let pricing = file.pricing;
    pricing.validate()?;
    let (input, output) = cost_ratio(resolution, &pricing)?;
    if let Some(dir) = out {
        write_cost_sweep(sweep, &pricing, out_file(dir, "plotdata_cost.csv")?)?;
    }
    println!(
        "resolution {resolution}: input cost ratio {input:.2}x, output cost ratio {output:.2}x vs the {}-token embedding baseline",
        pricing.baseline_text_tokens
    );
    Ok(0)
}

// exit-code contract ---------------------------------------------------------

/// 1 = the inputs were wrong (flags, config, files, data shape);
/// 2 = the pipeline itself failed at runtime.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. }
        | Error::MalformedLine { .. }
        | Error::LineDimensionMismatch { .. }
        | Error::NonFiniteEntry { .. }
        | Error::EmptyDataset
        | Error::UnknownLabel { .. }
        | Error::DimensionMismatch { .. }
        | Error::ClassTooSmall { .. }
        | Error::InvalidParameter(_)
        | Error::TooFewClasses(_)
        | Error::MissingApiKey { .. }
        | Error::ClassSetMismatch(_)
        | Error::EmptyShiftSlice(_)
        | Error::MissingMetadata { .. }
        | Error::InvalidCovariance(_)
        | Error::BadMixtureWeights(_)
        | Error::CoincidentMeans
        | Error::ModelMismatch(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Ingest { dataset, out } => cmd_ingest(dataset, out),
        Command::Project { dataset, out } => cmd_project(dataset, out),
        Command::Augment {
            dataset,
            d,
            factor,
            k,
            generator,
            seed,
            out,
            generator_args,
        } => cmd_augment(dataset, *d, *factor, *k, *generator, *seed, out, generator_args),
        Command::Train {
            dataset,
            out,
            hidden_dim,
            learning_rate,
            batch_size,
            max_epochs,
            patience,
            seed,
            test_fraction,
            validation_fraction,
            split_seed,
        } => {
            let defaults = TrainConfig::default();
            let cfg = TrainConfig {
                hidden_dim: hidden_dim.unwrap_or(defaults.hidden_dim),
                learning_rate: learning_rate.unwrap_or(defaults.learning_rate),
                batch_size: batch_size.unwrap_or(defaults.batch_size),
                max_epochs: max_epochs.unwrap_or(defaults.max_epochs),
                patience: patience.unwrap_or(defaults.patience),
                seed: seed.unwrap_or(defaults.seed),
            };
            let split = SplitSpec {
                test_fraction: *test_fraction,
                validation_fraction_of_train: *validation_fraction,
                seed: *split_seed,
            };
            split.validate()?;
            cmd_train(dataset, out, cfg, split)
        }
        Command::Evaluate { dataset, model, out } => cmd_evaluate(dataset, model, out),
        Command::Stress { args, out } => cmd_stress(args, out.as_deref(), cli.verbose),
        Command::Efficiency {
            args,
            fractions,
            curve_method,
            out,
        } => cmd_efficiency(args, fractions, *curve_method, out.as_deref(), cli.verbose),
        Command::Robustness {
            args,
            shift_key,
            shift_values,
            out,
        } => cmd_robustness(args, shift_key, shift_values, out.as_deref(), cli.verbose),
        Command::AblateK {
            args,
            ablation_method,
            out,
        } => cmd_ablate_k(args, *ablation_method, out.as_deref(), cli.verbose),
        Command::DriftSim {
            scenario,
            builtin,
            n_per_class,
            seed,
            out,
        } => cmd_drift_sim(scenario.as_deref(), *builtin, *n_per_class, *seed, out),
        Command::CostModel {
            config,
            resolution,
            sweep,
            out,
        } => cmd_cost_model(config.as_deref(), *resolution, sweep, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successes; every other parse failure is a
            // validation error under the exit-code contract
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
