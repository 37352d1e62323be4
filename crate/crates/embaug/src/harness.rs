//! Experiment orchestration: low-shot stress sweeps, data-efficiency curves,
//! shift robustness, per-class deltas, and the context-size ablation.

use crate::classifier::{evaluate, train_mlp, TrainConfig};
use crate::error::{Error, Result};
use crate::generation::{
    augment_dataset, AugmentationPlan, EmbeddingGenerator, GeneratorConfig, HttpGenerator,
    MockGenerator,
};
use crate::metrics::Averaging;
use crate::projection::{fit_lda, project_dataset};
use crate::scalar::{lit, Scalar};
use crate::store::{round_half_up, sample_per_class, stratified_split, EmbeddingDataset, SplitSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// No augmentation: train on the D real samples only.
    None,
    /// Deterministic Gaussian mock generator (offline).
    Mock,
    /// HTTP LLM gateway.
    Llm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::None => "none",
            Method::Mock => "mock",
            Method::Llm => "llm",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub d_values: Vec<usize>,
    pub factors: Vec<f64>,
    pub k_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub generator: GeneratorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d_values: vec![10, 25, 50],
            factors: vec![1.2, 1.5, 2.0],
            k_values: vec![5, 10, 15],
            methods: vec![Method::None, Method::Mock],
            seeds: (0..10).collect(),
            split: SplitSpec {
                test_fraction: 0.2,
                validation_fraction_of_train: 0.1,
                seed: 0,
            },
            train: TrainConfig::default(),
            generator: GeneratorConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.d_values.is_empty() {
            problems.push("d_values must be non-empty".to_string());
        }
        if self.k_values.is_empty() {
            problems.push("k_values must be non-empty".to_string());
        }
        if self.methods.is_empty() {
            problems.push("methods must be non-empty".to_string());
        }
        if self.seeds.is_empty() {
            problems.push("seeds must be non-empty".to_string());
        }
        let needs_factors = self
            .methods
            .iter()
            .any(|m| !matches!(m, Method::None));
        if needs_factors && self.factors.is_empty() {
            problems.push("factors must be non-empty for augmented methods".to_string());
        }
        for f in &self.factors {
            if *f <= 1.0 {
                problems.push(format!("factor {f} must be > 1"));
            }
        }
        for (name, r) in [
            ("split", self.split.validate()),
            ("train", self.train.validate()),
            ("generator", self.generator.validate()),
        ] {
            if let Err(e) = r {
                problems.push(format!("{name}: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }
}

/// One experiment cell's outcome. Failed cells keep their coordinates with
/// zeroed metrics and a non-"ok" status instead of disappearing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow<F> {
    pub method: String,
    pub d: usize,
    pub factor: f64,
    pub k: usize,
    pub seed: u64,
    pub f1: F,
    pub accuracy: F,
    pub precision: F,
    pub recall: F,
    pub shift: Option<String>,
    pub status: String,
    pub per_class_f1: BTreeMap<String, F>,
}

impl<F: Scalar> ResultRow<F> {
    fn failed(method: String, d: usize, factor: f64, k: usize, seed: u64, err: &Error) -> Self {
        ResultRow {
            method,
            d,
            factor,
            k,
            seed,
            f1: F::zero(),
            accuracy: F::zero(),
            precision: F::zero(),
            recall: F::zero(),
            shift: None,
            status: format!("failed: {err}"),
            per_class_f1: BTreeMap::new(),
        }
    }
}

fn build_generator<F: Scalar>(
    method: Method,
    cfg: &GeneratorConfig,
) -> Result<Option<Box<dyn EmbeddingGenerator<F>>>> {
    Ok(match method {
        Method::None => None,
        Method::Mock => Some(Box::new(MockGenerator)),
        Method::Llm => Some(Box::new(HttpGenerator::new(cfg.clone())?)),
    })
}

/// The k values evaluated at a given D: k = 5 is forced when D = 10 (when 5
/// is configured at all); otherwise any configured k ≤ D qualifies. Returns
/// the evaluated list plus (k, reason) pairs for the skipped ones.
pub fn allowed_k(d: usize, k_values: &[usize]) -> (Vec<usize>, Vec<(usize, String)>) {
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    let force_five = d == 10 && k_values.contains(&5);
    for &k in k_values {
        if force_five && k != 5 {
            skipped.push((k, format!("k forced to 5 at D={d}")));
        } else if k > d {
            skipped.push((k, format!("k={k} exceeds D={d}")));
        } else {
            kept.push(k);
        }
    }
    (kept, skipped)
}

/// Largest configured k usable with `d` real samples per class, defaulting
/// to the full context when every configured k is too large.
pub fn choose_k(k_values: &[usize], d: usize) -> usize {
    let (kept, _) = allowed_k(d, k_values);
    kept.into_iter().max().unwrap_or(d)
}

struct CellInput<'a, F> {
    train: &'a EmbeddingDataset<F>,
    validation: &'a EmbeddingDataset<F>,
    test: &'a EmbeddingDataset<F>,
}

/// Run the full pipeline for one cell: sample D per class, fit the
/// projection on the sample, project all partitions, optionally augment,
/// train, and score on the fixed projected test set. `d = None` trains on
/// the whole training split (the full-data reference).
fn run_cell<F: Scalar>(
    input: &CellInput<'_, F>,
    d: Option<usize>,
    factor: f64,
    k: usize,
    seed: u64,
    train_cfg: &TrainConfig,
    generator: Option<&dyn EmbeddingGenerator<F>>,
) -> Result<crate::metrics::ScoreReport<F>> {
    let sampled = match d {
        Some(d) => sample_per_class(input.train, d, seed)?,
        None => input.train.clone(),
    };
    let lda = fit_lda(&sampled)?;
    let p_train = project_dataset(&lda, &sampled)?;
    let p_val = project_dataset(&lda, input.validation)?;
    let p_test = project_dataset(&lda, input.test)?;
    let training = match (generator, d) {
        (Some(gen), Some(d)) => {
            let plan = AugmentationPlan {
                d_real_per_class: d,
                factor,
                k_context: k,
                seed,
            };
            let (aug, report) = augment_dataset(&p_train, gen, &plan)?;
            if report.degraded() {
                let (class, stats) = report
                    .per_class
                    .iter()
                    .find(|(_, s)| s.accepted < s.requested)
                    .expect("degraded report has a short class");
                return Err(Error::GeneratorExhausted {
                    class: class.clone(),
                    attempts: stats.retries_used as usize + 1,
                    last_error: format!(
                        "accepted {} of {} requested",
                        stats.accepted, stats.requested
                    ),
                });
            }
            aug
        }
        _ => p_train,
    };
    let cfg = TrainConfig {
        seed,
        ..*train_cfg
    };
    let (model, _) = train_mlp(&training, &p_val, &cfg)?;
    evaluate(&model, &p_test, Averaging::Macro)
}

fn row_from_report<F: Scalar>(
    method: String,
    d: usize,
    factor: f64,
    k: usize,
    seed: u64,
    report: &crate::metrics::ScoreReport<F>,
    class_order: &[String],
) -> ResultRow<F> {
    ResultRow {
        method,
        d,
        factor,
        k,
        seed,
        f1: report.f1,
        accuracy: report.accuracy,
        precision: report.precision,
        recall: report.recall,
        shift: None,
        status: "ok".into(),
        per_class_f1: class_order
            .iter()
            .cloned()
            .zip(report.per_class_f1.iter().copied())
            .collect(),
    }
}

/// Full sweep over (method, D, factor, k, seed) plus one full-data
/// reference row per seed ("oracle" in the method column). Rows are emitted
/// in canonical cell order regardless of execution details.
pub fn run_stress<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    cfg: &ExperimentConfig,
) -> Result<Vec<ResultRow<F>>> {
    cfg.validate()?;
    let (train, validation, test) = stratified_split(dataset, &cfg.split)?;
    let input = CellInput {
        train: &train,
        validation: &validation,
        test: &test,
    };
    let full_d = train
        .per_class_indices()
        .values()
        .map(|v| v.len())
        .min()
        .unwrap_or(0);
    let classes = dataset.class_set().to_vec();
    let mut rows = Vec::new();

    for &seed in &cfg.seeds {
        match run_cell(&input, None, 1.0, 0, seed, &cfg.train, None) {
            Ok(report) => rows.push(row_from_report(
                "oracle".into(),
                full_d,
                1.0,
                0,
                seed,
                &report,
                &classes,
            )),
            Err(e) => rows.push(ResultRow::failed("oracle".into(), full_d, 1.0, 0, seed, &e)),
        }
    }

    for &method in &cfg.methods {
        let generator = build_generator::<F>(method, &cfg.generator)?;
        for &d in &cfg.d_values {
            let cells: Vec<(f64, usize)> = match method {
                Method::None => vec![(1.0, 0)],
                _ => {
                    let (ks, _) = allowed_k(d, &cfg.k_values);
                    cfg.factors
                        .iter()
                        .flat_map(|&f| ks.iter().map(move |&k| (f, k)))
                        .collect()
                }
            };
            for (factor, k) in cells {
                for &seed in &cfg.seeds {
                    let outcome = run_cell(
                        &input,
                        Some(d),
                        factor,
                        k,
                        seed,
                        &cfg.train,
                        generator.as_deref(),
                    );
                    rows.push(match outcome {
                        Ok(report) => row_from_report(
                            method.to_string(),
                            d,
                            factor,
                            k,
                            seed,
                            &report,
                            &classes,
                        ),
                        Err(e) => {
                            ResultRow::failed(method.to_string(), d, factor, k, seed, &e)
                        }
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Normalized-F1 curve against the labeled fraction of the training split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyCurve<F> {
    pub method: String,
    /// (fraction, mean normalized F1) pairs in ascending fraction order.
    pub points: Vec<(f64, F)>,
    /// Smallest fraction whose normalized F1 reaches 0.9, linearly
    /// interpolated between evaluated fractions.
    pub crossing: Option<f64>,
}

/// Linear interpolation of the first upward 0.9 crossing.
pub fn crossing_fraction(points: &[(f64, f64)], threshold: f64) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    if points[0].1 >= threshold {
        return Some(points[0].0);
    }
    for w in points.windows(2) {
        let (f1, y1) = w[0];
        let (f2, y2) = w[1];
        if y1 < threshold && y2 >= threshold {
            return Some(f1 + (threshold - y1) / (y2 - y1) * (f2 - f1));
        }
    }
    None
}

/// For each fraction: subsample the training split, run the pipeline, and
/// record test F1 normalized by the full-data score of the same seed.
pub fn run_data_efficiency<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    cfg: &ExperimentConfig,
    fractions: &[f64],
    method: Method,
) -> Result<EfficiencyCurve<F>> {
    cfg.validate()?;
    if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(Error::InvalidParameter(
            "fractions must lie in (0, 1]".into(),
        ));
    }
    let (train, validation, test) = stratified_split(dataset, &cfg.split)?;
    let input = CellInput {
        train: &train,
        validation: &validation,
        test: &test,
    };
    let per_class = train
        .per_class_indices()
        .values()
        .map(|v| v.len())
        .min()
        .unwrap_or(0);
    let generator = build_generator::<F>(method, &cfg.generator)?;
    let factor = cfg.factors.last().copied().unwrap_or(2.0);

    let mut oracle: BTreeMap<u64, F> = BTreeMap::new();
    for &seed in &cfg.seeds {
        let report = run_cell(&input, None, 1.0, 0, seed, &cfg.train, None)?;
        oracle.insert(seed, report.f1);
    }

    let mut fractions = fractions.to_vec();
    fractions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut points = Vec::with_capacity(fractions.len());
    for &fraction in &fractions {
        let d = round_half_up(fraction * per_class as f64).max(1);
        let mut total = F::zero();
        for &seed in &cfg.seeds {
            // the full-fraction point reruns the oracle pipeline exactly,
            // so it normalizes to 1 by construction
            let (cell_d, gen): (Option<usize>, Option<&dyn EmbeddingGenerator<F>>) =
                if d >= per_class {
                    (None, None)
                } else {
                    (Some(d), generator.as_deref())
                };
            let k = choose_k(&cfg.k_values, d);
            let report = run_cell(&input, cell_d, factor, k, seed, &cfg.train, gen)?;
            let base = oracle[&seed];
            let normalized = if base > F::zero() {
                report.f1 / base
            } else {
                F::zero()
            };
            total = total + normalized;
        }
        points.push((fraction, total / lit::<F>(cfg.seeds.len() as f64)));
    }
    let crossing = crossing_fraction(
        &points
            .iter()
            .map(|&(f, y)| (f, y.to_f64().unwrap()))
            .collect::<Vec<_>>(),
        0.9,
    );
    Ok(EfficiencyCurve {
        method: method.to_string(),
        points,
        crossing,
    })
}

/// Train one model per (method, D, seed) on the unshifted pipeline and score
/// it on each metadata-filtered slice of the test partition.
pub fn run_robustness<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    cfg: &ExperimentConfig,
    shift_key: &str,
    shift_values: &[String],
) -> Result<Vec<ResultRow<F>>> {
    cfg.validate()?;
    if shift_values.is_empty() {
        return Err(Error::InvalidParameter("no shift values given".into()));
    }
    let (train, validation, test) = stratified_split(dataset, &cfg.split)?;
    let slices: Vec<(String, EmbeddingDataset<F>)> = shift_values
        .iter()
        .map(|v| {
            let slice = test.filter_metadata(shift_key, v);
            if slice.is_empty() {
                Err(Error::EmptyShiftSlice(v.clone()))
            } else {
                Ok((v.clone(), slice))
            }
        })
        .collect::<Result<_>>()?;

    let classes = dataset.class_set().to_vec();
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let generator = build_generator::<F>(method, &cfg.generator)?;
        for &d in &cfg.d_values {
            let factor = match method {
                Method::None => 1.0,
                _ => cfg.factors.last().copied().unwrap_or(2.0),
            };
            let k = match method {
                Method::None => 0,
                _ => choose_k(&cfg.k_values, d),
            };
            for &seed in &cfg.seeds {
                // one model per (method, D, seed), evaluated on every slice
                let outcome = (|| -> Result<Vec<ResultRow<F>>> {
                    let sampled = sample_per_class(&train, d, seed)?;
                    let lda = fit_lda(&sampled)?;
                    let p_train = project_dataset(&lda, &sampled)?;
                    let p_val = project_dataset(&lda, &validation)?;
                    let training = match generator.as_deref() {
                        Some(gen) => {
                            let plan = AugmentationPlan {
                                d_real_per_class: d,
                                factor,
                                k_context: k,
                                seed,
                            };
                            augment_dataset(&p_train, gen, &plan)?.0
                        }
                        None => p_train,
                    };
                    let tc = TrainConfig { seed, ..cfg.train };
                    let (model, _) = train_mlp(&training, &p_val, &tc)?;
                    let mut out = Vec::new();
                    for (value, slice) in &slices {
                        let p_slice = project_dataset(&lda, slice)?;
                        let report = evaluate(&model, &p_slice, Averaging::Macro)?;
                        let mut row = row_from_report(
                            method.to_string(),
                            d,
                            factor,
                            k,
                            seed,
                            &report,
                            &classes,
                        );
                        row.shift = Some(value.clone());
                        out.push(row);
                    }
                    Ok(out)
                })();
                match outcome {
                    Ok(mut slice_rows) => rows.append(&mut slice_rows),
                    Err(e) => {
                        for (value, _) in &slices {
                            let mut row =
                                ResultRow::failed(method.to_string(), d, factor, k, seed, &e);
                            row.shift = Some(value.clone());
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Per-class mean F1 difference between a method's rows and the baseline's,
/// matched on (D, seed) and sorted ascending; the lowest entries are the
/// classes the method helps least (or hurts).
pub fn hard_class_delta<F: Scalar>(
    method_rows: &[ResultRow<F>],
    baseline_rows: &[ResultRow<F>],
) -> Result<Vec<(String, F)>> {
    let ok = |rows: &[ResultRow<F>]| -> Vec<ResultRow<F>> {
        rows.iter().filter(|r| r.status == "ok").cloned().collect()
    };
    let method_rows = ok(method_rows);
    let baseline_rows = ok(baseline_rows);
    if method_rows.is_empty() || baseline_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes: Vec<String> = method_rows[0].per_class_f1.keys().cloned().collect();
    for r in method_rows.iter().chain(&baseline_rows) {
        let these: Vec<String> = r.per_class_f1.keys().cloned().collect();
        if these != classes {
            return Err(Error::ClassSetMismatch(format!(
                "{classes:?} vs {these:?}"
            )));
        }
    }
    let mut base_index: BTreeMap<(usize, u64), &ResultRow<F>> = BTreeMap::new();
    for r in &baseline_rows {
        base_index.insert((r.d, r.seed), r);
    }
    let mut sums: BTreeMap<String, (F, usize)> = classes
        .iter()
        .map(|c| (c.clone(), (F::zero(), 0usize)))
        .collect();
    for r in &method_rows {
        let Some(base) = base_index.get(&(r.d, r.seed)) else {
            continue;
        };
        for c in &classes {
            let delta = r.per_class_f1[c] - base.per_class_f1[c];
            let entry = sums.get_mut(c).unwrap();
            entry.0 = entry.0 + delta;
            entry.1 += 1;
        }
    }
    let mut out: Vec<(String, F)> = sums
        .into_iter()
        .map(|(c, (sum, n))| {
            let mean = if n > 0 {
                sum / lit::<F>(n as f64)
            } else {
                F::zero()
            };
            (c, mean)
        })
        .collect();
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KAblation<F> {
    pub rows: Vec<ResultRow<F>>,
    /// (D, k, reason) for configured pairs that were not evaluated.
    pub skipped: Vec<(usize, usize, String)>,
    /// Highest-mean-F1 k per D; no aggregation across D.
    pub best_k_per_d: BTreeMap<usize, usize>,
}

/// Sweep the context size k per D with the mock/LLM pipeline at the largest
/// configured factor.
pub fn run_k_ablation<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    cfg: &ExperimentConfig,
    method: Method,
) -> Result<KAblation<F>> {
    cfg.validate()?;
    if matches!(method, Method::None) {
        return Err(Error::InvalidParameter(
            "the context-size ablation needs an augmenting method".into(),
        ));
    }
    let (train, validation, test) = stratified_split(dataset, &cfg.split)?;
    let input = CellInput {
        train: &train,
        validation: &validation,
        test: &test,
    };
    let generator = build_generator::<F>(method, &cfg.generator)?;
    let factor = cfg.factors.last().copied().unwrap_or(2.0);
    let classes = dataset.class_set().to_vec();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut best: BTreeMap<usize, (usize, F)> = BTreeMap::new();
    for &d in &cfg.d_values {
        let (ks, dropped) = allowed_k(d, &cfg.k_values);
        for (k, reason) in dropped {
            skipped.push((d, k, reason));
        }
        for k in ks {
            let mut total = F::zero();
            let mut count = 0usize;
            for &seed in &cfg.seeds {
                let outcome = run_cell(
                    &input,
                    Some(d),
                    factor,
                    k,
                    seed,
                    &cfg.train,
                    generator.as_deref(),
                );
                match outcome {
                    Ok(report) => {
                        total = total + report.f1;
                        count += 1;
                        rows.push(row_from_report(
                            method.to_string(),
                            d,
                            factor,
                            k,
                            seed,
                            &report,
                            &classes,
                        ));
                    }
                    Err(e) => {
                        rows.push(ResultRow::failed(method.to_string(), d, factor, k, seed, &e))
                    }
                }
            }
            if count > 0 {
                let mean = total / lit::<F>(count as f64);
                let better = match best.get(&d) {
                    Some(&(_, best_mean)) => mean > best_mean,
                    None => true,
                };
                if better {
                    best.insert(d, (k, mean));
                }
            }
        }
    }
    Ok(KAblation {
        rows,
        skipped,
        best_k_per_d: best.into_iter().map(|(d, (k, _))| (d, k)).collect(),
    })
}

// writers --------------------------------------------------------------------

pub const RESULTS_CSV_HEADER: &str =
    "method,d,factor,k,seed,f1,accuracy,precision,recall,shift,status";

/// One ResultRow per line under the fixed header.
pub fn write_results_csv<F: Scalar, W: Write>(rows: &[ResultRow<F>], mut out: W) -> Result<()> {
    writeln!(out, "{RESULTS_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.d,
            r.factor,
            r.k,
            r.seed,
            r.f1,
            r.accuracy,
            r.precision,
            r.recall,
            r.shift.as_deref().unwrap_or(""),
            r.status.replace(',', ";"),
        )?;
    }
    Ok(())
}

pub fn write_results_json<F: Scalar + Serialize, W: Write>(
    rows: &[ResultRow<F>],
    mut out: W,
) -> Result<()> {
    let text = serde_json::to_string_pretty(rows)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Plot data: data-efficiency curve points.
pub fn write_efficiency_csv<F: Scalar, W: Write>(
    curve: &EfficiencyCurve<F>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "fraction,normalized_f1")?;
    for (f, y) in &curve.points {
        writeln!(out, "{f},{y}")?;
    }
    Ok(())
}

/// Plot data: per-class delta-F1 bars, ascending.
pub fn write_delta_csv<F: Scalar, W: Write>(deltas: &[(String, F)], mut out: W) -> Result<()> {
    writeln!(out, "class,delta_f1")?;
    for (class, delta) in deltas {
        writeln!(out, "{class},{delta}")?;
    }
    Ok(())
}

/// Plot data: the first two projected coordinates of every record, for
/// real-vs-synthetic scatter plots.
pub fn write_scatter_csv<F: Scalar, W: Write>(
    dataset: &EmbeddingDataset<F>,
    mut out: W,
) -> Result<()> {
    if dataset.dimension() < 2 {
        return Err(Error::InvalidParameter(
            "scatter output needs at least 2 projected dimensions".into(),
        ));
    }
    writeln!(out, "id,label,source,x,y")?;
    for r in dataset.records() {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.id,
            r.class_label,
            serde_json::to_value(r.source)?.as_str().unwrap(),
            r.vector[0],
            r.vector[1]
        )?;
    }
    Ok(())
}
