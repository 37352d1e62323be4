//! Synthetic embedding generation: a deterministic mock generator, an HTTP
//! chat-completions gateway, outlier screening, and augmented-dataset
//! assembly at a target factor.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::prompting::{build_prompt, parse_generation, PromptContext, PromptPair, DEFAULT_DECIMAL_PLACES};
use crate::rng::{sample_without_replacement, seeded, standard_normal, ChaCha8Rng};
use crate::scalar::{lit, Scalar};
use crate::store::{round_half_up, EmbeddingDataset, LabeledEmbedding, Source};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Mahalanobis threshold above which a candidate counts as an outlier.
pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 6.0;

/// Configuration for the HTTP LLM gateway.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries_per_sample: usize,
    pub parallelism_limit: usize,
    pub request_timeout_secs: f64,
    /// Name of the environment variable holding the bearer token. The key
    /// itself never appears in config files, flags, or logs.
    pub api_key_env_var: String,
    pub backoff_initial_ms: u64,
    pub backoff_cap_ms: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            endpoint_url: "http://localhost:8000/v1/chat/completions".into(),
            model_name: "gemma3-27b".into(),
            temperature: 1.0,
            max_retries_per_sample: 3,
            parallelism_limit: 1,
            request_timeout_secs: 60.0,
            api_key_env_var: "EMBAUG_API_KEY".into(),
            backoff_initial_ms: 1000,
            backoff_cap_ms: 30_000,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.parallelism_limit < 1 {
            return Err(Error::InvalidParameter(
                "parallelism_limit must be >= 1".into(),
            ));
        }
        if self.request_timeout_secs <= 0.0 {
            return Err(Error::InvalidParameter(
                "request_timeout_secs must be > 0".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(Error::InvalidParameter("temperature must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-class generation accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGenerationStats {
    pub requested: u64,
    pub accepted: u64,
    pub rejected_parse: u64,
    pub rejected_outlier: u64,
    pub retries_used: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub per_class: BTreeMap<String, ClassGenerationStats>,
}

impl GenerationReport {
    /// True when some class received fewer synthetic samples than requested.
    pub fn degraded(&self) -> bool {
        self.per_class.values().any(|s| s.accepted < s.requested)
    }
}

/// How many synthetic samples to produce per class and from what context.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub d_real_per_class: usize,
    pub factor: f64,
    pub k_context: usize,
    pub seed: u64,
}

impl AugmentationPlan {
    pub fn synthetic_per_class(&self) -> usize {
        round_half_up((self.factor - 1.0) * self.d_real_per_class as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factor <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "factor must be > 1, got {}",
                self.factor
            )));
        }
        if self.k_context == 0 || self.k_context > self.d_real_per_class {
            return Err(Error::InvalidParameter(format!(
                "k_context must be in 1..={}, got {}",
                self.d_real_per_class, self.k_context
            )));
        }
        if self.synthetic_per_class() < 1 {
            return Err(Error::InvalidParameter(
                "plan yields zero synthetic samples per class".into(),
            ));
        }
        Ok(())
    }
}

/// A source of synthetic embeddings conditioned on a few-shot context.
pub trait EmbeddingGenerator<F: Scalar>: Sync {
    fn generate(
        &self,
        prompt: &PromptPair,
        context: &[Vec<F>],
        expected_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<F>>;

    fn max_retries_per_sample(&self) -> usize {
        3
    }

    fn parallelism_limit(&self) -> usize {
        1
    }
}

// context statistics ---------------------------------------------------------

/// Gaussian fit to a context set: sample mean plus sample covariance shrunk
/// halfway toward its diagonal.
struct ContextGaussian<F> {
    mean: Vec<F>,
    chol: Matrix<F>,
    full_rank: bool,
    stds: Vec<F>,
}

impl<F: Scalar> ContextGaussian<F> {
    fn fit(context: &[Vec<F>]) -> Result<Self> {
        if context.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 context vectors".into(),
            ));
        }
        let dim = context[0].len();
        let refs: Vec<&[F]> = context.iter().map(|v| v.as_slice()).collect();
        let mean = linalg::mean_vector(&refs);
        let cov = linalg::sample_covariance(&refs, &mean);
        let half = lit::<F>(0.5);
        let mut shrunk = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                shrunk[(i, j)] = if i == j {
                    cov[(i, i)]
                } else {
                    half * cov[(i, j)]
                };
            }
        }
        let tol = lit::<F>(1e-12) * (shrunk.trace() / lit::<F>(dim as f64) + F::one());
        let (chol, rank) = shrunk.cholesky_semidefinite(tol);
        let stds = (0..dim).map(|i| cov[(i, i)].sqrt()).collect();
        Ok(ContextGaussian {
            mean,
            chol,
            full_rank: rank == dim,
            stds,
        })
    }
}

/// Draw one vector from the Gaussian fit to the context; deterministic
/// given the rng state. A context of identical vectors reproduces that
/// vector exactly.
pub fn mock_generate_with<F: Scalar>(
    context: &[Vec<F>],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<F>> {
    let g = ContextGaussian::fit(context)?;
    let dim = g.mean.len();
    let xi: Vec<F> = (0..dim).map(|_| standard_normal(rng)).collect();
    let noise = g.chol.matvec(&xi);
    Ok(g.mean.iter().zip(&noise).map(|(&m, &n)| m + n).collect())
}

/// Seeded form of [`mock_generate_with`].
pub fn mock_generate<F: Scalar>(context: &[Vec<F>], seed: u64) -> Result<Vec<F>> {
    mock_generate_with(context, &mut seeded(seed, &[0x30c4]))
}

/// True iff the candidate lies farther than `threshold` Mahalanobis units
/// from the context Gaussian. Rank-deficient covariances fall back to a
/// per-coordinate z-score test at the same threshold.
pub fn reject_outlier_with<F: Scalar>(
    candidate: &[F],
    context: &[Vec<F>],
    threshold: f64,
) -> Result<bool> {
    let g = ContextGaussian::fit(context)?;
    if candidate.len() != g.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: g.mean.len(),
            found: candidate.len(),
        });
    }
    let r = linalg::sub(candidate, &g.mean);
    let thr = lit::<F>(threshold);
    if g.full_rank {
        let y = g.chol.forward_solve(&r);
        Ok(linalg::norm(&y) > thr)
    } else {
        for (diff, sd) in r.iter().zip(&g.stds) {
            let exceeded = if *sd == F::zero() {
                *diff != F::zero()
            } else {
                diff.abs() / *sd > thr
            };
            if exceeded {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// [`reject_outlier_with`] at the default threshold of 6.
pub fn reject_outlier<F: Scalar>(candidate: &[F], context: &[Vec<F>]) -> Result<bool> {
    reject_outlier_with(candidate, context, DEFAULT_OUTLIER_THRESHOLD)
}

/// The deterministic offline stand-in for the LLM gateway.
pub struct MockGenerator;

impl<F: Scalar> EmbeddingGenerator<F> for MockGenerator {
    fn generate(
        &self,
        _prompt: &PromptPair,
        context: &[Vec<F>],
        _expected_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<F>> {
        mock_generate_with(context, rng)
    }
}

/// Chat-completions HTTP gateway.
pub struct HttpGenerator {
    config: GeneratorConfig,
    api_key: String,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl HttpGenerator {
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env_var).map_err(|_| Error::MissingApiKey {
            env_var: config.api_key_env_var.clone(),
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs_f64(
                config.request_timeout_secs,
            ))
            .build()
            .map_err(|e| Error::Transport {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(HttpGenerator {
            config,
            api_key,
            client,
        })
    }

    /// One completion with exponential backoff on transport / HTTP failures.
    fn complete(&self, prompt: &PromptPair) -> Result<String> {
        let body = ChatRequest {
            model: &self.config.model_name,
            messages: vec![
                ChatMessage {
                    role: "system",
                    content: &prompt.system_text,
                },
                ChatMessage {
                    role: "user",
                    content: &prompt.user_text,
                },
            ],
            temperature: self.config.temperature,
        };
        let mut delay_ms = self.config.backoff_initial_ms;
        let attempts = self.config.max_retries_per_sample + 1;
        let mut last_err = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(std::time::Duration::from_millis(delay_ms));
                delay_ms = (delay_ms * 2).min(self.config.backoff_cap_ms);
            }
            let result = self
                .client
                .post(&self.config.endpoint_url)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            match result {
                Ok(resp) if resp.status().is_success() => {
                    let parsed: ChatResponse = resp.json().map_err(|e| Error::Transport {
                        attempts: attempt + 1,
                        message: format!("invalid response body: {e}"),
                    })?;
                    let choice = parsed.choices.into_iter().next().ok_or(Error::Transport {
                        attempts: attempt + 1,
                        message: "response held no choices".into(),
                    })?;
                    return Ok(choice.message.content);
                }
                Ok(resp) => {
                    last_err = format!("http status {}", resp.status());
                }
                Err(e) => {
                    last_err = e.to_string();
                }
            }
        }
        Err(Error::Transport {
            attempts,
            message: last_err,
        })
    }
}

impl<F: Scalar> EmbeddingGenerator<F> for HttpGenerator {
    fn generate(
        &self,
        prompt: &PromptPair,
        _context: &[Vec<F>],
        expected_dim: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Vec<F>> {
        let text = self.complete(prompt)?;
        parse_generation(&text, expected_dim)
    }

    fn max_retries_per_sample(&self) -> usize {
        self.config.max_retries_per_sample
    }

    fn parallelism_limit(&self) -> usize {
        self.config.parallelism_limit
    }
}

fn is_parse_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoNumericList
            | Error::GenerationDimensionMismatch { .. }
            | Error::NonFiniteGeneration
    )
}

/// One parsed, dimension-checked vector, retrying parse failures up to the
/// generator's per-sample retry budget.
pub fn generate_one<F: Scalar>(
    generator: &dyn EmbeddingGenerator<F>,
    prompt: &PromptPair,
    context: &[Vec<F>],
    expected_dim: usize,
    rng: &mut ChaCha8Rng,
    stats: &mut ClassGenerationStats,
) -> Result<Vec<F>> {
    let attempts = generator.max_retries_per_sample() + 1;
    let mut last = None;
    for attempt in 0..attempts {
        match generator.generate(prompt, context, expected_dim, rng) {
            Ok(v) => return Ok(v),
            Err(e) if is_parse_failure(&e) => {
                stats.rejected_parse += 1;
                if attempt + 1 < attempts {
                    stats.retries_used += 1;
                }
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

struct Slot<F> {
    class_idx: usize,
    sample_idx: usize,
    context: Vec<Vec<F>>,
    prompt: PromptPair,
}

struct SlotOutcome<F> {
    class_idx: usize,
    vector: Option<Vec<F>>,
    stats: ClassGenerationStats,
}

/// Generate synthetic vectors for every class and return real + accepted
/// synthetic records plus the per-class report.
///
/// A fresh context subset is resampled per generated sample; accepted
/// vectors are committed in (class order, request index) order, so the
/// output is stable regardless of worker scheduling, and the mock pipeline
/// is a pure function of `(real, plan)`.
pub fn augment_dataset<F: Scalar>(
    real: &EmbeddingDataset<F>,
    generator: &dyn EmbeddingGenerator<F>,
    plan: &AugmentationPlan,
) -> Result<(EmbeddingDataset<F>, GenerationReport)> {
    plan.validate()?;
    let per_class = real.per_class_indices();
    for (label, idx) in &per_class {
        if idx.len() != plan.d_real_per_class {
            return Err(Error::InvalidParameter(format!(
                "class {label:?} has {} records, plan expects exactly {}",
                idx.len(),
                plan.d_real_per_class
            )));
        }
    }
    let dim = real.dimension();
    let classes: Vec<String> = real.class_set().to_vec();
    let per_class_synth = plan.synthetic_per_class();

    // assemble independent work slots up front
    let mut slots = Vec::with_capacity(classes.len() * per_class_synth);
    for (ci, label) in classes.iter().enumerate() {
        let idx = &per_class[label.as_str()];
        for j in 0..per_class_synth {
            let mut rng = seeded(plan.seed, &[0xa9, ci as u64, j as u64]);
            let picks = sample_without_replacement(idx.len(), plan.k_context, &mut rng);
            let context: Vec<Vec<F>> = picks
                .iter()
                .map(|&p| real.records()[idx[p]].vector.clone())
                .collect();
            let prompt = build_prompt(&PromptContext {
                class_name: label.clone(),
                context_vectors: context.clone(),
                decimal_places: DEFAULT_DECIMAL_PLACES,
            })?;
            slots.push(Slot {
                class_idx: ci,
                sample_idx: j,
                context,
                prompt,
            });
        }
    }

    let run_slot = |slot: &Slot<F>| -> SlotOutcome<F> {
        let mut stats = ClassGenerationStats::default();
        let mut rng = seeded(plan.seed, &[0xd14, slot.class_idx as u64, slot.sample_idx as u64]);
        let attempts = generator.max_retries_per_sample() + 1;
        let mut vector = None;
        for attempt in 0..attempts {
            match generate_one(generator, &slot.prompt, &slot.context, dim, &mut rng, &mut stats)
            {
                Ok(v) => match reject_outlier(&v, &slot.context) {
                    Ok(true) => {
                        stats.rejected_outlier += 1;
                        if attempt + 1 < attempts {
                            stats.retries_used += 1;
                        }
                    }
                    Ok(false) => {
                        vector = Some(v);
                        break;
                    }
                    Err(_) => break,
                },
                Err(_) => break,
            }
        }
        SlotOutcome {
            class_idx: slot.class_idx,
            vector,
            stats,
        }
    };

    let workers = generator.parallelism_limit().max(1).min(slots.len().max(1));
    let outcomes: Vec<SlotOutcome<F>> = if workers <= 1 {
        slots.iter().map(run_slot).collect()
    } else {
        let cells: Vec<Mutex<Option<SlotOutcome<F>>>> =
            slots.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= slots.len() {
                        break;
                    }
                    *cells[i].lock().unwrap() = Some(run_slot(&slots[i]));
                });
            }
        });
        cells
            .into_iter()
            .map(|c| c.into_inner().unwrap().unwrap())
            .collect()
    };

    let mut report = GenerationReport::default();
    for label in &classes {
        report.per_class.insert(
            label.clone(),
            ClassGenerationStats {
                requested: per_class_synth as u64,
                ..Default::default()
            },
        );
    }
    let mut records = real.records().to_vec();
    let mut accepted_per_class = vec![0usize; classes.len()];
    for outcome in outcomes {
        let label = &classes[outcome.class_idx];
        let s = report.per_class.get_mut(label).unwrap();
        s.rejected_parse += outcome.stats.rejected_parse;
        s.rejected_outlier += outcome.stats.rejected_outlier;
        s.retries_used += outcome.stats.retries_used;
        if let Some(v) = outcome.vector {
            let j = accepted_per_class[outcome.class_idx];
            accepted_per_class[outcome.class_idx] += 1;
            s.accepted += 1;
            records.push(LabeledEmbedding {
                id: format!("syn-{label}-{j}"),
                class_label: label.clone(),
                vector: v,
                source: Source::Synthetic,
                metadata: None,
            });
        }
    }

    let augmented = EmbeddingDataset::with_class_set(records, dim, classes)?;
    Ok((augmented, report))
}
