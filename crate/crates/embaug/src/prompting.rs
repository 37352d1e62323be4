//! Few-shot prompt construction and parsing of generated embeddings.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use regex::Regex;
use std::sync::OnceLock;

/// Context set for one class: the k real vectors serialized into the prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptContext<F> {
    pub class_name: String,
    pub context_vectors: Vec<Vec<F>>,
    pub decimal_places: usize,
}

/// Default numeric precision inside prompts; balances token count against
/// beta-space resolution.
pub const DEFAULT_DECIMAL_PLACES: usize = 4;

/// System + user message pair sent to the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPair {
    pub system_text: String,
    pub user_text: String,
}

/// The system instruction, a pure constant independent of the context.
pub const SYSTEM_PROMPT: &str = "\
You are an expert in generating high-quality synthetic feature embeddings for wireless signal classification.
Your task is to generate synthetic embedding vectors for a given modulation class using a small set of real embeddings. The generated samples should preserve the underlying class structure and improve diversity for low-shot learning.
Guidelines:
1. Generate embeddings that are consistent with the distribution of the provided real samples.
2. Maintain class-specific characteristics and avoid drifting into other class regions.
3. Introduce controlled variation to improve diversity without adding excessive noise.
4. Ensure generated samples lie close to the intrinsic class manifold in the embedding space.
5. Avoid generating outliers/unrealistic samples.
6. Focus on preserving relationships between real samples.
Generate only the embedding, without any additional explanation or formatting.";

const USER_TEMPLATE: &str = "\
Given a set of real embeddings for a modulation class {class_name}:

REAL EMBEDDINGS:

{real_embedding_samples}

Generate one synthetic embedding vectors that:
- follow the same distribution
- preserve class structure
- improve diversity for training

Return only the generated embeddings.";

impl<F: Scalar> PromptContext<F> {
    pub fn validate(&self) -> Result<()> {
        if self.context_vectors.is_empty() {
            return Err(Error::InvalidParameter(
                "context set must hold at least one vector".into(),
            ));
        }
        if self.decimal_places == 0 {
            return Err(Error::InvalidParameter(
                "decimal_places must be positive".into(),
            ));
        }
        let dim = self.context_vectors[0].len();
        if self.context_vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(
                "context vectors must share one dimension".into(),
            ));
        }
        Ok(())
    }
}

/// Serialize vectors as one bracketed, comma-separated, fixed-precision
/// line each. Formatting rounds ties to even.
pub fn serialize_embeddings<F: Scalar>(vectors: &[Vec<F>], decimal_places: usize) -> Result<String> {
    if vectors.is_empty() {
        return Err(Error::InvalidParameter("no vectors to serialize".into()));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidParameter(
            "vectors must share one dimension".into(),
        ));
    }
    Ok(vectors
        .iter()
        .map(|v| {
            let entries: Vec<String> = v
                .iter()
                .map(|x| format!("{:.*}", decimal_places, x.to_f64().unwrap()))
                .collect();
            format!("[{}]", entries.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Instantiate the prompt templates for one context set. The system text is
/// constant; the user text substitutes the class name and serialized vectors
/// and requests exactly one synthetic embedding per call.
pub fn build_prompt<F: Scalar>(ctx: &PromptContext<F>) -> Result<PromptPair> {
    ctx.validate()?;
    let serialized = serialize_embeddings(&ctx.context_vectors, ctx.decimal_places)?;
    let user_text = USER_TEMPLATE
        .replace("{class_name}", &ctx.class_name)
        .replace("{real_embedding_samples}", &serialized);
    Ok(PromptPair {
        system_text: SYSTEM_PROMPT.to_string(),
        user_text,
    })
}

fn bracket_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[([^\[\]]*)\]").unwrap())
}

/// Extract the first bracketed comma-separated numeric list in `text`.
///
/// Surrounding prose is tolerated (models do not always honor the
/// "return only" instruction); dimension and finiteness are still enforced.
pub fn parse_generation<F: Scalar>(text: &str, expected_dim: usize) -> Result<Vec<F>> {
    if expected_dim == 0 {
        return Err(Error::InvalidParameter("expected_dim must be >= 1".into()));
    }
    for cap in bracket_regex().captures_iter(text) {
        let inner = &cap[1];
        let parsed: Option<Vec<f64>> = inner
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok())
            .collect();
        let Some(values) = parsed else { continue };
        if values.is_empty() {
            continue;
        }
        if values.len() != expected_dim {
            return Err(Error::GenerationDimensionMismatch {
                expected: expected_dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGeneration);
        }
        return Ok(values
            .iter()
            .map(|&v| num_traits::FromPrimitive::from_f64(v).unwrap())
            .collect());
    }
    Err(Error::NoNumericList)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialize_formatting_rules() {
        let s = serialize_embeddings(&[vec![0.5f64, -0.25]], 2).unwrap();
        assert_eq!(s, "[0.50, -0.25]");
        let s = serialize_embeddings(&[vec![1e-9f64]], 4).unwrap();
        assert_eq!(s, "[0.0000]");
        let many: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64]).collect();
        let s = serialize_embeddings(&many, 1).unwrap();
        assert_eq!(s.lines().count(), 15);
    }

    #[test]
    fn formatting_rounds_ties_to_even() {
        // 0.25 and 0.75 are exact binary values; ties resolve to even digits
        assert_eq!(serialize_embeddings(&[vec![0.25f64]], 1).unwrap(), "[0.2]");
        assert_eq!(serialize_embeddings(&[vec![0.75f64]], 1).unwrap(), "[0.8]");
    }

    #[test]
    fn build_prompt_contains_vectors_and_request() {
        let ctx = PromptContext {
            class_name: "QPSK".into(),
            context_vectors: vec![vec![1.0f64, 2.0]],
            decimal_places: 4,
        };
        let pair = build_prompt(&ctx).unwrap();
        assert!(pair.user_text.contains("QPSK"));
        assert!(pair.user_text.contains("REAL EMBEDDINGS:"));
        assert!(pair.user_text.contains("[1.0000, 2.0000]"));
        assert!(pair.user_text.contains("Generate one synthetic embedding"));
        assert_eq!(pair.system_text, SYSTEM_PROMPT);
    }

    #[test]
    fn vector_order_is_preserved() {
        let a = PromptContext {
            class_name: "c".into(),
            context_vectors: vec![vec![1.0f64], vec![2.0]],
            decimal_places: 2,
        };
        let b = PromptContext {
            context_vectors: vec![vec![2.0f64], vec![1.0]],
            ..a.clone()
        };
        assert_ne!(build_prompt(&a).unwrap().user_text, build_prompt(&b).unwrap().user_text);
    }

    #[test]
    fn parse_direct_and_with_prose() {
        let v: Vec<f64> = parse_generation("[0.1, -0.2, 0.3]", 3).unwrap();
        assert_eq!(v, vec![0.1, -0.2, 0.3]);
        let v: Vec<f64> = parse_generation("Here is the embedding: [0.5, 0.5]", 2).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn parse_dimension_mismatch_reports_sizes() {
        match parse_generation::<f64>("[1, 2, 3]", 2).unwrap_err() {
            Error::GenerationDimensionMismatch { expected, found } => {
                assert_eq!((expected, found), (2, 3));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn parse_rejects_prose_without_list() {
        assert!(matches!(
            parse_generation::<f64>("no numbers here", 2),
            Err(Error::NoNumericList)
        ));
    }

    #[test]
    fn parse_skips_non_numeric_brackets() {
        let v: Vec<f64> = parse_generation("[not, numbers] then [1.5, 2.5]", 2).unwrap();
        assert_eq!(v, vec![1.5, 2.5]);
    }

    #[test]
    fn parse_rejects_non_finite() {
        assert!(matches!(
            parse_generation::<f64>("[inf, 1.0]", 2),
            Err(Error::NonFiniteGeneration)
        ));
    }
}
