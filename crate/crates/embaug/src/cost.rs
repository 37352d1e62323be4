//! Token-count and pricing arithmetic comparing image-mode prompting against
//! the compact text-embedding baseline.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Prices in currency per million tokens plus the tokenization geometry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PricingTable {
    pub text_in: f64,
    pub text_out: f64,
    pub image_in: f64,
    pub image_out: f64,
    /// Pixels per input-image patch side.
    pub input_patch: u32,
    /// Pixels per output-image patch side.
    pub output_patch: u32,
    /// Text tokens of the embedding baseline (one per dimension).
    pub baseline_text_tokens: u32,
}

impl Default for PricingTable {
    fn default() -> Self {
        PricingTable {
            text_in: 1.75,
            text_out: 14.00,
            image_in: 8.00,
            image_out: 32.00,
            input_patch: 16,
            output_patch: 8,
            baseline_text_tokens: 10,
        }
    }
}

impl PricingTable {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("text_in", self.text_in),
            ("text_out", self.text_out),
            ("image_in", self.image_in),
            ("image_out", self.image_out),
        ] {
            if !(v > 0.0) {
                problems.push(format!("{name} must be > 0"));
            }
        }
        if self.input_patch < 1 {
            problems.push("input_patch must be >= 1".into());
        }
        if self.output_patch < 1 {
            problems.push("output_patch must be >= 1".into());
        }
        if self.baseline_text_tokens < 1 {
            problems.push("baseline_text_tokens must be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }
}

/// Tokens billed for a square image: ceiling division per side, squared.
pub fn image_token_count(resolution: u32, patch: u32) -> u64 {
    let per_side = resolution.div_ceil(patch) as u64;
    per_side * per_side
}

/// (input, output) cost multipliers of image-mode prompting at the given
/// resolution relative to the text-embedding baseline.
pub fn cost_ratio(resolution: u32, pricing: &PricingTable) -> Result<(f64, f64)> {
    if resolution < 1 {
        return Err(Error::InvalidParameter("resolution must be >= 1".into()));
    }
    pricing.validate()?;
    let baseline = pricing.baseline_text_tokens as f64;
    let input = image_token_count(resolution, pricing.input_patch) as f64 * pricing.image_in
        / (baseline * pricing.text_in);
    let output = image_token_count(resolution, pricing.output_patch) as f64 * pricing.image_out
        / (baseline * pricing.text_out);
    Ok((input, output))
}

/// Resolution-sweep CSV (`resolution,input_ratio,output_ratio`).
pub fn write_cost_sweep<W: Write>(
    resolutions: &[u32],
    pricing: &PricingTable,
    mut out: W,
) -> Result<()> {
    writeln!(out, "resolution,input_ratio,output_ratio")?;
    for &r in resolutions {
        let (input, output) = cost_ratio(r, pricing)?;
        writeln!(out, "{r},{input},{output}")?;
    }
    Ok(())
}
