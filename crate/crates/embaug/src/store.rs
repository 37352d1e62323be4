//! Labeled embedding datasets: JSONL persistence, stratified splitting,
//! low-shot per-class subsampling, and the synthetic Gaussian benchmark.

use crate::error::{Error, Result};
use crate::rng::{sample_without_replacement, seeded, shuffled_indices, standard_normal};
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

/// Whether a record came from the original data or a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Real,
    Synthetic,
}

/// One feature vector with its class label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEmbedding<F> {
    pub id: String,
    pub class_label: String,
    pub vector: Vec<F>,
    pub source: Source,
    pub metadata: Option<BTreeMap<String, String>>,
}

/// An ordered collection of labeled embeddings with a declared dimension
/// and class set. Immutable after construction; all mutation builds new
/// datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset<F> {
    records: Vec<LabeledEmbedding<F>>,
    dimension: usize,
    class_set: Vec<String>,
}

/// Train/validation/test split parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub validation_fraction_of_train: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test_fraction must be in (0,1), got {}",
                self.test_fraction
            )));
        }
        if !(self.validation_fraction_of_train >= 0.0 && self.validation_fraction_of_train < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation_fraction_of_train must be in [0,1), got {}",
                self.validation_fraction_of_train
            )));
        }
        Ok(())
    }
}

/// round(x) with halves going up; used for all count arithmetic.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

// JSONL wire format ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    schema: String,
    dimension: usize,
    classes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    label: String,
    vector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<BTreeMap<String, String>>,
}

impl<F: Scalar> EmbeddingDataset<F> {
    /// Build a dataset from records, inferring the class set from labels.
    pub fn from_records(records: Vec<LabeledEmbedding<F>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dimension = records[0].vector.len();
        let class_set: Vec<String> = records
            .iter()
            .map(|r| r.class_label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self::with_class_set(records, dimension, class_set)
    }

    /// Build a dataset against a declared dimension and class set
    /// (the class set may be a superset of the observed labels).
    pub fn with_class_set(
        records: Vec<LabeledEmbedding<F>>,
        dimension: usize,
        class_set: Vec<String>,
    ) -> Result<Self> {
        let classes: BTreeSet<&String> = class_set.iter().collect();
        for r in &records {
            if r.vector.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: r.vector.len(),
                });
            }
            if r.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "record {} has a non-finite vector entry",
                    r.id
                )));
            }
            if !classes.contains(&r.class_label) {
                return Err(Error::UnknownLabel {
                    id: r.id.clone(),
                    label: r.class_label.clone(),
                });
            }
        }
        Ok(EmbeddingDataset {
            records,
            dimension,
            class_set,
        })
    }

    pub fn records(&self) -> &[LabeledEmbedding<F>] {
        &self.records
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn class_set(&self) -> &[String] {
        &self.class_set
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record indices per class, in class-set order.
    pub fn per_class_indices(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = self
            .class_set
            .iter()
            .map(|c| (c.as_str(), Vec::new()))
            .collect();
        for (i, r) in self.records.iter().enumerate() {
            map.get_mut(r.class_label.as_str()).unwrap().push(i);
        }
        map
    }

    fn subset(&self, mut indices: Vec<usize>) -> EmbeddingDataset<F> {
        indices.sort_unstable();
        EmbeddingDataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            dimension: self.dimension,
            class_set: self.class_set.clone(),
        }
    }

    /// Keep only records whose metadata value under `key` equals `value`.
    pub fn filter_metadata(&self, key: &str, value: &str) -> EmbeddingDataset<F> {
        let indices = self
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                r.metadata
                    .as_ref()
                    .and_then(|m| m.get(key))
                    .map(|v| v == value)
                    .unwrap_or(false)
            })
            .map(|(i, _)| i)
            .collect();
        self.subset(indices)
    }

    /// Concatenate two datasets sharing dimension and class set.
    pub fn concat(&self, other: &EmbeddingDataset<F>) -> Result<EmbeddingDataset<F>> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: other.dimension,
            });
        }
        let mut records = self.records.clone();
        records.extend(other.records.iter().cloned());
        let mut class_set = self.class_set.clone();
        for c in &other.class_set {
            if !class_set.contains(c) {
                class_set.push(c.clone());
            }
        }
        EmbeddingDataset::with_class_set(records, self.dimension, class_set)
    }
}

/// Load a dataset from a JSONL file.
///
/// Each line is one record: `{"id", "label", "vector", "source"?, "meta"?}`.
/// An optional first line `{"schema":"embaug/v1","dimension":N,"classes":[..]}`
/// declares the dimension and class set; otherwise both are inferred.
pub fn load_dataset<F: Scalar>(path: &Path) -> Result<EmbeddingDataset<F>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut header: Option<HeaderLine> = None;
    let mut records: Vec<LabeledEmbedding<F>> = Vec::new();
    let mut dimension: Option<usize> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 1 {
            if let Ok(h) = serde_json::from_str::<HeaderLine>(&line) {
                if h.schema == "embaug/v1" {
                    dimension = Some(h.dimension);
                    header = Some(h);
                    continue;
                }
            }
        }
        let rec: RecordLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: lineno,
            message: e.to_string(),
        })?;
        let dim = *dimension.get_or_insert(rec.vector.len());
        if rec.vector.len() != dim {
            return Err(Error::LineDimensionMismatch {
                line: lineno,
                expected: dim,
                found: rec.vector.len(),
            });
        }
        if rec.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { line: lineno });
        }
        records.push(LabeledEmbedding {
            id: rec.id,
            class_label: rec.label,
            vector: rec
                .vector
                .iter()
                .map(|&v| F::from_f64(v).unwrap())
                .collect(),
            source: rec.source.unwrap_or(Source::Real),
            metadata: rec.meta,
        });
    }

    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match header {
        Some(h) => EmbeddingDataset::with_class_set(records, h.dimension, h.classes),
        None => EmbeddingDataset::from_records(records),
    }
}

/// Write a dataset as JSONL with an explicit header line. Vector entries
/// are serialized with shortest round-trip decimal text, so save followed
/// by load reproduces them bit-identically.
pub fn save_dataset<F: Scalar>(dataset: &EmbeddingDataset<F>, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|source| {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    })?);
    let header = HeaderLine {
        schema: "embaug/v1".into(),
        dimension: dataset.dimension,
        classes: dataset.class_set.clone(),
    };
    let mut write_line = |value: String| -> Result<()> {
        writeln!(out, "{value}").map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write_line(serde_json::to_string(&header)?)?;
    for r in &dataset.records {
        let line = RecordLine {
            id: r.id.clone(),
            label: r.class_label.clone(),
            vector: r.vector.iter().map(|v| v.to_f64().unwrap()).collect(),
            source: Some(r.source),
            meta: r.metadata.clone(),
        };
        write_line(serde_json::to_string(&line)?)?;
    }
    Ok(())
}

/// Stratified train/validation/test split, deterministic per seed.
///
/// Per class: test count = round_half_up(count * test_fraction), validation
/// count = round_half_up(remaining * validation_fraction_of_train), remainder
/// stays in train. Record order within each partition follows the input.
pub fn stratified_split<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    spec: &SplitSpec,
) -> Result<(
    EmbeddingDataset<F>,
    EmbeddingDataset<F>,
    EmbeddingDataset<F>,
)> {
    spec.validate()?;
    let per_class = dataset.per_class_indices();
    for (label, idx) in &per_class {
        if idx.len() < 3 {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: idx.len(),
                needed: 3,
            });
        }
    }
    let mut rng = seeded(spec.seed, &[0x5711]);
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (_, idx) in per_class {
        let perm = shuffled_indices(idx.len(), &mut rng);
        let n_test = round_half_up(idx.len() as f64 * spec.test_fraction);
        let remaining = idx.len() - n_test;
        let n_val = round_half_up(remaining as f64 * spec.validation_fraction_of_train);
        for (pos, &p) in perm.iter().enumerate() {
            let record = idx[p];
            if pos < n_test {
                test_idx.push(record);
            } else if pos < n_test + n_val {
                val_idx.push(record);
            } else {
                train_idx.push(record);
            }
        }
    }
    Ok((
        dataset.subset(train_idx),
        dataset.subset(val_idx),
        dataset.subset(test_idx),
    ))
}

/// Draw exactly `d` records per class without replacement, deterministic
/// per seed. When `d` equals the class size the full class is returned in
/// its original order.
pub fn sample_per_class<F: Scalar>(
    dataset: &EmbeddingDataset<F>,
    d: usize,
    seed: u64,
) -> Result<EmbeddingDataset<F>> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let per_class = dataset.per_class_indices();
    let mut chosen = Vec::new();
    let mut rng = seeded(seed, &[0x5a8e]);
    for (label, idx) in per_class {
        if idx.len() < d {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: idx.len(),
                needed: d,
            });
        }
        for p in sample_without_replacement(idx.len(), d, &mut rng) {
            chosen.push(idx[p]);
        }
    }
    Ok(dataset.subset(chosen))
}

/// Class-conditional Gaussian benchmark: class `c` is N(separation * e_c, I)
/// with axis index `c mod dimension`. A deterministic desk-scale stand-in
/// for CNN embeddings.
pub fn make_synthetic_benchmark<F: Scalar>(
    num_classes: usize,
    dimension: usize,
    per_class: usize,
    separation: f64,
    seed: u64,
) -> Result<EmbeddingDataset<F>> {
    if num_classes < 2 {
        return Err(Error::InvalidParameter(
            "num_classes must be >= 2".into(),
        ));
    }
    if dimension < 1 || per_class < 1 {
        return Err(Error::InvalidParameter(
            "dimension and per_class must be >= 1".into(),
        ));
    }
    if separation < 0.0 {
        return Err(Error::InvalidParameter("separation must be >= 0".into()));
    }
    let mut records = Vec::with_capacity(num_classes * per_class);
    for c in 0..num_classes {
        let label = format!("class_{c}");
        let axis = c % dimension;
        let mut rng = seeded(seed, &[0xbe7c, c as u64]);
        for i in 0..per_class {
            let mut v: Vec<F> = (0..dimension).map(|_| standard_normal(&mut rng)).collect();
            v[axis] = v[axis] + lit::<F>(separation);
            records.push(LabeledEmbedding {
                id: format!("bench-{c}-{i}"),
                class_label: label.clone(),
                vector: v,
                source: Source::Real,
                metadata: None,
            });
        }
    }
    EmbeddingDataset::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_records(n_per_class: usize, dim: usize) -> Vec<LabeledEmbedding<f64>> {
        let mut recs = Vec::new();
        for c in 0..2 {
            for i in 0..n_per_class {
                recs.push(LabeledEmbedding {
                    id: format!("r{c}-{i}"),
                    class_label: format!("c{c}"),
                    vector: vec![c as f64; dim],
                    source: Source::Real,
                    metadata: None,
                });
            }
        }
        recs
    }

    #[test]
    fn load_three_records_dim4() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for i in 0..3 {
            writeln!(
                f,
                r#"{{"id":"r{i}","label":"a","vector":[1.0,2.0,3.0,4.0]}}"#
            )
            .unwrap();
        }
        let ds: EmbeddingDataset<f64> = load_dataset(f.path()).unwrap();
        assert_eq!(ds.dimension(), 4);
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn load_reports_mismatched_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"r1","label":"a","vector":[1,2,3,4]}}"#).unwrap();
        writeln!(f, r#"{{"id":"r2","label":"a","vector":[1,2,3]}}"#).unwrap();
        let err = load_dataset::<f64>(f.path()).unwrap_err();
        match err {
            Error::LineDimensionMismatch { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_empty_file_errors() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            load_dataset::<f64>(f.path()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn load_rejects_nonfinite() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"r1","label":"a","vector":[1e999]}}"#).unwrap();
        // 1e999 fails to parse as a finite f64 in serde_json
        assert!(load_dataset::<f64>(f.path()).is_err());
    }

    #[test]
    fn header_declares_superset_class_set() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            r#"{{"schema":"embaug/v1","dimension":2,"classes":["a","b","c"]}}"#
        )
        .unwrap();
        writeln!(f, r#"{{"id":"r1","label":"a","vector":[1,2]}}"#).unwrap();
        let ds: EmbeddingDataset<f64> = load_dataset(f.path()).unwrap();
        assert_eq!(ds.class_set(), &["a", "b", "c"]);
    }

    #[test]
    fn save_load_roundtrip_bit_identical() {
        let recs = vec![LabeledEmbedding {
            id: "x".into(),
            class_label: "a".into(),
            vector: vec![0.1, -1.0 / 3.0, 2.0_f64.powi(-40)],
            source: Source::Synthetic,
            metadata: Some(BTreeMap::from([("snr_db".into(), "18".into())])),
        }];
        let ds = EmbeddingDataset::from_records(recs).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_dataset(&ds, f.path()).unwrap();
        let back: EmbeddingDataset<f64> = load_dataset(f.path()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn stratified_split_counts_match_spec_arithmetic() {
        let ds = EmbeddingDataset::from_records(tiny_records(50, 2)).unwrap();
        let spec = SplitSpec {
            test_fraction: 0.2,
            validation_fraction_of_train: 0.1,
            seed: 7,
        };
        let (train, val, test) = stratified_split(&ds, &spec).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(val.len(), 8);
        assert_eq!(train.len(), 72);
        for part in [&train, &val, &test] {
            let counts = part.per_class_indices();
            let per: Vec<usize> = counts.values().map(|v| v.len()).collect();
            assert_eq!(per[0], per[1]);
        }
    }

    #[test]
    fn stratified_split_is_deterministic() {
        let ds = EmbeddingDataset::from_records(tiny_records(50, 3)).unwrap();
        let spec = SplitSpec {
            test_fraction: 0.2,
            validation_fraction_of_train: 0.1,
            seed: 7,
        };
        let a = stratified_split(&ds, &spec).unwrap();
        let b = stratified_split(&ds, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stratified_split_partitions_input() {
        let ds = EmbeddingDataset::from_records(tiny_records(25, 2)).unwrap();
        let spec = SplitSpec {
            test_fraction: 0.2,
            validation_fraction_of_train: 0.1,
            seed: 3,
        };
        let (train, val, test) = stratified_split(&ds, &spec).unwrap();
        let mut ids: Vec<&str> = train
            .records()
            .iter()
            .chain(val.records())
            .chain(test.records())
            .map(|r| r.id.as_str())
            .collect();
        ids.sort_unstable();
        let mut expect: Vec<&str> = ds.records().iter().map(|r| r.id.as_str()).collect();
        expect.sort_unstable();
        assert_eq!(ids, expect);
    }

    #[test]
    fn stratified_split_names_small_class() {
        let mut recs = tiny_records(40, 2);
        recs.push(LabeledEmbedding {
            id: "t1".into(),
            class_label: "tiny".into(),
            vector: vec![0.0, 0.0],
            source: Source::Real,
            metadata: None,
        });
        recs.push(LabeledEmbedding {
            id: "t2".into(),
            class_label: "tiny".into(),
            vector: vec![0.0, 0.0],
            source: Source::Real,
            metadata: None,
        });
        let ds = EmbeddingDataset::from_records(recs).unwrap();
        let spec = SplitSpec {
            test_fraction: 0.2,
            validation_fraction_of_train: 0.0,
            seed: 1,
        };
        match stratified_split(&ds, &spec).unwrap_err() {
            Error::ClassTooSmall { label, count, .. } => {
                assert_eq!(label, "tiny");
                assert_eq!(count, 2);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn sample_per_class_counts_and_identity() {
        let ds = EmbeddingDataset::from_records(tiny_records(50, 2)).unwrap();
        let sampled = sample_per_class(&ds, 10, 1).unwrap();
        assert_eq!(sampled.len(), 20);
        for (_, idx) in sampled.per_class_indices() {
            assert_eq!(idx.len(), 10);
        }
        // d == class size returns everything, order stable
        let full = sample_per_class(&ds, 50, 1).unwrap();
        assert_eq!(full, ds);
        // d beyond class size errors
        assert!(sample_per_class(&ds, 51, 1).is_err());
    }

    #[test]
    fn sample_per_class_is_subset() {
        let ds = EmbeddingDataset::from_records(tiny_records(30, 2)).unwrap();
        let sampled = sample_per_class(&ds, 7, 42).unwrap();
        let all: BTreeSet<&str> = ds.records().iter().map(|r| r.id.as_str()).collect();
        assert!(sampled.records().iter().all(|r| all.contains(r.id.as_str())));
    }

    #[test]
    fn benchmark_is_deterministic() {
        let a = make_synthetic_benchmark::<f64>(3, 4, 10, 5.0, 9).unwrap();
        let b = make_synthetic_benchmark::<f64>(3, 4, 10, 5.0, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn benchmark_separation_zero_overlaps() {
        let ds = make_synthetic_benchmark::<f64>(2, 2, 200, 0.0, 1).unwrap();
        // both classes drawn from N(0, I): class means nearly coincide
        let per_class = ds.per_class_indices();
        let mut means = Vec::new();
        for (_, idx) in per_class {
            let vecs: Vec<&[f64]> = idx.iter().map(|&i| ds.records()[i].vector.as_slice()).collect();
            means.push(crate::linalg::mean_vector(&vecs));
        }
        let d = crate::linalg::norm(&crate::linalg::sub(&means[0], &means[1]));
        assert!(d < 0.5, "means too far apart for identical distributions: {d}");
    }
}
