//! Linear Discriminant Analysis projection from the raw embedding space
//! (alpha dimensions) to the discriminant space (beta = classes - 1).

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{lit, Scalar};
use crate::store::{EmbeddingDataset, LabeledEmbedding};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Fitted LDA transform. `w` holds the projection directions as columns
/// (alpha x beta); immutable after fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel<F> {
    pub w: Matrix<F>,
    pub alpha: usize,
    pub beta: usize,
    pub class_order: Vec<String>,
    pub class_means_projected: BTreeMap<String, Vec<F>>,
    pub regularization_epsilon: F,
    /// Generalized eigenvalues of the retained directions, descending.
    pub eigenvalues: Vec<F>,
    /// False when the matching eigenvalue fell below tolerance, i.e. the
    /// direction carries no between-class signal (degenerate data).
    pub discriminative: Vec<bool>,
}

const EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// Fit LDA on a labeled dataset.
///
/// The generalized problem `S_b w = lambda S_w w` is reduced to a standard
/// symmetric eigenproblem through the Cholesky factor of the shrinkage-
/// regularized within-class scatter (`epsilon = 1e-3 * trace(S_w)/alpha`),
/// which keeps the solver defined in low-shot regimes where `S_w` is
/// singular. Eigenvalues are sorted descending with ties broken by
/// lexicographic comparison of eigenvector entries, and each column is
/// unit-normalized with its largest-magnitude entry made non-negative, so
/// refitting identical inputs is bit-identical.
pub fn fit_lda<F: Scalar>(train: &EmbeddingDataset<F>) -> Result<ProjectionModel<F>> {
    let classes = train.class_set().to_vec();
    let c = classes.len();
    if c < 2 {
        return Err(Error::TooFewClasses(c));
    }
    let alpha = train.dimension();
    if alpha <= c - 1 {
        return Err(Error::InvalidParameter(format!(
            "dataset dimension {alpha} must exceed classes-1 = {}",
            c - 1
        )));
    }
    let per_class = train.per_class_indices();
    for (label, idx) in &per_class {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: idx.len(),
                needed: 2,
            });
        }
    }

    // scatter matrices
    let all_vecs: Vec<&[F]> = train.records().iter().map(|r| r.vector.as_slice()).collect();
    let grand_mean = linalg::mean_vector(&all_vecs);
    let mut s_w: Matrix<F> = Matrix::zeros(alpha, alpha);
    let mut s_b: Matrix<F> = Matrix::zeros(alpha, alpha);
    let mut class_means: BTreeMap<String, Vec<F>> = BTreeMap::new();
    for (label, idx) in &per_class {
        let vecs: Vec<&[F]> = idx
            .iter()
            .map(|&i| train.records()[i].vector.as_slice())
            .collect();
        let mu = linalg::mean_vector(&vecs);
        for v in &vecs {
            s_w.add_outer(&linalg::sub(v, &mu), F::one());
        }
        s_b.add_outer(
            &linalg::sub(&mu, &grand_mean),
            lit::<F>(idx.len() as f64),
        );
        class_means.insert(label.to_string(), mu);
    }

    let mut epsilon = lit::<F>(1e-3) * s_w.trace() / lit::<F>(alpha as f64);
    if epsilon <= F::zero() {
        // all within-class variation is zero; any small ridge works
        epsilon = lit::<F>(1e-9);
    }
    s_w.add_scaled_identity(epsilon);

    let l = s_w
        .cholesky()
        .map_err(|e| Error::Numerical(format!("within-class scatter factorization: {e}")))?;

    // M = L^-1 S_b L^-T, symmetric
    let beta = c - 1;
    let mut x = Matrix::zeros(alpha, alpha);
    for j in 0..alpha {
        x.set_column(j, &l.forward_solve(&s_b.column(j)));
    }
    let xt = x.transpose();
    let mut m = Matrix::zeros(alpha, alpha);
    for j in 0..alpha {
        m.set_column(j, &l.forward_solve(&xt.column(j)));
    }
    let mt = m.transpose();
    for i in 0..alpha {
        for j in 0..alpha {
            m[(i, j)] = (m[(i, j)] + mt[(i, j)]) / lit::<F>(2.0);
        }
    }

    let (vals, vecs) = m.jacobi_eigen()?;
    let mut order: Vec<usize> = (0..alpha).collect();
    order.sort_by(|&a, &b| {
        vals[b]
            .partial_cmp(&vals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let ca = vecs.column(a);
                let cb = vecs.column(b);
                ca.iter()
                    .zip(&cb)
                    .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });

    let mut w = Matrix::zeros(alpha, beta);
    let mut eigenvalues = Vec::with_capacity(beta);
    let mut discriminative = Vec::with_capacity(beta);
    let scatter_scale = vals
        .iter()
        .fold(F::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc });
    for (k, &idx) in order.iter().take(beta).enumerate() {
        // map back: w = L^-T u
        let mut col = l.back_solve_transposed(&vecs.column(idx));
        let n = linalg::norm(&col);
        if n > F::zero() {
            for v in &mut col {
                *v = *v / n;
            }
        }
        // sign convention: largest-magnitude entry non-negative
        let mut max_i = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[max_i].abs() {
                max_i = i;
            }
        }
        if col[max_i] < F::zero() {
            for v in &mut col {
                *v = -*v;
            }
        }
        w.set_column(k, &col);
        eigenvalues.push(vals[idx]);
        let tol = lit::<F>(EIGENVALUE_TOLERANCE) * (scatter_scale + F::one());
        discriminative.push(vals[idx] > tol);
    }

    let class_means_projected = class_means
        .into_iter()
        .map(|(label, mu)| (label, w.transpose_matvec(&mu)))
        .collect();

    Ok(ProjectionModel {
        w,
        alpha,
        beta,
        class_order: classes,
        class_means_projected,
        regularization_epsilon: epsilon,
        eigenvalues,
        discriminative,
    })
}

/// `W^T v`.
pub fn project<F: Scalar>(model: &ProjectionModel<F>, v: &[F]) -> Result<Vec<F>> {
    if v.len() != model.alpha {
        return Err(Error::DimensionMismatch {
            expected: model.alpha,
            found: v.len(),
        });
    }
    Ok(model.w.transpose_matvec(v))
}

/// Project every record; ids, labels, source, and metadata carry over.
pub fn project_dataset<F: Scalar>(
    model: &ProjectionModel<F>,
    dataset: &EmbeddingDataset<F>,
) -> Result<EmbeddingDataset<F>> {
    if dataset.dimension() != model.alpha {
        return Err(Error::DimensionMismatch {
            expected: model.alpha,
            found: dataset.dimension(),
        });
    }
    let records = dataset
        .records()
        .iter()
        .map(|r| {
            Ok(LabeledEmbedding {
                id: r.id.clone(),
                class_label: r.class_label.clone(),
                vector: project(model, &r.vector)?,
                source: r.source,
                metadata: r.metadata.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EmbeddingDataset::with_class_set(records, model.beta, dataset.class_set().to_vec())
}

// persistence ---------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alpha: usize,
    beta: usize,
    epsilon: f64,
    classes: Vec<String>,
    /// W in row-major order.
    w: Vec<f64>,
    eigenvalues: Vec<f64>,
    discriminative: Vec<bool>,
    class_means_projected: BTreeMap<String, Vec<f64>>,
}

pub fn save_projection<F: Scalar>(model: &ProjectionModel<F>, path: &Path) -> Result<()> {
    let file = ModelFile {
        alpha: model.alpha,
        beta: model.beta,
        epsilon: model.regularization_epsilon.to_f64().unwrap(),
        classes: model.class_order.clone(),
        w: model.w.data().iter().map(|v| v.to_f64().unwrap()).collect(),
        eigenvalues: model.eigenvalues.iter().map(|v| v.to_f64().unwrap()).collect(),
        discriminative: model.discriminative.clone(),
        class_means_projected: model
            .class_means_projected
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().map(|x| x.to_f64().unwrap()).collect()))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_projection<F: Scalar>(path: &Path) -> Result<ProjectionModel<F>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ModelFile = serde_json::from_str(&text)?;
    let conv = |v: &[f64]| -> Vec<F> { v.iter().map(|&x| F::from_f64(x).unwrap()).collect() };
    Ok(ProjectionModel {
        w: Matrix::from_data(file.alpha, file.beta, conv(&file.w)),
        alpha: file.alpha,
        beta: file.beta,
        class_order: file.classes,
        class_means_projected: file
            .class_means_projected
            .iter()
            .map(|(k, v)| (k.clone(), conv(v)))
            .collect(),
        regularization_epsilon: F::from_f64(file.epsilon).unwrap(),
        eigenvalues: conv(&file.eigenvalues),
        discriminative: file.discriminative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{make_synthetic_benchmark, LabeledEmbedding, Source};
    use approx::assert_abs_diff_eq;

    fn two_gaussians(
        mu_a: &[f64],
        mu_b: &[f64],
        n: usize,
        seed: u64,
    ) -> EmbeddingDataset<f64> {
        let mut rng = crate::rng::seeded(seed, &[]);
        let dim = mu_a.len();
        let mut records = Vec::new();
        for (label, mu) in [("a", mu_a), ("b", mu_b)] {
            for i in 0..n {
                let v: Vec<f64> = (0..dim)
                    .map(|j| mu[j] + crate::rng::standard_normal::<f64>(&mut rng))
                    .collect();
                records.push(LabeledEmbedding {
                    id: format!("{label}{i}"),
                    class_label: label.to_string(),
                    vector: v,
                    source: Source::Real,
                    metadata: None,
                });
            }
        }
        EmbeddingDataset::from_records(records).unwrap()
    }

    /// Fisher ratio of direction `w` computed straight from the data,
    /// independent of the fitted model.
    pub(crate) fn fisher_ratio(ds: &EmbeddingDataset<f64>, w: &[f64]) -> f64 {
        let per_class = ds.per_class_indices();
        let all: Vec<&[f64]> = ds.records().iter().map(|r| r.vector.as_slice()).collect();
        let grand = linalg::mean_vector(&all);
        let mut between = 0.0;
        let mut within = 0.0;
        for (_, idx) in per_class {
            let vecs: Vec<&[f64]> = idx.iter().map(|&i| ds.records()[i].vector.as_slice()).collect();
            let mu = linalg::mean_vector(&vecs);
            let proj_mu = linalg::dot(&linalg::sub(&mu, &grand), w);
            between += idx.len() as f64 * proj_mu * proj_mu;
            for v in vecs {
                let d = linalg::dot(&linalg::sub(v, &mu), w);
                within += d * d;
            }
        }
        between / (within + 1e-12)
    }

    #[test]
    fn beta_is_classes_minus_one() {
        for c in 2..=11 {
            let ds = make_synthetic_benchmark::<f64>(c, 16, 5, 4.0, 3).unwrap();
            let model = fit_lda(&ds).unwrap();
            assert_eq!(model.beta, c - 1);
            assert!(model.beta < model.alpha);
        }
    }

    #[test]
    fn fitted_direction_matches_known_geometry() {
        // means (0,0) and (10,10), isotropic unit covariance: the
        // discriminant direction is (1,1)/sqrt(2) up to 2 degrees
        let ds = two_gaussians(&[0.0, 0.0], &[10.0, 10.0], 2000, 42);
        let model = fit_lda(&ds).unwrap();
        let w = model.w.column(0);
        let target = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        let cos = linalg::dot(&w, &target).abs();
        let angle_deg = cos.min(1.0).acos().to_degrees();
        assert!(angle_deg < 2.0, "direction off by {angle_deg} degrees");
    }

    #[test]
    fn brute_force_fisher_ratio_oracle() {
        let ds = two_gaussians(&[0.0, 0.0], &[3.0, -1.0], 60, 7);
        let model = fit_lda(&ds).unwrap();
        let fitted = fisher_ratio(&ds, &model.w.column(0));
        let mut best = 0.0f64;
        for i in 0..3600 {
            let theta = i as f64 * std::f64::consts::PI / 3600.0;
            let r = fisher_ratio(&ds, &[theta.cos(), theta.sin()]);
            if r > best {
                best = r;
            }
        }
        assert!(
            fitted >= (1.0 - 1e-3) * best,
            "fitted {fitted} < brute-force {best}"
        );
    }

    #[test]
    fn degenerate_identical_classes_flagged() {
        // same samples relabeled: between-class scatter ~ 0
        let mut rng = crate::rng::seeded(5, &[]);
        let base: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| crate::rng::standard_normal::<f64>(&mut rng)).collect())
            .collect();
        let mut records = Vec::new();
        for (label, offset) in [("a", 0), ("b", 0)] {
            for (i, v) in base.iter().enumerate() {
                records.push(LabeledEmbedding {
                    id: format!("{label}{}", i + offset),
                    class_label: label.to_string(),
                    vector: v.clone(),
                    source: Source::Real,
                    metadata: None,
                });
            }
        }
        let ds = EmbeddingDataset::from_records(records).unwrap();
        let model = fit_lda(&ds).unwrap();
        assert!(model.w.column(0).iter().all(|v| v.is_finite()));
        assert!(!model.discriminative[0]);
    }

    #[test]
    fn fit_is_deterministic() {
        let ds = make_synthetic_benchmark::<f64>(4, 8, 12, 3.0, 11).unwrap();
        let a = fit_lda(&ds).unwrap();
        let b = fit_lda(&ds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn project_is_linear_and_checks_dims() {
        let ds = make_synthetic_benchmark::<f64>(3, 6, 10, 4.0, 2).unwrap();
        let model = fit_lda(&ds).unwrap();
        let mut rng = crate::rng::seeded(1, &[]);
        let u: Vec<f64> = (0..6).map(|_| crate::rng::standard_normal(&mut rng)).collect();
        let v: Vec<f64> = (0..6).map(|_| crate::rng::standard_normal(&mut rng)).collect();
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let pu = project(&model, &u).unwrap();
        let pv = project(&model, &v).unwrap();
        let psum = project(&model, &sum).unwrap();
        for i in 0..model.beta {
            assert_abs_diff_eq!(psum[i], pu[i] + pv[i], epsilon = 1e-12);
        }
        let zero = project(&model, &vec![0.0; 6]).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        assert!(project(&model, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn axis_projection_example() {
        // W = e1 as a single 3D column
        let model = ProjectionModel {
            w: Matrix::from_data(3, 1, vec![1.0, 0.0, 0.0]),
            alpha: 3,
            beta: 1,
            class_order: vec!["a".into(), "b".into()],
            class_means_projected: BTreeMap::new(),
            regularization_epsilon: 0.0,
            eigenvalues: vec![1.0],
            discriminative: vec![true],
        };
        assert_eq!(project(&model, &[5.0, 7.0, 9.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn projected_class_means_equal_projection_of_means() {
        let ds = make_synthetic_benchmark::<f64>(3, 8, 15, 5.0, 4).unwrap();
        let model = fit_lda(&ds).unwrap();
        let projected = project_dataset(&model, &ds).unwrap();
        assert_eq!(projected.len(), ds.len());
        assert_eq!(projected.dimension(), model.beta);
        for (label, idx) in projected.per_class_indices() {
            let vecs: Vec<&[f64]> = idx
                .iter()
                .map(|&i| projected.records()[i].vector.as_slice())
                .collect();
            let mean_of_proj = linalg::mean_vector(&vecs);
            let proj_of_mean = &model.class_means_projected[label];
            for i in 0..model.beta {
                assert_abs_diff_eq!(mean_of_proj[i], proj_of_mean[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn projection_beats_random_directions_on_benchmark() {
        let mut wins = 0;
        for seed in 0..100u64 {
            let ds = two_gaussians(&[0.0, 0.0, 0.0], &[2.0, 1.0, 0.0], 30, seed);
            let model = fit_lda(&ds).unwrap();
            let fitted = fisher_ratio(&ds, &model.w.column(0));
            let mut rng = crate::rng::seeded(seed, &[999]);
            let mut dir: Vec<f64> = (0..3).map(|_| crate::rng::standard_normal(&mut rng)).collect();
            let n = linalg::norm(&dir);
            dir.iter_mut().for_each(|x| *x /= n);
            if fitted >= fisher_ratio(&ds, &dir) {
                wins += 1;
            }
        }
        assert!(wins >= 95, "fitted direction won only {wins}/100 trials");
    }

    #[test]
    fn persistence_roundtrip() {
        let ds = make_synthetic_benchmark::<f64>(3, 6, 10, 4.0, 8).unwrap();
        let model = fit_lda(&ds).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_projection(&model, f.path()).unwrap();
        let back: ProjectionModel<f64> = load_projection(f.path()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn rejects_single_class_and_tiny_classes() {
        let records: Vec<LabeledEmbedding<f64>> = (0..4)
            .map(|i| LabeledEmbedding {
                id: format!("r{i}"),
                class_label: "only".into(),
                vector: vec![i as f64, 0.0, 1.0],
                source: Source::Real,
                metadata: None,
            })
            .collect();
        let ds = EmbeddingDataset::from_records(records).unwrap();
        assert!(matches!(fit_lda(&ds), Err(Error::TooFewClasses(1))));
    }
}
