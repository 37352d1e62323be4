//! Two-dimensional drift simulation: Gaussian / mixture class clouds scored
//! against a decision boundary frozen at the first timestep.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{seeded, standard_normal};
use crate::scalar::{lit, Scalar};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Default points per class per timestep; keeps Monte-Carlo accuracy within
/// about ±0.01 at 95% confidence.
pub const DEFAULT_DRIFT_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassSpec<F> {
    pub mean: [F; 2],
    pub covariance: [[F; 2]; 2],
}

impl<F: Scalar> GaussianClassSpec<F> {
    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        let scale = c[0][0].abs() + c[1][1].abs() + F::one();
        if (c[0][1] - c[1][0]).abs() > lit::<F>(1e-9) * scale {
            return Err(Error::InvalidCovariance("matrix is not symmetric".into()));
        }
        self.cholesky()?;
        Ok(())
    }

    fn cholesky(&self) -> Result<Matrix<F>> {
        let c = &self.covariance;
        let m = Matrix::from_rows(&[vec![c[0][0], c[0][1]], vec![c[1][0], c[1][1]]]);
        m.cholesky()
            .map_err(|_| Error::InvalidCovariance("matrix is not positive-definite".into()))
    }

    fn draw(&self, chol: &Matrix<F>, rng: &mut crate::rng::ChaCha8Rng) -> [F; 2] {
        let xi = vec![standard_normal::<F>(rng), standard_normal::<F>(rng)];
        let noise = chol.matvec(&xi);
        [self.mean[0] + noise[0], self.mean[1] + noise[1]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec<F> {
    pub components: Vec<(F, GaussianClassSpec<F>)>,
}

impl<F: Scalar> MixtureSpec<F> {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("mixture has no components".into()));
        }
        if self.components.iter().any(|(w, _)| *w <= F::zero()) {
            return Err(Error::InvalidParameter(
                "mixture weights must be positive".into(),
            ));
        }
        let sum: F = self.components.iter().map(|(w, _)| *w).sum();
        if (sum - F::one()).abs() > lit::<F>(1e-12) {
            return Err(Error::BadMixtureWeights(sum.to_f64().unwrap()));
        }
        for (_, g) in &self.components {
            g.validate()?;
        }
        Ok(())
    }
}

/// A class population at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassDistribution<F> {
    Gaussian(GaussianClassSpec<F>),
    Mixture(MixtureSpec<F>),
}

impl<F: Scalar> ClassDistribution<F> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassDistribution::Gaussian(g) => g.validate(),
            ClassDistribution::Mixture(m) => m.validate(),
        }
    }

    /// Population mean (weighted over components for mixtures).
    pub fn mean(&self) -> [F; 2] {
        match self {
            ClassDistribution::Gaussian(g) => g.mean,
            ClassDistribution::Mixture(m) => {
                let mut out = [F::zero(); 2];
                for (w, g) in &m.components {
                    out[0] = out[0] + *w * g.mean[0];
                    out[1] = out[1] + *w * g.mean[1];
                }
                out
            }
        }
    }
}

/// Line separating the two designated classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionBoundary<F> {
    Sloped { m: F, c: F },
    Vertical { x0: F },
}

/// Which half-plane a class is expected to occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Negative,
    Positive,
}

/// Signed offset of a point from the boundary: `y - (m x + c)` for the
/// sloped case, `x - x0` for the vertical one.
pub fn signed_offset<F: Scalar>(b: &DecisionBoundary<F>, p: &[F; 2]) -> F {
    match *b {
        DecisionBoundary::Sloped { m, c } => p[1] - (m * p[0] + c),
        DecisionBoundary::Vertical { x0 } => p[0] - x0,
    }
}

/// The boundary perpendicular to `mu_b - mu_a` through the midpoint:
/// slope m = -Vx/Vy and intercept c = My - m*Mx, degenerating to a vertical
/// line at Mx when the means differ only in x.
pub fn fixed_boundary<F: Scalar>(mu_a: &[F; 2], mu_b: &[F; 2]) -> Result<DecisionBoundary<F>> {
    let v = [mu_b[0] - mu_a[0], mu_b[1] - mu_a[1]];
    let mid = [
        (mu_a[0] + mu_b[0]) / lit::<F>(2.0),
        (mu_a[1] + mu_b[1]) / lit::<F>(2.0),
    ];
    let scale = v[0].abs() + v[1].abs();
    if scale == F::zero() {
        return Err(Error::CoincidentMeans);
    }
    if v[1].abs() <= lit::<F>(1e-12) * scale {
        return Ok(DecisionBoundary::Vertical { x0: mid[0] });
    }
    let m = -v[0] / v[1];
    let c = mid[1] - m * mid[0];
    Ok(DecisionBoundary::Sloped { m, c })
}

/// Draw `n` points from a class distribution; deterministic given the seed.
pub fn sample_class<F: Scalar>(
    dist: &ClassDistribution<F>,
    n: usize,
    seed: u64,
) -> Result<Vec<[F; 2]>> {
    sample_class_with(dist, n, &mut seeded(seed, &[0xd21f]))
}

fn sample_class_with<F: Scalar>(
    dist: &ClassDistribution<F>,
    n: usize,
    rng: &mut crate::rng::ChaCha8Rng,
) -> Result<Vec<[F; 2]>> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    dist.validate()?;
    match dist {
        ClassDistribution::Gaussian(g) => {
            let chol = g.cholesky()?;
            Ok((0..n).map(|_| g.draw(&chol, rng)).collect())
        }
        ClassDistribution::Mixture(m) => {
            let chols: Vec<Matrix<F>> = m
                .components
                .iter()
                .map(|(_, g)| g.cholesky())
                .collect::<Result<_>>()?;
            let weights: Vec<f64> = m
                .components
                .iter()
                .map(|(w, _)| w.to_f64().unwrap())
                .collect();
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = m.components.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                out.push(m.components[pick].1.draw(&chols[pick], rng));
            }
            Ok(out)
        }
    }
}

/// Fraction of points lying strictly on their assigned side; points exactly
/// on the boundary count as misclassified.
pub fn boundary_accuracy<F: Scalar>(
    points: &[([F; 2], Side)],
    b: &DecisionBoundary<F>,
) -> Result<F> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let correct = points
        .iter()
        .filter(|(p, side)| {
            let s = signed_offset(b, p);
            match side {
                Side::Positive => s > F::zero(),
                Side::Negative => s < F::zero(),
            }
        })
        .count();
    Ok(lit::<F>(correct as f64 / points.len() as f64))
}

/// One class track: a name plus its distribution at each timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioClass<F> {
    pub name: String,
    pub timesteps: Vec<ClassDistribution<F>>,
}

/// A drift scenario: the boundary is computed once from the first-timestep
/// means of the two designated classes and then held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftScenario<F> {
    pub classes: Vec<ScenarioClass<F>>,
    pub boundary_classes: [String; 2],
}

impl<F: Scalar> DriftScenario<F> {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidParameter("scenario has no classes".into()));
        }
        let steps = self.classes[0].timesteps.len();
        if steps < 2 {
            return Err(Error::InvalidParameter(
                "scenario needs at least 2 timesteps".into(),
            ));
        }
        for c in &self.classes {
            if c.timesteps.len() != steps {
                return Err(Error::InvalidParameter(format!(
                    "class {:?} has {} timesteps, expected {steps}",
                    c.name,
                    c.timesteps.len()
                )));
            }
            for d in &c.timesteps {
                d.validate()?;
            }
        }
        for name in &self.boundary_classes {
            if !self.classes.iter().any(|c| &c.name == name) {
                return Err(Error::InvalidParameter(format!(
                    "boundary class {name:?} is not in the scenario"
                )));
            }
        }
        Ok(())
    }

    fn class(&self, name: &str) -> &ScenarioClass<F> {
        self.classes.iter().find(|c| c.name == name).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimestepAccuracy<F> {
    pub overall: F,
    pub per_class: BTreeMap<String, F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRun<F> {
    pub boundary: DecisionBoundary<F>,
    pub sides: BTreeMap<String, Side>,
    pub timesteps: Vec<TimestepAccuracy<F>>,
    /// Sampled clouds per timestep, per class, for external plotting.
    pub points: Vec<BTreeMap<String, Vec<[F; 2]>>>,
}

/// Sample every timestep, score against the fixed boundary, and return the
/// accuracy sequence. Each (timestep, class) pair samples from an
/// independent stream derived from the scenario seed.
pub fn run_drift_scenario<F: Scalar>(
    scenario: &DriftScenario<F>,
    n_per_class: usize,
    seed: u64,
) -> Result<DriftRun<F>> {
    scenario.validate()?;
    let mu_a = scenario.class(&scenario.boundary_classes[0]).timesteps[0].mean();
    let mu_b = scenario.class(&scenario.boundary_classes[1]).timesteps[0].mean();
    let boundary = fixed_boundary(&mu_a, &mu_b)?;

    // each class is assigned the side its first-timestep mean falls on
    let mut sides = BTreeMap::new();
    for c in &scenario.classes {
        let s = signed_offset(&boundary, &c.timesteps[0].mean());
        if s == F::zero() {
            return Err(Error::InvalidParameter(format!(
                "class {:?} starts on the boundary; no side assignable",
                c.name
            )));
        }
        sides.insert(
            c.name.clone(),
            if s > F::zero() {
                Side::Positive
            } else {
                Side::Negative
            },
        );
    }

    let steps = scenario.classes[0].timesteps.len();
    let mut timesteps = Vec::with_capacity(steps);
    let mut points = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut per_class = BTreeMap::new();
        let mut clouds = BTreeMap::new();
        let mut all: Vec<([F; 2], Side)> = Vec::with_capacity(scenario.classes.len() * n_per_class);
        for (ci, c) in scenario.classes.iter().enumerate() {
            let mut rng = seeded(seed, &[0xd21f, t as u64, ci as u64]);
            let cloud = sample_class_with(&c.timesteps[t], n_per_class, &mut rng)?;
            let side = sides[&c.name];
            let labeled: Vec<([F; 2], Side)> = cloud.iter().map(|&p| (p, side)).collect();
            per_class.insert(c.name.clone(), boundary_accuracy(&labeled, &boundary)?);
            all.extend(labeled);
            clouds.insert(c.name.clone(), cloud);
        }
        timesteps.push(TimestepAccuracy {
            overall: boundary_accuracy(&all, &boundary)?,
            per_class,
        });
        points.push(clouds);
    }
    Ok(DriftRun {
        boundary,
        sides,
        timesteps,
        points,
    })
}

// scenario file format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GaussianFile {
    mean: [f64; 2],
    covariance: [[f64; 2]; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DistributionFile {
    Gaussian(GaussianFile),
    Mixture { components: Vec<ComponentFile> },
}

#[derive(Serialize, Deserialize)]
struct ComponentFile {
    weight: f64,
    #[serde(flatten)]
    gaussian: GaussianFile,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    classes: Vec<ScenarioClassFile>,
    boundary_classes: [String; 2],
}

#[derive(Serialize, Deserialize)]
struct ScenarioClassFile {
    name: String,
    timesteps: Vec<DistributionFile>,
}

fn convert_gaussian<F: Scalar>(g: &GaussianFile) -> GaussianClassSpec<F> {
    GaussianClassSpec {
        mean: [lit(g.mean[0]), lit(g.mean[1])],
        covariance: [
            [lit(g.covariance[0][0]), lit(g.covariance[0][1])],
            [lit(g.covariance[1][0]), lit(g.covariance[1][1])],
        ],
    }
}

fn convert_scenario<F: Scalar>(file: ScenarioFile) -> DriftScenario<F> {
    DriftScenario {
        classes: file
            .classes
            .into_iter()
            .map(|c| ScenarioClass {
                name: c.name,
                timesteps: c
                    .timesteps
                    .iter()
                    .map(|d| match d {
                        DistributionFile::Gaussian(g) => {
                            ClassDistribution::Gaussian(convert_gaussian(g))
                        }
                        DistributionFile::Mixture { components } => {
                            ClassDistribution::Mixture(MixtureSpec {
                                components: components
                                    .iter()
                                    .map(|cf| (lit(cf.weight), convert_gaussian(&cf.gaussian)))
                                    .collect(),
                            })
                        }
                    })
                    .collect(),
            })
            .collect(),
        boundary_classes: file.boundary_classes,
    }
}

/// Parse a scenario definition (JSON) and validate it.
pub fn parse_scenario<F: Scalar>(text: &str) -> Result<DriftScenario<F>> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let scenario = convert_scenario(file);
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario<F: Scalar>(path: &Path) -> Result<DriftScenario<F>> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Bundled scenario: both class means translate by (+1, +1) per step under
/// the boundary frozen at the first timestep, so overall accuracy falls
/// strictly at every step.
pub fn builtin_model_drift<F: Scalar>() -> DriftScenario<F> {
    parse_scenario(include_str!("../scenarios/model_drift.json"))
        .expect("bundled scenario is valid")
}

/// Bundled scenario: one class bifurcates into an equal-weight mixture whose
/// new mode sits well across the boundary, pinning that class's accuracy
/// near one half at the final timestep.
pub fn builtin_concept_drift<F: Scalar>() -> DriftScenario<F> {
    parse_scenario(include_str!("../scenarios/concept_drift.json"))
        .expect("bundled scenario is valid")
}
