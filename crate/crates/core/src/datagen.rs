//! Synthetic benchmark generator.
//!
//! Individuals are test particles in a spherical logarithmic potential
//! `Φ(r) = ln r`. Covariates are Cartesian position and velocity
//! `(p, v) ∈ R^6`; features are the orbit invariants
//! `(E, L, L_z) = (½|v|² + ln|p|, |p × v|, (p × v)_z)`, which stay constant
//! along every orbit. Members of a cluster share an orbit family. The first
//! position component carries a large observational uncertainty, the rest a
//! small one; uncertainty sets are `±2σ` boxes around noisy observations.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dist, Matrix};
use crate::rng::{derive_seed, seeded, Rng};
use crate::types::{CovariateUncertaintyModel, Dataset, EmpiricalFeatureSet};
use crate::uncertainty::{build_empirical_set_with_covariates, PenaltyRule, QuadraticPenalty, Transform};

pub const COVARIATE_DIM: usize = 6;
pub const FEATURE_DIM: usize = 3;

const SINGULAR_RADIUS: f64 = 1e-12;
const MAX_RESAMPLES: u64 = 100;
const MAX_CENTROID_DRAWS: usize = 100_000;

/// `(E, L, L_z)` of a particle at position `p = z[0..3]` with velocity `v = z[3..6]`.
pub fn toy_transform(z: &[f64]) -> Result<[f64; 3]> {
    let (p, v) = (&z[0..3], &z[3..6]);
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r <= SINGULAR_RADIUS {
        return Err(Error::SingularInput { norm: r });
    }
    let l = [
        p[1] * v[2] - p[2] * v[1],
        p[2] * v[0] - p[0] * v[2],
        p[0] * v[1] - p[1] * v[0],
    ];
    let energy = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) + r.ln();
    let l_norm = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
    Ok([energy, l_norm, l[2]])
}

/// [`toy_transform`] as a [`Transform`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyTransform;

impl Transform for ToyTransform {
    fn input_dim(&self) -> usize {
        COVARIATE_DIM
    }

    fn output_dim(&self) -> usize {
        FEATURE_DIM
    }

    fn name(&self) -> &str {
        "log-potential-invariants"
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        toy_transform(z).map(|x| x.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSizes {
    /// `n_k = 1 + ((k - 1) mod 10)`.
    Cyclic,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub k_star: usize,
    pub cluster_sizes: ClusterSizes,
    /// Standard deviation of true covariates around their cluster centroid.
    pub cluster_spread: f64,
    /// Relative uncertainty of the first position component.
    pub sigma_major: f64,
    /// Uncertainty of the remaining five covariates.
    pub sigma_minor: f64,
    /// Candidates per individual.
    pub m: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            k_star: 50,
            cluster_sizes: ClusterSizes::Cyclic,
            cluster_spread: 0.02,
            sigma_major: 0.1,
            sigma_minor: 1e-3,
            m: 101,
            seed: 1,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        match &self.cluster_sizes {
            ClusterSizes::Cyclic => (1..=self.k_star).map(|k| 1 + (k - 1) % 10).collect(),
            ClusterSizes::Explicit(v) => v.clone(),
        }
    }

    pub fn num_individuals(&self) -> usize {
        self.sizes().iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.k_star == 0 {
            return bad("K* must be >= 1");
        }
        if let ClusterSizes::Explicit(v) = &self.cluster_sizes {
            if v.len() != self.k_star || v.contains(&0) {
                return bad("explicit cluster sizes must list K* positive sizes");
            }
        }
        if !(self.cluster_spread > 0.0 && self.sigma_major > 0.0 && self.sigma_minor > 0.0) {
            return bad("spreads and uncertainties must be > 0");
        }
        if self.m == 0 {
            return bad("m must be >= 1");
        }
        Ok(())
    }
}

/// Everything the generator drew, for inspection and tests.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: Dataset,
    /// `K* × 6` cluster centroids.
    pub centroids: Matrix,
    /// `n × 6` true covariates `ζ*_i`.
    pub true_covariates: Matrix,
    pub models: Vec<CovariateUncertaintyModel>,
    /// Per individual, the `m × 6` sampled covariates behind the candidates.
    pub covariates: Vec<Matrix>,
}

pub fn generate_dataset(cfg: &GenConfig) -> Result<Dataset> {
    generate_detailed(cfg).map(|g| g.dataset)
}

pub fn generate_detailed(cfg: &GenConfig) -> Result<GeneratedData> {
    cfg.validate()?;
    let sizes = cfg.sizes();
    let mut rng = seeded(cfg.seed);
    let centroids = draw_centroids(cfg, &mut rng)?;

    let spread = Normal::new(0.0, cfg.cluster_spread).expect("spread > 0");
    let n = sizes.iter().sum();
    let mut true_covariates = Matrix::zeros(0, COVARIATE_DIM);
    let mut true_labels = Vec::with_capacity(n);
    for (k, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let z: Vec<f64> = centroids
                .row(k)
                .iter()
                .map(|c| c + spread.sample(&mut rng))
                .collect();
            true_covariates.push_row(&z);
            true_labels.push(k + 1);
        }
    }

    let mut models = Vec::with_capacity(n);
    for z_true in true_covariates.rows() {
        let sigma = uncertainty_scales(z_true, cfg);
        let observed: Vec<f64> = z_true
            .iter()
            .zip(&sigma)
            .map(|(z, s)| {
                let g: f64 = StandardNormal.sample(&mut rng);
                z + s * g
            })
            .collect();
        let half_widths = sigma.iter().map(|s| 2.0 * s).collect();
        models.push(CovariateUncertaintyModel::new_box(observed, half_widths)?);
    }

    let pen = QuadraticPenalty { component: 0 };
    let mut sets = Vec::with_capacity(n);
    let mut covariates = Vec::with_capacity(n);
    for (i, model) in models.iter().enumerate() {
        let (set, cov) = build_individual(model, &pen, cfg, i)?;
        sets.push(set);
        covariates.push(cov);
    }

    let mut dataset = Dataset::new(sets, Some(true_labels))?;
    dataset.seed = Some(cfg.seed);
    Ok(GeneratedData {
        dataset,
        centroids,
        true_covariates,
        models,
        covariates,
    })
}

/// `σ_1 = a·|ζ*_1| + 0.1·a` with `a = sigma_major`; `σ_l = sigma_minor` otherwise.
pub fn uncertainty_scales(z_true: &[f64], cfg: &GenConfig) -> Vec<f64> {
    let mut s = vec![cfg.sigma_minor; COVARIATE_DIM];
    s[0] = cfg.sigma_major * z_true[0].abs() + cfg.sigma_major * 0.1;
    s
}

fn build_individual(
    model: &CovariateUncertaintyModel,
    pen: &dyn PenaltyRule,
    cfg: &GenConfig,
    i: usize,
) -> Result<(EmpiricalFeatureSet, Matrix)> {
    let base = derive_seed(cfg.seed, i as u64);
    let mut last_err = None;
    for attempt in 0..MAX_RESAMPLES {
        let seed = derive_seed(base, attempt);
        match build_empirical_set_with_covariates(model, &ToyTransform, pen, cfg.m, seed, i + 1) {
            Ok(built) => {
                debug_assert!(built.covariates.rows().all(|z| model.contains(z)));
                return Ok((built.set, built.covariates));
            }
            Err(e @ Error::SingularInput { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Centroids: positions uniform (by volume) in the shell `1 <= |p| <= 3`,
/// isotropic velocities with speed in `[0.5, 1.5]`, redrawn until every pair
/// of centroid features is more than `5 × cluster_spread` apart.
fn draw_centroids(cfg: &GenConfig, rng: &mut Rng) -> Result<Matrix> {
    let min_sep = 5.0 * cfg.cluster_spread;
    let mut centroids = Matrix::zeros(0, COVARIATE_DIM);
    let mut features: Vec<[f64; 3]> = Vec::with_capacity(cfg.k_star);
    let mut draws = 0;
    while centroids.nrows() < cfg.k_star {
        draws += 1;
        if draws > MAX_CENTROID_DRAWS {
            return Err(Error::InvalidConfig(format!(
                "could not place {} separated centroids",
                cfg.k_star
            )));
        }
        let radius = rng.random_range(1.0f64..=27.0).cbrt();
        let speed = rng.random_range(0.5..=1.5);
        let p = unit_vector(rng).map(|u| u * radius);
        let v = unit_vector(rng).map(|u| u * speed);
        let z = [p[0], p[1], p[2], v[0], v[1], v[2]];
        let x = toy_transform(&z)?;
        if features.iter().all(|f| dist(f, &x) > min_sep) {
            features.push(x);
            centroids.push_row(&z);
        }
    }
    Ok(centroids)
}

fn unit_vector(rng: &mut Rng) -> [f64; 3] {
    loop {
        let g: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if norm > 1e-9 {
            return g.map(|v| v / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_transform_examples() {
        assert_eq!(toy_transform(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap(), [0.5, 1.0, 1.0]);
        assert_eq!(toy_transform(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), [0.0, 0.0, 0.0]);
        assert!(matches!(
            toy_transform(&[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]),
            Err(Error::SingularInput { .. })
        ));
    }

    #[test]
    fn default_sizes() {
        let cfg = GenConfig::default();
        assert_eq!(cfg.num_individuals(), 275);
        let sizes = cfg.sizes();
        for s in 1..=10 {
            assert_eq!(sizes.iter().filter(|&&v| v == s).count(), 5);
        }
        assert_eq!(sizes[0], 1);
        assert_eq!(sizes[10], 1);
        assert_eq!(sizes[9], 10);
    }

    #[test]
    fn small_generation_is_deterministic() {
        let cfg = GenConfig {
            k_star: 4,
            m: 7,
            seed: 42,
            ..GenConfig::default()
        };
        let a = generate_dataset(&cfg).unwrap();
        let b = generate_dataset(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1 + 2 + 3 + 4);
        assert_eq!(a.true_labels.as_ref().unwrap(), &vec![1, 2, 2, 3, 3, 3, 4, 4, 4, 4]);
        let c = generate_dataset(&GenConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_invalid_config() {
        let cfg = GenConfig {
            cluster_sizes: ClusterSizes::Explicit(vec![1, 2]),
            k_star: 3,
            ..GenConfig::default()
        };
        assert!(generate_dataset(&cfg).is_err());
        assert!(generate_dataset(&GenConfig { m: 0, ..GenConfig::default() }).is_err());
    }
}
