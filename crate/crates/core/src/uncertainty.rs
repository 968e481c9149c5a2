//! Empirical feature uncertainty sets: sample a covariate set uniformly, push
//! the samples through a transform, attach penalties. Also dataset
//! standardization and the empirical coverage gap.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::{seeded, Rng};
use crate::types::{CovariateUncertaintyModel, Dataset, EmpiricalFeatureSet, NormMeta};

/// A deterministic map from covariates (`R^d`) to features (`R^q`).
pub trait Transform: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn name(&self) -> &str;
    fn apply(&self, z: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub dim: usize,
}

impl Transform for Identity {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "identity"
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.to_vec())
    }
}

/// Penalty attached to a sampled covariate, given the set center and the
/// per-dimension scales of the set.
pub trait PenaltyRule: Sync {
    fn penalty(&self, sample: &[f64], center: &[f64], scales: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoPenalty;

impl PenaltyRule for NoPenalty {
    fn penalty(&self, _: &[f64], _: &[f64], _: &[f64]) -> f64 {
        0.0
    }
}

/// `(z_c - center_c)^2 / (2 sigma_c^2)` on a single covariate component `c`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticPenalty {
    pub component: usize,
}

impl PenaltyRule for QuadraticPenalty {
    fn penalty(&self, sample: &[f64], center: &[f64], scales: &[f64]) -> f64 {
        let c = self.component;
        let diff = sample[c] - center[c];
        diff * diff / (2.0 * scales[c] * scales[c])
    }
}

/// Draw `m` points uniformly from the covariate set, one per row.
pub fn sample_covariates(model: &CovariateUncertaintyModel, m: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    sample_with(model, m, &mut rng)
}

fn sample_with(model: &CovariateUncertaintyModel, m: usize, rng: &mut Rng) -> Matrix {
    let d = model.dim();
    let mut out = Matrix::zeros(m, d);
    for j in 0..m {
        let row = out.row_mut(j);
        match model {
            CovariateUncertaintyModel::Box {
                center,
                half_widths,
            } => {
                for ((z, c), h) in row.iter_mut().zip(center).zip(half_widths) {
                    *z = c + h * rng.random_range(-1.0..=1.0);
                }
            }
            CovariateUncertaintyModel::Ball { center, radius } => {
                let u = unit_ball_point(d, rng);
                for ((z, c), u) in row.iter_mut().zip(center).zip(&u) {
                    *z = c + radius * u;
                }
            }
            CovariateUncertaintyModel::Ellipsoid {
                center, chol, level, ..
            } => {
                let u = unit_ball_point(d, rng);
                let s = level.sqrt();
                for i in 0..d {
                    let lu: f64 = (0..=i).map(|k| chol[(i, k)] * u[k]).sum();
                    row[i] = center[i] + s * lu;
                }
            }
        }
    }
    out
}

/// Uniform point in the unit `d`-ball: normal direction, radius `U^(1/d)`.
fn unit_ball_point(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = rng.random::<f64>().powf(1.0 / d as f64);
        // Guard against the direction rounding to slightly over unit length.
        let scale = (r / norm).min(1.0 / norm);
        return g.into_iter().map(|v| v * scale).collect();
    }
}

/// Sampled covariates together with the feature set built from them.
#[derive(Debug, Clone)]
pub struct BuiltSet {
    pub covariates: Matrix,
    pub set: EmpiricalFeatureSet,
}

/// Build `X̃_i`: `m` uniform samples of the covariate set mapped through `f`,
/// with penalties from `pen`.
pub fn build_empirical_set(
    model: &CovariateUncertaintyModel,
    f: &dyn Transform,
    pen: &dyn PenaltyRule,
    m: usize,
    seed: u64,
    individual_id: usize,
) -> Result<EmpiricalFeatureSet> {
    build_empirical_set_with_covariates(model, f, pen, m, seed, individual_id).map(|b| b.set)
}

pub fn build_empirical_set_with_covariates(
    model: &CovariateUncertaintyModel,
    f: &dyn Transform,
    pen: &dyn PenaltyRule,
    m: usize,
    seed: u64,
    individual_id: usize,
) -> Result<BuiltSet> {
    if m == 0 {
        return Err(Error::EmptySet {
            individual: individual_id,
        });
    }
    if f.input_dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: f.input_dim(),
        });
    }
    let covariates = sample_covariates(model, m, seed);
    let scales = model.scales();
    let mut candidates = Matrix::zeros(m, f.output_dim());
    let mut penalties = Vec::with_capacity(m);
    for (j, z) in covariates.rows().enumerate() {
        let x = f.apply(z)?;
        if x.len() != f.output_dim() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::TransformFailure {
                individual: individual_id,
                sample: j,
            });
        }
        candidates.row_mut(j).copy_from_slice(&x);
        penalties.push(pen.penalty(z, model.center(), &scales));
    }
    let set = EmpiricalFeatureSet::new(individual_id, candidates, penalties)?;
    Ok(BuiltSet { covariates, set })
}

/// Center every feature dimension to pooled mean 0 and scale it to pooled
/// mean square 1 over all candidates of all individuals; divide penalties by
/// their maximum.
pub fn standardize(d: &Dataset) -> Result<Dataset> {
    if d.standardized {
        return Err(Error::AlreadyStandardized);
    }
    Ok(standardize_unchecked(d)?)
}

/// Same as [`standardize`] but accepts an already standardized dataset.
pub fn standardize_unchecked(d: &Dataset) -> Result<Dataset> {
    let q = d.feature_dim;
    let total = d.total_candidates() as f64;
    let mut shift = vec![0.0; q];
    for s in &d.sets {
        for row in s.candidates.rows() {
            for (m, v) in shift.iter_mut().zip(row) {
                *m += v;
            }
        }
    }
    shift.iter_mut().for_each(|v| *v /= total);
    let mut scale = vec![0.0; q];
    for s in &d.sets {
        for row in s.candidates.rows() {
            for ((acc, v), c) in scale.iter_mut().zip(row).zip(&shift) {
                *acc += (v - c) * (v - c);
            }
        }
    }
    for (dim, v) in scale.iter_mut().enumerate() {
        *v = (*v / total).sqrt();
        if !(*v > 0.0) {
            return Err(Error::DegenerateDimension { dim });
        }
    }
    let max_pen = d
        .sets
        .iter()
        .flat_map(|s| s.penalties.iter().copied())
        .fold(0.0f64, f64::max);
    let penalty_scale = if max_pen > 0.0 { max_pen } else { 1.0 };

    let mut out = d.clone();
    for s in &mut out.sets {
        for j in 0..s.len() {
            let row = s.candidates.row_mut(j);
            for ((v, c), sc) in row.iter_mut().zip(&shift).zip(&scale) {
                *v = (*v - c) / sc;
            }
        }
        if max_pen > 0.0 {
            s.penalties.iter_mut().for_each(|p| *p /= penalty_scale);
        }
    }
    out.standardized = true;
    out.norm_meta = Some(NormMeta {
        shift,
        scale,
        penalty_scale,
    });
    Ok(out)
}

/// `max_{x in reference} min_{x' in set} ||x - x'||_2`.
pub fn coverage_gap(set: &EmpiricalFeatureSet, reference: &Matrix) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::InvalidConfig("reference cloud is empty".into()));
    }
    if reference.ncols() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: reference.ncols(),
        });
    }
    let gap = reference
        .rows()
        .map(|x| {
            set.candidates
                .rows()
                .map(|c| sq_dist(x, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);
    Ok(gap.sqrt())
}
