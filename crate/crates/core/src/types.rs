//! Shared domain types.
//!
//! Cluster labels are 1-based everywhere in the public API (`1..=K`).
//! Candidate indices (`Assignment::selected`) are 0-based row indices into
//! the owning [`EmpiricalFeatureSet`]; files written by [`crate::io`] shift
//! them to 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{cholesky, Matrix};

/// A covariate uncertainty set `Z_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateUncertaintyModel {
    /// `{z : |z_l - c_l| <= h_l}`
    Box { center: Vec<f64>, half_widths: Vec<f64> },
    /// `{z : ||z - c||_2 <= r}`
    Ball { center: Vec<f64>, radius: f64 },
    /// `{z : (z - c)^T S^{-1} (z - c) <= level}`
    Ellipsoid {
        center: Vec<f64>,
        shape: Matrix,
        level: f64,
        chol: Matrix,
    },
}

impl CovariateUncertaintyModel {
    pub fn new_box(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        if center.len() != half_widths.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: half_widths.len(),
            });
        }
        check_center(&center)?;
        if let Some(h) = half_widths.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidModel(format!("box half-width must be > 0, got {h}")));
        }
        Ok(Self::Box {
            center,
            half_widths,
        })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_center(&center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidModel(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn new_ellipsoid(center: Vec<f64>, shape: Matrix, level: f64) -> Result<Self> {
        check_center(&center)?;
        let d = center.len();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shape.nrows(),
            });
        }
        if !(level.is_finite() && level > 0.0) {
            return Err(Error::InvalidModel(format!("ellipsoid level must be > 0, got {level}")));
        }
        for i in 0..d {
            for j in 0..i {
                if (shape[(i, j)] - shape[(j, i)]).abs() > 1e-9 {
                    return Err(Error::InvalidModel("shape matrix is not symmetric".into()));
                }
            }
        }
        let chol = cholesky(&shape)
            .ok_or_else(|| Error::InvalidModel("shape matrix is not positive definite".into()))?;
        Ok(Self::Ellipsoid {
            center,
            shape,
            level,
            chol,
        })
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Self::Box { center, .. } | Self::Ball { center, .. } | Self::Ellipsoid { center, .. } => {
                center
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    /// Per-dimension scale `sigma_l` used by penalty rules: half the extent of
    /// the set along each axis (a `±2σ` box gives back `σ`).
    pub fn scales(&self) -> Vec<f64> {
        match self {
            Self::Box { half_widths, .. } => half_widths.iter().map(|h| h / 2.0).collect(),
            Self::Ball { center, radius } => vec![radius / 2.0; center.len()],
            Self::Ellipsoid { shape, level, .. } => (0..shape.nrows())
                .map(|i| (shape[(i, i)] * level).sqrt() / 2.0)
                .collect(),
        }
    }

    /// Membership test with a small relative slack for rounding.
    pub fn contains(&self, z: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        if z.len() != self.dim() {
            return false;
        }
        match self {
            Self::Box {
                center,
                half_widths,
            } => z
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((z, c), h)| (z - c).abs() <= h * (1.0 + SLACK)),
            Self::Ball { center, radius } => {
                crate::matrix::dist(z, center) <= radius * (1.0 + SLACK)
            }
            Self::Ellipsoid {
                center, chol, level, ..
            } => {
                // Solve L y = (z - c); quadratic form is |y|^2.
                let d = center.len();
                let mut y = vec![0.0; d];
                for i in 0..d {
                    let mut s = z[i] - center[i];
                    for k in 0..i {
                        s -= chol[(i, k)] * y[k];
                    }
                    y[i] = s / chol[(i, i)];
                }
                y.iter().map(|v| v * v).sum::<f64>() <= level * (1.0 + 1e-9)
            }
        }
    }
}

fn check_center(center: &[f64]) -> Result<()> {
    if center.is_empty() {
        return Err(Error::InvalidModel("center must be nonempty".into()));
    }
    if center.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidModel("center must be finite".into()));
    }
    Ok(())
}

/// The candidates `χ_i^(j)` of one individual together with their penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFeatureSet {
    /// 1-based position of the individual in its dataset.
    pub individual_id: usize,
    pub candidates: Matrix,
    pub penalties: Vec<f64>,
}

impl EmpiricalFeatureSet {
    pub fn new(individual_id: usize, candidates: Matrix, penalties: Vec<f64>) -> Result<Self> {
        let set = Self {
            individual_id,
            candidates,
            penalties,
        };
        set.validate()?;
        Ok(set)
    }

    /// A set with zero penalties.
    pub fn unpenalized(individual_id: usize, candidates: Matrix) -> Result<Self> {
        let m = candidates.nrows();
        Self::new(individual_id, candidates, vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.candidates.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.candidates.ncols()
    }

    pub fn candidate(&self, j: usize) -> &[f64] {
        self.candidates.row(j)
    }

    /// Sample mean of the candidates.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim()];
        for row in self.candidates.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let m = self.len() as f64;
        mean.iter_mut().for_each(|v| *v /= m);
        mean
    }

    fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::EmptySet {
                individual: self.individual_id,
            });
        }
        if self.penalties.len() != self.candidates.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.candidates.nrows(),
                got: self.penalties.len(),
            });
        }
        if !self.candidates.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "individual {} has non-finite candidates",
                self.individual_id
            )));
        }
        if self.penalties.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "individual {} has a negative or non-finite penalty",
                self.individual_id
            )));
        }
        Ok(())
    }
}

/// Shift and scale applied by standardization, per feature dimension, plus
/// the divisor applied to penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormMeta {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
    pub penalty_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sets: Vec<EmpiricalFeatureSet>,
    /// Ground-truth cluster of each individual, 1-based.
    pub true_labels: Option<Vec<usize>>,
    pub feature_dim: usize,
    pub standardized: bool,
    pub norm_meta: Option<NormMeta>,
    /// Seed the dataset was generated from, if any.
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(sets: Vec<EmpiricalFeatureSet>, true_labels: Option<Vec<usize>>) -> Result<Self> {
        let feature_dim = sets.first().map_or(0, |s| s.dim());
        let d = Self {
            sets,
            true_labels,
            feature_dim,
            standardized: false,
            norm_meta: None,
            seed: None,
        };
        validate_dataset(&d)?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of true clusters (largest true label), if labels are present.
    pub fn num_true_clusters(&self) -> Option<usize> {
        self.true_labels
            .as_ref()
            .map(|l| l.iter().copied().max().unwrap_or(0))
    }

    /// Stack the candidate `selected[i]` of every individual into an `n × q` matrix.
    pub fn features_at(&self, selected: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.len(), self.feature_dim);
        for (i, (set, &j)) in self.sets.iter().zip(selected).enumerate() {
            out.row_mut(i).copy_from_slice(set.candidate(j));
        }
        out
    }

    pub fn penalties_at(&self, selected: &[usize]) -> Vec<f64> {
        self.sets
            .iter()
            .zip(selected)
            .map(|(s, &j)| s.penalties[j])
            .collect()
    }

    pub fn total_candidates(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }
}

/// Check every dataset invariant.
pub fn validate_dataset(d: &Dataset) -> Result<()> {
    if d.sets.is_empty() {
        return Err(Error::InvalidConfig("dataset has no individuals".into()));
    }
    for s in &d.sets {
        if s.dim() != d.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: d.feature_dim,
                got: s.dim(),
            });
        }
    }
    for s in &d.sets {
        s.validate()?;
    }
    if let Some(labels) = &d.true_labels {
        if labels.len() != d.sets.len() {
            return Err(Error::LengthMismatch {
                pred: labels.len(),
                truth: d.sets.len(),
            });
        }
        let max = labels.iter().copied().max().unwrap_or(0);
        if let Some((position, &label)) = labels.iter().enumerate().find(|(_, &l)| l == 0) {
            return Err(Error::BadLabel {
                position,
                label,
                max,
            });
        }
    }
    Ok(())
}

/// Result of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// 1-based cluster label of every individual.
    pub labels: Vec<usize>,
    pub num_clusters: usize,
    /// Selected candidate index per individual. `None` means the
    /// representative vector (or a raw point) was clustered.
    pub selected: Option<Vec<usize>>,
    pub centers: Option<Matrix>,
}

impl Assignment {
    /// Number of clusters that actually have members.
    pub fn occupied_clusters(&self) -> usize {
        let mut seen = vec![false; self.num_clusters + 1];
        for &l in &self.labels {
            seen[l] = true;
        }
        seen.iter().filter(|s| **s).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub k: usize,
    pub labels: Vec<usize>,
    pub selected: Vec<usize>,
    pub features: Matrix,
    pub objective: f64,
    pub changed_labels: usize,
    pub changed_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GocTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub total_iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: usize, rows: &[&[f64]]) -> EmpiricalFeatureSet {
        EmpiricalFeatureSet::unpenalized(id, Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn valid_dataset_passes() {
        let a = set(1, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let b = set(2, &[&[5.0, 5.0], &[6.0, 5.0], &[5.0, 6.0]]);
        assert!(Dataset::new(vec![a, b], None).is_ok());
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = set(1, &[&[0.0, 0.0]]);
        let b = set(2, &[&[0.0, 0.0, 0.0]]);
        assert!(matches!(
            Dataset::new(vec![a, b], None),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn zero_label_rejected() {
        let a = set(1, &[&[0.0]]);
        let b = set(2, &[&[1.0]]);
        assert!(matches!(
            Dataset::new(vec![a, b], Some(vec![1, 0])),
            Err(Error::BadLabel { position: 1, .. })
        ));
    }

    #[test]
    fn empty_set_rejected() {
        let empty = EmpiricalFeatureSet {
            individual_id: 3,
            candidates: Matrix::zeros(0, 2),
            penalties: vec![],
        };
        let d = Dataset {
            sets: vec![empty],
            true_labels: None,
            feature_dim: 2,
            standardized: false,
            norm_meta: None,
            seed: None,
        };
        assert!(matches!(validate_dataset(&d), Err(Error::EmptySet { individual: 3 })));
    }

    #[test]
    fn model_constructors_validate() {
        assert!(CovariateUncertaintyModel::new_ball(vec![5.0, 5.0], 0.0).is_err());
        assert!(CovariateUncertaintyModel::new_box(vec![0.0], vec![-1.0]).is_err());
        let not_pd = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(CovariateUncertaintyModel::new_ellipsoid(vec![0.0, 0.0], not_pd, 1.0).is_err());
        let asym = Matrix::from_rows(&[[1.0, 0.1], [0.0, 1.0]]);
        assert!(CovariateUncertaintyModel::new_ellipsoid(vec![0.0, 0.0], asym, 1.0).is_err());
    }
}
