//! Baselines: clustering the representative (mean) vector of each
//! uncertainty set, and affinity propagation over set discrepancies.

mod affinity;
mod discrepancy;

pub use affinity::{affinity_propagation, quantile, ApConfig, ApResult};
pub use discrepancy::{discrepancy, discrepancy_matrices, discrepancy_matrix, DiscrepancyKind, SimilarityMatrix};

use crate::error::Result;
use crate::matrix::Matrix;
use crate::oracles::{oracle_cluster, OracleConfig};
use crate::types::{Assignment, Dataset};

/// Row `i` is the sample mean of the candidates of individual `i`.
pub fn representative_vectors(d: &Dataset) -> Matrix {
    let mut out = Matrix::zeros(d.len(), d.feature_dim);
    for (i, s) in d.sets.iter().enumerate() {
        out.row_mut(i).copy_from_slice(&s.mean());
    }
    out
}

/// The oracle applied to the representative vectors (UK-means for K-means).
pub fn baseline_cluster(d: &Dataset, k: usize, cfg: &OracleConfig) -> Result<Assignment> {
    oracle_cluster(&representative_vectors(d), k, None, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::nmi;
    use crate::oracles::OracleKind;
    use crate::types::EmpiricalFeatureSet;

    fn set(id: usize, rows: &[&[f64]]) -> EmpiricalFeatureSet {
        EmpiricalFeatureSet::unpenalized(id, Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn representative_examples() {
        let d = Dataset::new(
            vec![
                set(0, &[&[0.0, 0.0], &[2.0, 2.0]]),
                set(1, &[&[3.0, -1.0]]),
            ],
            None,
        )
        .unwrap();
        let r = representative_vectors(&d);
        assert_eq!(r.row(0), &[1.0, 1.0]);
        assert_eq!(r.row(1), &[3.0, -1.0]);
        let d = Dataset::new(vec![set(0, &[&[-1.0], &[0.0], &[1.0]])], None).unwrap();
        assert_eq!(representative_vectors(&d).row(0), &[0.0]);
    }

    #[test]
    fn far_groups_split_perfectly() {
        let sets = (0..6)
            .map(|i| {
                let base = if i < 3 { 0.0 } else { 100.0 };
                let off = i as f64 * 0.1;
                set(i, &[&[base + off - 1.0], &[base + off + 1.0], &[base + off]])
            })
            .collect();
        let d = Dataset::new(sets, Some(vec![1, 1, 1, 2, 2, 2])).unwrap();
        let a = baseline_cluster(&d, 2, &OracleConfig::new(OracleKind::Kmeans)).unwrap();
        assert_eq!(nmi(&a.labels, d.true_labels.as_ref().unwrap()).unwrap(), 1.0);
        let a = baseline_cluster(&d, 6, &OracleConfig::new(OracleKind::Kmeans)).unwrap();
        let mut l = a.labels.clone();
        l.sort();
        assert_eq!(l, vec![1, 2, 3, 4, 5, 6]);
    }
}
