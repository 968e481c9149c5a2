//! Building empirical feature uncertainty sets from box, ball and ellipsoid
//! covariate sets with a user-defined transform, and watching the coverage
//! gap shrink as more candidates are drawn.

use goclust::types::CovariateUncertaintyModel;
use goclust::uncertainty::{build_empirical_set, coverage_gap, sample_covariates, Identity, NoPenalty, Transform};
use goclust::Matrix;

/// Polar coordinates of a point in the plane.
struct Polar;

impl Transform for Polar {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "polar"
    }

    fn apply(&self, z: &[f64]) -> goclust::Result<Vec<f64>> {
        Ok(vec![z[0].hypot(z[1]), z[1].atan2(z[0])])
    }
}

fn main() -> goclust::Result<()> {
    let shape = Matrix::from_rows(&[vec![2.0, 0.6], vec![0.6, 0.5]]);
    let models = [
        CovariateUncertaintyModel::new_box(vec![3.0, 1.0], vec![0.5, 0.2])?,
        CovariateUncertaintyModel::new_ball(vec![3.0, 1.0], 0.4)?,
        CovariateUncertaintyModel::new_ellipsoid(vec![3.0, 1.0], shape, 0.1)?,
    ];
    for model in &models {
        let set = build_empirical_set(model, &Polar, &NoPenalty, 200, 7, 1)?;
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        for c in set.candidates.rows() {
            rmin = rmin.min(c[0]);
            rmax = rmax.max(c[0]);
        }
        println!("{:?}: radius in [{rmin:.3}, {rmax:.3}], mean {:?}", kind(model), set.mean());
    }

    // Coverage of a unit box by its own samples, against a fixed reference cloud.
    let unit = CovariateUncertaintyModel::new_box(vec![0.0, 0.0], vec![1.0, 1.0])?;
    let reference = sample_covariates(&unit, 1000, 99);
    for m in [10, 100, 1000, 10_000] {
        let set = build_empirical_set(&unit, &Identity { dim: 2 }, &NoPenalty, m, 1, 1)?;
        println!("m = {m:>5}: coverage gap {:.4}", coverage_gap(&set, &reference)?);
    }
    Ok(())
}

fn kind(m: &CovariateUncertaintyModel) -> &'static str {
    match m {
        CovariateUncertaintyModel::Box { .. } => "box",
        CovariateUncertaintyModel::Ball { .. } => "ball",
        CovariateUncertaintyModel::Ellipsoid { .. } => "ellipsoid",
    }
}
