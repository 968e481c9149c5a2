//! Clustering oracles `C(Ξ, K, init)`: K-means, K-medoids and a spherical
//! (shared-variance) Gaussian mixture with optional BIC model selection.
//!
//! All oracles are deterministic functions of their inputs and the seed in
//! [`OracleConfig`]. Ties are broken toward the lowest index.

mod gmm;
mod kmeans;
mod kmedoids;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::Rng;
use crate::types::Assignment;

pub use gmm::{fit_gmm_eii, GmmFit};
pub use kmeans::{kmeans, KMeansFit};
pub use kmedoids::{kmedoids, KMedoidsFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Kmeans,
    Kmedoids,
    GmmEii,
    GmmEiiBic,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Kmeans => "kmeans",
            Self::Kmedoids => "kmedoids",
            Self::GmmEii => "gmm_eii",
            Self::GmmEiiBic => "gmm_eii_bic",
        }
    }
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Self::Kmeans),
            "kmedoids" => Ok(Self::Kmedoids),
            "gmm_eii" | "gmm" => Ok(Self::GmmEii),
            "gmm_eii_bic" | "gmm_bic" => Ok(Self::GmmEiiBic),
            other => Err(Error::InvalidConfig(format!("unknown oracle `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub max_iter: usize,
    pub tol: f64,
    pub rng_seed: u64,
}

impl OracleConfig {
    pub fn new(kind: OracleKind) -> Self {
        Self {
            kind,
            max_iter: 100,
            tol: 1e-8,
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("oracle max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("oracle tol must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::new(OracleKind::Kmeans)
    }
}

/// Partition the rows of `points` into `k` clusters. For the BIC oracle `k` is
/// the largest model tried and the reported `num_clusters` is the selected one.
pub fn oracle_cluster(
    points: &Matrix,
    k: usize,
    init_centers: Option<&Matrix>,
    cfg: &OracleConfig,
) -> Result<Assignment> {
    cfg.validate()?;
    check_k(points, k)?;
    if let Some(init) = init_centers {
        if init.nrows() != k || init.ncols() != points.ncols() {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: init.nrows(),
            });
        }
    }
    let (labels, centers) = match cfg.kind {
        OracleKind::Kmeans => {
            let fit = kmeans(points, k, init_centers, cfg);
            (fit.labels, fit.centers)
        }
        OracleKind::Kmedoids => {
            let fit = kmedoids(points, k, init_centers, cfg);
            let centers = points.select_rows(&fit.medoids);
            (fit.labels, centers)
        }
        OracleKind::GmmEii => {
            let fit = fit_gmm_eii(points, k, init_centers, cfg);
            (fit.labels, fit.means)
        }
        OracleKind::GmmEiiBic => return gmm_bic_select_with_init(points, k, init_centers, cfg),
    };
    Ok(Assignment {
        labels: labels.into_iter().map(|l| l + 1).collect(),
        num_clusters: k,
        selected: None,
        centers: Some(centers),
    })
}

/// Fit the shared-variance mixture for every `K = 1..=k_max` and keep the one
/// with the smallest BIC (ties go to the smaller `K`).
pub fn gmm_bic_select(points: &Matrix, k_max: usize, cfg: &OracleConfig) -> Result<Assignment> {
    cfg.validate()?;
    check_k(points, k_max)?;
    gmm_bic_select_with_init(points, k_max, None, cfg)
}

fn gmm_bic_select_with_init(
    points: &Matrix,
    k_max: usize,
    init: Option<&Matrix>,
    cfg: &OracleConfig,
) -> Result<Assignment> {
    let mut best: Option<(f64, GmmFit)> = None;
    for k in 1..=k_max {
        // Warm-start centers only fit the largest model.
        let init_k = if k == k_max { init } else { None };
        let fit = fit_gmm_eii(points, k, init_k, cfg);
        let bic = fit.bic(points.nrows());
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit));
        }
    }
    let (_, fit) = best.expect("k_max >= 1");
    Ok(Assignment {
        labels: fit.labels.iter().map(|l| l + 1).collect(),
        num_clusters: fit.means.nrows(),
        selected: None,
        centers: Some(fit.means),
    })
}

fn check_k(points: &Matrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("number of clusters must be >= 1".into()));
    }
    if k > points.nrows() {
        return Err(Error::KTooLarge {
            k,
            n: points.nrows(),
        });
    }
    Ok(())
}

/// Index of the closest center (lowest index on ties) and the squared distance.
pub(crate) fn nearest(point: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.rows().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance to the nearest chosen center. Returns row indices.
pub(crate) fn kmeanspp_indices(points: &Matrix, k: usize, rng: &mut Rng) -> Vec<usize> {
    use rand::Rng as _;
    let n = points.nrows();
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut d2: Vec<f64> = points.rows().map(|p| sq_dist(p, points.row(first))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    if target < w {
                        pick = Some(i);
                        break;
                    }
                    target -= w;
                }
            }
            // Rounding can leave `target` just past the end.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (i, p) in points.rows().enumerate() {
            let d = sq_dist(p, points.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Matrix {
        Matrix::column(&[0.0, 0.1, 10.0, 10.1])
    }

    #[test]
    fn kmeans_one_step_fixed_point() {
        let init = Matrix::column(&[0.0, 10.0]);
        let a = oracle_cluster(&line(), 2, Some(&init), &OracleConfig::new(OracleKind::Kmeans))
            .unwrap();
        assert_eq!(a.labels, vec![1, 1, 2, 2]);
        let c = a.centers.unwrap();
        assert!((c[(0, 0)] - 0.05).abs() < 1e-12);
        assert!((c[(1, 0)] - 10.05).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts = Matrix::from_rows(&[[0.0, 1.0], [3.0, 4.0], [-2.0, 7.0], [5.0, 5.0]]);
        for kind in [OracleKind::Kmeans, OracleKind::Kmedoids, OracleKind::GmmEii] {
            let a = oracle_cluster(&pts, 4, None, &OracleConfig::new(kind).with_seed(3)).unwrap();
            let mut l = a.labels.clone();
            l.sort();
            l.dedup();
            assert_eq!(l.len(), 4, "{kind:?}");
            if kind == OracleKind::Kmeans {
                let c = a.centers.unwrap();
                let obj: f64 = (0..4).map(|i| sq_dist(pts.row(i), c.row(a.labels[i] - 1))).sum();
                assert_eq!(obj, 0.0);
            }
        }
    }

    #[test]
    fn kmedoids_matches_enumeration() {
        let pts = line();
        let a = oracle_cluster(&pts, 2, None, &OracleConfig::new(OracleKind::Kmedoids)).unwrap();
        let c = a.centers.unwrap();
        let mut meds: Vec<f64> = c.rows().map(|r| r[0]).collect();
        meds.sort_by(f64::total_cmp);
        assert!(meds[0] == 0.0 || meds[0] == 0.1);
        assert!(meds[1] == 10.0 || meds[1] == 10.1);
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
        // Enumeration oracle: best medoid pair by total distance.
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..4 {
            for j in i + 1..4 {
                let cost: f64 = (0..4)
                    .map(|p| (pts[(p, 0)] - pts[(i, 0)]).abs().min((pts[(p, 0)] - pts[(j, 0)]).abs()))
                    .sum();
                if cost < best.0 - 1e-12 {
                    best = (cost, i, j);
                }
            }
        }
        let got: f64 = (0..4)
            .map(|p| (pts[(p, 0)] - c[(a.labels[p] - 1, 0)]).abs())
            .sum();
        assert!((got - best.0).abs() < 1e-12);
    }

    #[test]
    fn k_too_large() {
        let r = oracle_cluster(&line(), 5, None, &OracleConfig::default());
        assert!(matches!(r, Err(Error::KTooLarge { k: 5, n: 4 })));
        assert!(matches!(
            gmm_bic_select(&line(), 5, &OracleConfig::new(OracleKind::GmmEiiBic)),
            Err(Error::KTooLarge { .. })
        ));
    }

    fn blob(center: &[f64], sigma: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::rng::seeded(seed);
        let normal = Normal::new(0.0, sigma).unwrap();
        (0..n)
            .map(|_| center.iter().map(|c| c + normal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn bic_selects_one_tight_blob() {
        let pts = Matrix::from_rows(&blob(&[1.0, -1.0], 0.01, 200, 1));
        let a = gmm_bic_select(&pts, 5, &OracleConfig::new(OracleKind::GmmEiiBic)).unwrap();
        assert_eq!(a.num_clusters, 1);
    }

    #[test]
    fn bic_selects_two_separated_blobs() {
        let mut rows = blob(&[0.0, 0.0], 0.01, 100, 2);
        rows.extend(blob(&[1.0, 0.0], 0.01, 100, 3));
        let pts = Matrix::from_rows(&rows);
        let a = gmm_bic_select(&pts, 5, &OracleConfig::new(OracleKind::GmmEiiBic)).unwrap();
        assert_eq!(a.num_clusters, 2);
        assert!(a.labels[..100].iter().all(|&l| l == a.labels[0]));
        assert!(a.labels[100..].iter().all(|&l| l == a.labels[100]));
    }

    #[test]
    fn bic_single_point() {
        let pts = Matrix::from_rows(&[[2.0, 3.0]]);
        let a = gmm_bic_select(&pts, 1, &OracleConfig::new(OracleKind::GmmEiiBic)).unwrap();
        assert_eq!(a.num_clusters, 1);
        assert_eq!(a.labels, vec![1]);
    }

    #[test]
    fn oracles_are_deterministic() {
        let mut rows = blob(&[0.0, 0.0], 0.5, 30, 4);
        rows.extend(blob(&[3.0, 1.0], 0.5, 30, 5));
        let pts = Matrix::from_rows(&rows);
        for kind in [
            OracleKind::Kmeans,
            OracleKind::Kmedoids,
            OracleKind::GmmEii,
            OracleKind::GmmEiiBic,
        ] {
            let cfg = OracleConfig::new(kind).with_seed(9);
            assert_eq!(
                oracle_cluster(&pts, 4, None, &cfg).unwrap(),
                oracle_cluster(&pts, 4, None, &cfg).unwrap()
            );
        }
    }
}
