//! Greedy optimistic clustering (GOC) and its pessimistic counterpart (GPC).
//!
//! Each iteration `t`:
//! 1. picks the number of clusters `K(t)` (constant, or the number of
//!    non-singleton clusters of the previous iteration),
//! 2. runs the clustering oracle on the current candidates `Ξ(t-1)`,
//! 3. moves every individual to the candidate of its uncertainty set that is
//!    closest to some cluster center (plus `λ·Pen`), and reassigns it to the
//!    nearest center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::oracles::{oracle_cluster, OracleConfig};
use crate::types::{Assignment, Dataset, GocTrace, IterationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSchedule {
    Constant,
    ShrinkNonsingleton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    /// Stop when the selected candidate indices repeat.
    ExactCandidates,
    /// Stop when the mean squared candidate displacement drops below `ε`.
    Tol(f64),
}

impl std::str::FromStr for Convergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Self::ExactCandidates);
        }
        let eps = s
            .strip_prefix("tol:")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidConfig(format!("bad convergence `{s}`; use exact or tol:EPS")))?;
        Ok(Self::Tol(eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Optimistic,
    Pessimistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GocConfig {
    pub k0: usize,
    pub lambda: f64,
    pub k_schedule: KSchedule,
    pub convergence: Convergence,
    pub t_max: usize,
    pub oracle: OracleConfig,
    pub mode: Mode,
}

impl GocConfig {
    pub fn new(k0: usize, lambda: f64, oracle: OracleConfig) -> Self {
        Self {
            k0,
            lambda,
            k_schedule: KSchedule::ShrinkNonsingleton,
            convergence: Convergence::ExactCandidates,
            t_max: 100,
            oracle,
            mode: Mode::Optimistic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 {
            return Err(Error::InvalidConfig("K0 must be >= 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidConfig("T_max must be >= 1".into()));
        }
        if let Convergence::Tol(eps) = self.convergence {
            if !(eps > 0.0) {
                return Err(Error::InvalidConfig("convergence tolerance must be > 0".into()));
            }
        }
        self.oracle.validate()
    }
}

/// Number of clusters with at least two members.
pub fn count_nonsingleton(labels: &[usize], k: usize) -> usize {
    let mut counts = vec![0usize; k + 1];
    for &l in labels {
        counts[l] += 1;
    }
    counts[1..].iter().filter(|&&c| c > 1).count()
}

/// Cluster means together with member counts; clusters with zero members are
/// empty and their row is left at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCenters {
    pub centers: Matrix,
    pub counts: Vec<usize>,
}

impl ClusterCenters {
    pub fn is_empty_cluster(&self, k: usize) -> bool {
        self.counts[k] == 0
    }

    /// Indices (0-based) of clusters that have members.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, _)| k)
    }

    /// Nearest nonempty center (0-based) and squared distance; lowest index on ties.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for k in self.occupied() {
            let d = sq_dist(x, self.centers.row(k));
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }
}

/// `μ_k = mean of rows labelled k`, for `k = 1..=K`.
pub fn cluster_centers(xi: &Matrix, labels: &[usize], k: usize) -> ClusterCenters {
    let mut centers = Matrix::zeros(k, xi.ncols());
    let mut counts = vec![0usize; k];
    for (x, &l) in xi.rows().zip(labels) {
        counts[l - 1] += 1;
        for (c, v) in centers.row_mut(l - 1).iter_mut().zip(x) {
            *c += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let m = counts[c] as f64;
            centers.row_mut(c).iter_mut().for_each(|v| *v /= m);
        }
    }
    ClusterCenters { centers, counts }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateUpdate {
    pub features: Matrix,
    /// 1-based labels after reassignment to the nearest center.
    pub labels: Vec<usize>,
    /// 0-based candidate index per individual.
    pub selected: Vec<usize>,
    pub centers: ClusterCenters,
}

/// Step III. Centers come from `(prev_xi, temp_labels)`.
///
/// Optimistic: `(j, k) = argmin ||χ_j - μ_k||² + λ·Pen(χ_j)` over all
/// candidates and nonempty clusters, scanned candidate-major so ties go to
/// the smallest `(j, k)`. Pessimistic: `j = argmax` of the same quantity
/// within the oracle cluster. In both modes the label becomes the nearest center.
pub fn update_candidates(
    d: &Dataset,
    prev_xi: &Matrix,
    temp_labels: &[usize],
    k: usize,
    lambda: f64,
    mode: Mode,
) -> CandidateUpdate {
    let centers = cluster_centers(prev_xi, temp_labels, k);
    update_candidates_with_centers(d, centers, temp_labels, lambda, mode)
}

pub fn update_candidates_with_centers(
    d: &Dataset,
    centers: ClusterCenters,
    temp_labels: &[usize],
    lambda: f64,
    mode: Mode,
) -> CandidateUpdate {
    let n = d.len();
    let occupied: Vec<usize> = centers.occupied().collect();
    let mut selected = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (i, set) in d.sets.iter().enumerate() {
        let (j, k) = match mode {
            Mode::Optimistic => {
                let mut best = (0, occupied[0], f64::INFINITY);
                for (j, x) in set.candidates.rows().enumerate() {
                    let pen = lambda * set.penalties[j];
                    for &k in &occupied {
                        let v = sq_dist(x, centers.centers.row(k)) + pen;
                        if v < best.2 {
                            best = (j, k, v);
                        }
                    }
                }
                (best.0, best.1)
            }
            Mode::Pessimistic => {
                let own = temp_labels[i] - 1;
                let mu = centers.centers.row(own);
                let mut best = (0, f64::NEG_INFINITY);
                for (j, x) in set.candidates.rows().enumerate() {
                    let v = sq_dist(x, mu) + lambda * set.penalties[j];
                    if v > best.1 {
                        best = (j, v);
                    }
                }
                (best.0, centers.nearest(set.candidate(best.0)).0)
            }
        };
        selected.push(j);
        labels.push(k + 1);
    }
    CandidateUpdate {
        features: d.features_at(&selected),
        labels,
        selected,
        centers,
    }
}

/// `Σ_i ||χ_i - μ_{c_i}||² + λ Σ_i Pen_i` with the centers held fixed.
pub fn fixed_center_objective(
    xi: &Matrix,
    labels: &[usize],
    centers: &Matrix,
    lambda: f64,
    penalties: &[f64],
) -> f64 {
    let fit: f64 = xi
        .rows()
        .zip(labels)
        .map(|(x, &l)| sq_dist(x, centers.row(l - 1)))
        .sum();
    fit + lambda * penalties.iter().sum::<f64>()
}

/// GOC objective with the centers recomputed from `(xi, labels)`.
pub fn goc_objective(xi: &Matrix, labels: &[usize], k: usize, lambda: f64, penalties: &[f64]) -> f64 {
    let c = cluster_centers(xi, labels, k);
    fixed_center_objective(xi, labels, &c.centers, lambda, penalties)
}

/// Default `Ξ(0)`: the least-penalized candidate (lowest index on ties), or,
/// when every penalty of the set is zero, the candidate nearest the set mean.
pub fn initial_selection(d: &Dataset) -> Vec<usize> {
    d.sets
        .iter()
        .map(|s| {
            if s.penalties.iter().all(|&p| p == 0.0) {
                let mean = s.mean();
                let mut best = (0, f64::INFINITY);
                for (j, x) in s.candidates.rows().enumerate() {
                    let v = sq_dist(x, &mean);
                    if v < best.1 {
                        best = (j, v);
                    }
                }
                best.0
            } else {
                let mut best = 0;
                for (j, &p) in s.penalties.iter().enumerate() {
                    if p < s.penalties[best] {
                        best = j;
                    }
                }
                best
            }
        })
        .collect()
}

/// Run the GOC loop (or GPC when `cfg.mode` is pessimistic).
pub fn run_goc(
    d: &Dataset,
    init_selected: Option<&[usize]>,
    cfg: &GocConfig,
) -> Result<(Assignment, GocTrace)> {
    cfg.validate()?;
    let n = d.len();
    if cfg.k0 > n {
        return Err(Error::KTooLarge { k: cfg.k0, n });
    }
    let mut selected = match init_selected {
        Some(s) => {
            if s.len() != n {
                return Err(Error::LengthMismatch {
                    pred: s.len(),
                    truth: n,
                });
            }
            if let Some(i) = (0..n).find(|&i| s[i] >= d.sets[i].len()) {
                return Err(Error::InvalidConfig(format!(
                    "initial candidate {} out of range for individual {i}",
                    s[i]
                )));
            }
            s.to_vec()
        }
        None => initial_selection(d),
    };
    let mut xi = d.features_at(&selected);
    let mut trace = GocTrace::default();
    let mut prev: Option<(Vec<usize>, usize)> = None;
    let mut last: Option<CandidateUpdate> = None;

    for t in 1..=cfg.t_max {
        let (k, init) = match &prev {
            None => (cfg.k0, None),
            Some((labels, k_prev)) => {
                let k = match cfg.k_schedule {
                    KSchedule::Constant => cfg.k0,
                    KSchedule::ShrinkNonsingleton => count_nonsingleton(labels, *k_prev).max(1),
                };
                (k, Some(warm_start(&xi, labels, *k_prev, k, cfg.k_schedule)))
            }
        };
        let temp = oracle_cluster(&xi, k, init.as_ref(), &cfg.oracle)?;
        let k = temp.num_clusters;
        let update = update_candidates(d, &xi, &temp.labels, k, cfg.lambda, cfg.mode);

        let penalties = d.penalties_at(&update.selected);
        let objective = goc_objective(&update.features, &update.labels, k, cfg.lambda, &penalties);
        let changed_candidates = selected
            .iter()
            .zip(&update.selected)
            .filter(|(a, b)| a != b)
            .count();
        let changed_labels = prev.as_ref().map_or(n, |(l, _)| {
            l.iter().zip(&update.labels).filter(|(a, b)| a != b).count()
        });
        let displacement = xi
            .rows()
            .zip(update.features.rows())
            .map(|(a, b)| sq_dist(a, b))
            .sum::<f64>()
            / n as f64;
        trace.iterations.push(IterationRecord {
            t,
            k,
            labels: update.labels.clone(),
            selected: update.selected.clone(),
            features: update.features.clone(),
            objective,
            changed_labels,
            changed_candidates,
        });
        trace.total_iterations = t;

        // Ξ(0) is an initialization, not a step-III output; compare from t = 2.
        let done = t >= 2
            && match cfg.convergence {
                Convergence::ExactCandidates => changed_candidates == 0,
                Convergence::Tol(eps) => displacement < eps,
            };
        selected.clone_from(&update.selected);
        xi = update.features.clone();
        prev = Some((update.labels.clone(), k));
        last = Some(update);
        if done {
            trace.converged = true;
            break;
        }
    }

    let last = last.expect("t_max >= 1");
    Ok((finalize(last), trace))
}

/// GPC: [`run_goc`] with the pessimistic step III.
pub fn run_gpc(d: &Dataset, cfg: &GocConfig) -> Result<(Assignment, GocTrace)> {
    let cfg = GocConfig {
        mode: Mode::Pessimistic,
        ..*cfg
    };
    run_goc(d, None, &cfg)
}

/// Initial centers for the next oracle call: means of the clusters that
/// survive the schedule, padded with farthest points if too few remain.
fn warm_start(xi: &Matrix, labels: &[usize], k_prev: usize, k: usize, schedule: KSchedule) -> Matrix {
    let c = cluster_centers(xi, labels, k_prev);
    let min_members = match schedule {
        KSchedule::ShrinkNonsingleton => 2,
        KSchedule::Constant => 1,
    };
    let mut init = Matrix::zeros(0, xi.ncols());
    for j in 0..k_prev {
        if c.counts[j] >= min_members && init.nrows() < k {
            init.push_row(c.centers.row(j));
        }
    }
    if init.is_empty() {
        let all = cluster_centers(xi, &vec![1; xi.nrows()], 1);
        init.push_row(all.centers.row(0));
    }
    while init.nrows() < k {
        let mut best = (0, -1.0);
        for (i, x) in xi.rows().enumerate() {
            let d = init
                .rows()
                .map(|c| sq_dist(x, c))
                .fold(f64::INFINITY, f64::min);
            if d > best.1 {
                best = (i, d);
            }
        }
        init.push_row(xi.row(best.0));
    }
    init
}

/// Compact labels to the occupied clusters (in cluster order) and attach the
/// matching centers.
fn finalize(update: CandidateUpdate) -> Assignment {
    let k = update.centers.counts.len();
    let final_centers = cluster_centers(&update.features, &update.labels, k);
    let mut remap = vec![0usize; k];
    let mut centers = Matrix::zeros(0, update.features.ncols());
    for j in final_centers.occupied() {
        centers.push_row(final_centers.centers.row(j));
        remap[j] = centers.nrows();
    }
    Assignment {
        labels: update.labels.iter().map(|&l| remap[l - 1]).collect(),
        num_clusters: centers.nrows(),
        selected: Some(update.selected),
        centers: Some(centers),
    }
}
