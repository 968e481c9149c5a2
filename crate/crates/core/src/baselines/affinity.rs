//! Affinity propagation (responsibility / availability message passing) with
//! the self-similarity set to a sample quantile of the off-diagonal
//! similarities.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded;
use crate::types::Assignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    pub preference_quantile: f64,
    pub damping: f64,
    pub max_iter: usize,
    pub conv_window: usize,
    /// Seed of the tiny symmetry-breaking noise added to the similarities.
    /// `None` disables the noise.
    pub noise_seed: Option<u64>,
}

impl ApConfig {
    pub fn new(preference_quantile: f64) -> Self {
        Self {
            preference_quantile,
            damping: 0.9,
            max_iter: 1000,
            conv_window: 50,
            noise_seed: Some(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.preference_quantile > 0.0 && self.preference_quantile < 1.0) {
            return Err(Error::InvalidConfig("preference quantile must lie in (0, 1)".into()));
        }
        if !(0.5..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig("damping must lie in [0.5, 1)".into()));
        }
        if self.max_iter == 0 || self.conv_window == 0 {
            return Err(Error::InvalidConfig("max_iter and conv_window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApResult {
    /// Labels follow exemplar order; `centers` is `None`.
    pub assignment: Assignment,
    /// Row index of each cluster's exemplar.
    pub exemplars: Vec<usize>,
    pub preference: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (N - 1) q`).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn affinity_propagation(s: &SimilarityMatrix, cfg: &ApConfig) -> Result<ApResult> {
    cfg.validate()?;
    let n = s.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty similarity matrix".into()));
    }
    if n == 1 {
        return Ok(ApResult {
            assignment: Assignment {
                labels: vec![1],
                num_clusters: 1,
                selected: None,
                centers: None,
            },
            exemplars: vec![0],
            preference: 0.0,
            converged: true,
            iterations: 0,
        });
    }
    let preference = quantile(&s.off_diagonal(), cfg.preference_quantile);
    let mut sim = s.values.clone();
    for i in 0..n {
        sim[(i, i)] = preference;
    }
    if let Some(seed) = cfg.noise_seed {
        let mut rng = seeded(seed);
        for i in 0..n {
            for j in 0..n {
                let g: f64 = StandardNormal.sample(&mut rng);
                let v = sim[(i, j)];
                sim[(i, j)] = v + (f64::EPSILON * v + 100.0 * f64::MIN_POSITIVE) * g;
            }
        }
    }

    let lam = cfg.damping;
    let mut resp = Matrix::zeros(n, n);
    let mut avail = Matrix::zeros(n, n);
    let mut exemplars: Vec<usize> = Vec::new();
    let mut stable = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut colsum = vec![0.0; n];

    for it in 0..cfg.max_iter {
        iterations = it + 1;
        for i in 0..n {
            let (mut first, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for k in 0..n {
                let v = avail[(i, k)] + sim[(i, k)];
                if v > first {
                    second = first;
                    first = v;
                    arg = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == arg { second } else { first };
                let r = sim[(i, k)] - competitor;
                resp[(i, k)] = lam * resp[(i, k)] + (1.0 - lam) * r;
            }
        }
        colsum.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..n {
            for (k, c) in colsum.iter_mut().enumerate() {
                let r = resp[(i, k)];
                *c += if i == k { r } else { r.max(0.0) };
            }
        }
        for i in 0..n {
            for k in 0..n {
                let r = resp[(i, k)];
                let own = if i == k { r } else { r.max(0.0) };
                let a = colsum[k] - own;
                let a = if i == k { a } else { a.min(0.0) };
                avail[(i, k)] = lam * avail[(i, k)] + (1.0 - lam) * a;
            }
        }

        let current: Vec<usize> = (0..n)
            .filter(|&k| avail[(k, k)] + resp[(k, k)] > 0.0)
            .collect();
        if current == exemplars {
            stable += 1;
        } else {
            stable = 1;
            exemplars = current;
        }
        if stable >= cfg.conv_window && !exemplars.is_empty() {
            converged = true;
            break;
        }
    }

    if exemplars.is_empty() {
        // No point prefers to be an exemplar: a single cluster around the
        // strongest self-evidence.
        let best = (0..n)
            .max_by(|&a, &b| {
                (avail[(a, a)] + resp[(a, a)])
                    .total_cmp(&(avail[(b, b)] + resp[(b, b)]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        exemplars = vec![best];
    }
    let labels = assign(&sim, &exemplars);
    let exemplars = refine(&sim, &labels, exemplars.len());
    let labels = assign(&sim, &exemplars);
    Ok(ApResult {
        assignment: Assignment {
            labels: labels.iter().map(|l| l + 1).collect(),
            num_clusters: exemplars.len(),
            selected: None,
            centers: None,
        },
        exemplars,
        preference,
        converged,
        iterations,
    })
}

/// 0-based cluster of each point: exemplars own themselves, the rest go to
/// the most similar exemplar.
fn assign(sim: &Matrix, exemplars: &[usize]) -> Vec<usize> {
    (0..sim.nrows())
        .map(|i| {
            if let Some(c) = exemplars.iter().position(|&e| e == i) {
                return c;
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (c, &e) in exemplars.iter().enumerate() {
                if sim[(i, e)] > best.1 {
                    best = (c, sim[(i, e)]);
                }
            }
            best.0
        })
        .collect()
}

/// Within each cluster, the member with the largest summed similarity from
/// the other members becomes the exemplar.
fn refine(sim: &Matrix, labels: &[usize], k: usize) -> Vec<usize> {
    (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let mut best = (members[0], f64::NEG_INFINITY);
            for &cand in &members {
                let score: f64 = members.iter().map(|&i| sim[(i, cand)]).sum();
                if score > best.1 {
                    best = (cand, score);
                }
            }
            best.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{discrepancy_matrix, DiscrepancyKind};
    use crate::types::{Dataset, EmpiricalFeatureSet};

    fn point_sets(values: &[f64]) -> Dataset {
        let sets = values
            .iter()
            .enumerate()
            .map(|(i, &v)| EmpiricalFeatureSet::unpenalized(i, Matrix::column(&[v])).unwrap())
            .collect();
        Dataset::new(sets, None).unwrap()
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0], 0.25), 1.25);
        assert_eq!(quantile(&[5.0], 0.9), 5.0);
    }

    #[test]
    fn three_groups() {
        let d = point_sets(&[0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 10.2, 10.3, 20.0, 20.1, 20.2, 20.3]);
        let s = discrepancy_matrix(&d, DiscrepancyKind::S2).unwrap();
        let r = affinity_propagation(&s, &ApConfig::new(0.5)).unwrap();
        assert!(r.converged);
        assert_eq!(r.preference, -10.0);
        assert_eq!(r.assignment.num_clusters, 3);
        let l = &r.assignment.labels;
        for g in 0..3 {
            assert!(l[4 * g..4 * g + 4].iter().all(|&x| x == l[4 * g]));
        }
        assert_ne!(l[0], l[4]);
        assert_ne!(l[4], l[8]);
        assert_ne!(l[0], l[8]);
    }

    #[test]
    fn identical_pair_is_one_cluster() {
        let d = point_sets(&[1.5, 1.5]);
        for kind in [DiscrepancyKind::S1, DiscrepancyKind::S2, DiscrepancyKind::S3] {
            let s = discrepancy_matrix(&d, kind).unwrap();
            for q in [0.1, 0.5, 0.9] {
                let r = affinity_propagation(&s, &ApConfig::new(q)).unwrap();
                assert_eq!(r.assignment.num_clusters, 1, "{kind:?} q={q}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = point_sets(&[0.0, 1.0]);
        let s = discrepancy_matrix(&d, DiscrepancyKind::S2).unwrap();
        assert!(affinity_propagation(&s, &ApConfig { damping: 0.3, ..ApConfig::new(0.5) }).is_err());
        assert!(affinity_propagation(&s, &ApConfig::new(1.0)).is_err());
    }
}
