//! External cluster-validity scores and GOC convergence diagnostics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::types::GocTrace;

/// Cross-tabulation of predicted (rows) against true (columns) labels. Rows
/// and columns follow the sorted order of the distinct label values.
#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl Contingency {
    /// True when every row and every column has exactly one nonzero cell,
    /// i.e. the two labelings agree up to renaming.
    pub fn is_permutation(&self) -> bool {
        self.counts.len() == self.col_sums.len()
            && self
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&v| v > 0).count() == 1)
            && (0..self.col_sums.len())
                .all(|l| self.counts.iter().filter(|r| r[l] > 0).count() == 1)
    }
}

pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let rows = dense_ids(pred);
    let cols = dense_ids(truth);
    let nr = rows.values().count();
    let nc = cols.values().count();
    let mut counts = vec![vec![0usize; nc]; nr];
    for (p, t) in pred.iter().zip(truth) {
        counts[rows[p]][cols[t]] += 1;
    }
    let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums = (0..nc).map(|c| counts.iter().map(|r| r[c]).sum()).collect();
    Ok(Contingency {
        counts,
        row_sums,
        col_sums,
        n: pred.len(),
    })
}

fn dense_ids(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut ids: BTreeMap<usize, usize> = labels.iter().map(|&l| (l, 0)).collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    ids
}

/// `p·ln(1/p)` for `p = count/n`, written so that a cell of the joint table
/// and the matching marginal produce bit-identical terms.
fn plogp_inv(count: usize, n: usize) -> f64 {
    if count == 0 {
        return 0.0;
    }
    (count as f64 / n as f64) * (n as f64 / count as f64).ln()
}

/// `NMI = 2 I / (H1 + H2)` with natural logarithms; 0 when `I = 0`.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let n = c.n;
    let mut mi = 0.0;
    for (k, row) in c.counts.iter().enumerate() {
        for (l, &nkl) in row.iter().enumerate() {
            if nkl == 0 {
                continue;
            }
            let ratio = (n * nkl) as f64 / (c.col_sums[l] * c.row_sums[k]) as f64;
            mi += (nkl as f64 / n as f64) * ratio.ln();
        }
    }
    let h1: f64 = c.row_sums.iter().map(|&v| plogp_inv(v, n)).sum();
    if h1 > 0.0 && c.is_permutation() {
        return Ok(1.0);
    }
    let h2: f64 = c.col_sums.iter().map(|&v| plogp_inv(v, n)).sum();
    if mi <= 0.0 || h1 + h2 <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * mi / (h1 + h2)).clamp(0.0, 1.0))
}

/// `F = Σ_l (n_·l / n) max_k F_kl` where `F_kl` is the harmonic mean of
/// precision `n_kl/n_k·` and recall `n_kl/n_·l`.
pub fn f_measure(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let mut weighted = 0.0;
    for (l, &nl) in c.col_sums.iter().enumerate() {
        let mut best = 0.0f64;
        for (k, row) in c.counts.iter().enumerate() {
            let nkl = row[l];
            if nkl == 0 {
                continue;
            }
            let nk = c.row_sums[k];
            let (a, b, kl) = (nk as f64, nl as f64, nkl as f64);
            let f = (kl / a + kl / b).recip() * (2.0 * kl * kl / (a * b));
            best = best.max(f);
        }
        weighted += nl as f64 * best;
    }
    Ok((weighted / c.n as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaScores {
    pub t: usize,
    /// NMI of the iteration's labels against the final labels.
    pub eta1: f64,
    /// Mean squared distance of the iteration's candidates to the final ones.
    pub eta2: f64,
    /// NMI against the truth relative to the final NMI against the truth.
    pub eta3: Option<f64>,
}

pub fn eta_scores(
    trace: &GocTrace,
    final_labels: &[usize],
    final_xi: &Matrix,
    truth: Option<&[usize]>,
) -> Result<Vec<EtaScores>> {
    let final_nmi = truth.map(|t| nmi(final_labels, t)).transpose()?;
    trace
        .iterations
        .iter()
        .map(|rec| {
            let eta1 = nmi(&rec.labels, final_labels)?;
            let n = final_xi.nrows();
            let eta2 = rec
                .features
                .rows()
                .zip(final_xi.rows())
                .map(|(a, b)| sq_dist(a, b))
                .sum::<f64>()
                / n as f64;
            let eta3 = match (truth, final_nmi) {
                (Some(t), Some(f)) if f > 0.0 => Some(nmi(&rec.labels, t)? / f),
                _ => None,
            };
            Ok(EtaScores {
                t: rec.t,
                eta1,
                eta2,
                eta3,
            })
        })
        .collect()
}
