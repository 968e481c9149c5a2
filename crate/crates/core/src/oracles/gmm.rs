use super::{kmeanspp_indices, nearest, OracleConfig};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::seeded;

const VAR_FLOOR: f64 = 1e-12;

/// Fitted spherical mixture with one variance shared by all components
/// (`Σ_k = σ² I`).
#[derive(Debug, Clone)]
pub struct GmmFit {
    /// 0-based hard labels (maximum responsibility).
    pub labels: Vec<usize>,
    pub means: Matrix,
    pub weights: Vec<f64>,
    pub variance: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl GmmFit {
    /// Free parameters: `K·q` means, `K - 1` weights, one shared variance.
    pub fn num_params(&self) -> usize {
        let k = self.means.nrows();
        k * self.means.ncols() + (k - 1) + 1
    }

    /// `-2 log L + p ln n`
    pub fn bic(&self, n: usize) -> f64 {
        -2.0 * self.log_likelihood + self.num_params() as f64 * (n as f64).ln()
    }
}

pub fn fit_gmm_eii(points: &Matrix, k: usize, init: Option<&Matrix>, cfg: &OracleConfig) -> GmmFit {
    let n = points.nrows();
    let q = points.ncols();
    let mut means = match init {
        Some(c) => c.clone(),
        None => {
            let mut rng = seeded(cfg.rng_seed);
            points.select_rows(&kmeanspp_indices(points, k, &mut rng))
        }
    };
    let mut weights = vec![1.0 / k as f64; k];
    let mut variance = (points
        .rows()
        .map(|p| nearest(p, &means).1)
        .sum::<f64>()
        / (n * q) as f64)
        .max(VAR_FLOOR);

    let mut resp = Matrix::zeros(n, k);
    let mut ll = e_step(points, &means, &weights, variance, &mut resp);
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        m_step(points, &resp, &mut means, &mut weights, &mut variance);
        let new_ll = e_step(points, &means, &weights, variance, &mut resp);
        debug_assert!(
            new_ll >= ll - 1e-10 * ll.abs().max(1.0),
            "EM log-likelihood decreased: {ll} -> {new_ll}"
        );
        let gain = new_ll - ll;
        ll = new_ll;
        if gain.abs() <= cfg.tol * ll.abs().max(1.0) {
            break;
        }
    }

    let labels = (0..n)
        .map(|i| {
            let row = resp.row(i);
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    GmmFit {
        labels,
        means,
        weights,
        variance,
        log_likelihood: ll,
        iterations,
    }
}

/// Fills responsibilities and returns the log-likelihood.
fn e_step(points: &Matrix, means: &Matrix, weights: &[f64], variance: f64, resp: &mut Matrix) -> f64 {
    let q = points.ncols() as f64;
    let norm = -0.5 * q * (2.0 * std::f64::consts::PI * variance).ln();
    let k = means.nrows();
    let mut ll = 0.0;
    let mut logp = vec![0.0; k];
    for (i, p) in points.rows().enumerate() {
        let mut max = f64::NEG_INFINITY;
        for c in 0..k {
            logp[c] = if weights[c] > 0.0 {
                weights[c].ln() + norm - 0.5 * sq_dist(p, means.row(c)) / variance
            } else {
                f64::NEG_INFINITY
            };
            max = max.max(logp[c]);
        }
        let sum: f64 = logp.iter().map(|l| (l - max).exp()).sum();
        let lse = max + sum.ln();
        ll += lse;
        for (r, l) in resp.row_mut(i).iter_mut().zip(&logp) {
            *r = (l - lse).exp();
        }
    }
    ll
}

fn m_step(points: &Matrix, resp: &Matrix, means: &mut Matrix, weights: &mut [f64], variance: &mut f64) {
    let n = points.nrows();
    let q = points.ncols();
    let k = means.nrows();
    let mut nk = vec![0.0; k];
    let mut sums = Matrix::zeros(k, q);
    for (i, p) in points.rows().enumerate() {
        for c in 0..k {
            let r = resp[(i, c)];
            if r == 0.0 {
                continue;
            }
            nk[c] += r;
            for (s, v) in sums.row_mut(c).iter_mut().zip(p) {
                *s += r * v;
            }
        }
    }
    for c in 0..k {
        weights[c] = nk[c] / n as f64;
        if nk[c] > 0.0 {
            for (m, s) in means.row_mut(c).iter_mut().zip(sums.row(c)) {
                *m = s / nk[c];
            }
        }
    }
    let mut ss = 0.0;
    for (i, p) in points.rows().enumerate() {
        for c in 0..k {
            let r = resp[(i, c)];
            if r > 0.0 {
                ss += r * sq_dist(p, means.row(c));
            }
        }
    }
    *variance = (ss / (n * q) as f64).max(VAR_FLOOR);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::OracleKind;

    #[test]
    fn single_component_is_sample_moments() {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]);
        let fit = fit_gmm_eii(&pts, 1, None, &OracleConfig::new(OracleKind::GmmEii));
        assert!((fit.means[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((fit.means[(0, 1)] - 1.0).abs() < 1e-12);
        // Mean squared distance per coordinate: 2 / 2 = 1.
        assert!((fit.variance - 1.0).abs() < 1e-12);
        assert_eq!(fit.num_params(), 3);
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let pts = Matrix::column(&[0.0, 0.3, 0.5, 4.0, 4.2, 4.9, 9.0, 9.5]);
        let cfg = OracleConfig::new(OracleKind::GmmEii);
        let mut prev = f64::NEG_INFINITY;
        for iters in 1..15 {
            let fit = fit_gmm_eii(&pts, 3, None, &OracleConfig { max_iter: iters, ..cfg });
            assert!(fit.log_likelihood >= prev - 1e-10);
            prev = fit.log_likelihood;
        }
    }
}
