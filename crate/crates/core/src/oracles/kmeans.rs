use super::{kmeanspp_indices, nearest, OracleConfig};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::seeded;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    /// 0-based labels.
    pub labels: Vec<usize>,
    pub centers: Matrix,
    pub objective: f64,
    pub iterations: usize,
}

/// Lloyd's algorithm. Empty clusters are reseeded to the point farthest from
/// its own center.
pub fn kmeans(points: &Matrix, k: usize, init: Option<&Matrix>, cfg: &OracleConfig) -> KMeansFit {
    let n = points.nrows();
    let mut centers = match init {
        Some(c) => c.clone(),
        None => {
            let mut rng = seeded(cfg.rng_seed);
            points.select_rows(&kmeanspp_indices(points, k, &mut rng))
        }
    };
    let mut labels = vec![usize::MAX; n];
    let mut prev_objective = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let mut changed = false;
        let mut objective = 0.0;
        for (i, p) in points.rows().enumerate() {
            let (c, d) = nearest(p, &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            objective += d;
        }
        debug_assert!(
            objective <= prev_objective * (1.0 + 1e-12) + 1e-12,
            "k-means objective increased: {prev_objective} -> {objective}"
        );
        prev_objective = objective;

        let new_centers = update_centers(points, &labels, &centers);
        let shift = centers
            .rows()
            .zip(new_centers.rows())
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0f64, f64::max);
        centers = new_centers;
        if !changed && shift <= cfg.tol * cfg.tol {
            break;
        }
    }

    // Labels consistent with the returned centers.
    let mut objective = 0.0;
    for (i, p) in points.rows().enumerate() {
        let (c, d) = nearest(p, &centers);
        labels[i] = c;
        objective += d;
    }
    KMeansFit {
        labels,
        centers,
        objective,
        iterations,
    }
}

fn update_centers(points: &Matrix, labels: &[usize], old: &Matrix) -> Matrix {
    let k = old.nrows();
    let q = points.ncols();
    let mut sums = Matrix::zeros(k, q);
    let mut counts = vec![0usize; k];
    for (p, &l) in points.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut taken = vec![false; points.nrows()];
    for c in 0..k {
        if counts[c] > 0 {
            let m = counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|v| *v /= m);
            continue;
        }
        // Reseed: farthest point from its assigned center, not yet used.
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.rows().enumerate() {
            if taken[i] {
                continue;
            }
            let d = sq_dist(p, old.row(labels[i]));
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => {
                taken[i] = true;
                sums.row_mut(c).copy_from_slice(points.row(i));
            }
            None => sums.row_mut(c).copy_from_slice(old.row(c)),
        }
    }
    sums
}
