use super::OracleConfig;
use crate::matrix::{dist, Matrix};

#[derive(Debug, Clone)]
pub struct KMedoidsFit {
    /// 0-based labels.
    pub labels: Vec<usize>,
    /// Row index of each medoid.
    pub medoids: Vec<usize>,
    pub cost: f64,
}

/// Alternating (Voronoi iteration) K-medoids on Euclidean distances. Starts from
/// the points nearest to `init` if given, otherwise from the PAM BUILD step.
pub fn kmedoids(points: &Matrix, k: usize, init: Option<&Matrix>, cfg: &OracleConfig) -> KMedoidsFit {
    let n = points.nrows();
    let dmat: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| dist(points.row(i), points.row(j)))
        .collect();
    let d = |i: usize, j: usize| dmat[i * n + j];

    let mut medoids = match init {
        Some(c) => medoids_near(points, c),
        None => build(n, k, &d),
    };
    let mut labels = assign(n, &medoids, &d);

    for _ in 0..cfg.max_iter {
        let mut changed = false;
        for (c, medoid) in medoids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let cost = |m: usize| members.iter().map(|&i| d(m, i)).sum::<f64>();
            let mut best = (*medoid, cost(*medoid));
            for &m in &members {
                let cm = cost(m);
                if cm < best.1 || (cm == best.1 && m < best.0) {
                    best = (m, cm);
                }
            }
            if best.0 != *medoid {
                *medoid = best.0;
                changed = true;
            }
        }
        let new_labels = assign(n, &medoids, &d);
        if !changed && new_labels == labels {
            break;
        }
        labels = new_labels;
    }
    let cost = (0..n).map(|i| d(i, medoids[labels[i]])).sum();
    KMedoidsFit {
        labels,
        medoids,
        cost,
    }
}

fn assign(n: usize, medoids: &[usize], d: &impl Fn(usize, usize) -> f64) -> Vec<usize> {
    (0..n)
        .map(|i| {
            // A medoid always belongs to its own cluster.
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut best = (0, f64::INFINITY);
            for (c, &m) in medoids.iter().enumerate() {
                let v = d(i, m);
                if v < best.1 {
                    best = (c, v);
                }
            }
            best.0
        })
        .collect()
}

/// Distinct points closest to each initial center, in center order.
fn medoids_near(points: &Matrix, centers: &Matrix) -> Vec<usize> {
    let mut used = vec![false; points.nrows()];
    centers
        .rows()
        .map(|c| {
            let mut best = (usize::MAX, f64::INFINITY);
            for (i, p) in points.rows().enumerate() {
                let v = dist(p, c);
                if !used[i] && v < best.1 {
                    best = (i, v);
                }
            }
            used[best.0] = true;
            best.0
        })
        .collect()
}

/// PAM BUILD: greedily add the medoid that most reduces total distance.
fn build(n: usize, k: usize, d: &impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut medoids = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    let mut is_medoid = vec![false; n];
    for _ in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for cand in 0..n {
            if is_medoid[cand] {
                continue;
            }
            let total: f64 = (0..n).map(|i| nearest[i].min(d(i, cand))).sum();
            if total < best.1 {
                best = (cand, total);
            }
        }
        is_medoid[best.0] = true;
        medoids.push(best.0);
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d(i, best.0));
        }
    }
    medoids
}
