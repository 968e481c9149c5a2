use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dist, Matrix};
use crate::types::{Dataset, EmpiricalFeatureSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// Mean of all pairwise distances.
    MeanPairwise,
    /// Distance of the closest pair.
    MinMin,
    /// `max{ min_a max_b d(a,b), min_b max_a d(a,b) }`; with
    /// `hausdorff_standard` the textbook `max{ sup_a inf_b, sup_b inf_a }`.
    Hausdorff { hausdorff_standard: bool },
}

impl DiscrepancyKind {
    pub const S1: Self = Self::MeanPairwise;
    pub const S2: Self = Self::MinMin;
    pub const S3: Self = Self::Hausdorff {
        hausdorff_standard: false,
    };

    pub fn as_str(self) -> &'static str {
        match self {
            Self::MeanPairwise => "s1",
            Self::MinMin => "s2",
            Self::Hausdorff {
                hausdorff_standard: false,
            } => "s3",
            Self::Hausdorff {
                hausdorff_standard: true,
            } => "s3std",
        }
    }
}

impl std::str::FromStr for DiscrepancyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(Self::S1),
            "s2" => Ok(Self::S2),
            "s3" => Ok(Self::S3),
            "s3std" => Ok(Self::Hausdorff {
                hausdorff_standard: true,
            }),
            other => Err(Error::InvalidConfig(format!("unknown discrepancy `{other}`"))),
        }
    }
}

/// Negated discrepancies between uncertainty sets. The diagonal is zero until
/// a preference is injected.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub values: Matrix,
    pub kind: DiscrepancyKind,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(self.values[(i, j)]);
                }
            }
        }
        out
    }
}

/// Discrepancy between two candidate sets. Exactly symmetric in its
/// arguments: the pair is put in a canonical order before summation.
pub fn discrepancy(a: &EmpiricalFeatureSet, b: &EmpiricalFeatureSet, kind: DiscrepancyKind) -> f64 {
    let (a, b) = canonical(a, b);
    let mut block = Vec::new();
    pair_distances(a, b, &mut block);
    reduce(&block, a.len(), b.len(), kind)
}

fn canonical<'a>(a: &'a EmpiricalFeatureSet, b: &'a EmpiricalFeatureSet) -> (&'a EmpiricalFeatureSet, &'a EmpiricalFeatureSet) {
    let key = |s: &EmpiricalFeatureSet| s.candidates.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    if (a.len(), key(a)) <= (b.len(), key(b)) {
        (a, b)
    } else {
        (b, a)
    }
}

fn pair_distances(a: &EmpiricalFeatureSet, b: &EmpiricalFeatureSet, out: &mut Vec<f64>) {
    out.clear();
    for x in a.candidates.rows() {
        out.extend(b.candidates.rows().map(|y| dist(x, y)));
    }
}

fn reduce(d: &[f64], ma: usize, mb: usize, kind: DiscrepancyKind) -> f64 {
    let row = |i: usize| &d[i * mb..(i + 1) * mb];
    let col = |j: usize| (0..ma).map(move |i| d[i * mb + j]);
    match kind {
        DiscrepancyKind::MeanPairwise => d.iter().sum::<f64>() / (ma * mb) as f64,
        DiscrepancyKind::MinMin => d.iter().copied().fold(f64::INFINITY, f64::min),
        DiscrepancyKind::Hausdorff {
            hausdorff_standard: false,
        } => {
            let ab = (0..ma)
                .map(|i| row(i).iter().copied().fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            let ba = (0..mb)
                .map(|j| col(j).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            ab.max(ba)
        }
        DiscrepancyKind::Hausdorff {
            hausdorff_standard: true,
        } => {
            let ab = (0..ma)
                .map(|i| row(i).iter().copied().fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            let ba = (0..mb)
                .map(|j| col(j).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            ab.max(ba)
        }
    }
}

/// Brute-force `O(n² m²)` similarity matrix, filled symmetrically.
pub fn discrepancy_matrix(d: &Dataset, kind: DiscrepancyKind) -> Result<SimilarityMatrix> {
    Ok(discrepancy_matrices(d, &[kind])?.pop().expect("one kind"))
}

/// Several similarity matrices sharing one pass over the pairwise distances.
pub fn discrepancy_matrices(d: &Dataset, kinds: &[DiscrepancyKind]) -> Result<Vec<SimilarityMatrix>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidConfig("need at least two uncertainty sets".into()));
    }
    let mut out: Vec<SimilarityMatrix> = kinds
        .iter()
        .map(|&kind| SimilarityMatrix {
            values: Matrix::zeros(n, n),
            kind,
        })
        .collect();
    let mut block = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = canonical(&d.sets[i], &d.sets[j]);
            pair_distances(a, b, &mut block);
            for s in &mut out {
                let v = -reduce(&block, a.len(), b.len(), s.kind);
                s.values[(i, j)] = v;
                s.values[(j, i)] = v;
            }
        }
    }
    Ok(out)
}
