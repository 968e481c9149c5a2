//! Sweep harness: a JSON-described matrix of methods run over a set of
//! datasets, written as a long-format results table.
//!
//! ```json
//! {
//!   "datasets": { "generate": { "seeds": [1, 2, 3] } },
//!   "methods": [
//!     { "method": "goc", "oracle": "kmeans", "k0": [50], "lambda": [0.0, 0.01] },
//!     { "method": "baseline", "oracle": "kmeans", "k0": [50] },
//!     { "method": "ap", "ap_kind": ["s2"], "quantile": [0.5, 0.9] }
//!   ],
//!   "output_dir": "results"
//! }
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{affinity_propagation, baseline_cluster, discrepancy_matrices, ApConfig, DiscrepancyKind};
use crate::datagen::{generate_dataset, GenConfig};
use crate::error::{Error, Result};
use crate::goc::{run_goc, run_gpc, Convergence, GocConfig};
use crate::io::{load_dataset, write_results, ResultRow};
use crate::metrics::{f_measure, nmi};
use crate::oracles::{OracleConfig, OracleKind};
use crate::types::Dataset;
use crate::uncertainty::standardize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// Generate one dataset per seed. `config` overrides the generator
    /// defaults; its own seed is ignored.
    Generate {
        seeds: Vec<u64>,
        #[serde(default)]
        config: Option<GenConfig>,
    },
    /// Load datasets previously written with `save_dataset`.
    Load { paths: Vec<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Goc,
    Gpc,
    Baseline,
    Ap,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Goc => "goc",
            Self::Gpc => "gpc",
            Self::Baseline => "baseline",
            Self::Ap => "ap",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "goc" => Ok(Self::Goc),
            "gpc" => Ok(Self::Gpc),
            "baseline" => Ok(Self::Baseline),
            "ap" => Ok(Self::Ap),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

fn default_oracle() -> String {
    "kmeans".into()
}

fn default_t_max() -> usize {
    50
}

fn default_convergence() -> String {
    "exact".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default = "default_oracle")]
    pub oracle: String,
    #[serde(default)]
    pub k0: Vec<usize>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub ap_kind: Vec<String>,
    #[serde(default)]
    pub quantile: Vec<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_convergence")]
    pub convergence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: DatasetSource,
    pub methods: Vec<MethodSpec>,
    /// Seed handed to the clustering oracles.
    #[serde(default)]
    pub oracle_seed: u64,
    #[serde(default = "default_true")]
    pub standardize: bool,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("method matrix is empty".into()));
        }
        match &self.datasets {
            DatasetSource::Generate { seeds, .. } => {
                if seeds.is_empty() {
                    return Err(Error::InvalidConfig("no dataset seeds".into()));
                }
                if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
                    return Err(Error::InvalidConfig("dataset seeds must be distinct".into()));
                }
            }
            DatasetSource::Load { paths } => {
                if paths.is_empty() {
                    return Err(Error::InvalidConfig("no dataset paths".into()));
                }
            }
        }
        self.cells().map(|_| ())
    }

    /// Expand the method matrix into distinct cells in sorted key order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = BTreeSet::new();
        for spec in &self.methods {
            if spec.t_max == 0 {
                return Err(Error::InvalidConfig("t_max must be >= 1".into()));
            }
            let convergence: Convergence = spec.convergence.parse()?;
            let need = |v: bool, what: &str| {
                if v {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("method {} needs a nonempty `{what}` list", spec.method.as_str())))
                }
            };
            match spec.method {
                Method::Goc | Method::Gpc | Method::Baseline => {
                    let oracle: OracleKind = spec.oracle.parse()?;
                    need(!spec.k0.is_empty(), "k0")?;
                    let lambdas = if spec.method == Method::Baseline {
                        vec![None]
                    } else {
                        need(!spec.lambda.is_empty(), "lambda")?;
                        spec.lambda.iter().map(|&l| Some(l)).collect()
                    };
                    for &k0 in &spec.k0 {
                        if k0 == 0 {
                            return Err(Error::InvalidConfig("K0 must be >= 1".into()));
                        }
                        for &lambda in &lambdas {
                            if let Some(l) = lambda {
                                if !(l >= 0.0 && l.is_finite()) {
                                    return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {l}")));
                                }
                            }
                            out.insert(Cell {
                                method: spec.method,
                                oracle: Some(oracle.as_str().to_string()),
                                k0: Some(k0),
                                lambda: lambda.map(OrdF64),
                                ap_kind: None,
                                quantile: None,
                                t_max: spec.t_max,
                                convergence: ConvKey(convergence),
                            });
                        }
                    }
                }
                Method::Ap => {
                    need(!spec.ap_kind.is_empty(), "ap_kind")?;
                    need(!spec.quantile.is_empty(), "quantile")?;
                    for kind in &spec.ap_kind {
                        let kind: DiscrepancyKind = kind.parse()?;
                        for &q in &spec.quantile {
                            ApConfig::new(q).validate()?;
                            out.insert(Cell {
                                method: Method::Ap,
                                oracle: None,
                                k0: None,
                                lambda: None,
                                ap_kind: Some(kind.as_str().to_string()),
                                quantile: Some(OrdF64(q)),
                                t_max: spec.t_max,
                                convergence: ConvKey(convergence),
                            });
                        }
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Float wrapper ordered by `total_cmp`, used only for sorting cell keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvKey(pub Convergence);

impl ConvKey {
    fn rank(&self) -> (u8, OrdF64) {
        match self.0 {
            Convergence::ExactCandidates => (0, OrdF64(0.0)),
            Convergence::Tol(e) => (1, OrdF64(e)),
        }
    }
}

impl Eq for ConvKey {}

impl PartialOrd for ConvKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConvKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

/// One point of the method matrix. Field order is the sort order of the
/// results table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub method: Method,
    pub oracle: Option<String>,
    pub k0: Option<usize>,
    pub lambda: Option<OrdF64>,
    pub ap_kind: Option<String>,
    pub quantile: Option<OrdF64>,
    pub t_max: usize,
    pub convergence: ConvKey,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub nmi: f64,
    pub f_measure: f64,
    pub n_clusters: usize,
    pub n_iterations: usize,
}

/// A dataset ready for clustering: standardized if requested, with its id in
/// the results table.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub id: String,
    pub dataset: Dataset,
}

pub fn prepare_datasets(cfg: &ExperimentConfig) -> Result<Vec<PreparedDataset>> {
    let raw: Vec<(String, Dataset)> = match &cfg.datasets {
        DatasetSource::Generate { seeds, config } => seeds
            .iter()
            .map(|&s| {
                let mut g = config.clone().unwrap_or_default();
                g.seed = s;
                Ok((s.to_string(), generate_dataset(&g)?))
            })
            .collect::<Result<_>>()?,
        DatasetSource::Load { paths } => paths
            .iter()
            .map(|p| Ok((dataset_id(p), load_dataset(p)?)))
            .collect::<Result<_>>()?,
    };
    raw.into_iter()
        .map(|(id, d)| {
            let dataset = if cfg.standardize && !d.standardized {
                standardize(&d)?
            } else {
                d
            };
            if dataset.true_labels.is_none() {
                return Err(Error::InvalidConfig(format!("dataset {id} has no ground-truth labels")));
            }
            Ok(PreparedDataset { id, dataset })
        })
        .collect()
}

fn dataset_id(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Run every cell on one dataset. Discrepancy matrices are computed once per
/// dataset and shared by all AP cells.
pub fn run_cells(d: &Dataset, cells: &[Cell], oracle_seed: u64) -> Result<Vec<Outcome>> {
    let truth = d
        .true_labels
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("dataset has no ground-truth labels".into()))?;
    let kinds: Vec<DiscrepancyKind> = cells
        .iter()
        .filter_map(|c| c.ap_kind.as_deref())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::parse)
        .collect::<Result<_>>()?;
    let sims = if kinds.is_empty() {
        Vec::new()
    } else {
        discrepancy_matrices(d, &kinds)?
    };

    cells
        .iter()
        .map(|c| {
            let (labels, n_clusters, n_iterations) = match c.method {
                Method::Goc | Method::Gpc | Method::Baseline => {
                    let kind: OracleKind = c.oracle.as_deref().unwrap_or("kmeans").parse()?;
                    let oracle = OracleConfig::new(kind).with_seed(oracle_seed);
                    let k0 = c.k0.unwrap_or(1);
                    if c.method == Method::Baseline {
                        let a = baseline_cluster(d, k0, &oracle)?;
                        let k = a.occupied_clusters();
                        (a.labels, k, 0)
                    } else {
                        let mut g = GocConfig::new(k0, c.lambda.map_or(0.0, |l| l.0), oracle);
                        g.t_max = c.t_max;
                        g.convergence = c.convergence.0;
                        let (a, trace) = if c.method == Method::Goc {
                            run_goc(d, None, &g)?
                        } else {
                            run_gpc(d, &g)?
                        };
                        let k = a.occupied_clusters();
                        (a.labels, k, trace.total_iterations)
                    }
                }
                Method::Ap => {
                    let kind: DiscrepancyKind = c.ap_kind.as_deref().unwrap_or("s1").parse()?;
                    let s = &sims[kinds.iter().position(|&k| k == kind).unwrap()];
                    let r = affinity_propagation(s, &ApConfig::new(c.quantile.map_or(0.5, |q| q.0)))?;
                    let k = r.assignment.occupied_clusters();
                    (r.assignment.labels, k, r.iterations)
                }
            };
            Ok(Outcome {
                nmi: nmi(&labels, truth)?,
                f_measure: f_measure(&labels, truth)?,
                n_clusters,
                n_iterations,
            })
        })
        .collect()
}

fn key_row(dataset_id: &str, c: &Cell, stat: &str) -> ResultRow {
    let opt = |v: Option<String>| v.unwrap_or_default();
    ResultRow {
        dataset_id: dataset_id.to_string(),
        method: c.method.as_str().to_string(),
        oracle: opt(c.oracle.clone()),
        k0: opt(c.k0.map(|k| k.to_string())),
        lambda: opt(c.lambda.map(|l| l.0.to_string())),
        ap_kind: opt(c.ap_kind.clone()),
        quantile: opt(c.quantile.map(|q| q.0.to_string())),
        stat: stat.to_string(),
        nmi: 0.0,
        f_measure: 0.0,
        n_clusters: 0.0,
        n_iterations: 0.0,
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        f64::NAN
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

/// Raw rows (one per dataset and cell) followed by `mean` and `sd` rows per
/// cell. `outcomes[i][c]` belongs to dataset `i` and cell `c`.
pub fn results_table(ids: &[String], cells: &[Cell], outcomes: &[Vec<Outcome>]) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for (i, id) in ids.iter().enumerate() {
            let o = outcomes[i][c];
            rows.push(ResultRow {
                nmi: o.nmi,
                f_measure: o.f_measure,
                n_clusters: o.n_clusters as f64,
                n_iterations: o.n_iterations as f64,
                ..key_row(id, cell, "value")
            });
        }
        let col = |f: fn(&Outcome) -> f64| mean_sd(&outcomes.iter().map(|o| f(&o[c])).collect::<Vec<_>>());
        let nmi = col(|o| o.nmi);
        let fm = col(|o| o.f_measure);
        let nc = col(|o| o.n_clusters as f64);
        let it = col(|o| o.n_iterations as f64);
        rows.push(ResultRow {
            nmi: nmi.0,
            f_measure: fm.0,
            n_clusters: nc.0,
            n_iterations: it.0,
            ..key_row("all", cell, "mean")
        });
        rows.push(ResultRow {
            nmi: nmi.1,
            f_measure: fm.1,
            n_clusters: nc.1,
            n_iterations: it.1,
            ..key_row("all", cell, "sd")
        });
    }
    rows
}

/// Run the whole experiment and write `results.csv` into the output
/// directory. Returns the path written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let datasets = prepare_datasets(cfg)?;
    let outcomes = datasets
        .iter()
        .map(|p| run_cells(&p.dataset, &cells, cfg.oracle_seed))
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = datasets.into_iter().map(|p| p.id).collect();
    let rows = results_table(&ids, &cells, &outcomes);
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("results.csv");
    write_results(&path, &rows)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_gen() -> GenConfig {
        GenConfig {
            k_star: 4,
            m: 8,
            ..GenConfig::default()
        }
    }

    fn config(methods: Vec<MethodSpec>, out: &Path) -> ExperimentConfig {
        ExperimentConfig {
            datasets: DatasetSource::Generate {
                seeds: vec![1, 2],
                config: Some(small_gen()),
            },
            methods,
            oracle_seed: 0,
            standardize: true,
            output_dir: out.to_path_buf(),
        }
    }

    fn spec(method: Method) -> MethodSpec {
        MethodSpec {
            method,
            oracle: "kmeans".into(),
            k0: vec![3],
            lambda: vec![0.01],
            ap_kind: vec!["s2".into()],
            quantile: vec![0.5],
            t_max: 20,
            convergence: "exact".into(),
        }
    }

    #[test]
    fn parses_json() {
        let text = r#"{
            "datasets": { "generate": { "seeds": [1, 2] } },
            "methods": [
                { "method": "goc", "oracle": "kmedoids", "k0": [5, 10], "lambda": [0, 0.1] },
                { "method": "ap", "ap_kind": ["s1", "s3"], "quantile": [0.5] }
            ],
            "output_dir": "out"
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.cells().unwrap().len(), 6);
    }

    #[test]
    fn rejects_bad_configs() {
        let out = Path::new("unused");
        assert!(config(vec![], out).validate().is_err());
        let mut c = config(vec![spec(Method::Goc)], out);
        c.datasets = DatasetSource::Generate {
            seeds: vec![3, 3],
            config: None,
        };
        assert!(c.validate().is_err());
        let mut s = spec(Method::Goc);
        s.k0 = vec![0];
        assert!(config(vec![s], out).validate().is_err());
        let mut s = spec(Method::Ap);
        s.ap_kind = vec!["s9".into()];
        assert!(config(vec![s], out).validate().is_err());
    }

    #[test]
    fn output_ignores_method_order() {
        let dir = tempfile::tempdir().unwrap();
        let methods = vec![spec(Method::Ap), spec(Method::Goc), spec(Method::Baseline)];
        let a = run_experiment(&config(methods.clone(), &dir.path().join("a"))).unwrap();
        let rev: Vec<_> = methods.into_iter().rev().collect();
        let b = run_experiment(&config(rev, &dir.path().join("b"))).unwrap();
        let ta = std::fs::read(&a).unwrap();
        assert_eq!(ta, std::fs::read(&b).unwrap());
        let rows = crate::io::read_results(&a).unwrap();
        assert_eq!(rows.len(), 3 * (2 + 2));
        assert_eq!(rows[0].method, "goc");
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.nmi) || r.stat == "sd"));
    }

    #[test]
    fn aggregates_use_sample_sd() {
        assert_eq!(mean_sd(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert!(mean_sd(&[1.0]).1.is_nan());
    }
}
