//! Command-line driver. Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::baselines::{affinity_propagation, baseline_cluster, discrepancy_matrix, ApConfig, DiscrepancyKind};
use crate::datagen::{generate_dataset, GenConfig};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::goc::{run_goc, run_gpc, Convergence, GocConfig};
use crate::io::{load_dataset, read_labels, save_dataset, trace_path, write_assignment, write_matrix, write_trace};
use crate::metrics::{f_measure, nmi};
use crate::oracles::{OracleConfig, OracleKind};
use crate::types::Dataset;
use crate::uncertainty::standardize;

#[derive(Debug, Parser)]
#[command(name = "goclust", version, about = "Clustering with empirical feature uncertainty sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClusterMethod {
    Goc,
    Gpc,
    Baseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleArg {
    Kmeans,
    Kmedoids,
    #[value(name = "gmm_eii", alias = "gmm")]
    GmmEii,
    #[value(name = "gmm_eii_bic", alias = "gmm_bic")]
    GmmEiiBic,
}

impl From<OracleArg> for OracleKind {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Kmeans => Self::Kmeans,
            OracleArg::Kmedoids => Self::Kmedoids,
            OracleArg::GmmEii => Self::GmmEii,
            OracleArg::GmmEiiBic => Self::GmmEiiBic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    S1,
    S2,
    S3,
    #[value(name = "s3std")]
    S3Std,
}

impl From<KindArg> for DiscrepancyKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::S1 => Self::S1,
            KindArg::S2 => Self::S2,
            KindArg::S3 => Self::S3,
            KindArg::S3Std => Self::Hausdorff {
                hausdorff_standard: true,
            },
        }
    }
}

fn nonneg_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number >= 0, got `{s}`")),
    }
}

fn unit_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("expected a number in [0, 1], got `{s}`")),
    }
}

fn convergence(s: &str) -> std::result::Result<Convergence, String> {
    match s.parse::<Convergence>() {
        Ok(Convergence::Tol(e)) if !(e > 0.0) => Err("tolerance must be > 0".into()),
        Ok(c) => Ok(c),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of true clusters.
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        k_star: u64,
        /// Candidates per individual.
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
    },
    /// Cluster a dataset; writes an assignment file and, for goc/gpc, a trace
    /// file next to it.
    Cluster {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: ClusterMethod,
        #[arg(long, value_enum, default_value = "kmeans")]
        oracle: OracleArg,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k0: u64,
        #[arg(long, default_value_t = 0.01, value_parser = nonneg_f64)]
        lambda: f64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        max_iter: u64,
        /// `exact` or `tol:EPS`.
        #[arg(long, default_value = "exact", value_parser = convergence)]
        convergence: Convergence,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_standardize: bool,
    },
    /// Compare a predicted assignment with the truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Affinity propagation over set discrepancies.
    Ap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0.5, value_parser = unit_f64)]
        quantile: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the similarity matrix.
        #[arg(long)]
        similarity_out: Option<PathBuf>,
        #[arg(long)]
        no_standardize: bool,
    },
    /// Run a JSON-described sweep.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidConfig(_) => 2,
                _ => 1,
            }
        }
    }
}

fn prepared(input: &PathBuf, no_standardize: bool) -> Result<Dataset> {
    let d = load_dataset(input)?;
    if no_standardize || d.standardized {
        Ok(d)
    } else {
        standardize(&d)
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Generate { seed, out: dir, k_star, m } => {
            let cfg = GenConfig {
                k_star: k_star as usize,
                m: m as usize,
                seed,
                ..GenConfig::default()
            };
            let d = generate_dataset(&cfg)?;
            save_dataset(&d, &dir)?;
            writeln!(out, "wrote {} individuals to {}", d.len(), dir.display())?;
        }
        Command::Cluster {
            input,
            method,
            oracle,
            k0,
            lambda,
            max_iter,
            convergence,
            seed,
            out: file,
            no_standardize,
        } => {
            let d = prepared(&input, no_standardize)?;
            let oracle = OracleConfig::new(oracle.into()).with_seed(seed);
            let k0 = k0 as usize;
            let (a, trace) = match method {
                ClusterMethod::Baseline => (baseline_cluster(&d, k0, &oracle)?, None),
                ClusterMethod::Goc | ClusterMethod::Gpc => {
                    let mut cfg = GocConfig::new(k0, lambda, oracle);
                    cfg.t_max = max_iter as usize;
                    cfg.convergence = convergence;
                    let (a, t) = if matches!(method, ClusterMethod::Goc) {
                        run_goc(&d, None, &cfg)?
                    } else {
                        run_gpc(&d, &cfg)?
                    };
                    (a, Some(t))
                }
            };
            write_assignment(&file, &a)?;
            write!(out, "wrote {} rows to {}", a.labels.len(), file.display())?;
            if let Some(t) = trace {
                let tp = trace_path(&file);
                write_trace(&tp, &t)?;
                write!(
                    out,
                    " and {} iterations to {} ({})",
                    t.total_iterations,
                    tp.display(),
                    if t.converged { "converged" } else { "not converged" }
                )?;
            }
            writeln!(out, "; {} clusters", a.occupied_clusters())?;
        }
        Command::Evaluate { pred, truth } => {
            let p = read_labels(&pred)?;
            let t = read_labels(&truth)?;
            let k = p.iter().collect::<std::collections::BTreeSet<_>>().len();
            writeln!(out, "nmi {:?}", nmi(&p, &t)?)?;
            writeln!(out, "f_measure {:?}", f_measure(&p, &t)?)?;
            writeln!(out, "n_clusters {k}")?;
        }
        Command::Ap {
            input,
            kind,
            quantile,
            out: file,
            similarity_out,
            no_standardize,
        } => {
            let d = prepared(&input, no_standardize)?;
            let s = discrepancy_matrix(&d, kind.into())?;
            if let Some(p) = similarity_out {
                write_matrix(&p, &s.values)?;
            }
            let r = affinity_propagation(&s, &ApConfig::new(quantile))?;
            write_assignment(&file, &r.assignment)?;
            writeln!(
                out,
                "wrote {} rows to {}; {} clusters after {} iterations{}",
                r.assignment.labels.len(),
                file.display(),
                r.assignment.occupied_clusters(),
                r.iterations,
                if r.converged { "" } else { " (not converged)" }
            )?;
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&config)?)?;
            let path = run_experiment(&cfg)?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}
