//! GOC against the representative-vector baseline on one generated dataset.

use goclust::baselines::baseline_cluster;
use goclust::datagen::{generate_dataset, GenConfig};
use goclust::goc::{run_goc, GocConfig};
use goclust::metrics::{f_measure, nmi};
use goclust::oracles::{OracleConfig, OracleKind};
use goclust::uncertainty::standardize;

fn main() -> goclust::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let d = standardize(&generate_dataset(&GenConfig::with_seed(seed))?)?;
    let truth = d.true_labels.as_deref().expect("generated data is labelled");
    let oracle = OracleConfig::new(OracleKind::Kmeans);

    let base = baseline_cluster(&d, 50, &oracle)?;
    println!(
        "baseline  K=50: nmi {:.3}  F {:.3}",
        nmi(&base.labels, truth)?,
        f_measure(&base.labels, truth)?
    );

    for lambda in [0.0, 0.01, 0.1, 1.0] {
        let cfg = GocConfig {
            t_max: 50,
            ..GocConfig::new(50, lambda, oracle)
        };
        let (a, trace) = run_goc(&d, None, &cfg)?;
        println!(
            "goc λ={lambda:<5} nmi {:.3}  F {:.3}  clusters {:2}  iterations {:2}{}",
            nmi(&a.labels, truth)?,
            f_measure(&a.labels, truth)?,
            a.num_clusters,
            trace.total_iterations,
            if trace.converged { "" } else { " (not converged)" }
        );
    }
    Ok(())
}
