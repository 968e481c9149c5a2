//! The same GOC run with each clustering oracle, including BIC selection of
//! the number of mixture components.

use goclust::baselines::baseline_cluster;
use goclust::datagen::{generate_dataset, GenConfig};
use goclust::goc::{run_goc, GocConfig};
use goclust::metrics::nmi;
use goclust::oracles::{OracleConfig, OracleKind};
use goclust::uncertainty::standardize;

fn main() -> goclust::Result<()> {
    let d = standardize(&generate_dataset(&GenConfig::with_seed(2))?)?;
    let truth = d.true_labels.as_deref().expect("labelled");

    println!("{:<12} {:>9} {:>9} {:>9}", "oracle", "baseline", "goc", "clusters");
    for kind in [
        OracleKind::Kmeans,
        OracleKind::Kmedoids,
        OracleKind::GmmEii,
        OracleKind::GmmEiiBic,
    ] {
        let oracle = OracleConfig::new(kind);
        let base = baseline_cluster(&d, 50, &oracle)?;
        let cfg = GocConfig {
            t_max: 50,
            ..GocConfig::new(50, 0.01, oracle)
        };
        let (a, _) = run_goc(&d, None, &cfg)?;
        println!(
            "{:<12} {:>9.3} {:>9.3} {:>9}",
            kind.as_str(),
            nmi(&base.labels, truth)?,
            nmi(&a.labels, truth)?,
            a.num_clusters
        );
    }
    Ok(())
}
