//! Optimistic and pessimistic candidate updates side by side: the number of
//! clusters per iteration under each.

use goclust::datagen::{generate_dataset, GenConfig};
use goclust::goc::{run_goc, run_gpc, GocConfig};
use goclust::oracles::{OracleConfig, OracleKind};
use goclust::uncertainty::standardize;

fn main() -> goclust::Result<()> {
    let d = standardize(&generate_dataset(&GenConfig::with_seed(1))?)?;
    let cfg = GocConfig {
        t_max: 50,
        ..GocConfig::new(50, 0.01, OracleConfig::new(OracleKind::Kmeans))
    };
    let (_, goc) = run_goc(&d, None, &cfg)?;
    let (_, gpc) = run_gpc(&d, &cfg)?;
    let ks = |t: &goclust::GocTrace| t.iterations.iter().map(|r| r.k).collect::<Vec<_>>();
    println!("optimistic  K(t): {:?}", ks(&goc));
    println!("pessimistic K(t): {:?}", ks(&gpc));
    println!(
        "pessimistic run {} after {} iterations",
        if gpc.converged { "converged" } else { "stopped" },
        gpc.total_iterations
    );
    Ok(())
}
