//! Affinity propagation over the three set discrepancies at several
//! preference quantiles.

use goclust::baselines::{affinity_propagation, discrepancy_matrices, ApConfig, DiscrepancyKind};
use goclust::datagen::{generate_dataset, GenConfig};
use goclust::metrics::{f_measure, nmi};
use goclust::uncertainty::standardize;

fn main() -> goclust::Result<()> {
    // A smaller benchmark keeps the O(n² m²) discrepancy pass quick.
    let cfg = GenConfig {
        k_star: 20,
        m: 51,
        ..GenConfig::with_seed(3)
    };
    let d = standardize(&generate_dataset(&cfg)?)?;
    let truth = d.true_labels.as_deref().expect("labelled");

    let kinds = [DiscrepancyKind::S1, DiscrepancyKind::S2, DiscrepancyKind::S3];
    for s in discrepancy_matrices(&d, &kinds)? {
        for q in [0.5, 0.7, 0.9] {
            let r = affinity_propagation(&s, &ApConfig::new(q))?;
            println!(
                "{} q={q}: {:2} clusters, nmi {:.3}, F {:.3}, {} iterations",
                s.kind.as_str(),
                r.assignment.num_clusters,
                nmi(&r.assignment.labels, truth)?,
                f_measure(&r.assignment.labels, truth)?,
                r.iterations
            );
        }
    }
    Ok(())
}
