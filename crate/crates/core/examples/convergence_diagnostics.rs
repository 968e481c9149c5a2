//! Per-iteration convergence scores of a GOC run: agreement with the final
//! labels (η1), squared candidate movement (η2) and NMI relative to the
//! final NMI (η3).

use goclust::datagen::{generate_dataset, GenConfig};
use goclust::goc::{run_goc, Convergence, GocConfig};
use goclust::metrics::eta_scores;
use goclust::oracles::{OracleConfig, OracleKind};
use goclust::uncertainty::standardize;

fn main() -> goclust::Result<()> {
    let d = standardize(&generate_dataset(&GenConfig::with_seed(4))?)?;
    for convergence in [Convergence::ExactCandidates, Convergence::Tol(1e-6)] {
        let cfg = GocConfig {
            t_max: 50,
            convergence,
            ..GocConfig::new(50, 0.01, OracleConfig::new(OracleKind::Kmeans))
        };
        let (a, trace) = run_goc(&d, None, &cfg)?;
        let last = trace.iterations.last().expect("at least one iteration");
        let eta = eta_scores(&trace, &a.labels, &last.features, d.true_labels.as_deref())?;

        println!("{convergence:?}: {} iterations", trace.total_iterations);
        println!("   t   K   objective   moved   eta1     eta2      eta3");
        for (rec, e) in trace.iterations.iter().zip(&eta) {
            println!(
                "{:4} {:3} {:11.4} {:7} {:6.3} {:9.2e} {:>7}",
                rec.t,
                rec.k,
                rec.objective,
                rec.changed_candidates,
                e.eta1,
                e.eta2,
                e.eta3.map_or("-".into(), |v| format!("{v:.3}"))
            );
        }
        println!();
    }
    Ok(())
}
