//! Generate the synthetic benchmark, write it to disk and read it back.
//!
//! ```text
//! cargo run --example generate_dataset -- [SEED] [OUT_DIR]
//! ```

use std::path::PathBuf;

use goclust::datagen::{generate_detailed, GenConfig};
use goclust::io::{load_dataset, save_dataset};

fn main() -> goclust::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let out = args
        .next()
        .map_or_else(|| std::env::temp_dir().join(format!("goclust-seed{seed}")), PathBuf::from);

    let g = generate_detailed(&GenConfig::with_seed(seed))?;
    let d = &g.dataset;
    println!(
        "{} individuals in {} true clusters, {} candidates each, feature dim {}",
        d.len(),
        d.num_true_clusters().unwrap_or(0),
        d.sets[0].len(),
        d.feature_dim
    );

    let first = &d.sets[0];
    let (lo, hi) = first
        .penalties
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    println!("individual 1: observed covariates {:?}", g.models[0].center());
    println!("  candidate mean (E, L, Lz) = {:?}, penalties in [{lo:.3}, {hi:.3}]", first.mean());

    save_dataset(d, &out)?;
    let back = load_dataset(&out)?;
    assert_eq!(&back, d);
    println!("wrote and re-read {}", out.display());
    Ok(())
}
