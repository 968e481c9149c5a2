//! A small sweep over λ and K0 written as a results table, the programmatic
//! equivalent of `goclust experiment --config FILE`.

use goclust::experiment::{run_experiment, DatasetSource, ExperimentConfig, Method, MethodSpec};
use goclust::datagen::GenConfig;
use goclust::io::read_results;

fn main() -> goclust::Result<()> {
    let spec = |method, k0: Vec<usize>, lambda: Vec<f64>| MethodSpec {
        method,
        oracle: "kmeans".into(),
        k0,
        lambda,
        ap_kind: vec![],
        quantile: vec![],
        t_max: 50,
        convergence: "exact".into(),
    };
    let cfg = ExperimentConfig {
        datasets: DatasetSource::Generate {
            seeds: vec![1, 2, 3],
            config: Some(GenConfig {
                k_star: 20,
                ..GenConfig::default()
            }),
        },
        methods: vec![
            spec(Method::Goc, vec![10, 20], vec![0.0, 0.01, 0.1]),
            spec(Method::Baseline, vec![10, 20], vec![]),
        ],
        oracle_seed: 0,
        standardize: true,
        output_dir: std::env::temp_dir().join("goclust-sweep"),
    };
    let path = run_experiment(&cfg)?;
    println!("{:<9} {:>3} {:>6}  {:>15}  {:>15}", "method", "K0", "lambda", "nmi", "F");
    let rows = read_results(&path)?;
    for mean in rows.iter().filter(|r| r.stat == "mean") {
        let sd = rows
            .iter()
            .find(|r| r.stat == "sd" && r.method == mean.method && r.k0 == mean.k0 && r.lambda == mean.lambda)
            .expect("sd row follows mean row");
        println!(
            "{:<9} {:>3} {:>6}  {:.3} ± {:.3}    {:.3} ± {:.3}",
            mean.method, mean.k0, mean.lambda, mean.nmi, sd.nmi, mean.f_measure, sd.f_measure
        );
    }
    println!("full table: {}", path.display());
    Ok(())
}
