use std::collections::BTreeMap;

use goclust::baselines::{affinity_propagation, discrepancy, discrepancy_matrix, ApConfig, DiscrepancyKind};
use goclust::datagen::{generate_detailed, GenConfig};
use goclust::goc::{run_goc, update_candidates, GocConfig, KSchedule, Mode};
use goclust::io::{load_dataset, save_dataset};
use goclust::metrics::{f_measure, nmi};
use goclust::oracles::{oracle_cluster, OracleConfig, OracleKind};
use goclust::types::{validate_dataset, Dataset, EmpiricalFeatureSet};
use goclust::uncertainty::coverage_gap;
use goclust::Matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labels(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=k, n)
}

fn label_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..25, 1usize..7, 1usize..7).prop_flat_map(|(n, a, b)| (labels(n, a), labels(n, b)))
}

fn point_set(max_m: usize) -> impl Strategy<Value = EmpiricalFeatureSet> {
    (1..=max_m, -5.0f64..5.0).prop_flat_map(|(m, shift)| {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), m).prop_map(move |rows| {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.iter().map(|x| x + shift).collect()).collect();
            EmpiricalFeatureSet::unpenalized(1, Matrix::from_rows(&rows)).unwrap()
        })
    })
}

fn same_partition(u: &[usize], v: &[usize]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    u.iter().zip(v).all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *bwd.entry(y).or_insert(x) == x)
}

/// Every set partition of `0..n` as a 1-based restricted growth string.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let top = prefix.iter().copied().max().unwrap_or(0);
        for l in 1..=top + 1 {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

proptest! {
    #[test]
    fn scores_lie_in_unit_interval((u, v) in label_pair()) {
        for s in [nmi(&u, &v).unwrap(), f_measure(&u, &v).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn nmi_is_symmetric((u, v) in label_pair()) {
        prop_assert!((nmi(&u, &v).unwrap() - nmi(&v, &u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn scores_ignore_relabeling((u, v) in label_pair(), shift in 1usize..20) {
        let ru: Vec<usize> = u.iter().map(|&l| (l * 7 + shift) % 50 + 1).collect();
        let rv: Vec<usize> = v.iter().map(|&l| 60 - l).collect();
        prop_assert!((nmi(&ru, &rv).unwrap() - nmi(&u, &v).unwrap()).abs() < 1e-12);
        prop_assert!((f_measure(&ru, &rv).unwrap() - f_measure(&u, &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn metric_triangle_inequalities(a in point_set(6), b in point_set(6), c in point_set(6)) {
        for kind in [
            DiscrepancyKind::S1,
            DiscrepancyKind::S3,
            DiscrepancyKind::Hausdorff { hausdorff_standard: true },
        ] {
            let lhs = discrepancy(&a, &c, kind);
            prop_assert!(lhs <= discrepancy(&a, &b, kind) + discrepancy(&b, &c, kind) + 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn discrepancies_symmetric_and_ordered(a in point_set(6), b in point_set(6)) {
        for kind in [DiscrepancyKind::S1, DiscrepancyKind::S2, DiscrepancyKind::S3] {
            prop_assert_eq!(discrepancy(&a, &b, kind), discrepancy(&b, &a, kind));
        }
        prop_assert!(discrepancy(&a, &b, DiscrepancyKind::S2) <= discrepancy(&a, &b, DiscrepancyKind::S1));
    }

    #[test]
    fn coverage_gap_never_grows(set in point_set(8), extra in point_set(8), reference in point_set(30)) {
        let before = coverage_gap(&set, &reference.candidates).unwrap();
        let mut grown = set.candidates.clone();
        for r in extra.candidates.rows() {
            grown.push_row(r);
        }
        let grown = EmpiricalFeatureSet::unpenalized(1, grown).unwrap();
        prop_assert!(coverage_gap(&grown, &reference.candidates).unwrap() <= before);
    }

    #[test]
    fn dataset_file_round_trip(
        sets in prop::collection::vec(
            prop::collection::vec((prop::collection::vec(prop::num::f64::NORMAL, 3), 0.0f64..1e6), 1..5),
            1..6,
        ),
        with_truth in any::<bool>(),
    ) {
        let n = sets.len();
        let sets: Vec<EmpiricalFeatureSet> = sets
            .into_iter()
            .enumerate()
            .map(|(i, rows)| {
                let feats: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
                let pens = rows.iter().map(|r| r.1).collect();
                EmpiricalFeatureSet::new(i + 1, Matrix::from_rows(&feats), pens).unwrap()
            })
            .collect();
        let truth = with_truth.then(|| (0..n).map(|i| i % 3 + 1).collect());
        let d = Dataset::new(sets, truth).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&d, dir.path()).unwrap();
        prop_assert_eq!(load_dataset(dir.path()).unwrap(), d);
    }
}

#[test]
fn scores_are_one_exactly_for_equal_partitions() {
    for n in 1..=6 {
        let all = partitions(n);
        for u in &all {
            for v in &all {
                let same = same_partition(u, v);
                let f = f_measure(u, v).unwrap();
                assert_eq!(f == 1.0, same, "f {u:?} {v:?}");
                // NMI of two single-cluster partitions is defined as 0.
                let trivial = u.iter().all(|&l| l == 1) && v.iter().all(|&l| l == 1);
                if !trivial {
                    assert_eq!(nmi(u, v).unwrap() == 1.0, same, "nmi {u:?} {v:?}");
                }
            }
        }
    }
}

#[test]
fn f_measure_is_not_symmetric() {
    let (u, v) = ([1, 1, 2, 3], [1, 1, 1, 2]);
    assert_ne!(f_measure(&u, &v).unwrap(), f_measure(&v, &u).unwrap());
}

/// Net similarity of an exemplar set: every point takes its best exemplar,
/// exemplars take the preference.
fn net_similarity(s: &Matrix, pref: f64, exemplars: &[usize]) -> f64 {
    (0..s.nrows())
        .map(|i| {
            if exemplars.contains(&i) {
                pref
            } else {
                exemplars.iter().map(|&e| s[(i, e)]).fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .sum()
}

#[test]
fn affinity_propagation_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 200;
    let mut agree = 0;
    for _ in 0..trials {
        let n = rng.random_range(2..=7);
        let groups = rng.random_range(1..=3);
        let sets: Vec<EmpiricalFeatureSet> = (0..n)
            .map(|i| {
                let g = (i % groups) as f64 * 5.0;
                let row = [g + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                EmpiricalFeatureSet::unpenalized(i + 1, Matrix::from_rows(&[row])).unwrap()
            })
            .collect();
        let d = Dataset::new(sets, None).unwrap();
        let s = discrepancy_matrix(&d, DiscrepancyKind::S2).unwrap();
        let q = [0.1, 0.5, 0.9][rng.random_range(0..3)];
        let r = affinity_propagation(&s, &ApConfig::new(q)).unwrap();
        let best = (1u32..(1 << n))
            .map(|mask| {
                let ex: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                net_similarity(&s.values, r.preference, &ex)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let got = net_similarity(&s.values, r.preference, &r.exemplars);
        if got >= best - 1e-9 {
            agree += 1;
        } else {
            eprintln!("AP suboptimal: n={n} q={q} got {got} best {best}");
        }
    }
    assert!(agree * 100 >= trials * 95, "{agree}/{trials} optimal");
}

#[test]
fn step_three_keeps_candidates_and_descends_with_zero_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(2..=15);
        let sets: Vec<EmpiricalFeatureSet> = (0..n)
            .map(|i| {
                let m = rng.random_range(1..=6);
                let rows: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.random_range(-1.0..1.0); 2]).collect();
                EmpiricalFeatureSet::unpenalized(i + 1, Matrix::from_rows(&rows)).unwrap()
            })
            .collect();
        let d = Dataset::new(sets, None).unwrap();
        let sel: Vec<usize> = d.sets.iter().map(|s| rng.random_range(0..s.len())).collect();
        let xi = d.features_at(&sel);
        let k = rng.random_range(1..=3);
        let temp: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let up = update_candidates(&d, &xi, &temp, k, 0.0, Mode::Pessimistic);
        for (i, &j) in up.selected.iter().enumerate() {
            assert_eq!(up.features.row(i), d.sets[i].candidate(j));
        }
        assert!(up.labels.iter().all(|&l| l >= 1 && l <= k));
    }
}

fn small_generated(seed: u64) -> Dataset {
    let cfg = GenConfig {
        k_star: 12,
        m: 12,
        seed,
        ..GenConfig::default()
    };
    goclust::uncertainty::standardize(&generate_detailed(&cfg).unwrap().dataset).unwrap()
}

#[test]
fn generated_datasets_validate() {
    for seed in 0..20 {
        let cfg = GenConfig {
            k_star: 7,
            m: 5,
            seed,
            ..GenConfig::default()
        };
        let g = generate_detailed(&cfg).unwrap();
        validate_dataset(&g.dataset).unwrap();
        for (model, cov) in g.models.iter().zip(&g.covariates) {
            assert!(cov.rows().all(|z| model.contains(z)));
        }
    }
    validate_dataset(&generate_detailed(&GenConfig::with_seed(77)).unwrap().dataset).unwrap();
}

fn silhouette(x: &Matrix, labels: &[usize]) -> f64 {
    let n = x.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for j in 0..n {
            if i != j {
                let e = sums.entry(labels[j]).or_insert((0.0, 0));
                e.0 += goclust::matrix::dist(x.row(i), x.row(j));
                e.1 += 1;
            }
        }
        let own = sums.get(&labels[i]).copied();
        let Some((a_sum, a_n)) = own else { continue };
        let a = a_sum / a_n as f64;
        let b = sums
            .iter()
            .filter(|(&l, _)| l != labels[i])
            .map(|(_, &(s, c))| s / c as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

#[test]
fn true_features_are_well_separated() {
    let mut good = 0;
    for seed in 1..=10 {
        let g = generate_detailed(&GenConfig::with_seed(seed)).unwrap();
        let rows: Vec<Vec<f64>> = g
            .true_covariates
            .rows()
            .map(|z| goclust::datagen::toy_transform(z).unwrap().to_vec())
            .collect();
        let s = silhouette(&Matrix::from_rows(&rows), g.dataset.true_labels.as_ref().unwrap());
        if s > 0.5 {
            good += 1;
        }
    }
    assert!(good >= 9, "{good}/10 seeds with silhouette > 0.5");
}

#[test]
fn shrink_schedule_never_grows_k_and_runs_reproduce() {
    for seed in 1..=3 {
        let d = small_generated(seed);
        let cfg = GocConfig {
            t_max: 30,
            ..GocConfig::new(15, 0.01, OracleConfig::new(OracleKind::Kmeans))
        };
        let (a, trace) = run_goc(&d, None, &cfg).unwrap();
        assert!(trace.iterations.windows(2).all(|w| w[1].k <= w[0].k));
        let (b, again) = run_goc(&d, None, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace, again);
    }
}

#[test]
fn zero_lambda_ignores_penalties() {
    let d = small_generated(4);
    let init = goclust::goc::initial_selection(&d);
    let mut other = d.clone();
    for s in &mut other.sets {
        s.penalties.iter_mut().enumerate().for_each(|(j, p)| *p = (j % 5) as f64);
    }
    let cfg = GocConfig {
        k_schedule: KSchedule::ShrinkNonsingleton,
        t_max: 30,
        ..GocConfig::new(10, 0.0, OracleConfig::new(OracleKind::Kmeans))
    };
    let (a, _) = run_goc(&d, Some(&init), &cfg).unwrap();
    let (b, _) = run_goc(&other, Some(&init), &cfg).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.selected, b.selected);
}

#[test]
fn oracles_are_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.random_range(6..=30);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i % 3) as f64 * 4.0 + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let x = Matrix::from_rows(&rows);
        let px = x.select_rows(&perm);
        let init = Matrix::from_rows(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![8.0, 0.0]]);
        for (kind, init) in [
            (OracleKind::Kmeans, Some(&init)),
            (OracleKind::GmmEii, Some(&init)),
            (OracleKind::Kmedoids, None),
        ] {
            let cfg = OracleConfig::new(kind);
            let a = oracle_cluster(&x, 3, init, &cfg).unwrap();
            let b = oracle_cluster(&px, 3, init, &cfg).unwrap();
            let back: Vec<usize> = perm.iter().map(|&i| a.labels[i]).collect();
            assert!(same_partition(&back, &b.labels), "{kind:?}");
        }
    }
}
