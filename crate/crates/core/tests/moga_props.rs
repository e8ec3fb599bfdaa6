use frac_smith::experiment::hypervolume;
use frac_smith::metrics::Objectives;
use frac_smith::moga::{dominates, evolve, evolve_with, non_dominated_sort, GAConfig};
use proptest::prelude::*;

/// Peels fronts by repeated full scans.
fn brute_force_fronts(pts: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..pts.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&pts[j], &pts[i]))).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn sorted(mut fronts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    fronts.iter_mut().for_each(|f| f.sort_unstable());
    fronts
}

/// Points on a coarse integer lattice so that ties and duplicates occur.
fn point_sets() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0u8..30, 0u8..30).prop_map(|(a, b)| [a as f64, b as f64]), 0..=200)
}

fn quadratic(g: &[f64]) -> Objectives {
    Objectives { j1_itae: g[0] * g[0] + g[1] * g[1], j2_energy: (g[0] - 1.0).powi(2) + g[1] * g[1], penalized: false }
}

fn small_cfg(seed: u64) -> GAConfig {
    GAConfig { bounds: vec![[-2.0, 3.0], [-1.0, 1.0]], rng_seed: seed, ..GAConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sort_matches_brute_force(pts in point_sets()) {
        prop_assert_eq!(sorted(non_dominated_sort(&pts)), sorted(brute_force_fronts(&pts)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fronts_are_non_dominated_and_in_bounds(seed in any::<u64>()) {
        let cfg = small_cfg(seed);
        let front = evolve(quadratic, &cfg).unwrap();
        prop_assert!(!front.is_empty());
        for a in &front.points {
            for (g, b) in a.genes.iter().zip(&cfg.bounds) {
                prop_assert!(*g >= b[0] && *g <= b[1]);
            }
            for b in &front.points {
                prop_assert!(!dominates(&b.pair(), &a.pair()));
            }
        }
    }

    #[test]
    fn archive_hypervolume_never_drops(seed in any::<u64>()) {
        let reference = [20.0, 20.0];
        let mut hv = Vec::new();
        evolve_with(quadratic, &small_cfg(seed), |_, archive| {
            let pts: Vec<[f64; 2]> = archive.points.iter().map(|p| p.pair()).filter(|p| p[0] < 20.0 && p[1] < 20.0).collect();
            hv.push(hypervolume(&pts, reference).unwrap());
        })
        .unwrap();
        prop_assert_eq!(hv.len(), small_cfg(seed).generations + 1);
        for w in hv.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", hv);
        }
    }
}
