use proptest::prelude::*;

use extremal_walks::certificates::{build_dyadic_witness, certify_extremal, dyadic_grid, DyadicClock};
use extremal_walks::closedform::wendel_f64;
use extremal_walks::estimate::wilson_interval;
use extremal_walks::hull::{brute_force_classify, classify_origin, separating_margin, VerdictKind};
use extremal_walks::stochastic::{sample_brownian, sample_lattice_walk, sample_poisson_times, RngStream};

fn cloud(max_dim: usize, max_points: usize, lattice: bool) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_dim, 1..=max_points).prop_flat_map(move |(n, m)| {
        let coord = if lattice {
            (-2i32..=2).prop_map(f64::from).boxed()
        } else {
            (-10.0f64..10.0).boxed()
        };
        prop::collection::vec(prop::collection::vec(coord, n), m)
    })
}

fn instances() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop_oneof![cloud(4, 10, true), cloud(4, 10, false)]
}

/// Binomial coefficient sum for the Wendel probability, in floating point.
fn wendel_oracle(n: usize, big_n: usize) -> f64 {
    let mut c = 1.0f64;
    let mut sum = 0.0;
    for k in 0..n.min(big_n) {
        sum += c;
        c = c * (big_n - 1 - k) as f64 / (k + 1) as f64;
    }
    sum / 2f64.powi(big_n as i32 - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), stream in any::<u64>(), alpha in 0.0f64..80.0) {
        let draw = || {
            let mut rng = RngStream::new(seed, stream).rng();
            let times = sample_poisson_times(alpha, &mut rng).unwrap();
            let mut grid = vec![0.0];
            grid.extend(times.event_times.iter().copied().filter(|t| *t > 0.0));
            grid.dedup();
            (times.clone(), sample_brownian(2, &grid, &mut rng).unwrap(), sample_lattice_walk(3, 40, &mut rng).unwrap())
        };
        prop_assert_eq!(draw(), draw());
    }

    #[test]
    fn lattice_parity(seed in any::<u64>(), n in 1usize..8, steps in 0usize..300) {
        let walk = sample_lattice_walk(n, steps, &mut RngStream::new(seed, 0).rng()).unwrap();
        let parity: i64 = walk.points[steps].iter().map(|x| (*x as i64).rem_euclid(2)).sum();
        prop_assert_eq!(parity.rem_euclid(2), (steps % 2) as i64);
    }

    #[test]
    fn hull_agrees_with_oracle(points in instances()) {
        let fast = classify_origin(&points, None).unwrap();
        let exact = brute_force_classify(&points).unwrap();
        if fast.kind() != VerdictKind::Ambiguous && exact.kind() != VerdictKind::Ambiguous {
            prop_assert_eq!(fast.kind(), exact.kind(), "{:?}", points);
        }
        if let Some(w) = fast.witness() {
            prop_assert!(separating_margin(&points, w).unwrap() >= -fast.tolerance);
        }
    }

    #[test]
    fn hull_scale_invariance(points in instances(), log_c in -8.0f64..8.0) {
        let c = 10f64.powf(log_c);
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|x| x * c).collect()).collect();
        prop_assert_eq!(classify_origin(&points, None).unwrap().kind(), classify_origin(&scaled, None).unwrap().kind());
    }

    #[test]
    fn adding_a_point_never_restores_extremality(points in instances(), extra in prop::collection::vec(-2i32..=2, 4)) {
        let n = points[0].len();
        let before = classify_origin(&points, None).unwrap().kind();
        let mut more = points.clone();
        more.push(extra[..n].iter().map(|&x| f64::from(x)).collect());
        let after = classify_origin(&more, None).unwrap().kind();
        prop_assert!(!(before == VerdictKind::Interior && after == VerdictKind::Extremal));
    }

    #[test]
    fn certificates_are_sound(seed in any::<u64>(), n in 2usize..30, m in 1usize..5, alpha in 1.0f64..60.0) {
        let mut rng = RngStream::new(seed, 0).rng();
        let times = sample_poisson_times(alpha, &mut rng).unwrap();
        let path = sample_brownian(n, &dyadic_grid(m, DyadicClock::Unit, &times.event_times), &mut rng).unwrap();
        let w = build_dyadic_witness(&path, m, DyadicClock::Unit).unwrap();
        if let Some(v) = certify_extremal(path.walk_points(), &w) {
            prop_assert!(separating_margin(path.walk_points(), &v).unwrap() > 0.0);
            prop_assert_ne!(classify_origin(path.walk_points(), None).unwrap().kind(), VerdictKind::Interior);
        }
    }

    #[test]
    fn wendel_matches_binomial_sum(n in 1usize..12, big_n in 1usize..60) {
        let exact = wendel_f64(n, big_n).unwrap();
        prop_assert!((exact - wendel_oracle(n, big_n)).abs() <= 1e-13);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0, z in 0.5f64..5.0) {
        let successes = (frac * trials as f64).floor() as u64;
        let (lo, hi) = wilson_interval(successes, trials, z);
        let p = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}

#[test]
fn degenerate_configurations_match_oracle() {
    let cases: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
        vec![vec![1.0, 1.0], vec![-2.0, -2.0], vec![3.0, 3.0]],
        vec![
            vec![1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, -1.0, 0.0],
        ],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
        vec![vec![1.0, 2.0], vec![1.0, 2.0]],
    ];
    for pts in cases {
        assert_eq!(
            classify_origin(&pts, None).unwrap().kind(),
            brute_force_classify(&pts).unwrap().kind(),
            "{pts:?}"
        );
    }
}
