use extremal_walks::closedform::{one_dimensional_extremal_probability, wendel_f64};
use extremal_walks::error::Result;
use extremal_walks::experiments::threshold::DEFAULT_MAX_PROBES;
use extremal_walks::experiments::validate::{validate, CheckStatus, ValidateConfig};
use extremal_walks::experiments::{estimate_extremal_probability, find_alpha_half, RunOptions};
use extremal_walks::sphere::{estimate_covering_mean, CoveringConfig};

/// Wendel sum with the upper index off by one.
fn tampered_wendel(n: usize, big_n: usize) -> Result<f64> {
    wendel_f64(n + 1, big_n)
}

#[test]
fn tampered_wendel_fails_the_closedform_suite() {
    let opts = RunOptions::default();
    let honest = validate("closedform", &ValidateConfig::new(21, opts)).unwrap();
    assert!(honest.passed(), "{:#?}", honest.failures());
    let config = ValidateConfig {
        wendel: tampered_wendel,
        ..ValidateConfig::new(21, opts)
    };
    let report = validate("closedform", &config).unwrap();
    let wendel_check = report
        .outcomes
        .iter()
        .find(|o| o.name == "wendel vs Gaussian clouds")
        .unwrap();
    assert_eq!(wendel_check.status, CheckStatus::Fail);
}

#[test]
fn one_dimensional_bracket_agrees_with_grid_scan() {
    let opts = RunOptions::default();
    let bracket = find_alpha_half(1, 10_000, 8, DEFAULT_MAX_PROBES, &opts).unwrap();
    let (low, high) = (bracket.low.unwrap().value, bracket.high.unwrap().value);
    // Grid scan of the closed form and of Monte Carlo estimates.
    for k in 0..=40 {
        let alpha = 0.5 * 1.1f64.powi(k);
        let exact = one_dimensional_extremal_probability(alpha).unwrap();
        if alpha <= low {
            assert!(exact > 0.5, "alpha {alpha}");
        }
        if alpha >= high {
            assert!(exact < 0.5, "alpha {alpha}");
        }
    }
    for alpha in [low, high] {
        let e = estimate_extremal_probability(1, alpha, 10_000, 9, &opts).unwrap();
        assert!(e.contains(one_dimensional_extremal_probability(alpha).unwrap()));
    }
}

#[test]
fn two_dimensional_bracket_is_within_factor_two() {
    let b = find_alpha_half(2, 10_000, 5, DEFAULT_MAX_PROBES, &RunOptions::default()).unwrap();
    assert!(b.complete);
    assert!(b.ratio().unwrap() <= 2.0, "{:?}", b.ratio());
}

#[test]
fn bracket_midpoints_grow_with_dimension() {
    let opts = RunOptions::default();
    let mids: Vec<f64> = (1..=3)
        .map(|n| {
            find_alpha_half(n, 2000, 6, DEFAULT_MAX_PROBES, &opts)
                .unwrap()
                .midpoint()
                .unwrap()
        })
        .collect();
    assert!(mids.windows(2).all(|w| w[0] <= w[1]), "{mids:?}");
}

#[test]
fn moderate_alpha_estimate_is_sharp() {
    let e = estimate_extremal_probability(2, 20.0, 100_000, 10, &RunOptions::default()).unwrap();
    assert!(e.estimate > 0.0 && e.estimate < 1.0);
    assert!(e.width() < 0.01, "{e:?}");
}

#[test]
fn covering_interval_shrinks_with_trials() {
    let config = CoveringConfig::default();
    let conf = RunOptions::default().confidence;
    let a = estimate_covering_mean(3, 300, 12, &config, None, conf).unwrap();
    let b = estimate_covering_mean(3, 600, 12, &config, None, conf).unwrap();
    let ratio = a.mean.width() / b.mean.width();
    let expected = 2f64.sqrt();
    assert!(ratio > expected / 1.5 && ratio < expected * 1.5, "{ratio}");
}
