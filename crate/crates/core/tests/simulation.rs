use superadditive::detection::{DetectorModel, Outcome};
use superadditive::hadamard::SUPPORTED_ORDERS;
use superadditive::infotheory::{optimize_lambda, rate_individual, rate_ppm};
use superadditive::simulation::{compare_report, SchemeConfig};

#[test]
fn direct_ppm_agrees_with_analytic_rate() {
    for n in [2e-4, 2e-2] {
        for &l in &SUPPORTED_ORDERS[1..] {
            let config = SchemeConfig::direct(n, l, 1_000_000, 11);
            let (report, cm) = compare_report(&config).unwrap();
            assert!(
                report.deviation_in_stderr() <= 3.0,
                "n={n} L={l}: {report:?}"
            );

            let p = 1.0 - (-(l as f64) * n).exp();
            let erasure = cm.outcome_frequency(Outcome::Erasure);
            let sigma = (p * (1.0 - p) / config.trials as f64).sqrt();
            assert!(
                (erasure - (1.0 - p)).abs() <= 3.0 * sigma,
                "n={n} L={l}: erasure {erasure}"
            );
        }
    }
}

#[test]
fn hybrid_two_bins_near_optimum() {
    let n = 2e-4;
    let (lambda, rate) = optimize_lambda(n, 2).unwrap();
    let mut config = SchemeConfig::hybrid(n, 2, lambda, 2_000_000, 3);
    config.stratified = true;
    config.dolinar.as_mut().unwrap().num_slices = 200;
    let (report, _) = compare_report(&config).unwrap();
    assert!((report.analytic_rate - rate).abs() < 1e-15);
    let individual = rate_individual(n).unwrap();
    let ratio = report.empirical_rate / individual;
    let ratio_err = report.empirical_stderr / individual;
    assert!(
        (ratio - 1.025).abs() <= 3.0 * ratio_err,
        "{ratio} ± {ratio_err}"
    );
}

#[test]
fn lossy_run_is_bracketed_by_scaled_photon_number() {
    let mut config = SchemeConfig::direct(2e-2, 8, 2_000_000, 5);
    config.per_op_transmission = 0.9;
    config.use_decomposed_plan = true;
    let (report, _) = compare_report(&config).unwrap();
    let eta = report.overall_transmission;
    assert!((report.analytic_rate - rate_ppm(eta * 2e-2, 8.0).unwrap()).abs() < 1e-15);
    assert!(report.deviation_in_stderr() <= 3.0, "{report:?}");
}

#[test]
fn detector_inefficiency_acts_like_loss() {
    let mut config = SchemeConfig::direct(2e-2, 8, 1_000_000, 8);
    config.detector = DetectorModel {
        efficiency: 0.6,
        dark_click_probability: 0.0,
    };
    let (report, _) = compare_report(&config).unwrap();
    assert!((report.analytic_n_bar - 0.012).abs() < 1e-15);
    assert!(report.deviation_in_stderr() <= 3.0, "{report:?}");
}

#[test]
fn dark_counts_create_ambiguous_outcomes() {
    let mut config = SchemeConfig::direct(2e-2, 8, 200_000, 2);
    config.detector.dark_click_probability = 0.01;
    let (report, cm) = compare_report(&config).unwrap();
    assert!(cm.outcome_frequency(Outcome::Ambiguous) > 0.0);
    assert!(report.empirical_rate < report.analytic_rate);
}
