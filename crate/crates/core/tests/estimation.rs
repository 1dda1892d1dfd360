//! Monte Carlo checks of the estimators against their bounds.

use onebit_doa::estimator::{sample_statistics, CmleSolver, EstimatorOptions, Method};
use onebit_doa::montecarlo::{quantize, run_rmse_experiment, run_seed, sample_receive, ExperimentConfig};
use onebit_doa::{bound_report, Execution, QuarticCache, UlaSource};

fn config(method: Method, runs: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::cmle_reference(runs, seed);
    cfg.snr_db_list = vec![-3.0];
    cfg.estimator = method;
    cfg
}

#[test]
fn cmle_errors_stay_within_three_bound_roots() {
    let src = UlaSource::from_deg_db(4, 5.0, -3.0).unwrap();
    let report = bound_report(&src, 1000, &QuarticCache::new(), Execution::default()).unwrap();
    let limit = 3.0 * report.pcrlb_rad2.sqrt();
    let solver = CmleSolver::new(4, src.gamma(), EstimatorOptions::default(), Execution::default()).unwrap();
    let runs = 1000;
    let inside = Execution::default()
        .map(runs, |r| {
            let z = quantize(&sample_receive(&src, 1000, run_seed(5, 0, r)));
            let est = solver.estimate(&sample_statistics(&z)).unwrap();
            est.converged && (est.theta_hat_rad - src.theta_rad()).abs() <= limit
        })
        .into_iter()
        .filter(|&ok| ok)
        .count();
    assert!(inside * 100 >= 99 * runs, "{inside} of {runs} within 3 bound roots");
}

#[test]
fn gaussian_mle_is_efficient_and_beats_cmle() {
    let gauss = run_rmse_experiment(&config(Method::GaussianMle, 2000, 3), Execution::default()).unwrap();
    let cmle = run_rmse_experiment(&config(Method::Cmle, 2000, 3), Execution::default()).unwrap();
    let g = &gauss.points[0];
    let c = &cmle.points[0];
    assert!((g.ratio - 1.0).abs() <= 0.15, "Gaussian MLE ratio {}", g.ratio);
    assert!(g.rmse_deg < c.rmse_deg, "{} vs {}", g.rmse_deg, c.rmse_deg);
    assert!(g.ratio >= 0.98 && c.ratio >= 0.98, "{} {}", g.ratio, c.ratio);
    assert_eq!(g.failed_runs + c.failed_runs, 0);
}
