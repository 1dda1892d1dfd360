//! Simulated snapshots against the analytic model.

use onebit_doa::estimator::sample_statistics;
use onebit_doa::moments::model_point;
use onebit_doa::montecarlo::{quantize, sample_receive};
use onebit_doa::{receive_covariance, Execution, QuarticCache, UlaSource};

#[test]
fn sample_covariance_matches_model() {
    let src = UlaSource::from_deg_db(3, -25.0, 2.0).unwrap();
    let n = 200_000;
    let c = sample_receive(&src, n, 9).sample_covariance();
    let s = receive_covariance(&src).sigma_y;
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            // Var(y_i y_j) = Σ_ii Σ_jj + Σ_ij² for Gaussians
            let se = ((s.get(i, i) * s.get(j, j) + s.get(i, j).powi(2)) / n as f64).sqrt();
            assert!((c.get(i, j) - s.get(i, j)).abs() <= 4.5 * se, "({i},{j}): {} vs {}", c.get(i, j), s.get(i, j));
        }
    }
}

#[test]
fn sign_statistics_match_arcsine_law() {
    let src = UlaSource::from_deg_db(3, 40.0, -1.0).unwrap();
    let mp = model_point(&src, &QuarticCache::new(), Execution::default()).unwrap();
    let n = 400_000;
    let phi = sample_statistics(&quantize(&sample_receive(&src, n, 21)));
    for (l, (p, m)) in phi.iter().zip(&mp.moments.mu).enumerate() {
        let se = (mp.moments.r.get(l, l) / n as f64).sqrt();
        assert!((p - m).abs() <= 4.5 * se, "statistic {l}: {p} vs {m}");
    }
}
