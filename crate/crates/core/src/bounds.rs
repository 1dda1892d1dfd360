//! Fisher-information lower bound from the quadratic sign statistics, the
//! quantization loss it implies, the pessimistic CRLB, and the exact
//! quantized Fisher information for arrays small enough to enumerate.

use crate::array_model::{fisher_unquantized, receive_covariance, UlaSource};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{clamp_corr, model_point, orthant2, orthant4, QuarticCache, StatisticMoments};
use crate::numerics::{spd_factor, SymMatrix};
use serde::{Deserialize, Serialize};

/// Converts rad² to deg².
pub const RAD2_TO_DEG2: f64 = (180.0 / std::f64::consts::PI) * (180.0 / std::f64::consts::PI);

/// `dμᵀ R⁻¹ dμ` together with the weight vector `β* = R⁻¹ dμ`.
pub fn fisher_lower_bound(sm: &StatisticMoments) -> Result<(f64, Vec<f64>)> {
    let chol = spd_factor(&sm.r, 0.0)?;
    let weights = chol.solve(&sm.d_mu);
    let lb: f64 = weights.iter().zip(&sm.d_mu).map(|(w, d)| w * d).sum();
    Ok((lb.max(0.0), weights))
}

/// `χ = F_lb / F_y`, linear and in dB.
pub fn quantization_loss(fisher_lb: f64, fisher_y: f64) -> Result<(f64, f64)> {
    if !(fisher_y > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "unquantized Fisher information is {fisher_y}; loss ratio undefined"
        )));
    }
    let chi = fisher_lb / fisher_y;
    Ok((chi, 10.0 * chi.log10()))
}

/// Pessimistic CRLB for `n` snapshots, in rad² and deg².
pub fn pcrlb(fisher_lb: f64, n: usize) -> Result<(f64, f64)> {
    if !(fisher_lb > 0.0) {
        return Err(Error::DegenerateModel(format!("Fisher lower bound is {fisher_lb}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("snapshot count must be positive".into()));
    }
    let rad2 = 1.0 / (n as f64 * fisher_lb);
    Ok((rad2, rad2 * RAD2_TO_DEG2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub theta_deg: f64,
    pub snr_db: f64,
    pub n: usize,
    pub fisher_y: f64,
    pub fisher_lb: f64,
    pub chi: f64,
    pub chi_db: f64,
    pub pcrlb_rad2: f64,
    pub pcrlb_deg2: f64,
    pub gls_weights: Vec<f64>,
}

/// All bound quantities at one model point. `F_y` and the lower bound share
/// the same covariance instance.
pub fn bound_report(src: &UlaSource, n: usize, cache: &QuarticCache, exec: Execution) -> Result<BoundReport> {
    let point = model_point(src, cache, exec)?;
    let fisher_y = fisher_unquantized(&point.cov)?;
    let (fisher_lb, gls_weights) = fisher_lower_bound(&point.moments)?;
    let (chi, chi_db) = quantization_loss(fisher_lb, fisher_y)?;
    let (pcrlb_rad2, pcrlb_deg2) = pcrlb(fisher_lb, n)?;
    Ok(BoundReport {
        k: src.k(),
        theta_deg: src.theta_rad().to_degrees(),
        snr_db: 10.0 * src.snr().log10(),
        n,
        fisher_y,
        fisher_lb,
        chi,
        chi_db,
        pcrlb_rad2,
        pcrlb_deg2,
        gls_weights,
    })
}

/// Probabilities of every sign pattern `z ∈ {±1}^M` (bit `b` of the pattern
/// index set means `z_b = −1`). Only `M ≤ 4`.
pub fn outcome_probabilities(src: &UlaSource) -> Result<Vec<f64>> {
    let m = src.m();
    if m > 4 {
        return Err(Error::DimensionTooLarge(src.k()));
    }
    let cov = receive_covariance(src);
    let scale = src.snr() + 1.0;
    let rho = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            1.0
        } else {
            clamp_corr(cov.sigma_y.get(i, j) / scale)
        }
    });
    (0..1u32 << m)
        .map(|pattern| {
            let z: Vec<f64> = (0..m).map(|b| if pattern & (1 << b) != 0 { -1.0 } else { 1.0 }).collect();
            if m == 2 {
                Ok(orthant2(z[0] * z[1] * rho.get(0, 1)))
            } else {
                orthant4(&SymMatrix::from_lower_fn(4, |i, j| z[i] * z[j] * rho.get(i, j)))
            }
        })
        .collect()
}

/// Exact Fisher information of the 1-bit outputs by enumerating all `2^M`
/// outcomes, with the score from central differences at `θ ± h`.
pub fn fisher_exact_small(src: &UlaSource, h: f64) -> Result<f64> {
    if src.k() > 2 {
        return Err(Error::DimensionTooLarge(src.k()));
    }
    if !(1e-7..=1e-4).contains(&h) {
        return Err(Error::InvalidInput(format!("step h = {h} outside [1e-7, 1e-4]")));
    }
    let p = outcome_probabilities(src)?;
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-7 {
        return Err(Error::NormalizationFailure(total));
    }
    let theta = src.theta_rad();
    let plus = outcome_probabilities(&src.with_theta(theta + h)?)?;
    let minus = outcome_probabilities(&src.with_theta(theta - h)?)?;
    Ok(p.iter()
        .zip(plus.iter().zip(&minus))
        .filter(|(pz, _)| **pz > 0.0)
        .map(|(pz, (a, b))| {
            let dp = (a - b) / (2.0 * h);
            dp * dp / pz
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{arcsine_map, statistic_moments};
    use proptest::prelude::*;

    fn report(k: usize, deg: f64, snr_db: f64) -> BoundReport {
        let s = UlaSource::from_deg_db(k, deg, snr_db).unwrap();
        bound_report(&s, 1000, &QuarticCache::new(), Execution::default()).unwrap()
    }

    #[test]
    fn scalar_bound() {
        let sm = StatisticMoments {
            mu: vec![0.0],
            d_mu: vec![2.0],
            r: SymMatrix::from_rows(&[&[4.0]]),
        };
        let (lb, w) = fisher_lower_bound(&sm).unwrap();
        assert_eq!(lb, 1.0);
        assert_eq!(w, vec![0.5]);
    }

    #[test]
    fn no_signal_bound_is_zero() {
        let s = UlaSource::new(3, 0.2, 0.0).unwrap();
        let sm = statistic_moments(&arcsine_map(&receive_covariance(&s), 0.0)).unwrap();
        assert_eq!(fisher_lower_bound(&sm).unwrap().0, 0.0);
        assert!(bound_report(&s, 10, &QuarticCache::new(), Execution::Sequential).is_err());
    }

    #[test]
    fn loss_ratio_examples() {
        assert_eq!(quantization_loss(2.5, 2.5).unwrap(), (1.0, 0.0));
        let two_over_pi_sq = (2.0 / std::f64::consts::PI).powi(2);
        let (_, db) = quantization_loss(3.0 * two_over_pi_sq, 3.0).unwrap();
        assert!((db + 3.922).abs() < 1e-3);
        assert!(matches!(quantization_loss(1.0, 0.0), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn pcrlb_scaling() {
        assert_eq!(pcrlb(1.0, 1).unwrap().0, 1.0);
        let (a, _) = pcrlb(0.37, 500).unwrap();
        let (b, _) = pcrlb(0.37, 1000).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-18);
        assert!(pcrlb(0.0, 10).is_err());
        assert!(pcrlb(1.0, 0).is_err());
    }

    #[test]
    fn exact_small_preconditions() {
        let s = UlaSource::new(3, 0.1, 1.0).unwrap();
        assert_eq!(fisher_exact_small(&s, 1e-6), Err(Error::DimensionTooLarge(3)));
        let s = UlaSource::new(2, 0.1, 1.0).unwrap();
        assert!(matches!(fisher_exact_small(&s, 1e-3), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn exact_small_no_signal() {
        let s = UlaSource::new(2, 0.4, 0.0).unwrap();
        assert_eq!(fisher_exact_small(&s, 1e-6).unwrap(), 0.0);
        // single sensor: I and Q are uncorrelated for every θ
        let s = UlaSource::new(1, 0.4, 2.0).unwrap();
        assert_eq!(fisher_exact_small(&s, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn sandwich_at_reference_point() {
        let s = UlaSource::from_deg_db(2, 10.0, 0.0).unwrap();
        let exact = fisher_exact_small(&s, 1e-5).unwrap();
        let r = report(2, 10.0, 0.0);
        assert!(r.fisher_lb <= exact + 1e-6 * r.fisher_y, "{} > {}", r.fisher_lb, exact);
        assert!(exact <= r.fisher_y * (1.0 + 1e-6));
    }

    #[test]
    fn loss_improves_with_array_size() {
        let c2 = report(2, 10.0, 0.0).chi_db;
        let c4 = report(4, 10.0, 0.0).chi_db;
        let c8 = report(8, 10.0, 0.0).chi_db;
        assert!(c2 < c4 && c4 < c8, "{c2} {c4} {c8}");
    }

    #[test]
    fn weights_reproduce_bound() {
        let r = report(3, 20.0, -3.0);
        let s = UlaSource::from_deg_db(3, 20.0, -3.0).unwrap();
        let sm = statistic_moments(&arcsine_map(&receive_covariance(&s), s.gamma())).unwrap();
        let dot: f64 = r.gls_weights.iter().zip(&sm.d_mu).map(|(a, b)| a * b).sum();
        assert!((dot - r.fisher_lb).abs() < 1e-12 * r.fisher_lb);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn probabilities_are_complete(th in -1.4f64..1.4, g in 0.0f64..3.0) {
            let p = outcome_probabilities(&UlaSource::new(2, th, g).unwrap()).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-7);
            // central symmetry p(z) = p(−z)
            for (i, v) in p.iter().enumerate() {
                prop_assert!((v - p[15 - i]).abs() < 1e-12);
            }
        }

        #[test]
        fn loss_is_symmetric_and_below_one(k in 2usize..=4, deg in 1.0f64..80.0, snr in -15.0f64..8.0) {
            let a = report(k, deg, snr);
            let b = report(k, -deg, snr);
            prop_assert!(a.chi <= 1.0 + 1e-9);
            prop_assert!((a.chi_db - b.chi_db).abs() < 1e-6);
        }
    }
}
