//! Built-in consistency checks run by `onebit-doa selftest`.
//!
//! Each group is independent; a group fails when any of its checks fails.
//! The `corrupt_arcsine` hook doubles the arcsine-law derivative before the
//! lower bound is formed, which must make the bound-related groups fail.

use crate::array_model::{fisher_unquantized, receive_covariance, UlaSource};
use crate::bounds::{fisher_exact_small, fisher_lower_bound, quantization_loss};
use crate::error::Result;
use crate::estimator::{cmle, EstimatorOptions};
use crate::exec::Execution;
use crate::moments::{
    arcsine_map, orthant4, quartic_sign_moment, quartic_sign_moment_by_orthants, random_correlation,
    statistic_moments_with, QuarticCache,
};
use crate::numerics::SymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Central-difference step for the enumerated Fisher information.
pub const EXACT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    pub corrupt_arcsine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckGroup {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl CheckGroup {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn record<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(e.to_string());
                None
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `(F_y, F_lb)` with the optional corruption of the arcsine derivative.
fn bound_pair(src: &UlaSource, corrupt: bool, cache: &QuarticCache, exec: Execution) -> Result<(f64, f64)> {
    let cov = receive_covariance(src);
    let fisher_y = fisher_unquantized(&cov)?;
    let mut qc = arcsine_map(&cov, src.gamma());
    if corrupt {
        let d = qc.d_sigma_z.clone();
        qc.d_sigma_z = SymMatrix::from_lower_fn(d.dim(), |i, j| 2.0 * d.get(i, j));
    }
    let sm = statistic_moments_with(&qc, cache, exec)?;
    Ok((fisher_y, fisher_lower_bound(&sm)?.0))
}

fn sandwich(opts: &SelftestOptions, exec: Execution) -> CheckGroup {
    let mut g = CheckGroup::new("sandwich");
    let cache = QuarticCache::new();
    for snr_db in [-15.0, -9.0, -3.0, 0.0, 5.0] {
        for step in -8..=8 {
            let deg = 10.0 * step as f64;
            let Some(src) = g.record(UlaSource::from_deg_db(2, deg, snr_db)) else {
                continue;
            };
            let Some((fy, lb)) = g.record(bound_pair(&src, opts.corrupt_arcsine, &cache, exec)) else {
                continue;
            };
            let Some(exact) = g.record(fisher_exact_small(&src, EXACT_FD_STEP)) else {
                continue;
            };
            let slack = 1e-6 * fy;
            g.check(lb <= exact + slack && exact <= fy + slack, || {
                format!("theta {deg} deg, SNR {snr_db} dB: lb {lb}, exact {exact}, F_y {fy}")
            });
        }
    }
    g
}

fn low_snr_limit(opts: &SelftestOptions, exec: Execution) -> CheckGroup {
    let mut g = CheckGroup::new("low-snr-limit");
    let cache = QuarticCache::new();
    for k in [2, 4] {
        for deg in [0.0, 45.0] {
            let Some(src) = g.record(UlaSource::from_deg_db(k, deg, -30.0)) else {
                continue;
            };
            let Some((fy, lb)) = g.record(bound_pair(&src, opts.corrupt_arcsine, &cache, exec)) else {
                continue;
            };
            let Some((_, chi_db)) = g.record(quantization_loss(lb, fy)) else {
                continue;
            };
            g.check((chi_db + 3.92).abs() <= 0.2, || {
                format!("K {k}, theta {deg} deg: loss {chi_db} dB")
            });
        }
    }
    g
}

fn orthant_closure(opts: &SelftestOptions) -> CheckGroup {
    let mut g = CheckGroup::new("orthant-closure");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for case in 0..50 {
        let c = random_correlation(4, &mut rng);
        let mut total = 0.0;
        for pattern in 0..16u32 {
            let s = |b: usize| if pattern & (1 << b) != 0 { -1.0 } else { 1.0 };
            let flipped = SymMatrix::from_lower_fn(4, |i, j| s(i) * s(j) * c.get(i, j));
            match orthant4(&flipped) {
                Ok(p) => total += p,
                Err(e) => g.check(false, || format!("case {case}: {e}")),
            }
        }
        g.check((total - 1.0).abs() <= 1e-7, || format!("case {case}: orthant sum {total}"));
        if let (Some(a), Some(b)) = (
            g.record(quartic_sign_moment(&c)),
            g.record(quartic_sign_moment_by_orthants(&c)),
        ) {
            g.check((a - b).abs() <= 1e-9, || format!("case {case}: quartic moment {a} vs {b}"));
        }
    }
    g
}

fn cmle_fixed_point(opts: &SelftestOptions, exec: Execution) -> CheckGroup {
    let mut g = CheckGroup::new("cmle-fixed-point");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let cache = QuarticCache::new();
    let est = EstimatorOptions::default();
    for _ in 0..6 {
        let k = rng.gen_range(2..=4);
        let deg = rng.gen_range(-60.0..60.0);
        let snr_db = rng.gen_range(-10.0..10.0);
        let Some(src) = g.record(UlaSource::from_deg_db(k, deg, snr_db)) else {
            continue;
        };
        let cov = receive_covariance(&src);
        let qc = arcsine_map(&cov, src.gamma());
        let Some(sm) = g.record(statistic_moments_with(&qc, &cache, exec)) else {
            continue;
        };
        if let Some(r) = g.record(cmle(&sm.mu, k, src.gamma(), &est)) {
            let err = (r.theta_hat_rad - src.theta_rad()).abs();
            g.check(err <= 1e-6, || format!("K {k}, theta {deg} deg, SNR {snr_db} dB: error {err} rad"));
        }
    }
    g
}

pub fn run_selftest(opts: &SelftestOptions, exec: Execution) -> Vec<CheckGroup> {
    vec![
        sandwich(opts, exec),
        low_snr_limit(opts, exec),
        orthant_closure(opts),
        cmle_fixed_point(opts, exec),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let groups = run_selftest(&SelftestOptions::default(), Execution::default());
        for g in &groups {
            assert!(g.passed(), "{}: {:?}", g.name, g.failures);
            assert!(g.checks > 0);
        }
    }

    #[test]
    fn corrupted_arcsine_is_caught() {
        let opts = SelftestOptions {
            corrupt_arcsine: true,
            ..Default::default()
        };
        let exec = Execution::default();
        assert!(!sandwich(&opts, exec).passed());
        assert!(!low_snr_limit(&opts, exec).passed());
    }
}
