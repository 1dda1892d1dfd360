//! Snapshot generation, 1-bit quantization and the seeded RMSE-versus-bound
//! experiment.
//!
//! Every run draws from its own ChaCha stream seeded by
//! [`run_seed`]`(master, snr_index, run_index)`, and results are reduced in run
//! order, so reports are identical for any worker count.

use crate::array_model::{gamma_from_snr_db, receive_covariance, steering, UlaSource};
use crate::bounds::{fisher_lower_bound, RAD2_TO_DEG2};
use crate::error::{Error, Result};
use crate::estimator::{
    sample_statistics, BitSnapshots, CmleSolver, EstimateResult, EstimatorOptions, GaussianMleSolver, Method,
};
use crate::exec::Execution;
use crate::moments::{model_point, QuarticCache};
use crate::numerics::{compensated_sum, SymMatrix};
use crate::array_model::fisher_unquantized;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Real-valued snapshots, `M × N`, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSnapshots {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl RealSnapshots {
    pub fn new(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::InvalidInput(format!("expected {} entries, got {}", m * n, data.len())));
        }
        Ok(Self { m, n, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.m..(col + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `(1/N) Σ y_n y_nᵀ`.
    pub fn sample_covariance(&self) -> SymMatrix {
        let m = self.m;
        let mut acc = vec![0.0; m * m];
        for c in 0..self.n {
            let y = self.column(c);
            for i in 0..m {
                for j in 0..=i {
                    acc[i * m + j] += y[i] * y[j];
                }
            }
        }
        let n = self.n.max(1) as f64;
        SymMatrix::from_lower_fn(m, |i, j| acc[i * m + j] / n)
    }
}

/// Draws `y_n = γ A(θ) x_n + η_n` with `x_n ~ N(0, I₂)` and `η_n ~ N(0, I_M)`.
pub fn sample_receive(src: &UlaSource, n: usize, seed: u64) -> RealSnapshots {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_receive_with(src, n, &mut rng)
}

pub fn sample_receive_with(src: &UlaSource, n: usize, rng: &mut impl Rng) -> RealSnapshots {
    let a = steering(src).a;
    let m = src.m();
    let g = src.gamma();
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..n {
        let x0: f64 = rng.sample(StandardNormal);
        let x1: f64 = rng.sample(StandardNormal);
        for row in &a {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(g * (row[0] * x0 + row[1] * x1) + noise);
        }
    }
    RealSnapshots { m, n, data }
}

/// Hard limiter with `sign(0) = +1`.
pub fn quantize(y: &RealSnapshots) -> BitSnapshots {
    let data = y.data.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
    BitSnapshots::new(y.m, y.n, data).expect("sign outputs are always ±1")
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed derived from the master seed and the run's coordinates.
pub fn run_seed(master: u64, snr_index: usize, run_index: usize) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ snr_index as u64);
    splitmix64(s ^ (run_index as u64).rotate_left(32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub theta_deg: f64,
    pub snr_db_list: Vec<f64>,
    pub n: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub estimator: Method,
    #[serde(default)]
    pub options: EstimatorOptions,
    /// Test hook: replace sample statistics by their population values.
    #[serde(default)]
    pub population_statistics: bool,
}

impl ExperimentConfig {
    /// K = 4, θ = 5°, N = 1000, SNR from −6 to 0 dB in 1 dB steps.
    pub fn cmle_reference(runs: usize, master_seed: u64) -> Self {
        Self {
            k: 4,
            theta_deg: 5.0,
            snr_db_list: (-6..=0).map(f64::from).collect(),
            n: 1000,
            runs,
            master_seed,
            estimator: Method::Cmle,
            options: EstimatorOptions::default(),
            population_statistics: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.n == 0 {
            return Err(Error::InvalidInput("runs and N must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("SNR list must be non-empty and finite".into()));
        }
        UlaSource::from_deg_db(self.k, self.theta_deg, 0.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub rmse_deg: f64,
    /// Root of the bound matching the estimator: pessimistic CRLB for the
    /// CMLE, Gaussian CRLB for the unquantized MLE.
    pub pcrlb_root_deg: f64,
    pub ratio: f64,
    pub failed_runs: usize,
    pub wall_time_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub config: ExperimentConfig,
    pub points: Vec<SnrPoint>,
}

impl RmseReport {
    /// Equality of everything except wall-clock timings.
    pub fn same_results(&self, other: &RmseReport) -> bool {
        let strip = |r: &RmseReport| {
            r.points
                .iter()
                .map(|p| SnrPoint {
                    wall_time_sec: 0.0,
                    ..p.clone()
                })
                .collect::<Vec<_>>()
        };
        self.config == other.config && strip(self) == strip(other)
    }
}

enum Solver {
    Cmle(CmleSolver, Vec<f64>),
    Gaussian(GaussianMleSolver, SymMatrix),
}

impl Solver {
    fn run(&self, cfg: &ExperimentConfig, src: &UlaSource, seed: u64) -> Result<EstimateResult> {
        match self {
            Solver::Cmle(s, population) => {
                if cfg.population_statistics {
                    return s.estimate(population);
                }
                let z = quantize(&sample_receive(src, cfg.n, seed));
                s.estimate(&sample_statistics(&z))
            }
            Solver::Gaussian(s, population) => {
                if cfg.population_statistics {
                    return s.estimate(population);
                }
                s.estimate(&sample_receive(src, cfg.n, seed).sample_covariance())
            }
        }
    }
}

/// Runs the RMSE experiment over every SNR point of `cfg`.
pub fn run_rmse_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<RmseReport> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.snr_db_list.len());
    for (snr_index, &snr_db) in cfg.snr_db_list.iter().enumerate() {
        let started = Instant::now();
        let gamma = gamma_from_snr_db(snr_db);
        let src = UlaSource::new(cfg.k, cfg.theta_deg.to_radians(), gamma)?;

        let (solver, bound_rad2) = match cfg.estimator {
            Method::Cmle => {
                let mp = model_point(&src, &QuarticCache::new(), exec)?;
                let (lb, _) = fisher_lower_bound(&mp.moments)?;
                let solver = CmleSolver::new(cfg.k, gamma, cfg.options, exec)?;
                (Solver::Cmle(solver, mp.moments.mu), 1.0 / (cfg.n as f64 * lb))
            }
            Method::GaussianMle => {
                let cov = receive_covariance(&src);
                let fy = fisher_unquantized(&cov)?;
                let solver = GaussianMleSolver::new(cfg.k, gamma, cfg.options)?;
                (Solver::Gaussian(solver, cov.sigma_y), 1.0 / (cfg.n as f64 * fy))
            }
        };

        let theta0 = src.theta_rad();
        let outcomes = exec.map(cfg.runs, |run| {
            let seed = run_seed(cfg.master_seed, snr_index, run);
            match solver.run(cfg, &src, seed) {
                Ok(r) if r.converged => Some((r.theta_hat_rad - theta0).powi(2)),
                _ => None,
            }
        });
        let failed_runs = outcomes.iter().filter(|o| o.is_none()).count();
        let ok = cfg.runs - failed_runs;
        if failed_runs * 100 > cfg.runs {
            log::warn!(
                "SNR {snr_db} dB: {failed_runs} of {} runs did not converge and are excluded from the RMSE",
                cfg.runs
            );
        }
        let rmse_deg = if ok > 0 {
            (compensated_sum(outcomes.iter().flatten().copied()) / ok as f64).sqrt().to_degrees()
        } else {
            f64::NAN
        };
        let pcrlb_root_deg = (bound_rad2 * RAD2_TO_DEG2).sqrt();
        points.push(SnrPoint {
            snr_db,
            rmse_deg,
            pcrlb_root_deg,
            ratio: rmse_deg / pcrlb_root_deg,
            failed_runs,
            wall_time_sec: started.elapsed().as_secs_f64(),
        });
    }
    Ok(RmseReport {
        config: cfg.clone(),
        points,
    })
}
