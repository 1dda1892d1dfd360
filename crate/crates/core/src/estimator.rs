//! DOA estimators: the conservative maximum-likelihood estimator (CMLE) on
//! 1-bit snapshots and the Gaussian maximum-likelihood baseline on
//! unquantized snapshots.
//!
//! Both use the same search: evaluate the criterion on a uniform θ grid, take
//! the global grid minimum, then refine the root of the estimating equation
//! between the neighbouring grid points with Brent's method. When no sign
//! change is found the criterion itself is refined by golden-section search
//! and the result is flagged as not converged.

use crate::array_model::{receive_covariance, UlaSource};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{model_point, PairIndex, QuarticCache};
use crate::numerics::{brent_root, golden_section_min, spd_factor, Cholesky, SymMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cmle,
    GaussianMle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Cmle => "cmle",
            Method::GaussianMle => "gaussian-mle",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cmle" => Ok(Method::Cmle),
            "gaussian-mle" | "gaussian" | "mle" => Ok(Method::GaussianMle),
            other => Err(Error::InvalidInput(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Number of grid points over `[-span_deg, span_deg]`.
    pub grid_points: usize,
    pub span_deg: f64,
    /// Final bracket width of the root refinement, radians.
    pub x_tol: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            grid_points: 361,
            span_deg: 89.5,
            x_tol: 1e-8,
        }
    }
}

impl EstimatorOptions {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidInput("estimator grid needs at least 3 points".into()));
        }
        if !(self.span_deg > 0.0 && self.span_deg < 90.0) {
            return Err(Error::InvalidInput(format!("grid span {} deg outside (0, 90)", self.span_deg)));
        }
        if !(self.x_tol > 0.0) {
            return Err(Error::InvalidInput("x_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.span_deg.to_radians();
        let g = self.grid_points;
        (0..g)
            .map(|i| -span + 2.0 * span * i as f64 / (g - 1) as f64)
            .collect()
    }
}

/// `M × N` matrix of ±1 outputs, stored snapshot by snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSnapshots {
    m: usize,
    n: usize,
    data: Vec<i8>,
}

impl BitSnapshots {
    /// `data` holds `n` consecutive columns of length `m`.
    pub fn new(m: usize, n: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::InvalidInput(format!("expected {} entries, got {}", m * n, data.len())));
        }
        if data.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidInput("snapshot entries must be exactly +1 or -1".into()));
        }
        Ok(Self { m, n, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.data[col * self.m + row]
    }

    pub fn column(&self, col: usize) -> &[i8] {
        &self.data[col * self.m..(col + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.data
    }
}

/// Sample mean of `z_i z_j` over all snapshots in [`PairIndex`] order.
/// Products are counted in integers, so the result is exact up to the final
/// division.
pub fn sample_statistics(z: &BitSnapshots) -> Vec<f64> {
    let index = PairIndex::new(z.m());
    let mut acc = vec![0i64; index.len()];
    for c in 0..z.n() {
        let col = z.column(c);
        for (a, &(i, j)) in acc.iter_mut().zip(index.pairs()) {
            *a += (col[i] * col[j]) as i64;
        }
    }
    let n = z.n().max(1) as f64;
    acc.into_iter().map(|a| a as f64 / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat_rad: f64,
    pub method: Method,
    pub objective_at_solution: f64,
    pub grid_minimum_deg: f64,
    pub root_bracket: Option<(f64, f64)>,
    pub converged: bool,
}

/// Criterion value and estimating-equation value at one θ. The score is
/// oriented so that it is positive below the solution and negative above.
#[derive(Debug, Clone, Copy)]
struct Evaluation {
    objective: f64,
    score: f64,
}

fn grid_then_refine(
    thetas: &[f64],
    grid: &[Evaluation],
    informative: bool,
    x_tol: f64,
    method: Method,
    eval: impl Fn(f64) -> Result<Evaluation>,
) -> Result<EstimateResult> {
    let g = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let grid_minimum_deg = thetas[g].to_degrees();
    if !informative {
        return Ok(EstimateResult {
            theta_hat_rad: thetas[g],
            method,
            objective_at_solution: grid[g].objective,
            grid_minimum_deg,
            root_bracket: None,
            converged: false,
        });
    }
    let lo = g.saturating_sub(1);
    let hi = (g + 1).min(thetas.len() - 1);
    let changes = |a: usize, b: usize| a != b && grid[a].score * grid[b].score <= 0.0;
    let bracket = if grid[g].score == 0.0 {
        Some((g, g))
    } else if changes(lo, g) {
        Some((lo, g))
    } else if changes(g, hi) {
        Some((g, hi))
    } else {
        None
    };

    if let Some((a, b)) = bracket {
        let (ta, tb) = (thetas[a], thetas[b]);
        let theta = if a == b {
            ta
        } else {
            // Errors inside the closure surface as NaN and are re-raised below.
            let root = brent_root(|t| eval(t).map(|e| e.score).unwrap_or(f64::NAN), ta, tb, x_tol)?;
            if !root.is_finite() {
                return Err(Error::DegenerateModel("score evaluation failed during refinement".into()));
            }
            root
        };
        let at = eval(theta)?;
        return Ok(EstimateResult {
            theta_hat_rad: theta,
            method,
            objective_at_solution: at.objective,
            grid_minimum_deg,
            root_bracket: Some((ta, tb)),
            converged: true,
        });
    }

    let (theta, objective) = golden_section_min(
        |t| eval(t).map(|e| e.objective).unwrap_or(f64::INFINITY),
        thetas[lo],
        thetas[hi],
        x_tol,
    );
    Ok(EstimateResult {
        theta_hat_rad: theta,
        method,
        objective_at_solution: objective,
        grid_minimum_deg,
        root_bracket: None,
        converged: false,
    })
}

#[derive(Debug, Clone)]
struct CmlePoint {
    mu: Vec<f64>,
    d_mu: Vec<f64>,
    chol: Cholesky,
}

impl CmlePoint {
    fn evaluate(&self, phi: &[f64]) -> Evaluation {
        let resid: Vec<f64> = phi.iter().zip(&self.mu).map(|(p, m)| p - m).collect();
        let w = self.chol.solve(&resid);
        let score = self.d_mu.iter().zip(&w).map(|(d, v)| d * v).sum();
        let objective = resid.iter().zip(&w).map(|(r, v)| r * v).sum();
        Evaluation { objective, score }
    }
}

/// CMLE for a fixed array size and known amplitude. The moment tables on the
/// search grid do not depend on the data, so one solver can be shared across
/// many estimation runs.
#[derive(Debug, Clone)]
pub struct CmleSolver {
    k: usize,
    gamma: f64,
    opts: EstimatorOptions,
    thetas: Vec<f64>,
    points: Vec<CmlePoint>,
    informative: bool,
}

impl CmleSolver {
    pub fn new(k: usize, gamma: f64, opts: EstimatorOptions, exec: Execution) -> Result<Self> {
        opts.validate()?;
        UlaSource::new(k, 0.0, gamma)?;
        let thetas = opts.grid();
        let points = exec.try_map(thetas.len(), |g| Self::point(k, gamma, thetas[g]))?;
        let informative = points.iter().any(|p| p.d_mu.iter().any(|&d| d != 0.0));
        Ok(Self {
            k,
            gamma,
            opts,
            thetas,
            points,
            informative,
        })
    }

    fn point(k: usize, gamma: f64, theta: f64) -> Result<CmlePoint> {
        let src = UlaSource::new(k, theta, gamma)?;
        let mp = model_point(&src, &QuarticCache::new(), Execution::Sequential)?;
        let chol = spd_factor(&mp.moments.r, 0.0)?;
        Ok(CmlePoint {
            mu: mp.moments.mu,
            d_mu: mp.moments.d_mu,
            chol,
        })
    }

    pub fn statistic_len(&self) -> usize {
        let m = 2 * self.k;
        m * (m - 1) / 2
    }

    fn check_len(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.statistic_len() {
            return Err(Error::InvalidInput(format!(
                "statistic vector has length {}, expected {} for K = {}",
                phi.len(),
                self.statistic_len(),
                self.k
            )));
        }
        Ok(())
    }

    /// Estimating-equation value `dμᵀ R⁻¹ (φ̃ − μ)` at `theta`.
    pub fn score(&self, theta: f64, phi: &[f64]) -> Result<f64> {
        self.check_len(phi)?;
        Ok(Self::point(self.k, self.gamma, theta)?.evaluate(phi).score)
    }

    /// GLS criterion `(φ̃ − μ)ᵀ R⁻¹ (φ̃ − μ)` at `theta`.
    pub fn objective(&self, theta: f64, phi: &[f64]) -> Result<f64> {
        self.check_len(phi)?;
        Ok(Self::point(self.k, self.gamma, theta)?.evaluate(phi).objective)
    }

    pub fn estimate(&self, phi: &[f64]) -> Result<EstimateResult> {
        self.check_len(phi)?;
        let grid: Vec<Evaluation> = self.points.iter().map(|p| p.evaluate(phi)).collect();
        grid_then_refine(&self.thetas, &grid, self.informative, self.opts.x_tol, Method::Cmle, |t| {
            Ok(Self::point(self.k, self.gamma, t)?.evaluate(phi))
        })
    }
}

/// Solves the CMLE estimating equation for the sample statistics `phi`.
pub fn cmle(phi: &[f64], k: usize, gamma: f64, opts: &EstimatorOptions) -> Result<EstimateResult> {
    CmleSolver::new(k, gamma, *opts, Execution::default())?.estimate(phi)
}

/// Gaussian ML on unquantized data: minimizes `ln det Σ(θ) + tr(C Σ(θ)⁻¹)`.
#[derive(Debug, Clone)]
pub struct GaussianMleSolver {
    k: usize,
    gamma: f64,
    opts: EstimatorOptions,
    thetas: Vec<f64>,
}

impl GaussianMleSolver {
    pub fn new(k: usize, gamma: f64, opts: EstimatorOptions) -> Result<Self> {
        opts.validate()?;
        UlaSource::new(k, 0.0, gamma)?;
        Ok(Self {
            k,
            gamma,
            opts,
            thetas: opts.grid(),
        })
    }

    fn evaluate(&self, theta: f64, c: &SymMatrix) -> Result<Evaluation> {
        let cov = receive_covariance(&UlaSource::new(self.k, theta, self.gamma)?);
        let m = 2 * self.k;
        let chol = spd_factor(&cov.sigma_y, 0.0)?;
        // Columns of Σ⁻¹C and Σ⁻¹Σ′
        let w: Vec<Vec<f64>> = (0..m).map(|j| chol.solve(c.row(j))).collect();
        let x: Vec<Vec<f64>> = (0..m).map(|j| chol.solve(cov.d_sigma_y.row(j))).collect();
        let mut tr_w = 0.0;
        let mut tr_x = 0.0;
        let mut tr_wx = 0.0;
        for i in 0..m {
            tr_w += w[i][i];
            tr_x += x[i][i];
            for j in 0..m {
                tr_wx += w[j][i] * x[i][j];
            }
        }
        Ok(Evaluation {
            objective: chol.log_det() + tr_w,
            score: 0.5 * (tr_wx - tr_x),
        })
    }

    pub fn estimate(&self, sample_cov: &SymMatrix) -> Result<EstimateResult> {
        if sample_cov.dim() != 2 * self.k {
            return Err(Error::InvalidInput(format!(
                "sample covariance is {0}x{0}, expected {1}x{1}",
                sample_cov.dim(),
                2 * self.k
            )));
        }
        let grid = self
            .thetas
            .iter()
            .map(|&t| self.evaluate(t, sample_cov))
            .collect::<Result<Vec<_>>>()?;
        let informative = self.gamma > 0.0 && self.k > 1;
        grid_then_refine(&self.thetas, &grid, informative, self.opts.x_tol, Method::GaussianMle, |t| {
            self.evaluate(t, sample_cov)
        })
    }
}

pub fn gaussian_mle(sample_cov: &SymMatrix, k: usize, gamma: f64, opts: &EstimatorOptions) -> Result<EstimateResult> {
    GaussianMleSolver::new(k, gamma, *opts)?.estimate(sample_cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{arcsine_map, statistic_moments};

    fn population_phi(k: usize, theta: f64, gamma: f64) -> Vec<f64> {
        let s = UlaSource::new(k, theta, gamma).unwrap();
        statistic_moments(&arcsine_map(&receive_covariance(&s), gamma)).unwrap().mu
    }

    #[test]
    fn snapshot_validation() {
        assert!(BitSnapshots::new(2, 2, vec![1, -1, 1]).is_err());
        assert!(BitSnapshots::new(2, 1, vec![1, 0]).is_err());
        let z = BitSnapshots::new(2, 2, vec![1, -1, -1, -1]).unwrap();
        assert_eq!(z.get(1, 0), -1);
        assert_eq!(z.column(1), &[-1, -1]);
    }

    #[test]
    fn single_snapshot_statistics() {
        let z = BitSnapshots::new(4, 1, vec![1, -1, -1, 1]).unwrap();
        let phi = sample_statistics(&z);
        // pairs (1,0),(2,0),(3,0),(2,1),(3,1),(3,2)
        assert_eq!(phi, vec![-1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn repeated_columns_match_single() {
        let col = [1i8, -1, 1, 1, -1, 1];
        let one = sample_statistics(&BitSnapshots::new(6, 1, col.to_vec()).unwrap());
        let many = sample_statistics(&BitSnapshots::new(6, 5, col.repeat(5)).unwrap());
        assert_eq!(one, many);
    }

    #[test]
    fn cmle_population_fixed_point() {
        let theta0 = 0.3;
        let phi = population_phi(3, theta0, 1.0);
        let r = cmle(&phi, 3, 1.0, &EstimatorOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.theta_hat_rad - theta0).abs() < 1e-7, "{}", r.theta_hat_rad);
        assert!(r.objective_at_solution.abs() < 1e-12);
        let (lo, hi) = r.root_bracket.unwrap();
        assert!(lo <= theta0 && theta0 <= hi);
    }

    #[test]
    fn cmle_score_vanishes_at_population() {
        let theta0 = -0.41;
        let phi = population_phi(2, theta0, 0.7);
        let solver = CmleSolver::new(2, 0.7, EstimatorOptions::default(), Execution::Sequential).unwrap();
        assert!(solver.score(theta0, &phi).unwrap().abs() < 1e-9);
        assert!(solver.objective(theta0, &phi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cmle_no_signal_is_flagged() {
        let phi = vec![0.0; 28];
        let r = cmle(&phi, 4, 0.0, &EstimatorOptions::default()).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn cmle_rejects_wrong_length() {
        assert!(cmle(&[0.0; 5], 2, 1.0, &EstimatorOptions::default()).is_err());
    }

    #[test]
    fn cmle_is_mirror_equivariant() {
        // Flipping the quadrature block maps θ to −θ.
        let (k, theta0, gamma) = (3, 0.52, 1.1);
        let phi = population_phi(k, theta0, gamma);
        let idx = PairIndex::new(2 * k);
        let mirrored: Vec<f64> = idx
            .pairs()
            .iter()
            .zip(&phi)
            .map(|(&(i, j), v)| if (i < k) != (j < k) { -v } else { *v })
            .collect();
        let opts = EstimatorOptions::default();
        let a = cmle(&phi, k, gamma, &opts).unwrap();
        let b = cmle(&mirrored, k, gamma, &opts).unwrap();
        assert!((a.theta_hat_rad + b.theta_hat_rad).abs() < 10.0 * opts.x_tol);
    }

    #[test]
    fn gaussian_population_fixed_point() {
        let theta0 = 0.087;
        let sigma = receive_covariance(&UlaSource::new(4, theta0, 0.8).unwrap()).sigma_y;
        let r = gaussian_mle(&sigma, 4, 0.8, &EstimatorOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.theta_hat_rad - theta0).abs() < 1e-7);
    }

    #[test]
    fn gaussian_no_signal_is_flagged() {
        let r = gaussian_mle(&SymMatrix::identity(4), 2, 0.0, &EstimatorOptions::default()).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn options_validation() {
        let o = EstimatorOptions {
            grid_points: 2,
            ..Default::default()
        };
        assert!(cmle(&[0.0; 6], 2, 1.0, &o).is_err());
        let o = EstimatorOptions {
            span_deg: 90.0,
            ..Default::default()
        };
        assert!(gaussian_mle(&SymMatrix::identity(4), 2, 1.0, &o).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("CMLE".parse::<Method>().unwrap(), Method::Cmle);
        assert_eq!("gaussian-mle".parse::<Method>().unwrap(), Method::GaussianMle);
        assert!("music".parse::<Method>().is_err());
    }
}
