//! Real-valued signal model of a half-wavelength uniform linear array with a
//! single Gaussian source: steering matrices, receive covariance and the
//! unquantized Gaussian Fisher information.
//!
//! The receive vector stacks in-phase over quadrature samples, so an array of
//! `K` sensors produces `M = 2K` real channels. Angles are radians throughout.

use crate::error::{Error, Result};
use crate::numerics::{spd_factor, SymMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// One source impinging on a `K`-element ULA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaSource {
    k: usize,
    theta_rad: f64,
    gamma: f64,
}

impl UlaSource {
    pub fn new(k: usize, theta_rad: f64, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("array needs at least one sensor".into()));
        }
        if !theta_rad.is_finite() || theta_rad.abs() >= FRAC_PI_2 {
            return Err(Error::Domain(format!(
                "DOA angle {theta_rad} rad outside the open interval (-pi/2, pi/2)"
            )));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("amplitude {gamma} must be finite and >= 0")));
        }
        Ok(Self { k, theta_rad, gamma })
    }

    /// Convenience constructor for CLI-style units (degrees, SNR = γ² in dB).
    pub fn from_deg_db(k: usize, theta_deg: f64, snr_db: f64) -> Result<Self> {
        Self::new(k, theta_deg.to_radians(), gamma_from_snr_db(snr_db))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of real channels, `2K`.
    pub fn m(&self) -> usize {
        2 * self.k
    }

    pub fn theta_rad(&self) -> f64 {
        self.theta_rad
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn snr(&self) -> f64 {
        self.gamma * self.gamma
    }

    pub fn with_theta(&self, theta_rad: f64) -> Result<Self> {
        Self::new(self.k, theta_rad, self.gamma)
    }
}

pub fn gamma_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 20.0)
}

/// Steering matrix `A` (M×2) and its entrywise θ-derivative, stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPair {
    pub a: Vec<[f64; 2]>,
    pub da: Vec<[f64; 2]>,
}

pub fn steering(src: &UlaSource) -> SteeringPair {
    let k = src.k;
    let (sin_t, cos_t) = src.theta_rad.sin_cos();
    let mut a = vec![[0.0; 2]; 2 * k];
    let mut da = vec![[0.0; 2]; 2 * k];
    for s in 0..k {
        let scale = s as f64 * PI;
        let (psi, xi) = (scale * sin_t).sin_cos();
        let dxi = -scale * cos_t * psi;
        let dpsi = scale * cos_t * xi;
        a[s] = [xi, psi];
        a[k + s] = [-psi, xi];
        da[s] = [dxi, dpsi];
        da[k + s] = [-dpsi, dxi];
    }
    SteeringPair { a, da }
}

/// Receive covariance `Σ_y(θ)` and its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub sigma_y: SymMatrix,
    pub d_sigma_y: SymMatrix,
}

pub fn receive_covariance(src: &UlaSource) -> CovariancePair {
    let sp = steering(src);
    let m = src.m();
    let g2 = src.snr();
    let dot = |x: &[f64; 2], y: &[f64; 2]| x[0] * y[0] + x[1] * y[1];
    // ξ² + ψ² = 1 makes the diagonals exact; set them directly instead of
    // carrying rounding from the products.
    let sigma_y = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            g2 + 1.0
        } else {
            g2 * dot(&sp.a[i], &sp.a[j])
        }
    });
    let d_sigma_y = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            0.0
        } else {
            g2 * (dot(&sp.da[i], &sp.a[j]) + dot(&sp.a[i], &sp.da[j]))
        }
    });
    CovariancePair { sigma_y, d_sigma_y }
}

/// Gaussian Fisher information `½ tr(Σ⁻¹ Σ′ Σ⁻¹ Σ′)`, with `Σ⁻¹ Σ′` formed by
/// column-wise solves.
pub fn fisher_unquantized(cov: &CovariancePair) -> Result<f64> {
    let m = cov.sigma_y.dim();
    let chol = spd_factor(&cov.sigma_y, 0.0)?;
    // x[c] = Σ⁻¹ Σ′[:, c]; then tr(X X) = Σ_ij X_ij X_ji
    let cols: Vec<Vec<f64>> = (0..m).map(|c| chol.solve(cov.d_sigma_y.row(c))).collect();
    let mut tr = 0.0;
    for i in 0..m {
        for j in 0..m {
            tr += cols[j][i] * cols[i][j];
        }
    }
    Ok(0.5 * tr.max(0.0))
}
