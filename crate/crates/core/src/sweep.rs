//! Parameter sweeps of the quantization loss (SNR, DOA angle or array size).

use crate::array_model::{fisher_unquantized, UlaSource};
use crate::bounds::{fisher_lower_bound, quantization_loss};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{model_point, QuarticCache};
use serde::{Deserialize, Serialize};

/// Array sizes above this need an explicit opt-in; the moment covariance
/// grows with the fourth power of `K`.
pub const LONG_SWEEP_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Snr,
    Theta,
    K,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Snr => "snr",
            SweepVariable::Theta => "theta",
            SweepVariable::K => "k",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "snr" | "snrdb" | "snr_db" => Ok(SweepVariable::Snr),
            "theta" | "thetadeg" | "theta_deg" => Ok(SweepVariable::Theta),
            "k" => Ok(SweepVariable::K),
            other => Err(Error::InvalidInput(format!("unknown sweep variable '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub k: usize,
    pub theta_deg: f64,
    pub snr_db: f64,
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<(usize, f64, f64)>> {
        self.values
            .iter()
            .map(|&v| match self.variable {
                SweepVariable::Snr => Ok((self.k, self.theta_deg, v)),
                SweepVariable::Theta => Ok((self.k, v, self.snr_db)),
                SweepVariable::K => {
                    if v.fract() != 0.0 || v < 1.0 {
                        Err(Error::InvalidInput(format!("array size {v} is not a positive integer")))
                    } else {
                        Ok((v as usize, self.theta_deg, self.snr_db))
                    }
                }
            })
            .collect()
    }

    pub fn validate(&self, allow_long: bool) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("sweep range is empty".into()));
        }
        for (k, theta, snr) in self.points()? {
            if !snr.is_finite() {
                return Err(Error::InvalidInput(format!("SNR {snr} dB is not finite")));
            }
            UlaSource::from_deg_db(k, theta, snr)?;
            if k < 2 {
                return Err(Error::InvalidInput("a single sensor carries no DOA information".into()));
            }
            if k > LONG_SWEEP_K && !allow_long {
                return Err(Error::InvalidInput(format!(
                    "K = {k} exceeds {LONG_SWEEP_K}; pass --allow-long to run it"
                )));
            }
        }
        Ok(())
    }
}

/// Inclusive `start:stop:step` range. Points are `start + i·step`, so long
/// ranges do not accumulate rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!("range '{s}' is not start:stop:step")));
    }
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("'{p}' is not a number")))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidInput(format!("range '{s}' needs step > 0 and start <= stop")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// Either `a..b` (inclusive integers) or a comma-separated list.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let int = |p: &str| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("'{p}' is not an integer")))
        };
        let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
        if b < a {
            return Err(Error::InvalidInput(format!("list '{s}' is empty")));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    let values = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{p}' is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::InvalidInput("empty list".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub variable: SweepVariable,
    pub k: usize,
    pub theta_deg: f64,
    pub snr_db: f64,
    pub fisher_y: f64,
    pub fisher_lb: f64,
    pub chi_db: f64,
}

pub fn loss_point(k: usize, theta_deg: f64, snr_db: f64, exec: Execution) -> Result<(f64, f64, f64)> {
    let src = UlaSource::from_deg_db(k, theta_deg, snr_db)?;
    let mp = model_point(&src, &QuarticCache::new(), exec)?;
    let fisher_y = fisher_unquantized(&mp.cov)?;
    let (fisher_lb, _) = fisher_lower_bound(&mp.moments)?;
    let (_, chi_db) = quantization_loss(fisher_lb, fisher_y)?;
    Ok((fisher_y, fisher_lb, chi_db))
}

pub fn loss_sweep(spec: &SweepSpec, allow_long: bool, exec: Execution) -> Result<Vec<LossRow>> {
    spec.validate(allow_long)?;
    let points = spec.points()?;
    exec.try_map(points.len(), |i| {
        let (k, theta_deg, snr_db) = points[i];
        let (fisher_y, fisher_lb, chi_db) = loss_point(k, theta_deg, snr_db, exec)?;
        Ok(LossRow {
            variable: spec.variable,
            k,
            theta_deg,
            snr_db,
            fisher_y,
            fisher_lb,
            chi_db,
        })
    })
}
