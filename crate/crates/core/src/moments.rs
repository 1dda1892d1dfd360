//! Moments of the hard-limited receive signal.
//!
//! After `z = sign(y)` the second-order behaviour of `z` follows from the
//! arcsine law, while the covariance of the quadratic statistics
//! `φ_l(z) = z_i z_j` needs fourth-order sign moments. Those reduce to
//! quadrivariate Gaussian orthant probabilities, which are evaluated here by a
//! one-dimensional Plackett path integral: the correlation matrix is deformed
//! from a block-diagonal matrix (where the answer factorizes into bivariate
//! orthants) to the target, and along the path the derivative with respect to
//! each correlation is a bivariate density times a conditional bivariate
//! orthant, both closed form.

use crate::array_model::{receive_covariance, CovariancePair, UlaSource};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{quad_adaptive, spd_factor, QuadratureSpec, SymMatrix};
use std::collections::HashMap;
use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::RwLock;

/// Correlations are clamped to `±RHO_CLAMP` before `arcsin` derivatives and
/// orthant evaluations.
pub const RHO_CLAMP: f64 = 1.0 - 1e-12;

/// Memo key resolution for [`QuarticCache`].
const KEY_SCALE: f64 = 1e14;

const PATH_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-13,
    rel_tol: 1e-12,
    max_depth: 40,
};

#[inline]
pub fn clamp_corr(r: f64) -> f64 {
    r.clamp(-RHO_CLAMP, RHO_CLAMP)
}

/// Sign-domain covariance and its θ-derivative, plus the underlying
/// correlation matrix `ρ = Σ_y / (γ² + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCovariance {
    pub sigma_z: SymMatrix,
    pub d_sigma_z: SymMatrix,
    pub rho: SymMatrix,
}

impl QuantizedCovariance {
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// Arcsine law `Σ_z = (2/π) arcsin(ρ)` and its entrywise derivative.
pub fn arcsine_map(cov: &CovariancePair, gamma: f64) -> QuantizedCovariance {
    let m = cov.sigma_y.dim();
    let scale = gamma * gamma + 1.0;
    let rho = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            1.0
        } else {
            (cov.sigma_y.get(i, j) / scale).clamp(-1.0, 1.0)
        }
    });
    let sigma_z = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            1.0
        } else {
            FRAC_2_PI * clamp_corr(rho.get(i, j)).asin()
        }
    });
    let d_sigma_z = SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            0.0
        } else {
            let r = clamp_corr(rho.get(i, j));
            2.0 * cov.d_sigma_y.get(i, j) / (PI * scale * (1.0 - r * r).sqrt())
        }
    });
    QuantizedCovariance {
        sigma_z,
        d_sigma_z,
        rho,
    }
}

/// `P(X₁ > 0, X₂ > 0)` for a standard bivariate normal with correlation `rho`.
pub fn orthant2(rho: f64) -> f64 {
    0.25 + rho.clamp(-1.0, 1.0).asin() / (2.0 * PI)
}

type Corr4 = [[f64; 4]; 4];

// The three ways of splitting {0,1,2,3} into two pairs.
const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

fn corr4_from(corr: &SymMatrix) -> Result<Corr4> {
    if corr.dim() != 4 {
        return Err(Error::InvalidCorrelation(format!("expected 4x4, got {}x{}", corr.dim(), corr.dim())));
    }
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        if (corr.get(i, i) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCorrelation(format!("diagonal entry {i} is {}", corr.get(i, i))));
        }
        r[i][i] = 1.0;
        for j in 0..i {
            let v = corr.get(i, j);
            if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                return Err(Error::InvalidCorrelation(format!("entry ({i},{j}) = {v}")));
            }
            r[i][j] = clamp_corr(v);
            r[j][i] = r[i][j];
        }
    }
    let clamped = SymMatrix::from_lower_fn(4, |i, j| r[i][j]);
    spd_factor(&clamped, 0.0)
        .map_err(|_| Error::InvalidCorrelation("not positive semidefinite after clamping".into()))?;
    Ok(r)
}

fn corr4_from_six(c: [f64; 6]) -> Corr4 {
    let [r01, r02, r03, r12, r13, r23] = c;
    [
        [1.0, r01, r02, r03],
        [r01, 1.0, r12, r13],
        [r02, r12, 1.0, r23],
        [r03, r13, r23, 1.0],
    ]
}

/// Pairing whose cross-correlations are smallest, so the path is shortest.
fn best_pairing(r: &Corr4) -> [(usize, usize); 2] {
    let cross = |p: &[(usize, usize); 2]| {
        let [(a, b), (c, d)] = *p;
        r[a][c].abs() + r[a][d].abs() + r[b][c].abs() + r[b][d].abs()
    };
    let mut best = PAIRINGS[0];
    for p in &PAIRINGS[1..] {
        if cross(p) < cross(&best) {
            best = *p;
        }
    }
    best
}

/// Partial correlation of `(k, l)` given `(i, j)`.
fn partial_corr(r: &Corr4, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let rij = r[i][j];
    let det = 1.0 - rij * rij;
    let quad = |u: [f64; 2], v: [f64; 2]| (u[0] * v[0] + u[1] * v[1] - rij * (u[0] * v[1] + u[1] * v[0])) / det;
    let sk = [r[k][i], r[k][j]];
    let sl = [r[l][i], r[l][j]];
    let ckk = 1.0 - quad(sk, sk);
    let cll = 1.0 - quad(sl, sl);
    let ckl = r[k][l] - quad(sk, sl);
    let denom = ckk * cll;
    if denom <= 0.0 {
        return ckl.signum();
    }
    (ckl / denom.sqrt()).clamp(-1.0, 1.0)
}

/// Integrates `Σ_cross ρ_ij · g(t ρ_ij, pc_kl|ij(t))` over the path
/// `t ∈ [0, 1]` from the block-diagonal matrix of `pairing` to `r`.
fn path_integral(r: &Corr4, pairing: [(usize, usize); 2], g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let [(a, b), (c, d)] = pairing;
    let cross = [(a, c, b, d), (a, d, b, c), (b, c, a, d), (b, d, a, c)];
    if cross.iter().all(|&(i, j, _, _)| r[i][j] == 0.0) {
        return Ok(0.0);
    }
    let integrand = |t: f64| {
        let mut rt = *r;
        for &(i, j, _, _) in &cross {
            rt[i][j] = t * r[i][j];
            rt[j][i] = rt[i][j];
        }
        cross
            .iter()
            .filter(|&&(i, j, _, _)| r[i][j] != 0.0)
            .map(|&(i, j, k, l)| r[i][j] * g(rt[i][j], partial_corr(&rt, i, j, k, l)))
            .sum::<f64>()
    };
    quad_adaptive(integrand, 0.0, 1.0, &PATH_QUADRATURE)
}

fn orthant4_corr(r: &Corr4) -> Result<f64> {
    let pairing = best_pairing(r);
    let [(a, b), (c, d)] = pairing;
    let base = orthant2(r[a][b]) * orthant2(r[c][d]);
    // ∂P/∂ρ_ij = φ₂(0, 0; ρ_ij) · P(X_k > 0, X_l > 0 | X_i = X_j = 0)
    let delta = path_integral(r, pairing, |rij, pc| orthant2(pc) / (2.0 * PI * (1.0 - rij * rij).sqrt()))?;
    Ok((base + delta).clamp(0.0, 1.0))
}

fn quartic_corr(r: &Corr4) -> Result<f64> {
    let pairing = best_pairing(r);
    let [(a, b), (c, d)] = pairing;
    let base = FRAC_2_PI * FRAC_2_PI * r[a][b].asin() * r[c][d].asin();
    // ∂E[z₁z₂z₃z₄]/∂ρ_ij = (4/π²) arcsin(pc_kl|ij) / √(1 − ρ_ij²)
    let delta = path_integral(r, pairing, |rij, pc| pc.asin() / (1.0 - rij * rij).sqrt())?;
    Ok((base + 4.0 / (PI * PI) * delta).clamp(-1.0, 1.0))
}

/// Probability that all four components of a zero-mean Gaussian with
/// correlation matrix `corr` are positive.
pub fn orthant4(corr: &SymMatrix) -> Result<f64> {
    orthant4_corr(&corr4_from(corr)?)
}

/// `E[sign(X₁) sign(X₂) sign(X₃) sign(X₄)]` for a 4×4 correlation matrix,
/// evaluated with a single path integral.
pub fn quartic_sign_moment(corr: &SymMatrix) -> Result<f64> {
    quartic_corr(&corr4_from(corr)?)
}

/// Same quantity as [`quartic_sign_moment`] assembled from signed orthant
/// probabilities: `E = 2 Σ_{q₁=+1} (∏q) Φ₊(D_q Σ̄ D_q)`.
pub fn quartic_sign_moment_by_orthants(corr: &SymMatrix) -> Result<f64> {
    let r = corr4_from(corr)?;
    let mut total = 0.0;
    for mask in 0..8u32 {
        let q = [1.0, sign_bit(mask, 0), sign_bit(mask, 1), sign_bit(mask, 2)];
        let mut rq = r;
        for i in 0..4 {
            for j in 0..4 {
                rq[i][j] = q[i] * q[j] * r[i][j];
            }
        }
        total += q.iter().product::<f64>() * orthant4_corr(&rq)?;
    }
    Ok(2.0 * total)
}

fn sign_bit(mask: u32, bit: u32) -> f64 {
    if mask & (1 << bit) != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Thread-safe memo of all-distinct quartic sign moments, keyed on the six
/// correlations rounded to 1e-14. The stored value is computed from the
/// rounded key, so it never depends on which caller filled the entry.
#[derive(Debug)]
pub struct QuarticCache {
    map: RwLock<HashMap<[i64; 6], f64>>,
    capacity: usize,
}

impl Default for QuarticCache {
    fn default() -> Self {
        Self::with_capacity(1 << 20)
    }
}

impl QuarticCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cache that clears itself once it would exceed `capacity` entries.
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            map: RwLock::new(HashMap::new()),
            capacity: capacity.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quartic moment for correlations `[ρ01, ρ02, ρ03, ρ12, ρ13, ρ23]`.
    pub fn quartic(&self, corr6: [f64; 6]) -> Result<f64> {
        let key = corr6.map(|v| (clamp_corr(v) * KEY_SCALE).round() as i64);
        if let Some(v) = self.map.read().ok().and_then(|m| m.get(&key).copied()) {
            return Ok(v);
        }
        let value = quartic_corr(&corr4_from_six(key.map(|k| k as f64 / KEY_SCALE)))?;
        if let Ok(mut m) = self.map.write() {
            if m.len() >= self.capacity {
                m.clear();
            }
            m.insert(key, value);
        }
        Ok(value)
    }
}

/// `E[z_i z_j z_k z_l]` (0-based indices) for the sign outputs described by
/// `qc`.
pub fn quartic_moment(i: usize, j: usize, k: usize, l: usize, qc: &QuantizedCovariance) -> Result<f64> {
    quartic_moment_cached(i, j, k, l, qc, &QuarticCache::with_capacity(1))
}

pub fn quartic_moment_cached(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    qc: &QuantizedCovariance,
    cache: &QuarticCache,
) -> Result<f64> {
    let m = qc.dim();
    if [i, j, k, l].iter().any(|&x| x >= m) {
        return Err(Error::InvalidInput(format!("index out of range for dimension {m}")));
    }
    let mut idx = [i, j, k, l];
    idx.sort_unstable();
    // z² = 1: cancel equal pairs and keep the indices that appear an odd
    // number of times.
    let mut odd = [0usize; 4];
    let mut n_odd = 0;
    let mut p = 0;
    while p < 4 {
        let mut q = p;
        while q < 4 && idx[q] == idx[p] {
            q += 1;
        }
        if (q - p) % 2 == 1 {
            odd[n_odd] = idx[p];
            n_odd += 1;
        }
        p = q;
    }
    match n_odd {
        0 => Ok(1.0),
        2 => Ok(qc.sigma_z.get(odd[0], odd[1])),
        4 => {
            let [a, b, c, d] = odd;
            let r = &qc.rho;
            cache.quartic([
                r.get(a, b),
                r.get(a, c),
                r.get(a, d),
                r.get(b, c),
                r.get(b, d),
                r.get(c, d),
            ])
        }
        _ => unreachable!("four indices leave an even number of unpaired ones"),
    }
}

/// Enumeration of the strict lower triangle: `l ↔ (i, j)` with `j < i`,
/// column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndex {
    m: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(m: usize) -> Self {
        let pairs = (0..m).flat_map(|j| (j + 1..m).map(move |i| (i, j))).collect();
        Self { m, pairs }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `L = M(M−1)/2`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, l: usize) -> (usize, usize) {
        self.pairs[l]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Inverse mapping; argument order does not matter.
    pub fn index_of(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = if a > b { (a, b) } else { (b, a) };
        if i == j || i >= self.m {
            return None;
        }
        // Columns before j hold (m-1) + (m-2) + ... + (m-j) entries.
        Some(j * (2 * self.m - j - 1) / 2 + (i - j - 1))
    }

    /// Strict lower triangle of `s` in pair order.
    pub fn vech(&self, s: &SymMatrix) -> Vec<f64> {
        self.pairs.iter().map(|&(i, j)| s.get(i, j)).collect()
    }
}

/// Mean, θ-derivative of the mean, and covariance of the quadratic sign
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticMoments {
    pub mu: Vec<f64>,
    pub d_mu: Vec<f64>,
    pub r: SymMatrix,
}

pub fn statistic_moments(qc: &QuantizedCovariance) -> Result<StatisticMoments> {
    statistic_moments_with(qc, &QuarticCache::new(), Execution::default())
}

pub fn statistic_moments_with(
    qc: &QuantizedCovariance,
    cache: &QuarticCache,
    exec: Execution,
) -> Result<StatisticMoments> {
    let index = PairIndex::new(qc.dim());
    let mu = index.vech(&qc.sigma_z);
    let d_mu = index.vech(&qc.d_sigma_z);
    let rows = exec.try_map(index.len(), |l| {
        let (i, j) = index.pair(l);
        (0..l)
            .map(|m| {
                let (k, n) = index.pair(m);
                Ok(quartic_moment_cached(i, j, k, n, qc, cache)? - mu[l] * mu[m])
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut r = SymMatrix::zeros(index.len());
    for (l, row) in rows.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            r.set(l, m, *v);
        }
        // E[(z_i z_j)²] = 1
        r.set(l, l, 1.0 - mu[l] * mu[l]);
    }
    Ok(StatisticMoments { mu, d_mu, r })
}

/// Every moment-space quantity at one model point.
#[derive(Debug, Clone)]
pub struct ModelPoint {
    pub src: UlaSource,
    pub cov: CovariancePair,
    pub qc: QuantizedCovariance,
    pub moments: StatisticMoments,
}

pub fn model_point(src: &UlaSource, cache: &QuarticCache, exec: Execution) -> Result<ModelPoint> {
    let cov = receive_covariance(src);
    let qc = arcsine_map(&cov, src.gamma());
    let moments = statistic_moments_with(&qc, cache, exec)?;
    Ok(ModelPoint {
        src: *src,
        cov,
        qc,
        moments,
    })
}

/// Random `m × m` correlation matrix built from normalized Gaussian Gram
/// vectors of random length in `m..=m+3`, so near-singular matrices show up.
pub fn random_correlation(m: usize, rng: &mut impl rand::Rng) -> SymMatrix {
    let dim = rng.gen_range(m..=m + 3);
    let v: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let w: Vec<f64> = (0..dim).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            w.into_iter().map(|x| x / n).collect()
        })
        .collect();
    SymMatrix::from_lower_fn(m, |i, j| {
        if i == j {
            1.0
        } else {
            v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum()
        }
    })
}
