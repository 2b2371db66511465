//! Samplers for the complete data `Y = Z + E`.
//!
//! `Z = U·diag(θ)·Vᵀ` has rank `q` with Haar-distributed frames; `E` is
//! i.i.d. `N(0, σ²)`. The two samplers differ only in the law of `θ`.

use rand::distributions::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::linalg::{random_orthonormal, DenseMatrix, LowRankFactors};

/// A sampled signal/observation pair with the factors of the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub z: DenseMatrix,
    pub y: DenseMatrix,
    pub factors: LowRankFactors,
    pub sigma: f64,
    pub q: usize,
}

impl GroundTruth {
    /// FNV-1a over the bit patterns of `Y`; identifies a draw in logs.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in self.y.data() {
            for b in x.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

fn check_shape(m: usize, n: usize, q: usize, sigma: f64) -> Result<()> {
    if q == 0 || q > m.min(n) {
        return Err(param_err!("rank {q} outside 1..={}", m.min(n)));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(param_err!(
            "noise SD must be finite and nonnegative, got {sigma}"
        ));
    }
    Ok(())
}

fn assemble<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    mut theta: Vec<f64>,
    sigma: f64,
    rng: &mut R,
    u: DenseMatrix,
    v: DenseMatrix,
) -> GroundTruth {
    theta.sort_by(|a, b| b.total_cmp(a));
    let q = theta.len();
    let factors = LowRankFactors::from_parts_unchecked(u, theta, v);
    let z = factors.reconstruct();
    let y = if sigma == 0.0 {
        z.clone()
    } else {
        let mut y = z.clone();
        for x in y.data_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *x += sigma * e;
        }
        y
    };
    debug_assert_eq!(y.shape(), (m, n));
    GroundTruth {
        z,
        y,
        factors,
        sigma,
        q,
    }
}

/// Gaussian model: `θ_k = signal_scale · √(mn/q) · |g_k|`, `g_k ~ N(0, 1)`.
///
/// The scaling gives `Z` an average entrywise second moment of
/// `signal_scale²`, so `sigma` reads directly as a noise-to-signal ratio.
/// Draw order: `U`, `V`, `θ`, then `E` row-major.
pub fn sample_gaussian_model<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    q: usize,
    signal_scale: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<GroundTruth> {
    check_shape(m, n, q, sigma)?;
    if !(signal_scale > 0.0) || !signal_scale.is_finite() {
        return Err(param_err!(
            "signal scale must be positive, got {signal_scale}"
        ));
    }
    let u = random_orthonormal(m, q, rng)?;
    let v = random_orthonormal(n, q, rng)?;
    let scale = signal_scale * ((m * n) as f64 / q as f64).sqrt();
    let theta: Vec<f64> = (0..q)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            scale * g.abs()
        })
        .collect();
    Ok(assemble(m, n, theta, sigma, rng, u, v))
}

/// Inverse CDF of the Laplace(0, b) law at `p ∈ (0, 1)`.
pub fn laplace_inverse_cdf(p: f64, b: f64) -> f64 {
    let c = p - 0.5;
    -b * c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

/// One Laplace(0, b) draw by inversion of an open-interval uniform.
pub fn sample_laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    let p: f64 = rng.sample(Open01);
    laplace_inverse_cdf(p, b)
}

/// Bayesian model: `θ_k = |L_k|` with `L_k ~ Laplace(0, b)`, uniform frames.
///
/// The Laplace prior is symmetric; a negative draw is folded to its
/// magnitude, which is the same as absorbing the sign into the column of `U`.
pub fn sample_bayes_model<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    q: usize,
    b: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<GroundTruth> {
    check_shape(m, n, q, sigma)?;
    if !(b > 0.0) || !b.is_finite() {
        return Err(param_err!("Laplace scale must be positive, got {b}"));
    }
    let u = random_orthonormal(m, q, rng)?;
    let v = random_orthonormal(n, q, rng)?;
    let theta: Vec<f64> = (0..q).map(|_| sample_laplace(b, rng).abs()).collect();
    Ok(assemble(m, n, theta, sigma, rng, u, v))
}
