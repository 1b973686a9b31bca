//! Closed-form GSM spectral efficiency and total capacity.
//!
//! With single-antenna users the conditional covariance of `y_k` under scheme
//! `n` is the scalar `Sigma_{k,n} = sigma^2 + g_{k,n}`, and the determinant in
//! the approximation reduces to an absolute value:
//!
//! ```text
//! R_k = log2(M / (2 sigma^2)) - 1/M sum_n log2( sum_t 1 / (Sigma_{k,n} + Sigma_{k,t}) )
//! ```
//!
//! For `M = 1` this is `log2(Sigma / sigma^2) = log2(1 + SNR)`.

use crate::error::{Error, Result};
use crate::precoding::PrecoderSet;
use crate::params::RadioParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    /// bit/s/Hz per user.
    pub per_user_bps_hz: Vec<f64>,
    /// bit/s over the whole band.
    pub total_bps: f64,
    pub sigma2_n: f64,
}

pub fn conditional_covariance(gain: f64, sigma2: f64) -> f64 {
    sigma2 + gain
}

/// Spectral efficiency of one user from its `M` scheme covariances.
pub fn spectral_efficiency_user(sigmas: &[f64], sigma2: f64) -> Result<f64> {
    if sigmas.is_empty() {
        return Err(Error::Domain("at least one spatial scheme required".into()));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("noise variance must be > 0, got {sigma2}")));
    }
    if let Some(bad) = sigmas.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain(format!("covariance must be positive, got {bad}")));
    }
    let m = sigmas.len();

    // Ascending covariances make every inner sum run over terms of
    // descending magnitude.
    let mut sorted = sigmas.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mean_log: f64 = sorted
        .iter()
        .map(|&a| inner_sum(a, &sorted).log2())
        .sum::<f64>()
        / m as f64;
    let rate = (m as f64 / (2.0 * sigma2)).log2() - mean_log;
    // Every inner term is <= 1/(2 sigma^2), so the rate is nonnegative up to rounding.
    if rate < -1e-9 {
        return Err(Error::Domain(format!("negative spectral efficiency {rate}")));
    }
    Ok(rate.max(0.0))
}

/// `sum_t 1 / (a + sorted[t])`, in four interleaved accumulators.
fn inner_sum(a: f64, sorted: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut chunks = sorted.chunks_exact(4);
    for c in &mut chunks {
        acc[0] += 1.0 / (a + c[0]);
        acc[1] += 1.0 / (a + c[1]);
        acc[2] += 1.0 / (a + c[2]);
        acc[3] += 1.0 / (a + c[3]);
    }
    for (slot, &t) in acc.iter_mut().zip(chunks.remainder()) {
        *slot += 1.0 / (a + t);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// `B * sum_k R_k`.
pub fn total_capacity(per_user: &[f64], bandwidth_hz: f64) -> f64 {
    bandwidth_hz * per_user.iter().sum::<f64>()
}

/// Rate of every user given the precoders of all spatial schemes.
pub fn gsm_rate(precoders: &PrecoderSet, radio: &RadioParams) -> Result<RateResult> {
    let sigma2 = radio.noise_variance_w();
    let k_users = precoders.per_scheme.first().map_or(0, |s| s.per_user_gain.len());
    let gains: Vec<Vec<f64>> = (0..k_users)
        .map(|k| precoders.per_scheme.iter().map(|s| s.per_user_gain[k]).collect())
        .collect();
    rate_from_gains(&gains, sigma2, radio.bandwidth_hz)
}

/// Rates from per-user gain vectors (`gains[k][n]`, one entry per scheme).
///
/// Users with bit-identical gain vectors share one evaluation.
pub fn rate_from_gains(gains: &[Vec<f64>], sigma2: f64, bandwidth_hz: f64) -> Result<RateResult> {
    let mut per_user: Vec<f64> = Vec::with_capacity(gains.len());
    for (k, g) in gains.iter().enumerate() {
        if let Some(j) = (0..k).find(|&j| gains[j] == *g) {
            per_user.push(per_user[j]);
            continue;
        }
        if let Some(n) = g.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!(
                "user {k}, scheme {n}: gain must be finite and >= 0, got {}",
                g[n]
            )));
        }
        let sigmas: Vec<f64> = g.iter().map(|&x| conditional_covariance(x, sigma2)).collect();
        let r = spectral_efficiency_user(&sigmas, sigma2)
            .map_err(|e| Error::Domain(format!("user {k}: {e}")))?;
        per_user.push(r);
    }
    Ok(RateResult {
        total_bps: total_capacity(&per_user, bandwidth_hz),
        per_user_bps_hz: per_user,
        sigma2_n: sigma2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        assert_eq!(conditional_covariance(3.0, 1.0), 4.0);
        assert_eq!(conditional_covariance(0.0, 2.5), 2.5);
    }

    #[test]
    fn single_scheme_is_shannon() {
        let r = spectral_efficiency_user(&[4.0], 1.0).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_gives_zero_rate() {
        let r = spectral_efficiency_user(&[3.0; 8], 3.0).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn equal_covariances() {
        let r = spectral_efficiency_user(&[2.0, 2.0], 1.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(spectral_efficiency_user(&[], 1.0).is_err());
        assert!(spectral_efficiency_user(&[1.0, -1.0], 1.0).is_err());
        assert!(spectral_efficiency_user(&[1.0], 0.0).is_err());
        assert!(rate_from_gains(&[vec![f64::NAN]], 1.0, 1.0).is_err());
    }

    #[test]
    fn totals() {
        assert_eq!(total_capacity(&[1.0, 1.0], 800e6), 1.6e9);
        assert_eq!(total_capacity(&[], 800e6), 0.0);
        assert_eq!(total_capacity(&[2.0], 1.0), 2.0);
    }

    #[test]
    fn zero_channel_has_zero_capacity() {
        let r = rate_from_gains(&[vec![0.0; 4], vec![0.0; 4]], 1e-12, 8e8).unwrap();
        assert!(r.total_bps.abs() < 1e-3, "{}", r.total_bps);
    }

    #[test]
    fn shared_gain_vectors_reuse_result() {
        let g = vec![1.0, 5.0, 2.0, 9.0];
        let r = rate_from_gains(&[g.clone(), g.clone(), vec![1.0; 4]], 0.5, 2.0).unwrap();
        assert_eq!(r.per_user_bps_hz[0], r.per_user_bps_hz[1]);
        let direct = spectral_efficiency_user(&[1.5, 5.5, 2.5, 9.5], 0.5).unwrap();
        assert_eq!(r.per_user_bps_hz[0], direct);
        assert!((r.total_bps - 2.0 * r.per_user_bps_hz.iter().sum::<f64>()).abs() < 1e-12);
    }
}
