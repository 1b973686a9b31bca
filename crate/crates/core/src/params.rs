//! Physical constants, configuration parameters and unit conversions.
//!
//! Everything past this module works in Watts, Hz, seconds and bits. dBm only
//! appears when reading configuration values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Total noise power over `bandwidth_hz` for a flat PSD given in dBm/Hz.
pub fn noise_variance(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(psd_dbm_hz) * bandwidth_hz
}

/// Antenna, group and RF-chain counts of the base station.
///
/// The transmit array is a uniform planar array of `rows_l x cols_r`
/// elements, split into `n_m` contiguous groups of `n_k` antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemGeometry {
    pub n_t: usize,
    pub n_m: usize,
    pub n_k: usize,
    pub n_rf: usize,
    /// APM data streams, one per user.
    pub n_s: usize,
    pub rows_l: usize,
    pub cols_r: usize,
}

/// One broken [`SystemGeometry`] invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryViolation {
    NonPositive(&'static str),
    GroupProduct,
    ArrayProduct,
    StreamsExceedChains,
    ChainsNotBelowGroups,
}

impl fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryViolation::NonPositive(field) => write!(f, "{field} > 0"),
            GeometryViolation::GroupProduct => f.write_str("n_t == n_m*n_k"),
            GeometryViolation::ArrayProduct => f.write_str("n_t == rows_l*cols_r"),
            GeometryViolation::StreamsExceedChains => f.write_str("n_s <= n_rf"),
            GeometryViolation::ChainsNotBelowGroups => f.write_str("n_rf < n_m"),
        }
    }
}

/// Most-square factorization `n = l * r` with `l >= r`.
pub fn square_factorization(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut r = (n as f64).sqrt() as usize;
    while r > 1 && !n.is_multiple_of(r) {
        r -= 1;
    }
    let r = r.max(1);
    (n / r, r)
}

impl SystemGeometry {
    /// Geometry with `n_t = n_m * n_k` laid out on the most-square planar array.
    pub fn new(n_users: usize, n_rf: usize, n_m: usize, n_k: usize) -> Self {
        let n_t = n_m * n_k;
        let (rows_l, cols_r) = square_factorization(n_t);
        Self {
            n_t,
            n_m,
            n_k,
            n_rf,
            n_s: n_users,
            rows_l,
            cols_r,
        }
    }

    /// `(N_RF, N_M, N_K) = (14, 16, 8)` with 8 users on a 16x8 array.
    pub fn reference() -> Self {
        Self::new(8, 14, 16, 8)
    }

    pub fn n_users(&self) -> usize {
        self.n_s
    }

    /// Number of antennas driven in any one spatial scheme.
    pub fn active_antennas(&self) -> usize {
        self.n_rf * self.n_k
    }

    /// Every violated invariant; empty when the geometry is valid for GSM-HP.
    pub fn violations(&self) -> Vec<GeometryViolation> {
        let mut out = Vec::new();
        for (name, v) in [
            ("n_t", self.n_t),
            ("n_m", self.n_m),
            ("n_k", self.n_k),
            ("n_rf", self.n_rf),
            ("n_s", self.n_s),
            ("rows_l", self.rows_l),
            ("cols_r", self.cols_r),
        ] {
            if v == 0 {
                out.push(GeometryViolation::NonPositive(name));
            }
        }
        if self.n_t != self.n_m * self.n_k {
            out.push(GeometryViolation::GroupProduct);
        }
        if self.n_t != self.rows_l * self.cols_r {
            out.push(GeometryViolation::ArrayProduct);
        }
        if self.n_s > self.n_rf {
            out.push(GeometryViolation::StreamsExceedChains);
        }
        if self.n_rf >= self.n_m {
            out.push(GeometryViolation::ChainsNotBelowGroups);
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        validate_geometry(self)
    }
}

/// Checks every [`SystemGeometry`] invariant, listing all violations at once.
pub fn validate_geometry(g: &SystemGeometry) -> Result<()> {
    let v = g.violations();
    if v.is_empty() {
        Ok(())
    } else {
        let joined = v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        Err(Error::infeasible(joined))
    }
}

/// Radio hardware, noise and computation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    pub p_max_w: f64,
    /// Power amplifier efficiency.
    pub alpha: f64,
    pub p_rf_chain_w: f64,
    pub p_shifter_w: f64,
    pub p_switch_w: f64,
    pub p_fix_w: f64,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub coherence_bw_hz: f64,
    pub coherence_time_s: f64,
    /// Pilot orthogonality factor.
    pub tau: f64,
    pub l_bs_flops_per_w: f64,
    /// Channel coding cost, Watt per bit/s.
    pub p_cod_w_per_bps: f64,
    /// How many zero-forcing solves GSM-HP is charged per coherence block.
    pub precoder_solves: PrecoderSolves,
}

/// Precoder solves charged to GSM-HP per coherence block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecoderSolves {
    /// One solve, for the scheme in use.
    #[default]
    Single,
    /// One solve for each of the `M` spatial schemes.
    AllSchemes,
}

impl FromStr for PrecoderSolves {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "all-schemes" => Ok(Self::AllSchemes),
            other => Err(Error::InvalidParameter(format!(
                "precoder_solves must be 'single' or 'all-schemes', got '{other}'"
            ))),
        }
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            p_max_w: dbm_to_watts(39.0),
            alpha: 0.38,
            p_rf_chain_w: 45e-3,
            p_shifter_w: 15e-3,
            p_switch_w: 5e-3,
            p_fix_w: 1.0,
            noise_psd_dbm_hz: -174.0,
            bandwidth_hz: 800e6,
            coherence_bw_hz: 100e6,
            coherence_time_s: 5e-3,
            tau: 1.0,
            l_bs_flops_per_w: 12.8e9,
            p_cod_w_per_bps: 1e-10,
            precoder_solves: PrecoderSolves::Single,
        }
    }
}

impl RadioParams {
    pub fn noise_variance_w(&self) -> f64 {
        noise_variance(self.noise_psd_dbm_hz, self.bandwidth_hz)
    }

    /// Coherence blocks per second, `B / (B_c * T_c)`.
    pub fn blocks_per_second(&self) -> f64 {
        self.bandwidth_hz / (self.coherence_bw_hz * self.coherence_time_s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_max_w", self.p_max_w),
            ("alpha", self.alpha),
            ("p_rf_chain_w", self.p_rf_chain_w),
            ("p_shifter_w", self.p_shifter_w),
            ("p_switch_w", self.p_switch_w),
            ("p_fix_w", self.p_fix_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("coherence_bw_hz", self.coherence_bw_hz),
            ("coherence_time_s", self.coherence_time_s),
            ("l_bs_flops_per_w", self.l_bs_flops_per_w),
            ("p_cod_w_per_bps", self.p_cod_w_per_bps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.alpha > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be <= 1, got {}",
                self.alpha
            )));
        }
        if !(self.tau >= 1.0) {
            return Err(Error::InvalidParameter(format!("tau must be >= 1, got {}", self.tau)));
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::InvalidParameter("noise_psd_dbm_hz must be finite".into()));
        }
        Ok(())
    }
}

/// Support of the uniform elevation-angle draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElevationRange {
    #[default]
    ZeroToTwoPi,
    ZeroToPi,
}

impl ElevationRange {
    pub fn upper(self) -> f64 {
        match self {
            ElevationRange::ZeroToTwoPi => 2.0 * std::f64::consts::PI,
            ElevationRange::ZeroToPi => std::f64::consts::PI,
        }
    }
}

impl FromStr for ElevationRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0-2pi" => Ok(Self::ZeroToTwoPi),
            "0-pi" => Ok(Self::ZeroToPi),
            other => Err(Error::InvalidParameter(format!(
                "elevation_range must be '0-2pi' or '0-pi', got '{other}'"
            ))),
        }
    }
}

/// Large- and small-scale propagation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub n_ray: usize,
    pub path_loss_exp: f64,
    /// Standard deviation of `10 log10(zeta)`, in dB.
    pub shadowing_sigma_db: f64,
    pub user_dist_min_m: f64,
    pub user_dist_max_m: f64,
    pub carrier_freq_hz: f64,
    pub elevation: ElevationRange,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            n_ray: 20,
            path_loss_exp: 4.6,
            shadowing_sigma_db: 9.2,
            user_dist_min_m: 20.0,
            user_dist_max_m: 100.0,
            carrier_freq_hz: 28e9,
            elevation: ElevationRange::ZeroToTwoPi,
        }
    }
}

impl ChannelParams {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Half-wavelength element spacing.
    pub fn element_spacing_m(&self) -> f64 {
        self.wavelength_m() / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ray == 0 {
            return Err(Error::InvalidParameter("n_ray must be >= 1".into()));
        }
        if !(self.user_dist_min_m > 0.0) {
            return Err(Error::InvalidParameter("user_dist_min_m must be > 0".into()));
        }
        if !(self.user_dist_max_m > self.user_dist_min_m) {
            return Err(Error::InvalidParameter(
                "user_dist_max_m must exceed user_dist_min_m".into(),
            ));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::InvalidParameter("carrier_freq_hz must be > 0".into()));
        }
        if !(self.shadowing_sigma_db >= 0.0) || !self.path_loss_exp.is_finite() {
            return Err(Error::InvalidParameter(
                "shadowing_sigma_db must be >= 0 and path_loss_exp finite".into(),
            ));
        }
        Ok(())
    }
}
