//! Base-station power model: transmission, computation and fixed power.
//!
//! Flop counts use 8 real flops per complex multiply-accumulate. The precoder
//! solve per coherence block is
//!
//! ```text
//! gamma_precoding = S * (16 * N_act * K^2 + 8 * K^3)
//! ```
//!
//! where `N_act` is the number of driven antennas (`N_RF * N_K` or `N_T`) and
//! `S` is the number of solves: 1 for full-digital precoding, and for GSM-HP
//! either 1 or `M` depending on [`PrecoderSolves`].

use std::fmt;
use std::str::FromStr;

use crate::codebook::num_spatial_schemes;
use crate::error::{Error, Result};
use crate::params::{PrecoderSolves, RadioParams, SystemGeometry};

/// Transmitter architecture being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Spatial modulation over antenna groups with sub-connected hybrid precoding.
    GsmHp,
    /// Full-digital zero forcing, one RF chain per antenna.
    Fdp,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::GsmHp => "gsm-hp",
            Scheme::Fdp => "fdp",
        }
    }

    /// Checks the geometry constraints this scheme needs.
    pub fn check_geometry(self, geom: &SystemGeometry) -> Result<()> {
        match self {
            Scheme::GsmHp => geom.check(),
            Scheme::Fdp => {
                if geom.n_t == 0 || geom.n_s == 0 {
                    return Err(Error::infeasible("n_t > 0, n_s > 0"));
                }
                if geom.n_t != geom.rows_l * geom.cols_r {
                    return Err(Error::infeasible("n_t == rows_l*cols_r"));
                }
                if geom.n_s > geom.n_t {
                    return Err(Error::infeasible("K <= N_T"));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gsm-hp" | "gsm" => Ok(Scheme::GsmHp),
            "fdp" => Ok(Scheme::Fdp),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Every additive term of the total power, in Watts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBreakdown {
    pub p_pa_w: f64,
    pub p_rf_w: f64,
    pub p_switch_w: f64,
    pub p_transmission_w: f64,
    pub p_ce_w: f64,
    pub p_cd_w: f64,
    pub p_bb_w: f64,
    pub p_lp_c_w: f64,
    pub p_computation_w: f64,
    pub p_fix_w: f64,
    pub p_total_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPower {
    pub p_pa_w: f64,
    pub p_rf_w: f64,
    pub p_switch_w: f64,
    pub p_transmission_w: f64,
}

/// Flop counts per operation and the coherence-block rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopModel {
    /// Flops per channel estimation, `2 tau N_T K^2`.
    pub gamma_ce: f64,
    /// Flops per baseband precoding of one symbol vector, `8 N_RF N_S`.
    pub gamma_bb_flops: f64,
    /// Flops per precoder solution (all schemes).
    pub gamma_precoding: f64,
    /// Coherence blocks per second.
    pub nu_block: f64,
}

impl FlopModel {
    pub fn new(radio: &RadioParams, geom: &SystemGeometry, k_users: usize, scheme: Scheme) -> Result<Self> {
        let k = k_users as f64;
        let (schemes, n_chains, n_act) = match scheme {
            Scheme::GsmHp => (
                match radio.precoder_solves {
                    PrecoderSolves::Single => 1.0,
                    PrecoderSolves::AllSchemes => num_spatial_schemes(geom.n_m, geom.n_rf)? as f64,
                },
                geom.n_rf as f64,
                geom.active_antennas() as f64,
            ),
            Scheme::Fdp => (1.0, geom.n_t as f64, geom.n_t as f64),
        };
        Ok(Self {
            gamma_ce: 2.0 * radio.tau * geom.n_t as f64 * k * k,
            gamma_bb_flops: 8.0 * n_chains * geom.n_s as f64,
            gamma_precoding: schemes * (16.0 * n_act * k * k + 8.0 * k * k * k),
            nu_block: radio.blocks_per_second(),
        })
    }
}

pub fn transmission_power(radio: &RadioParams, geom: &SystemGeometry, scheme: Scheme) -> TransmissionPower {
    let p_pa_w = radio.p_max_w / radio.alpha;
    let (p_rf_w, p_switch_w) = match scheme {
        Scheme::GsmHp => (
            geom.n_rf as f64 * radio.p_rf_chain_w + geom.active_antennas() as f64 * radio.p_shifter_w,
            geom.n_rf as f64 * radio.p_switch_w,
        ),
        Scheme::Fdp => (geom.n_t as f64 * radio.p_rf_chain_w, 0.0),
    };
    TransmissionPower {
        p_pa_w,
        p_rf_w,
        p_switch_w,
        p_transmission_w: p_pa_w + p_rf_w + p_switch_w,
    }
}

/// Pilot-based channel estimation over all `N_T` antennas, same for both schemes.
pub fn channel_estimation_power(radio: &RadioParams, geom: &SystemGeometry, k_users: usize) -> f64 {
    let k = k_users as f64;
    radio.blocks_per_second() * 2.0 * radio.tau * geom.n_t as f64 * k * k / radio.l_bs_flops_per_w
}

pub fn coding_power(radio: &RadioParams, r_total_bps: f64) -> f64 {
    radio.p_cod_w_per_bps * r_total_bps
}

pub fn baseband_precoding_power(radio: &RadioParams, n_rf_effective: usize, n_s: usize) -> f64 {
    radio.bandwidth_hz * 8.0 * n_rf_effective as f64 * n_s as f64 / radio.l_bs_flops_per_w
}

pub fn precoder_solution_power(
    radio: &RadioParams,
    geom: &SystemGeometry,
    k_users: usize,
    scheme: Scheme,
) -> Result<f64> {
    let flops = FlopModel::new(radio, geom, k_users, scheme)?;
    Ok(flops.nu_block * flops.gamma_precoding / radio.l_bs_flops_per_w)
}

pub fn total_power(
    radio: &RadioParams,
    geom: &SystemGeometry,
    scheme: Scheme,
    r_total_bps: f64,
    k_users: usize,
) -> Result<PowerBreakdown> {
    if !(r_total_bps >= 0.0) {
        return Err(Error::Domain(format!("rate must be >= 0, got {r_total_bps}")));
    }
    let tx = transmission_power(radio, geom, scheme);
    let n_rf_effective = match scheme {
        Scheme::GsmHp => geom.n_rf,
        Scheme::Fdp => geom.n_t,
    };
    let p_ce_w = channel_estimation_power(radio, geom, k_users);
    let p_cd_w = coding_power(radio, r_total_bps);
    let p_bb_w = baseband_precoding_power(radio, n_rf_effective, geom.n_s);
    let p_lp_c_w = precoder_solution_power(radio, geom, k_users, scheme)?;
    let p_computation_w = p_ce_w + p_cd_w + p_bb_w + p_lp_c_w;
    Ok(PowerBreakdown {
        p_pa_w: tx.p_pa_w,
        p_rf_w: tx.p_rf_w,
        p_switch_w: tx.p_switch_w,
        p_transmission_w: tx.p_transmission_w,
        p_ce_w,
        p_cd_w,
        p_bb_w,
        p_lp_c_w,
        p_computation_w,
        p_fix_w: radio.p_fix_w,
        p_total_w: tx.p_transmission_w + p_computation_w + radio.p_fix_w,
    })
}
