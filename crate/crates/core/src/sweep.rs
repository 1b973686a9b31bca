//! Monte-Carlo engine and parameter sweeps.
//!
//! A point is evaluated by simulating `n_drops` independent drops (user
//! placement, channel, precoders, rate), averaging the total rate, and charging
//! the power model at the averaged rate. Energy efficiency is
//! `mean(R_total) / P_total`.
//!
//! Random draws of drop `d` come from substreams keyed on `(seed, d)` only, so
//! every point of a sweep sees the same users and channels (common random
//! numbers), and results do not depend on the number of worker threads.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::capacity::{gsm_rate, rate_from_gains};
use crate::channel::{draw_channel, draw_user_drop};
use crate::codebook::{build_codebook, SpatialCodebook};
use crate::error::{Error, Result};
use crate::params::{square_factorization, ChannelParams, RadioParams, SystemGeometry};
use crate::power::{total_power, PowerBreakdown, Scheme};
use crate::precoding::{fdp_precoder, rf_stage, scheme_gains, RfMode};
use crate::rng::StreamKey;

/// Largest tolerated fraction of singular redraws.
pub const MAX_SINGULAR_FRACTION: f64 = 1e-3;

/// Redraw attempts for a single drop before giving up.
pub const MAX_ATTEMPTS_PER_DROP: u64 = 16;

pub const CSV_HEADER: &str = "sweep_kind,swept_value,scheme,n_drops,r_total_bps,ee_bit_per_joule,\
p_pa_w,p_rf_w,p_switch_w,p_transmission_w,p_ce_w,p_cd_w,p_bb_w,p_lp_c_w,p_computation_w,\
p_fix_w,p_total_w,singular_redraws";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Users,
    RfChains,
    AntennasPerGroup,
    ComputationPowerVsUsers,
    Custom,
}

impl SweepKind {
    pub fn tag(self) -> &'static str {
        match self {
            SweepKind::Users => "users",
            SweepKind::RfChains => "rf_chains",
            SweepKind::AntennasPerGroup => "antennas_per_group",
            SweepKind::ComputationPowerVsUsers => "computation_power_vs_users",
            SweepKind::Custom => "custom",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Geometry field varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParam {
    Users,
    RfChains,
    Groups,
    AntennasPerGroup,
}

impl FromStr for SweptParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "users" => Ok(SweptParam::Users),
            "nrf" | "rf_chains" => Ok(SweptParam::RfChains),
            "nm" | "groups" => Ok(SweptParam::Groups),
            "nk" | "antennas_per_group" => Ok(SweptParam::AntennasPerGroup),
            other => Err(Error::InvalidParameter(format!("unknown swept parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub param: SweptParam,
    pub swept_values: Vec<usize>,
    pub fixed_geometry: SystemGeometry,
    pub schemes: Vec<Scheme>,
    pub n_drops: usize,
    pub master_seed: u64,
    pub mode: RfMode,
}

impl SweepSpec {
    fn preset(kind: SweepKind, param: SweptParam, values: Vec<usize>, geom: SystemGeometry) -> Self {
        Self {
            kind,
            param,
            swept_values: values,
            fixed_geometry: geom,
            schemes: vec![Scheme::GsmHp, Scheme::Fdp],
            n_drops: 200,
            master_seed: 1,
            mode: RfMode::IdealizedZf,
        }
    }

    /// Energy efficiency vs. users, K in 2..=12 at (N_RF, N_M, N_K) = (14, 16, 8).
    pub fn users() -> Self {
        Self::preset(SweepKind::Users, SweptParam::Users, (2..=12).collect(), SystemGeometry::reference())
    }

    /// Energy efficiency vs. RF chains, N_RF in K..=N_M-1 with N_M = 16, N_K = 8, K = 8.
    pub fn rf_chains() -> Self {
        let geom = SystemGeometry::reference();
        Self::preset(
            SweepKind::RfChains,
            SweptParam::RfChains,
            (geom.n_s..geom.n_m).collect(),
            geom,
        )
    }

    /// Energy efficiency vs. antennas per group, N_K in {2, 4, 8, 16} with N_M = 16, N_RF = 14, K = 8.
    pub fn antennas_per_group() -> Self {
        Self::preset(
            SweepKind::AntennasPerGroup,
            SweptParam::AntennasPerGroup,
            vec![2, 4, 8, 16],
            SystemGeometry::reference(),
        )
    }

    /// Computation power vs. users, K in 2..=10 at (14, 16, 8).
    pub fn computation_power_vs_users() -> Self {
        Self::preset(
            SweepKind::ComputationPowerVsUsers,
            SweptParam::Users,
            (2..=10).collect(),
            SystemGeometry::reference(),
        )
    }

    pub fn custom(param: SweptParam, values: Vec<usize>, geom: SystemGeometry) -> Self {
        Self::preset(SweepKind::Custom, param, values, geom)
    }

    /// Geometry at one swept value. Changing the antenna count re-derives the
    /// planar array as the most-square factorization.
    pub fn geometry_at(&self, value: usize) -> SystemGeometry {
        let mut g = self.fixed_geometry;
        match self.param {
            SweptParam::Users => g.n_s = value,
            SweptParam::RfChains => g.n_rf = value,
            SweptParam::Groups | SweptParam::AntennasPerGroup => {
                if self.param == SweptParam::Groups {
                    g.n_m = value;
                } else {
                    g.n_k = value;
                }
                g.n_t = g.n_m * g.n_k;
                (g.rows_l, g.cols_r) = square_factorization(g.n_t);
            }
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        if self.swept_values.is_empty() {
            return Err(Error::InvalidParameter("swept_values must be nonempty".into()));
        }
        if self.swept_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("swept_values must be strictly increasing".into()));
        }
        if self.n_drops == 0 {
            return Err(Error::InvalidParameter("n_drops must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("at least one scheme required".into()));
        }
        Ok(())
    }
}

/// Monte-Carlo estimate at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub scheme: Scheme,
    pub n_drops: usize,
    pub r_total_bps: f64,
    /// Standard error of `r_total_bps` over drops.
    pub r_total_std_err: f64,
    pub ee_bit_per_joule: f64,
    pub power: PowerBreakdown,
    pub singular_redraws: u64,
    pub per_drop_rates: Vec<f64>,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep_kind: SweepKind,
    pub swept_value: usize,
    pub scheme: Scheme,
    pub n_drops: usize,
    pub r_total_bps: f64,
    pub ee_bit_per_joule: f64,
    pub power: PowerBreakdown,
    pub singular_redraws: u64,
    pub r_total_std_err: f64,
}

impl SweepRecord {
    pub fn new(sweep_kind: SweepKind, swept_value: usize, est: &PointEstimate) -> Self {
        Self {
            sweep_kind,
            swept_value,
            scheme: est.scheme,
            n_drops: est.n_drops,
            r_total_bps: est.r_total_bps,
            ee_bit_per_joule: est.ee_bit_per_joule,
            power: est.power,
            singular_redraws: est.singular_redraws,
            r_total_std_err: est.r_total_std_err,
        }
    }
}

/// Energy efficiency in bit/Joule; zero rate gives zero.
pub fn energy_efficiency(r_total_bps: f64, p_total_w: f64) -> f64 {
    if r_total_bps == 0.0 {
        0.0
    } else {
        r_total_bps / p_total_w
    }
}

/// Everything a drop needs, fixed for one point.
struct PointContext<'a> {
    geom: &'a SystemGeometry,
    radio: &'a RadioParams,
    channel: &'a ChannelParams,
    scheme: Scheme,
    mode: RfMode,
    seed: u64,
    codebook: Option<SpatialCodebook>,
}

impl PointContext<'_> {
    fn attempt_rate(&self, key: &StreamKey) -> Result<f64> {
        let users = draw_user_drop(self.geom.n_s, self.channel, key)?;
        let ch = draw_channel(&users, self.geom, self.channel, key)?;
        match (&self.codebook, self.scheme) {
            (Some(book), Scheme::GsmHp) => {
                let rf = rf_stage(self.mode, &ch, self.geom)?;
                let gains = scheme_gains(&ch, book, &rf, self.radio)?;
                let per_user = vec![gains; self.geom.n_s];
                let r = rate_from_gains(&per_user, self.radio.noise_variance_w(), self.radio.bandwidth_hz)?;
                Ok(r.total_bps)
            }
            _ => Ok(gsm_rate(&fdp_precoder(&ch, self.geom, self.radio)?, self.radio)?.total_bps),
        }
    }

    /// Rate of drop `d` and the number of singular redraws it took.
    fn drop_rate(&self, d: usize) -> Result<(f64, u64)> {
        let base = StreamKey::new(self.seed, d as u64);
        for attempt in 0..MAX_ATTEMPTS_PER_DROP {
            match self.attempt_rate(&base.with_attempt(attempt)) {
                Ok(r) => return Ok((r, attempt)),
                Err(Error::SingularChannel { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::ExcessiveSingularity {
            redraws: MAX_ATTEMPTS_PER_DROP,
            draws: MAX_ATTEMPTS_PER_DROP,
        })
    }
}

/// Monte-Carlo estimate of rate, power and energy efficiency at one point.
///
/// Drops run on the current rayon pool; the reduction is in drop order.
pub fn evaluate_point(
    geom: &SystemGeometry,
    radio: &RadioParams,
    channel: &ChannelParams,
    scheme: Scheme,
    mode: RfMode,
    n_drops: usize,
    seed: u64,
) -> Result<PointEstimate> {
    if n_drops == 0 {
        return Err(Error::InvalidParameter("n_drops must be >= 1".into()));
    }
    scheme.check_geometry(geom)?;
    radio.validate()?;
    channel.validate()?;
    let codebook = match scheme {
        Scheme::GsmHp => Some(build_codebook(geom)?),
        Scheme::Fdp => None,
    };
    let ctx = PointContext {
        geom,
        radio,
        channel,
        scheme,
        mode,
        seed,
        codebook,
    };

    let outcomes: Vec<Result<(f64, u64)>> = (0..n_drops).into_par_iter().map(|d| ctx.drop_rate(d)).collect();
    let mut rates = Vec::with_capacity(n_drops);
    let mut redraws = 0u64;
    for o in outcomes {
        let (r, extra) = match o {
            Err(Error::ExcessiveSingularity { redraws: r, .. }) => {
                redraws += r;
                let draws = n_drops as u64 + redraws;
                return Err(Error::ExcessiveSingularity { redraws, draws });
            }
            other => other?,
        };
        rates.push(r);
        redraws += extra;
    }
    let draws = n_drops as u64 + redraws;
    if redraws as f64 > MAX_SINGULAR_FRACTION * draws as f64 {
        return Err(Error::ExcessiveSingularity { redraws, draws });
    }

    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let std_err = if rates.len() > 1 {
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let power = total_power(radio, geom, scheme, mean, geom.n_s)?;
    Ok(PointEstimate {
        scheme,
        n_drops,
        r_total_bps: mean,
        r_total_std_err: std_err,
        ee_bit_per_joule: energy_efficiency(mean, power.p_total_w),
        power,
        singular_redraws: redraws,
        per_drop_rates: rates,
    })
}

/// A sweep point that could not be evaluated.
#[derive(Debug)]
pub struct PointFailure {
    pub swept_value: usize,
    pub scheme: Scheme,
    pub error: Error,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<PointFailure>,
}

/// Evaluates every `(swept value, scheme)` pair; failed points are collected
/// and the sweep carries on.
pub fn run_sweep(spec: &SweepSpec, radio: &RadioParams, channel: &ChannelParams) -> Result<SweepOutcome> {
    spec.validate()?;
    radio.validate()?;
    channel.validate()?;
    let mut out = SweepOutcome::default();
    for &value in &spec.swept_values {
        let geom = spec.geometry_at(value);
        for &scheme in &spec.schemes {
            let est = evaluate_point(&geom, radio, channel, scheme, spec.mode, spec.n_drops, spec.master_seed);
            match est {
                Ok(est) => out.records.push(SweepRecord::new(spec.kind, value, &est)),
                Err(error) => out.failures.push(PointFailure {
                    swept_value: value,
                    scheme,
                    error,
                }),
            }
        }
    }
    Ok(out)
}

fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

/// Serializes records in the fixed CSV layout.
pub fn write_csv_to(records: &[SweepRecord], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let p = &r.power;
        let floats = [
            r.r_total_bps,
            r.ee_bit_per_joule,
            p.p_pa_w,
            p.p_rf_w,
            p.p_switch_w,
            p.p_transmission_w,
            p.p_ce_w,
            p.p_cd_w,
            p.p_bb_w,
            p.p_lp_c_w,
            p.p_computation_w,
            p.p_fix_w,
            p.p_total_w,
        ]
        .map(sci)
        .join(",");
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.sweep_kind, r.swept_value, r.scheme, r.n_drops, floats, r.singular_redraws
        )?;
    }
    w.flush()
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_csv_to(records, std::io::BufWriter::new(file)).map_err(io_err)
}
