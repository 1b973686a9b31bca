//! Flat key-value configuration file (TOML syntax).
//!
//! Keys match the parameter field names; the unit is the key suffix. Any key
//! may be omitted, in which case the built-in default applies.
//!
//! ```toml
//! n_users = 8
//! n_rf = 14
//! p_max_dbm = 39.0
//! bandwidth_hz = 8e8
//! mode = "idealized-zf"
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::{dbm_to_watts, square_factorization, ChannelParams, RadioParams, SystemGeometry};
use crate::precoding::RfMode;

/// Everything needed to run the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub geometry: SystemGeometry,
    pub radio: RadioParams,
    pub channel: ChannelParams,
    pub mode: RfMode,
    pub seed: u64,
    pub n_drops: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geometry: SystemGeometry::reference(),
            radio: RadioParams::default(),
            channel: ChannelParams::default(),
            mode: RfMode::IdealizedZf,
            seed: 1,
            n_drops: 200,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n_users: Option<usize>,
    n_rf: Option<usize>,
    n_m: Option<usize>,
    n_k: Option<usize>,
    rows_l: Option<usize>,
    cols_r: Option<usize>,

    p_max_w: Option<f64>,
    p_max_dbm: Option<f64>,
    alpha: Option<f64>,
    p_rf_chain_w: Option<f64>,
    p_shifter_w: Option<f64>,
    p_switch_w: Option<f64>,
    p_fix_w: Option<f64>,
    noise_psd_dbm_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    coherence_bw_hz: Option<f64>,
    coherence_time_s: Option<f64>,
    tau: Option<f64>,
    l_bs_flops_per_w: Option<f64>,
    p_cod_w_per_bps: Option<f64>,
    precoder_solves: Option<String>,

    n_ray: Option<usize>,
    path_loss_exp: Option<f64>,
    shadowing_sigma_db: Option<f64>,
    user_dist_min_m: Option<f64>,
    user_dist_max_m: Option<f64>,
    carrier_freq_hz: Option<f64>,
    elevation_range: Option<String>,

    mode: Option<String>,
    seed: Option<u64>,
    drops: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let mut cfg = SimConfig::default();

        let g = &mut cfg.geometry;
        set(&mut g.n_s, file.n_users);
        set(&mut g.n_rf, file.n_rf);
        set(&mut g.n_m, file.n_m);
        set(&mut g.n_k, file.n_k);
        g.n_t = g.n_m * g.n_k;
        match (file.rows_l, file.cols_r) {
            (Some(l), Some(r)) => (g.rows_l, g.cols_r) = (l, r),
            (None, None) => (g.rows_l, g.cols_r) = square_factorization(g.n_t),
            _ => return Err(Error::Config("rows_l and cols_r must be given together".into())),
        }

        let r = &mut cfg.radio;
        match (file.p_max_w, file.p_max_dbm) {
            (Some(_), Some(_)) => return Err(Error::Config("give only one of p_max_w, p_max_dbm".into())),
            (w, dbm) => set(&mut r.p_max_w, w.or(dbm.map(dbm_to_watts))),
        }
        set(&mut r.alpha, file.alpha);
        set(&mut r.p_rf_chain_w, file.p_rf_chain_w);
        set(&mut r.p_shifter_w, file.p_shifter_w);
        set(&mut r.p_switch_w, file.p_switch_w);
        set(&mut r.p_fix_w, file.p_fix_w);
        set(&mut r.noise_psd_dbm_hz, file.noise_psd_dbm_hz);
        set(&mut r.bandwidth_hz, file.bandwidth_hz);
        set(&mut r.coherence_bw_hz, file.coherence_bw_hz);
        set(&mut r.coherence_time_s, file.coherence_time_s);
        set(&mut r.tau, file.tau);
        set(&mut r.l_bs_flops_per_w, file.l_bs_flops_per_w);
        set(&mut r.p_cod_w_per_bps, file.p_cod_w_per_bps);
        if let Some(v) = file.precoder_solves {
            r.precoder_solves = v.parse()?;
        }

        let c = &mut cfg.channel;
        set(&mut c.n_ray, file.n_ray);
        set(&mut c.path_loss_exp, file.path_loss_exp);
        set(&mut c.shadowing_sigma_db, file.shadowing_sigma_db);
        set(&mut c.user_dist_min_m, file.user_dist_min_m);
        set(&mut c.user_dist_max_m, file.user_dist_max_m);
        set(&mut c.carrier_freq_hz, file.carrier_freq_hz);
        if let Some(e) = file.elevation_range {
            c.elevation = e.parse()?;
        }

        if let Some(m) = file.mode {
            cfg.mode = m.parse()?;
        }
        set(&mut cfg.seed, file.seed);
        set(&mut cfg.n_drops, file.drops);

        cfg.radio.validate()?;
        cfg.channel.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}
