//! Baseband zero-forcing and the analog stage of the sub-connected array.
//!
//! Two RF modes are supported:
//!
//! * idealized-zf: the analog stage is absorbed into the digital solve, so the
//!   digital precoder addresses every active antenna of scheme `m` directly.
//!   The effective channel is the `K x (N_RF N_K)` block of `H^H` on the
//!   active antennas, and `A = I`.
//! * equal-gain: unit-modulus phase shifters co-phase each antenna to the
//!   strongest user, and RF chain `j` feeds all antennas of its group. The
//!   effective channel is `H^H A C_m` (`K x N_RF`).
//!
//! In both modes the zero-forcing precoder is uniformly scaled so that the
//! radiated power `||A C_m D_m||_F^2` equals `P_max`.

use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::codebook::{selection_matrix, SelectionMatrix, SpatialCodebook};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::params::{RadioParams, SystemGeometry};

/// Relative pivot threshold of the Gram solve, scaled by `||H_eff||_F^2`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// How the phase shifters of the analog stage are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RfMode {
    /// `A = I`; the digital stage drives each active antenna.
    #[default]
    IdealizedZf,
    /// Each shifter co-phases its antenna to the strongest user.
    EqualGain,
}

impl RfMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RfMode::IdealizedZf => "idealized-zf",
            RfMode::EqualGain => "equal-gain",
        }
    }
}

impl FromStr for RfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idealized-zf" => Ok(RfMode::IdealizedZf),
            "equal-gain" => Ok(RfMode::EqualGain),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

/// Diagonal analog precoder: one unit-modulus phase shifter per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct RfStage {
    pub mode: RfMode,
    diagonal: Vec<Complex64>,
}

impl RfStage {
    pub fn identity(n_t: usize) -> Self {
        Self {
            mode: RfMode::IdealizedZf,
            diagonal: vec![Complex64::new(1.0, 0.0); n_t],
        }
    }

    /// Phase shifters set to `exp(j phi_t)`.
    pub fn from_phases(phases: &[f64]) -> Self {
        Self {
            mode: RfMode::EqualGain,
            diagonal: phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
        }
    }

    pub fn diagonal(&self) -> &[Complex64] {
        &self.diagonal
    }

    /// Dense `N_T x N_T` matrix `A`.
    pub fn a_matrix(&self) -> CMatrix {
        let n = self.diagonal.len();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

pub fn rf_stage(mode: RfMode, channel: &ChannelRealization, geom: &SystemGeometry) -> Result<RfStage> {
    if channel.n_antennas() != geom.n_t {
        return Err(Error::infeasible("channel columns == n_t"));
    }
    let diagonal = match mode {
        RfMode::IdealizedZf => vec![Complex64::new(1.0, 0.0); geom.n_t],
        RfMode::EqualGain => {
            let k = channel.strongest_user();
            channel
                .h_matrix
                .row(k)
                .iter()
                .map(|z| Complex64::from_polar(1.0, -z.arg()))
                .collect()
        }
    };
    Ok(RfStage { mode, diagonal })
}

/// Unnormalized zero forcing `H^H (H H^H)^-1` for a `K x N` channel.
pub fn zf_precoder(h_eff: &CMatrix) -> Result<CMatrix> {
    if h_eff.rows() > h_eff.cols() {
        return Err(Error::infeasible("K <= N_RF"));
    }
    let gram = h_eff.gram();
    let tol = SINGULAR_TOL * h_eff.frobenius_norm_sqr();
    // (G^-1 H)^H = H^H G^-1 because G is Hermitian
    let x = linalg::solve(gram, h_eff.clone(), tol)
        .map_err(|_| Error::SingularChannel { scheme: None })?;
    Ok(x.adjoint())
}

/// Precoder of one spatial scheme, normalized to the transmit power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemePrecoder {
    pub h_eff: CMatrix,
    pub d_matrix: CMatrix,
    /// `|h_k^H A C_m d_{m,k}|^2` per user.
    ///
    /// Zero forcing makes `H_eff D0 = I`, so after uniform scaling every user
    /// of a scheme sees the same gain `P_max / ||A C_m D0||_F^2`. That exact
    /// value is stored; [`diagonal_gains`] recomputes it from the matrices.
    pub per_user_gain: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub per_scheme: Vec<SchemePrecoder>,
}

impl PrecoderSet {
    pub fn m_count(&self) -> usize {
        self.per_scheme.len()
    }
}

/// `||A C D||_F^2` where RF chain `j` feeds the antennas listed by `feeds(j)`.
fn radiated_power(a: &RfStage, d: &CMatrix, feeds: impl Fn(usize) -> std::ops::Range<usize>) -> f64 {
    (0..d.rows())
        .map(|j| {
            let w: f64 = a.diagonal[feeds(j)].iter().map(|z| z.norm_sqr()).sum();
            w * d.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// Active antennas of a scheme, group by group.
pub fn active_antennas(c_m: &SelectionMatrix) -> Vec<usize> {
    (0..c_m.cols()).flat_map(|j| c_m.antennas(j)).collect()
}

/// `||A C_m D0||_F^2` for a group-level (`N_RF` rows) or antenna-level
/// (`N_RF N_K` rows) precoder.
pub fn precoder_power(a: &RfStage, c_m: &SelectionMatrix, d0: &CMatrix) -> Result<f64> {
    if a.diagonal.len() != c_m.rows() {
        return Err(Error::infeasible("RF stage size == n_t"));
    }
    if d0.rows() == c_m.cols() {
        Ok(radiated_power(a, d0, |j| c_m.antennas(j)))
    } else if d0.rows() == c_m.cols() * c_m.n_k() {
        let idx = active_antennas(c_m);
        Ok(radiated_power(a, d0, |i| idx[i]..idx[i] + 1))
    } else {
        Err(Error::infeasible("precoder rows == N_RF or N_RF*N_K"))
    }
}

/// Scales `d0` so that `||A C_m D||_F^2 = p_max_w`.
pub fn normalize_to_power(a: &RfStage, c_m: &SelectionMatrix, d0: &CMatrix, p_max_w: f64) -> Result<CMatrix> {
    normalize_with(d0, precoder_power(a, c_m, d0)?, p_max_w)
}

fn normalize_with(d0: &CMatrix, power: f64, p_max_w: f64) -> Result<CMatrix> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::DegeneratePrecoder);
    }
    let mut d = d0.clone();
    d.scale((p_max_w / power).sqrt());
    Ok(d)
}

/// Power-normalized scheme precoder from an unnormalized zero-forcing solution.
fn scheme_precoder(h_eff: CMatrix, d0: &CMatrix, power: f64, p_max_w: f64) -> Result<SchemePrecoder> {
    let d_matrix = normalize_with(d0, power, p_max_w)?;
    let gain = p_max_w / power;
    Ok(SchemePrecoder {
        per_user_gain: vec![gain; h_eff.rows()],
        h_eff,
        d_matrix,
    })
}

/// `|(H_eff D)[k, k]|^2` computed by explicit multiplication.
pub fn diagonal_gains(h_eff: &CMatrix, d: &CMatrix) -> Vec<f64> {
    (0..h_eff.rows())
        .map(|k| {
            let v: Complex64 = h_eff
                .row(k)
                .iter()
                .enumerate()
                .map(|(j, h)| h * d[(j, k)])
                .sum();
            v.norm_sqr()
        })
        .collect()
}

/// `H^H A` with the phase shifters applied column-wise.
fn apply_rf(channel: &ChannelRealization, a: &RfStage) -> CMatrix {
    let h = &channel.h_matrix;
    CMatrix::from_fn(h.rows(), h.cols(), |k, t| h[(k, t)] * a.diagonal[t])
}

/// Columns of `H^H` on the active antennas of `c_m`.
pub fn active_antenna_channel(h: &CMatrix, c_m: &SelectionMatrix) -> CMatrix {
    let idx = active_antennas(c_m);
    CMatrix::from_fn(h.rows(), idx.len(), |k, i| h[(k, idx[i])])
}

/// `H^H A C_m`: per user, the sum of the analog-weighted antennas of each active group.
pub fn effective_channel(ha: &CMatrix, c_m: &SelectionMatrix) -> CMatrix {
    CMatrix::from_fn(ha.rows(), c_m.cols(), |k, j| ha.row(k)[c_m.antennas(j)].iter().sum())
}

/// Zero-forcing precoders for every scheme of the codebook.
///
/// A singular effective channel in any scheme aborts with the scheme index.
pub fn build_precoders(
    channel: &ChannelRealization,
    codebook: &SpatialCodebook,
    rf: &RfStage,
    geom: &SystemGeometry,
    radio: &RadioParams,
) -> Result<PrecoderSet> {
    if channel.n_users() > geom.n_rf {
        return Err(Error::infeasible("K <= N_RF"));
    }
    if channel.n_antennas() != codebook.n_t() || rf.diagonal.len() != codebook.n_t() {
        return Err(Error::infeasible("channel, codebook and RF stage agree on n_t"));
    }
    let ha = apply_rf(channel, rf);
    let per_scheme = (0..codebook.m_count())
        .map(|m| {
            let c_m = selection_matrix(codebook, m)?;
            let h_eff = match rf.mode {
                RfMode::IdealizedZf => active_antenna_channel(&ha, &c_m),
                RfMode::EqualGain => effective_channel(&ha, &c_m),
            };
            let d0 = zf_precoder(&h_eff).map_err(|e| tag_scheme(e, m))?;
            let power = precoder_power(rf, &c_m, &d0)?;
            scheme_precoder(h_eff, &d0, power, radio.p_max_w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecoderSet { per_scheme })
}

fn tag_scheme(e: Error, m: usize) -> Error {
    match e {
        Error::SingularChannel { .. } => Error::SingularChannel { scheme: Some(m) },
        other => other,
    }
}

/// Per-scheme zero-forcing gain, shared by all users, without forming precoders.
///
/// The Gram matrix of scheme `m` is the sum of per-group blocks
/// `G_m = sum_{g in m} G_g`, and the radiated power of the unnormalized ZF
/// precoder is `w * trace(G_m^-1)` (`w = 1` per antenna in idealized mode,
/// `w = N_K` per RF chain in equal-gain mode). The gain is
/// `P_max / (w * trace(G_m^-1))`, the same value [`build_precoders`] stores.
pub fn scheme_gains(
    channel: &ChannelRealization,
    codebook: &SpatialCodebook,
    rf: &RfStage,
    radio: &RadioParams,
) -> Result<Vec<f64>> {
    let k = channel.n_users();
    if k > codebook.n_rf() {
        return Err(Error::infeasible("K <= N_RF"));
    }
    if channel.n_antennas() != codebook.n_t() || rf.diagonal.len() != codebook.n_t() {
        return Err(Error::infeasible("channel, codebook and RF stage agree on n_t"));
    }
    let ha = apply_rf(channel, rf);
    let n_k = codebook.n_k();
    let group_grams: Vec<CMatrix> = (0..codebook.n_m())
        .map(|g| {
            let cols = g * n_k..(g + 1) * n_k;
            match rf.mode {
                RfMode::IdealizedZf => {
                    CMatrix::from_fn(k, n_k, |u, i| ha[(u, cols.start + i)]).gram()
                }
                RfMode::EqualGain => {
                    CMatrix::from_fn(k, 1, |u, _| ha.row(u)[cols.clone()].iter().sum()).gram()
                }
            }
        })
        .collect();
    let weight = match rf.mode {
        RfMode::IdealizedZf => 1.0,
        RfMode::EqualGain => n_k as f64,
    };
    codebook
        .patterns()
        .iter()
        .enumerate()
        .map(|(m, pattern)| {
            let mut gram = CMatrix::zeros(k, k);
            for &g in pattern {
                for (acc, v) in gram.as_mut_slice().iter_mut().zip(group_grams[g].as_slice()) {
                    *acc += v;
                }
            }
            let trace_g: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
            let inv = linalg::solve(gram, CMatrix::identity(k), SINGULAR_TOL * trace_g)
                .map_err(|_| Error::SingularChannel { scheme: Some(m) })?;
            let trace_inv: f64 = (0..k).map(|i| inv[(i, i)].re).sum();
            let power = weight * trace_inv;
            if !(power > 0.0) || !power.is_finite() {
                return Err(Error::DegeneratePrecoder);
            }
            Ok(radio.p_max_w / power)
        })
        .collect()
}

/// Full-digital zero forcing over all `N_T` antennas: a single scheme.
pub fn fdp_precoder(channel: &ChannelRealization, geom: &SystemGeometry, radio: &RadioParams) -> Result<PrecoderSet> {
    if channel.n_users() > geom.n_t {
        return Err(Error::infeasible("K <= N_T"));
    }
    let h_eff = channel.h_matrix.clone();
    let d0 = zf_precoder(&h_eff)?;
    let power = d0.frobenius_norm_sqr();
    Ok(PrecoderSet {
        per_scheme: vec![scheme_precoder(h_eff, &d0, power, radio.p_max_w)?],
    })
}
