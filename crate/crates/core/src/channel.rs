//! Geometric mm-Wave channel with a uniform planar array at the base station.
//!
//! Each user sees `N_ray` rays with i.i.d. circularly-symmetric complex
//! Gaussian gains and uniformly drawn azimuth/elevation. The downlink row of
//! user `k` is `h_k^H` with
//!
//! ```text
//! h_k = sqrt(N_T * beta_k / N_ray) * sum_i rho_ki * u(psi_i, theta_i)
//! ```

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::params::{ChannelParams, SystemGeometry};
use crate::rng::{Purpose, StreamKey};

/// Planar-array response for one direction, flattened as `l * cols_r + r`.
///
/// The phase of element `(l, r)` is `2 pi d / lambda * (l sin(psi) sin(theta) + r cos(theta))`,
/// which is `pi * (...)` for half-wavelength spacing. The vector has unit norm.
pub fn array_response(psi: f64, theta: f64, rows_l: usize, cols_r: usize) -> Vec<Complex64> {
    array_response_with_spacing(psi, theta, rows_l, cols_r, 0.5)
}

/// As [`array_response`], with element spacing given in wavelengths.
pub fn array_response_with_spacing(
    psi: f64,
    theta: f64,
    rows_l: usize,
    cols_r: usize,
    spacing_wavelengths: f64,
) -> Vec<Complex64> {
    let n = rows_l * cols_r;
    let norm = 1.0 / (n as f64).sqrt();
    let k = 2.0 * PI * spacing_wavelengths;
    let row_step = k * psi.sin() * theta.sin();
    let col_step = k * theta.cos();
    let mut out = Vec::with_capacity(n);
    for l in 0..rows_l {
        for r in 0..cols_r {
            out.push(Complex64::from_polar(norm, l as f64 * row_step + r as f64 * col_step));
        }
    }
    out
}

/// Large-scale parameters of the `K` users of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub distances_m: Vec<f64>,
    /// Linear-scale shadowing factors.
    pub shadowing: Vec<f64>,
    pub beta: Vec<f64>,
}

impl UserDrop {
    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

/// Places `k_users` users uniformly in distance over the configured annulus and
/// draws lognormal shadowing with `10 log10(zeta) ~ N(0, sigma_dB^2)`.
pub fn draw_user_drop(k_users: usize, params: &ChannelParams, key: &StreamKey) -> Result<UserDrop> {
    if k_users == 0 {
        return Err(Error::InvalidParameter("k_users must be >= 1".into()));
    }
    let shadow = Normal::new(0.0, params.shadowing_sigma_db)
        .map_err(|e| Error::InvalidParameter(format!("shadowing_sigma_db: {e}")))?;
    let mut drop = UserDrop {
        distances_m: Vec::with_capacity(k_users),
        shadowing: Vec::with_capacity(k_users),
        beta: Vec::with_capacity(k_users),
    };
    for k in 0..k_users {
        let mut rng = key.rng(k, Purpose::UserPlacement);
        let d = rng.random_range(params.user_dist_min_m..=params.user_dist_max_m);
        let zeta_db: f64 = shadow.sample(&mut rng);
        let zeta = 10f64.powf(zeta_db / 10.0);
        drop.distances_m.push(d);
        drop.shadowing.push(zeta);
        drop.beta.push(large_scale_gain(zeta, d, params.path_loss_exp));
    }
    Ok(drop)
}

/// `zeta / l^gamma`.
pub fn large_scale_gain(zeta: f64, distance_m: f64, path_loss_exp: f64) -> f64 {
    zeta / distance_m.powf(path_loss_exp)
}

/// One propagation path of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub gain: Complex64,
    pub azimuth: f64,
    pub elevation: f64,
}

/// A drawn downlink channel `H^H` (K x N_T) and the rays that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_matrix: CMatrix,
    pub per_user_rays: Vec<Vec<Ray>>,
    pub beta: Vec<f64>,
    pub rows_l: usize,
    pub cols_r: usize,
}

impl ChannelRealization {
    pub fn n_users(&self) -> usize {
        self.h_matrix.rows()
    }

    pub fn n_antennas(&self) -> usize {
        self.h_matrix.cols()
    }

    /// Recomputes row `k` of `H^H` from the stored rays.
    pub fn reconstruct_row(&self, k: usize) -> Vec<Complex64> {
        let h = user_channel(&self.per_user_rays[k], self.beta[k], self.rows_l, self.cols_r);
        h.into_iter().map(|z| z.conj()).collect()
    }

    /// Index of the user with the largest large-scale gain (first on ties).
    pub fn strongest_user(&self) -> usize {
        self.beta
            .iter()
            .enumerate()
            .fold(0, |best, (k, &b)| if b > self.beta[best] { k } else { best })
    }
}

fn user_channel(rays: &[Ray], beta: f64, rows_l: usize, cols_r: usize) -> Vec<Complex64> {
    let n_t = rows_l * cols_r;
    let amp = (n_t as f64 * beta / rays.len() as f64).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); n_t];
    for ray in rays {
        let u = array_response(ray.azimuth, ray.elevation, rows_l, cols_r);
        for (acc, ut) in h.iter_mut().zip(&u) {
            *acc += ray.gain * ut;
        }
    }
    for z in &mut h {
        *z *= amp;
    }
    h
}

/// Builds a realization from explicit rays; used by `draw_channel` and tests.
pub fn channel_from_rays(
    per_user_rays: Vec<Vec<Ray>>,
    beta: Vec<f64>,
    rows_l: usize,
    cols_r: usize,
) -> ChannelRealization {
    let k = per_user_rays.len();
    let n_t = rows_l * cols_r;
    let mut h_matrix = CMatrix::zeros(k, n_t);
    for (user, rays) in per_user_rays.iter().enumerate() {
        let h = user_channel(rays, beta[user], rows_l, cols_r);
        for (dst, z) in h_matrix.row_mut(user).iter_mut().zip(h) {
            *dst = z.conj();
        }
    }
    ChannelRealization {
        h_matrix,
        per_user_rays,
        beta,
        rows_l,
        cols_r,
    }
}

/// Draws the small-scale part of the channel for every user of `drop`.
pub fn draw_channel(
    drop: &UserDrop,
    geom: &SystemGeometry,
    params: &ChannelParams,
    key: &StreamKey,
) -> Result<ChannelRealization> {
    if geom.rows_l * geom.cols_r != geom.n_t || geom.n_t == 0 {
        return Err(Error::infeasible("n_t == rows_l*cols_r"));
    }
    if params.n_ray == 0 {
        return Err(Error::InvalidParameter("n_ray must be >= 1".into()));
    }
    let comp = std::f64::consts::FRAC_1_SQRT_2;
    let theta_max = params.elevation.upper();
    let rays: Vec<Vec<Ray>> = (0..drop.len())
        .map(|k| {
            let mut rng = key.rng(k, Purpose::Rays);
            (0..params.n_ray)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Ray {
                        gain: Complex64::new(re * comp, im * comp),
                        azimuth: rng.random_range(0.0..2.0 * PI),
                        elevation: rng.random_range(0.0..theta_max),
                    }
                })
                .collect()
        })
        .collect();
    Ok(channel_from_rays(rays, drop.beta.clone(), geom.rows_l, geom.cols_r))
}

/// Writes one line per ray: drop, user, ray, Re/Im of the gain, azimuth,
/// elevation, beta. Whitespace separated with a `#` header line.
pub fn write_ray_dump(
    realizations: &[(u64, ChannelRealization)],
    path: &Path,
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    writeln!(out, "# drop user ray rho_re rho_im psi theta beta").map_err(io_err)?;
    for (drop_index, ch) in realizations {
        for (k, rays) in ch.per_user_rays.iter().enumerate() {
            for (i, ray) in rays.iter().enumerate() {
                writeln!(
                    out,
                    "{drop_index} {k} {i} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                    ray.gain.re, ray.gain.im, ray.azimuth, ray.elevation, ch.beta[k]
                )
                .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn broadside_response_is_flat() {
        let u = array_response(0.0, PI / 2.0, 2, 2);
        for z in u {
            assert!(close(z, Complex64::new(0.5, 0.0), 1e-15));
        }
    }

    #[test]
    fn single_element_response() {
        for (psi, theta) in [(0.3, 1.1), (4.0, 5.5)] {
            assert_eq!(array_response(psi, theta, 1, 1), vec![Complex64::new(1.0, 0.0)]);
        }
    }

    #[test]
    fn endfire_row_phase() {
        let u = array_response(PI / 2.0, PI / 2.0, 2, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(u[0], Complex64::new(s, 0.0), 1e-15));
        assert!(close(u[1], Complex64::new(-s, 0.0), 1e-15));
    }

    #[test]
    fn flattening_is_row_major() {
        // Only the column index advances the phase when sin(theta) = 0.
        let u = array_response(1.0, 0.0, 2, 3);
        let s = 1.0 / 6f64.sqrt();
        for l in 0..2 {
            for r in 0..3 {
                let expect = Complex64::from_polar(s, PI * r as f64);
                assert!(close(u[l * 3 + r], expect, 1e-14));
            }
        }
    }

    #[test]
    fn beta_without_shadowing() {
        let params = ChannelParams {
            shadowing_sigma_db: 0.0,
            user_dist_min_m: 50.0,
            user_dist_max_m: 50.0 + 1e-9,
            ..ChannelParams::default()
        };
        let drop = draw_user_drop(3, &params, &StreamKey::new(1, 0)).unwrap();
        for (&b, &z) in drop.beta.iter().zip(&drop.shadowing) {
            assert_eq!(z, 1.0);
            assert!((b - 1.5302e-8).abs() < 1e-11, "beta {b}");
        }
        assert_eq!(large_scale_gain(1.0, 1.0, 4.6), 1.0);
    }

    #[test]
    fn user_drop_is_deterministic_and_in_range() {
        let params = ChannelParams::default();
        let key = StreamKey::new(99, 5);
        let a = draw_user_drop(6, &params, &key).unwrap();
        let b = draw_user_drop(6, &params, &key).unwrap();
        assert_eq!(a, b);
        for (&d, &beta) in a.distances_m.iter().zip(&a.beta) {
            assert!((20.0..=100.0).contains(&d));
            assert!(beta > 0.0);
        }
        // users keep their placement when more users are added
        let c = draw_user_drop(8, &params, &key).unwrap();
        assert_eq!(&c.beta[..6], &a.beta[..]);
        assert!(draw_user_drop(0, &params, &key).is_err());
    }

    #[test]
    fn single_unit_ray_has_norm_n_t() {
        let ray = Ray {
            gain: Complex64::new(1.0, 0.0),
            azimuth: 0.7,
            elevation: 2.1,
        };
        let ch = channel_from_rays(vec![vec![ray]], vec![1.0], 4, 8);
        let norm: f64 = ch.h_matrix.row(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 32.0).abs() < 1e-10);
    }

    #[test]
    fn zero_beta_gives_zero_row() {
        let params = ChannelParams::default();
        let drop = UserDrop {
            distances_m: vec![30.0, 40.0],
            shadowing: vec![1.0, 1.0],
            beta: vec![0.0, 1.0],
        };
        let geom = SystemGeometry::new(2, 3, 4, 4);
        let ch = draw_channel(&drop, &geom, &params, &StreamKey::new(3, 0)).unwrap();
        assert!(ch.h_matrix.row(0).iter().all(|z| z.norm() == 0.0));
        assert!(ch.h_matrix.row(1).iter().any(|z| z.norm() > 0.0));
    }

    #[test]
    fn drawn_rows_match_reconstruction() {
        let params = ChannelParams::default();
        let geom = SystemGeometry::reference();
        let key = StreamKey::new(11, 2);
        let drop = draw_user_drop(geom.n_s, &params, &key).unwrap();
        let ch = draw_channel(&drop, &geom, &params, &key).unwrap();
        assert_eq!(ch.h_matrix.rows(), 8);
        assert_eq!(ch.h_matrix.cols(), 128);
        assert!(ch.h_matrix.is_finite());
        for k in 0..8 {
            let row = ch.reconstruct_row(k);
            let scale: f64 = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (a, b) in row.iter().zip(ch.h_matrix.row(k)) {
                assert!((a - b).norm() <= 1e-10 * scale);
            }
        }
        assert_eq!(ch, draw_channel(&drop, &geom, &params, &key).unwrap());
    }

    #[test]
    fn ray_dump_has_one_line_per_ray() {
        let params = ChannelParams::default();
        let geom = SystemGeometry::new(2, 3, 4, 2);
        let key = StreamKey::new(5, 0);
        let drop = draw_user_drop(2, &params, &key).unwrap();
        let ch = draw_channel(&drop, &geom, &params, &key).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rays.txt");
        write_ray_dump(&[(0, ch)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 20);
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(fields.len(), 8);
    }
}
