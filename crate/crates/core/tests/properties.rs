use gsmhp_core::capacity::{conditional_covariance, rate_from_gains, spectral_efficiency_user};
use gsmhp_core::channel::array_response;
use gsmhp_core::codebook::{build_codebook, num_spatial_schemes, selection_matrix};
use gsmhp_core::linalg::CMatrix;
use gsmhp_core::params::{dbm_to_watts, noise_variance, watts_to_dbm};
use gsmhp_core::power::{total_power, Scheme};
use gsmhp_core::precoding::{diagonal_gains, normalize_to_power, zf_precoder, RfStage};
use gsmhp_core::{RadioParams, SystemGeometry};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        CMatrix::from_rows(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
    })
}

fn well_conditioned(h: &CMatrix) -> bool {
    // reject near-rank-deficient draws; the ZF error bound scales with cond(H)
    let g = h.gram();
    let k = g.rows();
    let inv = match gsmhp_core::linalg::solve(g.clone(), CMatrix::identity(k), 1e-12) {
        Ok(x) => x,
        Err(_) => return false,
    };
    g.frobenius_norm_sqr().sqrt() * inv.frobenius_norm_sqr().sqrt() < 1e6
}

proptest! {
    #[test]
    fn dbm_round_trip(dbm in -200.0f64..100.0) {
        let back = watts_to_dbm(dbm_to_watts(dbm));
        prop_assert!((back - dbm).abs() <= 1e-9 * dbm.abs().max(1.0));
    }

    #[test]
    fn noise_is_linear_in_bandwidth(psd in -200.0f64..-100.0, b in 1.0f64..1e10, c in 0.1f64..100.0) {
        let n1 = noise_variance(psd, b);
        let n2 = noise_variance(psd, c * b);
        prop_assert!(((n2 / n1) - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn steering_vector_has_unit_norm(
        psi in 0.0f64..std::f64::consts::TAU,
        theta in 0.0f64..std::f64::consts::TAU,
        l in 1usize..20,
        r in 1usize..20,
    ) {
        let u = array_response(psi, theta, l, r);
        prop_assert_eq!(u.len(), l * r);
        let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        for z in &u {
            prop_assert!((z.norm() * ((l * r) as f64).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_columns_are_orthogonal(n_m in 2usize..9, n_k in 1usize..5, frac in 0.0f64..1.0, pick in 0usize..1000) {
        let n_rf = 1 + ((n_m - 2) as f64 * frac) as usize;
        let geom = SystemGeometry::new(1, n_rf, n_m, n_k);
        let book = build_codebook(&geom).unwrap();
        let m = pick % book.m_count();
        let c = selection_matrix(&book, m).unwrap().to_dense();
        // C^T C = N_K I
        for i in 0..n_rf {
            for j in 0..n_rf {
                let dot: u32 = c.iter().map(|row| row[i] as u32 * row[j] as u32).sum();
                prop_assert_eq!(dot, if i == j { n_k as u32 } else { 0 });
            }
        }
        // each antenna in at most one column
        for row in &c {
            prop_assert!(row.iter().map(|&x| x as u32).sum::<u32>() <= 1);
        }
    }

    #[test]
    fn codebook_size_is_power_of_two_bounded_by_binomial(n_m in 2usize..40, frac in 0.0f64..1.0) {
        let n_rf = 1 + ((n_m - 2) as f64 * frac) as usize;
        if let Ok(m) = num_spatial_schemes(n_m, n_rf) {
            prop_assert!(m.is_power_of_two());
            let c = gsmhp_core::codebook::binomial(n_m as u64, n_rf as u64).unwrap();
            prop_assert!(m as u128 <= c && c < 2 * m as u128);
        }
    }

    #[test]
    fn zf_inverts_and_meets_power(h in (1usize..5, 0usize..6).prop_flat_map(|(k, extra)| complex_matrix(k, k + extra)),
                                  p in 0.01f64..100.0) {
        prop_assume!(well_conditioned(&h));
        let d0 = zf_precoder(&h).unwrap();
        let prod = h.matmul(&d0);
        let k = h.rows();
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-8);
            }
        }
        // one antenna per RF chain, A = I
        let n = h.cols();
        let geom = SystemGeometry::new(1, n, n + 1, 1);
        let book = build_codebook(&geom).unwrap();
        let c0 = selection_matrix(&book, 0).unwrap();
        let d = normalize_to_power(&RfStage::identity(n + 1), &c0, &d0, p).unwrap();
        prop_assert!((d.frobenius_norm_sqr() - p).abs() <= 1e-9 * p);
        for g in diagonal_gains(&h, &d) {
            prop_assert!((g - p / d0.frobenius_norm_sqr()).abs() <= 1e-8 * g);
        }
    }

    #[test]
    fn zf_is_scale_equivariant(h in (1usize..4, 0usize..4).prop_flat_map(|(k, e)| complex_matrix(k, k + e)), s in 0.1f64..10.0) {
        prop_assume!(well_conditioned(&h));
        let d = zf_precoder(&h).unwrap();
        let mut hs = h.clone();
        hs.scale(s);
        let ds = zf_precoder(&hs).unwrap();
        for (a, b) in d.as_slice().iter().zip(ds.as_slice()) {
            prop_assert!((a / s - b).norm() <= 1e-8 * (1.0 + a.norm() / s));
        }
    }

    #[test]
    fn rate_is_nonnegative(gains in prop::collection::vec(0.0f64..1e6, 1..64), sigma2 in 1e-6f64..1e3) {
        let sigmas: Vec<f64> = gains.iter().map(|&g| conditional_covariance(g, sigma2)).collect();
        let r = spectral_efficiency_user(&sigmas, sigma2).unwrap();
        prop_assert!(r >= 0.0 && r.is_finite());
    }

    #[test]
    fn rate_ignores_scheme_order(mut gains in prop::collection::vec(0.0f64..1e3, 1..40), sigma2 in 0.01f64..10.0, seed in any::<u64>()) {
        let sig = |g: &[f64]| g.iter().map(|&x| conditional_covariance(x, sigma2)).collect::<Vec<_>>();
        let r1 = spectral_efficiency_user(&sig(&gains), sigma2).unwrap();
        // Fisher-Yates with a fixed LCG
        let mut s = seed | 1;
        for i in (1..gains.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            gains.swap(i, (s >> 33) as usize % (i + 1));
        }
        let r2 = spectral_efficiency_user(&sig(&gains), sigma2).unwrap();
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn single_scheme_is_shannon(g in 0.0f64..1e6, sigma2 in 1e-3f64..10.0) {
        let r = spectral_efficiency_user(&[conditional_covariance(g, sigma2)], sigma2).unwrap();
        let shannon = (1.0 + g / sigma2).log2();
        prop_assert!((r - shannon).abs() <= 1e-12 * shannon.max(1.0));
    }

    #[test]
    fn user_order_permutes_rates(a in prop::collection::vec(0.0f64..100.0, 4), b in prop::collection::vec(0.0f64..100.0, 4)) {
        let r1 = rate_from_gains(&[a.clone(), b.clone()], 1.0, 1e6).unwrap();
        let r2 = rate_from_gains(&[b, a], 1.0, 1e6).unwrap();
        prop_assert_eq!(r1.per_user_bps_hz[0], r2.per_user_bps_hz[1]);
        prop_assert_eq!(r1.per_user_bps_hz[1], r2.per_user_bps_hz[0]);
        prop_assert!((r1.total_bps - r2.total_bps).abs() <= 1e-9 * r1.total_bps.max(1.0));
    }

    #[test]
    fn power_breakdown_sums(k in 1usize..14, rate in 0.0f64..1e12) {
        let radio = RadioParams::default();
        let geom = SystemGeometry::new(k, 14, 16, 8);
        for scheme in [Scheme::GsmHp, Scheme::Fdp] {
            let b = total_power(&radio, &geom, scheme, rate, k).unwrap();
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
            prop_assert!(close(b.p_transmission_w, b.p_pa_w + b.p_rf_w + b.p_switch_w));
            prop_assert!(close(b.p_computation_w, b.p_ce_w + b.p_cd_w + b.p_bb_w + b.p_lp_c_w));
            prop_assert!(close(b.p_total_w, b.p_transmission_w + b.p_computation_w + b.p_fix_w));
        }
    }
}
