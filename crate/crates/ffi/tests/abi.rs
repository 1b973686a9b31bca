use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gsmhp::*;

fn last_error() -> String {
    let p = gsmhp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Sim(*mut GsmhpSimulator);

impl Drop for Sim {
    fn drop(&mut self) {
        unsafe { gsmhp_simulator_free(self.0) };
    }
}

fn small_sim() -> Sim {
    let sim = Sim(gsmhp_simulator_new());
    unsafe {
        assert_eq!(gsmhp_simulator_set_geometry(sim.0, 4, 6, 8, 4), GsmhpStatus::Ok);
        assert_eq!(gsmhp_simulator_set_drops(sim.0, 5), GsmhpStatus::Ok);
        assert_eq!(gsmhp_simulator_set_seed(sim.0, 3), GsmhpStatus::Ok);
    }
    sim
}

#[test]
fn codebook_size() {
    let mut m = 0u64;
    assert_eq!(unsafe { gsmhp_num_spatial_schemes(16, 14, &mut m) }, GsmhpStatus::Ok);
    assert_eq!(m, 64);
    assert!(gsmhp_last_error_message().is_null());
    assert_eq!(unsafe { gsmhp_num_spatial_schemes(4, 4, &mut m) }, GsmhpStatus::Infeasible);
    assert!(last_error().starts_with("infeasible"));
    assert_eq!(unsafe { gsmhp_num_spatial_schemes(16, 14, ptr::null_mut()) }, GsmhpStatus::NullPointer);
}

#[test]
fn evaluate_matches_core() {
    let sim = small_sim();
    let mut out = GsmhpPointResult::default();
    let status = unsafe { gsmhp_simulator_evaluate(sim.0, GsmhpScheme::GsmHp as u32, &mut out) };
    assert_eq!(status, GsmhpStatus::Ok);
    let geom = gsmhp_core::SystemGeometry::new(4, 6, 8, 4);
    let est = gsmhp_core::evaluate_point(
        &geom,
        &Default::default(),
        &Default::default(),
        gsmhp_core::Scheme::GsmHp,
        gsmhp_core::RfMode::IdealizedZf,
        5,
        3,
    )
    .unwrap();
    assert_eq!(out.n_drops, 5);
    assert_eq!(out.r_total_bps, est.r_total_bps);
    assert_eq!(out.ee_bit_per_joule, est.ee_bit_per_joule);
    assert_eq!(out.power.p_total_w, est.power.p_total_w);
}

#[test]
fn power_breakdown_reference() {
    let sim = Sim(gsmhp_simulator_new());
    let mut p = GsmhpPower::default();
    assert_eq!(unsafe { gsmhp_simulator_power(sim.0, GsmhpScheme::Fdp as u32, 6.4e10, &mut p) }, GsmhpStatus::Ok);
    assert!((p.p_bb_w - 512.0).abs() < 1e-9);
    assert!((p.p_cd_w - 6.4).abs() < 1e-9);
    assert_eq!(unsafe { gsmhp_simulator_power(sim.0, 7, 1.0, &mut p) }, GsmhpStatus::InvalidArgument);
    assert_eq!(unsafe { gsmhp_simulator_power(sim.0, 0, -1.0, &mut p) }, GsmhpStatus::InvalidArgument);
}

#[test]
fn bad_arguments_are_reported() {
    let sim = small_sim();
    unsafe {
        assert_eq!(gsmhp_simulator_set_mode(sim.0, 9), GsmhpStatus::InvalidArgument);
        assert!(last_error().contains("RF mode"));
        assert_eq!(gsmhp_simulator_set_mode(sim.0, GsmhpRfMode::EqualGain as u32), GsmhpStatus::Ok);
        assert_eq!(gsmhp_simulator_set_drops(sim.0, 0), GsmhpStatus::InvalidArgument);
        assert_eq!(gsmhp_simulator_set_p_max_w(sim.0, f64::NAN), GsmhpStatus::InvalidArgument);
        assert_eq!(gsmhp_simulator_set_seed(ptr::null_mut(), 1), GsmhpStatus::NullPointer);

        // more users than RF chains
        assert_eq!(gsmhp_simulator_set_geometry(sim.0, 9, 6, 8, 4), GsmhpStatus::Ok);
        let mut out = GsmhpPointResult::default();
        assert_eq!(gsmhp_simulator_evaluate(sim.0, 0, &mut out), GsmhpStatus::Infeasible);
        gsmhp_simulator_free(ptr::null_mut());
    }
}

#[test]
fn config_file_and_sweep_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(&cfg, "n_users = 2\nn_rf = 4\nn_m = 6\nn_k = 2\ndrops = 2\n").unwrap();
    let cfg_c = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut raw = ptr::null_mut();
    assert_eq!(unsafe { gsmhp_simulator_from_config(cfg_c.as_ptr(), &mut raw) }, GsmhpStatus::Ok);
    let sim = Sim(raw);

    let csv = dir.path().join("rf.csv");
    let csv_c = CString::new(csv.to_str().unwrap()).unwrap();
    let mut failed = 99u64;
    let status = unsafe { gsmhp_simulator_run_sweep(sim.0, GsmhpSweep::RfChains as u32, csv_c.as_ptr(), &mut failed) };
    assert_eq!(status, GsmhpStatus::Ok, "{}", last_error());
    assert_eq!(failed, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), gsmhp_core::sweep::CSV_HEADER);
    // N_RF in 2..6, two schemes each
    assert_eq!(text.lines().count(), 1 + 4 * 2);

    let missing = CString::new(dir.path().join("nope.toml").to_str().unwrap()).unwrap();
    let mut raw = ptr::null_mut();
    assert_eq!(unsafe { gsmhp_simulator_from_config(missing.as_ptr(), &mut raw) }, GsmhpStatus::Io);
    assert!(raw.is_null());
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(unsafe { gsmhp_simulator_from_config(cfg_c.as_ptr(), &mut raw) }, GsmhpStatus::Config);
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let lib = target_dir().join("libgsmhp.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "gsmhp.h"

int main(void) {
    uint64_t m = 0;
    if (gsmhp_num_spatial_schemes(16, 14, &m) != GSMHP_STATUS_OK || m != 64) return 1;
    if (gsmhp_num_spatial_schemes(3, 5, &m) != GSMHP_STATUS_INFEASIBLE) return 2;
    if (gsmhp_last_error_message() == NULL) return 3;

    GsmhpSimulator *sim = gsmhp_simulator_new();
    GsmhpPower p;
    if (gsmhp_simulator_power(sim, GSMHP_SCHEME_GSM_HP, 6.4e10, &p) != GSMHP_STATUS_OK) return 4;
    gsmhp_simulator_set_geometry(sim, 2, 4, 6, 2);
    gsmhp_simulator_set_drops(sim, 2);
    GsmhpPointResult r;
    if (gsmhp_simulator_evaluate(sim, GSMHP_SCHEME_FDP, &r) != GSMHP_STATUS_OK) return 5;
    gsmhp_simulator_free(sim);
    printf("%.3f %llu\n", p.p_bb_w, (unsigned long long)r.n_drops);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler not found");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "56.000 2");
}
