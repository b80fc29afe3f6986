use std::ffi::{CStr, CString};
use std::ptr;

use wavekac_ffi::*;

const CFG: &str = r#"{
  "problem": { "kind": "string", "length": 1.0, "density": { "n_grid": 400, "a": 1.0, "b": 0.8 } },
  "K": 16, "M": 1,
  "pipeline": { "dt": 0.05, "t_max": 1.4 }
}"#;

fn last_error() -> String {
    let p = wk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn forward_json_roundtrip() {
    let cfg = CString::new(CFG).unwrap();
    let mut sd = ptr::null_mut();
    unsafe {
        assert_eq!(wk_forward(cfg.as_ptr(), &mut sd), WkStatus::Ok);
        assert_eq!(wk_spectral_k(sd), 16);
        assert_eq!(wk_spectral_m(sd), 1);
        let mut lam = vec![0.0; 16];
        assert_eq!(wk_spectral_lambda(sd, lam.as_mut_ptr(), lam.len()), WkStatus::Ok);
        assert!(lam.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(wk_spectral_lambda(sd, lam.as_mut_ptr(), 3), WkStatus::InputError);

        let json = wk_spectral_to_json(sd);
        assert!(!json.is_null());
        let mut back = ptr::null_mut();
        assert_eq!(wk_spectral_from_json(json, &mut back), WkStatus::Ok);
        let mut lam2 = vec![0.0; 16];
        assert_eq!(wk_spectral_lambda(back, lam2.as_mut_ptr(), 16), WkStatus::Ok);
        assert_eq!(lam, lam2);
        wk_string_free(json);
        wk_spectral_free(back);
        wk_spectral_free(sd);
    }
}

#[test]
fn reconstruct_with_truth() {
    let cfg = CString::new(CFG).unwrap();
    let mut sd = ptr::null_mut();
    let mut rec = ptr::null_mut();
    unsafe {
        assert_eq!(wk_forward(cfg.as_ptr(), &mut sd), WkStatus::Ok);
        let st = wk_reconstruct_with_truth(sd, cfg.as_ptr(), &mut rec);
        assert!(matches!(st, WkStatus::Ok | WkStatus::Flagged), "{st:?}: {}", last_error());
        let n = wk_reconstruction_atom_count(rec);
        assert!(n >= 2);
        let mut d = f64::NAN;
        assert_eq!(wk_reconstruction_distance(rec, 0, 0, &mut d), WkStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(wk_reconstruction_distance(rec, n, 0, &mut d), WkStatus::InputError);
        let mut dist = f64::NAN;
        assert_eq!(wk_reconstruction_distortion(rec, &mut dist), WkStatus::Ok);
        assert!(dist.is_finite());
        assert_eq!(wk_reconstruction_collapsed(rec), 0);
        let rep = wk_reconstruction_report_json(rec);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(rep).to_str().unwrap()).unwrap();
        assert!(v["atoms"].as_array().unwrap().len() == n);
        wk_string_free(rep);
        wk_reconstruction_free(rec);
        wk_spectral_free(sd);
    }
}

#[test]
fn null_and_bad_input() {
    unsafe {
        let mut sd = ptr::null_mut();
        let cfg = CString::new(CFG).unwrap();
        assert_eq!(wk_forward(cfg.as_ptr(), ptr::null_mut()), WkStatus::NullPointer);
        assert!(last_error().contains("out"));
        // NULL config means defaults, which carry no problem.
        assert_eq!(wk_forward(ptr::null(), &mut sd), WkStatus::InputError);
        assert!(sd.is_null());

        let bad = CString::new(r#"{ "K": 4, "nonsense": true }"#).unwrap();
        assert_eq!(wk_forward(bad.as_ptr(), &mut sd), WkStatus::InputError);
        assert!(last_error().contains("nonsense"));

        assert_eq!(wk_spectral_k(ptr::null()), 0);
        assert!(wk_spectral_to_json(ptr::null()).is_null());
        assert_eq!(wk_reconstruction_collapsed(ptr::null()), -1);
        wk_spectral_free(ptr::null_mut());
        wk_reconstruction_free(ptr::null_mut());
        wk_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_and_krein() {
    let cfg = CString::new("{}").unwrap();
    let only = CString::new("string-identity").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(wk_verify(cfg.as_ptr(), only.as_ptr(), &mut out), WkStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        assert_eq!(v["all_passed"], true);
        wk_string_free(out);

        let kcfg = CString::new(CFG).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(wk_probe_krein(kcfg.as_ptr(), &mut out), WkStatus::Ok);
        assert!(!out.is_null());
        wk_string_free(out);
    }
}
