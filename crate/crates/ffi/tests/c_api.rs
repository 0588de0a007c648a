use std::ffi::{c_void, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sparse_pd_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        spd_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

// f(x) = ½‖x − t‖² with t = (3, −1, 0.5)
unsafe extern "C" fn value(x: *const f64, n: usize, user: *mut c_void) -> f64 {
    let t = &*(user as *const [f64; 3]);
    let x = std::slice::from_raw_parts(x, n);
    x.iter().zip(t).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum()
}

unsafe extern "C" fn gradient(x: *const f64, n: usize, out: *mut f64, user: *mut c_void) {
    let t = &*(user as *const [f64; 3]);
    let x = std::slice::from_raw_parts(x, n);
    let out = std::slice::from_raw_parts_mut(out, n);
    for i in 0..n {
        out[i] = x[i] - t[i];
    }
}

#[test]
fn callback_problem_round_trip() {
    let target = [3.0, -1.0, 0.5];
    let x0 = [0.0; 3];
    unsafe {
        let mut p = ptr::null_mut();
        let st = spd_problem_from_callbacks(
            3,
            1,
            SpdSetKind::FullSpace,
            0.0,
            0.0,
            x0.as_ptr(),
            Some(value),
            Some(gradient),
            &target as *const _ as *mut c_void,
            &mut p,
        );
        assert_eq!(st, SpdStatus::Ok);
        assert_eq!(spd_problem_dim(p), 3);
        assert_eq!(spd_problem_sparsity(p), 1);

        let cfg = spd_config_new();
        let k = CString::new("eps").unwrap();
        let v = CString::new("1e-8").unwrap();
        assert_eq!(spd_config_set(cfg, k.as_ptr(), v.as_ptr()), SpdStatus::Ok);

        for name in ["pdqn", "iht", "gss"] {
            let solver = CString::new(name).unwrap();
            let mut r = ptr::null_mut();
            assert_eq!(spd_solve(p, cfg, solver.as_ptr(), &mut r), SpdStatus::Ok);
            let mut x = [9.0; 3];
            assert_eq!(spd_record_x_best(r, x.as_mut_ptr(), 3), SpdStatus::Ok);
            assert!((x[0] - 3.0).abs() < 1e-6 && x[1] == 0.0 && x[2] == 0.0, "{name}: {x:?}");
            assert!((spd_record_f_best(r) - 0.625).abs() < 1e-10);
            let (mut nf, mut ng, mut nf2g) = (0, 0, 0);
            assert_eq!(spd_record_counts(r, &mut nf, &mut ng, &mut nf2g), SpdStatus::Ok);
            assert_eq!(nf2g, nf + 2 * ng);
            assert_ne!(spd_record_termination(r), SpdTermination::Failed);
            let js = spd_record_json(r);
            assert!(CStr::from_ptr(js).to_str().unwrap().contains("\"nf2g\""));
            spd_string_free(js);
            let mut small = [0.0; 2];
            assert_eq!(spd_record_x_best(r, small.as_mut_ptr(), 2), SpdStatus::BufferTooSmall);
            spd_record_free(r);
        }
        spd_config_free(cfg);
        spd_problem_free(p);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut r = ptr::null_mut();
        let solver = CString::new("pdqn").unwrap();
        assert_eq!(spd_solve(ptr::null(), ptr::null(), solver.as_ptr(), &mut r), SpdStatus::NullPointer);
        assert!(last_error().contains("problem"));

        let cfg = spd_config_new();
        let k = CString::new("no_such_key").unwrap();
        let v = CString::new("1").unwrap();
        assert_eq!(spd_config_set(cfg, k.as_ptr(), v.as_ptr()), SpdStatus::Config);
        assert!(last_error().contains("no_such_key"));
        let k = CString::new("lambda_min").unwrap();
        let v = CString::new("-1").unwrap();
        assert_eq!(spd_config_set(cfg, k.as_ptr(), v.as_ptr()), SpdStatus::Config);
        spd_config_free(cfg);

        let mut p = ptr::null_mut();
        let fam = CString::new("not_a_family").unwrap();
        assert_eq!(spd_problem_generate(1, fam.as_ptr(), &mut p), SpdStatus::InvalidArgument);
        assert!(p.is_null());

        let x0 = [1.0, 1.0];
        let st = spd_problem_from_callbacks(
            2,
            1,
            SpdSetKind::FullSpace,
            0.0,
            0.0,
            x0.as_ptr(),
            Some(value),
            Some(gradient),
            ptr::null_mut(),
            &mut p,
        );
        assert_eq!(st, SpdStatus::InvalidProblem);
        let st = spd_problem_from_callbacks(2, 1, SpdSetKind::Box, 1.0, 0.0, x0.as_ptr(), Some(value), Some(gradient), ptr::null_mut(), &mut p);
        assert_eq!(st, SpdStatus::InvalidArgument);

        let path = CString::new("/nonexistent/problem.json").unwrap();
        assert_eq!(spd_problem_load(path.as_ptr(), &mut p), SpdStatus::Io);

        assert_eq!(spd_problem_dim(ptr::null()), 0);
        assert!(spd_record_f_best(ptr::null()).is_nan());
        spd_problem_free(ptr::null_mut());
        spd_record_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(spd_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn generated_problem_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("solver.conf");
    std::fs::write(&conf, "nf2g_max = 500\nhessian = lm2\n").unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        let path = CString::new(conf.to_str().unwrap()).unwrap();
        assert_eq!(spd_config_load(path.as_ptr(), &mut cfg), SpdStatus::Ok);
        let mut p = ptr::null_mut();
        let fam = CString::new("portfolio").unwrap();
        assert_eq!(spd_problem_generate(7, fam.as_ptr(), &mut p), SpdStatus::Ok);
        let solver = CString::new("pdqn").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(spd_solve(p, cfg, solver.as_ptr(), &mut r), SpdStatus::Ok);
        let mut nf2g = 0;
        spd_record_counts(r, ptr::null_mut(), ptr::null_mut(), &mut nf2g);
        assert!(nf2g <= 500);
        let js = spd_record_json(r);
        assert!(CStr::from_ptr(js).to_str().unwrap().contains("\"pd-lm2\""));
        spd_string_free(js);
        spd_record_free(r);
        spd_problem_free(p);
        spd_config_free(cfg);
    }
}

#[test]
fn header_declares_exports_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/sparse_pd.h");
    let text = std::fs::read_to_string(&header).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|l| l.split('(').next())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .expect("a C compiler is needed to check the header");
    assert!(status.success());
}
