use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use ballrecon_ffi::*;

fn last_error() -> String {
    let p = br_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn measure_with(atoms: &[([f64; 2], f64)]) -> *mut BrMeasure {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(br_measure_new(2, &mut m), BrStatus::Ok);
        for (x, w) in atoms {
            assert_eq!(br_measure_add_atom(m, x.as_ptr(), 2, *w), BrStatus::Ok);
        }
    }
    m
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(br_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn ball_mass_and_averaged_premeasure() {
    let m = measure_with(&[([0.0, 0.0], 2.0)]);
    unsafe {
        let seg = [0.0, 1.0, 1.0, 1.0];
        assert_eq!(br_measure_add_chain(m, seg.as_ptr(), 2, 1.0), BrStatus::Ok);
        let mut mass = 0.0;
        assert_eq!(br_measure_ball_mass(m, [0.5, 1.0].as_ptr(), 0.25, &mut mass), BrStatus::Ok);
        assert!((mass - 0.5).abs() < 1e-12);

        let mut q = ptr::null_mut();
        assert_eq!(br_premeasure_new(m, BrPremeasureKind::Averaged, &mut q), BrStatus::Ok);
        br_measure_free(m);
        // the premeasure owns its copy of the measure
        let (r, eta) = (0.4, 0.1);
        let mut v = 0.0;
        assert_eq!(br_premeasure_evaluate(q, [eta, 0.0].as_ptr(), r, &mut v), BrStatus::Ok);
        assert!((v - 2.0 * (r - eta) / r).abs() < 1e-12, "{v}");
        br_premeasure_free(q);
    }
}

#[test]
fn sweeps_recover_atoms() {
    let m = measure_with(&[([0.2, 0.3], 1.5), ([0.7, 0.6], 0.5)]);
    let deltas = [0.2, 0.1, 0.05];
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(br_premeasure_new(m, BrPremeasureKind::Averaged, &mut q), BrStatus::Ok);
        let mut values = [0.0; 3];
        let (mut limit, mut exact) = (0.0, false);
        let (lo, hi) = ([0.0, 0.0], [1.0, 1.0]);
        let s = br_packing_sweep(q, lo.as_ptr(), hi.as_ptr(), deltas.as_ptr(), 3, values.as_mut_ptr(), &mut limit, &mut exact);
        assert_eq!(s, BrStatus::Ok);
        assert!(exact);
        assert!((limit - 2.0).abs() < 1e-9, "{limit}");
        assert_eq!(values[2], limit);
        br_premeasure_free(q);

        let mut qe = ptr::null_mut();
        assert_eq!(br_premeasure_new(m, BrPremeasureKind::Exact, &mut qe), BrStatus::Ok);
        let targets = [0.2, 0.3, 0.7, 0.6];
        let s = br_cover_sweep(qe, targets.as_ptr(), 2, deltas.as_ptr(), 3, values.as_mut_ptr(), &mut limit, &mut exact);
        assert_eq!(s, BrStatus::Ok);
        assert!(exact);
        assert!(values.iter().all(|&v| v >= 2.0 - 1e-12), "{values:?}");
        br_premeasure_free(qe);
        br_measure_free(m);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        assert_eq!(br_measure_new(2, ptr::null_mut()), BrStatus::NullPointer);
        assert!(last_error().contains("out"));

        let mut bad = ptr::null_mut();
        assert_eq!(br_measure_new(0, &mut bad), BrStatus::InvalidArgument);
        assert!(bad.is_null());

        let m = measure_with(&[]);
        assert_eq!(br_measure_add_atom(m, [0.0, 0.0, 0.0].as_ptr(), 3, 1.0), BrStatus::InvalidArgument);
        assert_eq!(br_measure_add_atom(m, [0.0, 0.0].as_ptr(), 2, f64::NAN), BrStatus::InvalidArgument);
        assert!(last_error().contains("weight"));
        let mut out = 0.0;
        assert_eq!(br_measure_ball_mass(m, ptr::null(), 1.0, &mut out), BrStatus::NullPointer);
        assert_eq!(br_measure_ball_mass(m, [0.0, 0.0].as_ptr(), -1.0, &mut out), BrStatus::InvalidArgument);
        br_measure_free(m);
        br_measure_free(ptr::null_mut());
        br_premeasure_free(ptr::null_mut());
    }
}

#[test]
fn subfamily_bound_is_reported_as_infeasible() {
    // pairwise overlapping balls, so one subfamily (zeta = 0) cannot cover every centre
    let n = 12;
    let mut centers = Vec::new();
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        centers.extend([t.cos(), t.sin()]);
    }
    let radii = vec![1.0; n];
    let mut count = 0;
    unsafe {
        let s = br_besicovitch_subfamilies(centers.as_ptr(), radii.as_ptr(), n, 2, 9, &mut count);
        assert_eq!(s, BrStatus::Ok);
        assert!((2..=19).contains(&count));
        let s = br_besicovitch_subfamilies(centers.as_ptr(), radii.as_ptr(), n, 2, 0, &mut count);
        assert_eq!(s, BrStatus::Infeasible, "{}", last_error());
        assert!(last_error().contains("subfamily"));
    }
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ballrecon.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "br_version",
        "br_last_error",
        "br_measure_new",
        "br_measure_free",
        "br_measure_add_atom",
        "br_measure_add_chain",
        "br_measure_ball_mass",
        "br_premeasure_new",
        "br_premeasure_free",
        "br_premeasure_evaluate",
        "br_cover_sweep",
        "br_packing_sweep",
        "br_besicovitch_subfamilies",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(text.contains("typedef struct BrMeasure BrMeasure;"));
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).status() else {
            eprintln!("{cc} not available, skipping compile check");
            continue;
        };
        assert!(status.success(), "{cc} rejected the header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libballrecon_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile_dir();
    let bin = dir.join("demo");
    let Ok(status) = Command::new("cc")
        .arg(manifest.join("examples/demo.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("cc not available, skipping");
        return;
    };
    assert!(status.success(), "demo.c failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("limit 2.000000000000 exact 1"));
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("ffi-demo-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
