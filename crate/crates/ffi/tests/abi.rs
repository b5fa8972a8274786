use std::ffi::{c_char, c_int, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use coverlaw_ffi::*;

const BENZENE: &str = r#"{"n": 6, "covers": [[0,1],[1,4],[4,5],[0,2],[2,3],[3,5]], "ortho": [5,3,4,1,2,0]}"#;

fn last_error() -> String {
    let p = coverlaw_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn build(json: &str) -> Result<*mut CoverlawLattice, CoverlawStatus> {
    let text = CString::new(json).unwrap();
    let mut handle = ptr::null_mut();
    match unsafe { coverlaw_lattice_from_json(text.as_ptr(), &mut handle) } {
        CoverlawStatus::Ok => Ok(handle),
        status => Err(status),
    }
}

#[test]
fn lattice_operations_round_trip() {
    let l = build(BENZENE).unwrap();
    let (mut n, mut x, mut commutes) = (0usize, 0usize, false);
    unsafe {
        assert_eq!(coverlaw_lattice_size(l, &mut n), CoverlawStatus::Ok);
        assert_eq!(n, 6);
        assert_eq!(coverlaw_lattice_join(l, 1, 2, &mut x), CoverlawStatus::Ok);
        assert_eq!(x, 5);
        assert_eq!(coverlaw_lattice_meet(l, 1, 4, &mut x), CoverlawStatus::Ok);
        assert_eq!(x, 1);
        assert_eq!(coverlaw_lattice_ortho(l, 1, &mut x), CoverlawStatus::Ok);
        assert_eq!(x, 3);
        assert_eq!(coverlaw_lattice_commutes(l, 0, 1, &mut commutes), CoverlawStatus::Ok);
        assert!(commutes);
        assert_eq!(coverlaw_lattice_meet(l, 1, 6, &mut x), CoverlawStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        coverlaw_lattice_free(l);
    }
}

#[test]
fn property_check_reports_witness() {
    let l = build(BENZENE).unwrap();
    let prop = CString::new("orthomodular").unwrap();
    let mut pass = true;
    let mut witness = [usize::MAX; 4];
    let mut len = 0usize;
    unsafe {
        let status = coverlaw_lattice_check(l, prop.as_ptr(), &mut pass, witness.as_mut_ptr(), 4, &mut len);
        assert_eq!(status, CoverlawStatus::Ok);
        assert!(!pass);
        assert_eq!(len, 2);
        assert_eq!(&witness[..2], &[1, 4]);

        let status = coverlaw_lattice_check(l, prop.as_ptr(), &mut pass, ptr::null_mut(), 0, &mut len);
        assert_eq!(status, CoverlawStatus::BufferTooSmall);
        assert_eq!(len, 2);

        let unknown = CString::new("modular-ish").unwrap();
        let status = coverlaw_lattice_check(l, unknown.as_ptr(), &mut pass, ptr::null_mut(), 0, &mut len);
        assert_eq!(status, CoverlawStatus::MalformedInput);
        coverlaw_lattice_free(l);
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    assert_eq!(build("{\"n\": 2").unwrap_err(), CoverlawStatus::MalformedInput);
    assert!(last_error().contains("line 1"));
    let broken = BENZENE.replace("[5,3,4,1,2,0]", "[5,2,1,4,3,0]");
    assert_eq!(build(&broken).unwrap_err(), CoverlawStatus::InvalidLattice);
    assert!(last_error().contains("order-reversing"));
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { coverlaw_lattice_from_json(ptr::null(), &mut handle) }, CoverlawStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { coverlaw_lattice_from_json(bad.as_ptr().cast(), &mut handle) }, CoverlawStatus::InvalidUtf8);
    let mut n = 0usize;
    assert_eq!(unsafe { coverlaw_lattice_size(ptr::null(), &mut n) }, CoverlawStatus::NullPointer);
    unsafe { coverlaw_lattice_free(ptr::null_mut()) };
}

fn run(args: &[&str]) -> (CoverlawStatus, c_int, String) {
    let owned: Vec<CString> = args.iter().map(|a| CString::new(*a).unwrap()).collect();
    let ptrs: Vec<*const c_char> = owned.iter().map(|a| a.as_ptr()).collect();
    let mut code: c_int = -1;
    let mut report: *mut c_char = ptr::null_mut();
    let status = unsafe { coverlaw_run(ptrs.len() as c_int, ptrs.as_ptr(), &mut code, &mut report) };
    let text = if report.is_null() {
        String::new()
    } else {
        let t = unsafe { CStr::from_ptr(report) }.to_string_lossy().into_owned();
        unsafe { coverlaw_string_free(report) };
        t
    };
    (status, code, text)
}

#[test]
fn run_matches_the_command_line_contract() {
    let (status, code, text) = run(&["verify-theorem", "--dim", "4", "--trials", "50", "--seed", "7", "--quiet"]);
    assert_eq!((status, code), (CoverlawStatus::Ok, 0));
    assert!(text.lines().last().unwrap().contains("\"pass\":true"));

    let (status, code, text) = run(&["check-lattice", "/nonexistent.json"]);
    assert_eq!((status, code), (CoverlawStatus::Ok, 2));
    assert!(text.is_empty());
    assert!(last_error().contains("nonexistent"));

    let mut code = 0;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { coverlaw_run(-1, ptr::null(), &mut code, &mut report) }, CoverlawStatus::MalformedInput);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(coverlaw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libcoverlaw_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("size=6 meet=0 covering=1"), "{text}");
    assert!(text.contains("exit=0 summary=1"), "{text}");
}
