use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use drc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(drc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn figure_one_through_the_c_abi() {
    let m = [-2i64, 5, 3, 12];
    let mut d: *mut DrcDecomposition = ptr::null_mut();
    unsafe {
        assert_eq!(drc_enumerate(4, 3, m.as_ptr(), m.len(), &mut d), DrcStatus::Ok);
        let mut n = 0usize;
        assert_eq!(drc_decomposition_num_strata(d, &mut n), DrcStatus::Ok);
        assert!(n > 1);
        let mut found = false;
        for i in 0..n {
            let (mut num, mut den, mut fibre, mut length) = (0i64, 0i64, 0u64, 0u64);
            assert_eq!(drc_decomposition_weight(d, i, &mut num, &mut den), DrcStatus::Ok);
            assert_eq!(drc_decomposition_drl(d, i, &mut fibre, &mut length), DrcStatus::Ok);
            assert_eq!(den, 1);
            assert_eq!(fibre as i64 * length as i64, num);
            found |= (num, fibre, length) == (6, 3, 2);
        }
        assert!(found);
        let mut json = ptr::null_mut();
        assert_eq!(drc_decomposition_to_json(d, &mut json), DrcStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(drc_archive_parse(json, &mut back), DrcStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(drc_decomposition_to_json(back, &mut json2), DrcStatus::Ok);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(json2));
        drc_string_free(json);
        drc_string_free(json2);
        drc_decomposition_free(back);
        drc_decomposition_free(d);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut d: *mut DrcDecomposition = ptr::null_mut();
    unsafe {
        let bad = [3i64, -2];
        assert_eq!(drc_enumerate(2, 1, bad.as_ptr(), 2, &mut d), DrcStatus::InputError);
        assert!(d.is_null());
        assert!(last_error().contains("discrepancy"));
        assert_eq!(drc_enumerate(2, 1, ptr::null(), 2, &mut d), DrcStatus::NullPointer);
        assert_eq!(drc_enumerate(2, 1, bad.as_ptr(), 2, ptr::null_mut()), DrcStatus::NullPointer);
        assert_eq!(drc_decomposition_num_strata(ptr::null(), ptr::null_mut()), DrcStatus::NullPointer);

        let tampered = CString::new("{\"drc_schema\": 9}").unwrap();
        assert_eq!(drc_archive_parse(tampered.as_ptr(), &mut d), DrcStatus::InputError);
        assert!(last_error().contains("schema version 9"));

        let (mut num, mut den) = (0, 0);
        assert_eq!(drc_step1_k_residue(2, -4, -1, &mut num, &mut den), DrcStatus::Ok);
        assert_eq!((num, den), (1, 4));
        assert!(last_error().is_empty());
        assert_eq!(drc_step1_k_residue(2, -3, -1, &mut num, &mut den), DrcStatus::InputError);
        drc_decomposition_free(ptr::null_mut());
        drc_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(drc_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

/// Compiles a C program against the generated header and the static
/// library. Skipped when no C compiler or static archive is available.
#[test]
fn c_program_links_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("drc.h").exists(), "header not generated");
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libdrc_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {}", lib.display());
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("c_smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(manifest.join("tests/c_smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "C program failed: {:?} {stdout}", run.status.code());
    assert!(stdout.contains("res=1/4"), "{stdout}");
}
