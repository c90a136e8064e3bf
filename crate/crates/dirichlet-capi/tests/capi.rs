//! Exercise the C surface end to end on a real fixture, exactly as a
//! foreign binding would: parse, configure, run, read stats and spectrum
//! entries, check words, free everything.

use std::ffi::{CStr, CString};
use std::ptr;

use dirichlet_capi::*;

fn fixture_text(name: &str) -> CString {
    let path = format!(
        "{}/../dirichlet/fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    );
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_pipeline_through_the_c_surface() {
    unsafe {
        let mut group: *mut DirichletGroup = ptr::null_mut();
        let st = dirichlet_group_parse(fixture_text("fig8_cover4.gen").as_ptr(), &mut group);
        assert_eq!(st, DirichletStatus::Ok);

        let st = dirichlet_group_configure(group, 1.0, 20, false, false, 14);
        assert_eq!(st, DirichletStatus::Ok);

        let mut run: *mut DirichletRun = ptr::null_mut();
        let st = dirichlet_run(group, &mut run);
        assert_eq!(st, DirichletStatus::Ok, "error: {}", last_error_string());

        let mut stats = std::mem::zeroed::<DirichletStats>();
        assert_eq!(dirichlet_run_stats(run, &mut stats), DirichletStatus::Ok);
        assert!(stats.converged);
        assert!(!stats.cusped);
        assert!(stats.oracle_passed);
        assert_eq!(stats.face_count, 30);
        assert!((stats.volume - 2.0298832128).abs() < 1e-6);
        assert!((stats.coverage_fraction - 1.0).abs() < 1e-12);
        assert!(stats.tile_count > 1000);

        let n = dirichlet_spectrum_len(run);
        assert_eq!(n, 2);
        let mut entry = std::mem::zeroed::<DirichletSpectrumEntry>();
        assert_eq!(
            dirichlet_spectrum_entry(run, 0, &mut entry),
            DirichletStatus::Ok
        );
        assert!((entry.lambda - 0.8625546276).abs() < 1e-9);
        assert_eq!(entry.multiplicity, 4);
        // Out-of-range index is rejected.
        assert_eq!(
            dirichlet_spectrum_entry(run, 99, &mut entry),
            DirichletStatus::BadConfig
        );

        let word = dirichlet_spectrum_word(run, 0);
        assert!(!word.is_null());
        let text = CStr::from_ptr(word).to_str().unwrap().to_string();
        assert!(!text.is_empty());
        dirichlet_string_free(word);

        // check-words through the C surface: a word equals itself composed
        // with the fixture relator (baked into the generator file).
        let w1 = CString::new("1").unwrap();
        let w2 = CString::new("1 -1 2 -1 -1 -2 -2 1 -2 -2 -1").unwrap();
        let mut verdict = false;
        let st = dirichlet_check_words(group, run, w1.as_ptr(), w2.as_ptr(), &mut verdict);
        assert_eq!(st, DirichletStatus::Ok);
        assert!(verdict, "word times relator must equal the word");
        let w3 = CString::new("2").unwrap();
        let st = dirichlet_check_words(group, run, w1.as_ptr(), w3.as_ptr(), &mut verdict);
        assert_eq!(st, DirichletStatus::Ok);
        assert!(!verdict, "distinct generators must be distinguished");

        // Exports render and parse as text.
        for kind in 0..4u32 {
            let s = dirichlet_run_export(run, kind);
            assert!(!s.is_null());
            let body = CStr::from_ptr(s).to_str().unwrap();
            assert!(body.ends_with("end\n") || body.contains("dirichlet-"));
            dirichlet_string_free(s);
        }

        dirichlet_run_free(run);
        dirichlet_group_free(group);
    }
}

#[test]
fn raw_matrix_constructor() {
    unsafe {
        // diag(e^{1/2}, e^{-1/2}) as 8 doubles.
        let h = (0.5f64).exp();
        let entries = [h, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / h, 0.0];
        let mut group: *mut DirichletGroup = ptr::null_mut();
        let st = dirichlet_group_new(entries.as_ptr(), 1, &mut group);
        assert_eq!(st, DirichletStatus::Ok);
        dirichlet_group_free(group);
    }
}

#[test]
fn generated_header_declares_the_surface() {
    let header = format!("{}/include/dirichlet.h", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(header).expect("header generated at build time");
    for symbol in [
        "dirichlet_group_parse",
        "dirichlet_group_new",
        "dirichlet_group_configure",
        "dirichlet_run",
        "dirichlet_run_stats",
        "dirichlet_spectrum_len",
        "dirichlet_spectrum_entry",
        "dirichlet_spectrum_word",
        "dirichlet_run_export",
        "dirichlet_check_words",
        "dirichlet_last_error",
        "dirichlet_string_free",
        "DIRICHLET_STATUS_ORACLE_FAILED",
        "typedef struct DirichletGroup DirichletGroup;",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}

fn last_error_string() -> String {
    unsafe {
        let p = dirichlet_last_error();
        if p.is_null() {
            "<none>".into()
        } else {
            CStr::from_ptr(p).to_string_lossy().into_owned()
        }
    }
}
