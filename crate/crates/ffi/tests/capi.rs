use std::ffi::{CStr, CString};
use std::ptr;

use ultrafit_ffi::*;

fn points(coords: &[f64], n: usize, d: usize) -> *mut UltrafitPoints {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ultrafit_points_new(coords.as_ptr(), n, d, &mut out) },
        UltrafitStatus::Ok
    );
    out
}

fn fit(p: *const UltrafitPoints, algorithm: UltrafitAlgorithm) -> *mut UltrafitDendrogram {
    let config = ultrafit_spanner_config_default();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ultrafit_fit(p, algorithm, &config, &mut out) },
        UltrafitStatus::Ok
    );
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ultrafit_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn collinear_exact_round_trip() {
    let p = points(&[0.0, 1.0, 3.0], 3, 1);
    let d = fit(p, UltrafitAlgorithm::Exact);
    unsafe {
        assert_eq!(ultrafit_points_len(p), 3);
        assert_eq!(ultrafit_dendrogram_n_leaves(d), 3);

        let (mut l, mut r, mut h, mut s) = ([0usize; 2], [0usize; 2], [0f64; 2], [0usize; 2]);
        let st = ultrafit_dendrogram_merges(d, l.as_mut_ptr(), r.as_mut_ptr(), h.as_mut_ptr(), s.as_mut_ptr(), 2);
        assert_eq!(st, UltrafitStatus::Ok);
        assert_eq!((l, r, h, s), ([0, 3], [1, 2], [1.0, 3.0], [2, 3]));
        let st = ultrafit_dendrogram_merges(d, l.as_mut_ptr(), r.as_mut_ptr(), h.as_mut_ptr(), s.as_mut_ptr(), 1);
        assert_eq!(st, UltrafitStatus::BufferTooSmall);

        let mut text = ptr::null_mut();
        assert_eq!(ultrafit_dendrogram_to_merge_list(d, &mut text), UltrafitStatus::Ok);
        assert_eq!(CStr::from_ptr(text).to_str().unwrap(), "0 1 1.0 2\n3 2 3.0 3\n");
        let mut back = ptr::null_mut();
        assert_eq!(ultrafit_dendrogram_from_merge_list(text, &mut back), UltrafitStatus::Ok);
        ultrafit_string_free(text);

        let mut report = UltrafitDistortion::default();
        assert_eq!(ultrafit_distortion(p, back, false, &mut report), UltrafitStatus::Ok);
        assert_eq!(
            (report.max, report.argmax_u, report.argmax_v, report.pairs),
            (1.5, 1, 2, 3)
        );
        let mut norm = UltrafitDistortion::default();
        assert_eq!(ultrafit_distortion(p, back, true, &mut norm), UltrafitStatus::Ok);
        assert_eq!(norm.scale, 1.0);

        ultrafit_dendrogram_free(back);
        ultrafit_dendrogram_free(d);
        ultrafit_points_free(p);
    }
}

#[test]
fn every_algorithm_through_the_abi() {
    let coords: Vec<f64> = (0..40 * 3).map(|i| ((i * 37 % 101) as f64) / 101.0).collect();
    let p = points(&coords, 40, 3);
    for alg in [
        UltrafitAlgorithm::Approx,
        UltrafitAlgorithm::Acc,
        UltrafitAlgorithm::Exact,
        UltrafitAlgorithm::Single,
        UltrafitAlgorithm::Complete,
        UltrafitAlgorithm::Average,
        UltrafitAlgorithm::Ward,
    ] {
        let d = fit(p, alg);
        let mut report = UltrafitDistortion::default();
        assert_eq!(
            unsafe { ultrafit_distortion(p, d, true, &mut report) },
            UltrafitStatus::Ok
        );
        assert!((report.min - 1.0).abs() < 1e-9, "{alg:?}");
        unsafe { ultrafit_dendrogram_free(d) };
    }
    unsafe { ultrafit_points_free(p) };
}

#[test]
fn duplicates_get_one_leaf_per_row() {
    let p = points(&[0.0, 0.0, 2.0, 0.0], 4, 1);
    let d = fit(p, UltrafitAlgorithm::Approx);
    let mut h = -1.0;
    unsafe {
        assert_eq!(ultrafit_dendrogram_n_leaves(d), 4);
        assert_eq!(ultrafit_dendrogram_distance(d, 0, 3, &mut h), UltrafitStatus::Ok);
        assert_eq!(h, 0.0);
        ultrafit_dendrogram_free(d);
        ultrafit_points_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(
            ultrafit_points_new(ptr::null(), 0, 1, &mut p),
            UltrafitStatus::EmptyInput
        );
        assert!(p.is_null());
        assert_eq!(
            ultrafit_points_new(ptr::null(), 2, 1, &mut p),
            UltrafitStatus::NullPointer
        );
        let nan = [0.0, f64::NAN];
        assert_eq!(
            ultrafit_points_new(nan.as_ptr(), 2, 1, &mut p),
            UltrafitStatus::InvalidArgument
        );
        assert!(last_error().contains("non-finite"));

        let good = points(&[0.0, 1.0], 2, 1);
        let mut config = ultrafit_spanner_config_default();
        config.gamma = 0.5;
        let mut d = ptr::null_mut();
        assert_eq!(
            ultrafit_fit(good, UltrafitAlgorithm::Approx, &config, &mut d),
            UltrafitStatus::InvalidArgument
        );
        assert!(last_error().contains("gamma"));
        assert_eq!(
            ultrafit_fit(good, UltrafitAlgorithm::Approx, ptr::null(), &mut d),
            UltrafitStatus::NullPointer
        );

        let bad = CString::new("0 1 3.0 2\n3 2 1.0 3\n").unwrap();
        assert_eq!(
            ultrafit_dendrogram_from_merge_list(bad.as_ptr(), &mut d),
            UltrafitStatus::InvalidDendrogram
        );
        assert!(last_error().contains("monotone"));

        let three = CString::new("0 1 1.0 2\n3 2 3.0 3\n").unwrap();
        assert_eq!(
            ultrafit_dendrogram_from_merge_list(three.as_ptr(), &mut d),
            UltrafitStatus::Ok
        );
        let mut report = UltrafitDistortion::default();
        assert_eq!(
            ultrafit_distortion(good, d, false, &mut report),
            UltrafitStatus::SizeMismatch
        );

        ultrafit_dendrogram_free(d);
        ultrafit_points_free(good);
        ultrafit_points_free(ptr::null_mut());
        ultrafit_dendrogram_free(ptr::null_mut());
        ultrafit_string_free(ptr::null_mut());
        assert_eq!(ultrafit_points_len(ptr::null()), 0);
    }
}
