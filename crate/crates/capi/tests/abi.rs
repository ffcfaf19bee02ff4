//! Exercises the C ABI through the exported functions, the way a foreign
//! caller would, and keeps the generated header in sync with the exports.

use std::ffi::{c_char, CString};
use std::ptr;

use cointoss_capi::*;

fn weight(text: &str) -> *mut CtWeight {
    let text = CString::new(text).unwrap();
    let mut handle: *mut CtWeight = ptr::null_mut();
    let status = unsafe { ct_weight_parse(text.as_ptr(), &mut handle) };
    assert_eq!(status, CtStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let len = unsafe { ct_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    buf.truncate(len.min(255));
    String::from_utf8(buf).unwrap()
}

#[test]
fn parse_evaluate_and_free() {
    let handle = weight("geo:2");
    let mut phi = 0.0;
    assert_eq!(unsafe { ct_weight_phi(handle, 3, &mut phi) }, CtStatus::Ok);
    assert_eq!(phi, 0.125);

    let mut tag = -1;
    assert_eq!(
        unsafe { ct_weight_case_tag(handle, 32, &mut tag) },
        CtStatus::Ok
    );
    assert_eq!(tag, 2);
    unsafe { ct_weight_free(handle) };
}

#[test]
fn parse_errors_map_to_statuses() {
    let bad = CString::new("power:-1").unwrap();
    let mut handle: *mut CtWeight = ptr::null_mut();
    assert_eq!(
        unsafe { ct_weight_parse(bad.as_ptr(), &mut handle) },
        CtStatus::InvalidWeightSpec
    );
    assert!(handle.is_null());
    assert!(last_error().contains("invalid weight spec"));

    let out_of_range = CString::new("const:1.5").unwrap();
    assert_eq!(
        unsafe { ct_weight_parse(out_of_range.as_ptr(), &mut handle) },
        CtStatus::RangeViolation
    );

    assert_eq!(
        unsafe { ct_weight_parse(ptr::null(), &mut handle) },
        CtStatus::InvalidArgument
    );
}

#[test]
fn transform_matches_the_core_library() {
    let handle = weight("geo:2");
    let t = CString::new("100").unwrap();
    let mut value = CtTransformValue {
        re: 0.0,
        im: 0.0,
        truncation_bound: 0.0,
        terms_used: 0,
    };
    assert_eq!(
        unsafe { ct_mu_hat(handle, t.as_ptr(), 40, 2, &mut value) },
        CtStatus::Ok
    );

    let spec = cointoss::WeightSpec::parse("geo:2").unwrap();
    let expect = cointoss::transform::mu_hat(&spec, &"100".parse().unwrap(), 40, 2).unwrap();
    assert_eq!(value.re, expect.value.re);
    assert_eq!(value.im, expect.value.im);
    assert_eq!(value.terms_used, expect.terms_used);

    let mut sq = 0.0;
    let mut bound = 0.0;
    assert_eq!(
        unsafe { ct_mu_hat_sq(handle, t.as_ptr(), 40, &mut sq, &mut bound) },
        CtStatus::Ok
    );
    let modulus_sq = value.re * value.re + value.im * value.im;
    assert!((sq - modulus_sq).abs() <= 2.0 * value.truncation_bound + bound + 1e-13);

    let mut pow2 = CtTransformValue {
        re: 0.0,
        im: 0.0,
        truncation_bound: 0.0,
        terms_used: 0,
    };
    assert_eq!(
        unsafe { ct_mu_hat_at_pow2(handle, 5, 40, &mut pow2) },
        CtStatus::Ok
    );
    assert!(pow2.re > 0.0);

    let bad = CString::new("1e5").unwrap();
    assert_eq!(
        unsafe { ct_mu_hat(handle, bad.as_ptr(), 40, 2, &mut value) },
        CtStatus::InvalidArgument
    );
    unsafe { ct_weight_free(handle) };
}

#[test]
fn constants_blocks_and_envelopes() {
    let handle = weight("geo:2");
    let mut consts = CtDecayConstants {
        case_tag: 0,
        k_phi: 0.0,
        delta: 0.0,
        gamma: 0.0,
        c: 0.0,
        c1: 0.0,
        c2: 0.0,
        final_multiplier: 0.0,
    };
    assert_eq!(
        unsafe { ct_derive_constants(handle, &mut consts) },
        CtStatus::Ok
    );
    assert_eq!(consts.case_tag, 2);
    assert_eq!(consts.k_phi, 3.0);
    assert!((consts.gamma - 0.0839276240313981).abs() < 1e-12);

    let mut bound = 0.0;
    assert_eq!(
        unsafe { ct_theoretical_bound(handle, 1048576.0, &mut bound) },
        CtStatus::Ok
    );
    assert!((bound - 0.3701903494186884).abs() < 1e-12);

    let t = CString::new("100").unwrap();
    let mut summary = CtBlockSummary {
        m: 0,
        member_count: 0,
        good_block_count: 0,
        half_odd_property_pass: false,
    };
    assert_eq!(
        unsafe { ct_block_decompose(t.as_ptr(), 3.0, &mut summary) },
        CtStatus::Ok
    );
    assert_eq!(
        (summary.m, summary.member_count, summary.good_block_count),
        (6, 2, 1)
    );
    assert!(summary.half_odd_property_pass);

    let mut envelope = 0.0;
    assert_eq!(
        unsafe { ct_block_envelope_bound(handle, t.as_ptr(), &mut envelope) },
        CtStatus::Ok
    );
    assert!((envelope - 0.017819743034041293).abs() < 1e-12);

    assert!(ct_check_modulus_contraction(0.5, 0.5, 0.5));
    assert!(!ct_check_modulus_contraction(0.0, 1.0, 0.5));

    let (mut lhs, mut rhs, mut pass) = (0.0, 0.0, false);
    assert_eq!(
        unsafe { ct_lower_bound_check(handle, 5, &mut lhs, &mut rhs, &mut pass) },
        CtStatus::Ok
    );
    assert!(pass && lhs >= rhs);

    let (mut floor, mut pass) = (0.0, false);
    assert_eq!(
        unsafe { ct_rajchman_check(handle, 3, 6, &mut floor, &mut pass) },
        CtStatus::Ok
    );
    assert!(pass);
    assert!((floor - 1.0 / std::f64::consts::PI.powi(2)).abs() < 1e-15);
    assert_eq!(
        unsafe { ct_rajchman_check(handle, 2, 6, &mut floor, &mut pass) },
        CtStatus::PreconditionViolation
    );
    unsafe { ct_weight_free(handle) };
}

#[test]
fn sampling_and_normality_surface() {
    let handle = weight("geo:2");
    let mut digits = vec![2u8; 512];
    assert_eq!(
        unsafe { ct_sample_digits(handle, 7, digits.as_mut_ptr(), digits.len()) },
        CtStatus::Ok
    );
    assert!(digits.iter().all(|&d| d <= 1));

    let mut base3 = vec![0u8; 512];
    let mut certified = 0usize;
    assert_eq!(
        unsafe {
            ct_digits_in_base(
                handle,
                7,
                512,
                3,
                base3.as_mut_ptr(),
                base3.len(),
                &mut certified,
            )
        },
        CtStatus::Ok
    );
    // 512 bits certify about 512 log3(2) = 323 trigits
    assert!(certified > 300 && certified < 330);
    assert!(base3[..certified].iter().all(|&d| d < 3));

    let (mut re, mut im, mut used) = (0.0, 0.0, 0usize);
    assert_eq!(
        unsafe { ct_weyl_sum(handle, 7, 4096, 3, 1, 256, &mut re, &mut im, &mut used) },
        CtStatus::Ok
    );
    assert_eq!(used, 256);
    assert!(re.hypot(im) <= 1.0);

    let points = [0.1, 0.5, 0.9];
    let mut disc = 0.0;
    assert_eq!(
        unsafe { ct_star_discrepancy(points.as_ptr(), points.len(), &mut disc) },
        CtStatus::Ok
    );
    assert!(disc > 0.0 && disc <= 1.0);

    let mut exponent = f64::NAN;
    assert_eq!(
        unsafe { ct_del_exponent(handle, 1, 3, 64, &mut exponent) },
        CtStatus::Ok
    );
    assert!(exponent < 0.95);

    let (mut b0, mut tau0, mut l) = (0u64, 0u32, 0i32);
    assert_eq!(
        unsafe { ct_two_adic_split(12, &mut b0, &mut tau0, &mut l) },
        CtStatus::Ok
    );
    assert_eq!((b0, tau0, l), (3, 2, -1));
    assert_eq!(
        unsafe { ct_two_adic_split(5, &mut b0, &mut tau0, &mut l) },
        CtStatus::Ok
    );
    assert_eq!((b0, tau0, l), (5, 0, 2));

    let mut pass = false;
    assert_eq!(
        unsafe { ct_cassels_check(1, 5, 3, &mut pass) },
        CtStatus::Ok
    );
    assert!(pass);
    assert_eq!(
        unsafe { ct_cassels_check(1, 3, 3, &mut pass) },
        CtStatus::PreconditionViolation
    );

    let bits = [0u8, 1, 0, 1];
    let (mut count, mut case_one) = (0usize, false);
    assert_eq!(
        unsafe { ct_regular_pairs(bits.as_ptr(), bits.len(), 0.2, &mut count, &mut case_one) },
        CtStatus::Ok
    );
    assert_eq!(count, 3);
    assert!(case_one);
    unsafe { ct_weight_free(handle) };
}

#[test]
fn version_is_a_static_string() {
    let version = unsafe { std::ffi::CStr::from_ptr(ct_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cointoss.h"))
            .expect("generated header exists");
    let source =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let mut exports = Vec::new();
    for line in source.lines() {
        if let Some(rest) = line.trim().strip_prefix("pub unsafe extern \"C\" fn ") {
            exports.push(rest.split('(').next().unwrap().to_owned());
        } else if let Some(rest) = line.trim().strip_prefix("pub extern \"C\" fn ") {
            exports.push(rest.split('(').next().unwrap().to_owned());
        }
    }
    assert!(
        exports.len() >= 20,
        "expected a full surface, found {}",
        exports.len()
    );
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "header is missing {name}"
        );
    }
}
