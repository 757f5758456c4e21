use cqpolar_ffi::*;
use std::ffi::CStr;
use std::path::Path;
use std::ptr;

const ZERO: [f64; 4] = [1.0, 0.0, 0.0, 0.0];
const PLUS: [f64; 4] = [0.5, 0.5, 0.5, 0.5];

fn zero_plus() -> *mut CqpChannel {
    let mut ch = ptr::null_mut();
    let s = unsafe { cqp_channel_new(2, ZERO.as_ptr(), ptr::null(), PLUS.as_ptr(), ptr::null(), &mut ch) };
    assert_eq!(s, CqpStatus::Ok);
    ch
}

fn last_error() -> String {
    let n = unsafe { cqp_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; n + 1];
    unsafe { cqp_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn zero_plus_quantities() {
    let ch = zero_plus();
    let (mut f, mut z, mut i, mut ph, mut pf) = (0.0, 0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(cqp_channel_dim(ch), 2);
        assert_eq!(cqp_fidelity(ch, &mut f), CqpStatus::Ok);
        assert_eq!(cqp_fc_bhattacharyya(ch, &mut z), CqpStatus::Ok);
        assert_eq!(cqp_holevo(ch, &mut i), CqpStatus::Ok);
        assert_eq!(cqp_error_probabilities(ch, &mut ph, &mut pf), CqpStatus::Ok);
        cqp_channel_free(ch);
    }
    let f_exact = std::f64::consts::FRAC_1_SQRT_2;
    assert!((f - f_exact).abs() < 1e-12);
    assert!((z - f).abs() < 1e-7);
    let p = (1.0 + f_exact) / 2.0;
    let h = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    assert!((i - h).abs() < 1e-9);
    assert!((ph - 0.5 * (1.0 - f_exact)).abs() < 1e-12);
    assert!(ph <= pf + 1e-9 && pf <= 0.5 * f + 1e-7);
}

#[test]
fn report_rows_and_exact_error() {
    let ch = zero_plus();
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(cqp_report_new(ch, 4, 0.45, &mut rep), CqpStatus::Ok);
        assert_eq!(cqp_report_len(rep), 4);
        let mut rec = CqpIndexRecord::default();
        let mut total = 0.0;
        for i in 1..=4 {
            assert_eq!(cqp_report_get(rep, i, &mut rec), CqpStatus::Ok);
            assert_eq!(rec.index, i);
            assert!(rec.fidelity <= rec.z_fc + 1e-6);
            total += rec.holevo;
        }
        let mut i1 = 0.0;
        cqp_holevo(ch, &mut i1);
        assert!((total - 4.0 * i1).abs() < 1e-6);
        assert_eq!(cqp_report_get(rep, 5, &mut rec), CqpStatus::Other);
        assert!(last_error().contains("index 5"));
        cqp_report_free(rep);

        let info = [4usize];
        let mut e = 0.0;
        assert_eq!(cqp_exact_error(ch, 4, info.as_ptr(), 1, CqpVariant::Helstrom, 0.45, &mut e), CqpStatus::Ok);
        // one information bit: the Helstrom error of the last synthesized channel
        let f4 = 0.5f64.sqrt().powi(4);
        assert!((e - 0.5 * (1.0 - (1.0 - f4 * f4).sqrt())).abs() < 1e-9, "{e}");
        cqp_channel_free(ch);
    }
}

#[test]
fn bpsk_handles_and_points() {
    let mut ch = ptr::null_mut();
    let mut p = CqpBpskPoint::default();
    let mut f = 0.0;
    unsafe {
        assert_eq!(cqp_channel_new_bpsk(1.0, &mut ch), CqpStatus::Ok);
        assert_eq!(cqp_fidelity(ch, &mut f), CqpStatus::Ok);
        cqp_channel_free(ch);
        assert_eq!(cqp_bpsk_point(1.0, &mut p), CqpStatus::Ok);
    }
    assert!((f - (-2.0f64).exp()).abs() < 1e-12);
    assert!((p.chi - 0.986747).abs() < 1e-6 && (p.i_hel - 0.957663).abs() < 1e-6);
    assert!((p.fraction - 0.029475).abs() < 1e-6);
}

#[test]
fn errors_and_null_handling() {
    let bad = [0.7, 0.0, 0.0, 0.5];
    let mut ch = ptr::null_mut();
    let mut x = 0.0;
    unsafe {
        assert_eq!(cqp_channel_new(2, bad.as_ptr(), ptr::null(), PLUS.as_ptr(), ptr::null(), &mut ch), CqpStatus::Other);
        assert!(ch.is_null());
        assert!(last_error().contains("trace"), "{}", last_error());
        assert_eq!(cqp_channel_new(2, ptr::null(), ptr::null(), PLUS.as_ptr(), ptr::null(), &mut ch), CqpStatus::NullPointer);
        assert_eq!(cqp_fidelity(ptr::null(), &mut x), CqpStatus::NullPointer);
        assert_eq!(cqp_bpsk_point(-1.0, &mut CqpBpskPoint::default()), CqpStatus::Other);
        let good = zero_plus();
        let mut rep = ptr::null_mut();
        assert_eq!(cqp_report_new(good, 16, 0.45, &mut rep), CqpStatus::Guard);
        assert_eq!(cqp_report_new(good, 4, 0.7, &mut rep), CqpStatus::Other);
        assert!(rep.is_null());
        assert_eq!(cqp_fidelity(good, ptr::null_mut()), CqpStatus::NullPointer);
        cqp_channel_free(good);
        cqp_channel_free(ptr::null_mut());
        cqp_report_free(ptr::null_mut());
        assert_eq!(cqp_report_len(ptr::null()), 0);
    }
    let mut small = [1 as std::ffi::c_char; 4];
    let full = unsafe { cqp_last_error(small.as_mut_ptr(), small.len()) };
    assert!(full > 3 && small[3] == 0);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cqp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/cqpolar.h")).unwrap();
    for f in ["cqp_channel_new", "cqp_channel_free", "cqp_report_free", "cqp_last_error", "CQP_STATUS_GUARD"] {
        assert!(header.contains(f), "{f}");
    }
    let obj = tempfile::tempdir().unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-c"])
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/smoke.c"))
        .arg("-o")
        .arg(obj.path().join("smoke.o"))
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
