use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::ptr;

use photonpress_ffi::*;

fn assets(rel: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(rel);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { pp_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn library(name: &str) -> *mut PpTemplate {
    let mut t = ptr::null_mut();
    let name = CString::new(name).unwrap();
    assert_eq!(unsafe { pp_template_library(name.as_ptr(), &mut t) }, PpStatus::Ok);
    t
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { std::ffi::CStr::from_ptr(pp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn absorber_plate_force_through_the_c_api() {
    let t = library("absorber-plate");
    assert_eq!(unsafe { pp_template_n_params(t) }, 0);
    let (mut f, mut tau) = ([0.0; 3], [0.0; 3]);
    let omega = [0.0, 0.0, 1.0];
    let s = unsafe {
        pp_estimate_force_torque(
            t,
            ptr::null(),
            0,
            omega.as_ptr(),
            1361.0,
            4096,
            1,
            f.as_mut_ptr(),
            tau.as_mut_ptr(),
        )
    };
    assert_eq!(s, PpStatus::Ok);
    let want = -1361.0 / 299_792_458.0;
    assert!(((f[2] - want) / want).abs() < 1e-2, "{f:?}");
    assert_eq!(last_error(), "");
    unsafe { pp_template_free(t) };
}

#[test]
fn errors_set_codes_and_messages() {
    let mut t = ptr::null_mut();
    let bad = CString::new("no-such-template").unwrap();
    assert_eq!(
        unsafe { pp_template_library(bad.as_ptr(), &mut t) },
        PpStatus::InvalidArgument
    );
    assert!(t.is_null());
    assert!(last_error().contains("no-such-template"));

    assert_eq!(unsafe { pp_template_library(ptr::null(), &mut t) }, PpStatus::NullPointer);
    assert_eq!(unsafe { pp_template_n_params(ptr::null()) }, 0);

    let missing = CString::new("/nonexistent/template.json").unwrap();
    assert_eq!(unsafe { pp_template_load(missing.as_ptr(), &mut t) }, PpStatus::Io);

    let bw = library("box-wing");
    let mut bounds = [0.0; 3];
    assert_eq!(unsafe { pp_template_bounds(bw, bounds.as_mut_ptr(), 3) }, PpStatus::Dimension);
    let mut bounds = [0.0; 4];
    assert_eq!(unsafe { pp_template_bounds(bw, bounds.as_mut_ptr(), 4) }, PpStatus::Ok);
    assert_eq!(bounds, [0.0, 1.0, 2.5, 6.0]);

    let (mut f, mut tau) = ([0.0; 3], [0.0; 3]);
    let omega = [0.0, 0.0, 0.0];
    let theta = [0.5, 4.0];
    let s = unsafe {
        pp_estimate_force_torque(
            bw,
            theta.as_ptr(),
            2,
            omega.as_ptr(),
            1361.0,
            64,
            0,
            f.as_mut_ptr(),
            tau.as_mut_ptr(),
        )
    };
    assert_eq!(s, PpStatus::InvalidArgument);
    unsafe { pp_template_free(bw) };

    let mut buf = [7 as c_char; 1];
    assert!(unsafe { pp_last_error_message(buf.as_mut_ptr(), 1) } > 0);
    assert_eq!(buf[0], 0);
}

#[test]
fn proxy_matches_its_template_and_evaluates() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { pp_proxy_load(assets("proxies/box-wing.json").as_ptr(), &mut p) },
        PpStatus::Ok
    );
    assert_eq!(unsafe { pp_proxy_n_params(p) }, 2);
    let bw = library("box-wing");
    let cube = library("reflectance-cube");
    assert_eq!(unsafe { pp_proxy_check_template(p, bw) }, PpStatus::Ok);
    assert_eq!(unsafe { pp_proxy_check_template(p, cube) }, PpStatus::ProxyMismatch);

    let (mut f, mut tau) = ([0.0; 3], [0.0; 3]);
    let omega = [0.0, 0.0, 1.0];
    let theta = [0.5, 4.0];
    assert_eq!(
        unsafe { pp_proxy_evaluate(p, omega.as_ptr(), theta.as_ptr(), 2, f.as_mut_ptr(), tau.as_mut_ptr()) },
        PpStatus::Ok
    );
    assert!(f.iter().all(|v| v.is_finite()) && f.iter().any(|v| *v != 0.0));
    assert_eq!(
        unsafe { pp_proxy_evaluate(p, omega.as_ptr(), theta.as_ptr(), 1, f.as_mut_ptr(), tau.as_mut_ptr()) },
        PpStatus::Dimension
    );
    unsafe {
        pp_template_free(bw);
        pp_template_free(cube);
        pp_proxy_free(p);
    }
}

#[test]
fn scenario_loss_gradient_and_optimization() {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { pp_scenario_load(assets("scenarios/waypoint.json").as_ptr(), &mut s) },
        PpStatus::Ok
    );
    let n = unsafe { pp_scenario_n_params(s) };
    assert_eq!(n, 1);
    let mut x = [0.0];
    assert_eq!(unsafe { pp_scenario_initial(s, x.as_mut_ptr(), 1) }, PpStatus::Ok);
    assert_eq!(x, [0.5]);
    let (mut loss, mut grad) = (0.0, [0.0]);
    assert_eq!(
        unsafe { pp_scenario_gradient(s, x.as_ptr(), 1, &mut loss, grad.as_mut_ptr()) },
        PpStatus::Ok
    );
    let mut plain = 0.0;
    assert_eq!(unsafe { pp_scenario_loss(s, x.as_ptr(), 1, &mut plain) }, PpStatus::Ok);
    assert_eq!(loss, plain);
    assert!(grad[0] < 0.0, "moving towards the target reflectance lowers the loss");

    let mut best = [0.0];
    let mut final_loss = 0.0;
    assert_eq!(
        unsafe { pp_scenario_optimize(s, best.as_mut_ptr(), 1, &mut final_loss) },
        PpStatus::Ok
    );
    assert!((best[0] - 0.7).abs() < 1e-3, "{best:?}");
    assert!(final_loss < 0.01 * loss);
    assert_eq!(unsafe { pp_scenario_loss(s, x.as_ptr(), 2, &mut plain) }, PpStatus::Dimension);
    unsafe { pp_scenario_free(s) };
    unsafe { pp_scenario_free(ptr::null_mut()) };
}
