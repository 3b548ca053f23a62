use std::ffi::{c_char, CString};
use std::ptr;

use clockwork_ffi::*;

fn opts(t_end: f64) -> CwSolverOptions {
    CwSolverOptions { t_end, rel_tol: 0.0, abs_tol: 0.0, max_steps: 0, samples: 0 }
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { cw_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn integrate_and_detect_switchover() {
    let mut tr = ptr::null_mut();
    let st = unsafe { cw_integrate(1e-3, 2.0, 0.2, &opts(600.0), &mut tr) };
    assert_eq!(st, CwStatus::Ok);
    unsafe {
        assert_eq!(cw_trajectory_dim(tr), 2);
        assert!(cw_trajectory_len(tr) > 10);
        let (mut t, mut y) = (0.0, [0.0; 2]);
        assert_eq!(cw_trajectory_sample(tr, 0, &mut t, y.as_mut_ptr()), CwStatus::Ok);
        assert_eq!((t, y), (0.0, [0.2, 1.0]));
        assert_eq!(cw_trajectory_sample(tr, 1 << 40, &mut t, y.as_mut_ptr()), CwStatus::NotFound);
        assert_eq!(cw_trajectory_interpolate(tr, 150.0, y.as_mut_ptr()), CwStatus::Ok);
        assert!((y[1] - 6.317_734_439_910_5e-2).abs() < 1e-6);
        assert_eq!(cw_trajectory_interpolate(tr, 700.0, y.as_mut_ptr()), CwStatus::NotFound);
        let mut ev = 0.0;
        assert_eq!(cw_trajectory_switchover(tr, 0.25, &mut ev), CwStatus::Ok);
        assert!((ev - 407.353_224_27).abs() < 1e-4);
        assert_eq!(cw_trajectory_switchover(tr, 0.49, &mut ev), CwStatus::NotFound);
        cw_trajectory_free(tr);
    }
}

#[test]
fn uniform_output_and_dimensional_run() {
    let mut o = opts(400.0);
    o.samples = 40;
    let mut tr = ptr::null_mut();
    unsafe {
        assert_eq!(cw_integrate_dimensional(0.57, 570.0, 0.0068718, 0.0, 0.003263, &o, &mut tr), CwStatus::Ok);
        assert_eq!(cw_trajectory_dim(tr), 3);
        assert_eq!(cw_trajectory_len(tr), 41);
        let (mut t, mut y) = (0.0, [0.0; 3]);
        cw_trajectory_sample(tr, 40, &mut t, y.as_mut_ptr());
        assert_eq!(t, 400.0);
        assert!((y[0] + 2.0 * y[1] - 0.0068718).abs() < 1e-12);
        let mut ev = 0.0;
        assert_eq!(cw_trajectory_switchover(tr, 0.25, &mut ev), CwStatus::Ok);
        assert!(ev > 121.0 && ev < 400.0);
        cw_trajectory_free(tr);
    }
}

#[test]
fn budget_failure_returns_partial_trajectory() {
    let mut o = opts(600.0);
    o.max_steps = 5;
    let mut tr = ptr::null_mut();
    unsafe {
        assert_eq!(cw_integrate(1e-3, 2.0, 0.2, &o, &mut tr), CwStatus::Numerical);
        assert!(last_error().contains("step budget"));
        assert!(!tr.is_null());
        assert!(cw_trajectory_len(tr) > 1);
        cw_trajectory_free(tr);
    }
}

#[test]
fn invalid_arguments_and_null_pointers() {
    let mut tr = ptr::null_mut();
    unsafe {
        assert_eq!(cw_integrate(-1.0, 2.0, 0.2, &opts(10.0), &mut tr), CwStatus::InvalidArgument);
        assert!(tr.is_null());
        assert!(last_error().contains("eps"), "{}", last_error());
        assert_eq!(cw_integrate(1e-3, 2.0, 0.2, &opts(-1.0), &mut tr), CwStatus::InvalidArgument);
        assert_eq!(cw_integrate(1e-3, 2.0, 0.2, ptr::null(), &mut tr), CwStatus::NullPointer);
        assert_eq!(cw_predict(0.003, 0.007, 0.57, 0.0, ptr::null_mut()), CwStatus::NullPointer);
        let (mut b, mut g) = (0.0, 0.0);
        assert_eq!(
            cw_asymptotic_eval(1e-3, 2.0, 0.2, 10.0, 9, ptr::null_mut(), &mut b, &mut g),
            CwStatus::InvalidArgument
        );
        // a successful call clears the message
        let mut t = 0.0;
        assert_eq!(cw_predict(0.003, 0.007, 0.57, 0.0, &mut t), CwStatus::Ok);
        assert_eq!(cw_last_error(ptr::null_mut(), 0), 0);
        cw_trajectory_free(ptr::null_mut());
        cw_measurements_free(ptr::null_mut());
    }
}

#[test]
fn error_message_is_truncated_safely() {
    unsafe {
        let mut tr = ptr::null_mut();
        cw_integrate(-1.0, 2.0, 0.2, &opts(10.0), &mut tr);
        let full = cw_last_error(ptr::null_mut(), 0);
        let mut buf = [1 as c_char; 8];
        assert_eq!(cw_last_error(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(buf[7], 0);
    }
}

#[test]
fn closed_form_quantities() {
    unsafe {
        let mut t = 0.0;
        assert_eq!(cw_predict(0.003263, 0.0068718, 0.57, 0.0, &mut t), CwStatus::Ok);
        assert!((t - 121.2275).abs() < 1e-3);
        assert_eq!(cw_switchover_time(0.57, 570.0, 0.0068718, 0.0, 0.003263, &mut t), CwStatus::Ok);
        assert!((t - 121.2275).abs() < 1e-3);
        assert_eq!(cw_dimensionless_switchover_time(1e-3, 2.0, 0.2, &mut t), CwStatus::Ok);
        assert!((t - 150.0).abs() < 1e-9);

        let mut ev = [0.0; 2];
        assert_eq!(cw_equilibrium_eigenvalues(1e-3, 2.0, 0.0, ev.as_mut_ptr()), CwStatus::Ok);
        ev.sort_by(|a, b| b.total_cmp(a));
        assert!(ev[0].abs() < 1e-10 && (ev[1] + 1.0).abs() < 1e-10);

        let mut b = 0.0;
        assert_eq!(cw_quasi_steady_beta(0.01, 2.0, 0.1, 0.5, &mut b), CwStatus::Ok);
        assert!((b - 0.034_648_345_913_732_088).abs() < 1e-15);
        assert_eq!(cw_quasi_steady_beta(0.01, 2.0, 0.1, -1.0, &mut b), CwStatus::InvalidArgument);
    }
}

#[test]
fn asymptotic_regions() {
    unsafe {
        let (mut r, mut b, mut g) = (0u32, 0.0, 0.0);
        for (tau, want) in [(1.0, 1), (60.0, 2), (150.0, 3), (900.0, 4)] {
            assert_eq!(cw_asymptotic_eval(1e-3, 2.0, 0.2, tau, 0, &mut r, &mut b, &mut g), CwStatus::Ok);
            assert_eq!(r, want, "tau {tau}");
        }
        assert_eq!(cw_asymptotic_eval(1e-3, 2.0, 0.2, 0.0, 2, &mut r, &mut b, &mut g), CwStatus::Ok);
        assert_eq!((r, g), (2, 0.6));
        assert_eq!(cw_asymptotic_eval(1e-3, 2.0, 0.2, 150.0, 4, ptr::null_mut(), &mut b, &mut g), CwStatus::Ok);
        assert_eq!(b, 0.0);
        // no induction period
        assert_eq!(
            cw_asymptotic_eval(1e-3, 4.0, 0.3, 1.0, 0, &mut r, &mut b, &mut g),
            CwStatus::InvalidArgument
        );
    }
}

#[test]
fn fit_bundled_and_pushed_data() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(cw_measurements_bundled(&mut set), CwStatus::Ok);
        assert_eq!(cw_measurements_len(set), 20);
        let mut res = CwFitResult::default();
        assert_eq!(cw_fit(set, 0.0, 0.1, 0, &mut res), CwStatus::Ok);
        assert!(res.converged);
        assert!((res.k0 - 0.573_638_519_272_579_7).abs() < 1e-8, "{}", res.k0);
        assert!(res.phi.abs() < 1e-3);
        cw_measurements_free(set);

        let mut set = ptr::null_mut();
        assert_eq!(cw_measurements_new(&mut set), CwStatus::Ok);
        assert_eq!(cw_fit(set, 0.0, 0.1, 0, &mut res), CwStatus::InvalidArgument);
        for (c0, m0) in [(0.002, 0.004), (0.003, 0.005), (0.004, 0.007), (0.003, 0.009)] {
            let t = (c0 - 0.1 * m0) / (0.8 * m0 * m0);
            assert_eq!(cw_measurements_push(set, c0, m0, t), CwStatus::Ok);
        }
        assert_eq!(cw_measurements_push(set, -1.0, 0.1, 1.0), CwStatus::InvalidArgument);
        assert_eq!(cw_fit(set, 0.0, 0.1, 0, &mut res), CwStatus::Ok);
        assert!((res.k0 - 0.8).abs() < 1e-9 && (res.phi - 0.1).abs() < 1e-9);
        cw_measurements_free(set);
    }
}

#[test]
fn parse_csv() {
    unsafe {
        let text = CString::new("series_id,c0_mol_l,m0_mol_l,t_sw_s\na,0.003,0.007,100\n").unwrap();
        let mut set = ptr::null_mut();
        assert_eq!(cw_measurements_parse(text.as_ptr(), &mut set), CwStatus::Ok);
        assert_eq!(cw_measurements_len(set), 1);
        cw_measurements_free(set);

        let bad = CString::new("series_id,c0_mol_l,m0_mol_l,t_sw_s\na,0.003,x,100\n").unwrap();
        assert_eq!(cw_measurements_parse(bad.as_ptr(), &mut set), CwStatus::InvalidArgument);
        assert!(set.is_null());
        assert!(last_error().contains("line 2"), "{}", last_error());
    }
}
