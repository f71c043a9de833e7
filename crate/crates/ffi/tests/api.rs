use std::ffi::CStr;
use std::ptr;

use sparsrec_ffi::*;

fn last_error() -> String {
    let p = sparsrec_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn transfer_weights_and_prediction() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(sparsrec_transfer_build(1, 17, 4, 1.0, &mut t), SparsrecStatus::Ok);
        let (mut m, mut n, mut rank) = (0, 0, 0);
        assert_eq!(sparsrec_transfer_shape(t, &mut m, &mut n, &mut rank), SparsrecStatus::Ok);
        assert_eq!((m, n, rank), (2, 4, 2));

        let mut a = vec![0.0; m * n];
        assert_eq!(sparsrec_transfer_matrix(t, a.as_mut_ptr(), a.len()), SparsrecStatus::Ok);
        assert!(a.iter().all(|v| v.is_finite()));

        let mut w = ptr::null_mut();
        assert_eq!(sparsrec_weights_new(t, 0, &mut w), SparsrecStatus::Ok);
        let mut weights = vec![0.0; n];
        assert_eq!(sparsrec_weights_get(w, weights.as_mut_ptr(), n), SparsrecStatus::Ok);
        let mut col = vec![0.0; n];
        assert_eq!(sparsrec_weights_projected_unit(w, 1, col.as_mut_ptr(), n), SparsrecStatus::Ok);
        // w_1 = ‖P e_1‖ and [P e_1]_1 = w_1²
        assert!((col[1] - weights[1] * weights[1]).abs() < 1e-12);

        let (mut gamma, mut upper, mut feasible) = (0.0, 0.0, false);
        assert_eq!(
            sparsrec_predict_noise_free(w, 1, 1e-3, &mut gamma, &mut upper, &mut feasible),
            SparsrecStatus::Ok
        );
        assert!(feasible);
        assert!((upper - weights[1]).abs() < 1e-12);
        assert!((gamma - (1.0 - 1e-3 / upper)).abs() < 1e-15);

        let (mut holds, mut failures) = (false, usize::MAX);
        assert_eq!(sparsrec_max_property(w, &mut holds, &mut failures), SparsrecStatus::Ok);
        assert!(holds);
        assert_eq!(failures, 0);

        let mut s = ptr::null_mut();
        assert_eq!(sparsrec_solver_from_weights(w, &mut s), SparsrecStatus::Ok);
        let mut x = vec![0.0; n];
        let (mut its, mut conv) = (0, false);
        let status = sparsrec_solver_solve(
            s,
            col.as_ptr(),
            n,
            weights.as_ptr(),
            n,
            1e-3,
            x.as_mut_ptr(),
            n,
            &mut its,
            &mut conv,
        );
        assert_eq!(status, SparsrecStatus::Ok);
        assert!(conv && its > 0);
        assert!((x[1] - gamma).abs() < 1e-8);

        sparsrec_solver_free(s);
        sparsrec_weights_free(w);
        sparsrec_transfer_free(t);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(sparsrec_transfer_build(3, 17, 4, 1.0, &mut t), SparsrecStatus::InvalidArgument);
        assert!(t.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(sparsrec_transfer_build(1, 17, 4, 1.0, ptr::null_mut()), SparsrecStatus::NullPointer);
        assert!(last_error().contains("null"));

        let (mut m, mut n, mut r) = (0, 0, 0);
        assert_eq!(sparsrec_transfer_shape(ptr::null(), &mut m, &mut n, &mut r), SparsrecStatus::NullPointer);

        let b = [1.0, 0.0, 0.0, 1.0];
        let mut s = ptr::null_mut();
        assert_eq!(sparsrec_solver_new(b.as_ptr(), 2, 2, &mut s), SparsrecStatus::Ok);
        let c = [1.0, 1.0];
        let mut x = [0.0; 2];
        let w = [1.0, 1.0];
        let st = sparsrec_solver_solve(s, c.as_ptr(), 2, w.as_ptr(), 2, -1.0, x.as_mut_ptr(), 2, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, SparsrecStatus::InvalidArgument);
        assert!(last_error().contains("alpha"));
        let st = sparsrec_solver_solve(s, c.as_ptr(), 2, w.as_ptr(), 2, 0.5, x.as_mut_ptr(), 1, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, SparsrecStatus::InvalidArgument);
        let st = sparsrec_solver_solve(s, c.as_ptr(), 2, w.as_ptr(), 2, 0.5, x.as_mut_ptr(), 2, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, SparsrecStatus::Ok);
        assert!(sparsrec_last_error_message().is_null());
        assert_eq!(x, [0.5, 0.5]);
        sparsrec_solver_free(s);
        sparsrec_solver_free(ptr::null_mut());
    }
}
