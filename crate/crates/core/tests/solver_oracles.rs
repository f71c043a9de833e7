mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsrec::solver::{shrink, shrink_vec, solve, SolverConfig, WeightedProblem};

proptest! {
    #[test]
    fn shrink_is_the_prox_of_abs(v in -10.0f64..10.0, kappa in 0.0f64..5.0) {
        let s = shrink(v, kappa).unwrap();
        let f = |x: f64| 0.5 * (x - v).powi(2) + kappa * x.abs();
        // prox optimality against a fine grid around the candidate
        for d in [-1e-3, -1e-6, 1e-6, 1e-3] {
            prop_assert!(f(s) <= f(s + d) + 1e-15);
        }
        prop_assert!(s.abs() <= v.abs());
        prop_assert!(s == 0.0 || s.signum() == v.signum());
    }

    #[test]
    fn shrink_vec_matches_scalar(v in prop::collection::vec(-5.0f64..5.0, 1..20), k in 0.0f64..2.0) {
        let v = DVector::from_vec(v);
        let kappa = DVector::from_element(v.len(), k);
        let s = shrink_vec(&v, &kappa).unwrap();
        for i in 0..v.len() {
            prop_assert_eq!(s[i], shrink(v[i], k).unwrap());
        }
    }
}

#[test]
fn shrink_rejects_negative_threshold() {
    assert!(shrink(1.0, -1.0).is_err());
    assert!(shrink_vec(&DVector::from_element(2, 1.0), &DVector::from_element(3, 1.0)).is_err());
}

#[test]
fn diagonal_instances_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (d, c, w, alpha) = common::random_diagonal(&mut rng);
        let problem = WeightedProblem::new(DMatrix::from_diagonal(&d), c.clone(), w.clone(), alpha).unwrap();
        let r = solve(&problem, &config, None).unwrap();
        assert!(r.converged);
        worst = worst.max((&r.x - common::diagonal_minimizer(&d, &c, &w, alpha)).amax());
    }
    assert!(worst <= 1e-8, "worst deviation {worst:e}");
}

#[test]
fn small_problems_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let config = SolverConfig::default();
    for trial in 0..50 {
        let problem = common::random_projector_problem(&mut rng);
        let r = solve(&problem, &config, None).unwrap();
        let x = common::brute_force(&problem);
        assert!(r.converged, "trial {trial}");
        assert!((&r.x - &x).amax() <= 1e-6, "trial {trial}: {} vs {}", r.x, x);
    }
}

#[test]
fn zero_is_optimal_above_the_threshold() {
    let b = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 1.0]);
    let c = DVector::from_vec(vec![1.0, -0.5]);
    let w = DVector::from_element(3, 1.0);
    let threshold = b.tr_mul(&c).amax();
    let p = WeightedProblem::new(b, c, w, threshold * 1.01).unwrap();
    let r = solve(&p, &SolverConfig::default(), None).unwrap();
    assert_eq!(r.x.amax(), 0.0);
}

#[test]
fn warm_start_reaches_the_same_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = DMatrix::from_fn(4, 8, |_, _| rng.gen_range(-1.0..1.0));
    let c = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
    let p = WeightedProblem::new(b, c, DVector::from_element(8, 1.0), 0.05).unwrap();
    let cold = solve(&p, &SolverConfig::default(), None).unwrap();
    let start = DVector::from_element(8, 0.3);
    let warm = solve(&p, &SolverConfig::default(), Some(&start)).unwrap();
    assert!((cold.objective - warm.objective).abs() <= 1e-10);
    assert!(warm.kkt_violation <= 1e-8);
}

#[test]
fn invalid_inputs_are_rejected() {
    let b = DMatrix::identity(2, 2);
    let c = DVector::from_element(2, 1.0);
    assert!(WeightedProblem::new(b.clone(), c.clone(), DVector::from_element(2, 1.0), -1.0).is_err());
    assert!(WeightedProblem::new(b.clone(), c.clone(), DVector::from_element(2, 0.0), 0.1).is_err());
    assert!(WeightedProblem::new(b, DVector::from_element(3, 1.0), DVector::from_element(2, 1.0), 0.1).is_err());
}
