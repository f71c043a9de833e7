//! Oracles shared by the integration and acceptance targets.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sparsrec::solver::WeightedProblem;

/// Closed form for diagonal `B = diag(d)`: `x_i = shrink(d_i c_i, α w_i)/d_i²`.
pub fn diagonal_minimizer(d: &DVector<f64>, c: &DVector<f64>, w: &DVector<f64>, alpha: f64) -> DVector<f64> {
    DVector::from_fn(d.len(), |i, _| {
        let v = d[i] * c[i];
        let k = alpha * w[i];
        let s = if v > k {
            v - k
        } else if v < -k {
            v + k
        } else {
            0.0
        };
        s / (d[i] * d[i])
    })
}

pub fn random_diagonal(rng: &mut impl Rng) -> (DVector<f64>, DVector<f64>, DVector<f64>, f64) {
    let n = rng.gen_range(1..6);
    let d = DVector::from_fn(n, |_, _| rng.gen_range(0.3..2.0));
    let c = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let w = DVector::from_fn(n, |_, _| rng.gen_range(0.2..1.5));
    (d, c, w, rng.gen_range(0.01..1.0))
}

/// Random `P`, `P e_j`, `W` instance with 3 to 6 unknowns: `P` projects onto
/// the row space of a random wide matrix of rank at least 2. Instances with
/// nearly parallel columns of `P` are redrawn, since the minimizer need not be
/// unique there.
pub fn random_projector_problem(rng: &mut impl Rng) -> WeightedProblem {
    let n = rng.gen_range(3..=6);
    let m = rng.gen_range(2..n);
    let p = loop {
        let a: DMatrix<f64> = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let Some(g) = (&a * a.transpose()).try_inverse() else { continue };
        let p = a.transpose() * g * &a;
        if max_column_cosine(&p) < 0.99 {
            break p;
        }
    };
    let w: DVector<f64> = DVector::from_fn(n, |i, _| p[(i, i)].sqrt());
    let j = rng.gen_range(0..n);
    let mut target = p.column(j).into_owned();
    // mixing in a second column gives non-trivial supports as well
    if rng.gen_bool(0.5) {
        target += p.column((j + 1) % n) * rng.gen_range(-1.0..1.0);
    }
    let alpha = rng.gen_range(0.01..0.5) * w.min();
    WeightedProblem::new(p, target, w, alpha).unwrap()
}

/// Exhaustive minimizer over every support and sign pattern, keeping only
/// points whose subgradient condition holds.
pub fn brute_force(p: &WeightedProblem) -> DVector<f64> {
    let n = p.dim();
    let grad_at = |x: &DVector<f64>| p.b.tr_mul(&(&p.b * x - &p.c));
    let mut best: Option<(DVector<f64>, f64)> = None;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        for signs in 0u32..(1 << idx.len()) {
            let x = if idx.is_empty() {
                DVector::zeros(n)
            } else {
                let bs = p.b.select_columns(&idx);
                let s = DVector::from_fn(idx.len(), |k, _| if signs & (1 << k) != 0 { -1.0 } else { 1.0 });
                let rhs = bs.tr_mul(&p.c) - DVector::from_fn(idx.len(), |k, _| p.alpha * p.w[idx[k]] * s[k]);
                let gram = bs.tr_mul(&bs);
                // supports larger than rank(B) have no unique stationary point
                let ev = gram.symmetric_eigenvalues();
                if ev.min() <= 1e-10 * ev.max() {
                    continue;
                }
                let Some(xs) = gram.cholesky().map(|ch| ch.solve(&rhs)) else { continue };
                if (0..idx.len()).any(|k| xs[k] * s[k] <= 0.0) {
                    continue;
                }
                let mut x = DVector::zeros(n);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = xs[k];
                }
                x
            };
            let g = grad_at(&x);
            let ok = (0..n).all(|i| {
                let bound = p.alpha * p.w[i];
                if x[i] == 0.0 {
                    g[i].abs() <= bound * (1.0 + 1e-9)
                } else {
                    (g[i] + bound * x[i].signum()).abs() <= 1e-9 * (1.0 + bound)
                }
            });
            if !ok {
                continue;
            }
            let f = p.objective(&x);
            if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
                best = Some((x, f));
            }
        }
    }
    best.expect("a convex problem has a stationary point").0
}

fn max_column_cosine(p: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..p.ncols() {
        for j in i + 1..p.ncols() {
            let (a, b) = (p.column(i), p.column(j));
            worst = worst.max((a.dot(&b) / (a.norm() * b.norm())).abs());
        }
    }
    worst
}
