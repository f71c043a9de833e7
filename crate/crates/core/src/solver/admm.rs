use std::path::PathBuf;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::problem::{kkt_violation, objective, shrink_unchecked, validate_parts, WeightedProblem};
use crate::error::{invalid, Error, Result};
use crate::operators::ProjectorWeights;

/// Split-Bregman (scaled ADMM) parameters.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Coupling `μ`; `None` uses `α · mean(w)`.
    pub penalty: Option<f64>,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Over-relaxation factor in `[1, 1.8]`.
    pub over_relaxation: f64,
    /// Relative KKT violation at which a polished iterate is accepted.
    pub tol_kkt: f64,
    /// Attempt support polishing every this many iterations; 0 disables it.
    pub polish_every: usize,
    /// With the default penalty, rescale `μ` by 10 every this many
    /// iterations when one residual exceeds the other tenfold; 0 disables it.
    pub rebalance_every: usize,
    /// Per-iteration trace written as CSV when set.
    pub trace_path: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            penalty: None,
            max_iters: 50_000,
            tol_primal: 1e-10,
            tol_dual: 1e-10,
            over_relaxation: 1.0,
            tol_kkt: 1e-10,
            polish_every: 100,
            rebalance_every: 1000,
            trace_path: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(mu) = self.penalty {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(invalid(format!("penalty must be positive, got {mu}")));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0 && self.tol_kkt > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if !(1.0..=1.8).contains(&self.over_relaxation) {
            return Err(invalid(format!(
                "over_relaxation must lie in [1, 1.8], got {}",
                self.over_relaxation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Relative violation, see [`WeightedProblem::kkt_violation`].
    pub kkt_violation: f64,
    pub converged: bool,
    /// Whether `x` came from the reduced KKT system on the detected support.
    pub polished: bool,
}

/// ADMM solver for a fixed `B`.
///
/// `BᵀB = QΛQᵀ` is decomposed once, so `(BᵀB + μI)⁻¹` is available for every
/// `μ`, data vector, weight vector and `α` without refactoring.
#[derive(Debug, Clone)]
pub struct AdmmSolver {
    b: DMatrix<f64>,
    btb: DMatrix<f64>,
    q: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl AdmmSolver {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(invalid("fidelity operator has non-finite entries"));
        }
        let btb = b.tr_mul(&b);
        let eig = SymmetricEigen::try_new(btb.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("eigendecomposition of B^T B did not converge".into()))?;
        let lambda = eig.eigenvalues.map(|l| l.max(0.0));
        Ok(AdmmSolver {
            b,
            btb,
            q: eig.eigenvectors,
            lambda,
        })
    }

    fn shifted_solve(&self, rhs: &DVector<f64>, mu: f64) -> DVector<f64> {
        let mut y = self.q.tr_mul(rhs);
        for (yi, l) in y.iter_mut().zip(self.lambda.iter()) {
            *yi /= l + mu;
        }
        &self.q * y
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn solve(
        &self,
        c: &DVector<f64>,
        w: &DVector<f64>,
        alpha: f64,
        config: &SolverConfig,
        warm_start: Option<&DVector<f64>>,
    ) -> Result<SolveResult> {
        validate_parts(&self.b, c, w, alpha)?;
        config.validate()?;
        let n = self.b.ncols();
        let mut mu = config.penalty.unwrap_or(alpha * w.mean());
        let rebalance = if config.penalty.is_none() { config.rebalance_every } else { 0 };
        let rho = config.over_relaxation;
        let btc = self.b.tr_mul(c);
        let mut kappa = w * (alpha / mu);

        let mut z = match warm_start {
            Some(x0) if x0.len() != n => return Err(invalid("warm start has the wrong length")),
            Some(x0) => x0.clone(),
            None => DVector::zeros(n),
        };
        // dual variable consistent with a fixed point at z
        let mut u = (&btc - &self.btb * &z) / mu;
        let mut trace = config.trace_path.as_ref().map(|_| Vec::new());

        let mut primal = f64::INFINITY;
        let mut dual = f64::INFINITY;
        let mut iterations = 0;
        let mut admm_converged = false;
        let mut best: Option<(DVector<f64>, f64)> = None;

        for it in 1..=config.max_iters {
            iterations = it;
            let x = self.shifted_solve(&(&btc + (&z - &u) * mu), mu);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite iterate at iteration {it}")));
            }
            let x_hat = &x * rho + &z * (1.0 - rho);
            let z_old = std::mem::replace(&mut z, (&x_hat + &u).zip_map(&kappa, shrink_unchecked));
            u += &x_hat - &z;

            primal = (&x - &z).norm();
            dual = mu * (&z - &z_old).norm();
            if let Some(t) = trace.as_mut() {
                t.push((it, objective(&self.b, c, w, alpha, &z), primal, dual));
            }
            if primal <= config.tol_primal && dual <= config.tol_dual {
                admm_converged = true;
                break;
            }
            if config.polish_every > 0 && it % config.polish_every == 0 {
                if let Some((xp, kkt)) = self.polish(&z, &btc, w, alpha) {
                    if kkt <= config.tol_kkt {
                        best = Some((xp, kkt));
                        break;
                    }
                }
            }
            if rebalance > 0 && it % rebalance == 0 {
                let scale = if primal > 10.0 * dual {
                    10.0
                } else if dual > 10.0 * primal {
                    0.1
                } else {
                    1.0
                };
                if scale != 1.0 {
                    mu *= scale;
                    u /= scale;
                    kappa = w * (alpha / mu);
                }
            }
        }

        let raw_kkt = kkt_violation(&(&self.btb * &z - &btc), &btc, w, alpha, &z);
        let (x, kkt, polished) = match best {
            Some((xp, kkt)) => (xp, kkt, true),
            None => match self.polish(&z, &btc, w, alpha) {
                Some((xp, kkt)) if kkt < raw_kkt => (xp, kkt, true),
                _ => (z, raw_kkt, false),
            },
        };

        if let (Some(path), Some(rows)) = (&config.trace_path, trace) {
            write_trace(path, &rows)?;
        }

        Ok(SolveResult {
            objective: objective(&self.b, c, w, alpha, &x),
            x,
            iterations,
            primal_residual: primal,
            dual_residual: dual,
            kkt_violation: kkt,
            converged: admm_converged || kkt <= config.tol_kkt,
            polished,
        })
    }

    /// Solves the first-order conditions restricted to the support and sign
    /// pattern of `z`; returns the candidate and its KKT violation when the
    /// signs are reproduced.
    fn polish(&self, z: &DVector<f64>, btc: &DVector<f64>, w: &DVector<f64>, alpha: f64) -> Option<(DVector<f64>, f64)> {
        let n = z.len();
        let s: Vec<usize> = (0..n).filter(|&i| z[i] != 0.0).collect();
        let mut x = DVector::zeros(n);
        if !s.is_empty() {
            let g = self.btb.select_rows(s.iter()).select_columns(s.iter());
            let rhs = DVector::from_iterator(s.len(), s.iter().map(|&i| btc[i] - alpha * w[i] * z[i].signum()));
            let y = Cholesky::new(g)?.solve(&rhs);
            for (k, &i) in s.iter().enumerate() {
                if y[k].signum() != z[i].signum() || y[k] == 0.0 || !y[k].is_finite() {
                    return None;
                }
                x[i] = y[k];
            }
        }
        let kkt = kkt_violation(&(&self.btb * &x - btc), btc, w, alpha, &x);
        Some((x, kkt))
    }
}

fn write_trace(path: &PathBuf, rows: &[(usize, f64, f64, f64)]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["iteration", "objective", "primal_residual", "dual_residual"])?;
    for (it, obj, p, d) in rows {
        wtr.write_record([it.to_string(), obj.to_string(), p.to_string(), d.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Solves a single [`WeightedProblem`].
pub fn solve(problem: &WeightedProblem, config: &SolverConfig, warm_start: Option<&DVector<f64>>) -> Result<SolveResult> {
    problem.validate()?;
    let solver = AdmmSolver::new(problem.b.clone())?;
    solver.solve(&problem.c, &problem.w, problem.alpha, config, warm_start)
}

/// Decreasing `α_t = α₀ · factor^t`, stopped at `alpha_min`.
#[derive(Debug, Clone)]
pub struct Continuation {
    /// `None` starts at half the zero threshold `max_i |[W⁻¹ target]_i|`.
    pub alpha0: Option<f64>,
    pub alpha_min: f64,
    pub factor: f64,
}

impl Default for Continuation {
    fn default() -> Self {
        Continuation {
            alpha0: None,
            alpha_min: 1e-8,
            factor: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BasisPursuitResult {
    pub x: DVector<f64>,
    /// `‖P x − target‖₂` at exit.
    pub residual: f64,
    pub steps: usize,
    pub final_alpha: f64,
    pub converged: bool,
}

/// Constraint tolerance for [`solve_basis_pursuit`].
pub const BASIS_PURSUIT_TOL: f64 = 1e-6;

/// `min ‖Wx‖₁` subject to `Px = target`, approached through a warm-started
/// sequence of `½‖Px − target‖² + α‖Wx‖₁` problems.
pub fn solve_basis_pursuit(
    pw: &ProjectorWeights,
    target: &DVector<f64>,
    schedule: &Continuation,
    config: &SolverConfig,
) -> Result<BasisPursuitResult> {
    let n = pw.dim();
    if target.len() != n {
        return Err(invalid("target length does not match the projector"));
    }
    let off_range = (pw.apply(target) - target).norm();
    if off_range > 1e-8 * target.norm().max(1.0) {
        return Err(invalid(format!("target is not in the range of P (distance {off_range:e})")));
    }
    if !(schedule.factor > 0.0 && schedule.factor < 1.0) || !(schedule.alpha_min > 0.0) {
        return Err(invalid("continuation needs factor in (0,1) and alpha_min > 0"));
    }
    if target.amax() == 0.0 {
        return Ok(BasisPursuitResult {
            x: DVector::zeros(n),
            residual: 0.0,
            steps: 0,
            final_alpha: 0.0,
            converged: true,
        });
    }
    let alpha0 = match schedule.alpha0 {
        Some(a) if a > 0.0 => a,
        Some(a) => return Err(invalid(format!("alpha0 must be positive, got {a}"))),
        None => pw.weight_inverse_apply(target).amax() / 2.0,
    };
    let mut alphas = Vec::new();
    let mut a = alpha0;
    while a > schedule.alpha_min {
        alphas.push(a);
        a *= schedule.factor;
    }
    alphas.push(schedule.alpha_min);

    let solver = AdmmSolver::new(pw.matrix())?;
    let mut x: Option<DVector<f64>> = None;
    let mut last_ok = false;
    for &alpha in &alphas {
        let r = solver.solve(target, pw.weights(), alpha, config, x.as_ref())?;
        last_ok = r.converged;
        x = Some(r.x);
    }
    let x = x.expect("schedule is non-empty");
    let residual = (pw.apply(&x) - target).norm();
    Ok(BasisPursuitResult {
        x,
        residual,
        steps: alphas.len(),
        final_alpha: schedule.alpha_min,
        converged: last_ok && residual <= BASIS_PURSUIT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::problem::support;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_problem() -> WeightedProblem {
        let b = DMatrix::from_row_slice(3, 4, &[1.0, 0.2, 0.0, 0.5, 0.0, 1.0, 0.3, -0.4, 0.1, 0.0, 1.0, 0.2]);
        let c = DVector::from_vec(vec![1.0, -0.5, 0.8]);
        WeightedProblem::new(b, c, DVector::from_vec(vec![1.0, 0.5, 2.0, 1.0]), 0.05).unwrap()
    }

    #[test]
    fn identity_operator_gives_soft_threshold() {
        let p = WeightedProblem::new(
            DMatrix::identity(4, 4),
            DVector::from_vec(vec![3.0, -0.5, -3.0, 0.9]),
            DVector::from_element(4, 1.0),
            1.0,
        )
        .unwrap();
        let r = solve(&p, &SolverConfig::default(), None).unwrap();
        assert!(r.converged);
        assert!((r.x - DVector::from_vec(vec![2.0, 0.0, -2.0, 0.0])).amax() < 1e-10);
    }

    #[test]
    fn above_zero_threshold_gives_zero() {
        let mut p = small_problem();
        let btc = p.b.tr_mul(&p.c);
        p.alpha = (0..4).map(|i| btc[i].abs() / p.w[i]).fold(0.0, f64::max) * 1.01;
        let r = solve(&p, &SolverConfig::default(), None).unwrap();
        assert_eq!(r.x.amax(), 0.0);
        assert!(r.converged);
    }

    #[test]
    fn kkt_and_objective_consistency() {
        let p = small_problem();
        let r = solve(&p, &SolverConfig::default(), None).unwrap();
        assert!(r.converged);
        assert!(r.kkt_violation <= 1e-6);
        assert!((r.objective - p.objective(&r.x)).abs() <= 1e-10 * r.objective.abs().max(1.0));
        assert!((p.kkt_violation(&r.x) - r.kkt_violation).abs() < 1e-12);
    }

    #[test]
    fn warm_start_does_not_change_unique_minimizer() {
        let p = small_problem();
        let cfg = SolverConfig::default();
        let a = solve(&p, &cfg, None).unwrap();
        let b = solve(&p, &cfg, Some(&DVector::from_vec(vec![5.0, -3.0, 1.0, 2.0]))).unwrap();
        assert!((a.x - b.x).amax() <= 1e-6);
    }

    #[test]
    fn unpolished_admm_also_converges() {
        let p = small_problem();
        let cfg = SolverConfig {
            polish_every: 0,
            ..SolverConfig::default()
        };
        let admm = AdmmSolver::new(p.b.clone()).unwrap();
        let r = admm.solve(&p.c, &p.w, p.alpha, &cfg, None).unwrap();
        assert!(r.converged);
        assert!(r.primal_residual <= 1e-10);
        let polished = solve(&p, &SolverConfig::default(), None).unwrap();
        assert!((r.x - polished.x).amax() < 1e-8);
    }

    #[test]
    fn rejects_bad_config_and_inputs() {
        let p = small_problem();
        let bad = SolverConfig {
            over_relaxation: 2.0,
            ..SolverConfig::default()
        };
        assert!(solve(&p, &bad, None).is_err());
        let bad = SolverConfig {
            tol_primal: 0.0,
            ..SolverConfig::default()
        };
        assert!(solve(&p, &bad, None).is_err());
        assert!(solve(&p, &SolverConfig::default(), Some(&DVector::zeros(2))).is_err());
        let bad = SolverConfig {
            penalty: Some(-1.0),
            ..SolverConfig::default()
        };
        assert!(solve(&p, &bad, None).is_err());
    }

    #[test]
    fn trace_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let cfg = SolverConfig {
            trace_path: Some(path.clone()),
            ..SolverConfig::default()
        };
        let r = solve(&small_problem(), &cfg, None).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "iteration,objective,primal_residual,dual_residual");
        assert_eq!(lines.count(), r.iterations);
    }

    #[test]
    fn scaling_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let c = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let w = DVector::from_fn(3, |_, _| rng.gen_range(0.5..1.5));
        let cfg = SolverConfig::default();
        let base = solve(&WeightedProblem::new(b.clone(), c.clone(), w.clone(), 0.1).unwrap(), &cfg, None).unwrap();
        let s = 3.5;
        let scaled = solve(&WeightedProblem::new(b, c * s, w, 0.1 * s).unwrap(), &cfg, None).unwrap();
        assert!((scaled.x - base.x * s).amax() <= 1e-8 * s);
    }

    #[test]
    fn basis_pursuit_on_two_by_three() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let svd = crate::operators::SvdFactors::compute(&a).unwrap();
        let pw = ProjectorWeights::new(&svd, None).unwrap();
        let cfg = SolverConfig::default();
        for j in 0..3 {
            let r = solve_basis_pursuit(&pw, &pw.column(j), &Continuation::default(), &cfg).unwrap();
            assert!(r.converged);
            assert_eq!(support(&r.x, 1e-6), vec![j]);
            // single-spike closed form at the final alpha
            let expected = 1.0 - r.final_alpha / pw.scaled_column(j)[j];
            assert!((r.x[j] - expected).abs() < 1e-9);
        }
        let zero = solve_basis_pursuit(&pw, &DVector::zeros(3), &Continuation::default(), &cfg).unwrap();
        assert_eq!(zero.x.amax(), 0.0);
        assert!(solve_basis_pursuit(&pw, &DVector::from_vec(vec![1.0, 1.0, -1.0]), &Continuation::default(), &cfg).is_err());
    }
}
