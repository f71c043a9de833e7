//! Closed-form recovery predictions for single sources and the checks that
//! back them.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::operators::ProjectorWeights;

/// Entries closer than this are treated as tied when locating an argmax.
pub const ARGMAX_TIE_TOL: f64 = 1e-12;

/// Index of the largest `|[W⁻¹P e_j]_i|`.
pub fn max_property_argmax(pw: &ProjectorWeights, j: usize) -> Result<usize> {
    check_index(pw, j)?;
    let v = pw.scaled_column(j);
    let (first, second) = top_two(&v);
    if let Some(s) = second {
        if v[first].abs() - v[s].abs() <= ARGMAX_TIE_TOL {
            return Err(Error::AmbiguousArgmax(first.min(s), first.max(s)));
        }
    }
    Ok(first)
}

/// Outcome of [`max_property_scan`].
#[derive(Debug, Clone)]
pub struct MaxPropertyScan {
    /// Pairs `(j, argmax)` with `argmax ≠ j`.
    pub failures: Vec<(usize, usize)>,
    /// Indices whose argmax was ambiguous.
    pub ambiguous: Vec<usize>,
    /// `min_j ([W⁻¹Pe_j]_j − max_{i≠j} |[W⁻¹Pe_j]_i|)`.
    pub min_margin: f64,
}

impl MaxPropertyScan {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.ambiguous.is_empty()
    }
}

/// Runs [`max_property_argmax`] for every index.
pub fn max_property_scan(pw: &ProjectorWeights) -> MaxPropertyScan {
    let mut scan = MaxPropertyScan {
        failures: Vec::new(),
        ambiguous: Vec::new(),
        min_margin: f64::INFINITY,
    };
    for j in 0..pw.dim() {
        let v = pw.scaled_column(j);
        let off = (0..v.len()).filter(|&i| i != j).map(|i| v[i].abs()).fold(0.0, f64::max);
        scan.min_margin = scan.min_margin.min(v[j] - off);
        match max_property_argmax(pw, j) {
            Ok(i) if i == j => {}
            Ok(i) => scan.failures.push((j, i)),
            Err(_) => scan.ambiguous.push(j),
        }
    }
    scan
}

fn top_two(v: &DVector<f64>) -> (usize, Option<usize>) {
    let mut first = 0;
    let mut second: Option<usize> = None;
    for i in 1..v.len() {
        if v[i].abs() > v[first].abs() {
            second = Some(first);
            first = i;
        } else if second.is_none_or(|s| v[i].abs() > v[s].abs()) {
            second = Some(i);
        }
    }
    (first, second)
}

fn check_index(pw: &ProjectorWeights, j: usize) -> Result<()> {
    if j >= pw.dim() {
        return Err(invalid(format!("index {j} out of range for {} unknowns", pw.dim())));
    }
    Ok(())
}

/// Closed-form description of the single-spike minimizer `γ e_j`.
#[derive(Debug, Clone)]
pub struct RecoveryPrediction {
    pub j: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    /// `τ_ij = [W⁻¹Pe_j]_i / [W⁻¹Pe_j]_j`; the entry at `j` is 1 by definition.
    pub tau: DVector<f64>,
    pub feasible: bool,
    /// `[W⁻¹A†η]_j / [W⁻¹Pe_j]_j`, zero without noise.
    pub noise_ratio: f64,
}

impl RecoveryPrediction {
    /// `max_{i≠j} |τ_ij|`.
    pub fn max_abs_tau(&self) -> f64 {
        (0..self.tau.len())
            .filter(|&i| i != self.j)
            .map(|i| self.tau[i].abs())
            .fold(0.0, f64::max)
    }
}

fn tau_vector(pw: &ProjectorWeights, j: usize) -> (DVector<f64>, f64) {
    let v = pw.scaled_column(j);
    let vj = v[j];
    (v / vj, vj)
}

/// Noise-free prediction: `γ = 1 − α/[W⁻¹Pe_j]_j` on `0 < α < [W⁻¹Pe_j]_j`.
pub fn predict_noise_free(pw: &ProjectorWeights, j: usize, alpha: f64) -> Result<RecoveryPrediction> {
    check_index(pw, j)?;
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let (tau, upper) = tau_vector(pw, j);
    Ok(RecoveryPrediction {
        j,
        alpha,
        gamma: 1.0 - alpha / upper,
        alpha_lower: 0.0,
        alpha_upper: upper,
        tau,
        feasible: alpha < upper,
        noise_ratio: 0.0,
    })
}

/// Prediction with a noise image `A_k†η`:
/// `γ = 1 − (α − [W⁻¹A_k†η]_j)/[W⁻¹P_k e_j]_j`, valid for
/// `ᾱ < α < [W⁻¹P_k e_j]_j + [W⁻¹A_k†η]_j`.
///
/// `alpha_lower` is the admissibility threshold `ᾱ`; it depends on the data
/// only through `noise_image`.
pub fn predict_with_noise(
    pw: &ProjectorWeights,
    noise_image: &DVector<f64>,
    j: usize,
    alpha: f64,
) -> Result<RecoveryPrediction> {
    check_index(pw, j)?;
    if noise_image.len() != pw.dim() {
        return Err(invalid("noise image length does not match the projector"));
    }
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let (tau, scaled_jj) = tau_vector(pw, j);
    let mut amplification: f64 = 0.0;
    for i in (0..tau.len()).filter(|&i| i != j) {
        let t = tau[i].abs();
        if t >= 1.0 {
            return Err(Error::AssumptionViolation { i, j, tau: t });
        }
        amplification = amplification.max((1.0 + t) / (1.0 - t));
    }
    let eta_scaled = pw.weight_inverse_apply(noise_image);
    let lower = amplification * eta_scaled.amax();
    // stationarity at γe_j: γ[Pe_j]_j = [Pe_j]_j + [A_k†η]_j − αw_j
    let upper = scaled_jj + eta_scaled[j];
    Ok(RecoveryPrediction {
        j,
        alpha,
        gamma: 1.0 - (alpha - eta_scaled[j]) / scaled_jj,
        alpha_lower: lower,
        alpha_upper: upper,
        tau,
        feasible: lower < alpha && alpha < upper,
        noise_ratio: eta_scaled[j] / scaled_jj,
    })
}

/// `x / (1 − α/[W⁻¹Pe_j]_j)` with `j = argmax_i |x_i|`; returns the index too.
pub fn rescale_solution(x: &DVector<f64>, alpha: f64, pw: &ProjectorWeights) -> Result<(DVector<f64>, usize)> {
    if x.len() != pw.dim() {
        return Err(invalid("solution length does not match the projector"));
    }
    if x.amax() == 0.0 {
        return Err(invalid("cannot rescale a zero solution"));
    }
    let j = x.iamax();
    let denom = 1.0 - alpha / pw.scaled_column(j)[j];
    if !(denom > 0.0) {
        return Err(invalid(format!(
            "alpha = {alpha} lies beyond the single-spike interval for index {j}"
        )));
    }
    Ok((x / denom, j))
}

/// Column `j` with `A e_m + A e_n ≈ c A e_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub j: usize,
    pub c: f64,
    pub cosine: f64,
}

pub const DEFAULT_COLLISION_TOL: f64 = 1e-6;

/// Most colinear column `j ∉ {m, n}` to `A e_m + A e_n`, if its absolute
/// cosine reaches `1 − tol`.
pub fn two_source_collision(a: &DMatrix<f64>, m: usize, n: usize, tol: f64) -> Result<Option<Collision>> {
    let cols = a.ncols();
    if m == n || m >= cols || n >= cols {
        return Err(invalid(format!("need two distinct indices below {cols}, got {m} and {n}")));
    }
    let s = a.column(m) + a.column(n);
    let s_norm = s.norm();
    if s_norm == 0.0 {
        return Ok(None);
    }
    let mut best: Option<Collision> = None;
    for j in (0..cols).filter(|&j| j != m && j != n) {
        let col = a.column(j);
        let nn = col.norm_squared();
        if nn == 0.0 {
            continue;
        }
        let dot = s.dot(&col);
        let cosine = dot / (s_norm * nn.sqrt());
        if best.is_none_or(|b| cosine.abs() > b.cosine.abs()) {
            best = Some(Collision { j, c: dot / nn, cosine });
        }
    }
    Ok(best.filter(|b| b.cosine.abs() >= 1.0 - tol))
}

/// Samples `x = e_j + q` with `q ∈ N(P)` and returns the smallest observed
/// `‖Wx‖₁ − ‖We_j‖₁`.
pub fn verify_weighted_norm_inequality(pw: &ProjectorWeights, j: usize, trials: usize, rng_seed: u64) -> Result<f64> {
    check_index(pw, j)?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let n = pw.dim();
    let w = pw.weights();
    let base = w[j];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut min_gap = f64::INFINITY;
    for _ in 0..trials {
        let g = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let mut x = &g - pw.apply(&g);
        x[j] += 1.0;
        let gap = w.dot(&x.abs()) - base;
        if gap < -1e-10 {
            return Err(Error::TheoremViolation(format!(
                "feasible point with smaller weighted norm (gap {gap:e}) for index {j}"
            )));
        }
        min_gap = min_gap.min(gap);
    }
    Ok(min_gap)
}

/// Whether `x` satisfies `P x = P e_j` to within `tol`.
pub fn is_feasible(pw: &ProjectorWeights, j: usize, x: &DVector<f64>, tol: f64) -> bool {
    (pw.apply(x) - pw.column(j)).norm() <= tol
}

/// Writes predictions as `j,alpha,gamma,alpha_lower,alpha_upper,feasible`.
pub fn write_predictions_csv(path: &Path, rows: &[RecoveryPrediction]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["j", "alpha", "gamma", "alpha_lower", "alpha_upper", "feasible"])?;
    for p in rows {
        wtr.write_record([
            p.j.to_string(),
            p.alpha.to_string(),
            p.gamma.to_string(),
            p.alpha_lower.to_string(),
            p.alpha_upper.to_string(),
            p.feasible.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
