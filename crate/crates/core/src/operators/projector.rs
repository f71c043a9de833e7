use nalgebra::{DMatrix, DVector};

use super::svd::SvdFactors;
use crate::error::{invalid, Error, Result};

/// Above this many unknowns the projector is kept factored as `V_k V_kᵀ`.
const DENSE_LIMIT: usize = 512;

/// Orthogonal projector `P_k` onto `N(A_k)^⊥` and the weights
/// `w_i = ‖P_k e_i‖₂` of the diagonal regularization matrix `W_k`.
#[derive(Debug, Clone)]
pub struct ProjectorWeights {
    basis: DMatrix<f64>,
    dense: Option<DMatrix<f64>>,
    weights: DVector<f64>,
    k: usize,
}

impl ProjectorWeights {
    /// `P_k = V_k V_kᵀ`; `k = None` uses the numerical rank (the untruncated `P`).
    pub fn new(svd: &SvdFactors, k: Option<usize>) -> Result<Self> {
        let k = svd.resolve_k(k)?;
        let basis = svd.v.columns(0, k).into_owned();
        let n = basis.nrows();
        let dense = (n <= DENSE_LIMIT).then(|| &basis * basis.transpose());
        let weights = match &dense {
            Some(p) => DVector::from_iterator(n, p.column_iter().map(|c| c.norm())),
            // V_k has orthonormal columns, so ‖V_k V_kᵀ e_i‖ = ‖V_kᵀ e_i‖
            None => DVector::from_iterator(n, basis.row_iter().map(|r| r.norm())),
        };
        let tol = (svd.nrows().max(n)) as f64 * f64::EPSILON;
        if let Some((index, &norm)) = weights.iter().enumerate().find(|(_, &w)| w <= tol) {
            return Err(Error::WeightDegeneracy { index, norm });
        }
        Ok(ProjectorWeights {
            basis,
            dense,
            weights,
            k,
        })
    }

    /// Builds the structure from an explicit orthonormal basis of the range.
    pub fn from_orthonormal_basis(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.tr_mul(&basis);
        if (gram - DMatrix::identity(k, k)).amax() > 1e-10 {
            return Err(invalid("basis columns are not orthonormal"));
        }
        let n = basis.nrows();
        let p = &basis * basis.transpose();
        let weights = DVector::from_iterator(n, p.column_iter().map(|c| c.norm()));
        if let Some((index, &norm)) = weights.iter().enumerate().find(|(_, &w)| w <= n as f64 * f64::EPSILON) {
            return Err(Error::WeightDegeneracy { index, norm });
        }
        Ok(ProjectorWeights {
            basis,
            dense: Some(p),
            weights,
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Orthonormal basis `V_k` of the range of `P_k`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `P_k x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.dense {
            Some(p) => p * x,
            None => &self.basis * self.basis.tr_mul(x),
        }
    }

    /// `P_k e_i`.
    pub fn column(&self, i: usize) -> DVector<f64> {
        match &self.dense {
            Some(p) => p.column(i).into_owned(),
            None => &self.basis * self.basis.row(i).transpose(),
        }
    }

    /// Dense `P_k`, materialized on demand when stored factored.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.dense {
            Some(p) => p.clone(),
            None => &self.basis * self.basis.transpose(),
        }
    }

    /// `W_k⁻¹ v`.
    pub fn weight_inverse_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        v.component_div(&self.weights)
    }

    /// `W_k⁻¹ P_k e_j`.
    pub fn scaled_column(&self, j: usize) -> DVector<f64> {
        self.weight_inverse_apply(&self.column(j))
    }

    /// `‖P² − P‖_max`, `‖Pᵀ − P‖_max` and `|trace P − k|`.
    pub fn algebra_defects(&self) -> (f64, f64, f64) {
        let p = self.matrix();
        let idem = (&p * &p - &p).amax();
        let sym = (p.transpose() - &p).amax();
        let trace = (p.trace() - self.k as f64).abs();
        (idem, sym, trace)
    }
}

/// Largest absolute cosine between distinct columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonparallelReport {
    pub ok: bool,
    pub worst_pair: (usize, usize),
    pub worst_cosine: f64,
}

pub const DEFAULT_NONPARALLEL_TOL: f64 = 1e-12;

/// Scans every column pair for (anti)parallel directions.
pub fn check_nonparallel(a: &DMatrix<f64>, tol: f64) -> Result<NonparallelReport> {
    let n = a.ncols();
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if let Some(i) = norms.iter().position(|&s| s == 0.0) {
        return Err(invalid(format!("column {i} is zero")));
    }
    let gram = a.tr_mul(a);
    let mut worst = NonparallelReport {
        ok: true,
        worst_pair: (0, 0),
        worst_cosine: 0.0,
    };
    for i in 0..n {
        for j in i + 1..n {
            let c = (gram[(i, j)] / (norms[i] * norms[j])).abs();
            if c > worst.worst_cosine || worst.worst_pair == (0, 0) {
                worst.worst_cosine = c;
                worst.worst_pair = (i, j);
            }
        }
    }
    worst.ok = worst.worst_cosine <= 1.0 - tol;
    Ok(worst)
}
