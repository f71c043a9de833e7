use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Thin SVD `A = U Σ Vᵀ` with singular values sorted in non-increasing order.
///
/// `u` is `m × p` and `v` is `n × p` with `p = min(m, n)`; directions beyond
/// `p` belong to the null spaces and are never needed explicitly.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    pub rank_tol: f64,
}

impl SvdFactors {
    pub fn compute(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(invalid("cannot factor an empty matrix"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V");
        let s = svd.singular_values;

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let sigma = DVector::from_iterator(s.len(), order.iter().map(|&i| s[i]));
        let u = u.select_columns(order.iter());
        let v = v_t.transpose().select_columns(order.iter());

        let rank_tol = m.max(n) as f64 * sigma[0] * f64::EPSILON;
        Ok(SvdFactors { u, sigma, v, rank_tol })
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    /// Number of singular values above `rank_tol`.
    pub fn rank(&self) -> usize {
        self.sigma.iter().filter(|&&s| s > self.rank_tol).count()
    }

    /// Resolves an optional truncation level against the numerical rank.
    pub fn resolve_k(&self, k: Option<usize>) -> Result<usize> {
        let rank = self.rank();
        match k {
            None => Ok(rank),
            Some(0) => Err(invalid("truncation level must be positive")),
            Some(k) if k > rank => Err(invalid(format!(
                "truncation level {k} exceeds numerical rank {rank}"
            ))),
            Some(k) => Ok(k),
        }
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Dense `A_k† = V_k Σ_k⁻¹ U_kᵀ`.
    pub fn pseudo_inverse(&self, k: Option<usize>) -> Result<DMatrix<f64>> {
        let k = self.resolve_k(k)?;
        let mut vk = self.v.columns(0, k).into_owned();
        for j in 0..k {
            vk.column_mut(j).scale_mut(1.0 / self.sigma[j]);
        }
        Ok(vk * self.u.columns(0, k).transpose())
    }
}

/// `A_k† y = V_k Σ_k⁻¹ U_kᵀ y`.
pub fn pseudo_apply(svd: &SvdFactors, k: Option<usize>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if y.len() != svd.nrows() {
        return Err(invalid(format!(
            "vector of length {} applied to pseudo-inverse with {} columns",
            y.len(),
            svd.nrows()
        )));
    }
    let k = svd.resolve_k(k)?;
    let mut coeffs = svd.u.columns(0, k).tr_mul(y);
    for j in 0..k {
        coeffs[j] /= svd.sigma[j];
    }
    Ok(svd.v.columns(0, k) * coeffs)
}

/// `‖A_k† A − P_k‖_max` with `A = UΣVᵀ` rebuilt from the factors and the
/// product formed explicitly.
///
/// Rounding in `A` is amplified by `σ_1 / σ_k`, so the deviation grows like
/// `κ_k · ε`; it is not forced to zero by cancelling `Σ_k†Σ` symbolically.
pub fn projection_identity_check(svd: &SvdFactors, k: usize) -> Result<f64> {
    explicit_projection_deviation(svd, &svd.reconstruct(), k)
}

/// `‖A_k† A − P_k‖_max` for a given `A` (normally the matrix that was factored).
pub fn explicit_projection_deviation(svd: &SvdFactors, a: &DMatrix<f64>, k: usize) -> Result<f64> {
    if a.shape() != (svd.nrows(), svd.ncols()) {
        return Err(invalid("matrix shape does not match the factors"));
    }
    let k = svd.resolve_k(Some(k))?;
    let apa = svd.pseudo_inverse(Some(k))? * a;
    let vk = svd.v.columns(0, k);
    let pk = vk * vk.transpose();
    Ok((apa - pk).amax())
}
