//! L²-normalized indicator functions of a coarse partition of the domain.

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::grid::{Dim, Grid};
use crate::error::{invalid, Result};

/// Coarse source space `φ_i = 𝒳_{Ω_i} / ‖𝒳_{Ω_i}‖`.
///
/// Sources are represented cell-wise on the fine grid: `E` maps a vector of
/// coarse coefficients to the constant value taken on every fine cell, so
/// each fine cell belongs to exactly one coarse cell and no node ownership
/// rule is needed.
#[derive(Debug, Clone)]
pub struct SourceBasis {
    dim: Dim,
    coarse_per_side: usize,
    fine_cells_per_side: usize,
    cells_of: Vec<Vec<usize>>,
    scale: Vec<f64>,
    e: CscMatrix<f64>,
}

impl SourceBasis {
    pub fn new(fine: &Grid, coarse_per_side: usize) -> Result<Self> {
        let fine_n = fine.cells_per_side();
        if coarse_per_side == 0 || !fine_n.is_multiple_of(coarse_per_side) {
            return Err(invalid(format!(
                "{fine_n} fine cells per side are not divisible into {coarse_per_side} coarse cells"
            )));
        }
        let ratio = fine_n / coarse_per_side;
        let n = match fine.dim() {
            Dim::One => coarse_per_side,
            Dim::Two => coarse_per_side * coarse_per_side,
        };
        let mut cells_of = vec![Vec::new(); n];
        for c in 0..fine.num_cells() {
            let (sx, sy) = fine.cell_square(c);
            let i = (sy / ratio) * coarse_per_side + sx / ratio;
            let i = if fine.dim() == Dim::One { sx / ratio } else { i };
            cells_of[i].push(c);
        }
        let scale: Vec<f64> = cells_of
            .iter()
            .map(|cells| {
                let measure: f64 = cells.iter().map(|&c| fine.cell_measure(c)).sum();
                1.0 / measure.sqrt()
            })
            .collect();
        let mut coo = CooMatrix::new(fine.num_cells(), n);
        for (i, cells) in cells_of.iter().enumerate() {
            for &c in cells {
                coo.push(c, i, scale[i]);
            }
        }
        Ok(SourceBasis {
            dim: fine.dim(),
            coarse_per_side,
            fine_cells_per_side: fine_n,
            cells_of,
            scale,
            e: CscMatrix::from(&coo),
        })
    }

    /// Number of coarse cells `n`.
    pub fn len(&self) -> usize {
        self.cells_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells_of.is_empty()
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coarse_per_side(&self) -> usize {
        self.coarse_per_side
    }

    pub fn fine_cells_per_side(&self) -> usize {
        self.fine_cells_per_side
    }

    /// Fine cells covered by coarse cell `i`.
    pub fn fine_cells(&self, i: usize) -> &[usize] {
        &self.cells_of[i]
    }

    /// `1 / ‖𝒳_{Ω_i}‖_{L²}`; equals `1/H` in 2D for coarse side `H`.
    pub fn normalization(&self, i: usize) -> f64 {
        self.scale[i]
    }

    /// Fine-cell × coarse-cell prolongation.
    pub fn prolongation(&self) -> &CscMatrix<f64> {
        &self.e
    }

    /// Fine-cell values of `Σ x_i φ_i`.
    pub fn expand(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        if coeffs.len() != self.len() {
            return Err(invalid(format!(
                "expected {} coarse coefficients, got {}",
                self.len(),
                coeffs.len()
            )));
        }
        let mut out = DVector::zeros(self.e.nrows());
        for (i, cells) in self.cells_of.iter().enumerate() {
            let v = coeffs[i] * self.scale[i];
            for &c in cells {
                out[c] = v;
            }
        }
        Ok(out)
    }

    /// Lattice position `(cx, cy)` of coarse cell `i` (`cy = 0` in 1D).
    pub fn cell_position(&self, i: usize) -> (usize, usize) {
        match self.dim {
            Dim::One => (i, 0),
            Dim::Two => (i % self.coarse_per_side, i / self.coarse_per_side),
        }
    }

    pub fn cell_index(&self, cx: usize, cy: usize) -> usize {
        match self.dim {
            Dim::One => cx,
            Dim::Two => cy * self.coarse_per_side + cx,
        }
    }

    pub fn cell_center(&self, i: usize) -> [f64; 2] {
        let h = 1.0 / self.coarse_per_side as f64;
        let (cx, cy) = self.cell_position(i);
        match self.dim {
            Dim::One => [(cx as f64 + 0.5) * h, 0.0],
            Dim::Two => [(cx as f64 + 0.5) * h, (cy as f64 + 0.5) * h],
        }
    }

    /// Chebyshev distance, in coarse cells, from cell `i` to the boundary
    /// ring (0 for cells touching ∂Ω).
    pub fn boundary_ring(&self, i: usize) -> usize {
        let last = self.coarse_per_side - 1;
        let (cx, cy) = self.cell_position(i);
        match self.dim {
            Dim::One => cx.min(last - cx),
            Dim::Two => cx.min(last - cx).min(cy).min(last - cy),
        }
    }

    /// Coarse cell whose center is nearest to `point` (ties go to the lower index).
    pub fn nearest_cell(&self, point: [f64; 2]) -> usize {
        (0..self.len())
            .map(|i| {
                let c = self.cell_center(i);
                let d = (c[0] - point[0]).powi(2) + (c[1] - point[1]).powi(2);
                (i, d)
            })
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn gram(fine: &Grid, basis: &SourceBasis) -> DMatrix<f64> {
        let e = DMatrix::from(basis.prolongation());
        let areas = DVector::from_iterator(fine.num_cells(), (0..fine.num_cells()).map(|c| fine.cell_measure(c)));
        e.transpose() * DMatrix::from_diagonal(&areas) * e
    }

    #[test]
    fn matching_1d_grids_give_scaled_identity() {
        let fine = Grid::new(Dim::One, 5).unwrap();
        let basis = SourceBasis::new(&fine, 4).unwrap();
        let e = DMatrix::from(basis.prolongation());
        let h: f64 = 0.25;
        assert!((e - DMatrix::identity(4, 4) / h.sqrt()).amax() < 1e-15);
        assert!((gram(&fine, &basis) - DMatrix::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn orthonormal_on_nested_2d_grid() {
        let fine = Grid::new(Dim::Two, 17).unwrap();
        let basis = SourceBasis::new(&fine, 4).unwrap();
        assert_eq!(basis.len(), 16);
        assert!((gram(&fine, &basis) - DMatrix::identity(16, 16)).amax() < 1e-10);
        // scale is 1/H
        assert!((basis.normalization(5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn supports_are_confined_to_coarse_cells() {
        let fine = Grid::new(Dim::Two, 65).unwrap();
        let basis = SourceBasis::new(&fine, 16).unwrap();
        assert_eq!(basis.len(), 256);
        let hc = 1.0 / 16.0;
        let mut seen = vec![false; fine.num_cells()];
        for i in 0..basis.len() {
            let (cx, cy) = basis.cell_position(i);
            let (x0, y0) = (cx as f64 * hc, cy as f64 * hc);
            for &c in basis.fine_cells(i) {
                assert!(!seen[c], "fine cell {c} in two coarse cells");
                seen[c] = true;
                for &node in fine.cell_nodes(c) {
                    let p = fine.coords()[node];
                    assert!(p[0] >= x0 - 1e-15 && p[0] <= x0 + hc + 1e-15);
                    assert!(p[1] >= y0 - 1e-15 && p[1] <= y0 + hc + 1e-15);
                }
            }
            assert_eq!(basis.fine_cells(i).len(), 2 * 4 * 4);
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn rejects_non_nested_resolution() {
        let fine = Grid::new(Dim::Two, 63).unwrap();
        assert!(SourceBasis::new(&fine, 16).is_err());
        assert!(SourceBasis::new(&fine, 0).is_err());
    }

    #[test]
    fn rings_and_lookup() {
        let fine = Grid::new(Dim::Two, 65).unwrap();
        let basis = SourceBasis::new(&fine, 16).unwrap();
        assert_eq!(basis.boundary_ring(basis.cell_index(0, 7)), 0);
        assert_eq!(basis.boundary_ring(basis.cell_index(8, 1)), 1);
        assert_eq!(basis.boundary_ring(basis.cell_index(7, 8)), 7);
        let j = basis.nearest_cell([0.4, 0.6]);
        assert_eq!(basis.cell_position(j), (6, 9));
    }
}
