//! Transfer matrix from coarse source coefficients to weighted boundary data.

use nalgebra::{DMatrix, DVector};

use super::assembly::FemSystem;
use super::basis::SourceBasis;
use super::grid::{Dim, Grid};
use crate::error::{invalid, Error, Result};

/// Dense `m × n` transfer matrix `A = R M_∂^{1/2} (L + εM)^{-1} M E`.
///
/// Rows are indexed by the boundary nodes of the inversion grid, columns by
/// coarse source cells.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    matrix: DMatrix<f64>,
    basis: SourceBasis,
}

impl TransferOperator {
    pub fn assemble(system: &FemSystem, basis: &SourceBasis) -> Result<Self> {
        let grid = system.grid();
        if basis.fine_cells_per_side() != grid.cells_per_side() || basis.dim() != grid.dim() {
            return Err(invalid("source basis was built on a different grid"));
        }
        let n = basis.len();
        let mut load = DMatrix::zeros(grid.num_nodes(), n);
        let mut coeffs = DVector::zeros(n);
        for i in 0..n {
            coeffs[i] = 1.0;
            let cell_values = basis.expand(&coeffs)?;
            load.set_column(i, &system.cell_load(&cell_values)?);
            coeffs[i] = 0.0;
        }
        let state = system.solve_state(&load);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Assembly("state solve produced non-finite values".into()));
        }
        let bnodes = grid.boundary_nodes();
        let traces = state.select_rows(bnodes.iter());
        let matrix = system.sqrt_boundary_block() * traces;
        Ok(TransferOperator {
            matrix,
            basis: basis.clone(),
        })
    }

    /// Wraps an explicit matrix (used for small synthetic problems).
    pub fn from_matrix(matrix: DMatrix<f64>, basis: SourceBasis) -> Result<Self> {
        if matrix.ncols() != basis.len() {
            return Err(invalid("matrix columns do not match the source basis"));
        }
        Ok(TransferOperator { matrix, basis })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn basis(&self) -> &SourceBasis {
        &self.basis
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

/// True source used to synthesize observations.
#[derive(Debug, Clone)]
pub enum SourceField {
    /// Coefficients in a coarse basis with `cells_per_side` cells per side.
    Coarse {
        cells_per_side: usize,
        coeffs: DVector<f64>,
    },
    /// Indicator of a disc (2D) or interval (1D) scaled by `amplitude`.
    Disc {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
}

impl SourceField {
    /// Constant value on every cell of `grid`.
    pub fn cell_values(&self, grid: &Grid) -> Result<DVector<f64>> {
        match self {
            SourceField::Coarse {
                cells_per_side,
                coeffs,
            } => {
                let basis = SourceBasis::new(grid, *cells_per_side)?;
                basis.expand(coeffs)
            }
            SourceField::Disc {
                center,
                radius,
                amplitude,
            } => {
                let dim = grid.dim().as_usize();
                if !(*radius > 0.0) || center[..dim].iter().any(|t| !(0.0..=1.0).contains(t)) {
                    return Err(invalid("disc source must have positive radius and center in the domain"));
                }
                Ok(DVector::from_iterator(
                    grid.num_cells(),
                    (0..grid.num_cells()).map(|c| {
                        let p = grid.cell_centroid(c);
                        let d2 = match grid.dim() {
                            Dim::One => (p[0] - center[0]).powi(2),
                            Dim::Two => (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2),
                        };
                        if d2 <= radius * radius {
                            *amplitude
                        } else {
                            0.0
                        }
                    }),
                ))
            }
        }
    }
}

/// Synthesizes `b = M_∂^{1/2} u|_{∂Ω}` on the inversion grid.
///
/// The state is solved on `forward`, its boundary trace evaluated at the
/// boundary nodes of `inverse`, and weighted with the inversion grid's
/// boundary mass root. Passing the same system twice reproduces `A x` exactly
/// (the inverse-crime setting).
pub fn generate_boundary_data(
    source: &SourceField,
    forward: &FemSystem,
    inverse: &FemSystem,
) -> Result<DVector<f64>> {
    if forward.grid().dim() != inverse.grid().dim() {
        return Err(invalid("forward and inverse grids differ in dimension"));
    }
    let values = source.cell_values(forward.grid())?;
    let load = forward.cell_load(&values)?;
    let rhs = DMatrix::from_column_slice(load.len(), 1, load.as_slice());
    let u = forward.solve_state(&rhs);
    let u = u.column(0);
    let inv_grid = inverse.grid();
    let trace: Result<Vec<f64>> = inv_grid
        .boundary_nodes()
        .iter()
        .map(|&node| forward.grid().eval_p1(u.as_slice(), inv_grid.coords()[node]))
        .collect();
    let trace = DVector::from_vec(trace?);
    Ok(inverse.sqrt_boundary_block() * trace)
}
